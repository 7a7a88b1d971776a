#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "chy/calculus.hpp"
#include "chy/fft.hpp"
#include "chy/forms.hpp"
#include "chy/models.hpp"
#include "chy/util.hpp"

using namespace chy;

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;
constexpr double kPi = 3.14159265358979323846264338;

ScalarField sample(const ChartPtr& chart, const std::function<double(const GridChart&, std::size_t)>& fn) {
    ScalarField f(chart);
    for (std::size_t p = 0; p < f.size(); ++p) f.v[p] = fn(*chart, p);
    return f;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("chart validation") {
    CHECK_THROWS_AS(GridChart(1, 16), ConfigError);
    CHECK_THROWS_AS(GridChart(2, 6), ConfigError);
    CHECK_THROWS_AS(GridChart(2, 12), ConfigError); // not a power of two
    CHECK_THROWS_AS(GridChart(2, 16, {1.0, 1.0}), ConfigError);
    GridChart ok(2, 16);
    CHECK(ok.point_count() == 65536);
    CHECK(ok.cell_volume() == doctest::Approx(1.0 / 65536).epsilon(1e-15));
}

TEST_CASE("spectral derivative closed forms") {
    auto chart = make_chart(2, 16);

    SUBCASE("derivative of a constant vanishes") {
        ScalarField c(chart, 3.25);
        ComplexField d = holomorphic_derivative(c, 0, false);
        double sup = 0.0;
        for (const auto& z : d.v) sup = std::max(sup, std::abs(z));
        CHECK(sup < 1e-13);
    }

    SUBCASE("d/dz1 of cos(2 pi x1) is -pi sin(2 pi x1)") {
        // d/dz = (d/dx - i d/dy)/2 and the field has no y-dependence.
        ScalarField f = sample(chart, [](const GridChart& g, std::size_t p) {
            return std::cos(kTwoPi * g.coordinate(p, 0));
        });
        ComplexField d = holomorphic_derivative(f, 0, false);
        double err = 0.0;
        for (std::size_t p = 0; p < d.size(); ++p) {
            double expect = -kPi * std::sin(kTwoPi * chart->coordinate(p, 0));
            err = std::max(err, std::abs(d.v[p] - cxd(expect, 0.0)));
        }
        CHECK(err < 1e-12);
    }

    SUBCASE("conjugate derivative of sin(2 pi y2) is i pi cos(2 pi y2)") {
        // d/dzbar = (d/dx + i d/dy)/2; the x-part vanishes and the
        // y-derivative is 2 pi cos, so the result is purely imaginary.
        ScalarField f = sample(chart, [](const GridChart& g, std::size_t p) {
            return std::sin(kTwoPi * g.coordinate(p, 3));
        });
        ComplexField d = holomorphic_derivative(f, 1, true);
        double err = 0.0;
        for (std::size_t p = 0; p < d.size(); ++p) {
            cxd expect(0.0, kPi * std::cos(kTwoPi * chart->coordinate(p, 3)));
            err = std::max(err, std::abs(d.v[p] - expect));
        }
        CHECK(err < 1e-12);
    }

    SUBCASE("mixed holomorphic derivatives commute") {
        Rng rng(7);
        ScalarField f = random_band_limited(chart, 1.0, 2, rng);
        ComplexField a = holomorphic_derivative(holomorphic_derivative(f, 0, false), 1, true);
        ComplexField b = holomorphic_derivative(holomorphic_derivative(f, 1, true), 0, false);
        double err = 0.0;
        for (std::size_t p = 0; p < a.size(); ++p) err = std::max(err, std::abs(a.v[p] - b.v[p]));
        CHECK(err < 1e-12);
    }

    SUBCASE("band limit flag") {
        ScalarField f(chart);
        f.band_limit = 2;
        CHECK(band_limit_resolved(f));
        f.band_limit = 8; // at the Nyquist frequency of resolution 16
        CHECK_FALSE(band_limit_resolved(f));
    }
}

TEST_CASE("integration") {
    auto chart = make_chart(2, 16);
    HermitianMetricField flat = HermitianMetricField::identity(chart);

    SUBCASE("constant against the flat metric: 2^n det(I) = 4") {
        ScalarField one(chart, 1.0);
        CHECK(integrate(one, flat) == doctest::Approx(4.0).epsilon(1e-14));
    }

    SUBCASE("mean-zero mode integrates to zero") {
        ScalarField f = sample(chart, [](const GridChart& g, std::size_t p) {
            return std::cos(kTwoPi * g.coordinate(p, 0));
        });
        CHECK(std::abs(integrate(f, flat)) < 1e-13);
    }

    SUBCASE("conformal volume against a refined-grid quadrature oracle") {
        auto modes = std::vector<TrigMode>{{0.4, {1, 0, 0, 0}, 0.3}, {0.2, {0, 1, 1, 0}, 1.1}};
        ScalarField f = trig_field(chart, modes, 0.0);
        ScalarField u = exp_field(f, 2.0 / 2); // h = e^{2f/n} I, n = 2
        HermitianMetricField h = HermitianMetricField::conformally_flat(chart, u);
        ScalarField one(chart, 1.0);
        const double value = integrate(one, h);

        // Independent dense quadrature at twice the resolution: plain Riemann
        // sum of 2^n exp(2f) over the finer grid.
        auto fine = make_chart(2, 32);
        ScalarField ff = trig_field(fine, modes, 0.0);
        double oracle = 0.0;
        for (std::size_t p = 0; p < ff.size(); ++p) oracle += 4.0 * std::exp(2.0 * ff.v[p]);
        oracle *= fine->cell_volume();
        CHECK(value == doctest::Approx(oracle).epsilon(1e-11));
    }

    SUBCASE("linear and repeatable") {
        Rng rng(3);
        ScalarField a = random_band_limited(chart, 1.0, 2, rng);
        ScalarField b = random_band_limited(chart, 1.0, 2, rng);
        ScalarField apb = add_fields(a, b);
        CHECK(integrate(apb, flat) ==
              doctest::Approx(integrate(a, flat) + integrate(b, flat)).epsilon(1e-12));
        CHECK(integrate(a, flat) == integrate(a, flat));
    }
}

TEST_CASE("one-form pairing") {
    auto chart = make_chart(2, 16);
    HermitianMetricField flat = HermitianMetricField::identity(chart);

    SUBCASE("dual metric of g = 2I gives (dx1, dx1) = 1/2") {
        OneFormField dx1(chart);
        dx1.comp[0].assign(chart->point_count(), 1.0);
        ScalarField p = pairing_1forms(dx1, dx1, flat);
        for (std::size_t i = 0; i < 16; ++i) CHECK(p.v[i * 37] == doctest::Approx(0.5).epsilon(1e-14));
        OneFormField dy1(chart);
        dy1.comp[1].assign(chart->point_count(), 1.0);
        ScalarField q = pairing_1forms(dx1, dy1, flat);
        CHECK(sup_norm(q.v) < 1e-14);
    }

    SUBCASE("symmetric and positive on a random metric") {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.seed = 11;
        HermitianMetricField h = make_metric(r);
        Rng rng(5);
        ScalarField fa = random_band_limited(chart, 1.0, 2, rng);
        ScalarField fb = random_band_limited(chart, 1.0, 2, rng);
        OneFormField a = differential(fa);
        OneFormField b = differential(fb);
        ScalarField ab = pairing_1forms(a, b, h);
        ScalarField ba = pairing_1forms(b, a, h);
        CHECK(max_abs_diff(ab.v, ba.v) < 1e-13);
        ScalarField aa = pairing_1forms(a, a, h);
        double mn = aa.v[0];
        for (double x : aa.v) mn = std::min(mn, x);
        CHECK(mn >= 0.0);
    }
}

TEST_CASE("hodge laplacian") {
    auto chart = make_chart(2, 16);
    HermitianMetricField flat = HermitianMetricField::identity(chart);

    SUBCASE("constant maps to zero") {
        ScalarField c(chart, -2.0);
        CHECK(sup_norm(hodge_laplacian(c, flat).v) < 1e-12);
    }

    SUBCASE("flat closed form: Lap cos(2 pi x1) = 2 pi^2 cos(2 pi x1)") {
        // g = 2 * euclidean, so Lap = -(1/2)(dxx + dyy).
        ScalarField f = sample(chart, [](const GridChart& g, std::size_t p) {
            return std::cos(kTwoPi * g.coordinate(p, 0));
        });
        ScalarField lap = hodge_laplacian(f, flat);
        double err = 0.0;
        for (std::size_t p = 0; p < lap.size(); ++p) {
            double expect = 2.0 * kPi * kPi * std::cos(kTwoPi * chart->coordinate(p, 0));
            err = std::max(err, std::abs(lap.v[p] - expect));
        }
        CHECK(err < 1e-10);
    }

    SUBCASE("integration by parts and self-adjointness on a random metric") {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.seed = 23;
        HermitianMetricField h = make_metric(r);
        Rng rng(41);
        ScalarField f = random_band_limited(chart, 1.0, 2, rng);
        ScalarField g = random_band_limited(chart, 1.0, 2, rng);
        ScalarField lf = hodge_laplacian(f, h);
        ScalarField lg = hodge_laplacian(g, h);

        ScalarField lf_g(chart), f_lg(chart);
        for (std::size_t p = 0; p < lf_g.size(); ++p) {
            lf_g.v[p] = lf.v[p] * g.v[p];
            f_lg.v[p] = f.v[p] * lg.v[p];
        }
        ScalarField grad_pair = pairing_1forms(differential(f), differential(g), h);
        const double a = integrate(lf_g, h);
        const double b = integrate(grad_pair, h);
        const double c = integrate(f_lg, h);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));

        ScalarField ff(chart), gg(chart);
        for (std::size_t p = 0; p < ff.size(); ++p) {
            ff.v[p] = f.v[p] * f.v[p];
            gg.v[p] = g.v[p] * g.v[p];
        }
        const double nf = std::sqrt(integrate(ff, h));
        const double ng = std::sqrt(integrate(gg, h));
        CHECK(std::abs(a - c) < 1e-10 * nf * ng);
    }
}

TEST_CASE("form algebra basics") {
    auto chart = make_chart(2, 16);
    HermitianMetricField flat = HermitianMetricField::identity(chart);

    SUBCASE("flat fundamental form squares to 8 dx1 dy1 dx2 dy2") {
        FormField omega = metric_two_form(flat);
        FormField top = wedge(omega, omega);
        REQUIRE(top.comp.size() == 1);
        for (std::size_t p = 0; p < 32; ++p)
            CHECK(top.comp[0][p * 11] == doctest::Approx(8.0).epsilon(1e-14));
    }

    SUBCASE("complex structure on the coordinate basis") {
        // J dx1 = -dy1.
        FormField a(chart, 1);
        a.comp[static_cast<std::size_t>(form_index(4, 1, 1u << 0))].assign(chart->point_count(), 1.0);
        FormField ja = apply_complex_structure(a);
        CHECK(ja.comp[static_cast<std::size_t>(form_index(4, 1, 1u << 1))][0] == doctest::Approx(-1.0));
        // J dy2 = dx2.
        FormField b(chart, 1);
        b.comp[static_cast<std::size_t>(form_index(4, 1, 1u << 3))].assign(chart->point_count(), 1.0);
        FormField jb = apply_complex_structure(b);
        CHECK(jb.comp[static_cast<std::size_t>(form_index(4, 1, 1u << 2))][0] == doctest::Approx(1.0));
    }

    SUBCASE("flat metric is closed and pluriclosed") {
        FormField omega = metric_two_form(flat);
        CHECK(l2_norm(exterior_derivative(omega)) < 1e-12);
        CHECK(l2_norm(i_del_delbar(omega)) < 1e-12);
    }

    SUBCASE("d squared vanishes") {
        Rng rng(4);
        FormField a(chart, 1);
        for (auto& c : a.comp) c = random_band_limited(chart, 1.0, 2, rng).v;
        FormField dda = exterior_derivative(exterior_derivative(a));
        CHECK(l2_norm(dda) < 1e-11);
    }
}

TEST_CASE("real part audit") {
    auto chart = make_chart(2, 16);
    Rng rng(9);
    ScalarField f = random_band_limited(chart, 1.0, 2, rng);
    ComplexField d = holomorphic_derivative(holomorphic_derivative(f, 0, true), 0, false);
    // d_1 d_1bar f of a real field is real up to spectral round-off.
    double imag = 0.0;
    real_part(d, &imag);
    CHECK(imag < 1e-12);
}

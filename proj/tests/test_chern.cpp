#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chy/calculus.hpp"
#include "chy/chern.hpp"
#include "chy/fft.hpp"
#include "chy/models.hpp"
#include "chy/util.hpp"

using namespace chy;

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

ScalarField cos_mode(const ChartPtr& chart, int axis, double amplitude = 1.0) {
    ScalarField f(chart);
    for (std::size_t p = 0; p < f.size(); ++p)
        f.v[p] = amplitude * std::cos(kTwoPi * chart->coordinate(p, axis));
    f.band_limit = 1;
    return f;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

HermitianMetricField random_metric(std::uint64_t seed, double amplitude = 0.25) {
    MetricRecipe r;
    r.kind = RecipeKind::RandomPerturbed;
    r.seed = seed;
    r.perturbation_amplitude = amplitude;
    return make_metric(r);
}

} // namespace

TEST_CASE("chern laplacian closed forms") {
    auto chart = make_chart(2, 16);
    HermitianMetricField flat = HermitianMetricField::identity(chart);

    SUBCASE("constant maps to zero") {
        ScalarField c(chart, 1.7);
        CHECK(sup_norm(chern_laplacian(flat, c).v) < 1e-12);
    }

    SUBCASE("flat oracle 2 pi^2 cos") {
        ScalarField f = cos_mode(chart, 0);
        ScalarField lap = chern_laplacian(flat, f);
        double err = 0.0;
        for (std::size_t p = 0; p < lap.size(); ++p) {
            double expect = 2.0 * kTwoPi * kTwoPi / 4.0 * std::cos(kTwoPi * chart->coordinate(p, 0));
            err = std::max(err, std::abs(lap.v[p] - expect));
        }
        CHECK(err < 1e-10);
    }

    SUBCASE("general-path and fast-path agree") {
        // The same flat metric without the structural flag exercises the
        // mixed-Hessian contraction.
        std::vector<cxd> entries(chart->point_count() * 4, cxd(0.0, 0.0));
        for (std::size_t p = 0; p < chart->point_count(); ++p) {
            entries[p * 4 + 0] = 1.0;
            entries[p * 4 + 3] = 1.0;
        }
        HermitianMetricField flat_general(chart, std::move(entries));
        REQUIRE_FALSE(flat_general.conformal_factor().has_value());
        Rng rng(2);
        ScalarField f = random_band_limited(chart, 1.0, 2, rng);
        CHECK(sup_diff(chern_laplacian(flat, f), chern_laplacian(flat_general, f)) < 1e-10);
    }
}

TEST_CASE("lee form") {
    auto chart = make_chart(2, 16);

    SUBCASE("flat metric has vanishing lee form") {
        HermitianMetricField flat = HermitianMetricField::identity(chart);
        OneFormField theta = lee_form(flat);
        for (const auto& c : theta.comp) CHECK(sup_norm(c) < 1e-12);
    }

    SUBCASE("conformally flat oracle theta = (2(n-1)/n) df") {
        // omega' = e^{2 phi} omega_flat with phi = f/n gives
        // d omega'^{n-1} = 2(n-1) d phi ^ omega'^{n-1}.
        const int n = 2;
        ScalarField f = cos_mode(chart, 0, 0.4);
        ScalarField u = exp_field(f, 2.0 / n);
        HermitianMetricField h = HermitianMetricField::conformally_flat(chart, u);
        OneFormField theta = lee_form(h);
        OneFormField df = differential(f);
        const double factor = 2.0 * (n - 1) / static_cast<double>(n);
        double err = 0.0;
        for (int a = 0; a < 4; ++a)
            for (std::size_t p = 0; p < chart->point_count(); ++p)
                err = std::max(err, std::abs(theta.comp[static_cast<std::size_t>(a)][p] -
                                             factor * df.comp[static_cast<std::size_t>(a)][p]));
        CHECK(err < 1e-9);
    }
}

TEST_CASE("chern laplacian via lee identity") {
    auto chart = make_chart(2, 16);

    SUBCASE("kahler flat: equals the hodge laplacian") {
        HermitianMetricField flat = HermitianMetricField::identity(chart);
        Rng rng(12);
        ScalarField f = random_band_limited(chart, 1.0, 2, rng);
        OneFormField theta = lee_form(flat);
        CHECK(sup_diff(chern_laplacian(flat, f), chern_laplacian_via_lee(flat, f, theta)) < 1e-10);
        CHECK(sup_diff(chern_laplacian(flat, f), hodge_laplacian(f, flat)) < 1e-10);
    }

    SUBCASE("conformally flat: relative agreement") {
        ScalarField f0 = cos_mode(chart, 0, 0.3);
        ScalarField u = exp_field(f0, 1.0);
        HermitianMetricField h = HermitianMetricField::conformally_flat(chart, u);
        OneFormField theta = lee_form(h);
        Rng rng(13);
        ScalarField f = random_band_limited(chart, 1.0, 2, rng);
        ScalarField a = chern_laplacian(h, f);
        ScalarField b = chern_laplacian_via_lee(h, f, theta);
        CHECK(sup_diff(a, b) / sup_norm(a.v) < 1e-8);
    }

    SUBCASE("random positive metrics") {
        for (std::uint64_t seed : {101, 102, 103}) {
            HermitianMetricField h = random_metric(seed);
            OneFormField theta = lee_form(h);
            Rng rng(seed * 7 + 1);
            ScalarField f = random_band_limited(chart, 1.0, 2, rng);
            ScalarField a = chern_laplacian(h, f);
            ScalarField b = chern_laplacian_via_lee(h, f, theta);
            CHECK(sup_diff(a, b) < 1e-6 * (1.0 + c2_norm(f)));
        }
    }
}

TEST_CASE("chern scalar curvature") {
    auto chart = make_chart(2, 16);

    SUBCASE("flat metric is scalar-flat") {
        HermitianMetricField flat = HermitianMetricField::identity(chart);
        CHECK(sup_norm(chern_scalar(flat).v) < 1e-12);
    }

    SUBCASE("conformally flat curvature from the change law with flat base") {
        const int n = 2;
        std::vector<TrigMode> modes{{0.3, {1, 0, 0, 0}, 0.2}, {0.15, {0, 0, 1, 1}, 0.9}};
        ScalarField f = trig_field(chart, modes, 0.0);
        HermitianMetricField flat = HermitianMetricField::identity(chart);
        HermitianMetricField h = conformal_rescale(flat, f);
        ScalarField s = chern_scalar(h);
        ScalarField lap = chern_laplacian(flat, f);
        double err = 0.0;
        for (std::size_t p = 0; p < s.size(); ++p) {
            double expect = std::exp(-2.0 * f.v[p] / n) * lap.v[p];
            err = std::max(err, std::abs(s.v[p] - expect));
        }
        CHECK(err < 1e-9);
    }

    SUBCASE("determinant positivity is enforced at construction") {
        std::vector<cxd> entries(chart->point_count() * 4, cxd(0.0, 0.0));
        for (std::size_t p = 0; p < chart->point_count(); ++p) {
            entries[p * 4 + 0] = 1.0;
            entries[p * 4 + 3] = (p == 77) ? -0.5 : 1.0;
        }
        CHECK_THROWS_AS(HermitianMetricField(chart, std::move(entries)), PositivityError);
    }
}

TEST_CASE("conformal rescale contract") {
    auto chart = make_chart(2, 16);

    SUBCASE("zero potential is the identity") {
        HermitianMetricField h = random_metric(31);
        ScalarField zero(chart);
        HermitianMetricField h2 = conformal_rescale(h, zero);
        double err = 0.0;
        for (std::size_t p = 0; p < h.points(); ++p)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(h.entry(p, i, j) - h2.entry(p, i, j)));
        CHECK(err == 0.0);
        CHECK(sup_diff(chern_scalar(h), chern_scalar(h2)) == 0.0);
    }

    SUBCASE("change law on a random metric") {
        HermitianMetricField h = random_metric(32);
        Rng rng(77);
        ScalarField f = random_band_limited(chart, 0.4, 2, rng);
        ScalarField lhs = chern_scalar(conformal_rescale(h, f));
        ScalarField s0 = chern_scalar(h);
        ScalarField lap = chern_laplacian(h, f);
        double err = 0.0, scale = 0.0;
        for (std::size_t p = 0; p < lhs.size(); ++p) {
            double rhs = std::exp(-2.0 * f.v[p] / 2) * (s0.v[p] + lap.v[p]);
            err = std::max(err, std::abs(lhs.v[p] - rhs));
            scale = std::max(scale, std::abs(rhs));
        }
        CHECK(err / scale < 1e-8);
    }

    SUBCASE("constant potential scales curvature and volume") {
        HermitianMetricField h = random_metric(33);
        const double c = 0.37;
        ScalarField cf(chart, c);
        HermitianMetricField h2 = conformal_rescale(h, cf);
        // S(e^{2c/n} h) = e^{-2c/n} S(h); volume scales by e^{2c}.
        ScalarField s0 = chern_scalar(h);
        ScalarField s2 = chern_scalar(h2);
        double err = 0.0;
        for (std::size_t p = 0; p < s0.size(); ++p)
            err = std::max(err, std::abs(s2.v[p] - std::exp(-c) * s0.v[p]));
        CHECK(err < 1e-9);
        CHECK(h2.total_volume() == doctest::Approx(std::exp(2.0 * c) * h.total_volume()).epsilon(1e-12));
    }
}

TEST_CASE("gauduchon residuals") {
    auto chart = make_chart(2, 16);

    SUBCASE("flat is exactly gauduchon and balanced") {
        HermitianMetricField flat = HermitianMetricField::identity(chart);
        GauduchonResidual r = gauduchon_residual(flat);
        CHECK(r.gauduchon < 1e-12);
        CHECK(r.balanced < 1e-12);
    }

    SUBCASE("nonconstant conformal factor breaks both") {
        ScalarField f = cos_mode(chart, 0, 0.4);
        HermitianMetricField h = HermitianMetricField::conformally_flat(chart, exp_field(f, 1.0));
        GauduchonResidual r = gauduchon_residual(h);
        CHECK(r.gauduchon > 1e-3);
        CHECK(r.balanced > 1e-3);
    }
}

TEST_CASE("gauduchon projection") {
    auto chart = make_chart(2, 16);

    SUBCASE("kahler input is only volume-rescaled") {
        const double scale = 1.8;
        HermitianMetricField h = HermitianMetricField::identity(chart, scale);
        GauduchonProjection proj = gauduchon_project(h);
        // v is constant, eta = V^{-1/n} omega.
        CHECK(proj.report.positivity_margin == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(proj.metric.total_volume() == doctest::Approx(1.0).epsilon(1e-10));
        const double expect = scale * std::pow(h.total_volume(), -0.5);
        for (std::size_t p = 0; p < 8; ++p)
            CHECK(proj.metric.entry(p * 101, 0, 0).real() == doctest::Approx(expect).epsilon(1e-10));
    }

    SUBCASE("conformally flat class projects back to the flat representative") {
        const int n = 2;
        ScalarField f0 = cos_mode(chart, 2, 0.25);
        HermitianMetricField h =
            HermitianMetricField::conformally_flat(chart, exp_field(f0, 2.0 / n));
        GauduchonProjection proj = gauduchon_project(h);
        REQUIRE(proj.metric.conformal_factor().has_value());
        const ScalarField& u = *proj.metric.conformal_factor();
        // The unit-volume flat representative of the class has u = 1/2.
        double err = 0.0;
        for (double x : u.v) err = std::max(err, std::abs(x - 0.5));
        CHECK(err < 1e-8);
        GauduchonResidual r = gauduchon_residual(proj.metric);
        CHECK(r.gauduchon < 1e-9);
        CHECK(r.balanced < 1e-9);
    }

    SUBCASE("random metric: residual drops by at least six orders") {
        HermitianMetricField h = random_metric(55);
        GauduchonResidual before = gauduchon_residual(h);
        GauduchonProjection proj = gauduchon_project(h);
        GauduchonResidual after = gauduchon_residual(proj.metric);
        CHECK(after.gauduchon < 1e-6 * before.gauduchon);
        CHECK(proj.report.positivity_margin > 0.0);
        // Gauduchon but generically not balanced.
        CHECK(after.balanced > 1e-6);
    }
}

TEST_CASE("gauduchon degree instance") {
    auto chart = make_chart(2, 16);

    SUBCASE("conformal torus classes have zero degree") {
        MetricRecipe r;
        r.kind = RecipeKind::ConformalFlat;
        TrigMode m;
        m.amplitude = 0.3;
        m.wave = {1, 0, 0, 0};
        r.potential_modes = {m};
        ConformalInstance inst = make_instance(r);
        CHECK(std::abs(inst.degree) < 1e-8);
        CHECK(std::abs(inst.eta.total_volume() - 1.0) < 1e-8);
        // Degree recomputes from the stored representative.
        CHECK(integrate(inst.scalar_curvature, inst.eta) == doctest::Approx(inst.degree).epsilon(1e-10));
    }

    SUBCASE("degree is scale invariant") {
        HermitianMetricField h = random_metric(56);
        ConformalInstance a = gauduchon_degree(h);
        ConformalInstance b = gauduchon_degree(h.scaled(2.4));
        CHECK(std::abs(a.degree - b.degree) < 1e-8);
    }

    SUBCASE("gauduchon integral identity for 100 random fields") {
        HermitianMetricField h = random_metric(57);
        ConformalInstance inst = gauduchon_degree(h);
        Rng rng(91);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            ScalarField f = random_band_limited(inst.chart(), 1.0, 2, rng);
            ScalarField lap = chern_laplacian(inst.eta, f);
            worst = std::max(worst, std::abs(integrate(lap, inst.eta)));
        }
        CHECK(worst < 1e-8);
    }

    SUBCASE("jensen slice property") {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.seed = 58;
        ConformalInstance inst = make_instance(r);
        Rng rng(19);
        for (int k = 0; k < 10; ++k) {
            ScalarField f = random_band_limited(inst.chart(), 0.8, 2, rng);
            // Shift onto the constraint slice int e^{2f/n} = 1.
            ScalarField e = exp_field(f, 1.0);
            const double c = -0.5 * 2.0 * std::log(integrate(e, inst.eta));
            shift_field(f, c);
            ScalarField vol_density = exp_field(f, 2.0);
            CHECK(integrate(vol_density, inst.eta) >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("adjoint route cross-check") {
    // int v Lap_h f dmu = -(2/(n-1)!) int f [i del delbar (v omega^{n-1})]_top
    // ties the operator pipeline to the form pipeline.
    auto chart = make_chart(2, 16);
    HermitianMetricField h = random_metric(60, 0.2);
    Rng rng(23);
    ScalarField f = random_band_limited(chart, 0.8, 2, rng);
    ScalarField v = random_band_limited(chart, 0.8, 2, rng);
    shift_field(v, 2.0);

    ScalarField lap = chern_laplacian(h, f);
    ScalarField integrand(chart);
    for (std::size_t p = 0; p < integrand.size(); ++p) integrand.v[p] = v.v[p] * lap.v[p];
    const double lhs = integrate(integrand, h);

    FormField omega = metric_two_form(h);
    FormField vo = scale_form(omega, v);
    FormField k = i_del_delbar(vo);
    REQUIRE(k.comp.size() == 1);
    std::vector<double> prod(chart->point_count());
    for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = f.v[p] * k.comp[0][p];
    const double rhs = -2.0 * pairwise_sum(prod) * chart->cell_volume();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
}

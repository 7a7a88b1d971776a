#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chy/calculus.hpp"
#include "chy/models.hpp"
#include "chy/util.hpp"

using namespace chy;

namespace {
constexpr double kPi = 3.14159265358979323846264338;
}

TEST_CASE("hopf chart curvature") {
    SUBCASE("exact derivatives give the constant 2 at n = 2") {
        // Oracle: h = |z|^{-2} I, log det h = -2 log |z|^2,
        // d_i d_jbar log |z|^2 = delta_ij/|z|^2 - zbar_i z_j/|z|^4, so the
        // contraction with |z|^2 delta^{ij} gives n(n-1) = 2.
        Rng rng(5);
        for (int k = 0; k < 100; ++k) {
            auto z = hopf_sample_point(rng);
            CHECK(hopf_scalar_symbolic(z) == doctest::Approx(2.0).epsilon(1e-12));
        }
    }

    SUBCASE("finite differences agree to the stencil order") {
        Rng rng(6);
        for (int k = 0; k < 20; ++k) {
            auto z = hopf_sample_point(rng);
            CHECK(std::abs(hopf_scalar_finite_difference(z, 1e-2) - 2.0) < 1e-5);
        }
    }

    SUBCASE("deck transformation invariance") {
        Rng rng(7);
        for (int k = 0; k < 20; ++k) {
            auto z = hopf_sample_point(rng);
            std::array<cxd, 2> half{0.5 * z[0], 0.5 * z[1]};
            CHECK(hopf_scalar_symbolic(z) == doctest::Approx(hopf_scalar_symbolic(half)).epsilon(1e-12));
        }
    }

    SUBCASE("check report") {
        HopfCheckReport rep = hopf_scalar_check(100, 42, true);
        CHECK(rep.samples == 100);
        CHECK(std::abs(rep.mean - 2.0) < 1e-10);
        CHECK(rep.max_deviation < 1e-8);
        HopfCheckReport fd = hopf_scalar_check(25, 42, false, 1e-2);
        CHECK(std::abs(fd.mean - 2.0) < 1e-5);
        CHECK(fd.max_deviation < 1e-5);
        CHECK_THROWS_AS(hopf_scalar_check(5, 1, true), ConfigError);
    }

    SUBCASE("chart point sample validates the annulus") {
        CHECK_THROWS_AS(ChartPointSample::at({cxd(0.5, 0.0), cxd(0.0, 0.0)}), ConfigError);
        CHECK_THROWS_AS(ChartPointSample::at({cxd(2.5, 0.0), cxd(0.0, 0.0)}), ConfigError);
        ChartPointSample s = ChartPointSample::at({cxd(1.2, 0.0), cxd(0.5, 0.3)});
        CHECK(s.metric[0][0].real() == doctest::Approx(1.0 / (1.44 + 0.34)).epsilon(1e-12));
    }
}

TEST_CASE("hopf chart degree quadrature") {
    SUBCASE("annulus volume 2 pi^2 ln 2") {
        CHECK(hopf_chart_volume(64) == doctest::Approx(2.0 * kPi * kPi * std::log(2.0)).epsilon(1e-13));
    }

    SUBCASE("degree 2 sqrt(2 pi^2 ln 2)") {
        const double expected = 2.0 * std::sqrt(2.0 * kPi * kPi * std::log(2.0));
        CHECK(hopf_degree_quadrature(64) == doctest::Approx(expected).epsilon(1e-10));
        CHECK(hopf_degree_quadrature(64) > 0.0);
    }
}

TEST_CASE("gauss-legendre sanity") {
    // Degree-7 polynomial integrated exactly by 4 nodes.
    std::vector<double> x, w;
    gauss_legendre(4, 0.0, 1.0, x, w);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], 7);
    CHECK(acc == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("product degree sign") {
    SUBCASE("exact boundary gives sign zero") {
        ProductDegreeSign r = product_degree_sign(1.0, 2, 4.0 * kPi);
        CHECK(r.sign == 0);
        CHECK(r.threshold == doctest::Approx(4.0 * kPi).epsilon(1e-15));
    }

    SUBCASE("genus 3 at delta 30: sign of 30 - 8 pi is positive") {
        ProductDegreeSign r = product_degree_sign(1.0, 3, 30.0);
        CHECK(r.sign == 1);
        ProductDegreeSign s = product_degree_sign(1.0, 3, 25.0);
        CHECK(s.sign == -1); // 25 < 8 pi
    }

    SUBCASE("threshold from the hopf class degree") {
        const double gamma = hopf_degree_quadrature(64);
        ProductDegreeSign r = product_degree_sign(gamma, 2, 1.0);
        CHECK(r.threshold == doctest::Approx(4.0 * kPi / gamma).epsilon(1e-12));
        CHECK(r.threshold == doctest::Approx(1.6985).epsilon(1e-3));
    }

    SUBCASE("hypothesis errors") {
        CHECK_THROWS_AS(product_degree_sign(-1.0, 2, 1.0), SignError);
        CHECK_THROWS_AS(product_degree_sign(0.0, 2, 1.0), SignError);
        CHECK_THROWS_AS(product_degree_sign(1.0, 1, 1.0), ConfigError);
        CHECK_THROWS_AS(product_degree_sign(1.0, 2, -1.0), ConfigError);
    }
}

TEST_CASE("metric recipes") {
    SUBCASE("flat recipe gives a zero-degree balanced instance") {
        MetricRecipe r;
        r.kind = RecipeKind::Flat;
        ConformalInstance inst = make_instance(r);
        CHECK(std::abs(inst.degree) < 1e-10);
        CHECK(inst.balanced);
        CHECK_FALSE(inst.synthetic);
        CHECK(std::abs(inst.eta.total_volume() - 1.0) < 1e-10);
    }

    SUBCASE("conformal-flat recipe: zero degree with a genuinely nonflat representative") {
        MetricRecipe r;
        r.kind = RecipeKind::ConformalFlat;
        r.potential_modes = {TrigMode{0.3, {1, 0, 0, 0}, 0.0}};
        HermitianMetricField omega = make_metric(r);
        ScalarField s = chern_scalar(omega);
        CHECK(sup_norm(s.v) > 0.1);
        // The class invariant vanishes (quadrature over the Gauduchon
        // representative), even though the raw curvature integral of the
        // nonstandard representative does not.
        ConformalInstance inst = make_instance(r);
        CHECK(std::abs(inst.degree) < 1e-8);
        CHECK(std::abs(integrate(inst.scalar_curvature, inst.eta)) < 1e-8);
    }

    SUBCASE("random-perturbed metric stays uniformly positive") {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.seed = 9;
        r.perturbation_amplitude = 5.0; // the cap must clamp this
        HermitianMetricField h = make_metric(r);
        for (std::size_t p = 0; p < h.points(); p += 101) {
            // Smallest eigenvalue of the 2x2 Hermitian block.
            double a = h.entry(p, 0, 0).real(), d = h.entry(p, 1, 1).real();
            double off = std::abs(h.entry(p, 0, 1));
            double mean = 0.5 * (a + d);
            double rad = std::sqrt(0.25 * (a - d) * (a - d) + off * off);
            CHECK(mean - rad > 0.2);
        }
    }

    SUBCASE("recipes are reproducible bit for bit") {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.seed = 1234;
        HermitianMetricField a = make_metric(r);
        HermitianMetricField b = make_metric(r);
        bool same = a.points() == b.points();
        for (std::size_t p = 0; same && p < a.points(); ++p)
            for (int i = 0; i < 2 && same; ++i)
                for (int j = 0; j < 2 && same; ++j) same = a.entry(p, i, j) == b.entry(p, i, j);
        CHECK(same);
    }

    SUBCASE("synthetic sign declarations are verified") {
        MetricRecipe r;
        r.kind = RecipeKind::SyntheticS;
        r.s_constant = -0.2;
        r.s_modes = {TrigMode{1.0, {1, 0, 0, 0}, 0.0}};
        r.sign_declaration = "negative";
        CHECK_THROWS_AS(make_instance(r), ConfigError);
        r.s_constant = -2.0;
        ConformalInstance inst = make_instance(r);
        CHECK(inst.synthetic);
        CHECK(inst.degree == doctest::Approx(-2.0).epsilon(1e-12));

        MetricRecipe z;
        z.kind = RecipeKind::SyntheticS;
        z.s_constant = 0.5;
        z.sign_declaration = "zero";
        CHECK_THROWS_AS(make_instance(z), ConfigError);

        MetricRecipe s;
        s.kind = RecipeKind::SyntheticS;
        s.s_constant = 0.5;
        s.sign_declaration = "small";
        CHECK_THROWS_AS(make_instance(s), ConfigError);
        s.s_constant = 0.005;
        CHECK(make_instance(s).synthetic);

        MetricRecipe bad;
        bad.kind = RecipeKind::SyntheticS;
        bad.sign_declaration = "positive";
        CHECK_THROWS_AS(make_instance(bad), ConfigError);
    }

    SUBCASE("hopf recipes have no grid instance") {
        MetricRecipe r;
        r.kind = RecipeKind::HopfChart;
        CHECK_THROWS_AS(make_instance(r), ConfigError);
        CHECK_THROWS_AS(make_metric(r), ConfigError);
    }
}

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "chy/chern.hpp"
#include "chy/util.hpp"

namespace chy {

enum class RecipeKind { Flat, ConformalFlat, RandomPerturbed, HopfChart, SyntheticS };

/// amplitude * cos(2 pi k . x / L + phase); the building block of every
/// deterministic potential and prescribed-curvature field.
struct TrigMode {
    double amplitude = 0.0;
    std::vector<int> wave; // one integer per real axis
    double phase = 0.0;
};

ScalarField trig_field(const ChartPtr& chart, const std::vector<TrigMode>& modes, double constant = 0.0);

/// Seeded band-limited random field (modes of degree <= max_degree).
ScalarField random_band_limited(const ChartPtr& chart, double amplitude, int max_degree, Rng& rng);

struct MetricRecipe {
    RecipeKind kind = RecipeKind::Flat;
    int complex_dim = 2;
    int resolution = 16;
    std::vector<double> periods; // empty = unit

    double flat_scale = 1.0;

    // conformal-flat: h = exp(2 f0 / n) * I with f0 from these modes.
    std::vector<TrigMode> potential_modes;

    // random-perturbed: h = I + a * (Hermitian trig polynomial of degree <= 2,
    // degree-2 modes damped), with a capped so the smallest eigenvalue stays
    // above 0.2. The default keeps the inverse-metric tails resolved at
    // resolution 16.
    double perturbation_amplitude = 0.15;
    std::uint64_t seed = 1;

    // synthetic-S: prescribed curvature data with a verified sign declaration.
    double s_constant = 0.0;
    std::vector<TrigMode> s_modes;
    std::string sign_declaration = "negative"; // negative | zero | small
    double small_sup_bound = 0.01;
};

/// Grid metric for the flat / conformal-flat / random-perturbed kinds.
HermitianMetricField make_metric(const MetricRecipe& recipe);

/// Full instance: geometric kinds run the Gauduchon projection and degree;
/// synthetic recipes verify their sign declaration and are flagged.
ConformalInstance make_instance(const MetricRecipe& recipe, const GauduchonOptions& opt = {});

// ---------------------------------------------------------------------------
// Hopf surface (quotient of C^2 minus the origin by z -> z/2), handled by
// pointwise chart evaluation on the fundamental annulus 1 <= |z| <= 2.
// ---------------------------------------------------------------------------

/// Point sample of the Hopf chart with the metric |z|^{-2} I at the point.
struct ChartPointSample {
    std::array<cxd, 2> z;
    std::array<std::array<cxd, 2>, 2> metric;
    double stencil_spacing = 1e-2;

    static ChartPointSample at(const std::array<cxd, 2>& z, double spacing = 1e-2);
};

/// Chern scalar curvature at a Hopf chart point from exact derivatives of
/// log det h = -2 log |z|^2.
double hopf_scalar_symbolic(const std::array<cxd, 2>& z);

/// Same through 8th-order centered finite differences of log det h.
double hopf_scalar_finite_difference(const std::array<cxd, 2>& z, double spacing);

struct HopfCheckReport {
    int samples = 0;
    bool symbolic = true;
    double spacing = 0.0;
    double mean = 0.0;
    double max_deviation = 0.0; // from the mean (constancy)
    double min_value = 0.0;
    double max_value = 0.0;
};

HopfCheckReport hopf_scalar_check(int samples, std::uint64_t seed, bool symbolic, double spacing = 1e-2);

/// Chart volume of the fundamental annulus against det(h) Lebesgue measure,
/// by radial Gauss-Legendre quadrature: 2 pi^2 ln 2 for the standard metric.
double hopf_chart_volume(int quadrature_nodes = 64);

/// Gauduchon degree of the standard Hopf class through the chart quadrature:
/// the constant curvature times the unit-volume normalization,
/// S * sqrt(volume) = 2 sqrt(2 pi^2 ln 2).
double hopf_degree_quadrature(int quadrature_nodes = 64);

/// Uniform random sample of the fundamental annulus.
std::array<cxd, 2> hopf_sample_point(Rng& rng);

// ---------------------------------------------------------------------------

struct ProductDegreeSign {
    int sign = 0;        // of gamma * delta + 4 pi (1 - genus)
    double threshold = 0.0; // delta* = 4 pi (genus - 1) / gamma
};

/// Sign of the product-with-curve degree and the zero-crossing threshold;
/// requires gamma > 0 and genus >= 2.
ProductDegreeSign product_degree_sign(double gamma, int genus, double delta);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int nodes, double a, double b, std::vector<double>& x, std::vector<double>& w);

} // namespace chy

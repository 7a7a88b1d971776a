#include "chy/models.hpp"

#include <cmath>

#include "chy/calculus.hpp"

namespace chy {

namespace {
constexpr double kPi = 3.14159265358979323846264338;
constexpr double kTwoPi = 2.0 * kPi;
} // namespace

ScalarField trig_field(const ChartPtr& chart, const std::vector<TrigMode>& modes, double constant) {
    ScalarField f(chart, constant);
    const int d = chart->real_dim();
    int limit = 0;
    for (const TrigMode& m : modes) {
        if (m.wave.size() != static_cast<std::size_t>(d))
            throw ConfigError("trig_field: wave vector length must equal 2n");
        for (int k : m.wave) limit = std::max(limit, std::abs(k));
        for (std::size_t p = 0; p < f.size(); ++p) {
            double arg = m.phase;
            for (int a = 0; a < d; ++a)
                arg += kTwoPi * m.wave[static_cast<std::size_t>(a)] * chart->coordinate(p, a) / chart->period(a);
            f.v[p] += m.amplitude * std::cos(arg);
        }
    }
    f.band_limit = limit;
    return f;
}

ScalarField random_band_limited(const ChartPtr& chart, double amplitude, int max_degree, Rng& rng) {
    const int d = chart->real_dim();
    std::vector<TrigMode> modes;
    const int count = 6;
    for (int m = 0; m < count; ++m) {
        TrigMode mode;
        mode.wave.resize(static_cast<std::size_t>(d));
        bool nonzero = false;
        for (int a = 0; a < d; ++a) {
            mode.wave[static_cast<std::size_t>(a)] = rng.uniform_int(2 * max_degree + 1) - max_degree;
            nonzero = nonzero || mode.wave[static_cast<std::size_t>(a)] != 0;
        }
        if (!nonzero) mode.wave[0] = 1;
        mode.amplitude = amplitude * rng.uniform(0.2, 1.0) / count;
        mode.phase = rng.uniform(0.0, kTwoPi);
        modes.push_back(std::move(mode));
    }
    return trig_field(chart, modes, 0.0);
}

namespace {

/// Random metric entry: degree-2 modes are damped against degree-1 modes so
/// the inverse-metric fields stay spectrally resolved at resolution 16 (the
/// first aliased harmonic of a degree-d trig polynomial ratio scales like
/// amplitude^(Nyquist/d)).
ScalarField random_trig_entry(const ChartPtr& chart, Rng& rng) {
    const int d = chart->real_dim();
    std::vector<TrigMode> modes;
    const int count = 6;
    for (int m = 0; m < count; ++m) {
        TrigMode mode;
        mode.wave.resize(static_cast<std::size_t>(d));
        int deg = 0;
        for (int a = 0; a < d; ++a) {
            mode.wave[static_cast<std::size_t>(a)] = rng.uniform_int(5) - 2;
            deg = std::max(deg, std::abs(mode.wave[static_cast<std::size_t>(a)]));
        }
        if (deg == 0) {
            mode.wave[0] = 1;
            deg = 1;
        }
        const double damp = (deg >= 2) ? 0.03 : 1.0;
        mode.amplitude = damp * rng.uniform(0.2, 1.0) / count;
        mode.phase = rng.uniform(0.0, kTwoPi);
        modes.push_back(std::move(mode));
    }
    return trig_field(chart, modes, 0.0);
}

HermitianMetricField random_perturbed_metric(const ChartPtr& chart, double amplitude, std::uint64_t seed) {
    Rng rng(seed);
    const int n = chart->complex_dim();
    const std::size_t np = chart->point_count();
    const std::size_t nn = static_cast<std::size_t>(n * n);

    // Hermitian trig polynomial P: real diagonal entries, complex upper
    // triangle mirrored.
    std::vector<std::vector<double>> re(nn), im(nn);
    for (int i = 0; i < n; ++i) {
        re[static_cast<std::size_t>(i * n + i)] = random_trig_entry(chart, rng).v;
        im[static_cast<std::size_t>(i * n + i)] = std::vector<double>(np, 0.0);
        for (int j = i + 1; j < n; ++j) {
            re[static_cast<std::size_t>(i * n + j)] = random_trig_entry(chart, rng).v;
            im[static_cast<std::size_t>(i * n + j)] = random_trig_entry(chart, rng).v;
        }
    }

    // Cap the amplitude so min eig(I + a P) >= 1 - a * max ||P||_F > 0.2,
    // without rejection sampling.
    double frob_max = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        double fr = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::size_t di = static_cast<std::size_t>(i * n + i);
            fr += re[di][p] * re[di][p];
            for (int j = i + 1; j < n; ++j) {
                const std::size_t od = static_cast<std::size_t>(i * n + j);
                fr += 2.0 * (re[od][p] * re[od][p] + im[od][p] * im[od][p]);
            }
        }
        frob_max = std::max(frob_max, std::sqrt(fr));
    }
    const double a = std::min(amplitude, 0.79 / frob_max);

    std::vector<cxd> entries(np * nn, cxd(0.0, 0.0));
    for (std::size_t p = 0; p < np; ++p) {
        for (int i = 0; i < n; ++i) {
            entries[p * nn + static_cast<std::size_t>(i * n + i)] =
                cxd(1.0 + a * re[static_cast<std::size_t>(i * n + i)][p], 0.0);
            for (int j = i + 1; j < n; ++j) {
                const std::size_t od = static_cast<std::size_t>(i * n + j);
                entries[p * nn + od] = cxd(a * re[od][p], a * im[od][p]);
            }
        }
    }
    return HermitianMetricField(chart, std::move(entries));
}

} // namespace

HermitianMetricField make_metric(const MetricRecipe& recipe) {
    ChartPtr chart = make_chart(recipe.complex_dim, recipe.resolution, recipe.periods);
    switch (recipe.kind) {
        case RecipeKind::Flat:
            return HermitianMetricField::identity(chart, recipe.flat_scale);
        case RecipeKind::ConformalFlat: {
            ScalarField f0 = trig_field(chart, recipe.potential_modes, 0.0);
            ScalarField u = exp_field(f0, 2.0 / recipe.complex_dim);
            u.band_limit = f0.band_limit;
            return HermitianMetricField::conformally_flat(chart, u);
        }
        case RecipeKind::RandomPerturbed:
            return random_perturbed_metric(chart, recipe.perturbation_amplitude, recipe.seed);
        default:
            throw ConfigError("make_metric: recipe kind has no grid metric");
    }
}

ConformalInstance make_instance(const MetricRecipe& recipe, const GauduchonOptions& opt) {
    if (recipe.kind == RecipeKind::HopfChart)
        throw ConfigError("make_instance: the Hopf chart has no grid instance; use the chart checks");
    if (recipe.kind == RecipeKind::SyntheticS) {
        ChartPtr chart = make_chart(recipe.complex_dim, recipe.resolution, recipe.periods);
        ScalarField s = trig_field(chart, recipe.s_modes, recipe.s_constant);
        if (recipe.sign_declaration == "negative") {
            for (double x : s.v)
                if (!(x < 0.0)) throw ConfigError("synthetic recipe declared negative but S is not pointwise negative");
        } else if (recipe.sign_declaration == "zero") {
            double m = pairwise_sum(s.v) / static_cast<double>(s.size());
            if (std::abs(m) > 1e-10) throw ConfigError("synthetic recipe declared zero but S has nonzero mean");
        } else if (recipe.sign_declaration == "small") {
            if (sup_norm(s.v) > recipe.small_sup_bound + 1e-12)
                throw ConfigError("synthetic recipe declared small but sup |S| exceeds the bound");
        } else {
            throw ConfigError("synthetic recipe: unknown sign declaration '" + recipe.sign_declaration + "'");
        }
        return synthetic_instance(chart, std::move(s));
    }
    return gauduchon_degree(make_metric(recipe), opt);
}

// ---------------------------------------------------------------------------
// Hopf chart
// ---------------------------------------------------------------------------

namespace {

double abs2(const std::array<cxd, 2>& z) { return std::norm(z[0]) + std::norm(z[1]); }

double hopf_log_det(const std::array<cxd, 2>& z) {
    // h = |z|^{-2} I on C^2: log det h = -2 log |z|^2.
    return -2.0 * std::log(abs2(z));
}

// 8th-order centered first and second derivative stencils.
constexpr int kStencilHalf = 4;
constexpr double kD1[9] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
constexpr double kD2[9] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};

std::array<cxd, 2> displaced(const std::array<cxd, 2>& z, int axis, double step) {
    std::array<cxd, 2> out = z;
    const int pair = axis / 2;
    if (axis % 2 == 0)
        out[static_cast<std::size_t>(pair)] += step;
    else
        out[static_cast<std::size_t>(pair)] += cxd(0.0, step);
    return out;
}

/// d^2 phi / d x_a d x_b of phi = log det h by composed 8th-order stencils.
double second_derivative_fd(const std::array<cxd, 2>& z, int a, int b, double s) {
    if (a == b) {
        double acc = 0.0;
        for (int k = -kStencilHalf; k <= kStencilHalf; ++k)
            acc += kD2[k + kStencilHalf] * hopf_log_det(displaced(z, a, k * s));
        return acc / (s * s);
    }
    double acc = 0.0;
    for (int k = -kStencilHalf; k <= kStencilHalf; ++k) {
        if (kD1[k + kStencilHalf] == 0.0) continue;
        double inner = 0.0;
        for (int m = -kStencilHalf; m <= kStencilHalf; ++m) {
            if (kD1[m + kStencilHalf] == 0.0) continue;
            inner += kD1[m + kStencilHalf] * hopf_log_det(displaced(displaced(z, a, k * s), b, m * s));
        }
        acc += kD1[k + kStencilHalf] * inner;
    }
    return acc / (s * s);
}

} // namespace

ChartPointSample ChartPointSample::at(const std::array<cxd, 2>& z, double spacing) {
    const double r = std::sqrt(abs2(z));
    if (!(r >= 1.0 && r <= 2.0))
        throw ConfigError("ChartPointSample: point outside the fundamental annulus 1 <= |z| <= 2");
    ChartPointSample s;
    s.z = z;
    s.stencil_spacing = spacing;
    const double w = 1.0 / abs2(z);
    s.metric = {{{cxd(w, 0.0), cxd(0.0, 0.0)}, {cxd(0.0, 0.0), cxd(w, 0.0)}}};
    return s;
}

double hopf_scalar_symbolic(const std::array<cxd, 2>& z) {
    // d_i d_jbar log|z|^2 = delta_ij / |z|^2 - zbar_i z_j / |z|^4; the inverse
    // metric |z|^2 delta^{ij} only picks up the diagonal, and
    // -log det h = 2 log |z|^2.
    const double r2 = abs2(z);
    cxd acc(0.0, 0.0);
    for (int i = 0; i < 2; ++i) {
        cxd hess = cxd(1.0 / r2, 0.0) -
                   std::conj(z[static_cast<std::size_t>(i)]) * z[static_cast<std::size_t>(i)] / (r2 * r2);
        acc += r2 * 2.0 * hess;
    }
    return acc.real();
}

double hopf_scalar_finite_difference(const std::array<cxd, 2>& z, double spacing) {
    const double r2 = abs2(z);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
        // d_i d_ibar = (1/4)(dxx + dyy) on the i-th complex coordinate.
        const int ax = 2 * i, ay = 2 * i + 1;
        const double dxx = second_derivative_fd(z, ax, ax, spacing);
        const double dyy = second_derivative_fd(z, ay, ay, spacing);
        const double hess_ii = 0.25 * (dxx + dyy);
        acc += r2 * (-hess_ii);
    }
    return acc;
}

std::array<cxd, 2> hopf_sample_point(Rng& rng) {
    // Uniform direction on S^3, radius uniform in (1, 2) with margin for
    // stencils at the boundary.
    double g[4];
    double norm2 = 0.0;
    for (double& x : g) {
        x = rng.normal();
        norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
    const double r = rng.uniform(1.0 + 1e-6, 2.0 - 1e-6);
    return {cxd(r * g[0] * inv, r * g[1] * inv), cxd(r * g[2] * inv, r * g[3] * inv)};
}

HopfCheckReport hopf_scalar_check(int samples, std::uint64_t seed, bool symbolic, double spacing) {
    if (samples < 10) throw ConfigError("hopf_scalar_check: need at least 10 samples");
    Rng rng(seed);
    std::vector<double> values(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        auto z = hopf_sample_point(rng);
        values[static_cast<std::size_t>(i)] =
            symbolic ? hopf_scalar_symbolic(z) : hopf_scalar_finite_difference(z, spacing);
    }
    HopfCheckReport rep;
    rep.samples = samples;
    rep.symbolic = symbolic;
    rep.spacing = symbolic ? 0.0 : spacing;
    rep.mean = pairwise_sum(values) / samples;
    rep.min_value = values[0];
    rep.max_value = values[0];
    for (double v : values) {
        rep.min_value = std::min(rep.min_value, v);
        rep.max_value = std::max(rep.max_value, v);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(v - rep.mean));
    }
    return rep;
}

void gauss_legendre(int nodes, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(nodes), 0.0);
    w.assign(static_cast<std::size_t>(nodes), 0.0);
    const int m = (nodes + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (nodes + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < nodes; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
            }
            pp = nodes * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
        x[static_cast<std::size_t>(i)] = xm - xl * z;
        x[static_cast<std::size_t>(nodes - 1 - i)] = xm + xl * z;
        w[static_cast<std::size_t>(i)] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        w[static_cast<std::size_t>(nodes - 1 - i)] = w[static_cast<std::size_t>(i)];
    }
}

double hopf_chart_volume(int quadrature_nodes) {
    // det(h) = r^{-4}; the sphere of radius r contributes 2 pi^2 r^3.
    std::vector<double> x, w;
    gauss_legendre(quadrature_nodes, 1.0, 2.0, x, w);
    double vol = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) vol += w[i] * 2.0 * kPi * kPi * x[i] * x[i] * x[i] / std::pow(x[i], 4);
    return vol;
}

double hopf_degree_quadrature(int quadrature_nodes) {
    // Unit-volume normalization c: c^2 Vol = 1, degree = S / c with S the
    // constant curvature evaluated at a chart point.
    const double s = hopf_scalar_symbolic({cxd(1.2, 0.1), cxd(0.4, 0.3)});
    return s * std::sqrt(hopf_chart_volume(quadrature_nodes));
}

ProductDegreeSign product_degree_sign(double gamma, int genus, double delta) {
    if (!(gamma > 0.0)) throw SignError("product_degree_sign: hypothesis gamma > 0 violated");
    if (genus < 2) throw ConfigError("product_degree_sign: genus must be >= 2");
    if (!(delta > 0.0)) throw ConfigError("product_degree_sign: delta must be positive");
    const double value = gamma * delta + 4.0 * kPi * (1.0 - genus);
    ProductDegreeSign out;
    out.sign = (value > 0.0) - (value < 0.0);
    out.threshold = 4.0 * kPi * (genus - 1) / gamma;
    return out;
}

} // namespace chy

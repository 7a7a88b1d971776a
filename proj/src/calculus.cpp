#include "chy/calculus.hpp"

#include <cmath>

#include "chy/fft.hpp"
#include "chy/util.hpp"

namespace chy {

double integrate_weighted(const ScalarField& f, const ScalarField& weights) {
    require_same_chart(*f.chart, *weights.chart, "integrate");
    std::vector<double> prod(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) prod[i] = f.v[i] * weights.v[i];
    return pairwise_sum(prod) * f.chart->cell_volume();
}

double integrate(const ScalarField& f, const HermitianMetricField& h) {
    require_same_chart(*f.chart, *h.chart(), "integrate");
    return integrate_weighted(f, h.weights());
}

double mean_value(const ScalarField& f, const HermitianMetricField& h) {
    return integrate(f, h) / h.total_volume();
}

OneFormField differential(const ScalarField& f) {
    OneFormField out(f.chart);
    for (int a = 0; a < f.chart->real_dim(); ++a) out.comp[static_cast<std::size_t>(a)] = axis_derivative(f, a).v;
    return out;
}

ScalarField pairing_1forms(const OneFormField& a, const OneFormField& b, const HermitianMetricField& h) {
    require_same_chart(*a.chart, *h.chart(), "pairing_1forms");
    require_same_chart(*b.chart, *h.chart(), "pairing_1forms");
    const int d = h.real_dim();
    ScalarField out(a.chart);
    for (std::size_t p = 0; p < out.size(); ++p) {
        double s = 0.0;
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y) s += h.ginv(p, x, y) * a.comp[static_cast<std::size_t>(x)][p] * b.comp[static_cast<std::size_t>(y)][p];
        out.v[p] = s;
    }
    return out;
}

ScalarField hodge_laplacian(const ScalarField& f, const HermitianMetricField& h) {
    require_same_chart(*f.chart, *h.chart(), "hodge_laplacian");
    const int d = h.real_dim();
    std::vector<ScalarField> df(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) df[static_cast<std::size_t>(a)] = axis_derivative(f, a);

    ScalarField out(f.chart);
    ScalarField flux(f.chart);
    for (int a = 0; a < d; ++a) {
        for (std::size_t p = 0; p < flux.size(); ++p) {
            double s = 0.0;
            for (int b = 0; b < d; ++b) s += h.ginv(p, a, b) * df[static_cast<std::size_t>(b)].v[p];
            flux.v[p] = s * h.weight(p);
        }
        ScalarField div_a = axis_derivative(flux, a);
        for (std::size_t p = 0; p < out.size(); ++p) out.v[p] -= div_a.v[p];
    }
    for (std::size_t p = 0; p < out.size(); ++p) out.v[p] /= h.weight(p);
    return out;
}

ScalarField adjoint_drift(const ScalarField& g, const OneFormField& theta, const HermitianMetricField& h) {
    require_same_chart(*g.chart, *h.chart(), "adjoint_drift");
    const int d = h.real_dim();
    ScalarField out(g.chart);
    ScalarField flux(g.chart);
    for (int a = 0; a < d; ++a) {
        for (std::size_t p = 0; p < flux.size(); ++p) {
            double th = 0.0;
            for (int b = 0; b < d; ++b) th += h.ginv(p, a, b) * theta.comp[static_cast<std::size_t>(b)][p];
            flux.v[p] = th * g.v[p] * h.weight(p);
        }
        ScalarField div_a = axis_derivative(flux, a);
        for (std::size_t p = 0; p < out.size(); ++p) out.v[p] += div_a.v[p];
    }
    for (std::size_t p = 0; p < out.size(); ++p) out.v[p] /= h.weight(p);
    return out;
}

ScalarField adjoint_chern_laplacian(const ScalarField& g, const OneFormField& theta,
                                    const HermitianMetricField& h) {
    require_same_chart(*g.chart, *h.chart(), "adjoint_chern_laplacian");
    const int d = h.real_dim();
    std::vector<ScalarField> dg(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) dg[static_cast<std::size_t>(a)] = axis_derivative(g, a);

    ScalarField out(g.chart);
    ScalarField flux(g.chart);
    for (int a = 0; a < d; ++a) {
        for (std::size_t p = 0; p < flux.size(); ++p) {
            double grad = 0.0, th = 0.0;
            for (int b = 0; b < d; ++b) {
                const double gi = h.ginv(p, a, b);
                grad += gi * dg[static_cast<std::size_t>(b)].v[p];
                th += gi * theta.comp[static_cast<std::size_t>(b)][p];
            }
            flux.v[p] = (grad + th * g.v[p]) * h.weight(p);
        }
        ScalarField div_a = axis_derivative(flux, a);
        for (std::size_t p = 0; p < out.size(); ++p) out.v[p] -= div_a.v[p];
    }
    for (std::size_t p = 0; p < out.size(); ++p) out.v[p] /= h.weight(p);
    return out;
}

ScalarField exp_field(const ScalarField& f, double factor) {
    ScalarField out(f.chart);
    for (std::size_t i = 0; i < f.size(); ++i) out.v[i] = std::exp(factor * f.v[i]);
    return out;
}

ScalarField scaled_field(const ScalarField& f, double c) {
    ScalarField out = f;
    for (double& x : out.v) x *= c;
    return out;
}

ScalarField add_fields(const ScalarField& a, const ScalarField& b, double cb) {
    require_same_chart(*a.chart, *b.chart, "add_fields");
    ScalarField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += cb * b.v[i];
    return out;
}

void shift_field(ScalarField& f, double c) {
    for (double& x : f.v) x += c;
}

double c2_norm(const ScalarField& f) {
    double m = sup_norm(f.v);
    const int d = f.chart->real_dim();
    double m1 = 0.0, m2 = 0.0;
    for (int a = 0; a < d; ++a) {
        ScalarField da = axis_derivative(f, a);
        m1 = std::max(m1, sup_norm(da.v));
        for (int b = a; b < d; ++b) m2 = std::max(m2, sup_norm(axis_derivative(da, b).v));
    }
    return m + m1 + m2;
}

double l2_norm_weighted(const ScalarField& f, const ScalarField& weights) {
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f.v[i] * f.v[i] * weights.v[i];
    return std::sqrt(pairwise_sum(sq) * f.chart->cell_volume());
}

} // namespace chy

#include "chy/metric.hpp"

#include <cmath>
#include <limits>

#include "chy/util.hpp"

namespace chy {

namespace {

/// Cholesky factorization H = L L^* of a Hermitian matrix stored row-major.
/// Returns false when a pivot fails positivity.
bool cholesky_complex(int n, const cxd* H, cxd* L) {
    for (int i = 0; i < n * n; ++i) L[i] = cxd(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        cxd diag = H[j * n + j];
        for (int k = 0; k < j; ++k) diag -= L[j * n + k] * std::conj(L[j * n + k]);
        double d = diag.real();
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        double ljj = std::sqrt(d);
        L[j * n + j] = ljj;
        for (int i = j + 1; i < n; ++i) {
            cxd s = H[i * n + j];
            for (int k = 0; k < j; ++k) s -= L[i * n + k] * std::conj(L[j * n + k]);
            L[i * n + j] = s / ljj;
        }
    }
    return true;
}

/// Inverse from the Cholesky factor: solves L L^* X = I column by column.
void invert_from_cholesky(int n, const cxd* L, cxd* X) {
    std::vector<cxd> y(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        for (int i = 0; i < n; ++i) {
            cxd s = (i == c) ? cxd(1.0, 0.0) : cxd(0.0, 0.0);
            for (int k = 0; k < i; ++k) s -= L[i * n + k] * y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(i)] = s / L[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            cxd s = y[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < n; ++k) s -= std::conj(L[k * n + i]) * X[k * n + c];
            X[i * n + c] = s / L[i * n + i];
        }
    }
}

bool cholesky_real(int n, const double* A, double* L) {
    for (int i = 0; i < n * n; ++i) L[i] = 0.0;
    for (int j = 0; j < n; ++j) {
        double diag = A[j * n + j];
        for (int k = 0; k < j; ++k) diag -= L[j * n + k] * L[j * n + k];
        if (!(diag > 0.0) || !std::isfinite(diag)) return false;
        double ljj = std::sqrt(diag);
        L[j * n + j] = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A[i * n + j];
            for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            L[i * n + j] = s / ljj;
        }
    }
    return true;
}

void invert_from_cholesky_real(int n, const double* L, double* X) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = (i == c) ? 1.0 : 0.0;
            for (int k = 0; k < i; ++k) s -= L[i * n + k] * y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(i)] = s / L[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * X[k * n + c];
            X[i * n + c] = s / L[i * n + i];
        }
    }
}

} // namespace

HermitianMetricField::HermitianMetricField(ChartPtr chart, std::vector<cxd> entries)
    : chart_(std::move(chart)), n_(chart_->complex_dim()) {
    nn_ = static_cast<std::size_t>(n_ * n_);
    if (entries.size() != chart_->point_count() * nn_)
        throw ConfigError("HermitianMetricField: entry count does not match chart");
    h_ = std::move(entries);
    // Mirror the upper triangle so Hermitian symmetry holds exactly.
    const std::size_t np = chart_->point_count();
    for (std::size_t p = 0; p < np; ++p) {
        for (int i = 0; i < n_; ++i) {
            h_[p * nn_ + static_cast<std::size_t>(i * n_ + i)] =
                cxd(h_[p * nn_ + static_cast<std::size_t>(i * n_ + i)].real(), 0.0);
            for (int j = i + 1; j < n_; ++j)
                h_[p * nn_ + static_cast<std::size_t>(j * n_ + i)] =
                    std::conj(h_[p * nn_ + static_cast<std::size_t>(i * n_ + j)]);
        }
    }
    finish_construction();
}

void HermitianMetricField::finish_construction() {
    const std::size_t np = chart_->point_count();
    const int n = n_;
    const int d = 2 * n;
    gsize_ = static_cast<std::size_t>(d * (d + 1) / 2);
    hinv_.assign(np * nn_, cxd(0.0, 0.0));
    ginv_.assign(np * gsize_, 0.0);
    weight_ = ScalarField(chart_);

    std::vector<cxd> L(nn_), X(nn_);
    std::vector<double> G(static_cast<std::size_t>(d * d)), Lr(static_cast<std::size_t>(d * d)),
        Gi(static_cast<std::size_t>(d * d));
    const double two_n = std::pow(2.0, n);
    min_weight_ = std::numeric_limits<double>::infinity();

    for (std::size_t p = 0; p < np; ++p) {
        const cxd* H = h_.data() + p * nn_;
        if (!cholesky_complex(n, H, L.data()))
            throw PositivityError("HermitianMetricField: matrix not positive definite at a grid point");
        double det = 1.0;
        for (int i = 0; i < n; ++i) det *= L[static_cast<std::size_t>(i * n + i)].real();
        det *= det;
        weight_.v[p] = two_n * det;
        min_weight_ = std::min(min_weight_, weight_.v[p]);
        invert_from_cholesky(n, L.data(), X.data());
        for (std::size_t k = 0; k < nn_; ++k) hinv_[p * nn_ + k] = X[k];

        // Real compatible metric in the interleaved frame:
        //   g(x_i,x_j) = g(y_i,y_j) = 2 Re h_{ij},  g(x_i,y_j) = 2 Im h_{ij}.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double re = 2.0 * H[i * n + j].real();
                double im = 2.0 * H[i * n + j].imag();
                G[static_cast<std::size_t>((2 * i) * d + 2 * j)] = re;
                G[static_cast<std::size_t>((2 * i + 1) * d + 2 * j + 1)] = re;
                G[static_cast<std::size_t>((2 * i) * d + 2 * j + 1)] = im;
                G[static_cast<std::size_t>((2 * j + 1) * d + 2 * i)] = im;
            }
        }
        if (!cholesky_real(d, G.data(), Lr.data()))
            throw PositivityError("HermitianMetricField: real metric not positive definite");
        invert_from_cholesky_real(d, Lr.data(), Gi.data());
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) ginv_[p * gsize_ + idx++] = Gi[static_cast<std::size_t>(a * d + b)];
    }
    total_volume_ = pairwise_sum(weight_.v) * chart_->cell_volume();
}

HermitianMetricField HermitianMetricField::identity(ChartPtr chart, double scale) {
    const int n = chart->complex_dim();
    std::vector<cxd> entries(chart->point_count() * static_cast<std::size_t>(n * n), cxd(0.0, 0.0));
    for (std::size_t p = 0; p < chart->point_count(); ++p)
        for (int i = 0; i < n; ++i)
            entries[p * static_cast<std::size_t>(n * n) + static_cast<std::size_t>(i * n + i)] = scale;
    HermitianMetricField m(chart, std::move(entries));
    m.conformal_factor_ = ScalarField(chart, scale);
    return m;
}

HermitianMetricField HermitianMetricField::conformally_flat(ChartPtr chart, const ScalarField& u) {
    require_same_chart(*chart, *u.chart, "conformally_flat");
    const int n = chart->complex_dim();
    std::vector<cxd> entries(chart->point_count() * static_cast<std::size_t>(n * n), cxd(0.0, 0.0));
    for (std::size_t p = 0; p < chart->point_count(); ++p)
        for (int i = 0; i < n; ++i)
            entries[p * static_cast<std::size_t>(n * n) + static_cast<std::size_t>(i * n + i)] = u.v[p];
    HermitianMetricField m(chart, std::move(entries));
    m.conformal_factor_ = u;
    return m;
}

HermitianMetricField HermitianMetricField::scaled(double c) const {
    if (!(c > 0.0)) throw PositivityError("HermitianMetricField::scaled: factor must be positive");
    std::vector<cxd> entries = h_;
    for (cxd& e : entries) e *= c;
    HermitianMetricField m(chart_, std::move(entries));
    if (conformal_factor_) {
        ScalarField u = *conformal_factor_;
        for (double& x : u.v) x *= c;
        m.conformal_factor_ = std::move(u);
    }
    return m;
}

HermitianMetricField conformal_rescale(const HermitianMetricField& h, const ScalarField& f) {
    require_same_chart(*h.chart(), *f.chart, "conformal_rescale");
    const int n = h.n();
    if (h.conformal_factor()) {
        ScalarField u = *h.conformal_factor();
        for (std::size_t p = 0; p < u.size(); ++p) u.v[p] *= std::exp(2.0 * f.v[p] / n);
        return HermitianMetricField::conformally_flat(h.chart(), u);
    }
    const std::size_t nn = static_cast<std::size_t>(n * n);
    std::vector<cxd> entries(h.points() * nn);
    for (std::size_t p = 0; p < h.points(); ++p) {
        const double c = std::exp(2.0 * f.v[p] / n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) entries[p * nn + static_cast<std::size_t>(i * n + j)] = c * h.entry(p, i, j);
    }
    return HermitianMetricField(h.chart(), std::move(entries));
}

} // namespace chy

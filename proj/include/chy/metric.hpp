#pragma once

#include <optional>

#include "chy/grid.hpp"

namespace chy {

/// Hermitian positive-definite n x n matrix field h_{i jbar} together with
/// the derived data every operator needs: the inverse matrix, the measure
/// weight 2^n det(h) (the coefficient of the volume form against Lebesgue
/// measure), and the inverse of the compatible real Riemannian metric
/// g(u, v) = omega(u, Jv) in the interleaved (x, y) coordinate frame.
///
/// Positivity is enforced at construction (Cholesky must succeed pointwise).
class HermitianMetricField {
public:
    /// entries: n*n complex values per point, row-major (i, j) -> h_{i jbar},
    /// flattened point-major. Hermitian symmetry is enforced by mirroring the
    /// upper triangle.
    HermitianMetricField(ChartPtr chart, std::vector<cxd> entries);

    static HermitianMetricField identity(ChartPtr chart, double scale = 1.0);
    /// h = u(x) * identity for a positive scalar field u.
    static HermitianMetricField conformally_flat(ChartPtr chart, const ScalarField& u);

    const ChartPtr& chart() const { return chart_; }
    int n() const { return n_; }
    int real_dim() const { return 2 * n_; }
    std::size_t points() const { return chart_->point_count(); }

    cxd entry(std::size_t p, int i, int j) const { return h_[p * nn_ + static_cast<std::size_t>(i * n_ + j)]; }
    /// (h^{-1})_{ij} as a plain matrix inverse; the raised-index metric is
    /// h^{i jbar} = (h^{-1})_{ji}.
    cxd inv_entry(std::size_t p, int i, int j) const { return hinv_[p * nn_ + static_cast<std::size_t>(i * n_ + j)]; }

    double weight(std::size_t p) const { return weight_.v[p]; }
    const ScalarField& weights() const { return weight_; }

    /// Inverse real metric g^{ab}, a,b in [0, 2n).
    double ginv(std::size_t p, int a, int b) const {
        if (a > b) std::swap(a, b);
        return ginv_[p * gsize_ + static_cast<std::size_t>(a * (2 * n_) - a * (a + 1) / 2 + b)];
    }

    double total_volume() const { return total_volume_; }
    double min_weight() const { return min_weight_; }

    /// Structural conformal factor u when the metric is exactly u(x) * I.
    const std::optional<ScalarField>& conformal_factor() const { return conformal_factor_; }

    HermitianMetricField scaled(double c) const;

private:
    HermitianMetricField() = default;
    void finish_construction();

    ChartPtr chart_;
    int n_ = 0;
    std::size_t nn_ = 0;
    std::size_t gsize_ = 0;
    std::vector<cxd> h_;
    std::vector<cxd> hinv_;
    std::vector<double> ginv_;
    ScalarField weight_;
    double total_volume_ = 0.0;
    double min_weight_ = 0.0;
    std::optional<ScalarField> conformal_factor_;
};

/// exp(2f/n) * h; the conformal action on the metric. The Chern scalar
/// curvature of the result obeys
///   S(exp(2f/n) h) = exp(-2f/n) (S(h) + Lap_h f).
HermitianMetricField conformal_rescale(const HermitianMetricField& h, const ScalarField& f);

} // namespace chy

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "chy/errors.hpp"

namespace chy {

using cxd = std::complex<double>;

/// Uniform periodic grid chart for the torus C^n / lattice. Real coordinates
/// are interleaved per complex axis: axis 2j is x^{j+1}, axis 2j+1 is y^{j+1},
/// each sampled at `resolution` points over its period. Storage is row-major
/// with axis 0 slowest.
class GridChart {
public:
    GridChart(int complex_dim, int resolution, std::vector<double> periods = {});

    int complex_dim() const { return n_; }
    int real_dim() const { return 2 * n_; }
    int resolution() const { return res_; }
    const std::vector<double>& periods() const { return periods_; }
    double period(int axis) const { return periods_[static_cast<std::size_t>(axis)]; }

    std::size_t point_count() const { return count_; }
    std::size_t axis_stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
    double cell_volume() const { return cell_volume_; }

    int axis_index(std::size_t flat, int axis) const {
        return static_cast<int>((flat / axis_stride(axis)) % static_cast<std::size_t>(res_));
    }
    double coordinate(std::size_t flat, int axis) const {
        return period(axis) * axis_index(flat, axis) / res_;
    }

    bool same_as(const GridChart& other) const;

private:
    int n_ = 0;
    int res_ = 0;
    std::vector<double> periods_;
    std::vector<std::size_t> strides_;
    std::size_t count_ = 0;
    double cell_volume_ = 0.0;
};

using ChartPtr = std::shared_ptr<const GridChart>;

ChartPtr make_chart(int complex_dim, int resolution, std::vector<double> periods = {});

/// Real-valued sample per grid point.
struct ScalarField {
    ChartPtr chart;
    std::vector<double> v;
    /// Largest integer frequency the field is declared to carry, if known.
    std::optional<int> band_limit;

    ScalarField() = default;
    explicit ScalarField(ChartPtr c, double fill = 0.0)
        : chart(std::move(c)), v(chart->point_count(), fill) {}

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

/// Complex-valued sample per grid point (the "complex-flagged" counterpart of
/// ScalarField; holomorphic derivatives land here).
struct ComplexField {
    ChartPtr chart;
    std::vector<cxd> v;

    ComplexField() = default;
    explicit ComplexField(ChartPtr c, cxd fill = {})
        : chart(std::move(c)), v(chart->point_count(), fill) {}

    std::size_t size() const { return v.size(); }
    cxd& operator[](std::size_t i) { return v[i]; }
    const cxd& operator[](std::size_t i) const { return v[i]; }
};

/// Real 1-form with the 2n components stored in the coordinate basis
/// (dx^1, dy^1, ..., dx^n, dy^n).
struct OneFormField {
    ChartPtr chart;
    std::vector<std::vector<double>> comp; // [2n][points]

    OneFormField() = default;
    explicit OneFormField(ChartPtr c)
        : chart(std::move(c)),
          comp(static_cast<std::size_t>(chart->real_dim()),
               std::vector<double>(chart->point_count(), 0.0)) {}
};

ComplexField to_complex(const ScalarField& f);

/// Real part of a complex field; if max_imag is given it receives the sup of
/// the discarded imaginary part (used to audit operations that must produce
/// real output up to spectral round-off).
ScalarField real_part(const ComplexField& f, double* max_imag = nullptr);

void require_same_chart(const GridChart& a, const GridChart& b, const char* what);

} // namespace chy

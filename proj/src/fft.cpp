#include "chy/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace chy {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

struct Plan {
    int n = 0;
    std::vector<int> bitrev;
    std::vector<cxd> roots;     // exp(-2 pi i j / n), j in [0, n/2)
    std::vector<cxd> inv_roots; // conjugates
};

const Plan& plan_for(int n) {
    static std::map<int, Plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Plan p;
    p.n = n;
    p.bitrev.assign(static_cast<std::size_t>(n), 0);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n; ++b)
            if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
        p.bitrev[static_cast<std::size_t>(i)] = r;
    }
    p.roots.resize(static_cast<std::size_t>(n / 2));
    p.inv_roots.resize(static_cast<std::size_t>(n / 2));
    for (int j = 0; j < n / 2; ++j) {
        double ang = -kTwoPi * j / n;
        p.roots[static_cast<std::size_t>(j)] = cxd(std::cos(ang), std::sin(ang));
        p.inv_roots[static_cast<std::size_t>(j)] = std::conj(p.roots[static_cast<std::size_t>(j)]);
    }
    return cache.emplace(n, std::move(p)).first->second;
}

void fft_line(cxd* a, const Plan& p, bool inverse) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        int r = p.bitrev[static_cast<std::size_t>(i)];
        if (i < r) std::swap(a[i], a[r]);
    }
    const auto& roots = inverse ? p.inv_roots : p.roots;
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < len / 2; ++j) {
                cxd w = roots[static_cast<std::size_t>(j * step)];
                cxd u = a[i + j];
                cxd t = w * a[i + j + len / 2];
                a[i + j] = u + t;
                a[i + j + len / 2] = u - t;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / n;
        for (int i = 0; i < n; ++i) a[i] *= inv;
    }
}

} // namespace

void fft_axis(const GridChart& chart, cxd* data, int axis, bool inverse) {
    const int r = chart.resolution();
    const Plan& p = plan_for(r);
    const std::size_t stride = chart.axis_stride(axis);
    const std::size_t total = chart.point_count();
    const std::size_t block = stride * static_cast<std::size_t>(r);
    std::vector<cxd> line(static_cast<std::size_t>(r));
    for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            cxd* start = data + base + off;
            for (int j = 0; j < r; ++j) line[static_cast<std::size_t>(j)] = start[static_cast<std::size_t>(j) * stride];
            fft_line(line.data(), p, inverse);
            for (int j = 0; j < r; ++j) start[static_cast<std::size_t>(j) * stride] = line[static_cast<std::size_t>(j)];
        }
    }
}

void fft_all(const GridChart& chart, cxd* data, bool inverse) {
    for (int a = 0; a < chart.real_dim(); ++a) fft_axis(chart, data, a, inverse);
}

namespace {

// Multiplies the axis-transformed data by i*2pi*k/L, zeroing the Nyquist mode.
void apply_derivative_symbol(const GridChart& chart, cxd* data, int axis) {
    const int r = chart.resolution();
    const double scale = kTwoPi / chart.period(axis);
    const std::size_t total = chart.point_count();
    std::vector<cxd> factor(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
        int m = signed_mode(k, r);
        if (k == r / 2) m = 0;
        factor[static_cast<std::size_t>(k)] = cxd(0.0, scale * m);
    }
    for (std::size_t i = 0; i < total; ++i) data[i] *= factor[static_cast<std::size_t>(chart.axis_index(i, axis))];
}

} // namespace

ComplexField axis_derivative(const ComplexField& f, int axis) {
    ComplexField out = f;
    fft_axis(*f.chart, out.v.data(), axis, false);
    apply_derivative_symbol(*f.chart, out.v.data(), axis);
    fft_axis(*f.chart, out.v.data(), axis, true);
    return out;
}

ScalarField axis_derivative(const ScalarField& f, int axis) {
    thread_local std::vector<cxd> buf;
    buf.assign(f.v.begin(), f.v.end());
    fft_axis(*f.chart, buf.data(), axis, false);
    apply_derivative_symbol(*f.chart, buf.data(), axis);
    fft_axis(*f.chart, buf.data(), axis, true);
    ScalarField out(f.chart);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = buf[i].real();
    out.band_limit = f.band_limit;
    return out;
}

ComplexField holomorphic_derivative(const ComplexField& f, int j, bool conjugated) {
    ComplexField dx = axis_derivative(f, 2 * j);
    ComplexField dy = axis_derivative(f, 2 * j + 1);
    const cxd iy = conjugated ? cxd(0.0, 0.5) : cxd(0.0, -0.5);
    ComplexField out(f.chart);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = 0.5 * dx.v[i] + iy * dy.v[i];
    return out;
}

ComplexField holomorphic_derivative(const ScalarField& f, int j, bool conjugated) {
    return holomorphic_derivative(to_complex(f), j, conjugated);
}

ScalarField apply_flat_symbol(const ScalarField& f, const std::vector<double>& symbol) {
    thread_local std::vector<cxd> buf;
    buf.assign(f.v.begin(), f.v.end());
    fft_all(*f.chart, buf.data(), false);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= symbol[i];
    fft_all(*f.chart, buf.data(), true);
    ScalarField out(f.chart);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = buf[i].real();
    out.band_limit = f.band_limit;
    return out;
}

std::vector<double> flat_chern_symbol(const GridChart& chart) {
    std::vector<double> sym(chart.point_count(), 0.0);
    const int d = chart.real_dim();
    for (std::size_t i = 0; i < sym.size(); ++i) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            double k = kTwoPi * signed_mode(chart.axis_index(i, a), chart.resolution()) / chart.period(a);
            s += k * k;
        }
        sym[i] = 0.5 * s;
    }
    return sym;
}

bool band_limit_resolved(const ScalarField& f) {
    if (!f.band_limit) return true;
    return *f.band_limit < f.chart->resolution() / 2;
}

} // namespace chy

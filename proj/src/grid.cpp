#include "chy/grid.hpp"

#include <cmath>
#include <string>

#include "chy/util.hpp"

namespace chy {

namespace {
bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }
} // namespace

GridChart::GridChart(int complex_dim, int resolution, std::vector<double> periods)
    : n_(complex_dim), res_(resolution), periods_(std::move(periods)) {
    if (n_ < 2) throw ConfigError("GridChart: complex dimension must be >= 2");
    if (res_ < 8) throw ConfigError("GridChart: resolution must be >= 8");
    if (!is_power_of_two(res_)) throw ConfigError("GridChart: resolution must be a power of two");
    const std::size_t d = static_cast<std::size_t>(2 * n_);
    if (periods_.empty()) periods_.assign(d, 1.0);
    if (periods_.size() != d) throw ConfigError("GridChart: expected 2n periods");
    for (double p : periods_)
        if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("GridChart: periods must be positive");

    strides_.assign(d, 1);
    count_ = 1;
    for (std::size_t a = d; a-- > 0;) {
        strides_[a] = count_;
        count_ *= static_cast<std::size_t>(res_);
    }
    double domain = 1.0;
    for (double p : periods_) domain *= p;
    cell_volume_ = domain / static_cast<double>(count_);
}

bool GridChart::same_as(const GridChart& other) const {
    return n_ == other.n_ && res_ == other.res_ && periods_ == other.periods_;
}

ChartPtr make_chart(int complex_dim, int resolution, std::vector<double> periods) {
    return std::make_shared<const GridChart>(complex_dim, resolution, std::move(periods));
}

ComplexField to_complex(const ScalarField& f) {
    ComplexField out(f.chart);
    for (std::size_t i = 0; i < f.size(); ++i) out.v[i] = cxd(f.v[i], 0.0);
    return out;
}

ScalarField real_part(const ComplexField& f, double* max_imag) {
    ScalarField out(f.chart);
    double mi = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        out.v[i] = f.v[i].real();
        mi = std::max(mi, std::abs(f.v[i].imag()));
    }
    if (max_imag) *max_imag = mi;
    return out;
}

void require_same_chart(const GridChart& a, const GridChart& b, const char* what) {
    if (!a.same_as(b)) throw ConfigError(std::string(what) + ": fields live on different charts");
}

double pairwise_sum(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n <= 64) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

} // namespace chy

#include "chy/forms.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>

#include "chy/fft.hpp"
#include "chy/util.hpp"

namespace chy {

namespace {

std::vector<std::uint32_t> build_masks(int dim, int degree) {
    std::vector<std::uint32_t> out;
    const std::uint32_t top = 1u << dim;
    for (std::uint32_t m = 0; m < top; ++m)
        if (std::popcount(m) == degree) out.push_back(m);
    return out;
}

struct MaskTable {
    std::vector<std::uint32_t> masks;
    std::vector<int> index; // mask -> position, -1 elsewhere
};

const MaskTable& mask_table(int dim, int degree) {
    static std::map<std::pair<int, int>, MaskTable> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(dim, degree);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    MaskTable t;
    t.masks = build_masks(dim, degree);
    t.index.assign(std::size_t{1} << dim, -1);
    for (std::size_t i = 0; i < t.masks.size(); ++i) t.index[t.masks[i]] = static_cast<int>(i);
    return cache.emplace(key, std::move(t)).first->second;
}

} // namespace

FormField::FormField(ChartPtr c, int deg) : chart(std::move(c)), degree(deg) {
    const auto& masks = form_masks(chart->real_dim(), deg);
    comp.assign(masks.size(), std::vector<double>(chart->point_count(), 0.0));
}

const std::vector<std::uint32_t>& form_masks(int dim, int degree) {
    return mask_table(dim, degree).masks;
}

int form_index(int dim, int degree, std::uint32_t mask) {
    int idx = mask_table(dim, degree).index[mask];
    if (idx < 0) throw InternalError("form_index: mask degree mismatch");
    return idx;
}

int merge_sign(std::uint32_t a, std::uint32_t b) {
    if (a & b) return 0;
    int swaps = 0;
    std::uint32_t rest = a;
    while (rest) {
        std::uint32_t bit = rest & (~rest + 1);
        int pos = std::countr_zero(bit);
        swaps += std::popcount(b & ((1u << pos) - 1u));
        rest ^= bit;
    }
    return (swaps & 1) ? -1 : 1;
}

FormField wedge(const FormField& a, const FormField& b) {
    require_same_chart(*a.chart, *b.chart, "wedge");
    const int dim = a.chart->real_dim();
    FormField out(a.chart, a.degree + b.degree);
    const auto& ma = form_masks(dim, a.degree);
    const auto& mb = form_masks(dim, b.degree);
    const std::size_t np = a.chart->point_count();
    for (std::size_t ia = 0; ia < ma.size(); ++ia) {
        for (std::size_t ib = 0; ib < mb.size(); ++ib) {
            int sign = merge_sign(ma[ia], mb[ib]);
            if (sign == 0) continue;
            auto& dst = out.comp[static_cast<std::size_t>(form_index(dim, out.degree, ma[ia] | mb[ib]))];
            const auto& fa = a.comp[ia];
            const auto& fb = b.comp[ib];
            const double s = sign;
            for (std::size_t p = 0; p < np; ++p) dst[p] += s * fa[p] * fb[p];
        }
    }
    return out;
}

FormField wedge_power(const FormField& a, int k) {
    if (k < 1) throw InternalError("wedge_power: exponent must be >= 1");
    FormField out = a;
    for (int i = 1; i < k; ++i) out = wedge(out, a);
    return out;
}

FormField exterior_derivative(const FormField& a) {
    const int dim = a.chart->real_dim();
    FormField out(a.chart, a.degree + 1);
    const auto& masks = form_masks(dim, a.degree);
    for (std::size_t im = 0; im < masks.size(); ++im) {
        for (int ax = 0; ax < dim; ++ax) {
            std::uint32_t bit = 1u << ax;
            if (masks[im] & bit) continue;
            int sign = merge_sign(bit, masks[im]);
            ScalarField c;
            c.chart = a.chart;
            c.v = a.comp[im];
            ScalarField dc = axis_derivative(c, ax);
            auto& dst = out.comp[static_cast<std::size_t>(form_index(dim, a.degree + 1, masks[im] | bit))];
            for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += sign * dc.v[p];
        }
    }
    return out;
}

FormField apply_complex_structure(const FormField& a) {
    const int dim = a.chart->real_dim();
    FormField out(a.chart, a.degree);
    const auto& masks = form_masks(dim, a.degree);
    for (std::size_t im = 0; im < masks.size(); ++im) {
        // J sends e_{2j} -> -e_{2j+1} and e_{2j+1} -> +e_{2j}; apply factorwise
        // and sort the image basis back to ascending order.
        std::uint32_t src = masks[im];
        std::uint32_t img = 0;
        int sign = 1;
        std::vector<int> image_bits;
        while (src) {
            std::uint32_t bit = src & (~src + 1);
            int pos = std::countr_zero(bit);
            int partner = pos ^ 1;
            if ((pos & 1) == 0) sign = -sign; // dx -> -dy
            image_bits.push_back(partner);
            src ^= bit;
        }
        // Count inversions of the image sequence.
        for (std::size_t i = 0; i < image_bits.size(); ++i)
            for (std::size_t j = i + 1; j < image_bits.size(); ++j)
                if (image_bits[i] > image_bits[j]) sign = -sign;
        for (int b : image_bits) img |= 1u << b;
        auto& dst = out.comp[static_cast<std::size_t>(form_index(dim, a.degree, img))];
        const auto& f = a.comp[im];
        const double s = sign;
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += s * f[p];
    }
    return out;
}

FormField metric_two_form(const HermitianMetricField& h) {
    const int n = h.n();
    const int dim = 2 * n;
    FormField out(h.chart(), 2);
    const std::size_t np = h.points();

    auto add = [&](int axis_a, int axis_b, std::size_t p, double value) {
        // value = omega(axis_a, axis_b); store against the ascending basis.
        if (axis_a > axis_b) {
            std::swap(axis_a, axis_b);
            value = -value;
        }
        std::uint32_t mask = (1u << axis_a) | (1u << axis_b);
        out.comp[static_cast<std::size_t>(form_index(dim, 2, mask))][p] += value;
    };

    for (std::size_t p = 0; p < np; ++p) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                cxd hij = h.entry(p, i, j);
                if (i < j) {
                    add(2 * i, 2 * j, p, -2.0 * hij.imag());
                    add(2 * i + 1, 2 * j + 1, p, -2.0 * hij.imag());
                }
                add(2 * i, 2 * j + 1, p, 2.0 * hij.real());
            }
        }
    }
    return out;
}

FormField i_del_delbar(const FormField& a) {
    FormField da = exterior_derivative(a);
    FormField jda = apply_complex_structure(da);
    FormField out = exterior_derivative(jda);
    for (auto& c : out.comp)
        for (double& x : c) x *= -0.5;
    return out;
}

FormField scale_form(const FormField& a, const ScalarField& s) {
    require_same_chart(*a.chart, *s.chart, "scale_form");
    FormField out = a;
    for (auto& c : out.comp)
        for (std::size_t p = 0; p < c.size(); ++p) c[p] *= s.v[p];
    return out;
}

double l2_norm(const FormField& a) {
    double acc = 0.0;
    std::vector<double> sq(a.chart->point_count());
    for (const auto& c : a.comp) {
        for (std::size_t p = 0; p < sq.size(); ++p) sq[p] = c[p] * c[p];
        acc += pairwise_sum(sq);
    }
    return std::sqrt(acc * a.chart->cell_volume());
}

} // namespace chy

#include "chy/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace chy {

namespace {

using int128 = __int128;

long long checked_narrow(int128 x) {
    if (x > static_cast<int128>(9223372036854775807LL) || x < -static_cast<int128>(9223372036854775807LL))
        throw Error("Rational: 64-bit overflow");
    return static_cast<long long>(x);
}

Rational make_reduced(int128 num, int128 den) {
    if (den == 0) throw Error("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    int128 a = num < 0 ? -num : num;
    int128 b = den;
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    if (a == 0) a = 1;
    return Rational(checked_narrow(num / a), checked_narrow(den / a));
}

constexpr double kPi = 3.14159265358979323846264338;

} // namespace

Rational::Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

void Rational::normalize() {
    if (den_ == 0) throw Error("Rational: zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rational Rational::from_decimal(double x, long long max_den, bool* inexact) {
    if (!std::isfinite(x)) throw ConfigError("Rational::from_decimal: value not finite");
    // Continued-fraction convergents with capped denominator.
    const bool neg = x < 0;
    double y = neg ? -x : x;
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = y;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(frac);
        if (fl > 9e17) break;
        long long a = static_cast<long long>(fl);
        int128 p2 = static_cast<int128>(a) * p1 + p0;
        int128 q2 = static_cast<int128>(a) * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = checked_narrow(p2);
        q1 = checked_narrow(q2);
        double rem = frac - fl;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    Rational r(neg ? -p1 : p1, q1 == 0 ? 1 : q1);
    if (inexact) *inexact = (r.to_double() != x);
    return r;
}

Rational Rational::parse(const std::string& text, long long max_den, bool* inexact) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        long long p = std::stoll(text.substr(0, slash));
        long long q = std::stoll(text.substr(slash + 1));
        if (inexact) *inexact = false;
        return Rational(p, q);
    }
    if (text.find('.') == std::string::npos && text.find('e') == std::string::npos &&
        text.find('E') == std::string::npos) {
        if (inexact) *inexact = false;
        return Rational(std::stoll(text), 1);
    }
    return from_decimal(std::stod(text), max_den, inexact);
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return make_reduced(static_cast<int128>(a.num_) * b.den_ + static_cast<int128>(b.num_) * a.den_,
                        static_cast<int128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) {
    return make_reduced(static_cast<int128>(a.num_) * b.den_ - static_cast<int128>(b.num_) * a.den_,
                        static_cast<int128>(a.den_) * b.den_);
}
Rational operator*(const Rational& a, const Rational& b) {
    return make_reduced(static_cast<int128>(a.num_) * b.num_, static_cast<int128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("Rational: division by zero");
    return make_reduced(static_cast<int128>(a.num_) * b.den_, static_cast<int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int128 lhs = static_cast<int128>(a.num_) * b.den_;
    int128 rhs = static_cast<int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::vector<EigenLevel> cp1_levels(int j_max) {
    if (j_max < 0) throw ConfigError("cp1_levels: j_max must be non-negative");
    std::vector<EigenLevel> out;
    out.reserve(static_cast<std::size_t>(j_max) + 1);
    for (int j = 0; j <= j_max; ++j)
        out.push_back(EigenLevel{j, static_cast<long long>(j) * (j + 1), 2 * j + 1});
    return out;
}

double ProductSpectralModel::volume() const {
    return std::pow(4.0 * kPi, 3) * lambda.to_double();
}

double ProductSpectralModel::curvature() const {
    const double l = lambda.to_double();
    return 2.0 * (2.0 + 1.0 / l) * std::cbrt(volume());
}

namespace {

/// Transversality multiplier of a kernel family.
///
/// On the product eigenspace with levels (mu1, mu2, mu3) the linearization is
/// the scalar A(lambda) = V(lambda)^{1/3} (mu1 + mu2 + mu3/lambda
/// - (4/3)(2 + 1/lambda)). Differentiating in lambda, the V^{1/3}-prime term
/// multiplies the bracket, which vanishes identically on a kernel family, so
///   (d/d lambda) A = V^{1/3} * (4/3 - mu3) / lambda^2.
/// At lambda = 1/4 this equals the closed form
///   (4 pi / 3) 4^{2/3} (8 + mu1 + mu2 - 8 mu3)
/// (substitute mu1 + mu2 = 8 - 4 mu3 from the kernel condition); that display
/// is returned verbatim at lambda = 1/4 and the general derivative elsewhere.
void attach_multiplier(KernelFamily& fam, const Rational& lambda) {
    const Rational quarter(1, 4);
    if (lambda == quarter) {
        fam.multiplier = Rational(8 + fam.mu1 + fam.mu2 - 8 * fam.mu3);
        fam.prefactor = "(4*pi/3)*4^(2/3)";
        fam.beyond_quarter_formula = false;
    } else {
        fam.multiplier = Rational(4 - 3 * fam.mu3) / (Rational(3) * lambda * lambda);
        fam.prefactor = "V(lambda)^(1/3)";
        fam.beyond_quarter_formula = true;
    }
}

} // namespace

std::vector<KernelFamily> kernel_families(const Rational& lambda, int j_max) {
    if (!(lambda > Rational(0))) throw ConfigError("kernel_families: lambda must be positive");
    if (j_max < 0) throw ConfigError("kernel_families: j_max must be non-negative");
    std::vector<KernelFamily> out;
    auto levels = cp1_levels(j_max);
    for (const auto& l1 : levels)
        for (const auto& l2 : levels)
            for (const auto& l3 : levels) {
                // lambda (3 mu1 + 3 mu2 - 8) == 4 - 3 mu3, exactly.
                Rational lhs = lambda * Rational(3 * (l1.eigenvalue + l2.eigenvalue) - 8);
                if (lhs != Rational(4 - 3 * l3.eigenvalue)) continue;
                KernelFamily fam;
                fam.j1 = l1.j;
                fam.j2 = l2.j;
                fam.j3 = l3.j;
                fam.mu1 = l1.eigenvalue;
                fam.mu2 = l2.eigenvalue;
                fam.mu3 = l3.eigenvalue;
                fam.dimension = static_cast<long long>(l1.multiplicity) * l2.multiplicity * l3.multiplicity;
                attach_multiplier(fam, lambda);
                out.push_back(fam);
            }
    return out;
}

long long total_kernel_dimension(const std::vector<KernelFamily>& fams) {
    long long total = 0;
    for (const auto& f : fams) total += f.dimension;
    return total;
}

std::vector<KernelFamily> transversality_multipliers(const Rational& lambda0, int j_max) {
    auto fams = kernel_families(lambda0, j_max);
    for (const auto& f : fams)
        if (f.multiplier == Rational(0))
            throw InternalError("transversality_multipliers: zero multiplier (contradicts the lambda0 = 1/4 analysis)");
    return fams;
}

std::vector<BifurcationInstant> bifurcation_instants(const Rational& lo, const Rational& hi, int j_max) {
    if (!(lo > Rational(0)) || !(hi > lo)) throw ConfigError("bifurcation_instants: need 0 < lo < hi");
    if (j_max < 0) throw ConfigError("bifurcation_instants: j_max must be non-negative");
    auto levels = cp1_levels(j_max);
    std::map<Rational, bool> seen;
    for (const auto& l1 : levels)
        for (const auto& l2 : levels)
            for (const auto& l3 : levels) {
                const long long den = 3 * (l1.eigenvalue + l2.eigenvalue) - 8;
                // j(j+1) is even, so 3(mu1+mu2) is never 8.
                if (den == 0) throw InternalError("bifurcation_instants: degenerate denominator");
                const long long num = 4 - 3 * l3.eigenvalue;
                if (num == 0) continue; // lambda = 0 is outside the family
                Rational lambda(num, den);
                if (!(lambda > lo) || !(lambda < hi)) continue;
                seen.emplace(lambda, true);
            }
    std::vector<BifurcationInstant> out;
    for (const auto& [lambda, _] : seen) {
        BifurcationInstant inst;
        inst.lambda = lambda;
        inst.families = kernel_families(lambda, j_max);
        inst.total_dimension = total_kernel_dimension(inst.families);
        inst.odd = (inst.total_dimension % 2) == 1;
        inst.transversal = true;
        for (const auto& f : inst.families)
            if (f.multiplier == Rational(0)) inst.transversal = false;
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace chy

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "chy/errors.hpp"

namespace chy {

/// Exact rational arithmetic on 64-bit numerator/denominator, reduced, with
/// 128-bit intermediates. All kernel and crossing decisions in the product
/// spectral model run through this type; floating point never decides a
/// parity or zero test.
class Rational {
public:
    Rational() = default;
    Rational(long long num, long long den = 1);

    /// Nearest rational with denominator at most max_den (continued
    /// fractions). inexact is set when the result differs from x.
    static Rational from_decimal(double x, long long max_den = 1000000, bool* inexact = nullptr);
    static Rational parse(const std::string& text, long long max_den = 1000000, bool* inexact = nullptr);

    long long num() const { return num_; }
    long long den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    void normalize();
    long long num_ = 0;
    long long den_ = 1;
};

/// One Laplacian level of the round two-sphere factor: eigenvalue j(j+1)
/// with multiplicity 2j+1.
struct EigenLevel {
    int j = 0;
    long long eigenvalue = 0;
    int multiplicity = 1;
};

std::vector<EigenLevel> cp1_levels(int j_max);

/// The scaled product metric family on the threefold product of projective
/// lines: omega_lambda = V^{-1/3} (pi1* + pi2* + lambda pi3*) of the round
/// metric, V(lambda) = (4 pi)^3 lambda, curvature S(lambda) =
/// 2 (2 + 1/lambda) V^{1/3}. Laplacian eigenvalues are
/// V^{1/3} (mu1 + mu2 + mu3 / lambda).
struct ProductSpectralModel {
    Rational lambda;
    int j_max = 10;

    double volume() const;
    double curvature() const;
};

/// Product eigenspace in the kernel of the linearization
/// A(lambda) = -(2/3) S(lambda) + Lap_{omega_lambda}; the kernel condition is
/// mu1 + mu2 + mu3/lambda = (4/3)(2 + 1/lambda), handled exactly.
struct KernelFamily {
    int j1 = 0, j2 = 0, j3 = 0;
    long long mu1 = 0, mu2 = 0, mu3 = 0;
    long long dimension = 1; // (2 j1 + 1)(2 j2 + 1)(2 j3 + 1)
    /// Rational part of the mixed second derivative acting on the family;
    /// the symbolic positive common factor is in `prefactor`.
    Rational multiplier;
    std::string prefactor;
    /// True when the multiplier comes from the general-lambda derivative
    /// rather than the lambda = 1/4 closed form (extension beyond that
    /// displayed formula).
    bool beyond_quarter_formula = false;
};

std::vector<KernelFamily> kernel_families(const Rational& lambda, int j_max);
long long total_kernel_dimension(const std::vector<KernelFamily>& fams);

/// kernel_families plus a hard check that every multiplier is nonzero
/// (transversality); a zero multiplier at lambda = 1/4 is a bug signal.
std::vector<KernelFamily> transversality_multipliers(const Rational& lambda0, int j_max);

struct BifurcationInstant {
    Rational lambda;
    long long total_dimension = 0;
    bool odd = false;
    bool transversal = false;
    std::vector<KernelFamily> families;
    bool is_bifurcation_instant() const { return odd && transversal; }
};

/// All parameter values in (lo, hi) where the kernel is nontrivial within the
/// truncation, with dimensions, parities and multipliers; exact enumeration
/// of lambda = (4 - 3 mu3) / (3 mu1 + 3 mu2 - 8) over level triples.
std::vector<BifurcationInstant> bifurcation_instants(const Rational& lo, const Rational& hi, int j_max);

} // namespace chy

#pragma once

#include <functional>

#include "chy/grid.hpp"

namespace chy {

using FieldOp = std::function<ScalarField(const ScalarField&)>;

struct KrylovResult {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0; // final relative residual
};

/// Preconditioned conjugate gradient; apply must be symmetric positive
/// definite against the plain grid inner product.
KrylovResult conjugate_gradient(const FieldOp& apply, const FieldOp& precond, const ScalarField& b,
                                ScalarField& x, double rel_tol, int max_iter);

/// Preconditioned BiCGStab for general operators.
KrylovResult bicgstab(const FieldOp& apply, const FieldOp& precond, const ScalarField& b, ScalarField& x,
                      double rel_tol, int max_iter);

/// 1/(scale * s(k) + shift) division table in frequency layout, where s(k) is
/// the flat Chern Laplacian symbol; for use with apply_flat_symbol as a
/// preconditioner or as a direct constant-coefficient inverse.
std::vector<double> inverse_shifted_symbol(const GridChart& chart, double scale, double shift);

double dot_plain(const ScalarField& a, const ScalarField& b);

} // namespace chy

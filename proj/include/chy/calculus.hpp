#pragma once

#include "chy/grid.hpp"
#include "chy/metric.hpp"

namespace chy {

/// Integral of f against the volume measure of h (weight 2^n det h per cell),
/// accumulated in the deterministic pairwise order.
double integrate(const ScalarField& f, const HermitianMetricField& h);

/// Same with an explicit weight field (weight already includes 2^n det h).
double integrate_weighted(const ScalarField& f, const ScalarField& weights);

double mean_value(const ScalarField& f, const HermitianMetricField& h);

/// df in the coordinate one-form basis.
OneFormField differential(const ScalarField& f);

/// Pointwise Riemannian pairing (a, b)_g of one-forms with the inverse of the
/// compatible real metric of h.
ScalarField pairing_1forms(const OneFormField& a, const OneFormField& b, const HermitianMetricField& h);

/// Hodge-de Rham Laplacian on functions, positive at maxima:
/// Lap f = -(1/rho) d_a (rho g^{ab} d_b f). Self-adjoint against the measure
/// of h at the discrete level.
ScalarField hodge_laplacian(const ScalarField& f, const HermitianMetricField& h);

/// Divergence-form drift (1/rho) d_a (rho theta^a g); the formal adjoint of
/// the Lee drift term, so that the adjoint Chern Laplacian is
/// Lap_d g - adjoint_drift(g).
ScalarField adjoint_drift(const ScalarField& g, const OneFormField& theta, const HermitianMetricField& h);

/// Lap_d g - adjoint_drift(g) fused into a single divergence pass:
/// -(1/rho) d_a ( rho (g^{ab} d_b g + theta^a g) ), the discrete formal
/// adjoint of the Chern Laplacian against the measure of h.
ScalarField adjoint_chern_laplacian(const ScalarField& g, const OneFormField& theta,
                                    const HermitianMetricField& h);

// Small field arithmetic helpers.
ScalarField exp_field(const ScalarField& f, double factor);
ScalarField scaled_field(const ScalarField& f, double c);
ScalarField add_fields(const ScalarField& a, const ScalarField& b, double cb = 1.0);
void shift_field(ScalarField& f, double c);

/// sup|f| + max_a sup|d_a f| + max_{a,b} sup|d_a d_b f| (spectral derivatives).
double c2_norm(const ScalarField& f);

double l2_norm_weighted(const ScalarField& f, const ScalarField& weights);

} // namespace chy

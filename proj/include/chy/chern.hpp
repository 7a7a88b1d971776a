#pragma once

#include "chy/calculus.hpp"
#include "chy/forms.hpp"
#include "chy/grid.hpp"
#include "chy/metric.hpp"

namespace chy {

/// Chern Laplacian -2 h^{i jbar} d_i d_jbar f, positive at maxima. Real
/// output; max_imag reports the discarded spectral round-off.
ScalarField chern_laplacian(const HermitianMetricField& h, const ScalarField& f, double* max_imag = nullptr);

/// Same operator through the Lee-form identity Lap_d f + (df, theta).
ScalarField chern_laplacian_via_lee(const HermitianMetricField& h, const ScalarField& f,
                                    const OneFormField& theta);

/// Chern scalar curvature h^{i jbar} (-d_i d_jbar log det h).
ScalarField chern_scalar(const HermitianMetricField& h, double* max_imag = nullptr);

/// Lee form theta with d omega^{n-1} = theta ^ omega^{n-1}, obtained from the
/// pointwise 2n x 2n Lefschetz wedge system in the real basis.
OneFormField lee_form(const HermitianMetricField& h);

struct GauduchonResidual {
    double gauduchon = 0.0; // L2 of i del delbar omega^{n-1}
    double balanced = 0.0;  // L2 of d omega^{n-1}
};
GauduchonResidual gauduchon_residual(const HermitianMetricField& h);

struct GauduchonReport {
    int iterations = 0;
    double gauduchon_residual = 0.0;
    double balanced_residual = 0.0;
    double kernel_eigenvalue = 0.0;
    double kernel_residual = 0.0;
    double positivity_margin = 0.0; // min v / max v of the kernel function
};

struct GauduchonProjection {
    HermitianMetricField metric; // unit-volume Gauduchon representative
    GauduchonReport report;
    ScalarField kernel_function;      // v > 0 with adjoint-Laplacian v = 0
    ScalarField potential;            // g with eta = exp(-2g/n) * input
};

struct GauduchonOptions {
    double residual_tol = 1e-8;  // acceptance threshold on ||i del delbar eta^{n-1}||
    double kernel_tol = 1e-10;   // target on the discrete adjoint kernel residual
    double shift = 1.0;          // sigma in the deflated adjoint solve
    int max_iterations = 500;
};

/// Unique Gauduchon representative of unit volume in the conformal class,
/// computed from a positive element of the adjoint-Laplacian kernel:
/// eta^{n-1} is proportional to v * omega^{n-1}.
GauduchonProjection gauduchon_project(const HermitianMetricField& omega, const GauduchonOptions& opt = {});

/// A conformal class packaged for the solvers: the unit-volume Gauduchon
/// representative with its curvature, Lee form, potential and degree.
/// Synthetic instances carry a prescribed curvature field on the flat torus
/// in place of the geometric one and are flagged as such in every report.
struct ConformalInstance {
    HermitianMetricField eta;
    ScalarField scalar_curvature; // S(eta), or the prescribed S when synthetic
    OneFormField lee;
    ScalarField gauduchon_potential; // g with eta = exp(-2g/n) * omega_input
    double degree = 0.0;             // integral of S(eta) d mu_eta
    GauduchonReport projection;
    bool synthetic = false;
    bool balanced = false;

    const ChartPtr& chart() const { return eta.chart(); }
    int n() const { return eta.n(); }
};

/// Projects, then assembles the full instance for a geometric metric.
ConformalInstance gauduchon_degree(const HermitianMetricField& omega, const GauduchonOptions& opt = {});

/// Instance with prescribed curvature data over the unit-volume flat torus.
ConformalInstance synthetic_instance(const ChartPtr& chart, ScalarField prescribed_s);

/// Curvature of exp(2f/n) * (instance data) through the conformal change law,
/// using the instance's possibly prescribed S. Coincides with chern_scalar of
/// the rescaled metric for geometric instances.
ScalarField instance_scalar_curvature(const ConformalInstance& inst, const ScalarField& f);

} // namespace chy

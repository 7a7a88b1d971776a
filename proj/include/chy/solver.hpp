#pragma once

#include <memory>
#include <optional>
#include <string>

#include "chy/chern.hpp"
#include "chy/linsolve.hpp"

namespace chy {

using InstancePtr = std::shared_ptr<const ConformalInstance>;

/// Chern Laplacian of a reference metric with a frequency-space fast path
/// when the metric is conformally flat (h = u * I gives (1/u) times the flat
/// operator).
class ChernOperator {
public:
    explicit ChernOperator(std::shared_ptr<const HermitianMetricField> metric);

    ScalarField apply(const ScalarField& f) const;
    bool conformally_flat() const { return u_.has_value(); }
    const ScalarField* conformal_factor() const { return u_ ? &*u_ : nullptr; }
    const HermitianMetricField& metric() const { return *metric_; }
    const std::vector<double>& flat_symbol() const { return symbol_; }
    /// Mean coefficient in front of the flat symbol, for preconditioning.
    double symbol_scale() const { return symbol_scale_; }

private:
    std::shared_ptr<const HermitianMetricField> metric_;
    std::optional<ScalarField> u_;
    std::vector<double> symbol_;
    double symbol_scale_ = 1.0;
};

/// Constant-curvature problem data: the instance, the target constant, and a
/// reference metric exp(2 f0/n) eta within the class (f0 = 0 by default).
/// The normalization constraint is always taken against the instance measure:
/// integral of exp(2 (f + f0)/n) d mu_eta = 1.
struct ChernYamabeProblem {
    InstancePtr instance;
    double lambda = 0.0;
    ScalarField reference_potential; // f0
    ScalarField reference_s;         // curvature data at the reference
    std::shared_ptr<const HermitianMetricField> reference_metric;
    std::shared_ptr<const ChernOperator> op;
    bool reference_is_eta = true;

    int n() const { return instance->n(); }
    const ChartPtr& chart() const { return instance->chart(); }
};

ChernYamabeProblem make_problem(InstancePtr instance, std::optional<double> lambda = std::nullopt);

/// New problem whose reference is exp(2 df/n) times the current reference.
ChernYamabeProblem shift_reference(const ChernYamabeProblem& p, const ScalarField& df);

/// integral of exp(2 (f + f0)/n) d mu_eta.
double constraint_integral(const ChernYamabeProblem& p, const ScalarField& f);

struct PathPoint {
    double t = 0.0;
    double residual = 0.0;
    double sup_f = 0.0;
    double functional = 0.0;
    double margin_low = 0.0;
    double margin_high = 0.0;
};

struct SolverSolution {
    ScalarField f; // potential against the problem reference, normalized
    double lambda = 0.0;
    double lambda_requested = 0.0;
    double normalization_shift = 0.0;
    double residual_sup = 0.0;
    double constraint_defect = 0.0;
    int newton_iterations = 0;
    int linear_iterations = 0;
    bool bounds_violated = false;
    double bound_margin = 0.0; // most negative envelope margin seen on the path
    std::vector<PathPoint> trace;
};

/// Uniform-in-t envelope for exp(2f/n) along the continuity path, from the
/// maximum-principle estimates at interior extrema.
struct AprioriBounds {
    double lower = 0.0;
    double upper = 0.0;
};
AprioriBounds apriori_bounds(const ScalarField& s, double lambda);

struct NewtonOptions {
    double newton_tol = 1e-9;
    int max_newton = 50;
    double linear_tol = 1e-10;
    int max_linear = 600;
    int max_halvings = 8;
};

/// Linear solve for zero Gauduchon degree; the result satisfies the
/// normalization constraint exactly after the constant shift.
SolverSolution solve_zero_degree(const ChernYamabeProblem& p, const NewtonOptions& opt = {},
                                 const ScalarField* initial_guess = nullptr);

/// Conformal potential f with curvature data exp(-2(f+f0)/n) * degree,
/// pointwise negative; requires degree < 0. Fixed point: a reference already
/// of that form returns f = 0.
ScalarField negativize(const ChernYamabeProblem& p, const NewtonOptions& opt = {});

std::vector<double> uniform_schedule(int steps);

SolverSolution continuity_solve(const ChernYamabeProblem& p, const std::vector<double>& schedule,
                                const NewtonOptions& opt = {});

/// Newton directly at t = 1 (used by the uniqueness probe); returns the
/// unnormalized solution.
SolverSolution direct_solve(const ChernYamabeProblem& p, const ScalarField& initial, double lambda,
                            const NewtonOptions& opt = {});

enum class FlowTermination { Converged, Horizon, BlowUp, StepInstability };
std::string to_string(FlowTermination t);

struct FlowOptions {
    double dt = 0.01;
    double horizon = 50.0;
    double residual_tol = 1e-8;
    double blowup_cap = 50.0;
    int max_snapshots = 200;
    /// When set, per-step envelope margins for exp(2f/n) are recorded.
    std::optional<AprioriBounds> envelope;
};

struct FlowTrace {
    std::vector<double> times;
    std::vector<double> residuals;
    std::vector<double> sup_f;
    std::vector<double> functional; // parallel to times when recorded
    /// F(f) - (n/2) lambda int exp(2f/n): the quantity the flow is the
    /// gradient flow of over a balanced base; non-increasing stepwise for
    /// the semi-implicit scheme. Equals F when lambda = 0.
    std::vector<double> lyapunov;
    bool functional_recorded = false;
    std::vector<double> margin_low;  // empty without an envelope
    std::vector<double> margin_high;
    std::vector<std::pair<double, ScalarField>> snapshots;
    ScalarField final_f;
    FlowTermination termination = FlowTermination::Horizon;
};

/// Semi-implicit integration of df/dt = -Lap f - S + lambda exp(2f/n): the
/// flat-symbol part is treated implicitly, the rest explicitly.
FlowTrace run_flow(const ChernYamabeProblem& p, const ScalarField& f0, const FlowOptions& opt = {});

/// Energy (1/2) int |df|^2 + int S f over the instance measure. Meaningful as
/// the variational energy only over a balanced base; callers should check
/// instance.balanced.
double functional_F(const ConformalInstance& inst, const ScalarField& f);

/// Scale-invariant normalization F(f)/n - (lambda/2) log int exp(2f/n);
/// invariant under f -> f + const when lambda equals the degree, with
/// Euler-Lagrange equation Lap f + S = lambda exp(2f/n) / int exp(2f/n).
double functional_Fstar(const ConformalInstance& inst, const ScalarField& f, double lambda);

/// Euler-Lagrange residual Lap f + S - lambda exp(2f/n) at the instance.
ScalarField el_gradient(const ConformalInstance& inst, const ScalarField& f, double lambda);

/// int h (dg, theta) - int g (dh, theta) over the measure of the metric;
/// vanishes for all pairs iff theta = 0 (balanced).
double alpha_form_asymmetry(const HermitianMetricField& metric, const OneFormField& theta,
                            const ScalarField& h, const ScalarField& g);

struct UniquenessReport {
    int seeds = 0;
    double max_pairwise_diff = 0.0; // between normalized seeded solutions
    double offset_observed = 0.0;   // constant gap between the two-lambda runs
    double offset_expected = 0.0;   // (n/2) log(lambda2/lambda1)
    double offset_error = 0.0;
    bool consistent = false;
};

/// Re-solves at t = 1 from seeded random starts and with a doubled constant,
/// checking the uniqueness and offset relations.
UniquenessReport uniqueness_probe(const ChernYamabeProblem& p, int seeds, const NewtonOptions& opt = {},
                                  double tol = 1e-6);

struct SmallDataResult {
    bool converged = false;
    std::optional<SolverSolution> solution;
    int newton_iterations = 0;
    double final_residual = 0.0;
};

/// Newton from u = 0 on the constrained system with lambda(u) substituted
/// from the constraint; divergence is a data outcome, not an error.
SmallDataResult small_data_solve(const ChernYamabeProblem& p, const NewtonOptions& opt = {});

} // namespace chy

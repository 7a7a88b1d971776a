#include "chy/solver.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "chy/fft.hpp"
#include "chy/util.hpp"

namespace chy {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

double plain_mean(const ScalarField& f) {
    return pairwise_sum(f.v) / static_cast<double>(f.size());
}

ScalarField exp_2_over_n(const ScalarField& f, int n) { return exp_field(f, 2.0 / n); }

/// Direct frequency-space solve of (scale * flat symbol) x = b with the zero
/// mode pinned to zero. Caller guarantees consistency of b.
ScalarField flat_poisson_solve(const ScalarField& b) {
    std::vector<double> inv = flat_chern_symbol(*b.chart);
    for (double& s : inv) s = (s > 0.0) ? 1.0 / s : 0.0;
    return apply_flat_symbol(b, inv);
}

/// Kernel element of the adjoint at the reference exp(2 f0/n) eta relative to
/// the instance's Gauduchon representative: v0 = exp(-2 (n-1) f0 / n).
ScalarField adjoint_kernel_at_reference(const ChernYamabeProblem& p) {
    return exp_field(p.reference_potential, -2.0 * (p.n() - 1) / p.n());
}

/// Solves the singular linear system Lap_ref f = rhs (kernel = constants)
/// after projecting rhs onto the discrete image; the returned field has zero
/// plain mean.
ScalarField solve_linear_chern(const ChernYamabeProblem& p, ScalarField rhs, const NewtonOptions& opt,
                               int& linear_iterations) {
    const ScalarField& w = p.reference_metric->weights();
    ScalarField v0 = adjoint_kernel_at_reference(p);
    ScalarField v0rhs(p.chart()), v0v0(p.chart());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        v0rhs.v[i] = v0.v[i] * rhs.v[i];
        v0v0.v[i] = v0.v[i] * v0.v[i];
    }
    const double coef = integrate_weighted(v0rhs, w) / integrate_weighted(v0v0, w);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs.v[i] -= coef * v0.v[i];

    if (p.op->conformally_flat()) {
        const ScalarField& u = *p.op->conformal_factor();
        ScalarField b = rhs;
        for (std::size_t i = 0; i < b.size(); ++i) b.v[i] *= u.v[i];
        linear_iterations += 1;
        return flat_poisson_solve(b);
    }

    auto apply = [&](const ScalarField& x) {
        ScalarField out = p.op->apply(x);
        const double pm = plain_mean(x);
        for (double& y : out.v) y += pm;
        return out;
    };
    auto symbol = inverse_shifted_symbol(*p.chart(), p.op->symbol_scale(), 1.0);
    auto precond = [&](const ScalarField& r) { return apply_flat_symbol(r, symbol); };
    ScalarField x(p.chart());
    KrylovResult kr = bicgstab(apply, precond, rhs, x, opt.linear_tol, opt.max_linear);
    linear_iterations += kr.iterations;
    if (!kr.converged) throw ConvergenceError("linear Chern solve did not converge");
    const double pm = plain_mean(x);
    shift_field(x, -pm);
    return x;
}

/// Newton linear step (Lap + m) v = rhs with m > 0 pointwise.
ScalarField solve_newton_linear(const ChernYamabeProblem& p, const ScalarField& m, const ScalarField& rhs,
                                const NewtonOptions& opt, int& linear_iterations) {
    if (p.op->conformally_flat()) {
        // Symmetrize by the conformal factor: flat v + (u m) v = u rhs is SPD.
        const ScalarField& u = *p.op->conformal_factor();
        ScalarField um(p.chart()), b(p.chart());
        for (std::size_t i = 0; i < um.size(); ++i) {
            um.v[i] = u.v[i] * m.v[i];
            b.v[i] = u.v[i] * rhs.v[i];
        }
        const auto& sym = p.op->flat_symbol();
        auto apply = [&](const ScalarField& x) {
            ScalarField out = apply_flat_symbol(x, sym);
            for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += um.v[i] * x.v[i];
            return out;
        };
        auto inv = inverse_shifted_symbol(*p.chart(), 1.0, plain_mean(um));
        auto precond = [&](const ScalarField& r) { return apply_flat_symbol(r, inv); };
        ScalarField x(p.chart());
        KrylovResult kr = conjugate_gradient(apply, precond, b, x, opt.linear_tol, opt.max_linear);
        linear_iterations += kr.iterations;
        if (!kr.converged) throw ConvergenceError("Newton linear solve (CG) did not converge");
        return x;
    }
    auto apply = [&](const ScalarField& x) {
        ScalarField out = p.op->apply(x);
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += m.v[i] * x.v[i];
        return out;
    };
    auto inv = inverse_shifted_symbol(*p.chart(), p.op->symbol_scale(), plain_mean(m));
    auto precond = [&](const ScalarField& r) { return apply_flat_symbol(r, inv); };
    ScalarField x(p.chart());
    KrylovResult kr = bicgstab(apply, precond, rhs, x, opt.linear_tol, opt.max_linear);
    linear_iterations += kr.iterations;
    if (!kr.converged) throw ConvergenceError("Newton linear solve (BiCGStab) did not converge");
    return x;
}

struct NewtonOutcome {
    bool success = false;
    int newton_iterations = 0;
    int linear_iterations = 0;
    double residual = 0.0;
};

/// Residual of the continuity family at parameter t:
///   ChYa(t, f) = Lap f + t S - lambda exp(2f/n) + lambda (1 - t).
ScalarField continuity_residual(const ChernYamabeProblem& p, double lambda, double t, const ScalarField& f) {
    ScalarField r = p.op->apply(f);
    ScalarField e2f = exp_2_over_n(f, p.n());
    for (std::size_t i = 0; i < r.size(); ++i)
        r.v[i] += t * p.reference_s.v[i] - lambda * e2f.v[i] + lambda * (1.0 - t);
    return r;
}

NewtonOutcome newton_at_t(const ChernYamabeProblem& p, double lambda, double t, ScalarField& f,
                          const NewtonOptions& opt) {
    NewtonOutcome out;
    ScalarField r = continuity_residual(p, lambda, t, f);
    double rn = sup_norm(r.v);
    for (int it = 0; it < opt.max_newton; ++it) {
        if (rn < opt.newton_tol) {
            out.success = true;
            out.residual = rn;
            return out;
        }
        ScalarField e2f = exp_2_over_n(f, p.n());
        ScalarField m(p.chart());
        const double factor = -lambda * 2.0 / p.n();
        for (std::size_t i = 0; i < m.size(); ++i) m.v[i] = factor * e2f.v[i];
        ScalarField rhs = r;
        for (double& x : rhs.v) x = -x;
        ScalarField v = solve_newton_linear(p, m, rhs, opt, out.linear_iterations);
        ++out.newton_iterations;

        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            ScalarField f_try = f;
            for (std::size_t i = 0; i < f_try.size(); ++i) f_try.v[i] += alpha * v.v[i];
            ScalarField r_try = continuity_residual(p, lambda, t, f_try);
            double rn_try = sup_norm(r_try.v);
            if (rn_try < rn || rn_try < opt.newton_tol) {
                f = std::move(f_try);
                r = std::move(r_try);
                rn = rn_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.residual = rn;
            return out;
        }
    }
    out.success = rn < opt.newton_tol;
    out.residual = rn;
    return out;
}

/// Seeded band-limited random field for probe initial guesses.
ScalarField random_probe_field(const ChartPtr& chart, double amplitude, std::uint64_t seed) {
    Rng rng(seed);
    ScalarField f(chart);
    const int d = chart->real_dim();
    const int modes = 4;
    for (int mcount = 0; mcount < modes; ++mcount) {
        std::vector<int> k(static_cast<std::size_t>(d));
        bool nonzero = false;
        for (int a = 0; a < d; ++a) {
            k[static_cast<std::size_t>(a)] = rng.uniform_int(5) - 2;
            nonzero = nonzero || k[static_cast<std::size_t>(a)] != 0;
        }
        if (!nonzero) k[0] = 1;
        const double amp = amplitude * rng.uniform(0.2, 1.0) / modes;
        const double phase = rng.uniform(0.0, kTwoPi);
        for (std::size_t pt = 0; pt < f.size(); ++pt) {
            double arg = phase;
            for (int a = 0; a < d; ++a)
                arg += kTwoPi * k[static_cast<std::size_t>(a)] * chart->coordinate(pt, a) / chart->period(a);
            f.v[pt] += amp * std::cos(arg);
        }
    }
    f.band_limit = 2;
    return f;
}

void apply_normalization(const ChernYamabeProblem& p, SolverSolution& sol) {
    const double integral = constraint_integral(p, sol.f);
    const double c = -0.5 * p.n() * std::log(integral);
    shift_field(sol.f, c);
    sol.normalization_shift = c;
    sol.lambda = sol.lambda_requested * std::exp(-2.0 * c / p.n());
    sol.constraint_defect = std::abs(constraint_integral(p, sol.f) - 1.0);
}

double solution_residual(const ChernYamabeProblem& p, const ScalarField& f, double lambda) {
    ScalarField r = p.op->apply(f);
    ScalarField e2f = exp_2_over_n(f, p.n());
    for (std::size_t i = 0; i < r.size(); ++i) r.v[i] += p.reference_s.v[i] - lambda * e2f.v[i];
    return sup_norm(r.v);
}

} // namespace

ChernOperator::ChernOperator(std::shared_ptr<const HermitianMetricField> metric)
    : metric_(std::move(metric)) {
    if (metric_->conformal_factor()) u_ = *metric_->conformal_factor();
    symbol_ = flat_chern_symbol(*metric_->chart());
    double tr = 0.0;
    const int n = metric_->n();
    for (std::size_t p = 0; p < metric_->points(); ++p)
        for (int i = 0; i < n; ++i) tr += metric_->inv_entry(p, i, i).real();
    symbol_scale_ = tr / (static_cast<double>(metric_->points()) * n);
}

ScalarField ChernOperator::apply(const ScalarField& f) const {
    if (u_) {
        ScalarField out = apply_flat_symbol(f, symbol_);
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] /= u_->v[i];
        return out;
    }
    return chern_laplacian(*metric_, f);
}

ChernYamabeProblem make_problem(InstancePtr instance, std::optional<double> lambda) {
    const double target = lambda.value_or(instance->degree);
    if (!instance->synthetic && lambda) {
        // The eventual constant has the sign of the degree; synthetic
        // instances are exempt (their reports carry the flag).
        const double g = instance->degree;
        const bool mismatch = (g < -1e-10 && target >= 0.0) || (g > 1e-10 && target <= 0.0) ||
                              (std::abs(g) <= 1e-10 && std::abs(target) > 1e-6);
        if (mismatch) throw SignError("make_problem: lambda sign incompatible with the class degree");
    }
    ChernYamabeProblem p{instance,
                         target,
                         ScalarField(instance->chart()),
                         instance->scalar_curvature,
                         std::shared_ptr<const HermitianMetricField>(instance, &instance->eta),
                         nullptr,
                         true};
    p.op = std::make_shared<const ChernOperator>(p.reference_metric);
    return p;
}

ChernYamabeProblem shift_reference(const ChernYamabeProblem& p, const ScalarField& df) {
    ChernYamabeProblem out = p;
    out.reference_potential = add_fields(p.reference_potential, df);
    ScalarField lap = p.op->apply(df);
    ScalarField s(p.chart());
    const int n = p.n();
    for (std::size_t i = 0; i < s.size(); ++i)
        s.v[i] = std::exp(-2.0 * df.v[i] / n) * (p.reference_s.v[i] + lap.v[i]);
    out.reference_s = std::move(s);
    out.reference_metric =
        std::make_shared<const HermitianMetricField>(conformal_rescale(*p.reference_metric, df));
    out.op = std::make_shared<const ChernOperator>(out.reference_metric);
    out.reference_is_eta = false;
    return out;
}

double constraint_integral(const ChernYamabeProblem& p, const ScalarField& f) {
    ScalarField total = add_fields(f, p.reference_potential);
    ScalarField e = exp_2_over_n(total, p.n());
    return integrate(e, p.instance->eta);
}

AprioriBounds apriori_bounds(const ScalarField& s, double lambda) {
    if (!(lambda < 0.0)) throw SignError("apriori_bounds: lambda must be negative");
    double smax = s.v[0];
    for (double x : s.v) smax = std::max(smax, x);
    if (!(smax < 0.0)) throw SignError("apriori_bounds: S must be pointwise negative");
    AprioriBounds b;
    b.upper = (smax + lambda) / lambda;
    b.lower = std::min(-smax, -lambda) / (-lambda);
    if (!(b.lower > 0.0) || b.lower > b.upper) throw InternalError("apriori_bounds: inconsistent envelope");
    return b;
}

SolverSolution solve_zero_degree(const ChernYamabeProblem& p, const NewtonOptions& opt,
                                 const ScalarField* initial_guess) {
    const double gamma = p.instance->degree;
    if (std::abs(gamma) > 1e-6)
        throw DegreeMismatchError("solve_zero_degree: instance degree is not zero; source not in the image");

    ScalarField rhs(p.chart());
    ScalarField em = exp_field(p.reference_potential, -2.0 / p.n());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs.v[i] = gamma * em.v[i] - p.reference_s.v[i];

    SolverSolution sol;
    sol.f = ScalarField(p.chart());
    sol.lambda_requested = gamma;
    if (initial_guess) sol.f = *initial_guess;
    ScalarField correction = rhs;
    {
        // Residual correction so a nonzero initial guess still lands on the
        // same solution (used by the two-run agreement check).
        ScalarField lap = p.op->apply(sol.f);
        for (std::size_t i = 0; i < correction.size(); ++i) correction.v[i] -= lap.v[i];
    }
    ScalarField delta = solve_linear_chern(p, correction, opt, sol.linear_iterations);
    for (std::size_t i = 0; i < sol.f.size(); ++i) sol.f.v[i] += delta.v[i];
    apply_normalization(p, sol);
    sol.residual_sup = solution_residual(p, sol.f, sol.lambda);
    return sol;
}

ScalarField negativize(const ChernYamabeProblem& p, const NewtonOptions& opt) {
    const double gamma = p.instance->degree;
    // Degrees at round-off scale count as zero, not negative.
    if (!(gamma < -1e-10)) throw SignError("negativize: requires negative Gauduchon degree");

    ScalarField rhs(p.chart());
    ScalarField em = exp_field(p.reference_potential, -2.0 / p.n());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs.v[i] = gamma * em.v[i] - p.reference_s.v[i];
    int linear_iterations = 0;
    ScalarField f = solve_linear_chern(p, rhs, opt, linear_iterations);
    const double c = -0.5 * p.n() * std::log(constraint_integral(p, f));
    shift_field(f, c);
    return f;
}

std::vector<double> uniform_schedule(int steps) {
    if (steps < 1) throw ConfigError("uniform_schedule: need at least one step");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / steps;
    return t;
}

SolverSolution continuity_solve(const ChernYamabeProblem& p, const std::vector<double>& schedule,
                                const NewtonOptions& opt) {
    if (!(p.lambda < 0.0)) throw SignError("continuity_solve: lambda must be negative");
    double smax = p.reference_s.v[0];
    for (double x : p.reference_s.v) smax = std::max(smax, x);
    if (!(smax < 0.0))
        throw SignError("continuity_solve: S must be pointwise negative (run negativize first)");
    if (schedule.size() < 2 || schedule.front() != 0.0 || schedule.back() != 1.0)
        throw ConfigError("continuity_solve: schedule must run from 0 to 1");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1])) throw ConfigError("continuity_solve: schedule must increase");

    const AprioriBounds bounds = apriori_bounds(p.reference_s, p.lambda);
    SolverSolution sol;
    sol.f = ScalarField(p.chart());
    sol.lambda_requested = p.lambda;
    sol.bound_margin = std::numeric_limits<double>::infinity();

    std::deque<double> targets(schedule.begin() + 1, schedule.end());
    double t_good = 0.0;
    int halvings = 0;
    const bool record_functional = p.instance->balanced;

    while (!targets.empty()) {
        const double t_next = targets.front();
        ScalarField f_try = sol.f;
        NewtonOutcome nw = newton_at_t(p, p.lambda, t_next, f_try, opt);
        sol.newton_iterations += nw.newton_iterations;
        sol.linear_iterations += nw.linear_iterations;
        if (!nw.success) {
            if (++halvings > opt.max_halvings)
                throw ConvergenceError("continuity_solve: Newton stalled; last good t = " + std::to_string(t_good));
            targets.push_front(0.5 * (t_good + t_next));
            continue;
        }
        halvings = 0;
        sol.f = std::move(f_try);
        t_good = t_next;
        targets.pop_front();

        ScalarField e2f = exp_2_over_n(sol.f, p.n());
        double emin = e2f.v[0], emax = e2f.v[0];
        for (double x : e2f.v) {
            emin = std::min(emin, x);
            emax = std::max(emax, x);
        }
        const double margin_low = emin - bounds.lower;
        const double margin_high = bounds.upper - emax;
        sol.bound_margin = std::min({sol.bound_margin, margin_low, margin_high});
        if (margin_low < -1e-8 || margin_high < -1e-8) sol.bounds_violated = true;

        PathPoint pt;
        pt.t = t_next;
        pt.residual = nw.residual;
        pt.sup_f = sup_norm(sol.f.v);
        pt.margin_low = margin_low;
        pt.margin_high = margin_high;
        pt.functional = record_functional
                            ? functional_F(*p.instance, add_fields(sol.f, p.reference_potential))
                            : std::numeric_limits<double>::quiet_NaN();
        sol.trace.push_back(pt);
    }

    apply_normalization(p, sol);
    sol.residual_sup = solution_residual(p, sol.f, sol.lambda);
    return sol;
}

SolverSolution direct_solve(const ChernYamabeProblem& p, const ScalarField& initial, double lambda,
                            const NewtonOptions& opt) {
    if (!(lambda < 0.0)) throw SignError("direct_solve: lambda must be negative");
    SolverSolution sol;
    sol.f = initial;
    sol.lambda = lambda;
    sol.lambda_requested = lambda;
    NewtonOutcome nw = newton_at_t(p, lambda, 1.0, sol.f, opt);
    sol.newton_iterations = nw.newton_iterations;
    sol.linear_iterations = nw.linear_iterations;
    if (!nw.success) throw ConvergenceError("direct_solve: Newton did not converge");
    sol.residual_sup = nw.residual;
    sol.constraint_defect = std::abs(constraint_integral(p, sol.f) - 1.0);
    return sol;
}

std::string to_string(FlowTermination t) {
    switch (t) {
        case FlowTermination::Converged: return "converged";
        case FlowTermination::Horizon: return "horizon";
        case FlowTermination::BlowUp: return "blow_up";
        case FlowTermination::StepInstability: return "step_instability";
    }
    return "unknown";
}

FlowTrace run_flow(const ChernYamabeProblem& p, const ScalarField& f0, const FlowOptions& opt) {
    const int n = p.n();
    const double lambda = p.lambda;
    FlowTrace trace;
    trace.functional_recorded = p.instance->balanced && p.reference_is_eta;

    // Implicit coefficient: the largest pointwise scale of the operator so the
    // explicit remainder is never stiff.
    double alpha = p.op->symbol_scale();
    const ScalarField* u = p.op->conformal_factor();
    bool exactly_flat = false;
    if (u) {
        double umin = u->v[0], umax = u->v[0];
        for (double x : u->v) {
            umin = std::min(umin, x);
            umax = std::max(umax, x);
        }
        alpha = 1.0 / umin;
        exactly_flat = (umax - umin) < 1e-14 * std::abs(umax);
    }
    const auto& sym = p.op->flat_symbol();
    std::vector<double> stepper(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) stepper[i] = 1.0 / (1.0 + opt.dt * alpha * sym[i]);

    ScalarField f = f0;
    const int max_steps = static_cast<int>(std::ceil(opt.horizon / opt.dt));
    const int stride = std::max(1, max_steps / std::max(1, opt.max_snapshots));
    double t = 0.0;
    trace.termination = FlowTermination::Horizon;

    for (int step = 0; step <= max_steps; ++step) {
        ScalarField e2f = exp_2_over_n(f, n);
        ScalarField lap(p.chart()), lf(p.chart());
        if (u) {
            ScalarField flat = apply_flat_symbol(f, sym);
            for (std::size_t i = 0; i < flat.size(); ++i) {
                lap.v[i] = flat.v[i] / u->v[i];
                lf.v[i] = alpha * flat.v[i];
            }
        } else {
            lap = p.op->apply(f);
            lf = scaled_field(apply_flat_symbol(f, sym), alpha);
        }
        ScalarField resid(p.chart());
        for (std::size_t i = 0; i < resid.size(); ++i)
            resid.v[i] = lap.v[i] + p.reference_s.v[i] - lambda * e2f.v[i];
        const double rn = sup_norm(resid.v);
        const double fn = sup_norm(f.v);

        trace.times.push_back(t);
        trace.residuals.push_back(rn);
        trace.sup_f.push_back(fn);
        if (trace.functional_recorded) {
            const double energy = functional_F(*p.instance, f);
            trace.functional.push_back(energy);
            trace.lyapunov.push_back(energy - 0.5 * n * lambda * integrate(e2f, p.instance->eta));
        }
        if (opt.envelope) {
            double emin = e2f.v[0], emax = e2f.v[0];
            for (double x : e2f.v) {
                emin = std::min(emin, x);
                emax = std::max(emax, x);
            }
            trace.margin_low.push_back(emin - opt.envelope->lower);
            trace.margin_high.push_back(opt.envelope->upper - emax);
        }
        if (step % stride == 0) trace.snapshots.emplace_back(t, f);

        if (!std::isfinite(fn)) {
            trace.termination = FlowTermination::StepInstability;
            break;
        }
        if (fn > opt.blowup_cap) {
            trace.termination = FlowTermination::BlowUp;
            break;
        }
        if (!std::isfinite(rn)) {
            trace.termination = FlowTermination::StepInstability;
            break;
        }
        if (rn < opt.residual_tol) {
            trace.termination = FlowTermination::Converged;
            break;
        }
        if (step == max_steps) break;

        // g = f + dt * (L f - Lap f - S + lambda e^{2f/n}); f_next solves
        // (1 + dt L) f_next = g in frequency space.
        ScalarField g(p.chart());
        if (exactly_flat) {
            for (std::size_t i = 0; i < g.size(); ++i)
                g.v[i] = f.v[i] + opt.dt * (-p.reference_s.v[i] + lambda * e2f.v[i]);
        } else {
            for (std::size_t i = 0; i < g.size(); ++i)
                g.v[i] = f.v[i] + opt.dt * (lf.v[i] - lap.v[i] - p.reference_s.v[i] + lambda * e2f.v[i]);
        }
        f = apply_flat_symbol(g, stepper);
        t += opt.dt;
    }
    trace.final_f = std::move(f);
    return trace;
}

double functional_F(const ConformalInstance& inst, const ScalarField& f) {
    OneFormField df = differential(f);
    ScalarField grad2 = pairing_1forms(df, df, inst.eta);
    ScalarField sf(inst.chart());
    for (std::size_t i = 0; i < sf.size(); ++i) sf.v[i] = inst.scalar_curvature.v[i] * f.v[i];
    return 0.5 * integrate(grad2, inst.eta) + integrate(sf, inst.eta);
}

double functional_Fstar(const ConformalInstance& inst, const ScalarField& f, double lambda) {
    const int n = inst.n();
    ScalarField e = exp_field(f, 2.0 / n);
    const double mass = integrate(e, inst.eta);
    return functional_F(inst, f) / n - 0.5 * lambda * std::log(mass);
}

ScalarField el_gradient(const ConformalInstance& inst, const ScalarField& f, double lambda) {
    ScalarField out = chern_laplacian(inst.eta, f);
    ScalarField e = exp_field(f, 2.0 / inst.n());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.v[i] += inst.scalar_curvature.v[i] - lambda * e.v[i];
    return out;
}

double alpha_form_asymmetry(const HermitianMetricField& metric, const OneFormField& theta,
                            const ScalarField& h, const ScalarField& g) {
    OneFormField dg = differential(g);
    OneFormField dh = differential(h);
    ScalarField pg = pairing_1forms(dg, theta, metric);
    ScalarField ph = pairing_1forms(dh, theta, metric);
    ScalarField a(h.chart), b(h.chart);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.v[i] = h.v[i] * pg.v[i];
        b.v[i] = g.v[i] * ph.v[i];
    }
    return integrate(a, metric) - integrate(b, metric);
}

UniquenessReport uniqueness_probe(const ChernYamabeProblem& p, int seeds, const NewtonOptions& opt,
                                  double tol) {
    if (seeds < 1) throw ConfigError("uniqueness_probe: need at least one seed");
    UniquenessReport rep;
    rep.seeds = seeds;
    SolverSolution base = direct_solve(p, ScalarField(p.chart()), p.lambda, opt);
    std::vector<ScalarField> sols;
    sols.push_back(base.f);
    for (int s = 1; s < seeds; ++s) {
        ScalarField init = random_probe_field(p.chart(), 0.3, 1000 + static_cast<std::uint64_t>(s));
        sols.push_back(direct_solve(p, init, p.lambda, opt).f);
    }
    for (std::size_t i = 0; i < sols.size(); ++i)
        for (std::size_t j = i + 1; j < sols.size(); ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < sols[i].size(); ++k)
                d = std::max(d, std::abs(sols[i].v[k] - sols[j].v[k]));
            rep.max_pairwise_diff = std::max(rep.max_pairwise_diff, d);
        }

    const double lambda2 = 2.0 * p.lambda;
    SolverSolution shifted = direct_solve(p, ScalarField(p.chart()), lambda2, opt);
    rep.offset_expected = 0.5 * p.n() * std::log(lambda2 / p.lambda);
    ScalarField diff = base.f;
    for (std::size_t i = 0; i < diff.size(); ++i) diff.v[i] -= shifted.f.v[i];
    rep.offset_observed = plain_mean(diff);
    double err = 0.0;
    for (double x : diff.v) err = std::max(err, std::abs(x - rep.offset_expected));
    rep.offset_error = err;
    rep.consistent = rep.max_pairwise_diff < tol;
    return rep;
}

SmallDataResult small_data_solve(const ChernYamabeProblem& p, const NewtonOptions& opt) {
    if (!p.reference_is_eta)
        throw ConfigError("small_data_solve: expects the instance's Gauduchon reference");
    const int n = p.n();
    const ScalarField& s = p.reference_s;
    const double int_s = p.instance->degree;
    const HermitianMetricField& eta = p.instance->eta;

    SmallDataResult result;
    ScalarField uf(p.chart());
    double rn = 0.0;
    for (int it = 0; it <= opt.max_newton; ++it) {
        ScalarField e = exp_2_over_n(uf, n);
        const double inte = integrate(e, eta);
        const double lambda = int_s / inte;
        ScalarField g = p.op->apply(uf);
        for (std::size_t i = 0; i < g.size(); ++i) g.v[i] += s.v[i] - lambda * e.v[i];
        rn = sup_norm(g.v);
        result.final_residual = rn;
        if (rn < opt.newton_tol) {
            result.converged = true;
            break;
        }
        if (it == opt.max_newton) break;

        // DG v = Lap v - lambda (2/n) e v + lambda (2/n) (int e v / int e) e,
        // plus a plain-mean deflation of the constant kernel direction.
        const double factor = lambda * 2.0 / n;
        auto dg_apply = [&](const ScalarField& v) {
            ScalarField out = p.op->apply(v);
            ScalarField ev(p.chart());
            for (std::size_t i = 0; i < ev.size(); ++i) ev.v[i] = e.v[i] * v.v[i];
            const double int_ev = integrate(ev, eta);
            const double pm = plain_mean(v);
            for (std::size_t i = 0; i < out.size(); ++i)
                out.v[i] += -factor * e.v[i] * v.v[i] + factor * (int_ev / inte) * e.v[i] + pm;
            return out;
        };
        auto inv = inverse_shifted_symbol(*p.chart(), p.op->symbol_scale(), 1.0);
        auto precond = [&](const ScalarField& r) { return apply_flat_symbol(r, inv); };
        ScalarField rhs = g;
        for (double& x : rhs.v) x = -x;
        ScalarField v(p.chart());
        KrylovResult kr = bicgstab(dg_apply, precond, rhs, v, opt.linear_tol, opt.max_linear);
        if (!kr.converged) break;
        ++result.newton_iterations;

        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            ScalarField u_try = uf;
            for (std::size_t i = 0; i < u_try.size(); ++i) u_try.v[i] += alpha * v.v[i];
            ScalarField e_try = exp_2_over_n(u_try, n);
            const double inte_try = integrate(e_try, eta);
            const double lambda_try = int_s / inte_try;
            ScalarField g_try = p.op->apply(u_try);
            for (std::size_t i = 0; i < g_try.size(); ++i)
                g_try.v[i] += s.v[i] - lambda_try * e_try.v[i];
            if (sup_norm(g_try.v) < rn) {
                uf = std::move(u_try);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }

    if (!result.converged) return result;

    SolverSolution sol;
    sol.f = std::move(uf);
    ScalarField e = exp_2_over_n(sol.f, n);
    sol.lambda_requested = int_s / integrate(e, eta);
    sol.newton_iterations = result.newton_iterations;
    apply_normalization(p, sol);
    sol.residual_sup = solution_residual(p, sol.f, sol.lambda);
    result.solution = std::move(sol);
    return result;
}

} // namespace chy

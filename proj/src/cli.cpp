#include "chy/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <memory>

#include "chy/bifurcation.hpp"
#include "chy/fft.hpp"
#include "chy/models.hpp"
#include "chy/solver.hpp"

namespace chy::cli {

namespace {

constexpr double kPi = 3.14159265358979323846264338;

// ---------------------------------------------------------------------------
// Schema validation
// ---------------------------------------------------------------------------

void require_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(where + "." + it.key() + ": unknown key");
    }
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

int int_or(const json& j, const std::string& key, int fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return j.at(key).get<int>();
}

std::string string_or(const json& j, const std::string& key, const std::string& fallback,
                      const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return j.at(key).get<std::string>();
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json make_result(double value, double tolerance, const std::string& module) {
    json j;
    j["value"] = value;
    j["tolerance"] = tolerance;
    j["module"] = module;
    return j;
}

// ---------------------------------------------------------------------------
// Recipe parsing
// ---------------------------------------------------------------------------

std::vector<TrigMode> parse_modes(const json& arr, int real_dim, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + ": expected an array of modes");
    std::vector<TrigMode> modes;
    int idx = 0;
    for (const auto& m : arr) {
        const std::string at = where + "[" + std::to_string(idx++) + "]";
        require_keys(m, {"amplitude", "wave", "phase"}, at);
        TrigMode mode;
        mode.amplitude = number_or(m, "amplitude", 0.0, at);
        mode.phase = number_or(m, "phase", 0.0, at);
        if (!m.contains("wave") || !m.at("wave").is_array())
            throw ConfigError(at + ".wave: expected an integer array");
        for (const auto& k : m.at("wave")) mode.wave.push_back(k.get<int>());
        if (mode.wave.size() != static_cast<std::size_t>(real_dim))
            throw ConfigError(at + ".wave: expected 2n entries");
        modes.push_back(std::move(mode));
    }
    return modes;
}

json modes_to_json(const std::vector<TrigMode>& modes) {
    json arr = json::array();
    for (const auto& m : modes) {
        json j;
        j["amplitude"] = m.amplitude;
        j["wave"] = m.wave;
        j["phase"] = m.phase;
        arr.push_back(j);
    }
    return arr;
}

struct HopfParams {
    int samples = 100;
    double spacing = 1e-2;
    std::string mode = "symbolic";
    int quadrature_nodes = 64;
};

struct ParsedRecipe {
    MetricRecipe recipe;
    HopfParams hopf;
    bool is_hopf = false;

    /// Largest declared integer frequency of the recipe's trig data.
    int band_limit() const {
        int k = 0;
        for (const auto& m : recipe.potential_modes)
            for (int w : m.wave) k = std::max(k, std::abs(w));
        for (const auto& m : recipe.s_modes)
            for (int w : m.wave) k = std::max(k, std::abs(w));
        if (recipe.kind == RecipeKind::RandomPerturbed) k = std::max(k, 2);
        return k;
    }
};

ParsedRecipe parse_recipe(const json& j, std::uint64_t default_seed, json& effective) {
    require_keys(j,
                 {"kind", "chart", "flat_scale", "potential_modes", "amplitude", "seed", "s", "sign",
                  "small_bound", "samples", "spacing", "mode", "quadrature_nodes"},
                 "config.recipe");
    ParsedRecipe out;
    MetricRecipe& r = out.recipe;
    const std::string kind = string_or(j, "kind", "", "config.recipe");
    if (kind == "flat")
        r.kind = RecipeKind::Flat;
    else if (kind == "conformal-flat")
        r.kind = RecipeKind::ConformalFlat;
    else if (kind == "random-perturbed")
        r.kind = RecipeKind::RandomPerturbed;
    else if (kind == "hopf-chart") {
        r.kind = RecipeKind::HopfChart;
        out.is_hopf = true;
    } else if (kind == "synthetic-s")
        r.kind = RecipeKind::SyntheticS;
    else
        throw ConfigError("config.recipe.kind: expected one of flat | conformal-flat | random-perturbed | "
                          "hopf-chart | synthetic-s");

    if (j.contains("chart")) {
        require_keys(j.at("chart"), {"complex_dim", "resolution", "periods"}, "config.recipe.chart");
        r.complex_dim = int_or(j.at("chart"), "complex_dim", 2, "config.recipe.chart");
        r.resolution = int_or(j.at("chart"), "resolution", 16, "config.recipe.chart");
        if (j.at("chart").contains("periods"))
            r.periods = j.at("chart").at("periods").get<std::vector<double>>();
    }
    r.flat_scale = number_or(j, "flat_scale", 1.0, "config.recipe");
    if (j.contains("potential_modes"))
        r.potential_modes = parse_modes(j.at("potential_modes"), 2 * r.complex_dim, "config.recipe.potential_modes");
    r.perturbation_amplitude = number_or(j, "amplitude", 0.25, "config.recipe");
    r.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : default_seed;
    if (j.contains("s")) {
        require_keys(j.at("s"), {"constant", "modes"}, "config.recipe.s");
        r.s_constant = number_or(j.at("s"), "constant", 0.0, "config.recipe.s");
        if (j.at("s").contains("modes"))
            r.s_modes = parse_modes(j.at("s").at("modes"), 2 * r.complex_dim, "config.recipe.s.modes");
    }
    r.sign_declaration = string_or(j, "sign", "negative", "config.recipe");
    r.small_sup_bound = number_or(j, "small_bound", 0.01, "config.recipe");
    out.hopf.samples = int_or(j, "samples", 100, "config.recipe");
    out.hopf.spacing = number_or(j, "spacing", 1e-2, "config.recipe");
    out.hopf.mode = string_or(j, "mode", "symbolic", "config.recipe");
    out.hopf.quadrature_nodes = int_or(j, "quadrature_nodes", 64, "config.recipe");
    if (out.hopf.mode != "symbolic" && out.hopf.mode != "finite-difference")
        throw ConfigError("config.recipe.mode: expected symbolic | finite-difference");

    // Materialized defaults.
    effective["kind"] = kind;
    effective["chart"] = {{"complex_dim", r.complex_dim}, {"resolution", r.resolution}};
    if (!r.periods.empty()) effective["chart"]["periods"] = r.periods;
    switch (r.kind) {
        case RecipeKind::Flat:
            effective["flat_scale"] = r.flat_scale;
            break;
        case RecipeKind::ConformalFlat:
            effective["potential_modes"] = modes_to_json(r.potential_modes);
            break;
        case RecipeKind::RandomPerturbed:
            effective["amplitude"] = r.perturbation_amplitude;
            effective["seed"] = r.seed;
            break;
        case RecipeKind::SyntheticS:
            effective["s"] = {{"constant", r.s_constant}, {"modes", modes_to_json(r.s_modes)}};
            effective["sign"] = r.sign_declaration;
            effective["small_bound"] = r.small_sup_bound;
            break;
        case RecipeKind::HopfChart:
            effective["samples"] = out.hopf.samples;
            effective["spacing"] = out.hopf.spacing;
            effective["mode"] = out.hopf.mode;
            effective["quadrature_nodes"] = out.hopf.quadrature_nodes;
            break;
    }
    return out;
}

NewtonOptions parse_solver_options(const json& j, json& effective) {
    require_keys(j,
                 {"method", "lambda", "schedule_steps", "uniqueness_seeds", "newton_tol", "linear_tol",
                  "max_newton", "max_linear", "max_halvings"},
                 "config.solver");
    NewtonOptions opt;
    opt.newton_tol = number_or(j, "newton_tol", 1e-9, "config.solver");
    opt.linear_tol = number_or(j, "linear_tol", 1e-10, "config.solver");
    opt.max_newton = int_or(j, "max_newton", 50, "config.solver");
    opt.max_linear = int_or(j, "max_linear", 600, "config.solver");
    opt.max_halvings = int_or(j, "max_halvings", 8, "config.solver");
    effective["newton_tol"] = opt.newton_tol;
    effective["linear_tol"] = opt.linear_tol;
    effective["max_newton"] = opt.max_newton;
    effective["max_linear"] = opt.max_linear;
    effective["max_halvings"] = opt.max_halvings;
    return opt;
}

struct ReportContext {
    json report;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;

    void check(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void run_curvature(const ParsedRecipe& pr, std::uint64_t seed, ReportContext& ctx) {
    json& res = ctx.report["results"];
    if (pr.is_hopf) {
        const bool symbolic = pr.hopf.mode == "symbolic";
        HopfCheckReport rep = hopf_scalar_check(pr.hopf.samples, seed, symbolic, pr.hopf.spacing);
        res["hopf_scalar_mean"] = make_result(rep.mean, symbolic ? 1e-8 : 1e-5, "models");
        res["hopf_scalar_max_deviation"] = make_result(rep.max_deviation, symbolic ? 1e-8 : 1e-5, "models");
        res["hopf_scalar_min"] = make_result(rep.min_value, 0.0, "models");
        res["hopf_scalar_max"] = make_result(rep.max_value, 0.0, "models");
        ctx.check(rep.max_deviation < (symbolic ? 1e-8 : 1e-5), "hopf scalar curvature not constant");
        ctx.check(rep.mean > 0.0, "hopf scalar curvature not positive");
        return;
    }
    HermitianMetricField metric = make_metric(pr.recipe);
    ScalarField s = chern_scalar(metric);
    double smin = s.v[0], smax = s.v[0];
    for (double x : s.v) {
        smin = std::min(smin, x);
        smax = std::max(smax, x);
    }
    res["scalar_curvature_min"] = make_result(smin, 0.0, "chern_ops");
    res["scalar_curvature_max"] = make_result(smax, 0.0, "chern_ops");
    res["scalar_curvature_mean"] = make_result(mean_value(s, metric), 1e-8, "chern_ops");
    OneFormField theta = lee_form(metric);
    double theta_sup = 0.0;
    for (const auto& c : theta.comp) theta_sup = std::max(theta_sup, sup_norm(c));
    res["lee_form_sup"] = make_result(theta_sup, 0.0, "chern_ops");
    GauduchonResidual gr = gauduchon_residual(metric);
    res["gauduchon_residual"] = make_result(gr.gauduchon, 1e-8, "chern_ops");
    res["balanced_residual"] = make_result(gr.balanced, 1e-8, "chern_ops");
    res["volume"] = make_result(metric.total_volume(), 0.0, "geometry_core");
}

void run_degree(const ParsedRecipe& pr, ReportContext& ctx, const GauduchonOptions& gopt,
                const std::optional<std::filesystem::path>& instance_out) {
    json& res = ctx.report["results"];
    if (pr.is_hopf) {
        const double vol = hopf_chart_volume(pr.hopf.quadrature_nodes);
        const double degree = hopf_degree_quadrature(pr.hopf.quadrature_nodes);
        res["chart_volume"] = make_result(vol, 1e-10, "models");
        res["degree"] = make_result(degree, 1e-6, "models");
        ctx.check(degree > 0.0, "hopf degree not positive");
        return;
    }
    ConformalInstance inst = make_instance(pr.recipe, gopt);
    res["degree"] = make_result(inst.degree, 1e-8, "chern_ops");
    res["balanced"] = inst.balanced;
    res["synthetic"] = inst.synthetic;
    res["projection"] = report_from_gauduchon(inst.projection);
    res["unit_volume_defect"] = make_result(std::abs(inst.eta.total_volume() - 1.0), 1e-8, "chern_ops");
    ctx.check(std::abs(inst.eta.total_volume() - 1.0) < 1e-8, "gauduchon representative volume not 1");
    if (!inst.synthetic) ctx.check(inst.projection.gauduchon_residual < 1e-8, "gauduchon residual above tolerance");
    if (instance_out) write_json_file(*instance_out, instance_to_json(inst));
}

std::vector<std::vector<double>> path_rows(const std::vector<PathPoint>& trace) {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.size());
    for (const auto& p : trace)
        rows.push_back({p.t, p.residual, p.sup_f, p.functional, p.margin_low, p.margin_high});
    return rows;
}

void run_solve(const InstancePtr& inst, const json& solver_j, ReportContext& ctx,
               const std::filesystem::path& out_dir, const json& out_j) {
    json& res = ctx.report["results"];
    json& eff = ctx.report["config_effective"]["solver"];
    NewtonOptions nopt = parse_solver_options(solver_j, eff);
    const int schedule_steps = int_or(solver_j, "schedule_steps", 20, "config.solver");
    eff["schedule_steps"] = schedule_steps;
    std::string method = string_or(solver_j, "method", "auto", "config.solver");
    eff["method"] = method;
    const int uniqueness_seeds = int_or(solver_j, "uniqueness_seeds", 0, "config.solver");
    eff["uniqueness_seeds"] = uniqueness_seeds;
    std::optional<double> lambda_override;
    if (solver_j.contains("lambda") && !solver_j.at("lambda").is_null())
        lambda_override = solver_j.at("lambda").get<double>();
    eff["lambda"] = lambda_override ? json(*lambda_override) : json(nullptr);

    ctx.report["provenance"]["synthetic"] = inst->synthetic;
    res["degree"] = make_result(inst->degree, 1e-8, "chern_ops");

    if (method == "auto") {
        if (inst->degree < -1e-8)
            method = "continuity";
        else if (inst->degree > 1e-8)
            method = "small-data";
        else
            method = "zero";
    }
    res["method"] = method;

    ChernYamabeProblem problem = make_problem(inst, lambda_override);
    std::optional<SolverSolution> solution;
    if (method == "zero") {
        solution = solve_zero_degree(problem, nopt);
    } else if (method == "continuity") {
        double smax = problem.reference_s.v[0];
        for (double x : problem.reference_s.v) smax = std::max(smax, x);
        if (!(smax < 0.0)) {
            ScalarField f0 = negativize(problem, nopt);
            problem = shift_reference(problem, f0);
            res["negativized"] = true;
        } else {
            res["negativized"] = false;
        }
        solution = continuity_solve(problem, uniform_schedule(schedule_steps), nopt);
        AprioriBounds b = apriori_bounds(problem.reference_s, problem.lambda);
        res["envelope_lower"] = make_result(b.lower, 0.0, "solver");
        res["envelope_upper"] = make_result(b.upper, 0.0, "solver");
        res["bound_margin"] = make_result(solution->bound_margin, 1e-8, "solver");
        res["bounds_violated"] = solution->bounds_violated;
        ctx.check(!solution->bounds_violated, "continuity iterate left the a priori envelope");
        if (uniqueness_seeds > 1) {
            UniquenessReport rep = uniqueness_probe(problem, uniqueness_seeds, nopt);
            res["uniqueness_max_pairwise"] = make_result(rep.max_pairwise_diff, 1e-6, "solver");
            res["uniqueness_offset_error"] = make_result(rep.offset_error, 1e-8, "solver");
            ctx.check(rep.consistent, "uniqueness probe found disagreeing solutions (solver bug)");
            ctx.check(rep.offset_error < 1e-8, "lambda-offset relation violated");
        }
    } else if (method == "small-data") {
        SmallDataResult sd = small_data_solve(problem, nopt);
        res["small_data_converged"] = sd.converged;
        res["small_data_newton_iterations"] = sd.newton_iterations;
        if (!sd.converged) {
            // A data outcome, not an error: the theorem only covers small data.
            res["small_data_final_residual"] = make_result(sd.final_residual, nopt.newton_tol, "solver");
            ctx.report["status"] = "no_convergence";
            return;
        }
        solution = std::move(sd.solution);
    } else {
        throw ConfigError("config.solver.method: expected auto | zero | continuity | small-data");
    }

    res["lambda"] = make_result(solution->lambda, 1e-6, "solver");
    res["lambda_requested"] = make_result(solution->lambda_requested, 0.0, "solver");
    res["normalization_shift"] = make_result(solution->normalization_shift, 0.0, "solver");
    res["residual_sup"] = make_result(solution->residual_sup, 1e-6, "solver");
    res["constraint_defect"] = make_result(solution->constraint_defect, 1e-8, "solver");
    res["newton_iterations"] = solution->newton_iterations;
    res["linear_iterations"] = solution->linear_iterations;
    res["sup_f"] = make_result(sup_norm(solution->f.v), 0.0, "solver");
    ctx.check(solution->residual_sup < 1e-6, "solver residual above tolerance");
    ctx.check(solution->constraint_defect < 1e-8, "normalization constraint defect above tolerance");

    // Curvature of the solved metric through the instance data.
    ScalarField total = add_fields(solution->f, problem.reference_potential);
    ScalarField s_out = instance_scalar_curvature(*inst, total);
    double dev = 0.0;
    for (double x : s_out.v) dev = std::max(dev, std::abs(x - solution->lambda));
    res["output_curvature_deviation"] = make_result(dev, 1e-6, "solver");

    const std::string trace_name = string_or(out_j, "trace", "", "config.out");
    if (!trace_name.empty() && !solution->trace.empty())
        write_csv(out_dir / trace_name, {"t", "residual", "sup_f", "functional", "margin_low", "margin_high"},
                  path_rows(solution->trace));
    const std::string solution_name = string_or(out_j, "solution", "", "config.out");
    if (!solution_name.empty()) {
        json sol_json = field_to_json(total, "scalar");
        sol_json["description"] = "conformal potential against the unit-volume Gauduchon representative";
        write_json_file(out_dir / solution_name, sol_json);
    }
}

void run_flow_command(const InstancePtr& inst, const json& flow_j, ReportContext& ctx,
                      const std::filesystem::path& out_dir, const json& out_j) {
    json& res = ctx.report["results"];
    json& eff = ctx.report["config_effective"]["flow"];
    require_keys(flow_j, {"dt", "horizon", "residual_tol", "blowup_cap", "lambda"}, "config.flow");
    FlowOptions fopt;
    fopt.dt = number_or(flow_j, "dt", 0.01, "config.flow");
    fopt.horizon = number_or(flow_j, "horizon", 50.0, "config.flow");
    fopt.residual_tol = number_or(flow_j, "residual_tol", 1e-8, "config.flow");
    fopt.blowup_cap = number_or(flow_j, "blowup_cap", 50.0, "config.flow");
    eff["dt"] = fopt.dt;
    eff["horizon"] = fopt.horizon;
    eff["residual_tol"] = fopt.residual_tol;
    eff["blowup_cap"] = fopt.blowup_cap;
    std::optional<double> lambda_override;
    if (flow_j.contains("lambda") && !flow_j.at("lambda").is_null())
        lambda_override = flow_j.at("lambda").get<double>();
    eff["lambda"] = lambda_override ? json(*lambda_override) : json(nullptr);

    ctx.report["provenance"]["synthetic"] = inst->synthetic;
    ChernYamabeProblem problem = make_problem(inst, lambda_override);

    double smax = problem.reference_s.v[0];
    for (double x : problem.reference_s.v) smax = std::max(smax, x);
    if (problem.lambda < 0.0 && smax < 0.0) fopt.envelope = apriori_bounds(problem.reference_s, problem.lambda);

    FlowTrace trace = run_flow(problem, ScalarField(problem.chart()), fopt);
    res["termination"] = to_string(trace.termination);
    res["steps"] = static_cast<int>(trace.times.size());
    res["final_residual"] = make_result(trace.residuals.empty() ? 0.0 : trace.residuals.back(),
                                        fopt.residual_tol, "solver");
    res["final_sup_f"] = make_result(trace.sup_f.empty() ? 0.0 : trace.sup_f.back(), 0.0, "solver");
    res["functional_recorded"] = trace.functional_recorded;
    if (trace.functional_recorded && !trace.functional.empty()) {
        double max_increase = 0.0, lyap_increase = 0.0;
        for (std::size_t i = 1; i < trace.functional.size(); ++i) {
            max_increase = std::max(max_increase, trace.functional[i] - trace.functional[i - 1]);
            lyap_increase = std::max(lyap_increase, trace.lyapunov[i] - trace.lyapunov[i - 1]);
        }
        res["functional_final"] = make_result(trace.functional.back(), 0.0, "solver");
        res["functional_max_increase"] = make_result(max_increase, 0.0, "solver");
        res["lyapunov_max_increase"] = make_result(lyap_increase, 1e-10, "solver");
        ctx.check(lyap_increase <= 1e-10, "flow energy dissipation violated");
    }
    if (trace.termination == FlowTermination::StepInstability) {
        ctx.warnings.push_back("step instability detected; try a smaller dt");
        ctx.check(false, "flow step instability");
    }

    const std::string trace_name = string_or(out_j, "trace", "", "config.out");
    if (!trace_name.empty()) {
        std::vector<std::vector<double>> rows;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < trace.times.size(); ++i)
            rows.push_back({trace.times[i], trace.residuals[i], trace.sup_f[i],
                            trace.functional_recorded ? trace.functional[i] : nan,
                            trace.margin_low.empty() ? nan : trace.margin_low[i],
                            trace.margin_high.empty() ? nan : trace.margin_high[i]});
        write_csv(out_dir / trace_name, {"time", "residual", "sup_f", "functional", "margin_low", "margin_high"},
                  rows);
    }
}

json family_to_json(const KernelFamily& f) {
    json j;
    j["j"] = {f.j1, f.j2, f.j3};
    j["eigenvalues"] = {f.mu1, f.mu2, f.mu3};
    j["dimension"] = f.dimension;
    j["multiplier"] = f.multiplier.str();
    j["multiplier_value"] = f.multiplier.to_double();
    j["prefactor"] = f.prefactor;
    j["beyond_quarter_formula"] = f.beyond_quarter_formula;
    return j;
}

void run_bifurcate(const json& bif_j, ReportContext& ctx, const std::filesystem::path& out_dir,
                   const json& out_j) {
    json& res = ctx.report["results"];
    json& eff = ctx.report["config_effective"]["bifurcate"];
    const int jmax = int_or(bif_j, "jmax", 10, "config.bifurcate");
    if (jmax < 3) throw ConfigError("config.bifurcate.jmax: truncation must be >= 3");
    eff["jmax"] = jmax;

    auto parse_rational = [&](const json& v, const std::string& where) {
        bool inexact = false;
        Rational r;
        if (v.is_string())
            r = Rational::parse(v.get<std::string>(), 1000000, &inexact);
        else if (v.is_number())
            r = Rational::from_decimal(v.get<double>(), 1000000, &inexact);
        else
            throw ConfigError(where + ": expected a rational string like \"1/4\" or a number");
        if (inexact)
            ctx.warnings.push_back(where + ": decimal converted to the nearest rational " + r.str() +
                                   " (denominator cap 1000000)");
        return r;
    };

    if (bif_j.contains("interval")) {
        const json& iv = bif_j.at("interval");
        if (!iv.is_array() || iv.size() != 2) throw ConfigError("config.bifurcate.interval: expected [lo, hi]");
        Rational lo = parse_rational(iv.at(0), "config.bifurcate.interval[0]");
        Rational hi = parse_rational(iv.at(1), "config.bifurcate.interval[1]");
        eff["interval"] = {lo.str(), hi.str()};
        auto instants = bifurcation_instants(lo, hi, jmax);
        json arr = json::array();
        for (const auto& inst : instants) {
            json j;
            j["lambda"] = inst.lambda.str();
            j["lambda_value"] = inst.lambda.to_double();
            j["total_dimension"] = inst.total_dimension;
            j["odd"] = inst.odd;
            j["transversal"] = inst.transversal;
            j["bifurcation_instant"] = inst.is_bifurcation_instant();
            j["families"] = json::array();
            for (const auto& f : inst.families) j["families"].push_back(family_to_json(f));
            arr.push_back(j);
        }
        res["instants"] = arr;
        res["count"] = static_cast<int>(instants.size());
        // Plot data: kernel dimension against lambda.
        const std::string trace_name = string_or(out_j, "trace", "", "config.out");
        if (!trace_name.empty()) {
            std::vector<std::vector<double>> rows;
            for (const auto& inst : instants)
                rows.push_back({inst.lambda.to_double(), static_cast<double>(inst.total_dimension),
                                inst.odd ? 1.0 : 0.0, inst.transversal ? 1.0 : 0.0});
            write_csv(out_dir / trace_name, {"lambda", "total_dimension", "odd", "transversal"}, rows);
        }
        return;
    }

    if (!bif_j.contains("lambda"))
        throw ConfigError("config.bifurcate: need either lambda or interval");
    Rational lambda = parse_rational(bif_j.at("lambda"), "config.bifurcate.lambda");
    eff["lambda"] = lambda.str();
    ProductSpectralModel model{lambda, jmax};
    res["volume"] = make_result(model.volume(), 0.0, "bifurcation");
    res["curvature"] = make_result(model.curvature(), 0.0, "bifurcation");
    auto fams = transversality_multipliers(lambda, jmax);
    res["families"] = json::array();
    for (const auto& f : fams) res["families"].push_back(family_to_json(f));
    const long long total = total_kernel_dimension(fams);
    res["total_dimension"] = total;
    res["odd"] = (total % 2) == 1;
}

void run_verify(const json& verify_j, std::uint64_t seed, ReportContext& ctx) {
    json& res = ctx.report["results"];
    json& eff = ctx.report["config_effective"]["verify"];
    const int resolution = int_or(verify_j, "resolution", 16, "config.verify");
    const int samples = int_or(verify_j, "samples", 100, "config.verify");
    eff["resolution"] = resolution;
    eff["samples"] = samples;

    ChartPtr chart = make_chart(2, resolution);

    // Flat torus: zero curvature, zero Lee form, zero degree.
    {
        HermitianMetricField flat = HermitianMetricField::identity(chart);
        double sup = sup_norm(chern_scalar(flat).v);
        res["flat_scalar_sup"] = make_result(sup, 1e-10, "chern_ops");
        ctx.check(sup < 1e-10, "flat metric has nonzero curvature");
    }

    // Operator identity on a seeded random metric.
    {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.resolution = resolution;
        r.seed = seed;
        HermitianMetricField metric = make_metric(r);
        OneFormField theta = lee_form(metric);
        Rng rng(seed + 17);
        double worst = 0.0;
        for (int k = 0; k < 2; ++k) {
            ScalarField f = random_band_limited(chart, 0.7, 2, rng);
            ScalarField a = chern_laplacian(metric, f);
            ScalarField b = chern_laplacian_via_lee(metric, f, theta);
            double err = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a.v[i] - b.v[i]));
            worst = std::max(worst, err / (1.0 + c2_norm(f)));
        }
        res["lee_identity_error"] = make_result(worst, 1e-6, "chern_ops");
        ctx.check(worst < 1e-6, "Chern Laplacian route disagreement");
    }

    // Conformal change law on the same metric.
    {
        MetricRecipe r;
        r.kind = RecipeKind::RandomPerturbed;
        r.resolution = resolution;
        r.seed = seed + 1;
        HermitianMetricField metric = make_metric(r);
        Rng rng(seed + 29);
        ScalarField f = random_band_limited(chart, 0.4, 2, rng);
        ScalarField lhs = chern_scalar(conformal_rescale(metric, f));
        ScalarField s0 = chern_scalar(metric);
        ScalarField lap = chern_laplacian(metric, f);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            double rhs = std::exp(-2.0 * f.v[i] / 2) * (s0.v[i] + lap.v[i]);
            err = std::max(err, std::abs(lhs.v[i] - rhs));
            scale = std::max(scale, std::abs(rhs));
        }
        res["conformal_law_rel_error"] = make_result(err / std::max(scale, 1e-30), 1e-8, "chern_ops");
        ctx.check(err / std::max(scale, 1e-30) < 1e-8, "conformal change law violated");
    }

    // Hopf chart: constant positive curvature and the chart degree.
    {
        HopfCheckReport rep = hopf_scalar_check(samples, seed, true);
        res["hopf_constant"] = make_result(rep.mean, 1e-8, "models");
        res["hopf_max_deviation"] = make_result(rep.max_deviation, 1e-8, "models");
        ctx.check(rep.max_deviation < 1e-8, "hopf curvature not constant");
        ctx.check(std::abs(rep.mean - 2.0) < 1e-8, "hopf constant differs from 2");
        const double degree = hopf_degree_quadrature();
        const double expected = 2.0 * std::sqrt(2.0 * kPi * kPi * std::log(2.0));
        res["hopf_degree"] = make_result(degree, 1e-6, "models");
        ctx.check(std::abs(degree - expected) / expected < 1e-6, "hopf degree quadrature off");
    }

    // Exact kernel at lambda = 1/4.
    {
        auto fams = kernel_families(Rational(1, 4), 5);
        const long long total = total_kernel_dimension(fams);
        res["kernel_quarter_dimension"] = make_result(static_cast<double>(total), 0.0, "bifurcation");
        ctx.check(total == 33, "kernel dimension at lambda = 1/4 is not 33");
        bool mult_ok = fams.size() == 3;
        for (const auto& f : fams) {
            long long expect = (f.j3 == 1) ? -8 : 16;
            if (!(f.multiplier == Rational(expect))) mult_ok = false;
        }
        res["kernel_quarter_multipliers_ok"] = mult_ok;
        ctx.check(mult_ok, "transversality multipliers at lambda = 1/4 differ from 16, 16, -8");
    }

    // Zero-degree solve over a conformally flat class.
    {
        MetricRecipe r;
        r.kind = RecipeKind::ConformalFlat;
        r.resolution = resolution;
        TrigMode m;
        m.amplitude = 0.3;
        m.wave = {1, 0, 0, 0};
        r.potential_modes = {m};
        auto inst = std::make_shared<const ConformalInstance>(make_instance(r));
        SolverSolution sol = solve_zero_degree(make_problem(inst));
        ScalarField s_out = chern_scalar(conformal_rescale(inst->eta, sol.f));
        const double sup = sup_norm(s_out.v);
        res["zero_degree_output_scalar_sup"] = make_result(sup, 1e-7, "solver");
        ctx.check(sup < 1e-7, "zero-degree solve left nonconstant curvature");
    }

    // Product-degree sign threshold.
    {
        ProductDegreeSign pd = product_degree_sign(2.0, 2, 1.0);
        const double expected = 4.0 * kPi / 2.0;
        res["product_threshold"] = make_result(pd.threshold, 0.0, "models");
        ctx.check(pd.threshold == expected, "product degree threshold mismatch");
        ctx.check(pd.sign == ((2.0 * 1.0 + 4.0 * kPi * (1.0 - 2) > 0) ? 1 : -1), "product degree sign mismatch");
    }
}

} // namespace

int run(const RunOptions& options) {
    ReportContext ctx;
    std::filesystem::path out_dir(options.out_dir);
    std::string report_name = "report.json";
    try {
        json cfg = options.config_path ? read_json_file(*options.config_path) : json::object();
        require_keys(cfg,
                     {"command", "seed", "recipe", "instance_path", "solver", "flow", "bifurcate",
                      "verify", "out"},
                     "config");
        std::string command = options.command;
        const std::string cfg_command = string_or(cfg, "command", "", "config");
        if (command.empty()) command = cfg_command;
        if (!cfg_command.empty() && command != cfg_command)
            throw ConfigError("config.command: does not match the CLI subcommand");
        if (command.empty()) throw ConfigError("config.command: missing");

        std::uint64_t seed = 1;
        if (cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
        if (options.seed) seed = *options.seed;

        json out_j = cfg.value("out", json::object());
        require_keys(out_j, {"report", "trace", "solution", "instance"}, "config.out");
        report_name = string_or(out_j, "report", "report.json", "config.out");

        ctx.report["command"] = command;
        ctx.report["timestamp"] = timestamp_now();
        ctx.report["seed"] = seed;
        ctx.report["config_effective"] = json::object();
        ctx.report["config_effective"]["command"] = command;
        ctx.report["config_effective"]["seed"] = seed;
        ctx.report["config_effective"]["out"] = {{"report", report_name}};
        if (out_j.contains("trace")) ctx.report["config_effective"]["out"]["trace"] = out_j.at("trace");
        if (out_j.contains("solution")) ctx.report["config_effective"]["out"]["solution"] = out_j.at("solution");
        if (out_j.contains("instance")) ctx.report["config_effective"]["out"]["instance"] = out_j.at("instance");
        ctx.report["provenance"] = json::object();
        ctx.report["results"] = json::object();

        auto parse_recipe_required = [&]() {
            if (!cfg.contains("recipe")) throw ConfigError("config.recipe: missing");
            ctx.report["config_effective"]["recipe"] = json::object();
            ParsedRecipe pr = parse_recipe(cfg.at("recipe"), seed, ctx.report["config_effective"]["recipe"]);
            if (!pr.is_hopf && 2 * pr.band_limit() >= pr.recipe.resolution)
                ctx.warnings.push_back("band_limit: recipe data reaches the Nyquist frequency of resolution " +
                                       std::to_string(pr.recipe.resolution));
            return pr;
        };

        // Instance documents written by the degree command can replace the
        // recipe for the solver-facing commands.
        auto load_instance = [&]() -> std::shared_ptr<const ConformalInstance> {
            if (cfg.contains("instance_path") && cfg.contains("recipe"))
                throw ConfigError("config: give either recipe or instance_path, not both");
            if (cfg.contains("instance_path")) {
                const std::string path = string_or(cfg, "instance_path", "", "config");
                ctx.report["config_effective"]["instance_path"] = path;
                return std::make_shared<const ConformalInstance>(instance_from_json(read_json_file(path)));
            }
            return nullptr;
        };

        if (command == "curvature") {
            run_curvature(parse_recipe_required(), seed, ctx);
        } else if (command == "degree") {
            std::optional<std::filesystem::path> instance_out;
            const std::string name = string_or(out_j, "instance", "", "config.out");
            if (!name.empty()) instance_out = out_dir / name;
            run_degree(parse_recipe_required(), ctx, GauduchonOptions{}, instance_out);
        } else if (command == "solve") {
            InstancePtr inst = load_instance();
            if (!inst)
                inst = std::make_shared<const ConformalInstance>(make_instance(parse_recipe_required().recipe));
            run_solve(inst, cfg.value("solver", json::object()), ctx, out_dir, out_j);
        } else if (command == "flow") {
            InstancePtr inst = load_instance();
            if (!inst)
                inst = std::make_shared<const ConformalInstance>(make_instance(parse_recipe_required().recipe));
            run_flow_command(inst, cfg.value("flow", json::object()), ctx, out_dir, out_j);
        } else if (command == "bifurcate") {
            json bif = cfg.value("bifurcate", json::object());
            require_keys(bif, {"lambda", "interval", "jmax"}, "config.bifurcate");
            if (options.lambda_text) bif["lambda"] = *options.lambda_text;
            if (options.interval_text) bif["interval"] = {options.interval_text->first, options.interval_text->second};
            if (options.jmax) bif["jmax"] = *options.jmax;
            run_bifurcate(bif, ctx, out_dir, out_j);
        } else if (command == "verify") {
            json vj = cfg.value("verify", json::object());
            require_keys(vj, {"resolution", "samples"}, "config.verify");
            run_verify(vj, seed, ctx);
        } else {
            throw ConfigError("config.command: expected curvature | degree | solve | flow | bifurcate | verify");
        }
    } catch (const ConfigError& e) {
        json err;
        err["command"] = options.command;
        err["status"] = "config_error";
        err["reason"] = e.what();
        write_json_file(std::filesystem::path(options.out_dir) / report_name, err);
        return kExitConfig;
    } catch (const Error& e) {
        ctx.report["status"] = "numerical_failure";
        ctx.report["reason"] = e.what();
        write_json_file(out_dir / report_name, ctx.report);
        return kExitTolerance;
    }

    if (!ctx.warnings.empty()) ctx.report["warnings"] = ctx.warnings;
    if (!ctx.failures.empty()) {
        ctx.report["status"] = "tolerance_failure";
        ctx.report["failures"] = ctx.failures;
    } else if (!ctx.report.contains("status")) {
        ctx.report["status"] = "ok";
    }
    write_json_file(out_dir / report_name, ctx.report);
    return ctx.failures.empty() ? kExitOk : kExitTolerance;
}

} // namespace chy::cli

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "chy/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Chern geometry on model complex manifolds: curvature operators, Gauduchon "
                 "projection, constant-curvature solvers, flow, and exact bifurcation counts"};
    app.require_subcommand(1);

    chy::cli::RunOptions options;
    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* c = cmd->add_option("--config", config_path, "JSON configuration file");
        if (config_required) c->required();
        cmd->add_option("--out", out_dir, "output directory for reports and traces");
        cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_given = true; });
    };

    add_common(app.add_subcommand("curvature", "Chern scalar curvature and Lee form of a recipe metric"), true);
    add_common(app.add_subcommand("degree", "Gauduchon projection and degree of a conformal class"), true);
    add_common(app.add_subcommand("solve", "constant Chern scalar curvature solve"), true);
    add_common(app.add_subcommand("flow", "Chern-Yamabe flow integration"), true);

    auto* bif = app.add_subcommand("bifurcate", "kernel families and bifurcation instants of the product model");
    add_common(bif, false);
    std::string lambda_text;
    std::vector<std::string> interval_text;
    int jmax = 0;
    bif->add_option("--lambda", lambda_text, "parameter value, e.g. 1/4 or 0.25");
    bif->add_option("--interval", interval_text, "scan interval, two rationals")->expected(2);
    bif->add_option("--jmax", jmax, "per-factor truncation level");

    add_common(app.add_subcommand("verify", "run the analytic example suite"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : chy::cli::kExitConfig;
    }

    options.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) options.config_path = config_path;
    options.out_dir = out_dir;
    if (seed_given) options.seed = seed;
    if (!lambda_text.empty()) options.lambda_text = lambda_text;
    if (interval_text.size() == 2) options.interval_text = std::make_pair(interval_text[0], interval_text[1]);
    if (jmax > 0) options.jmax = jmax;

    try {
        return chy::cli::run(options);
    } catch (const chy::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return chy::cli::kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return chy::cli::kExitTolerance;
    }
}

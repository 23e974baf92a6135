#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "proxycal/commands.hpp"
#include "proxycal/version.hpp"

namespace cli = proxycal::cli;

int main(int argc, char** argv) {
    CLI::App app{"proxycal: calibrate proxy-metric confidence intervals from historical aggregates"};
    app.set_version_flag("--version", proxycal::kVersion);
    app.require_subcommand(1);

    // fit
    std::string fit_history;
    std::string fit_out;
    auto* fit = app.add_subcommand("fit", "Fit the residual-bias model to a history file");
    fit->add_option("history", fit_history, "History CSV")->required();
    fit->add_option("--out", fit_out, "Model file to write")->required();

    // adjust
    cli::AdjustArgs adjust_args;
    std::string adj_model, adj_history, adj_target, adj_out;
    double adj_beta = 0.0, adj_h = 0.0;
    auto* adjust = app.add_subcommand("adjust", "Adjusted intervals for target proxy estimates");
    adjust->add_option("--target", adj_target, "Target CSV")->required();
    adjust->add_option("--model", adj_model, "Fitted model file (plugin only)");
    adjust->add_option("--history", adj_history, "History CSV");
    adjust->add_option("--alpha", adjust_args.alpha, "Miscoverage level")->capture_default_str();
    adjust->add_option("--method", adjust_args.method, "plugin | bootstrap | contextual")
        ->capture_default_str();
    adjust->add_option("--draws", adjust_args.draws, "Bootstrap draws")->capture_default_str();
    adjust->add_option("--seed", adjust_args.seed, "Bootstrap seed")->capture_default_str();
    auto* beta_opt = adjust->add_option("--beta", adj_beta, "Context similarity bandwidth");
    auto* h_opt = adjust->add_option("--time-bandwidth", adj_h, "Time-decay bandwidth");
    adjust->add_option("--out", adj_out, "Output CSV");

    // loo
    cli::LooArgs loo_args;
    std::string loo_history, loo_out, loo_domains;
    auto* loo = app.add_subcommand("loo", "Leave-one-domain-out overlap diagnostics");
    loo->add_option("history", loo_history, "History CSV")->required();
    loo->add_option("--alpha", loo_args.alphas, "Comma-separated alpha values")
        ->delimiter(',')
        ->capture_default_str();
    loo->add_option("--method", loo_args.methods, "Comma-separated: unadjusted,plugin,bootstrap")
        ->delimiter(',')
        ->capture_default_str();
    loo->add_option("--draws", loo_args.draws, "Bootstrap draws")->capture_default_str();
    loo->add_option("--seed", loo_args.seed, "Bootstrap seed")->capture_default_str();
    loo->add_option("--out", loo_out, "Output CSV");
    loo->add_option("--domains-out", loo_domains, "Per-domain interval CSV");

    // simulate
    cli::SimulateArgs sim_args;
    std::string sim_config, sim_out, sim_reps;
    auto* simulate = app.add_subcommand("simulate", "Run the coverage simulation study");
    simulate->add_option("config", sim_config, "key = value config file")->required();
    simulate->add_option("--out", sim_out, "Aggregated results CSV")->required();
    simulate->add_option("--threads", sim_args.threads, "Worker threads")->capture_default_str();
    simulate->add_option("--replicates-out", sim_reps, "Per-replicate interval CSV");

    // tune-context
    cli::TuneArgs tune_args;
    std::string tune_history, tune_grid, tune_out;
    auto* tune = app.add_subcommand("tune-context", "Choose the context bandwidth by likelihood");
    tune->add_option("history", tune_history, "History CSV with context_* columns")->required();
    tune->add_option("--target-context", tune_args.target_context, "Comma-separated context")
        ->delimiter(',')
        ->required();
    tune->add_option("--beta-grid", tune_grid, "a,b,c or log:lo:hi:points");
    tune->add_option("--out", tune_out, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitInput;
    }

    if (*fit) return cli::cmd_fit(fit_history, fit_out, std::cout, std::cerr);

    if (*adjust) {
        adjust_args.target = adj_target;
        if (!adj_model.empty()) adjust_args.model = adj_model;
        if (!adj_history.empty()) adjust_args.history = adj_history;
        if (!adj_out.empty()) adjust_args.out = adj_out;
        if (beta_opt->count()) adjust_args.beta = adj_beta;
        if (h_opt->count()) adjust_args.time_bandwidth = adj_h;
        return cli::cmd_adjust(adjust_args, std::cout, std::cerr);
    }

    if (*loo) {
        loo_args.history = loo_history;
        if (!loo_out.empty()) loo_args.out = loo_out;
        if (!loo_domains.empty()) loo_args.domains_out = loo_domains;
        return cli::cmd_loo(loo_args, std::cout, std::cerr);
    }

    if (*simulate) {
        sim_args.config = sim_config;
        sim_args.out = sim_out;
        if (!sim_reps.empty()) sim_args.replicates_out = sim_reps;
        return cli::cmd_simulate(sim_args, std::cout, std::cerr);
    }

    if (*tune) {
        tune_args.history = tune_history;
        if (!tune_out.empty()) tune_args.out = tune_out;
        if (!tune_grid.empty()) {
            try {
                tune_args.beta_grid = cli::parse_beta_grid(tune_grid);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return cli::kExitInput;
            }
        }
        return cli::cmd_tune_context(tune_args, std::cout, std::cerr);
    }
    return cli::kExitInternal;
}

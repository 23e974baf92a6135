#include "proxycal/commands.hpp"

#include <iostream>
#include <sstream>

#include "proxycal/contextual.hpp"
#include "proxycal/diagnostics.hpp"
#include "proxycal/io.hpp"
#include "proxycal/random.hpp"
#include "proxycal/simulation.hpp"

namespace proxycal::cli {

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        body();
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

void emit_model_warnings(const BiasModel& model, std::ostream& err) {
    if (model.insufficient_domains) {
        err << "warning: only one history domain; insufficient domains for variance, gamma2 set "
               "to 0\n";
    } else if (model.gamma2_truncated) {
        err << "warning: gamma2 moment estimate " << io::format_double(model.gamma2_raw)
            << " is negative and was truncated to 0\n";
    }
}

std::string fmt(double x) { return io::format_double(x); }

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += fmt(values[i]);
    }
    return out;
}

// Writes to the file when given, otherwise to `out`.
void deliver(const std::optional<Path>& path, const std::string& text, std::ostream& out) {
    if (path) {
        io::write_text(*path, text);
    } else {
        out << text;
    }
}

}  // namespace

int cmd_fit(const Path& history_path, const Path& out_model, std::ostream& out,
            std::ostream& err) {
    return guarded(err, [&] {
        const auto history = io::read_history(history_path);
        if (history.empty()) {
            throw InputError(history_path.string() + ": history has no rows");
        }
        const auto model = fit_mom(history);
        emit_model_warnings(model, err);

        std::vector<std::string> ids;
        for (const auto& r : history) ids.push_back(r.domain_id);
        std::ostringstream text;
        io::write_model(text, model, ids);
        io::write_text(out_model, text.str());
        io::write_manifest(out_model, {"fit", 0, {}, {{history_path.string(),
                                                       io::file_digest(history_path)}}});
        out << "rho = " << fmt(model.rho) << "\ngamma2 = " << fmt(model.gamma2)
            << "\nn_domains = " << model.n_domains << '\n';
    });
}

int cmd_adjust(const AdjustArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto method = args.method;
        if (method != "plugin" && method != "bootstrap" && method != "contextual") {
            throw InputError("unknown adjust method '" + method +
                             "' (expected plugin, bootstrap or contextual)");
        }
        if (!(args.alpha > 0.0 && args.alpha < 1.0)) {
            throw InputError("--alpha must lie in (0, 1)");
        }
        if (method != "plugin" && !args.history) {
            throw InputError(method +
                             " adjustment needs per-domain history (--history); a fitted model "
                             "file is not enough");
        }
        if (method == "plugin" && !args.model && !args.history) {
            throw InputError("plugin adjustment needs --model or --history");
        }
        if (method == "contextual" && !args.beta) {
            throw InputError("contextual adjustment needs --beta");
        }

        const auto targets = io::read_targets(args.target);
        std::vector<DomainRecord> history;
        BiasModel model;
        io::RunManifest manifest{"adjust", args.seed, {}, {}};
        if (args.history) {
            history = io::read_history(*args.history);
            if (history.empty()) throw InputError(args.history->string() + ": no history rows");
            manifest.inputs.emplace_back(args.history->string(), io::file_digest(*args.history));
        }
        if (method == "plugin") {
            if (args.model) {
                model = io::read_model(*args.model);
                manifest.inputs.emplace_back(args.model->string(), io::file_digest(*args.model));
            } else {
                model = fit_mom(history);
            }
            emit_model_warnings(model, err);
        }
        manifest.inputs.emplace_back(args.target.string(), io::file_digest(args.target));
        manifest.config = {{"alpha", fmt(args.alpha)}, {"method", method}};
        if (method == "bootstrap") manifest.config.emplace_back("draws", std::to_string(args.draws));
        if (args.beta) manifest.config.emplace_back("beta", fmt(*args.beta));
        if (args.time_bandwidth) {
            manifest.config.emplace_back("time_bandwidth", fmt(*args.time_bandwidth));
        }

        std::ostringstream table;
        table << "domain_id,method,point,lower,upper,level\n";
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& t = targets[i];
            ConfidenceInterval ci;
            double point = 0.0;
            if (method == "plugin") {
                ci = plugin_interval(t, model, args.alpha);
                point = debias(t, model);
            } else if (method == "bootstrap") {
                ci = domain_bootstrap_interval(history, t, args.alpha, args.draws,
                                               mix64(args.seed ^ mix64(i + 1)));
                point = debias(t, fit_mom(history));
            } else {
                const auto weights = contextual_weights(history, t.context, *args.beta,
                                                        args.time_bandwidth, t.timestamp);
                const auto local = fit_weighted_mom(history, weights);
                ci = contextual_interval(t, history, args.alpha, *args.beta, args.time_bandwidth);
                point = debias(t, local);
            }
            table << t.domain_id << ',' << method << ',' << fmt(point) << ',' << fmt(ci.lower)
                  << ',' << fmt(ci.upper) << ',' << fmt(ci.level) << '\n';
        }
        if (args.out) {
            io::write_text(*args.out, table.str());
            io::write_manifest(*args.out, manifest);
        }
        out << table.str();
    });
}

int cmd_loo(const LooArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto history = io::read_history(args.history);
        if (history.size() < 2) {
            throw InputError(args.history.string() +
                             ": leave-one-out diagnostics need at least 2 history rows");
        }
        if (args.alphas.empty() || args.methods.empty()) {
            throw InputError("loo needs at least one alpha and one method");
        }
        std::ostringstream table;
        std::ostringstream domains;
        table << "alpha,method,overlap_rate,normalized_width\n";
        domains << "alpha,method,domain_id,proxy_lower,proxy_upper,primary_lower,primary_upper,"
                   "overlap\n";
        for (const auto& name : args.methods) {
            LooOptions options{parse_loo_method(name), args.draws, args.seed};
            for (double alpha : args.alphas) {
                const auto results = loo_evaluate(history, alpha, options);
                double primary_width = 0.0;
                for (const auto& r : results) primary_width += r.primary.width();
                if (!(primary_width > 0.0)) {
                    throw InputError("normalized width undefined: all primary variances are zero");
                }
                const auto s = summarize(results);
                table << fmt(alpha) << ',' << to_string(options.method) << ','
                      << fmt(s.overlap_rate) << ',' << fmt(s.normalized_width) << '\n';
                for (const auto& r : results) {
                    domains << fmt(alpha) << ',' << to_string(options.method) << ','
                            << r.domain_id << ',' << fmt(r.proxy.lower) << ','
                            << fmt(r.proxy.upper) << ',' << fmt(r.primary.lower) << ','
                            << fmt(r.primary.upper) << ',' << (r.overlap ? 1 : 0) << '\n';
                }
            }
        }
        io::RunManifest manifest{"loo", args.seed, {}, {}};
        {
            std::string methods;
            for (std::size_t i = 0; i < args.methods.size(); ++i) {
                if (i) methods += ',';
                methods += args.methods[i];
            }
            manifest.config = {{"alpha", join(args.alphas)},
                               {"method", methods},
                               {"draws", std::to_string(args.draws)}};
            manifest.inputs.emplace_back(args.history.string(), io::file_digest(args.history));
        }
        if (args.out) {
            io::write_text(*args.out, table.str());
            io::write_manifest(*args.out, manifest);
        }
        if (args.domains_out) io::write_text(*args.domains_out, domains.str());
        out << table.str();
    });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto grid = io::read_sim_config(args.config);
        std::ostringstream table;
        std::ostringstream reps;
        table << "kappa,K,n,estimator,adjustment,coverage,mean_length,replicates\n";
        reps << "kappa,K,n,replicate,estimator,adjustment,lower,upper,covered\n";
        sim::RunOptions options{args.threads, grid.estimators};
        for (const auto& cell : grid.cells()) {
            const auto result = sim::run_experiment(cell, options);
            for (const auto& row : result.rows) {
                table << fmt(row.kappa) << ',' << row.n_domains << ',' << row.n_per_domain << ','
                      << sim::to_string(row.estimator) << ',' << sim::to_string(row.adjustment)
                      << ',' << fmt(row.coverage) << ',' << fmt(row.mean_length) << ','
                      << row.replicates << '\n';
            }
            if (args.replicates_out) {
                for (const auto& r : result.replicates) {
                    reps << fmt(cell.kappa) << ',' << cell.n_domains << ',' << cell.n_per_domain
                         << ',' << r.replicate << ',' << sim::to_string(r.estimator) << ','
                         << sim::to_string(r.adjustment) << ',' << fmt(r.interval.lower) << ','
                         << fmt(r.interval.upper) << ',' << (r.covered ? 1 : 0) << '\n';
                }
            }
        }
        io::write_text(args.out, table.str());
        io::RunManifest manifest{"simulate", grid.base.seed, io::describe(grid),
                                 {{args.config.string(), io::file_digest(args.config)}}};
        io::write_manifest(args.out, manifest);
        if (args.replicates_out) io::write_text(*args.replicates_out, reps.str());
        out << table.str();
    });
}

int cmd_tune_context(const TuneArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto history = io::read_history(args.history);
        for (const auto& r : history) {
            if (r.context.empty()) {
                throw InputError(args.history.string() +
                                 ": tune-context needs context_* columns in the history");
            }
        }
        if (args.target_context.empty()) {
            throw InputError("--target-context is required");
        }
        const auto grid = args.beta_grid.empty() ? default_beta_grid() : args.beta_grid;
        const auto search = tune_beta(history, args.target_context, grid);

        std::ostringstream text;
        text << "# proxycal context tuning\n";
        text << "beta = " << fmt(search.beta) << '\n';
        text << "loglik = " << fmt(search.loglik) << '\n';
        try {
            const auto weights = contextual_weights(history, args.target_context, search.beta);
            const auto model = fit_weighted_mom(history, weights);
            text << "rho = " << fmt(model.rho) << '\n';
            text << "gamma2 = " << fmt(model.gamma2) << '\n';
            text << "weights = " << join(weights.weights) << '\n';
        } catch (const InputError& e) {
            throw InputError(std::string("no bandwidth in the grid gives usable weights: ") +
                             e.what());
        }
        std::vector<double> betas;
        std::vector<double> lls;
        for (const auto& g : search.grid) {
            betas.push_back(g.beta);
            lls.push_back(g.loglik);
        }
        text << "grid_beta = " << join(betas) << '\n';
        text << "grid_loglik = " << join(lls) << '\n';

        deliver(args.out, text.str(), out);
        if (args.out) {
            io::write_manifest(*args.out,
                               {"tune-context",
                                0,
                                {{"target_context", join(args.target_context)},
                                 {"beta_grid", join(grid)}},
                                {{args.history.string(), io::file_digest(args.history)}}});
            out << text.str();
        }
    });
}

std::vector<double> parse_beta_grid(const std::string& text) {
    if (text.rfind("log:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(text.substr(4));
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() != 3) {
            throw InputError("--beta-grid log form is log:lo:hi:points");
        }
        const double lo = io::parse_double(parts[0], "--beta-grid lo");
        const double hi = io::parse_double(parts[1], "--beta-grid hi");
        const double points = io::parse_double(parts[2], "--beta-grid points");
        if (!(lo > 0.0 && hi >= lo && points >= 1.0)) {
            throw InputError("--beta-grid needs 0 < lo <= hi and at least one point");
        }
        return default_beta_grid(lo, hi, static_cast<std::size_t>(points));
    }
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) grid.push_back(io::parse_double(part, "--beta-grid"));
    if (grid.empty()) throw InputError("--beta-grid is empty");
    return grid;
}

}  // namespace proxycal::cli

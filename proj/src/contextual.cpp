#include "proxycal/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace proxycal {

namespace {

constexpr double kNegligibleWeight = 1e-12;

// Normalizes exp(log_w) without underflow. Throws when every entry would be zero.
std::vector<double> normalize_log_weights(const std::vector<double>& log_w, const char* what) {
    const double top = *std::max_element(log_w.begin(), log_w.end());
    if (!(std::exp(top) > 0.0)) {
        throw InputError(std::string(what) +
                         ": all weights underflow to zero (target outside history support)");
    }
    std::vector<double> w(log_w.size());
    double total = 0.0;
    for (std::size_t k = 0; k < log_w.size(); ++k) {
        w[k] = std::exp(log_w[k] - top);
        total += w[k];
    }
    for (double& x : w) x /= total;
    return w;
}

}  // namespace

ContextWeights similarity_weights(std::span<const std::vector<double>> history_contexts,
                                  std::span<const double> target_context, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InputError("similarity bandwidth beta must be positive and finite");
    }
    if (history_contexts.empty()) {
        throw InputError("similarity_weights: history is empty");
    }
    std::vector<double> log_s(history_contexts.size());
    for (std::size_t k = 0; k < history_contexts.size(); ++k) {
        const auto& ck = history_contexts[k];
        if (ck.size() != target_context.size()) {
            throw InputError("context dimension mismatch: domain " + std::to_string(k) + " has " +
                             std::to_string(ck.size()) + ", target has " +
                             std::to_string(target_context.size()));
        }
        double dist2 = 0.0;
        for (std::size_t j = 0; j < ck.size(); ++j) {
            const double diff = target_context[j] - ck[j];
            dist2 += diff * diff;
        }
        log_s[k] = -dist2 / (2.0 * beta * beta);
    }
    return {normalize_log_weights(log_s, "similarity_weights"), beta, std::nullopt};
}

ContextWeights time_decay_weights(const ContextWeights& base,
                                  std::span<const std::optional<double>> history_times,
                                  double target_time, double h) {
    if (!(h > 0.0)) {
        throw InputError("time bandwidth h must be positive");
    }
    if (history_times.size() != base.weights.size()) {
        throw InputError("time_decay_weights: timestamps and weights differ in length");
    }
    std::vector<double> log_w(base.weights.size());
    for (std::size_t k = 0; k < log_w.size(); ++k) {
        if (!history_times[k]) {
            throw InputError("time_decay_weights: domain " + std::to_string(k) +
                             " has no timestamp");
        }
        const double dt = target_time - *history_times[k];
        log_w[k] = std::log(base.weights[k]) - dt * dt / (2.0 * h * h);
    }
    ContextWeights out{normalize_log_weights(log_w, "time_decay_weights"), base.beta, h};
    return out;
}

BiasModel fit_weighted_mom(std::span<const double> diffs, std::span<const double> diff_vars,
                           std::span<const double> weights) {
    if (diffs.size() != weights.size() || diff_vars.size() != weights.size()) {
        throw InputError("fit_weighted_mom: weights are not aligned with the history");
    }
    if (diffs.empty()) {
        throw InputError("fit_weighted_mom: history is empty");
    }
    double rho = 0.0;
    for (std::size_t k = 0; k < diffs.size(); ++k) rho += weights[k] * diffs[k];
    double spread = 0.0;
    double noise = 0.0;
    for (std::size_t k = 0; k < diffs.size(); ++k) {
        const double dev = diffs[k] - rho;
        spread += weights[k] * dev * dev;
        noise += weights[k] * diff_vars[k];
    }
    BiasModel model;
    model.rho = rho;
    model.gamma2_raw = spread - noise;
    model.gamma2_truncated = model.gamma2_raw < 0.0;
    model.gamma2 = std::max(0.0, model.gamma2_raw);
    model.n_domains = diffs.size();
    model.insufficient_domains = diffs.size() < 2;
    model.diffs.assign(diffs.begin(), diffs.end());
    model.diff_vars.assign(diff_vars.begin(), diff_vars.end());
    return model;
}

BiasModel fit_weighted_mom(std::span<const DomainRecord> history, const ContextWeights& weights) {
    if (history.size() != weights.weights.size()) {
        throw InputError("fit_weighted_mom: weights are not aligned with the history");
    }
    std::vector<double> diffs;
    std::vector<double> vars;
    for (const auto& record : history) {
        const auto s = diff_stats(record);
        diffs.push_back(s.d);
        vars.push_back(s.diff_var);
    }
    return fit_weighted_mom(diffs, vars, weights.weights);
}

double weighted_loglik(std::span<const double> diffs, std::span<const double> diff_vars,
                       std::span<const double> weights, const BiasModel& fit) {
    double ll = 0.0;
    for (std::size_t k = 0; k < diffs.size(); ++k) {
        if (weights[k] < kNegligibleWeight) continue;
        const double total = fit.gamma2 + diff_vars[k];
        if (!(total > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        const double dev = diffs[k] - fit.rho;
        ll += weights[k] * (std::log(total) + dev * dev / total);
    }
    return -0.5 * ll;
}

std::vector<double> default_beta_grid(double lo, double hi, std::size_t points) {
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

BetaSearch tune_beta(std::span<const DomainRecord> history, std::span<const double> target_context,
                     std::span<const double> beta_grid) {
    if (beta_grid.empty()) {
        throw InputError("tune_beta: beta grid is empty");
    }
    if (history.size() < 2) {
        throw InputError("tune_beta: need at least 2 history domains");
    }
    std::vector<std::vector<double>> contexts;
    std::vector<double> diffs;
    std::vector<double> vars;
    for (const auto& record : history) {
        const auto s = diff_stats(record);
        diffs.push_back(s.d);
        vars.push_back(s.diff_var);
        contexts.push_back(record.context);
    }
    for (const auto& c : contexts) {
        if (c.size() != target_context.size()) {
            throw InputError("tune_beta: context dimension mismatch");
        }
    }

    BetaSearch search;
    search.grid.reserve(beta_grid.size());
    bool found = false;
    for (double beta : beta_grid) {
        if (!(beta > 0.0)) {
            throw InputError("tune_beta: grid values must be positive");
        }
        double ll = -std::numeric_limits<double>::infinity();
        try {
            const auto w = similarity_weights(contexts, target_context, beta);
            const auto fit = fit_weighted_mom(diffs, vars, w.weights);
            ll = weighted_loglik(diffs, vars, w.weights, fit);
        } catch (const InputError&) {
            // Underflowing weights: this bandwidth cannot be scored.
        }
        search.grid.push_back({beta, ll});
        if (!found || ll > search.loglik) {
            search.beta = beta;
            search.loglik = ll;
            found = true;
        }
    }
    return search;
}

ContextWeights contextual_weights(std::span<const DomainRecord> history,
                                  std::span<const double> target_context, double beta,
                                  std::optional<double> h, std::optional<double> target_time) {
    std::vector<std::vector<double>> contexts;
    contexts.reserve(history.size());
    for (const auto& record : history) contexts.push_back(record.context);
    auto weights = similarity_weights(contexts, target_context, beta);
    if (h) {
        if (!target_time) {
            throw InputError("time-decay weighting needs a target timestamp");
        }
        std::vector<std::optional<double>> times;
        for (const auto& record : history) times.push_back(record.timestamp);
        weights = time_decay_weights(weights, times, *target_time, *h);
    }
    return weights;
}

ConfidenceInterval contextual_interval(const TargetRecord& target,
                                       std::span<const DomainRecord> history, double alpha,
                                       double beta, std::optional<double> h) {
    validate(target);
    if (target.context.empty()) {
        throw InputError("contextual interval: target '" + target.domain_id + "' has no context");
    }
    const auto weights = contextual_weights(history, target.context, beta, h, target.timestamp);
    const auto model = fit_weighted_mom(history, weights);
    return plugin_interval(target, model, alpha);
}

}  // namespace proxycal

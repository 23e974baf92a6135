#include "proxycal/diagnostics.hpp"

#include "proxycal/random.hpp"

namespace proxycal {

std::string_view to_string(LooMethod method) {
    switch (method) {
        case LooMethod::unadjusted: return "unadjusted";
        case LooMethod::plugin: return "plugin";
        case LooMethod::bootstrap: return "bootstrap";
    }
    return "unknown";
}

LooMethod parse_loo_method(std::string_view name) {
    if (name == "unadjusted" || name == "none" || name == "proxy") return LooMethod::unadjusted;
    if (name == "plugin") return LooMethod::plugin;
    if (name == "bootstrap") return LooMethod::bootstrap;
    throw InputError("unknown method '" + std::string(name) +
                     "' (expected unadjusted, plugin or bootstrap)");
}

bool intervals_overlap(const ConfidenceInterval& a, const ConfidenceInterval& b) {
    return a.lower <= b.upper && b.lower <= a.upper;
}

std::vector<LooDomainResult> loo_evaluate(std::span<const DomainRecord> history, double alpha,
                                          const LooOptions& options) {
    if (history.size() < 2) {
        throw InputError("leave-one-out diagnostics need at least 2 history domains");
    }
    for (const auto& record : history) validate(record);

    std::vector<LooDomainResult> results;
    results.reserve(history.size());
    std::vector<DomainRecord> rest;
    rest.reserve(history.size() - 1);
    for (std::size_t k = 0; k < history.size(); ++k) {
        const DomainRecord& held_out = history[k];
        rest.clear();
        for (std::size_t j = 0; j < history.size(); ++j) {
            if (j != k) rest.push_back(history[j]);
        }
        // Only the proxy side of the held-out domain is visible to the fit.
        TargetRecord target{held_out.domain_id, held_out.theta_star_hat, held_out.var_proxy,
                            held_out.context, held_out.timestamp};

        LooDomainResult r;
        r.domain_id = held_out.domain_id;
        switch (options.method) {
            case LooMethod::unadjusted:
                r.proxy = wald_interval(target.theta_star_hat, target.var_proxy, alpha);
                break;
            case LooMethod::plugin:
                r.proxy = plugin_interval(target, fit_mom(rest), alpha);
                break;
            case LooMethod::bootstrap:
                r.proxy = domain_bootstrap_interval(rest, target, alpha, options.bootstrap_draws,
                                                    mix64(options.seed ^ mix64(k + 1)));
                break;
        }
        r.primary = wald_interval(held_out.theta_hat, held_out.var_primary, alpha);
        r.overlap = intervals_overlap(r.proxy, r.primary);
        results.push_back(std::move(r));
    }
    return results;
}

LooSummary summarize(std::span<const LooDomainResult> results) {
    if (results.empty()) {
        throw std::invalid_argument("summarize: no LOO results");
    }
    std::size_t hits = 0;
    double proxy_width = 0.0;
    double primary_width = 0.0;
    for (const auto& r : results) {
        hits += r.overlap ? 1 : 0;
        proxy_width += r.proxy.width();
        primary_width += r.primary.width();
    }
    LooSummary s;
    s.overlap_rate = static_cast<double>(hits) / static_cast<double>(results.size());
    s.normalized_width = primary_width > 0.0 ? proxy_width / primary_width : 0.0;
    return s;
}

double loo_overlap_rate(std::span<const DomainRecord> history, double alpha,
                        const LooOptions& options) {
    return summarize(loo_evaluate(history, alpha, options)).overlap_rate;
}

std::vector<std::pair<double, double>> overlap_curve(std::span<const DomainRecord> history,
                                                     std::span<const double> alphas,
                                                     const LooOptions& options) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(alphas.size());
    for (double alpha : alphas) {
        curve.emplace_back(alpha, loo_overlap_rate(history, alpha, options));
    }
    return curve;
}

double normalized_width(std::span<const DomainRecord> history, double alpha,
                        const LooOptions& options) {
    const auto results = loo_evaluate(history, alpha, options);
    double primary_width = 0.0;
    for (const auto& r : results) primary_width += r.primary.width();
    if (!(primary_width > 0.0)) {
        throw InputError("normalized_width: mean primary interval width is zero");
    }
    return summarize(results).normalized_width;
}

}  // namespace proxycal

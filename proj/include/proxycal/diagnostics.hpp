#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proxycal/core_model.hpp"
#include "proxycal/intervals.hpp"

namespace proxycal {

/// How the held-out proxy interval is built.
enum class LooMethod {
    unadjusted,  // Wald interval on (theta*_k, var_proxy_k), no bias model
    plugin,      // plug-in adjusted interval from the fit on the other domains
    bootstrap,   // domain bootstrap on the other domains
};

std::string_view to_string(LooMethod method);
LooMethod parse_loo_method(std::string_view name);

struct LooOptions {
    LooMethod method = LooMethod::plugin;
    std::size_t bootstrap_draws = kDefaultBootstrapDraws;
    std::uint64_t seed = 0;
};

struct LooDomainResult {
    std::string domain_id;
    ConfidenceInterval proxy;    // built without the domain's own primary estimate
    ConfidenceInterval primary;  // Wald interval from (theta_hat, var_primary)
    bool overlap = false;
};

/// Closed-interval intersection test; touching endpoints count as overlap.
bool intervals_overlap(const ConfidenceInterval& a, const ConfidenceInterval& b);

/// Leave-one-domain-out evaluation: for every k, fit on the other domains and
/// compare the proxy interval for k against k's primary interval.
std::vector<LooDomainResult> loo_evaluate(std::span<const DomainRecord> history, double alpha,
                                          const LooOptions& options);

double loo_overlap_rate(std::span<const DomainRecord> history, double alpha,
                        const LooOptions& options);

std::vector<std::pair<double, double>> overlap_curve(std::span<const DomainRecord> history,
                                                     std::span<const double> alphas,
                                                     const LooOptions& options);

/// Mean held-out proxy-interval width over mean primary-interval width.
double normalized_width(std::span<const DomainRecord> history, double alpha,
                        const LooOptions& options);

/// Overlap rate and normalized width from one set of LOO results.
struct LooSummary {
    double overlap_rate = 0.0;
    double normalized_width = 0.0;
};
LooSummary summarize(std::span<const LooDomainResult> results);

}  // namespace proxycal

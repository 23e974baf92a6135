#pragma once

#include <optional>
#include <span>
#include <vector>

#include "proxycal/core_model.hpp"
#include "proxycal/intervals.hpp"

namespace proxycal {

/// Normalized per-domain weights for sharing bias information between domains
/// with similar context (and, optionally, nearby timestamps).
struct ContextWeights {
    std::vector<double> weights;  // nonnegative, sums to 1
    double beta = 1.0;
    std::optional<double> time_bandwidth;
};

/// Squared-exponential similarity exp(-|c - C_k|^2 / (2 beta^2)), normalized.
/// Throws InputError on dimension mismatch, and when every raw similarity
/// underflows to zero (target context far outside the history's support).
ContextWeights similarity_weights(std::span<const std::vector<double>> history_contexts,
                                  std::span<const double> target_context, double beta);

/// Multiplies each weight by exp(-(t_K - t_k)^2 / (2 h^2)) and renormalizes.
/// Throws InputError if any history time is missing.
ContextWeights time_decay_weights(const ContextWeights& base,
                                  std::span<const std::optional<double>> history_times,
                                  double target_time, double h);

/// rho(c) = sum v_k d_k;  gamma2(c) = max(0, sum v_k (d_k - rho)^2 - sum v_k s_k^2).
BiasModel fit_weighted_mom(std::span<const DomainRecord> history, const ContextWeights& weights);
BiasModel fit_weighted_mom(std::span<const double> diffs, std::span<const double> diff_vars,
                           std::span<const double> weights);

/// Weighted Gaussian marginal log-likelihood of the differences under the
/// weighted fit. Domains with weight below 1e-12 are skipped. Returns -inf when
/// a retained domain has zero total variance.
double weighted_loglik(std::span<const double> diffs, std::span<const double> diff_vars,
                       std::span<const double> weights, const BiasModel& fit);

struct BetaScore {
    double beta = 0.0;
    double loglik = 0.0;
};

struct BetaSearch {
    double beta = 0.0;
    double loglik = 0.0;
    std::vector<BetaScore> grid;
};

/// Log-spaced grid, 41 points over [1e-2, 1e2] by default.
std::vector<double> default_beta_grid(double lo = 1e-2, double hi = 1e2, std::size_t points = 41);

/// Grid search for the similarity bandwidth maximizing the weighted marginal
/// likelihood. Ties go to the first grid point. Bandwidths whose weights
/// underflow or whose likelihood degenerates score -inf.
BetaSearch tune_beta(std::span<const DomainRecord> history, std::span<const double> target_context,
                     std::span<const double> beta_grid);

/// Weights for a target context, with an optional time-decay kernel.
ContextWeights contextual_weights(std::span<const DomainRecord> history,
                                  std::span<const double> target_context, double beta,
                                  std::optional<double> h = std::nullopt,
                                  std::optional<double> target_time = std::nullopt);

/// Plug-in interval using the context-specific moments.
ConfidenceInterval contextual_interval(const TargetRecord& target,
                                       std::span<const DomainRecord> history, double alpha,
                                       double beta, std::optional<double> h = std::nullopt);

}  // namespace proxycal

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "proxycal/core_model.hpp"

namespace proxycal {

/// Closed interval [lower, upper] with nominal coverage level 1 - alpha.
struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;

    double width() const { return upper - lower; }
    double center() const { return 0.5 * (lower + upper); }
    bool contains(double x) const { return lower <= x && x <= upper; }
};

inline constexpr std::size_t kDefaultBootstrapDraws = 4000;

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, giving close to full double precision.
double normal_quantile(double p);

/// z_{1 - alpha/2}.
double critical_value(double alpha);

ConfidenceInterval wald_interval(double center, double variance, double alpha);

/// [theta*_K - rho +/- z * sqrt(var_proxy + gamma2)].
ConfidenceInterval plugin_interval(const TargetRecord& target, const BiasModel& model,
                                   double alpha);

/// Empirical quantile with linear interpolation between adjacent order
/// statistics (h = (n-1)p). `sorted` must be ascending.
double empirical_quantile(std::span<const double> sorted, double p);

/// Domain bootstrap: resample the history domains with replacement, refit the
/// moments on each resample, draw the target primary metric from the implied
/// normal, and report the alpha/2 and 1-alpha/2 empirical quantiles.
///
/// Draw b uses the random stream addressed by (seed, b), so the result does
/// not depend on evaluation order.
ConfidenceInterval domain_bootstrap_interval(std::span<const DomainRecord> history,
                                             const TargetRecord& target, double alpha,
                                             std::size_t draws, std::uint64_t seed);

/// Same procedure on precomputed differences d_k and their variances.
ConfidenceInterval domain_bootstrap_interval(std::span<const double> diffs,
                                             std::span<const double> diff_vars,
                                             double target_estimate, double target_var,
                                             double alpha, std::size_t draws,
                                             std::uint64_t seed);

}  // namespace proxycal

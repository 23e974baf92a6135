#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxycal {

/// Thrown for malformed or inconsistent user input. The CLI maps it to exit status 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Aggregate estimates for one labeled historical domain.
///
/// Holds the primary and proxy point estimates together with their 2x2
/// sampling covariance. Nothing at the unit level is retained.
struct DomainRecord {
    std::string domain_id;
    double theta_hat = 0.0;        // primary estimate
    double theta_star_hat = 0.0;   // proxy estimate
    double var_primary = 0.0;
    double var_proxy = 0.0;
    double cov_primary_proxy = 0.0;
    std::vector<double> context;   // empty when the domain carries no context
    std::optional<double> timestamp;
};

/// Proxy estimate for the domain whose primary metric is unobserved.
struct TargetRecord {
    std::string domain_id;
    double theta_star_hat = 0.0;
    double var_proxy = 0.0;
    std::vector<double> context;
    std::optional<double> timestamp;
};

/// Fitted distribution of the residual proxy bias, phi = theta* - theta ~ N(rho, gamma2).
struct BiasModel {
    double rho = 0.0;
    double gamma2 = 0.0;
    /// Moment estimate of gamma2 before truncation at zero.
    double gamma2_raw = 0.0;
    std::size_t n_domains = 0;
    std::vector<double> diffs;
    std::vector<double> diff_vars;
    /// Set when only one history domain was available, so gamma2 carries no information.
    bool insufficient_domains = false;
    /// Set when the raw moment estimate was negative and clamped to zero.
    bool gamma2_truncated = false;
};

struct DiffStats {
    double d = 0.0;
    double diff_var = 0.0;
};

/// Throws InputError when variances are negative, values are non-finite, or the
/// covariance violates Cauchy-Schwarz beyond a 1e-12 relative slack.
void validate(const DomainRecord& record);
void validate(const TargetRecord& target);

/// Proxy-minus-primary difference and its sampling variance for one domain.
DiffStats diff_stats(const DomainRecord& record);

/// Method-of-moments fit over the history. Both moments divide by the domain
/// count (no Bessel correction) and gamma2 is truncated at zero.
BiasModel fit_mom(std::span<const DomainRecord> history);

/// Same estimator, starting from precomputed differences.
BiasModel fit_mom_from_diffs(std::vector<double> diffs, std::vector<double> diff_vars);

/// Debiased target point estimate theta*_K - rho.
double debias(const TargetRecord& target, const BiasModel& model);

}  // namespace proxycal

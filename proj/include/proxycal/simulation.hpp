#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proxycal/core_model.hpp"
#include "proxycal/intervals.hpp"
#include "proxycal/random.hpp"

namespace proxycal::sim {

/// Parameters of the multi-domain covariate-shift / concept-drift study.
struct SimConfig {
    std::size_t dim_p = 4;
    std::size_t n_domains = 25;  // K, the last domain is the target
    std::size_t n_per_domain = 1000;
    double kappa = 0.0;
    double lambda1 = 0.5;
    double phi1 = 2.0;
    double lambda2 = 0.5;
    double phi2 = 2.0;
    std::vector<double> mu_target{0.5, -0.5, 0.5, -0.5};
    std::size_t replicates = 1000;
    std::size_t mc_truth_samples = 1000000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::size_t bootstrap_draws = kDefaultBootstrapDraws;
    /// Ground truth for coverage: exact enumeration ("exact") or Monte Carlo ("mc").
    std::string truth = "exact";
};

/// Throws InputError when the configuration is unusable.
void validate(const SimConfig& cfg);

/// One simulated domain. Covariates are stored row-major (n x P).
struct DomainData {
    std::vector<double> covariates;
    std::vector<double> primary;  // 0 or 1
    std::vector<double> proxy;    // in (0, 1)
    std::vector<double> mean;
    double threshold = 0.0;

    std::size_t size() const { return primary.size(); }
    std::size_t dim() const { return mean.size(); }
    std::span<const double> row(std::size_t i) const {
        return {covariates.data() + i * dim(), dim()};
    }
};

enum class Estimator : std::uint8_t { primary_only, proxy_only, ppi, ppi_weighted };
enum class Adjustment : std::uint8_t { none, plugin, bootstrap };

inline constexpr std::array kEstimators{Estimator::primary_only, Estimator::proxy_only,
                                        Estimator::ppi, Estimator::ppi_weighted};
inline constexpr std::array kAdjustments{Adjustment::none, Adjustment::plugin,
                                         Adjustment::bootstrap};

std::string_view to_string(Estimator e);
std::string_view to_string(Adjustment a);

/// Uniform draw from the Euclidean unit ball in R^p.
std::vector<double> sample_unit_ball(std::size_t p, Stream& rng);

/// T(x; delta) = #{j : x_j >= delta} - p/2.
double threshold_count(std::span<const double> x, double delta);

/// P(Y = 1 | x) = 1 / (1 + exp(-lambda1 * T(x; delta) + phi1)).
double outcome_prob(std::span<const double> x, double delta, const SimConfig& cfg);
double outcome_prob_from_count(double t, const SimConfig& cfg);

/// (1/pi) atan(lambda2 * T(x; 0) + phi2) + 1/2. The proxy ignores the domain threshold.
double proxy_score(std::span<const double> x, const SimConfig& cfg);
double proxy_score_from_count(double t, const SimConfig& cfg);

/// Oracle covariate-shift weight N(x; mu_tgt, I) / N(x; mu_src, I).
double density_ratio(std::span<const double> x, std::span<const double> mu_src,
                     std::span<const double> mu_tgt);

DomainData gen_domain(const SimConfig& cfg, std::span<const double> mu, double delta, Stream& rng);

/// 2x2 sampling covariance of (mean Y, mean Y*), from Bessel-corrected moments over n.
struct MeanCovariance {
    double var_primary = 0.0;
    double var_proxy = 0.0;
    double cov = 0.0;
};
MeanCovariance cov_components(const DomainData& domain);

struct Estimate {
    double estimate = 0.0;
    double variance = 0.0;
};
using EstimateSet = std::array<Estimate, kEstimators.size()>;

inline std::size_t index_of(Estimator e) { return static_cast<std::size_t>(e); }
inline std::size_t index_of(Adjustment a) { return static_cast<std::size_t>(a); }

/// Point estimates and variances for the last domain (the target) from all
/// four estimators. Rectifiers use only domains 0..K-2; the target contributes
/// only its proxy scores (and its primary labels to primary_only).
EstimateSet estimate_all(std::span<const DomainData> domains, const SimConfig& cfg);

/// Aggregate history records for the labeled domains under one estimator.
/// Each labeled domain is treated as a held-out target: its proxy-side
/// estimate uses its own proxy mean plus a rectifier built from the other
/// labeled domains. Requires at least 3 domains for the PPI estimators.
std::vector<DomainRecord> history_records(std::span<const DomainData> domains, Estimator e);

/// Prevalence in a domain with threshold delta and covariate mean mu, summing
/// over the distribution of the threshold count (exact for Gaussian covariates).
double exact_prevalence(const SimConfig& cfg, std::span<const double> mu, double delta);

/// Monte Carlo target prevalence with cfg.mc_truth_samples draws at delta_K = 0.
double mc_truth(const SimConfig& cfg, Stream& rng);

struct ResultRow {
    double kappa = 0.0;
    std::size_t n_domains = 0;
    std::size_t n_per_domain = 0;
    Estimator estimator = Estimator::primary_only;
    Adjustment adjustment = Adjustment::none;
    double coverage = 0.0;
    double mean_length = 0.0;
    std::size_t replicates = 0;
};

struct ReplicateRow {
    std::size_t replicate = 0;
    Estimator estimator = Estimator::primary_only;
    Adjustment adjustment = Adjustment::none;
    ConfidenceInterval interval;
    bool covered = false;
};

struct ExperimentResult {
    double truth = 0.0;
    std::vector<ResultRow> rows;          // one per (estimator, adjustment)
    std::vector<ReplicateRow> replicates;  // one per (replicate, estimator, adjustment)
};

struct RunOptions {
    std::size_t threads = 1;
    /// Estimators to evaluate; empty means all four.
    std::vector<Estimator> estimators;
};

/// Runs cfg.replicates independent replicates. Replicate r draws everything
/// from streams keyed by (cfg.seed, r), so the result is identical for any
/// thread count.
ExperimentResult run_experiment(const SimConfig& cfg, const RunOptions& options = {});

}  // namespace proxycal::sim

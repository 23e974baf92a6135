#include "proxycal/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

namespace proxycal::sim {

std::string_view to_string(Estimator e) {
    switch (e) {
        case Estimator::primary_only: return "primary_only";
        case Estimator::proxy_only: return "proxy_only";
        case Estimator::ppi: return "ppi";
        case Estimator::ppi_weighted: return "ppi_weighted";
    }
    return "unknown";
}

std::string_view to_string(Adjustment a) {
    switch (a) {
        case Adjustment::none: return "none";
        case Adjustment::plugin: return "plugin";
        case Adjustment::bootstrap: return "bootstrap";
    }
    return "unknown";
}

void validate(const SimConfig& cfg) {
    if (cfg.dim_p < 1) throw InputError("dim_p must be at least 1");
    if (cfg.n_domains < 2) throw InputError("n_domains must be at least 2");
    if (cfg.n_per_domain < 2) throw InputError("n_per_domain must be at least 2");
    if (!(cfg.kappa >= 0.0) || !std::isfinite(cfg.kappa)) {
        throw InputError("kappa must be nonnegative and finite");
    }
    if (cfg.mu_target.size() != cfg.dim_p) {
        throw InputError("mu_target must have dim_p = " + std::to_string(cfg.dim_p) + " entries");
    }
    for (double m : cfg.mu_target) {
        if (!std::isfinite(m)) throw InputError("mu_target must be finite");
    }
    for (double v : {cfg.lambda1, cfg.phi1, cfg.lambda2, cfg.phi2}) {
        if (!std::isfinite(v)) throw InputError("outcome/proxy parameters must be finite");
    }
    if (cfg.replicates < 1) throw InputError("replicates must be positive");
    if (cfg.mc_truth_samples < 1) throw InputError("mc_truth_samples must be positive");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (cfg.bootstrap_draws < 2) throw InputError("bootstrap_draws must be at least 2");
    if (cfg.truth != "exact" && cfg.truth != "mc") {
        throw InputError("truth must be 'exact' or 'mc'");
    }
}

std::vector<double> sample_unit_ball(std::size_t p, Stream& rng) {
    std::vector<double> v(p);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(p));
    const double scale = radius / std::sqrt(norm2);
    for (double& x : v) x *= scale;
    return v;
}

double threshold_count(std::span<const double> x, double delta) {
    std::size_t above = 0;
    for (double xj : x) above += xj >= delta ? 1 : 0;
    return static_cast<double>(above) - 0.5 * static_cast<double>(x.size());
}

double outcome_prob_from_count(double t, const SimConfig& cfg) {
    const double z = -cfg.lambda1 * t + cfg.phi1;
    if (z > 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double outcome_prob(std::span<const double> x, double delta, const SimConfig& cfg) {
    return outcome_prob_from_count(threshold_count(x, delta), cfg);
}

double proxy_score_from_count(double t, const SimConfig& cfg) {
    return std::atan(cfg.lambda2 * t + cfg.phi2) / std::numbers::pi + 0.5;
}

double proxy_score(std::span<const double> x, const SimConfig& cfg) {
    return proxy_score_from_count(threshold_count(x, 0.0), cfg);
}

double density_ratio(std::span<const double> x, std::span<const double> mu_src,
                     std::span<const double> mu_tgt) {
    if (x.size() != mu_src.size() || x.size() != mu_tgt.size()) {
        throw std::invalid_argument("density_ratio: dimension mismatch");
    }
    double log_ratio = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double dt = x[j] - mu_tgt[j];
        const double ds = x[j] - mu_src[j];
        log_ratio += -0.5 * dt * dt + 0.5 * ds * ds;
    }
    return std::exp(log_ratio);
}

DomainData gen_domain(const SimConfig& cfg, std::span<const double> mu, double delta,
                      Stream& rng) {
    const std::size_t n = cfg.n_per_domain;
    const std::size_t p = mu.size();
    DomainData out;
    out.mean.assign(mu.begin(), mu.end());
    out.threshold = delta;
    out.covariates.resize(n * p);
    out.primary.resize(n);
    out.proxy.resize(n);
    const double half_p = 0.5 * static_cast<double>(p);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = out.covariates.data() + i * p;
        std::size_t above_delta = 0;
        std::size_t above_zero = 0;
        for (std::size_t j = 0; j < p; ++j) {
            row[j] = mu[j] + rng.normal();
            above_delta += row[j] >= delta ? 1 : 0;
            above_zero += row[j] >= 0.0 ? 1 : 0;
        }
        const double prob =
            outcome_prob_from_count(static_cast<double>(above_delta) - half_p, cfg);
        out.primary[i] = rng.uniform() < prob ? 1.0 : 0.0;
        out.proxy[i] = proxy_score_from_count(static_cast<double>(above_zero) - half_p, cfg);
    }
    return out;
}

namespace {

struct DomainSummary {
    double n = 0.0;
    double y_mean = 0.0;
    double s_mean = 0.0;  // proxy
    double d_mean = 0.0;  // primary - proxy
    double s_yy = 0.0;
    double s_ss = 0.0;
    double s_ys = 0.0;
    double s_dd = 0.0;
};

DomainSummary summarize(const DomainData& dom) {
    const std::size_t n = dom.size();
    if (n < 2) {
        throw InputError("domain needs at least 2 observations for sample covariances");
    }
    DomainSummary s;
    s.n = static_cast<double>(n);
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sy += dom.primary[i];
        ss += dom.proxy[i];
    }
    s.y_mean = sy / s.n;
    s.s_mean = ss / s.n;
    s.d_mean = s.y_mean - s.s_mean;
    double cyy = 0.0, css = 0.0, cys = 0.0, cdd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ey = dom.primary[i] - s.y_mean;
        const double es = dom.proxy[i] - s.s_mean;
        const double ed = ey - es;
        cyy += ey * ey;
        css += es * es;
        cys += ey * es;
        cdd += ed * ed;
    }
    const double denom = s.n - 1.0;
    s.s_yy = cyy / denom;
    s.s_ss = css / denom;
    s.s_ys = cys / denom;
    s.s_dd = cdd / denom;
    return s;
}

struct Rectifier {
    double value = 0.0;
    double variance = 0.0;
};

// Self-normalized density-ratio weighted mean of D over a source domain,
// transported to a domain with covariate mean mu_tgt. The ratio only enters
// through normalized weights, so exp(x . (mu_tgt - mu_src)) suffices.
Rectifier weighted_rectifier(const DomainData& src, std::span<const double> mu_tgt,
                             std::vector<double>& buffer) {
    const std::size_t n = src.size();
    const std::size_t p = src.dim();
    std::vector<double> shift(p);
    for (std::size_t j = 0; j < p; ++j) shift[j] = mu_tgt[j] - src.mean[j];

    buffer.resize(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = src.covariates.data() + i * p;
        double l = 0.0;
        for (std::size_t j = 0; j < p; ++j) l += row[j] * shift[j];
        buffer[i] = l;
        top = std::max(top, l);
    }
    double total = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(buffer[i] - top);
        buffer[i] = w;
        total += w;
        weighted += w * (src.primary[i] - src.proxy[i]);
    }
    Rectifier r;
    r.value = weighted / total;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wt = buffer[i] / total;
        const double dev = (src.primary[i] - src.proxy[i]) - r.value;
        var += wt * wt * dev * dev;
    }
    r.variance = var;
    return r;
}

}  // namespace

MeanCovariance cov_components(const DomainData& domain) {
    const auto s = summarize(domain);
    return {s.s_yy / s.n, s.s_ss / s.n, s.s_ys / s.n};
}

EstimateSet estimate_all(std::span<const DomainData> domains, const SimConfig& cfg) {
    (void)cfg;
    if (domains.size() < 2) {
        throw InputError("estimate_all: need at least one source domain and the target");
    }
    const std::size_t sources = domains.size() - 1;
    const DomainData& target = domains.back();
    const auto t = summarize(target);

    EstimateSet out;
    out[index_of(Estimator::primary_only)] = {t.y_mean, t.s_yy / t.n};
    const Estimate proxy{t.s_mean, t.s_ss / t.n};
    out[index_of(Estimator::proxy_only)] = proxy;

    const double m = static_cast<double>(sources);
    double rect = 0.0, rect_var = 0.0;
    double wrect = 0.0, wrect_var = 0.0;
    std::vector<double> buffer;
    for (std::size_t k = 0; k < sources; ++k) {
        const auto s = summarize(domains[k]);
        rect += s.d_mean;
        rect_var += s.s_dd / s.n;
        const auto w = weighted_rectifier(domains[k], target.mean, buffer);
        wrect += w.value;
        wrect_var += w.variance;
    }
    out[index_of(Estimator::ppi)] = {proxy.estimate + rect / m, proxy.variance + rect_var / (m * m)};
    out[index_of(Estimator::ppi_weighted)] = {proxy.estimate + wrect / m,
                                              proxy.variance + wrect_var / (m * m)};
    return out;
}

std::vector<DomainRecord> history_records(std::span<const DomainData> domains, Estimator e) {
    if (domains.size() < 2) {
        throw InputError("history_records: need at least one labeled domain");
    }
    const std::size_t labeled = domains.size() - 1;
    const bool needs_rectifier = e == Estimator::ppi || e == Estimator::ppi_weighted;
    if (needs_rectifier && labeled < 2) {
        throw InputError("history_records: PPI estimators need at least 2 labeled domains");
    }

    std::vector<DomainSummary> summaries;
    summaries.reserve(labeled);
    for (std::size_t k = 0; k < labeled; ++k) summaries.push_back(summarize(domains[k]));

    std::vector<DomainRecord> history(labeled);
    std::vector<double> buffer;
    for (std::size_t k = 0; k < labeled; ++k) {
        const auto& s = summaries[k];
        DomainRecord& r = history[k];
        r.domain_id = "domain_" + std::to_string(k + 1);
        r.theta_hat = s.y_mean;
        r.var_primary = s.s_yy / s.n;
        switch (e) {
            case Estimator::primary_only:
                r.theta_star_hat = s.y_mean;
                r.var_proxy = r.var_primary;
                r.cov_primary_proxy = r.var_primary;
                break;
            case Estimator::proxy_only:
                r.theta_star_hat = s.s_mean;
                r.var_proxy = s.s_ss / s.n;
                r.cov_primary_proxy = s.s_ys / s.n;
                break;
            case Estimator::ppi:
            case Estimator::ppi_weighted: {
                double rect = 0.0, rect_var = 0.0;
                for (std::size_t j = 0; j < labeled; ++j) {
                    if (j == k) continue;
                    if (e == Estimator::ppi) {
                        rect += summaries[j].d_mean;
                        rect_var += summaries[j].s_dd / summaries[j].n;
                    } else {
                        const auto w = weighted_rectifier(domains[j], domains[k].mean, buffer);
                        rect += w.value;
                        rect_var += w.variance;
                    }
                }
                const double m = static_cast<double>(labeled - 1);
                r.theta_star_hat = s.s_mean + rect / m;
                r.var_proxy = s.s_ss / s.n + rect_var / (m * m);
                // The rectifier uses other domains only, so it is uncorrelated with theta_hat.
                r.cov_primary_proxy = s.s_ys / s.n;
                break;
            }
        }
    }
    return history;
}

double exact_prevalence(const SimConfig& cfg, std::span<const double> mu, double delta) {
    // Distribution of the number of coordinates at or above delta.
    std::vector<double> count_prob{1.0};
    for (double m : mu) {
        const double above = 0.5 * std::erfc((delta - m) / std::numbers::sqrt2);
        std::vector<double> next(count_prob.size() + 1, 0.0);
        for (std::size_t c = 0; c < count_prob.size(); ++c) {
            next[c] += count_prob[c] * (1.0 - above);
            next[c + 1] += count_prob[c] * above;
        }
        count_prob = std::move(next);
    }
    const double half_p = 0.5 * static_cast<double>(mu.size());
    double prevalence = 0.0;
    for (std::size_t c = 0; c < count_prob.size(); ++c) {
        prevalence += count_prob[c] * outcome_prob_from_count(static_cast<double>(c) - half_p, cfg);
    }
    return prevalence;
}

double mc_truth(const SimConfig& cfg, Stream& rng) {
    const std::size_t p = cfg.mu_target.size();
    const double half_p = 0.5 * static_cast<double>(p);
    double total = 0.0;
    for (std::size_t m = 0; m < cfg.mc_truth_samples; ++m) {
        std::size_t above = 0;
        for (std::size_t j = 0; j < p; ++j) {
            above += cfg.mu_target[j] + rng.normal() >= 0.0 ? 1 : 0;
        }
        total += outcome_prob_from_count(static_cast<double>(above) - half_p, cfg);
    }
    return total / static_cast<double>(cfg.mc_truth_samples);
}

namespace {

// Stream tags within a replicate.
constexpr std::uint64_t kParamStream = 0;
constexpr std::uint64_t kDomainStream = 1;
constexpr std::uint64_t kBootstrapStream = 2;
constexpr std::uint64_t kTruthStream = ~std::uint64_t{0};

struct ReplicateOutcome {
    // [estimator][adjustment]
    std::array<std::array<ConfidenceInterval, kAdjustments.size()>, kEstimators.size()> ci{};
};

ReplicateOutcome run_replicate(const SimConfig& cfg, std::size_t rep,
                               std::span<const Estimator> estimators) {
    const std::size_t K = cfg.n_domains;
    const std::size_t p = cfg.dim_p;

    // Domain parameters come from their own stream so that replicate r sees
    // the same source means and drift directions for every n and kappa.
    Stream params(cfg.seed, {rep, kParamStream});
    std::vector<std::vector<double>> means(K);
    for (std::size_t k = 0; k + 1 < K; ++k) means[k] = sample_unit_ball(p, params);
    means[K - 1] = cfg.mu_target;
    std::vector<double> thresholds(K, 0.0);
    const double drift_sd = cfg.kappa / std::numbers::sqrt2;
    for (std::size_t k = 0; k + 1 < K; ++k) thresholds[k] = drift_sd * params.normal();

    std::vector<DomainData> domains;
    domains.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        Stream rng(cfg.seed, {rep, kDomainStream, k});
        domains.push_back(gen_domain(cfg, means[k], thresholds[k], rng));
    }

    const auto estimates = estimate_all(domains, cfg);
    ReplicateOutcome out;
    for (Estimator e : estimators) {
        const auto& est = estimates[index_of(e)];
        auto& row = out.ci[index_of(e)];
        row[index_of(Adjustment::none)] = wald_interval(est.estimate, est.variance, cfg.alpha);

        const auto history = history_records(domains, e);
        const TargetRecord target{"target", est.estimate, est.variance, {}, std::nullopt};
        row[index_of(Adjustment::plugin)] = plugin_interval(target, fit_mom(history), cfg.alpha);
        const std::uint64_t boot_seed =
            mix64(cfg.seed ^ mix64(rep * 4 + index_of(e) + (kBootstrapStream << 60)));
        row[index_of(Adjustment::bootstrap)] =
            domain_bootstrap_interval(history, target, cfg.alpha, cfg.bootstrap_draws, boot_seed);
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& cfg, const RunOptions& options) {
    validate(cfg);
    std::vector<Estimator> estimators = options.estimators;
    if (estimators.empty()) estimators.assign(kEstimators.begin(), kEstimators.end());
    for (Estimator e : estimators) {
        if ((e == Estimator::ppi || e == Estimator::ppi_weighted) && cfg.n_domains < 3) {
            throw InputError("PPI estimators with adjustment need n_domains >= 3");
        }
    }

    ExperimentResult result;
    if (cfg.truth == "mc") {
        Stream rng(cfg.seed, {kTruthStream});
        result.truth = mc_truth(cfg, rng);
    } else {
        result.truth = exact_prevalence(cfg, cfg.mu_target, 0.0);
    }

    std::vector<ReplicateOutcome> outcomes(cfg.replicates);
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, cfg.replicates));
    if (workers == 1) {
        for (std::size_t r = 0; r < cfg.replicates; ++r) {
            outcomes[r] = run_replicate(cfg, r, estimators);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < cfg.replicates && !failed; r = next++) {
                    try {
                        outcomes[r] = run_replicate(cfg, r, estimators);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (Estimator e : estimators) {
        for (Adjustment a : kAdjustments) {
            ResultRow row;
            row.kappa = cfg.kappa;
            row.n_domains = cfg.n_domains;
            row.n_per_domain = cfg.n_per_domain;
            row.estimator = e;
            row.adjustment = a;
            row.replicates = cfg.replicates;
            std::size_t covered = 0;
            double length = 0.0;
            for (std::size_t r = 0; r < cfg.replicates; ++r) {
                const auto& ci = outcomes[r].ci[index_of(e)][index_of(a)];
                const bool hit = ci.contains(result.truth);
                covered += hit ? 1 : 0;
                length += ci.width();
                result.replicates.push_back({r, e, a, ci, hit});
            }
            row.coverage = static_cast<double>(covered) / static_cast<double>(cfg.replicates);
            row.mean_length = length / static_cast<double>(cfg.replicates);
            result.rows.push_back(row);
        }
    }
    return result;
}

}  // namespace proxycal::sim

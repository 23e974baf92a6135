#include "proxycal/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "proxycal/random.hpp"

namespace proxycal {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

// Acklam's coefficients.
constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                        1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                        6.680131188771972e+01,  -1.328068155288572e+01};
constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                        -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                        3.754408661907416e+00};

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    }
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double critical_value(double alpha) {
    check_alpha(alpha);
    return normal_quantile(1.0 - 0.5 * alpha);
}

ConfidenceInterval wald_interval(double center, double variance, double alpha) {
    if (!std::isfinite(center) || !std::isfinite(variance)) {
        throw std::invalid_argument("wald_interval: non-finite input");
    }
    if (variance < 0.0) {
        throw std::invalid_argument("wald_interval: negative variance");
    }
    const double half = critical_value(alpha) * std::sqrt(variance);
    return {center - half, center + half, 1.0 - alpha};
}

ConfidenceInterval plugin_interval(const TargetRecord& target, const BiasModel& model,
                                   double alpha) {
    validate(target);
    return wald_interval(debias(target, model), target.var_proxy + model.gamma2, alpha);
}

double empirical_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("empirical_quantile: empty sample");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval domain_bootstrap_interval(std::span<const double> diffs,
                                             std::span<const double> diff_vars,
                                             double target_estimate, double target_var,
                                             double alpha, std::size_t draws,
                                             std::uint64_t seed) {
    check_alpha(alpha);
    if (diffs.empty()) {
        throw InputError("domain bootstrap: history is empty");
    }
    if (diffs.size() != diff_vars.size()) {
        throw std::invalid_argument("domain bootstrap: diffs and diff_vars differ in length");
    }
    if (draws < 2) {
        throw std::invalid_argument("domain bootstrap: need at least 2 draws");
    }
    if (!std::isfinite(target_estimate) || !std::isfinite(target_var) || target_var < 0.0) {
        throw std::invalid_argument("domain bootstrap: invalid target estimate or variance");
    }
    for (std::size_t k = 0; k < diffs.size(); ++k) {
        if (!std::isfinite(diffs[k]) || !std::isfinite(diff_vars[k]) || diff_vars[k] < 0.0) {
            throw std::invalid_argument("domain bootstrap: invalid history difference");
        }
    }

    const std::size_t m = diffs.size();
    const auto count = static_cast<double>(m);
    std::vector<std::size_t> picks(m);
    std::vector<double> theta(draws);
    for (std::size_t draw = 0; draw < draws; ++draw) {
        Stream rng(seed, {draw});
        double sum = 0.0;
        double var_sum = 0.0;
        for (auto& pick : picks) {
            pick = static_cast<std::size_t>(rng.index(m));
            sum += diffs[pick];
            var_sum += diff_vars[pick];
        }
        const double rho = sum / count;
        double ss = 0.0;
        for (std::size_t pick : picks) {
            const double dev = diffs[pick] - rho;
            ss += dev * dev;
        }
        const double gamma2 = std::max(0.0, ss / count - var_sum / count);
        theta[draw] = target_estimate - rho + std::sqrt(target_var + gamma2) * rng.normal();
    }
    std::sort(theta.begin(), theta.end());
    return {empirical_quantile(theta, 0.5 * alpha), empirical_quantile(theta, 1.0 - 0.5 * alpha),
            1.0 - alpha};
}

ConfidenceInterval domain_bootstrap_interval(std::span<const DomainRecord> history,
                                             const TargetRecord& target, double alpha,
                                             std::size_t draws, std::uint64_t seed) {
    if (history.empty()) {
        throw InputError("domain bootstrap: history is empty");
    }
    validate(target);
    std::vector<double> diffs;
    std::vector<double> vars;
    for (const auto& record : history) {
        const auto s = diff_stats(record);
        diffs.push_back(s.d);
        vars.push_back(s.diff_var);
    }
    return domain_bootstrap_interval(diffs, vars, target.theta_star_hat, target.var_proxy, alpha,
                                     draws, seed);
}

}  // namespace proxycal

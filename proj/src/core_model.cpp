#include "proxycal/core_model.hpp"

#include <algorithm>
#include <cmath>

namespace proxycal {

namespace {

constexpr double kCauchySchwarzSlack = 1e-12;

void require_finite(double value, const std::string& id, const char* field) {
    if (!std::isfinite(value)) {
        throw InputError("domain '" + id + "': " + field + " is not finite");
    }
}

}  // namespace

void validate(const DomainRecord& record) {
    const auto& id = record.domain_id;
    require_finite(record.theta_hat, id, "theta_hat");
    require_finite(record.theta_star_hat, id, "theta_star_hat");
    require_finite(record.var_primary, id, "var_primary");
    require_finite(record.var_proxy, id, "var_proxy");
    require_finite(record.cov_primary_proxy, id, "cov_primary_proxy");
    if (record.var_primary < 0.0 || record.var_proxy < 0.0) {
        throw InputError("domain '" + id + "': negative variance");
    }
    const double product = record.var_primary * record.var_proxy;
    const double cov2 = record.cov_primary_proxy * record.cov_primary_proxy;
    if (cov2 - product > kCauchySchwarzSlack * std::max(cov2, product)) {
        throw InputError("domain '" + id +
                         "': cov_primary_proxy violates Cauchy-Schwarz (cov^2 > var_primary*var_proxy)");
    }
    for (double c : record.context) {
        require_finite(c, id, "context");
    }
    if (record.timestamp) {
        require_finite(*record.timestamp, id, "timestamp");
    }
}

void validate(const TargetRecord& target) {
    const auto& id = target.domain_id;
    require_finite(target.theta_star_hat, id, "theta_star_hat");
    require_finite(target.var_proxy, id, "var_proxy");
    if (target.var_proxy < 0.0) {
        throw InputError("target '" + id + "': negative var_proxy");
    }
    for (double c : target.context) {
        require_finite(c, id, "context");
    }
    if (target.timestamp) {
        require_finite(*target.timestamp, id, "timestamp");
    }
}

DiffStats diff_stats(const DomainRecord& record) {
    validate(record);
    DiffStats out;
    out.d = record.theta_star_hat - record.theta_hat;
    // Rounding inside the Cauchy-Schwarz slack can leave a tiny negative value.
    out.diff_var = std::max(
        0.0, record.var_primary + record.var_proxy - 2.0 * record.cov_primary_proxy);
    return out;
}

BiasModel fit_mom_from_diffs(std::vector<double> diffs, std::vector<double> diff_vars) {
    if (diffs.empty()) {
        throw InputError("fit_mom: history is empty");
    }
    if (diffs.size() != diff_vars.size()) {
        throw std::invalid_argument("fit_mom: diffs and diff_vars differ in length");
    }
    const auto count = static_cast<double>(diffs.size());

    double sum = 0.0;
    for (double d : diffs) sum += d;
    const double mean = sum / count;

    double ss = 0.0;
    double sv = 0.0;
    for (std::size_t k = 0; k < diffs.size(); ++k) {
        const double dev = diffs[k] - mean;
        ss += dev * dev;
        sv += diff_vars[k];
    }

    BiasModel model;
    model.rho = mean;
    model.n_domains = diffs.size();
    model.insufficient_domains = diffs.size() < 2;
    model.gamma2_raw = model.insufficient_domains ? 0.0 : ss / count - sv / count;
    if (model.insufficient_domains) {
        model.gamma2 = 0.0;
    } else {
        model.gamma2_truncated = model.gamma2_raw < 0.0;
        model.gamma2 = std::max(0.0, model.gamma2_raw);
    }
    model.diffs = std::move(diffs);
    model.diff_vars = std::move(diff_vars);
    return model;
}

BiasModel fit_mom(std::span<const DomainRecord> history) {
    if (history.empty()) {
        throw InputError("fit_mom: history is empty");
    }
    std::vector<double> diffs;
    std::vector<double> vars;
    diffs.reserve(history.size());
    vars.reserve(history.size());
    for (const auto& record : history) {
        const auto s = diff_stats(record);
        diffs.push_back(s.d);
        vars.push_back(s.diff_var);
    }
    return fit_mom_from_diffs(std::move(diffs), std::move(vars));
}

double debias(const TargetRecord& target, const BiasModel& model) {
    return target.theta_star_hat - model.rho;
}

}  // namespace proxycal

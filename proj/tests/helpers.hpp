#pragma once

#include <string>
#include <vector>

#include "proxycal/core_model.hpp"

namespace testing_helpers {

inline proxycal::DomainRecord record(std::string id, double theta, double theta_star, double v0,
                                     double v1, double c) {
    proxycal::DomainRecord r;
    r.domain_id = std::move(id);
    r.theta_hat = theta;
    r.theta_star_hat = theta_star;
    r.var_primary = v0;
    r.var_proxy = v1;
    r.cov_primary_proxy = c;
    return r;
}

// History whose differences and difference variances are exactly d and v.
inline std::vector<proxycal::DomainRecord> history_from_diffs(const std::vector<double>& d,
                                                              const std::vector<double>& v) {
    std::vector<proxycal::DomainRecord> h;
    for (std::size_t k = 0; k < d.size(); ++k) {
        h.push_back(record("d" + std::to_string(k), 0.0, d[k], v[k], 0.0, 0.0));
    }
    return h;
}

inline proxycal::TargetRecord target(double theta_star, double var) {
    proxycal::TargetRecord t;
    t.domain_id = "target";
    t.theta_star_hat = theta_star;
    t.var_proxy = var;
    return t;
}

}  // namespace testing_helpers

#pragma once

// Reference computations used only by the tests. They deliberately take a
// different route from the library (long double, explicit enumeration,
// bisection) so that agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

struct Moments {
    long double rho = 0;
    long double gamma2 = 0;
    long double spread = 0;  // weighted spread term before subtracting noise
    long double noise = 0;
};

// Weighted moments with explicit weights; uniform weights give the unweighted fit.
inline Moments weighted_moments(const std::vector<double>& d, const std::vector<double>& v,
                                const std::vector<double>& w) {
    Moments m;
    long double wsum = 0;
    for (std::size_t k = 0; k < d.size(); ++k) wsum += w[k];
    for (std::size_t k = 0; k < d.size(); ++k) m.rho += (static_cast<long double>(w[k]) / wsum) * d[k];
    for (std::size_t k = 0; k < d.size(); ++k) {
        const long double wk = static_cast<long double>(w[k]) / wsum;
        const long double dev = static_cast<long double>(d[k]) - m.rho;
        m.spread += wk * dev * dev;
        m.noise += wk * v[k];
    }
    m.gamma2 = std::max<long double>(0, m.spread - m.noise);
    return m;
}

inline Moments moments(const std::vector<double>& d, const std::vector<double>& v) {
    return weighted_moments(d, v, std::vector<double>(d.size(), 1.0));
}

inline long double normal_cdf(long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); }

// A finite mixture of normals; zero-variance components are point masses.
struct Mixture {
    std::vector<double> means;
    std::vector<double> sds;

    long double cdf(long double x) const {
        long double total = 0;
        for (std::size_t i = 0; i < means.size(); ++i) {
            if (sds[i] == 0.0) {
                total += x >= means[i] ? 1.0L : 0.0L;
            } else {
                total += normal_cdf((x - means[i]) / sds[i]);
            }
        }
        return total / static_cast<long double>(means.size());
    }

    long double density(long double x) const {
        long double total = 0;
        for (std::size_t i = 0; i < means.size(); ++i) {
            if (sds[i] == 0.0) continue;
            const long double z = (x - means[i]) / sds[i];
            total += std::exp(-0.5L * z * z) / (sds[i] * std::sqrt(2.0L * 3.14159265358979323846L));
        }
        return total / static_cast<long double>(means.size());
    }

    // inf{x : F(x) >= p} by bisection.
    double quantile(double p) const {
        long double lo = *std::min_element(means.begin(), means.end()) - 50.0L;
        long double hi = *std::max_element(means.begin(), means.end()) + 50.0L;
        for (int it = 0; it < 400; ++it) {
            const long double mid = 0.5L * (lo + hi);
            if (cdf(mid) >= p) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return static_cast<double>(hi);
    }
};

// Exact law of the domain-bootstrap draw: every one of the m^m equally likely
// resamples contributes N(theta* - rho_b, var + gamma2_b).
inline Mixture bootstrap_mixture(const std::vector<double>& d, const std::vector<double>& v,
                                 double target, double target_var) {
    const std::size_t m = d.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < m; ++i) total *= m;
    Mixture mix;
    std::vector<double> bd(m), bv(m);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < m; ++i) {
            bd[i] = d[c % m];
            bv[i] = v[c % m];
            c /= m;
        }
        const auto mo = moments(bd, bv);
        mix.means.push_back(static_cast<double>(target - mo.rho));
        mix.sds.push_back(std::sqrt(static_cast<double>(target_var + mo.gamma2)));
    }
    return mix;
}

// Target prevalence by explicit enumeration of all 2^P above/below patterns.
inline double enumerate_prevalence(const std::vector<double>& mu, double delta, double lambda1,
                                   double phi1) {
    const std::size_t p = mu.size();
    double total = 0.0;
    for (std::uint32_t pattern = 0; pattern < (1u << p); ++pattern) {
        double prob = 1.0;
        int count = 0;
        for (std::size_t j = 0; j < p; ++j) {
            const double above = 1.0 - static_cast<double>(normal_cdf(delta - mu[j]));
            if (pattern & (1u << j)) {
                prob *= above;
                ++count;
            } else {
                prob *= 1.0 - above;
            }
        }
        const double t = count - 0.5 * static_cast<double>(p);
        total += prob / (1.0 + std::exp(-lambda1 * t + phi1));
    }
    return total;
}

}  // namespace oracle

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "proxycal/diagnostics.hpp"

using namespace proxycal;
using testing_helpers::record;

namespace {

std::vector<DomainRecord> biased_three() {
    return {record("a", 0.3, 0.3, 1e-6, 1e-6, 0.0), record("b", 0.6, 0.6, 1e-6, 1e-6, 0.0),
            record("c", 0.2, 10.2, 1e-6, 1e-6, 0.0)};
}

std::vector<DomainRecord> matched(std::size_t n) {
    std::vector<DomainRecord> h;
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = 0.1 * static_cast<double>(k);
        h.push_back(record("m" + std::to_string(k), theta, theta, 0.004, 0.002, 0.0028));
    }
    return h;
}

// Direct enumeration for the three-domain fixture: six Wald intervals and
// three leave-one-out fits written out by hand.
double enumerate_three(LooMethod method, double alpha) {
    const auto h = biased_three();
    const double z = normal_quantile(1.0 - alpha / 2);
    int hits = 0;
    for (int k = 0; k < 3; ++k) {
        double center = h[k].theta_star_hat;
        double var = h[k].var_proxy;
        if (method == LooMethod::plugin) {
            double d[2], v[2];
            int j = 0;
            for (int i = 0; i < 3; ++i) {
                if (i == k) continue;
                d[j] = h[i].theta_star_hat - h[i].theta_hat;
                v[j] = h[i].var_primary + h[i].var_proxy;
                ++j;
            }
            const double rho = 0.5 * (d[0] + d[1]);
            const double spread = 0.5 * ((d[0] - rho) * (d[0] - rho) + (d[1] - rho) * (d[1] - rho));
            const double gamma2 = std::max(0.0, spread - 0.5 * (v[0] + v[1]));
            center -= rho;
            var += gamma2;
        }
        const double plo = center - z * std::sqrt(var), phi = center + z * std::sqrt(var);
        const double qlo = h[k].theta_hat - z * std::sqrt(h[k].var_primary);
        const double qhi = h[k].theta_hat + z * std::sqrt(h[k].var_primary);
        hits += (plo <= qhi && qlo <= phi) ? 1 : 0;
    }
    return hits / 3.0;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("intervals_overlap uses closed intervals") {
    const ConfidenceInterval a{0, 1, 0.95};
    CHECK_FALSE(intervals_overlap(a, {2, 3, 0.95}));
    CHECK(intervals_overlap(a, {0.5, 0.7, 0.95}));
    CHECK(intervals_overlap(a, {1, 2, 0.95}));
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 500; ++i) {
        double x1 = u(gen), x2 = u(gen), y1 = u(gen), y2 = u(gen);
        const ConfidenceInterval p{std::min(x1, x2), std::max(x1, x2), 0.9};
        const ConfidenceInterval q{std::min(y1, y2), std::max(y1, y2), 0.9};
        CHECK(intervals_overlap(p, q) == intervals_overlap(q, p));
    }
}

TEST_CASE("matched history overlaps for every method") {
    const auto h = matched(6);
    for (auto method : {LooMethod::unadjusted, LooMethod::plugin, LooMethod::bootstrap}) {
        CHECK(loo_overlap_rate(h, 0.05, {method, 500, 1}) == 1.0);
    }
    const std::vector<double> alphas{0.01, 0.05, 0.2, 0.5};
    for (const auto& [alpha, rate] : overlap_curve(h, alphas, {LooMethod::plugin, 500, 1})) {
        CHECK(rate == 1.0);
    }
}

TEST_CASE("three-domain biased fixture matches hand enumeration") {
    const auto h = biased_three();
    const double unadjusted = enumerate_three(LooMethod::unadjusted, 0.05);
    const double plugin = enumerate_three(LooMethod::plugin, 0.05);
    CHECK(unadjusted == doctest::Approx(2.0 / 3.0));
    CHECK(plugin == doctest::Approx(2.0 / 3.0));
    CHECK(loo_overlap_rate(h, 0.05, {LooMethod::unadjusted}) == doctest::Approx(unadjusted));
    CHECK(loo_overlap_rate(h, 0.05, {LooMethod::plugin}) == doctest::Approx(plugin));
    CHECK(plugin >= unadjusted);

    const std::vector<double> alphas{0.01, 0.05, 0.2};
    for (auto method : {LooMethod::unadjusted, LooMethod::plugin}) {
        const auto curve = overlap_curve(h, alphas, {method});
        REQUIRE(curve.size() == 3);
        for (std::size_t i = 0; i < curve.size(); ++i) {
            CHECK(curve[i].second == doctest::Approx(enumerate_three(method, alphas[i])));
            if (i) CHECK(curve[i].second <= curve[i - 1].second);
        }
    }
    const std::vector<double> single{0.05};
    CHECK(overlap_curve(h, single, {LooMethod::plugin})[0].second ==
          loo_overlap_rate(h, 0.05, {LooMethod::plugin}));
}

TEST_CASE("overlap rate is a multiple of one over the domain count") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> bias(0.05, 0.03);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<DomainRecord> h;
        const int m = 3 + trial % 7;
        for (int k = 0; k < m; ++k) {
            h.push_back(record("k" + std::to_string(k), 0.4, 0.4 + bias(gen), 2e-4, 1e-4, 0.0));
        }
        for (auto method : {LooMethod::unadjusted, LooMethod::plugin}) {
            const double rate = loo_overlap_rate(h, 0.05, {method});
            const double scaled = rate * m;
            CHECK(std::fabs(scaled - std::round(scaled)) < 1e-12);
            CHECK(rate >= 0.0);
            CHECK(rate <= 1.0);
        }
    }
}

TEST_CASE("normalized_width") {
    std::vector<DomainRecord> same, quarter;
    for (int k = 0; k < 5; ++k) {
        const double v = 0.001 * (k + 1);
        same.push_back(record("s" + std::to_string(k), 0.1 * k, 0.1 * k + 0.01, v, v, 0.0));
        quarter.push_back(record("q" + std::to_string(k), 0.1 * k, 0.1 * k, v, v / 4, 0.0));
    }
    CHECK(normalized_width(same, 0.05, {LooMethod::unadjusted}) == doctest::Approx(1.0));
    CHECK(normalized_width(quarter, 0.05, {LooMethod::unadjusted}) == doctest::Approx(0.5));
    CHECK(normalized_width(same, 0.05, {LooMethod::plugin}) >=
          normalized_width(same, 0.05, {LooMethod::unadjusted}));
    const auto h = biased_three();
    CHECK(normalized_width(h, 0.05, {LooMethod::plugin}) >=
          normalized_width(h, 0.05, {LooMethod::unadjusted}));

    std::vector<DomainRecord> flat{record("x", 0, 0.1, 0, 0.01, 0), record("y", 0, 0.2, 0, 0.01, 0)};
    CHECK_THROWS_AS(normalized_width(flat, 0.05, {LooMethod::unadjusted}), InputError);
}

TEST_CASE("plugin LOO intervals contain the debiased unadjusted interval") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<DomainRecord> h;
    for (int k = 0; k < 9; ++k) {
        h.push_back(record("k" + std::to_string(k), 0.5, 0.55 + noise(gen), 1e-4, 2e-4, 5e-5));
    }
    const auto plug = loo_evaluate(h, 0.05, {LooMethod::plugin});
    const auto raw = loo_evaluate(h, 0.05, {LooMethod::unadjusted});
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double shift = plug[k].proxy.center() - raw[k].proxy.center();
        CHECK(plug[k].proxy.lower <= raw[k].proxy.lower + shift + 1e-15);
        CHECK(plug[k].proxy.upper >= raw[k].proxy.upper + shift - 1e-15);
        CHECK(plug[k].proxy.width() >= raw[k].proxy.width());
    }
}

TEST_CASE("held-out primary estimate never reaches the fit") {
    std::vector<DomainRecord> h;
    for (int k = 0; k < 6; ++k) {
        h.push_back(record("k" + std::to_string(k), 0.1 * k, 0.1 * k + 0.02 * (k % 3), 1e-3, 1e-3,
                           2e-4));
    }
    for (auto method : {LooMethod::plugin, LooMethod::bootstrap}) {
        const LooOptions opts{method, 400, 21};
        const auto base = loo_evaluate(h, 0.1, opts);
        for (std::size_t k = 0; k < h.size(); ++k) {
            auto poisoned = h;
            poisoned[k].theta_hat = 1e6;
            const auto res = loo_evaluate(poisoned, 0.1, opts);
            CHECK(res[k].proxy.lower == base[k].proxy.lower);
            CHECK(res[k].proxy.upper == base[k].proxy.upper);
            CHECK(res[k].primary.lower != base[k].primary.lower);
        }
    }
}

TEST_CASE("LOO needs two domains and a known method name") {
    std::vector<DomainRecord> one{record("a", 0, 0, 1, 1, 0)};
    CHECK_THROWS_AS(loo_overlap_rate(one, 0.05, {}), InputError);
    CHECK(parse_loo_method("bootstrap") == LooMethod::bootstrap);
    CHECK_THROWS_AS(parse_loo_method("magic"), InputError);
}

}  // TEST_SUITE

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "proxycal/intervals.hpp"

using namespace proxycal;
using testing_helpers::history_from_diffs;
using testing_helpers::target;

TEST_SUITE("intervals") {

TEST_CASE("normal_quantile reference values") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    // scipy.stats.norm.ppf
    CHECK(std::fabs(normal_quantile(0.975) - 1.959963984540054) < 1e-12);
    CHECK(std::fabs(normal_quantile(0.025) + 1.959963984540054) < 1e-12);
    CHECK(std::fabs(normal_quantile(1e-10) + 6.361340902404056) < 1e-9);
    CHECK(std::fabs(normal_quantile(0.84135) - 1.0000217133229992) < 1e-12);
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(NAN), std::invalid_argument);
}

TEST_CASE("normal_quantile inverts the normal CDF across the range") {
    for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.99,
                     0.9999, 1 - 1e-8}) {
        const double x = normal_quantile(p);
        const auto back = static_cast<double>(oracle::normal_cdf(x));
        INFO("p=" << p);
        CHECK(std::fabs(back - p) <= 1e-12 * std::min(p, 1.0 - p) + 4e-16);
        if (p >= 1e-4) CHECK(normal_quantile(1.0 - p) == doctest::Approx(-x).epsilon(1e-10));
    }
}

TEST_CASE("wald_interval") {
    auto ci = wald_interval(0.5, 0.0, 0.05);
    CHECK(ci.lower == 0.5);
    CHECK(ci.upper == 0.5);
    ci = wald_interval(0.5, 0.0004, 0.05);
    CHECK(ci.lower == doctest::Approx(0.460801).epsilon(1e-6));
    CHECK(ci.upper == doctest::Approx(0.539199).epsilon(1e-6));
    CHECK(ci.level == doctest::Approx(0.95));
    ci = wald_interval(0.0, 1.0, 0.3173);
    CHECK(ci.lower == doctest::Approx(-1.0000217133229992).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(1.0000217133229992).epsilon(1e-12));
    CHECK_THROWS(wald_interval(0.0, -1.0, 0.05));
    CHECK_THROWS(wald_interval(0.0, 1.0, 0.0));
    CHECK_THROWS(wald_interval(INFINITY, 1.0, 0.05));
}

TEST_CASE("plugin_interval") {
    BiasModel m;
    auto ci = plugin_interval(target(0.5, 0.0004), m, 0.05);
    const auto wald = wald_interval(0.5, 0.0004, 0.05);
    CHECK(ci.lower == wald.lower);
    CHECK(ci.upper == wald.upper);

    m.rho = 0.02;
    m.gamma2 = 0.0005;
    ci = plugin_interval(target(0.5, 0.0004), m, 0.05);
    CHECK(ci.lower == doctest::Approx(0.421201).epsilon(1e-6));
    CHECK(ci.upper == doctest::Approx(0.538799).epsilon(1e-6));

    m.rho = 0.5;
    m.gamma2 = 0.0;
    ci = plugin_interval(target(1.0, 0.0), m, 0.05);
    CHECK(ci.lower == 0.5);
    CHECK(ci.upper == 0.5);
}

TEST_CASE("plugin_interval width, monotonicity and translation") {
    BiasModel m;
    m.rho = 0.1;
    double last_width = 0.0;
    for (double g : {0.0, 1e-4, 1e-3, 0.01, 0.1}) {
        m.gamma2 = g;
        const auto ci = plugin_interval(target(0.3, 0.002), m, 0.05);
        const double expected = 2.0 * critical_value(0.05) * std::sqrt(0.002 + g);
        CHECK(ci.width() == doctest::Approx(expected).epsilon(1e-14));
        CHECK(ci.width() >= last_width);
        last_width = ci.width();
    }
    last_width = 0.0;
    for (double alpha : {0.5, 0.3, 0.1, 0.05, 0.01}) {
        const auto ci = plugin_interval(target(0.3, 0.002), m, alpha);
        CHECK(ci.width() >= last_width);
        last_width = ci.width();
    }
    const auto a = plugin_interval(target(0.3, 0.002), m, 0.05);
    const auto b = plugin_interval(target(1.3, 0.002), m, 0.05);
    CHECK(b.lower - a.lower == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.upper - a.upper == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical_quantile interpolates order statistics") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    CHECK(empirical_quantile(x, 0.0) == 1.0);
    CHECK(empirical_quantile(x, 1.0) == 4.0);
    CHECK(empirical_quantile(x, 0.5) == doctest::Approx(2.5));
    CHECK(empirical_quantile(x, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("domain bootstrap with one domain approaches the plug-in interval") {
    const auto history = history_from_diffs({0.1}, {0.0});
    const auto ci = domain_bootstrap_interval(history, target(0.5, 0.0004), 0.05, 100000, 11);
    CHECK(std::fabs(ci.lower - 0.360801) < 0.003);
    CHECK(std::fabs(ci.upper - 0.439199) < 0.003);
    BiasModel m;
    m.rho = 0.1;
    const auto plug = plugin_interval(target(0.5, 0.0004), m, 0.05);
    CHECK(std::fabs(ci.lower - plug.lower) < 0.01 * plug.width());
    CHECK(std::fabs(ci.upper - plug.upper) < 0.01 * plug.width());
}

TEST_CASE("domain bootstrap with identical domains") {
    const auto history = history_from_diffs({0.2, 0.2, 0.2, 0.2}, {0.01, 0.01, 0.01, 0.01});
    const auto ci = domain_bootstrap_interval(history, target(0.6, 0.001), 0.05, 100000, 3);
    BiasModel m;
    m.rho = 0.2;
    const auto plug = plugin_interval(target(0.6, 0.001), m, 0.05);
    CHECK(std::fabs(ci.lower - plug.lower) < 0.01 * plug.width());
    CHECK(std::fabs(ci.upper - plug.upper) < 0.01 * plug.width());
}

TEST_CASE("domain bootstrap matches the exhaustive resampling law") {
    const std::vector<double> d{0.0, 0.2, 0.4};
    const std::vector<double> v{0.0, 0.0, 0.0};
    const double alpha = 0.10;
    const std::size_t draws = 200000;
    const auto ci =
        domain_bootstrap_interval(history_from_diffs(d, v), target(1.0, 0.0), alpha, draws, 99);
    const auto mix = oracle::bootstrap_mixture(d, v, 1.0, 0.0);
    CHECK(mix.means.size() == 27);
    for (auto [p, got] : {std::pair{alpha / 2, ci.lower}, std::pair{1 - alpha / 2, ci.upper}}) {
        const double q = mix.quantile(p);
        const double f = static_cast<double>(mix.density(q));
        // Five standard errors of a sample quantile.
        const double tol = 5.0 * std::sqrt(p * (1 - p) / static_cast<double>(draws)) / f;
        INFO("p=" << p << " oracle=" << q << " got=" << got << " tol=" << tol);
        CHECK(std::fabs(got - q) < tol);
    }
}

TEST_CASE("domain bootstrap is reproducible and validates input") {
    const auto history = history_from_diffs({0.0, 0.1, 0.5, 0.2}, {0.01, 0.0, 0.02, 0.0});
    const auto a = domain_bootstrap_interval(history, target(0.4, 0.001), 0.05, 2000, 5);
    const auto b = domain_bootstrap_interval(history, target(0.4, 0.001), 0.05, 2000, 5);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    const auto c = domain_bootstrap_interval(history, target(0.4, 0.001), 0.05, 2000, 6);
    CHECK((c.lower != a.lower || c.upper != a.upper));
    // Translation equivariance holds draw by draw for a fixed seed.
    const auto shifted = domain_bootstrap_interval(history, target(1.4, 0.001), 0.05, 2000, 5);
    CHECK(shifted.lower - a.lower == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shifted.upper - a.upper == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(domain_bootstrap_interval(std::vector<DomainRecord>{}, target(0, 0), 0.05,
                                              100, 1),
                    InputError);
    CHECK_THROWS(domain_bootstrap_interval(history, target(0, 0), 0.05, 1, 1));
    CHECK_THROWS(domain_bootstrap_interval(history, target(NAN, 0), 0.05, 100, 1));
}

}  // TEST_SUITE

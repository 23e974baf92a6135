#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "proxycal/io.hpp"

using namespace proxycal;

namespace {

const char* kHeader = "domain_id,theta_hat,theta_star_hat,var_primary,var_proxy,cov_primary_proxy";

std::string error_of(auto&& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(gen) * std::pow(10.0, u(gen));
        CHECK(io::parse_double(io::format_double(x), "x") == x);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::parse_double(io::format_double(1.0 / 3.0), "x") == 1.0 / 3.0);
    CHECK_THROWS_AS(io::parse_double("1.5x", "field"), InputError);
    CHECK_THROWS_AS(io::parse_double("", "field"), InputError);
}

TEST_CASE("history parsing with context and timestamps") {
    std::istringstream in(std::string("# comment\n") + kHeader +
                          ",context_b,timestamp,context_a\n"
                          "a,0.5,0.6,0.01,0.02,0.005,1.5,10,-2\n"
                          "\n"
                          "b,0.4,0.45,0.01,0.01,0,0.5,11,3\n");
    const auto h = io::parse_history(in, "h.csv");
    REQUIRE(h.size() == 2);
    CHECK(h[0].domain_id == "a");
    CHECK(h[0].theta_star_hat == 0.6);
    CHECK(h[0].context == std::vector<double>{1.5, -2});
    CHECK(h[1].timestamp == 11.0);
}

TEST_CASE("tab-separated history") {
    std::istringstream in(
        "domain_id\ttheta_hat\ttheta_star_hat\tvar_primary\tvar_proxy\tcov_primary_proxy\n"
        "x\t0.1\t0.2\t0.01\t0.01\t0\n");
    CHECK(io::parse_history(in, "t.tsv").size() == 1);
}

TEST_CASE("history validation errors carry location") {
    std::istringstream missing("domain_id,theta_hat,theta_star_hat,var_primary,var_proxy\nx,1,1,1,1\n");
    const auto m = error_of([&] { io::parse_history(missing, "h.csv"); });
    CHECK(m.find("cov_primary_proxy") != std::string::npos);

    std::istringstream bad(std::string(kHeader) + "\na,0.1,0.2,0.01,0.01,0\nb,0.1,oops,0.01,0.01,0\n");
    const auto b = error_of([&] { io::parse_history(bad, "h.csv"); });
    CHECK(b.find("3") != std::string::npos);
    CHECK(b.find("theta_star_hat") != std::string::npos);

    std::istringstream dup(std::string(kHeader) + "\na,0.1,0.2,0.01,0.01,0\na,0.1,0.2,0.01,0.01,0\n");
    CHECK(error_of([&] { io::parse_history(dup, "h.csv"); }).find("duplicate") != std::string::npos);

    std::istringstream cs(std::string(kHeader) + "\nsite_9,0.1,0.2,0.01,0.01,0.5\n");
    CHECK(error_of([&] { io::parse_history(cs, "h.csv"); }).find("site_9") != std::string::npos);

    std::istringstream ragged(std::string(kHeader) + "\na,0.1,0.2\n");
    CHECK_THROWS_AS(io::parse_history(ragged, "h.csv"), InputError);
}

TEST_CASE("target parsing") {
    std::istringstream in("domain_id,theta_star_hat,var_proxy,context_x\nt1,0.5,0.0004,1\n");
    const auto t = io::parse_targets(in, "t.csv");
    REQUIRE(t.size() == 1);
    CHECK(t[0].var_proxy == 0.0004);
    CHECK(t[0].context == std::vector<double>{1.0});
    std::istringstream neg("domain_id,theta_star_hat,var_proxy\nt1,0.5,-1\n");
    CHECK_THROWS_AS(io::parse_targets(neg, "t.csv"), InputError);
}

TEST_CASE("model files round-trip exactly") {
    BiasModel m;
    m.rho = 0.1 + 0.2;
    m.gamma2 = 1.0 / 3.0;
    m.gamma2_raw = 1.0 / 3.0;
    m.n_domains = 3;
    m.diffs = {0.1, 0.7, 0.1 / 3};
    m.diff_vars = {0.005, 0.0, 1e-300};
    std::stringstream s;
    io::write_model(s, m, {"a", "b", "c"});
    const auto back = io::parse_model(s, "m.txt");
    CHECK(back.rho == m.rho);
    CHECK(back.gamma2 == m.gamma2);
    CHECK(back.n_domains == 3);
    CHECK(back.diffs == m.diffs);
    CHECK(back.diff_vars == m.diff_vars);
    CHECK_FALSE(back.insufficient_domains);

    std::istringstream partial("rho = 0.1\n");
    CHECK_THROWS_AS(io::parse_model(partial, "m.txt"), InputError);
}

TEST_CASE("simulation config grid") {
    std::istringstream in(
        "# smoke\nreplicates = 10\nn_domains = 5\nn_per_domain = 100\nkappa = 0, 1\nseed = 9\n"
        "estimators = ppi,proxy_only\n");
    const auto g = io::parse_sim_config(in, "c.txt");
    const auto cells = g.cells();
    REQUIRE(cells.size() == 2);
    CHECK(cells[1].kappa == 1.0);
    CHECK(cells[0].n_domains == 5);
    CHECK(cells[0].seed == 9);
    CHECK(g.estimators.size() == 2);

    std::istringstream unknown("replicates = 1\nbogus = 3\nalso_bad = 1\n");
    const auto msg = error_of([&] { io::parse_sim_config(unknown, "c.txt"); });
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("also_bad") != std::string::npos);

    std::istringstream dupkey("seed = 1\nseed = 2\n");
    CHECK_THROWS_AS(io::parse_sim_config(dupkey, "c.txt"), InputError);
    CHECK_THROWS_AS(io::parse_estimator("oracle"), InputError);
}

}  // TEST_SUITE

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxycal/intervals.hpp"

// Command implementations behind the proxycal CLI. Each returns the process
// exit status: 0 when every output was written, 2 for invalid input, 1 for
// internal errors. Results go to `out`, warnings and errors to `err`.
namespace proxycal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

using Path = std::filesystem::path;

int cmd_fit(const Path& history, const Path& out_model, std::ostream& out, std::ostream& err);

struct AdjustArgs {
    std::optional<Path> model;
    std::optional<Path> history;
    Path target;
    double alpha = 0.05;
    std::string method = "plugin";  // plugin | bootstrap | contextual
    std::size_t draws = kDefaultBootstrapDraws;
    std::uint64_t seed = 0;
    std::optional<double> beta;            // contextual only
    std::optional<double> time_bandwidth;  // contextual only
    std::optional<Path> out;
};
int cmd_adjust(const AdjustArgs& args, std::ostream& out, std::ostream& err);

struct LooArgs {
    Path history;
    std::vector<double> alphas{0.05};
    std::vector<std::string> methods{"unadjusted", "plugin"};
    std::size_t draws = kDefaultBootstrapDraws;
    std::uint64_t seed = 0;
    std::optional<Path> out;
    std::optional<Path> domains_out;  // per-domain intervals
};
int cmd_loo(const LooArgs& args, std::ostream& out, std::ostream& err);

struct SimulateArgs {
    Path config;
    Path out;
    std::size_t threads = 1;
    std::optional<Path> replicates_out;
};
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct TuneArgs {
    Path history;
    std::vector<double> target_context;
    std::vector<double> beta_grid;  // empty = default 41-point log grid
    std::optional<Path> out;
};
int cmd_tune_context(const TuneArgs& args, std::ostream& out, std::ostream& err);

/// Parses "a,b,c" or "log:lo:hi:points" into a bandwidth grid.
std::vector<double> parse_beta_grid(const std::string& text);

}  // namespace proxycal::cli

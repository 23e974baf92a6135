#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "proxycal/core_model.hpp"
#include "proxycal/simulation.hpp"

namespace proxycal::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict numeric parse of a whole field; throws InputError naming `where`.
double parse_double(std::string_view text, std::string_view where);

/// A header-validated delimiter-separated table (comma, or tab when the
/// header contains a tab). Blank lines and lines starting with '#' are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};
Table parse_table(std::istream& in, std::string_view source);

/// History file: domain_id, theta_hat, theta_star_hat, var_primary, var_proxy,
/// cov_primary_proxy, optional context_* columns (in header order) and timestamp.
std::vector<DomainRecord> parse_history(std::istream& in, std::string_view source);
std::vector<DomainRecord> read_history(const std::filesystem::path& path);

/// Target file: domain_id, theta_star_hat, var_proxy, optional context_* and timestamp.
std::vector<TargetRecord> parse_targets(std::istream& in, std::string_view source);
std::vector<TargetRecord> read_targets(const std::filesystem::path& path);

/// Model file: "key = value" lines.
void write_model(std::ostream& out, const BiasModel& model,
                 const std::vector<std::string>& domain_ids);
BiasModel parse_model(std::istream& in, std::string_view source);
BiasModel read_model(const std::filesystem::path& path);

/// "key = value" lines with '#' comments; duplicate keys are rejected.
std::map<std::string, std::string> parse_key_values(std::istream& in, std::string_view source);

/// A simulation config, possibly listing several kappa / K / n values.
/// The grid is the Cartesian product of those lists.
struct SimGrid {
    sim::SimConfig base;
    std::vector<double> kappas;
    std::vector<std::size_t> n_domains;
    std::vector<std::size_t> n_per_domain;
    std::vector<sim::Estimator> estimators;  // empty = all

    std::vector<sim::SimConfig> cells() const;
};
/// Throws InputError listing every unknown key.
SimGrid parse_sim_config(std::istream& in, std::string_view source);
SimGrid read_sim_config(const std::filesystem::path& path);
/// Canonical key = value rendering of a grid, used in manifests.
std::vector<std::pair<std::string, std::string>> describe(const SimGrid& grid);

sim::Estimator parse_estimator(std::string_view name);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Run metadata written next to each output as "<output>.manifest".
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
};
void write_manifest(const std::filesystem::path& output, const RunManifest& manifest);

/// Writes `contents` to `path`, throwing std::runtime_error on failure.
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace proxycal::io

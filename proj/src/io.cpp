#include "proxycal/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "proxycal/version.hpp"

namespace proxycal::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    return in;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view where) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& field : split(text, ',')) out.push_back(parse_double(field, where));
    return out;
}

std::size_t parse_count(std::string_view text, std::string_view where) {
    const auto t = trim(text);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw InputError(std::string(where) + ": expected a nonnegative integer, got '" +
                         std::string(t) + "'");
    }
    return value;
}

std::uint64_t parse_u64(std::string_view text, std::string_view where) {
    const auto t = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw InputError(std::string(where) + ": expected an unsigned integer, got '" +
                         std::string(t) + "'");
    }
    return value;
}

bool parse_flag(std::string_view text, std::string_view where) {
    const auto t = trim(text);
    if (t == "1" || t == "true") return true;
    if (t == "0" || t == "false") return false;
    throw InputError(std::string(where) + ": expected 0/1 or true/false");
}

// Column lookup for the record-style files.
struct Columns {
    std::map<std::string, std::size_t> index;
    std::vector<std::size_t> context;
    std::optional<std::size_t> timestamp;
};

Columns map_columns(const Table& table, std::string_view source,
                    std::initializer_list<std::string_view> required) {
    Columns cols;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        const auto& name = table.header[i];
        if (name.empty()) {
            throw InputError(std::string(source) + ": header column " + std::to_string(i + 1) +
                             " is empty");
        }
        if (!cols.index.emplace(name, i).second) {
            throw InputError(std::string(source) + ": duplicate column '" + name + "'");
        }
        if (name.rfind("context_", 0) == 0) cols.context.push_back(i);
        if (name == "timestamp") cols.timestamp = i;
    }
    for (auto name : required) {
        if (!cols.index.contains(std::string(name))) {
            throw InputError(std::string(source) + ": missing required column '" +
                             std::string(name) + "'");
        }
    }
    return cols;
}

std::string where(std::string_view source, std::size_t line, std::string_view column) {
    return std::string(source) + ": line " + std::to_string(line) + ", column '" +
           std::string(column) + "'";
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view where) {
    const auto t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
        throw InputError(std::string(where) + ": expected a finite number, got '" + std::string(t) +
                         "'");
    }
    return value;
}

Table parse_table(std::istream& in, std::string_view source) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    char delim = ',';
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!have_header) {
            if (line.find('\t') != std::string::npos) delim = '\t';
            table.header = split(t, delim);
            have_header = true;
            continue;
        }
        auto fields = split(t, delim);
        if (fields.size() != table.header.size()) {
            throw InputError(std::string(source) + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) {
        throw InputError(std::string(source) + ": no header line");
    }
    return table;
}

std::vector<DomainRecord> parse_history(std::istream& in, std::string_view source) {
    const auto table = parse_table(in, source);
    const auto cols = map_columns(table, source,
                                  {"domain_id", "theta_hat", "theta_star_hat", "var_primary",
                                   "var_proxy", "cov_primary_proxy"});
    std::vector<DomainRecord> out;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        auto num = [&](const char* name) {
            return parse_double(row[cols.index.at(name)], where(source, line, name));
        };
        DomainRecord rec;
        rec.domain_id = row[cols.index.at("domain_id")];
        if (rec.domain_id.empty()) {
            throw InputError(where(source, line, "domain_id") + ": empty domain_id");
        }
        if (!seen.insert(rec.domain_id).second) {
            throw InputError(where(source, line, "domain_id") + ": duplicate domain_id '" +
                             rec.domain_id + "'");
        }
        rec.theta_hat = num("theta_hat");
        rec.theta_star_hat = num("theta_star_hat");
        rec.var_primary = num("var_primary");
        rec.var_proxy = num("var_proxy");
        rec.cov_primary_proxy = num("cov_primary_proxy");
        for (std::size_t c : cols.context) {
            rec.context.push_back(parse_double(row[c], where(source, line, table.header[c])));
        }
        if (cols.timestamp) {
            rec.timestamp = parse_double(row[*cols.timestamp], where(source, line, "timestamp"));
        }
        try {
            validate(rec);
        } catch (const InputError& e) {
            throw InputError(std::string(source) + ": line " + std::to_string(line) + ": " +
                             e.what());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<DomainRecord> read_history(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_history(in, path.string());
}

std::vector<TargetRecord> parse_targets(std::istream& in, std::string_view source) {
    const auto table = parse_table(in, source);
    const auto cols = map_columns(table, source, {"domain_id", "theta_star_hat", "var_proxy"});
    std::vector<TargetRecord> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        TargetRecord t;
        t.domain_id = row[cols.index.at("domain_id")];
        t.theta_star_hat = parse_double(row[cols.index.at("theta_star_hat")],
                                        where(source, line, "theta_star_hat"));
        t.var_proxy =
            parse_double(row[cols.index.at("var_proxy")], where(source, line, "var_proxy"));
        for (std::size_t c : cols.context) {
            t.context.push_back(parse_double(row[c], where(source, line, table.header[c])));
        }
        if (cols.timestamp) {
            t.timestamp = parse_double(row[*cols.timestamp], where(source, line, "timestamp"));
        }
        try {
            validate(t);
        } catch (const InputError& e) {
            throw InputError(std::string(source) + ": line " + std::to_string(line) + ": " +
                             e.what());
        }
        out.push_back(std::move(t));
    }
    if (out.empty()) {
        throw InputError(std::string(source) + ": no target rows");
    }
    return out;
}

std::vector<TargetRecord> read_targets(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_targets(in, path.string());
}

std::map<std::string, std::string> parse_key_values(std::istream& in, std::string_view source) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw InputError(std::string(source) + ": line " + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        std::string key(trim(t.substr(0, eq)));
        std::string value(trim(t.substr(eq + 1)));
        if (key.empty()) {
            throw InputError(std::string(source) + ": line " + std::to_string(line_no) +
                             ": empty key");
        }
        if (!out.emplace(key, value).second) {
            throw InputError(std::string(source) + ": line " + std::to_string(line_no) +
                             ": duplicate key '" + key + "'");
        }
    }
    return out;
}

void write_model(std::ostream& out, const BiasModel& model,
                 const std::vector<std::string>& domain_ids) {
    out << "# proxycal bias model\n";
    out << "rho = " << format_double(model.rho) << '\n';
    out << "gamma2 = " << format_double(model.gamma2) << '\n';
    out << "gamma2_raw = " << format_double(model.gamma2_raw) << '\n';
    out << "n_domains = " << model.n_domains << '\n';
    out << "warning_insufficient_domains = " << (model.insufficient_domains ? "true" : "false") << '\n';
    out << "warning_gamma2_truncated = " << (model.gamma2_truncated ? "true" : "false") << '\n';
    std::string ids;
    for (std::size_t i = 0; i < domain_ids.size(); ++i) {
        if (i) ids += ',';
        ids += domain_ids[i];
    }
    out << "domain_ids = " << ids << '\n';
    out << "diffs = " << join_doubles(model.diffs) << '\n';
    out << "diff_vars = " << join_doubles(model.diff_vars) << '\n';
}

BiasModel parse_model(std::istream& in, std::string_view source) {
    const auto kv = parse_key_values(in, source);
    auto get = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw InputError(std::string(source) + ": missing key '" + key + "'");
        }
        return it->second;
    };
    const std::string src(source);
    BiasModel m;
    m.rho = parse_double(get("rho"), src + ": rho");
    m.gamma2 = parse_double(get("gamma2"), src + ": gamma2");
    if (m.gamma2 < 0.0) throw InputError(src + ": gamma2 must be nonnegative");
    if (kv.contains("gamma2_raw")) {
        m.gamma2_raw = parse_double(kv.at("gamma2_raw"), src + ": gamma2_raw");
    } else {
        m.gamma2_raw = m.gamma2;
    }
    if (kv.contains("n_domains")) m.n_domains = parse_count(kv.at("n_domains"), src + ": n_domains");
    if (kv.contains("warning_insufficient_domains")) {
        m.insufficient_domains = parse_flag(kv.at("warning_insufficient_domains"),
                                            src + ": warning_insufficient_domains");
    }
    if (kv.contains("warning_gamma2_truncated")) {
        m.gamma2_truncated =
            parse_flag(kv.at("warning_gamma2_truncated"), src + ": warning_gamma2_truncated");
    }
    if (kv.contains("diffs")) m.diffs = parse_double_list(kv.at("diffs"), src + ": diffs");
    if (kv.contains("diff_vars")) {
        m.diff_vars = parse_double_list(kv.at("diff_vars"), src + ": diff_vars");
    }
    if (m.diffs.size() != m.diff_vars.size() ||
        (!m.diffs.empty() && m.n_domains != m.diffs.size())) {
        throw InputError(src + ": diffs, diff_vars and n_domains are inconsistent");
    }
    return m;
}

BiasModel read_model(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_model(in, path.string());
}

sim::Estimator parse_estimator(std::string_view name) {
    for (auto e : sim::kEstimators) {
        if (sim::to_string(e) == name) return e;
    }
    throw InputError("unknown estimator '" + std::string(name) + "'");
}

std::vector<sim::SimConfig> SimGrid::cells() const {
    std::vector<sim::SimConfig> out;
    for (std::size_t k : n_domains) {
        for (double kappa : kappas) {
            for (std::size_t n : n_per_domain) {
                sim::SimConfig cfg = base;
                cfg.n_domains = k;
                cfg.kappa = kappa;
                cfg.n_per_domain = n;
                out.push_back(std::move(cfg));
            }
        }
    }
    return out;
}

SimGrid parse_sim_config(std::istream& in, std::string_view source) {
    const auto kv = parse_key_values(in, source);
    static const std::set<std::string> known{
        "dim_p",  "n_domains", "n_per_domain", "kappa",          "lambda1",
        "phi1",   "lambda2",   "phi2",         "mu_target",      "replicates",
        "mc_truth_samples",    "alpha",        "seed",           "bootstrap_draws",
        "truth",  "estimators"};
    std::vector<std::string> unknown;
    for (const auto& [key, value] : kv) {
        if (!known.contains(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = std::string(source) + ": unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw InputError(msg);
    }

    const std::string src(source);
    SimGrid grid;
    auto& cfg = grid.base;
    auto has = [&](const char* key) { return kv.contains(key); };
    auto at = [&](const char* key) { return std::string_view(kv.at(key)); };
    auto ctx = [&](const char* key) { return src + ": " + key; };

    if (has("dim_p")) cfg.dim_p = parse_count(at("dim_p"), ctx("dim_p"));
    if (has("mu_target")) {
        cfg.mu_target = parse_double_list(at("mu_target"), ctx("mu_target"));
    } else if (cfg.dim_p != cfg.mu_target.size()) {
        cfg.mu_target.assign(cfg.dim_p, 0.0);
        for (std::size_t j = 0; j < cfg.dim_p; ++j) cfg.mu_target[j] = j % 2 == 0 ? 0.5 : -0.5;
    }
    if (has("lambda1")) cfg.lambda1 = parse_double(at("lambda1"), ctx("lambda1"));
    if (has("phi1")) cfg.phi1 = parse_double(at("phi1"), ctx("phi1"));
    if (has("lambda2")) cfg.lambda2 = parse_double(at("lambda2"), ctx("lambda2"));
    if (has("phi2")) cfg.phi2 = parse_double(at("phi2"), ctx("phi2"));
    if (has("replicates")) cfg.replicates = parse_count(at("replicates"), ctx("replicates"));
    if (has("mc_truth_samples")) {
        cfg.mc_truth_samples = parse_count(at("mc_truth_samples"), ctx("mc_truth_samples"));
    }
    if (has("alpha")) cfg.alpha = parse_double(at("alpha"), ctx("alpha"));
    if (has("seed")) cfg.seed = parse_u64(at("seed"), ctx("seed"));
    if (has("bootstrap_draws")) {
        cfg.bootstrap_draws = parse_count(at("bootstrap_draws"), ctx("bootstrap_draws"));
    }
    if (has("truth")) cfg.truth = std::string(trim(at("truth")));

    grid.kappas = has("kappa") ? parse_double_list(at("kappa"), ctx("kappa"))
                               : std::vector<double>{cfg.kappa};
    grid.n_domains.clear();
    grid.n_per_domain.clear();
    if (has("n_domains")) {
        for (const auto& f : split(at("n_domains"), ',')) {
            grid.n_domains.push_back(parse_count(f, ctx("n_domains")));
        }
    } else {
        grid.n_domains.push_back(cfg.n_domains);
    }
    if (has("n_per_domain")) {
        for (const auto& f : split(at("n_per_domain"), ',')) {
            grid.n_per_domain.push_back(parse_count(f, ctx("n_per_domain")));
        }
    } else {
        grid.n_per_domain.push_back(cfg.n_per_domain);
    }
    if (has("estimators")) {
        for (const auto& f : split(at("estimators"), ',')) {
            grid.estimators.push_back(parse_estimator(f));
        }
    }
    if (grid.kappas.empty() || grid.n_domains.empty() || grid.n_per_domain.empty()) {
        throw InputError(src + ": kappa, n_domains and n_per_domain must not be empty");
    }
    for (const auto& cell : grid.cells()) sim::validate(cell);
    return grid;
}

SimGrid read_sim_config(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_sim_config(in, path.string());
}

std::vector<std::pair<std::string, std::string>> describe(const SimGrid& grid) {
    const auto& c = grid.base;
    auto join_counts = [](const std::vector<std::size_t>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(v[i]);
        }
        return out;
    };
    std::string estimators;
    if (grid.estimators.empty()) {
        estimators = "all";
    } else {
        for (std::size_t i = 0; i < grid.estimators.size(); ++i) {
            if (i) estimators += ',';
            estimators += sim::to_string(grid.estimators[i]);
        }
    }
    return {
        {"dim_p", std::to_string(c.dim_p)},
        {"n_domains", join_counts(grid.n_domains)},
        {"n_per_domain", join_counts(grid.n_per_domain)},
        {"kappa", join_doubles(grid.kappas)},
        {"lambda1", format_double(c.lambda1)},
        {"phi1", format_double(c.phi1)},
        {"lambda2", format_double(c.lambda2)},
        {"phi2", format_double(c.phi2)},
        {"mu_target", join_doubles(c.mu_target)},
        {"replicates", std::to_string(c.replicates)},
        {"mc_truth_samples", std::to_string(c.mc_truth_samples)},
        {"alpha", format_double(c.alpha)},
        {"seed", std::to_string(c.seed)},
        {"bootstrap_draws", std::to_string(c.bootstrap_draws)},
        {"truth", c.truth},
        {"estimators", estimators},
    };
}

std::string file_digest(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[8192];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_manifest(const std::filesystem::path& output, const RunManifest& manifest) {
    std::ostringstream out;
    out << "# proxycal run manifest\n";
    out << "command = " << manifest.command << '\n';
    out << "tool_version = " << kVersion << '\n';
    out << "seed = " << manifest.seed << '\n';
    for (const auto& [key, value] : manifest.config) out << "config." << key << " = " << value << '\n';
    for (const auto& [path, digest] : manifest.inputs) {
        out << "input." << path << " = fnv1a64:" << digest << '\n';
    }
    auto target = output;
    target += ".manifest";
    write_text(target, out.str());
}

}  // namespace proxycal::io

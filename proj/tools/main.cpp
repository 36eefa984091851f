// fracdiff command-line front end: hfun, check, verify, simulate.
//
// Exit codes: 0 success, 1 numeric failure, 2 invalid input or configuration,
// 3 a verification suite reported a failing case.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fracdiff/chaos.hpp"
#include "fracdiff/estimates.hpp"
#include "fracdiff/specfun/hfunction.hpp"
#include "fracdiff/suites.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fd = fracdiff;
namespace sf = fracdiff::specfun;

enum Exit { exit_ok = 0, exit_numeric = 1, exit_invalid = 2, exit_suite = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string output = "-";
    std::string format;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
    std::string config;
};

// ---------------------------------------------------------------------------
// Serialization: doubles with 17 significant digits, CSV per RFC 4180.

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    return buf;
}

void dump(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                dump(it.value(), out, indent, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump(j[i], out, indent, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? g17(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

std::string to_text(const json& j) {
    std::string s;
    dump(j, s, 2, 0);
    return s + "\n";
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string csv_cell(const json& v) {
    if (v.is_string()) return csv_field(v.get<std::string>());
    if (v.is_number_float()) return std::isfinite(v.get<double>()) ? g17(v.get<double>()) : "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    return csv_field(v.dump());
}

std::string csv_table(const std::vector<std::string>& cols, const std::vector<std::vector<json>>& rows) {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + csv_field(cols[i]);
    s += "\r\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + csv_cell(r[i]);
        s += "\r\n";
    }
    return s;
}

// Flattens nested objects into key,value rows.
void flatten(const json& j, const std::string& prefix, std::vector<std::vector<json>>& rows) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
    } else {
        rows.push_back({prefix, j});
    }
}

std::string as_csv(const json& j) {
    std::vector<std::vector<json>> rows;
    flatten(j, "", rows);
    return csv_table({"key", "value"}, rows);
}

void emit(const Common& c, const std::string& text) {
    if (c.output == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream os(c.output, std::ios::binary);
    if (!os) throw UsageError("cannot open output file " + c.output);
    os << text;
}

std::string resolve_format(const Common& c, const std::string& fallback) {
    const std::string f = c.format.empty() ? fallback : c.format;
    if (f != "json" && f != "csv") throw UsageError("format must be json or csv");
    return f;
}

// ---------------------------------------------------------------------------
// Parsing helpers.

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("malformed " + what + " list: " + s);
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw UsageError("malformed " + what + " list: " + s);
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty " + what + " list");
    return out;
}

std::vector<sf::GammaParam> parse_pairs(const std::string& s) {
    std::vector<sf::GammaParam> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("gamma pairs are written shift:scale");
        const auto a = parse_list(item.substr(0, colon), "shift");
        const auto b = parse_list(item.substr(colon + 1), "scale");
        out.push_back({a.at(0), b.at(0)});
    }
    return out;
}

json condition_json(const fd::Condition& c) {
    return {{"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}, {"boundary", c.boundary}};
}

json exponents_json(const fd::ExponentTable& t) {
    return {{"zeta_d", t.zeta_d}, {"kappa_d", t.kappa_d}, {"ell", t.ell}, {"ell_i", t.ell_i}};
}

json verdict_json(const fd::Verdict& v) {
    return {{"hurst_each", condition_json(v.hurst_each)},
            {"hurst_sum", condition_json(v.hurst_sum)},
            {"internal", condition_json(v.internal)},
            {"chaos_rate", condition_json(v.chaos_rate)},
            {"equivalence_agrees", v.equivalence_agrees},
            {"overall", v.overall},
            {"boundary", v.boundary},
            {"reason", v.reason}};
}

json report_json(const sf::ValidationReport& r) {
    json clashes = json::array();
    for (const auto& c : r.clashes)
        clashes.push_back({{"lower", c.j}, {"l", c.l}, {"upper", c.i}, {"k", c.k}, {"point", c.point}});
    return {{"valid", r.valid},
            {"error", r.error ? std::string(fd::to_string(*r.error)) : std::string()},
            {"message", r.message},
            {"poles_separated", r.poles_separated},
            {"clashes", clashes},
            {"delta", r.delta},
            {"decay_rate", r.decay_rate},
            {"simple_left_poles", r.simple_left_poles},
            {"contours", r.contours}};
}

// ---------------------------------------------------------------------------
// Commands.

struct HfunArgs {
    double z = 0.0;
    std::string spec = "eh1";
    double d = 1.0;
    int m = -1, n = -1;
    std::string upper, lower;
    std::string method = "auto";
    double tol = 1e-10;
};

int cmd_hfun(const Common& c, const HfunArgs& a) {
    const std::string fmt = resolve_format(c, "json");
    sf::HFunctionSpec spec;
    if (a.spec == "eh1") {
        spec = sf::exp_family_spec(a.d);
    } else {
        spec.m = a.m;
        spec.n = a.n;
        spec.upper = parse_pairs(a.upper);
        spec.lower = parse_pairs(a.lower);
    }
    const sf::HMethod method = a.method == "residue"   ? sf::HMethod::residue
                               : a.method == "contour" ? sf::HMethod::contour
                                                       : sf::HMethod::automatic;
    auto rep = sf::h_check(spec);
    if (rep.valid && !(a.z > 0.0 && std::isfinite(a.z))) {
        rep.valid = false;
        rep.error = fd::ErrorCode::invalid_parameter;
        rep.message = "z must be positive";
    }
    json spec_json = {{"m", spec.m}, {"n", spec.n}, {"upper", json::array()}, {"lower", json::array()}};
    for (const auto& p : spec.upper) spec_json["upper"].push_back({p.shift, p.scale});
    for (const auto& p : spec.lower) spec_json["lower"].push_back({p.shift, p.scale});
    if (!rep.valid) {
        json out = {{"z", a.z}, {"spec", spec_json}, {"report", report_json(rep)}};
        emit(c, fmt == "json" ? to_text(out) : as_csv(out));
        std::cerr << "validation failed: " << rep.message << "\n";
        return exit_invalid;
    }
    const auto v = sf::h_eval(spec, rep, a.z, method, a.tol);
    json out = {{"value", v.value},
                {"method", std::string(sf::to_string(v.method))},
                {"est_error", v.error},
                {"terms", v.terms},
                {"z", a.z},
                {"spec", spec_json}};
    if (fmt == "json") emit(c, to_text(out));
    else emit(c, csv_table({"value", "method", "est_error", "terms", "z"},
                           {{out["value"], out["method"], out["est_error"], out["terms"], out["z"]}}));
    return exit_ok;
}

struct CheckArgs {
    double alpha = 0.0;
    std::string hurst;
    double gamma = 0.9;
    std::optional<double> gamma0;
};

int cmd_check(const Common& c, const CheckArgs& a) {
    const std::string fmt = resolve_format(c, "json");
    const fd::HurstVector H(parse_list(a.hurst, "Hurst"));
    const double g0 = a.gamma0.value_or(fd::default_gamma0(a.gamma));
    const auto v = fd::check_conditions(a.alpha, H, a.gamma, g0);
    json out = {{"alpha", a.alpha},
                {"d", H.dim()},
                {"hurst", H.values()},
                {"gamma", a.gamma},
                {"gamma0", g0},
                {"exponents", exponents_json(v.table)},
                {"conditions", verdict_json(v)}};
    if (fmt == "json") {
        emit(c, to_text(out));
    } else {
        std::vector<std::vector<json>> rows;
        for (const auto* cond : {&v.hurst_each, &v.hurst_sum, &v.internal, &v.chaos_rate})
            rows.push_back({cond->name, cond->value, cond->threshold, cond->pass, cond->boundary});
        rows.push_back({"overall", json(), json(), v.overall, v.boundary});
        emit(c, csv_table({"condition", "value", "threshold", "pass", "boundary"}, rows));
    }
    return exit_ok;
}

struct VerifyArgs {
    std::string suite;
    std::vector<int> d;
    std::vector<double> alpha;
    double gamma = 0.9;
    std::uint64_t samples = 100000;
    std::optional<double> tolerance;
};

// Re-judges fit rows against a caller-supplied relative tolerance.
void apply_tolerance(fd::suites::Table& t, double tol) {
    const auto col = [&](const std::string& name) {
        const auto it = std::find(t.columns.begin(), t.columns.end(), name);
        return it == t.columns.end() ? std::string::npos : static_cast<std::size_t>(it - t.columns.begin());
    };
    const std::size_t err = col("rel_error"), tc = col("tolerance");
    if (err == std::string::npos || tc == std::string::npos)
        throw UsageError("--tolerance applies to suites with rel_error and tolerance columns");
    t.all_pass = true;
    for (auto& r : t.rows) {
        const double e = std::get<double>(r[err]);
        r[tc] = tol;
        r.back() = e <= tol;
        t.all_pass = t.all_pass && e <= tol;
    }
}

int cmd_verify(const Common& c, const VerifyArgs& a) {
    const std::string fmt = resolve_format(c, "csv");
    fd::suites::Table t;
    fd::suites::BoundSuiteOptions bo;
    if (!a.d.empty()) bo.dims = a.d;
    if (!a.alpha.empty()) bo.alphas = a.alpha;
    bo.gamma = a.gamma;
    if (a.suite == "z0-bounds") t = fd::suites::z0_bounds(bo);
    else if (a.suite == "y0-bounds") t = fd::suites::y0_bounds(bo);
    else if (a.suite == "lem9") t = fd::suites::lem9();
    else if (a.suite == "lem11") t = fd::suites::lem11();
    else if (a.suite == "cor14") t = fd::suites::cor14();
    else if (a.suite == "simplex") {
        if (!c.seed) throw UsageError("the simplex suite is Monte Carlo and needs --seed");
        fd::suites::SimplexSuiteOptions so;
        so.seed = *c.seed;
        so.threads = c.threads;
        so.samples = a.samples;
        t = fd::suites::simplex(so);
    } else {
        throw UsageError("unknown suite " + a.suite);
    }
    if (a.tolerance) {
        if (!(*a.tolerance >= 0.0)) throw UsageError("tolerance must be nonnegative");
        apply_tolerance(t, *a.tolerance);
    }
    std::vector<std::vector<json>> rows;
    for (const auto& r : t.rows) {
        std::vector<json> row;
        for (const auto& cell : r) std::visit([&](const auto& v) { row.emplace_back(v); }, cell);
        rows.push_back(std::move(row));
    }
    if (fmt == "csv") {
        emit(c, csv_table(t.columns, rows));
    } else {
        json arr = json::array();
        for (const auto& r : rows) {
            json o;
            for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = r[i];
            arr.push_back(o);
        }
        emit(c, to_text({{"suite", t.suite},
                         {"version", fd::suites::suite_version},
                         {"columns", t.columns},
                         {"rows", arr},
                         {"notes", t.notes},
                         {"all_pass", t.all_pass}}));
    }
    for (const auto& n : t.notes) std::cerr << n << "\n";
    return t.all_pass ? exit_ok : exit_suite;
}

struct SimulateArgs {
    double alpha = 0.8;
    std::string hurst = "0.75";
    double t = 0.5;
    double T = 1.0;
    double x = 0.0;
    std::string u0 = "1";
    int cells = 256;
    std::uint64_t samples = 10000;
    double gamma = 0.9;
    std::optional<double> gamma0;
    int theta_terms = 50;
    double theta_c = 10.0;
};

int cmd_simulate(const Common& c, const SimulateArgs& a) {
    const std::string fmt = resolve_format(c, "json");
    if (!c.seed) throw UsageError("simulate is Monte Carlo and needs --seed");
    const fd::HurstVector H(parse_list(a.hurst, "Hurst"));
    if (H.dim() != 1) throw UsageError("simulate supports d = 1 (one Hurst parameter)");
    fd::ChaosConfig cfg;
    cfg.model = fd::GreenModel::isotropic(a.alpha, 1);
    cfg.H = H;
    cfg.t = a.t;
    cfg.T = a.T;
    cfg.x = {a.x};
    cfg.space_cells = a.cells;
    cfg.mc_samples = a.samples;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    if (a.u0.rfind("gauss:", 0) == 0) {
        const double k = parse_list(a.u0.substr(6), "u0").at(0);
        cfg = fd::with_u0(cfg, [k](std::span<const double> p) { return std::exp(-k * p[0] * p[0]); });
    } else {
        cfg = fd::with_constant_u0(cfg, parse_list(a.u0, "u0").at(0));
    }
    const double g0 = a.gamma0.value_or(fd::default_gamma0(a.gamma));

    const double p0 = fd::psi0(cfg);
    const fd::F1Table F(cfg);
    const auto exact = fd::psi1_moment_exact(F, cfg.H);
    const auto mc = fd::psi1_mc(cfg, F);
    const auto rep = fd::convergence_report(cfg, a.gamma, g0, a.theta_terms, a.theta_c);

    json out = {
        {"config",
         {{"alpha", a.alpha}, {"hurst", H.values()}, {"t", a.t}, {"T", a.T}, {"x", a.x},
          {"u0", a.u0}, {"cells", a.cells}, {"samples", a.samples}, {"seed", *c.seed}}},
        {"psi0", p0},
        {"psi1_exact_moment", exact.value},
        {"psi1_mc",
         {{"mean", mc.mean},
          {"var", mc.variance},
          {"stderr", mc.std_error},
          {"second_moment", mc.second_moment},
          {"second_moment_stderr", mc.second_moment_error},
          {"discretized_moment", mc.discretized_moment}}},
        {"convergence_report",
         {{"ell", rep.table.ell},
          {"zeta_d", rep.table.zeta_d},
          {"kappa_d", rep.table.kappa_d},
          {"conditions", verdict_json(rep.conditions)},
          {"theta_constant", rep.theta_constant},
          {"theta_partial_sums", rep.theta.partial_sums},
          {"verdict", rep.verdict},
          {"converges", rep.verdict == "yes"}}}};
    emit(c, fmt == "json" ? to_text(out) : as_csv(out));
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Config file: `key = value` lines merged below explicit flags; FRACDIFF_SEED below both.

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw UsageError("config line " + std::to_string(lineno) + " has an invalid key");
        kv.emplace_back(key, value);
    }
    return kv;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

// Rebuilds argv as: program, subcommand, env seed, config entries, explicit flags.
// Options take the last value given, so explicit flags win.
std::vector<std::string> merge_sources(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0].rfind("-", 0) == 0) return args;
    const std::string sub = args[0];
    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::string config_path;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        if (rest[i] == "--config" && i + 1 < rest.size()) config_path = rest[i + 1];
        else if (rest[i].rfind("--config=", 0) == 0) config_path = rest[i].substr(9);
    }
    std::vector<std::string> merged{sub};
    std::vector<std::pair<std::string, std::string>> kv;
    if (!config_path.empty()) kv = read_config(config_path);
    bool seed_in_file = false;
    for (const auto& [k, v] : kv) seed_in_file = seed_in_file || k == "seed";
    if (!has_flag(rest, "--seed") && !seed_in_file) {
        if (const char* env = std::getenv("FRACDIFF_SEED"); env && *env) {
            merged.emplace_back("--seed");
            merged.emplace_back(env);
        }
    }
    for (const auto& [k, v] : kv) {
        merged.push_back("--" + k);
        merged.push_back(v);
    }
    merged.insert(merged.end(), rest.begin(), rest.end());
    return merged;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--output,-o", c.output, "Output path, - for stdout");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", c.threads, "Worker threads, 0 for all cores");
    sub->add_option("--seed", c.seed, "Seed for Monte Carlo commands");
    sub->add_option("--config", c.config, "Config file of key = value lines");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional SPDE toolkit: Fox H kernels, bound checks, chaos moments."};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    HfunArgs hf;
    CheckArgs ck;
    VerifyArgs vf;
    SimulateArgs sm;

    auto* hfun = app.add_subcommand("hfun", "Evaluate a Fox H-function");
    add_common(hfun, common);
    hfun->add_option("--z", hf.z, "Argument z > 0")->required();
    hfun->add_option("--spec", hf.spec, "eh1 (the z^{d/2} e^{-z} family) or custom")
        ->check(CLI::IsMember({"eh1", "custom"}));
    hfun->add_option("--d", hf.d, "Parameter d of the eh1 family");
    hfun->add_option("--m", hf.m, "Custom spec: m");
    hfun->add_option("--n", hf.n, "Custom spec: n");
    hfun->add_option("--upper", hf.upper, "Custom spec: upper pairs shift:scale,...");
    hfun->add_option("--lower", hf.lower, "Custom spec: lower pairs shift:scale,...");
    hfun->add_option("--method", hf.method, "auto, residue or contour")
        ->check(CLI::IsMember({"auto", "residue", "contour"}));
    hfun->add_option("--tol", hf.tol, "Relative tolerance");

    auto* check = app.add_subcommand("check", "Check the existence conditions");
    add_common(check, common);
    check->add_option("--alpha", ck.alpha, "Fractional order in (0, 1)")->required();
    check->add_option("--hurst", ck.hurst, "Comma-separated Hurst parameters")->required();
    check->add_option("--gamma", ck.gamma, "Holder exponent gamma");
    check->add_option("--gamma0", ck.gamma0, "gamma0 (default gamma/100)");

    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    add_common(verify, common);
    verify->add_option("--suite", vf.suite, "Suite name")
        ->required()
        ->check(CLI::IsMember({"z0-bounds", "y0-bounds", "lem9", "lem11", "cor14", "simplex"}));
    verify->add_option("--d", vf.d, "Dimensions for bound suites")->delimiter(',');
    verify->add_option("--alpha", vf.alpha, "Orders for bound suites")->delimiter(',');
    verify->add_option("--gamma", vf.gamma, "gamma for the d >= 3 bound shapes");
    verify->add_option("--samples", vf.samples, "Monte Carlo samples per random simplex case");
    verify->add_option("--tolerance", vf.tolerance, "Override the relative tolerance of fit rows");

    auto* simulate = app.add_subcommand("simulate", "Chaos terms Psi0, Psi1 and the convergence report");
    add_common(simulate, common);
    simulate->add_option("--alpha", sm.alpha, "Fractional order");
    simulate->add_option("--hurst", sm.hurst, "Hurst parameter (d = 1)");
    simulate->add_option("--t", sm.t, "Evaluation time");
    simulate->add_option("--T", sm.T, "Horizon");
    simulate->add_option("--x", sm.x, "Evaluation point");
    simulate->add_option("--u0", sm.u0, "Initial condition: a constant or gauss:<k> for exp(-k x^2)");
    simulate->add_option("--cells", sm.cells, "Field cells for Monte Carlo");
    simulate->add_option("--samples", sm.samples, "Monte Carlo samples");
    simulate->add_option("--gamma", sm.gamma, "gamma for the exponent table");
    simulate->add_option("--gamma0", sm.gamma0, "gamma0 (default gamma/100)");
    simulate->add_option("--theta-terms", sm.theta_terms, "Terms of the Theta_n bound series");
    simulate->add_option("--theta-c", sm.theta_c, "Constant C of the Theta_n bound series");

    try {
        auto args = merge_sources(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid;
    }

    try {
        if (*hfun) return cmd_hfun(common, hf);
        if (*check) return cmd_check(common, ck);
        if (*verify) return cmd_verify(common, vf);
        if (*simulate) return cmd_simulate(common, sm);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const fd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_validation() ? exit_invalid : exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_invalid;
}

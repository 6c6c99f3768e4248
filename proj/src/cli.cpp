#include "rdmono/cli.hpp"

#include "rdmono/adaptive.hpp"
#include "rdmono/cbound.hpp"
#include "rdmono/minimax.hpp"
#include "rdmono/simlab.hpp"
#include "rdmono/variance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace rdmono::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\"");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\"");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const std::string t = trim(s);
    if (t == "inf" || t == "Inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || t.empty() || std::isnan(v)) return std::nullopt;
    return v;
}

double number(const std::string& s, const std::string& what) {
    const auto v = to_double(s);
    if (!v) throw InputError("cannot parse " + what + " value '" + s + "'");
    return *v;
}

/// "a,b,c" or "lo:hi:count" (linear, inclusive).
std::vector<double> number_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    if (s.empty()) return out;
    if (s.find(':') != std::string::npos) {
        const auto p = split(s, ':');
        if (p.size() != 3) throw InputError(what + " range must be lo:hi:count");
        const double lo = number(p[0], what), hi = number(p[1], what);
        const double cnt = number(p[2], what);
        if (!(cnt >= 1) || cnt != std::floor(cnt)) throw InputError(what + " range count must be a positive integer");
        const auto n = static_cast<std::size_t>(cnt);
        for (std::size_t k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1.0));
        return out;
    }
    for (const auto& t : split(s, ',')) out.push_back(number(t, what));
    return out;
}

std::vector<std::size_t> index_list(const std::string& s, std::size_t d, const std::string& what) {
    std::vector<std::size_t> out;
    if (s.empty() || s == "none") return out;
    if (s == "all") {
        for (std::size_t k = 0; k < d; ++k) out.push_back(k);
        return out;
    }
    for (const auto& t : split(s, ',')) {
        const double v = number(t, what);
        if (v != std::floor(v) || v < 1 || v > static_cast<double>(d))
            throw InputError(what + " entries must be coordinates in 1.." + std::to_string(d));
        out.push_back(static_cast<std::size_t>(v) - 1);
    }
    return out;
}

} // namespace

Dataset parse_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) {
            header = split(line, ',');
            break;
        }
    }
    if (header.empty()) throw CsvError("CSV input is empty", 1, "");
    int y_col = -1, t_col = -1, s_col = -1;
    std::map<std::size_t, int> x_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (h == "y") y_col = static_cast<int>(c);
        else if (h == "treated") t_col = static_cast<int>(c);
        else if (h == "sigma") s_col = static_cast<int>(c);
        else if (h.size() > 1 && h[0] == 'x' && h.find_first_not_of("0123456789", 1) == std::string::npos) {
            const auto k = static_cast<std::size_t>(std::stoul(h.substr(1)));
            if (k == 0 || x_cols.count(k)) throw CsvError("bad or duplicate running-variable column", lineno, h);
            x_cols[k] = static_cast<int>(c);
        } else {
            throw CsvError("unknown column '" + h + "'", lineno, h);
        }
    }
    if (y_col < 0) throw CsvError("missing column 'y'", lineno, "y");
    if (x_cols.empty()) throw CsvError("missing column 'x1'", lineno, "x1");
    const std::size_t d = x_cols.size();
    for (std::size_t k = 1; k <= d; ++k)
        if (!x_cols.count(k)) throw CsvError("running-variable columns must be x1..xd", lineno, "x" + std::to_string(k));

    Dataset data;
    data.d = d;
    if (s_col >= 0) data.sigma = std::vector<double>{};
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != header.size())
            throw CsvError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()),
                           lineno, "");
        auto finite = [&](int c) {
            const auto v = to_double(f[static_cast<std::size_t>(c)]);
            if (!v || !std::isfinite(*v))
                throw CsvError("not a finite number: '" + f[static_cast<std::size_t>(c)] + "'", lineno,
                               header[static_cast<std::size_t>(c)]);
            return *v;
        };
        data.y.push_back(finite(y_col));
        for (std::size_t k = 1; k <= d; ++k) data.x.push_back(finite(x_cols[k]));
        if (t_col >= 0) {
            const auto& v = f[static_cast<std::size_t>(t_col)];
            if (v != "0" && v != "1") throw CsvError("treated must be 0 or 1, found '" + v + "'", lineno, "treated");
            data.treated.push_back(v == "1" ? 1 : 0);
        }
        if (s_col >= 0) {
            const double s = finite(s_col);
            if (!(s > 0.0)) throw CsvError("sigma must be strictly positive", lineno, "sigma");
            data.sigma->push_back(s);
        }
    }
    if (data.y.empty()) throw CsvError("CSV has a header but no data rows", lineno, "");
    return data;
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file '" + path + "'");
    return parse_csv(in);
}

namespace {

// ---------------------------------------------------------------- options

struct Options {
    std::string command;
    std::string data_path, config_path, out_path, format = "json";
    std::string c = "", c_lo = "", c_hi = "";
    double alpha = 0.05;
    std::string norm = "l1", norm_weights;
    std::string monotone = "all", decreasing;
    std::string direction = "lower";
    std::string variance = "auto";
    std::size_t nn_j = 3;
    std::size_t mc_draws = 10000;
    std::uint64_t seed = 20240101;
    double epsilon = 0.005;
    std::size_t grid_cap = 12;
    std::size_t grid_j = 0;  // 0: choose J by the stop rule
    std::string rule = "auto", treat = "below", cutoff, wav_weights;
    std::string c_grid;
    // gain without data, simulate
    std::size_t n = 500, d = 1;
    std::string designs = "1", families = "f2", methods = "minimax";
    std::size_t reps = 1000;
    unsigned threads = 0;
    double theta = 1.0;
};

json options_json(const Options& o) {
    return json{{"c", o.c},
                {"c_lo", o.c_lo},
                {"c_hi", o.c_hi},
                {"alpha", o.alpha},
                {"norm", o.norm},
                {"norm_weights", o.norm_weights},
                {"monotone", o.monotone},
                {"decreasing", o.decreasing},
                {"direction", o.direction},
                {"variance", o.variance},
                {"nn_j", o.nn_j},
                {"mc_draws", o.mc_draws},
                {"seed", o.seed},
                {"epsilon", o.epsilon},
                {"grid_cap", o.grid_cap},
                {"grid_j", o.grid_j},
                {"rule", o.rule},
                {"treat", o.treat},
                {"cutoff", o.cutoff},
                {"wav_weights", o.wav_weights},
                {"c_grid", o.c_grid},
                {"n", o.n},
                {"d", o.d},
                {"designs", o.designs},
                {"families", o.families},
                {"methods", o.methods},
                {"reps", o.reps},
                {"threads", o.threads},
                {"theta", o.theta},
                {"format", o.format}};
}

template <class T>
void take(const json& cfg, const std::set<std::string>& given, const char* key, T& field) {
    if (given.count(key) || !cfg.contains(key)) return;
    const auto& v = cfg.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
        if (v.is_string()) field = v.get<std::string>();
        else if (v.is_number()) {
            std::ostringstream ss;
            ss << std::setprecision(17) << v.get<double>();
            field = ss.str();
        } else if (v.is_array()) {
            std::string s;
            for (const auto& e : v) {
                if (!s.empty()) s += ",";
                if (e.is_string()) s += e.get<std::string>();
                else {
                    std::ostringstream ss;
                    ss << std::setprecision(17) << e.get<double>();
                    s += ss.str();
                }
            }
            field = s;
        } else {
            throw InputError(std::string("config key '") + key + "' has the wrong type");
        }
    } else {
        if (!v.is_number()) throw InputError(std::string("config key '") + key + "' must be a number");
        if constexpr (std::is_integral_v<T>) {
            const double x = v.get<double>();
            if (x < 0 || x != std::floor(x)) throw InputError(std::string("config key '") + key + "' must be a nonnegative integer");
            field = static_cast<T>(x);
        } else {
            field = v.get<T>();
        }
    }
}

void apply_config(const std::string& path, const std::set<std::string>& given, Options& o) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("config is not valid JSON: " + std::string(e.what()));
    }
    if (cfg.contains("config") && cfg.at("config").is_object()) cfg = cfg.at("config");  // a previous report
    if (!cfg.is_object()) throw InputError("config must be a JSON object");
    static const std::set<std::string> known{
        "c", "c_lo", "c_hi", "alpha", "norm", "norm_weights", "monotone", "decreasing", "direction", "variance",
        "nn_j", "mc_draws", "seed", "epsilon", "grid_cap", "grid_j", "rule", "treat", "cutoff", "wav_weights",
        "c_grid", "n", "d", "designs", "families", "methods", "reps", "threads", "theta", "format", "data"};
    for (const auto& [k, v] : cfg.items())
        if (!known.count(k)) throw InputError("unknown config key '" + k + "'");
    take(cfg, given, "c", o.c);
    take(cfg, given, "c_lo", o.c_lo);
    take(cfg, given, "c_hi", o.c_hi);
    take(cfg, given, "alpha", o.alpha);
    take(cfg, given, "norm", o.norm);
    take(cfg, given, "norm_weights", o.norm_weights);
    take(cfg, given, "monotone", o.monotone);
    take(cfg, given, "decreasing", o.decreasing);
    take(cfg, given, "direction", o.direction);
    take(cfg, given, "variance", o.variance);
    take(cfg, given, "nn_j", o.nn_j);
    take(cfg, given, "mc_draws", o.mc_draws);
    take(cfg, given, "seed", o.seed);
    take(cfg, given, "epsilon", o.epsilon);
    take(cfg, given, "grid_cap", o.grid_cap);
    take(cfg, given, "grid_j", o.grid_j);
    take(cfg, given, "rule", o.rule);
    take(cfg, given, "treat", o.treat);
    take(cfg, given, "cutoff", o.cutoff);
    take(cfg, given, "wav_weights", o.wav_weights);
    take(cfg, given, "c_grid", o.c_grid);
    take(cfg, given, "n", o.n);
    take(cfg, given, "d", o.d);
    take(cfg, given, "designs", o.designs);
    take(cfg, given, "families", o.families);
    take(cfg, given, "methods", o.methods);
    take(cfg, given, "reps", o.reps);
    take(cfg, given, "threads", o.threads);
    take(cfg, given, "theta", o.theta);
    take(cfg, given, "format", o.format);
    take(cfg, given, "data", o.data_path);
}

void validate_common(const Options& o) {
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw InputError("--alpha must lie in (0, 1)");
    if (o.format != "json" && o.format != "csv") throw InputError("--format must be json or csv");
    if (o.direction != "lower" && o.direction != "upper") throw InputError("--direction must be lower or upper");
    if (o.variance != "auto" && o.variance != "known" && o.variance != "estimate")
        throw InputError("--variance must be known or estimate");
    if (o.treat != "below" && o.treat != "above") throw InputError("--treat must be below or above");
    if (!(o.epsilon > 0.0)) throw InputError("--epsilon must be positive");
}

// ---------------------------------------------------------------- setup

struct Prepared {
    Dataset data;  // preprocessed
    FunctionSpace space;
    VariancePlan plan;
    VarianceMode mode = VarianceMode::Known;
    std::vector<std::string> log;
    std::size_t n_raw = 0;
};

NormKind parse_norm(const std::string& s) {
    if (s == "l1") return NormKind::L1;
    if (s == "l2") return NormKind::L2;
    if (s == "linf") return NormKind::Linf;
    return norm_kind_from_string(s);
}

FunctionSpace build_space(const Options& o, std::size_t d, double C) {
    FunctionSpace fs;
    fs.C = C;
    fs.V = MonotoneSet(d, index_list(o.monotone, d, "--monotone"));
    fs.decreasing = index_list(o.decreasing, d, "--decreasing");
    std::vector<double> w = number_list(o.norm_weights, "--norm-weights");
    if (w.empty()) w.assign(d, 1.0);
    if (w.size() != d) throw InputError("--norm-weights needs " + std::to_string(d) + " entries");
    fs.norm = NormSpec(parse_norm(o.norm), w);
    return fs;
}

double parse_c(const std::string& s, const char* flag, bool allow_inf) {
    if (s.empty()) throw InputError(std::string(flag) + " is required");
    const double v = number(s, flag);
    if (std::isinf(v) && !allow_inf)
        throw InputError(std::string(flag) + " inf is accepted only by the adaptive command");
    if (!(v > 0.0)) throw InputError(std::string(flag) + " must be positive");
    return v;
}

Prepared prepare(const Options& o, double C) {
    if (o.data_path.empty()) throw InputError("a data CSV path is required");
    const Dataset raw = read_csv(o.data_path);
    Prepared p;
    p.n_raw = raw.n();
    p.space = build_space(o, raw.d, C);
    TreatmentRule rule;
    std::string kind = o.rule;
    if (kind == "auto") kind = raw.has_treated() ? "column" : "mra";
    if (kind == "column") rule.kind = RuleKind::Column;
    else if (kind == "mro") rule.kind = RuleKind::MRO;
    else if (kind == "mra") rule.kind = RuleKind::MRA;
    else if (kind == "wav") rule.kind = RuleKind::WAV;
    else throw InputError("--rule must be column, mro, mra or wav");
    rule.direction = o.treat == "below" ? Direction::BelowTreated : Direction::AboveTreated;
    std::vector<double> cut = number_list(o.cutoff, "--cutoff");
    if (cut.empty()) cut.assign(raw.d, 0.0);
    rule.cutoffs = cut;
    rule.wav_weights = number_list(o.wav_weights, "--wav-weights");
    p.data = preprocess(raw, rule, p.space, cut, &p.log);
    // Work in the increasing frame from here on.
    p.space.decreasing.clear();
    if (o.variance == "known" || (o.variance == "auto" && p.data.sigma)) p.mode = VarianceMode::Known;
    else p.mode = VarianceMode::Estimate;
    p.plan = plan_variance(p.data, p.mode, o.nn_j);
    return p;
}

json data_json(const Options& o, const Prepared& p) {
    return json{{"path", o.data_path},
                {"n", p.data.n()},
                {"d", p.data.d},
                {"n_treated", p.data.count_treated()},
                {"n_control", p.data.n() - p.data.count_treated()}};
}

json variance_json(const Prepared& p) {
    json v{{"mode", p.mode == VarianceMode::Known ? "known" : "estimate"}};
    if (p.plan.estimate) {
        const auto& e = *p.plan.estimate;
        v["stage1_treated"] = e.stage1_treated;
        v["stage1_control"] = e.stage1_control;
        v["nn_j"] = e.J_nn;
        v["bandwidth_treated"] = e.bandwidth_treated;
        v["bandwidth_control"] = e.bandwidth_control;
        v["warnings"] = e.warnings;
    }
    return v;
}

json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

json bw_json(const Bandwidth& h) { return json{{"plus", num(h.plus)}, {"minus", num(h.minus)}}; }

json report_head(const Options& o) {
    return json{{"schema_version", kSchemaVersion},
                {"software", {{"name", "rdmono"}, {"version", kVersion}}},
                {"command", o.command},
                {"seed", o.seed},
                {"config", options_json(o)}};
}

// ---------------------------------------------------------------- output

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    std::ostringstream ss;
    ss << std::setprecision(17) << v.get<double>();
    return ss.str();
}

std::string to_csv(const Table& t) {
    std::ostringstream ss;
    for (std::size_t k = 0; k < t.columns.size(); ++k) ss << (k ? "," : "") << t.columns[k];
    ss << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) ss << (k ? "," : "") << csv_cell(r[k]);
        ss << "\n";
    }
    return ss.str();
}

Table flat_table(const json& obj) {
    Table t;
    std::vector<json> row;
    for (const auto& [k, v] : obj.items()) {
        if (v.is_object() || v.is_array()) continue;
        t.columns.push_back(k);
        row.push_back(v);
    }
    t.rows.push_back(row);
    return t;
}

// ---------------------------------------------------------------- commands

json minimax_json(const MinimaxCI& ci) {
    const auto& a = ci.at;
    return json{{"C", num(ci.C)},
                {"alpha", ci.alpha},
                {"estimate", a.estimate},
                {"lower", ci.lower},
                {"upper", ci.upper},
                {"half_length", ci.half_length},
                {"worst_bias", a.worst_bias},
                {"sd", a.sd},
                {"delta", a.delta},
                {"omega", a.modulus.omega()},
                {"omega_t", a.modulus.omega_t},
                {"omega_c", a.modulus.omega_c},
                {"omega_prime", a.modulus.omega_prime},
                {"h_treated", a.h_t},
                {"h_control", a.h_c},
                {"nw_treated", a.nw_t},
                {"nw_control", a.nw_c},
                {"a_treated", a.a_t},
                {"a_control", a.a_c},
                {"local_min_verified", ci.local_min_verified}};
}

std::pair<json, Table> cmd_minimax(const Options& o) {
    const double C = parse_c(o.c, "--c", false);
    const auto p = prepare(o, C);
    const auto sides = split_sides(p.data, p.space, p.plan.sigma2, p.plan.sd_sigma2);
    const auto ci = minimax_ci(sides, C, o.alpha);
    json rep = report_head(o);
    rep["data"] = data_json(o, p);
    rep["variance"] = variance_json(p);
    rep["preprocess_log"] = p.log;
    rep["result"] = minimax_json(ci);
    std::vector<std::string> warn;
    if (!ci.local_min_verified) warn.push_back("delta optimum is not a verified local minimum");
    rep["warnings"] = warn;
    return {rep, flat_table(rep["result"])};
}

std::pair<json, Table> cmd_sensitivity(const Options& o) {
    const auto grid = number_list(o.c_grid, "--c-grid");
    if (grid.empty()) throw InputError("--c-grid is required for sensitivity");
    for (double C : grid)
        if (!(C > 0.0) || !std::isfinite(C)) throw InputError("--c-grid values must be positive and finite");
    const auto p = prepare(o, grid.front());
    const auto sides = split_sides(p.data, p.space, p.plan.sigma2, p.plan.sd_sigma2);
    json rows = json::array();
    Table t;
    json crossing = nullptr;
    for (double C : grid) {
        auto row = minimax_json(minimax_ci(sides, C, o.alpha));
        const bool zero = row["lower"].get<double>() <= 0.0 && 0.0 <= row["upper"].get<double>();
        row["contains_zero"] = zero;
        if (zero && (crossing.is_null() || C < crossing.get<double>())) crossing = C;
        if (t.columns.empty())
            for (const auto& [k, v] : row.items()) t.columns.push_back(k);
        std::vector<json> r;
        for (const auto& k : t.columns) r.push_back(row[k]);
        t.rows.push_back(r);
        rows.push_back(row);
    }
    json rep = report_head(o);
    rep["data"] = data_json(o, p);
    rep["variance"] = variance_json(p);
    rep["preprocess_log"] = p.log;
    rep["rows"] = rows;
    rep["smallest_c_containing_zero"] = crossing;
    return {rep, t};
}

struct GridInputs {
    double C, c_lo, c_hi;
};

GridInputs grid_inputs(const Options& o, const Prepared* p, std::vector<std::string>& notes) {
    GridInputs g;
    g.C = o.c.empty() ? std::numeric_limits<double>::infinity() : parse_c(o.c, "--c", true);
    g.c_hi = parse_c(o.c_hi, "--c-hi", false);
    if (o.c_lo.empty()) {
        if (!p) throw InputError("--c-lo is required");
        const auto cb = c_lower_bound(p->data, p->space);
        g.c_lo = std::clamp(cb.suggested_c_lo(), 0.0, g.c_hi);
        notes.push_back("--c-lo not given; using the data-based lower bound " + std::to_string(g.c_lo));
    } else {
        g.c_lo = number(o.c_lo, "--c-lo");
    }
    if (!(g.c_lo >= 0.0) || !(g.c_lo <= g.c_hi)) throw InputError("need 0 <= --c-lo <= --c-hi");
    if (!(g.c_hi <= g.C)) throw InputError("need --c-hi <= --c");
    return g;
}

json grid_json(const GridSelection& g) {
    return json{{"C_list", g.C_list},       {"J_star", g.J_star},   {"delta_history", g.delta_history},
                {"se_history", g.se_history}, {"epsilon", g.epsilon}, {"capped", g.capped},
                {"warnings", g.warnings}};
}

void require_allocation(const Prepared& p, CIDirection dir) {
    const auto a = check_allocation(p.data, p.space);
    const bool ok = dir == CIDirection::Lower ? a.lower_feasible : a.upper_feasible;
    if (ok) return;
    std::string msg = "adaptive CI is not available in this direction:";
    const std::string prefix = dir == CIDirection::Lower ? "lower: " : "upper: ";
    for (const auto& r : a.reasons)
        if (r.rfind(prefix, 0) == 0) msg += " " + r.substr(prefix.size()) + ";";
    throw InputError(msg);
}

std::pair<json, Table> cmd_grid(const Options& o) {
    const double C = o.c.empty() ? std::numeric_limits<double>::infinity() : parse_c(o.c, "--c", true);
    const auto p = prepare(o, C);
    std::vector<std::string> notes;
    const auto gi = grid_inputs(o, &p, notes);
    const auto dir = o.direction == "lower" ? CIDirection::Lower : CIDirection::Upper;
    require_allocation(p, dir);
    const auto sides = oriented_sides(p.data, p.space, p.plan.sigma2, p.plan.sd_sigma2, dir);
    const auto g = choose_grid(sides, gi.c_lo, gi.c_hi, gi.C, o.alpha, o.epsilon, o.grid_cap, o.mc_draws, o.seed);
    json rep = report_head(o);
    rep["data"] = data_json(o, p);
    rep["variance"] = variance_json(p);
    rep["preprocess_log"] = p.log;
    rep["notes"] = notes;
    rep["result"] = grid_json(g);
    Table t{{"J", "delta", "se"}, {}};
    for (std::size_t k = 0; k < g.delta_history.size(); ++k) t.rows.push_back({k + 2, g.delta_history[k], g.se_history[k]});
    return {rep, t};
}

std::pair<json, Table> cmd_adaptive(const Options& o) {
    const double C = o.c.empty() ? std::numeric_limits<double>::infinity() : parse_c(o.c, "--c", true);
    const auto p = prepare(o, C);
    std::vector<std::string> notes;
    const auto gi = grid_inputs(o, &p, notes);
    const auto dir = o.direction == "lower" ? CIDirection::Lower : CIDirection::Upper;
    require_allocation(p, dir);
    json grid = nullptr;
    std::vector<double> cl;
    if (o.grid_j > 0) {
        cl = equidistant_grid(gi.c_lo, gi.c_hi, o.grid_j);
    } else {
        const auto sides = oriented_sides(p.data, p.space, p.plan.sigma2, p.plan.sd_sigma2, dir);
        const auto g = choose_grid(sides, gi.c_lo, gi.c_hi, gi.C, o.alpha, o.epsilon, o.grid_cap, o.mc_draws, o.seed);
        cl = g.C_list;
        grid = grid_json(g);
    }
    const auto ci = adaptive_ci(p.data, p.space, p.plan.sigma2, p.plan.sd_sigma2, cl, o.alpha, dir, o.mc_draws, o.seed);
    const double sign = dir == CIDirection::Lower ? 1.0 : -1.0;
    json pcs = json::array();
    for (const auto& pc : ci.per_constant) {
        pcs.push_back(json{{"C_j", pc.C_j},
                           {"endpoint", sign * pc.endpoint},
                           {"estimate", sign * pc.estimate},
                           {"sd", pc.sd},
                           {"worst_bias", pc.worst_bias},
                           {"h_treated", bw_json(pc.h_t)},
                           {"h_control", bw_json(pc.h_c)},
                           {"omega", pc.modulus.omega()}});
    }
    json res{{"direction", o.direction},
             {"endpoint", ci.endpoint},
             {"lower", dir == CIDirection::Lower ? num(ci.endpoint) : json("-inf")},
             {"upper", dir == CIDirection::Upper ? num(ci.endpoint) : json("inf")},
             {"C", num(ci.C)},
             {"alpha", ci.alpha},
             {"tau_star", ci.tau_star},
             {"C_list", ci.C_list},
             {"argmax_C", ci.C_list.at(ci.argmax)},
             {"mc_draws", ci.mc_draws},
             {"per_constant", pcs}};
    json rep = report_head(o);
    rep["data"] = data_json(o, p);
    rep["variance"] = variance_json(p);
    rep["preprocess_log"] = p.log;
    rep["notes"] = notes;
    rep["grid"] = grid;
    rep["result"] = res;
    rep["warnings"] = ci.warnings;
    Table t;
    t.columns = {"C_j", "endpoint", "estimate", "sd", "worst_bias", "omega"};
    for (const auto& r : pcs) t.rows.push_back({r["C_j"], r["endpoint"], r["estimate"], r["sd"], r["worst_bias"], r["omega"]});
    return {rep, t};
}

std::pair<json, Table> cmd_cbound(const Options& o) {
    const auto p = prepare(o, 1.0);
    const auto r = c_lower_bound(p.data, p.space);
    auto side = [](const SideBound& s) {
        return json{{"mu", s.mu},       {"n", s.n},         {"split", s.split}, {"dropped_median", s.dropped_median},
                    {"pairs", s.pairs}, {"skipped", s.skipped}};
    };
    json rep = report_head(o);
    rep["data"] = data_json(o, p);
    rep["preprocess_log"] = p.log;
    rep["result"] = json{{"method", r.method},
                         {"mu_treated", r.treated.mu},
                         {"mu_control", r.control.mu},
                         {"suggested_c_lo", r.suggested_c_lo()},
                         {"treated", side(r.treated)},
                         {"control", side(r.control)},
                         {"notes", r.notes}};
    return {rep, flat_table(rep["result"])};
}

Dataset gain_design(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset data;
    data.d = d;
    data.sigma = std::vector<double>(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        bool t = true;
        for (std::size_t k = 0; k < d; ++k) {
            const double v = u(rng);
            data.x.push_back(v);
            t = t && v < 0.0;
        }
        data.y.push_back(0.0);
        data.treated.push_back(t ? 1 : 0);
    }
    return data;
}

std::pair<json, Table> cmd_gain(const Options& o) {
    auto grid = number_list(o.c_grid.empty() ? "0.1:3:30" : o.c_grid, "--c-grid");
    Dataset data;
    FunctionSpace space;
    std::vector<double> s2;
    json src;
    if (!o.data_path.empty()) {
        const auto p = prepare(o, grid.front());
        data = p.data;
        space = p.space;
        s2 = p.plan.sigma2;
        src = data_json(o, p);
    } else {
        if (o.n < 4 || o.d < 1) throw InputError("--n must be at least 4 and --d at least 1");
        data = gain_design(o.n, o.d, o.seed);
        space = build_space(o, o.d, grid.front());
        s2 = known_sigma2(data);
        src = json{{"generated", "uniform on [-1,1]^d, treated iff all coordinates < 0, sigma = 1"},
                   {"n", o.n},
                   {"d", o.d}};
    }
    const auto rows = gain_curve(data, space, s2, grid, o.alpha);
    json out = json::array();
    Table t{{"C", "ratio", "chi_mono", "chi_none", "delta", "bw_ratio_treated", "bw_ratio_control"}, {}};
    double peak = 0.0, peak_c = 0.0;
    for (const auto& r : rows) {
        out.push_back(json{{"C", r.C},
                           {"ratio", r.ratio},
                           {"chi_mono", r.chi_mono},
                           {"chi_none", r.chi_none},
                           {"delta", r.delta},
                           {"bw_ratio_treated", r.bw_ratio_t},
                           {"bw_ratio_control", r.bw_ratio_c}});
        t.rows.push_back({r.C, r.ratio, r.chi_mono, r.chi_none, r.delta, r.bw_ratio_t, r.bw_ratio_c});
        if (r.ratio > peak) {
            peak = r.ratio;
            peak_c = r.C;
        }
    }
    json rep = report_head(o);
    rep["data"] = src;
    rep["rows"] = out;
    rep["peak"] = json{{"ratio", peak}, {"C", peak_c}};
    return {rep, t};
}

std::pair<json, Table> cmd_simulate(const Options& o) {
    std::vector<int> designs;
    for (double v : number_list(o.designs, "--designs")) {
        if (v != std::floor(v)) throw InputError("--designs entries must be integers 1..8");
        designs.push_back(static_cast<int>(v));
    }
    std::vector<Family> fams;
    for (const auto& f : split(o.families, ',')) fams.push_back(family_from_string(f));
    const auto vmode = o.variance == "known" ? VarianceMode::Known : VarianceMode::Estimate;
    std::vector<MethodConfig> methods;
    for (const auto& m : split(o.methods, ',')) {
        MethodConfig mc;
        mc.label = m;
        mc.alpha = o.alpha;
        mc.variance = vmode;
        mc.nn_j = o.nn_j;
        mc.mc_draws = o.mc_draws;
        if (m == "minimax") {
            mc.kind = MethodKind::Minimax;
            mc.C = o.c.empty() ? 3.0 : parse_c(o.c, "--c", false);
        } else if (m == "adaptive") {
            mc.kind = MethodKind::OneSided;
            mc.C = std::numeric_limits<double>::infinity();
            const double lo = o.c_lo.empty() ? 0.2 : number(o.c_lo, "--c-lo");
            const double hi = o.c_hi.empty() ? 1.0 : number(o.c_hi, "--c-hi");
            mc.C_list = equidistant_grid(lo, hi, o.grid_j ? o.grid_j : 5);
        } else if (m == "oracle") {
            mc.kind = MethodKind::Oracle;
            mc.C = std::numeric_limits<double>::infinity();
        } else {
            throw InputError("--methods entries must be minimax, adaptive or oracle");
        }
        methods.push_back(mc);
    }
    if (o.reps == 0) throw InputError("--reps must be at least 1");
    json rows = json::array();
    Table t{{"design", "family", "method", "C_true", "reps", "coverage", "se", "mean_length", "length_se", "runtime_s", "seed"}, {}};
    for (int des : designs) {
        for (Family f : fams) {
            auto spec = sim_design(des, f, o.theta);
            const auto res = run_mc(spec, methods, o.reps, o.seed, o.threads);
            for (const auto& r : res) {
                rows.push_back(json{{"design", des},
                                    {"family", to_string(f)},
                                    {"method", r.label},
                                    {"C_true", spec.C},
                                    {"reps", r.reps},
                                    {"coverage", r.coverage},
                                    {"se", r.se},
                                    {"mean_length", r.mean_length},
                                    {"length_se", r.length_se},
                                    {"runtime_s", r.runtime_s},
                                    {"seed", r.seed}});
                t.rows.push_back({des, to_string(f), r.label, spec.C, r.reps, r.coverage, r.se, r.mean_length,
                                  r.length_se, r.runtime_s, r.seed});
            }
        }
    }
    json rep = report_head(o);
    rep["rows"] = rows;
    return {rep, t};
}

json error_json(const std::string& type, const std::string& msg) {
    return json{{"schema_version", kSchemaVersion}, {"error", {{"type", type}, {"message", msg}}}};
}

void add_options(CLI::App* sc, Options& o, std::map<std::string, CLI::Option*>& opts, bool data_arg) {
    if (data_arg) sc->add_option("data", o.data_path, "CSV with columns y, x1..xd [, treated] [, sigma]");
    opts["config"] = sc->add_option("--config", o.config_path, "JSON config; flags override it");
    opts["out"] = sc->add_option("--out", o.out_path, "write the report here instead of stdout");
    opts["format"] = sc->add_option("--format", o.format, "json or csv");
    opts["c"] = sc->add_option("--c", o.c, "Lipschitz constant (inf allowed for adaptive)");
    opts["c_lo"] = sc->add_option("--c-lo", o.c_lo, "lower end of the adaptation range");
    opts["c_hi"] = sc->add_option("--c-hi", o.c_hi, "upper end of the adaptation range");
    opts["alpha"] = sc->add_option("--alpha", o.alpha, "1 - confidence level");
    opts["norm"] = sc->add_option("--norm", o.norm, "l1, l2 or linf (weighted by --norm-weights)");
    opts["norm_weights"] = sc->add_option("--norm-weights", o.norm_weights, "comma list of positive weights");
    opts["monotone"] = sc->add_option("--monotone", o.monotone, "monotone coordinates: all, none or 1,2,...");
    opts["decreasing"] = sc->add_option("--decreasing", o.decreasing, "coordinates where f decreases");
    opts["direction"] = sc->add_option("--direction", o.direction, "lower or upper one-sided CI");
    opts["variance"] = sc->add_option("--variance", o.variance, "known or estimate");
    opts["nn_j"] = sc->add_option("--nn-j", o.nn_j, "nearest neighbours for the variance");
    opts["mc_draws"] = sc->add_option("--mc-draws", o.mc_draws, "Monte Carlo draws for tau and Delta");
    opts["seed"] = sc->add_option("--seed", o.seed, "random seed");
    opts["epsilon"] = sc->add_option("--epsilon", o.epsilon, "grid stop tolerance on Delta");
    opts["grid_cap"] = sc->add_option("--grid-cap", o.grid_cap, "largest grid size tried");
    opts["grid_j"] = sc->add_option("--grid-j", o.grid_j, "fixed grid size (skips the stop rule)");
    opts["rule"] = sc->add_option("--rule", o.rule, "column, mro, mra or wav");
    opts["treat"] = sc->add_option("--treat", o.treat, "below or above: side of the cutoff that is treated");
    opts["cutoff"] = sc->add_option("--cutoff", o.cutoff, "cutoff point, comma list");
    opts["wav_weights"] = sc->add_option("--wav-weights", o.wav_weights, "weights for the wav rule");
    opts["c_grid"] = sc->add_option("--c-grid", o.c_grid, "C values: a,b,c or lo:hi:count");
    opts["n"] = sc->add_option("--n", o.n, "sample size for generated designs");
    opts["d"] = sc->add_option("--d", o.d, "dimension for generated designs");
    opts["designs"] = sc->add_option("--designs", o.designs, "simulation designs 1..8");
    opts["families"] = sc->add_option("--families", o.families, "f1,f2,f3,f4");
    opts["methods"] = sc->add_option("--methods", o.methods, "minimax,adaptive,oracle");
    opts["reps"] = sc->add_option("--reps", o.reps, "replications");
    opts["threads"] = sc->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    opts["theta"] = sc->add_option("--theta", o.theta, "true jump in simulations");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Honest inference for regression discontinuity under monotonicity", "rdmono"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"minimax", "minimax two-sided CI"},
        {"adaptive", "adaptive one-sided CI"},
        {"cbound", "data-based lower bound on C"},
        {"simulate", "Monte Carlo over the simulation designs"},
        {"gain", "length ratio with and without monotonicity"},
        {"grid", "choose the adaptation grid"},
        {"sensitivity", "minimax CI over a grid of C"}};
    for (const auto& [name, help] : cmds) {
        auto* sc = app.add_subcommand(name, help);
        add_options(sc, o, opts[name], name != "simulate");
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        out << error_json("input", e.what()).dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        for (const auto& [name, help] : cmds)
            if (app.got_subcommand(name)) o.command = name;
        std::set<std::string> given;
        for (const auto& [k, opt] : opts[o.command])
            if (opt->count() > 0) given.insert(k);
        if (!o.config_path.empty()) apply_config(o.config_path, given, o);
        validate_common(o);

        std::pair<json, Table> res;
        if (o.command == "minimax") res = cmd_minimax(o);
        else if (o.command == "adaptive") res = cmd_adaptive(o);
        else if (o.command == "cbound") res = cmd_cbound(o);
        else if (o.command == "simulate") res = cmd_simulate(o);
        else if (o.command == "gain") res = cmd_gain(o);
        else if (o.command == "grid") res = cmd_grid(o);
        else res = cmd_sensitivity(o);

        const std::string text = o.format == "csv" ? to_csv(res.second) : res.first.dump(2) + "\n";
        if (o.out_path.empty()) {
            out << text;
        } else {
            std::ofstream f(o.out_path);
            if (!f) throw InputError("cannot write '" + o.out_path + "'");
            f << text;
        }
        return 0;
    } catch (const CsvError& e) {
        auto j = error_json("input", e.what());
        j["error"]["row"] = e.row();
        j["error"]["column"] = e.column();
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << " (row " << e.row() << ", column '" << e.column() << "')\n";
        return 2;
    } catch (const InputError& e) {
        out << error_json("input", e.what()).dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        out << error_json("numeric", e.what()).dump(2) << "\n";
        err << "numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        out << error_json("numeric", e.what()).dump(2) << "\n";
        err << "failure: " << e.what() << "\n";
        return 1;
    }
}

} // namespace rdmono::cli

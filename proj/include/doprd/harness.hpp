#pragma once

// Benchmark orchestration: instance grids, perfect-information bounds, policy
// runs, gap metrics and CSV output.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doprd/error.hpp"
#include "doprd/instance.hpp"
#include "doprd/instance_io.hpp"
#include "doprd/mdp.hpp"
#include "doprd/optkernel.hpp"
#include "doprd/policies.hpp"

namespace doprd {

struct GapEntry {
    std::string policy;
    int served = 0;
    double gap_best = 0.0;
    double gap_ub = 0.0;
    bool is_best = false;
};

/// Relative gaps to the best policy and to the upper bound. Ties for best
/// are all flagged.
inline std::vector<GapEntry> compute_gaps(const std::vector<std::pair<std::string, int>>& served, int ub) {
    if (served.empty()) throw ParameterError("compute_gaps needs at least one policy");
    int best = 0;
    for (const auto& [p, n] : served) {
        if (n < 0) throw ParameterError("served counts must be non-negative");
        best = std::max(best, n);
    }
    if (ub < best) throw ConsistencyError("upper bound " + std::to_string(ub) + " below served count " + std::to_string(best));
    std::vector<GapEntry> out;
    for (const auto& [p, n] : served) {
        GapEntry g;
        g.policy = p;
        g.served = n;
        g.gap_best = best == 0 ? 0.0 : 1.0 - static_cast<double>(n) / best;
        g.gap_ub = ub == 0 ? 0.0 : 1.0 - static_cast<double>(n) / ub;
        g.is_best = n == best;
        out.push_back(g);
    }
    return out;
}

/// Per-rho loss relative to the best rho, for one policy.
inline std::map<int, double> sensitivity_gamma(const std::map<int, int>& served_by_rho) {
    int best = 0;
    for (const auto& [r, n] : served_by_rho) best = std::max(best, n);
    std::map<int, double> out;
    for (const auto& [r, n] : served_by_rho) out[r] = best == 0 ? 0.0 : 1.0 - static_cast<double>(n) / best;
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

struct BenchmarkConfig {
    std::vector<std::string> solomon;     ///< files to generate from
    std::vector<std::string> instances;   ///< ready-made instance files
    int customers = 20;
    std::vector<double> beta{1.0};
    std::vector<double> delta{0.0};
    std::vector<double> c{1.0};
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> policies{"pfa", "vfa", "me", "mh"};
    std::vector<int> rho{15};
    PolicyConfig policy{};
    double ub_time_limit = 60.0;
    int jobs = 1;
    double update_rate = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_scalar(const std::string& s, int line) {
    std::istringstream in(s);
    T v{};
    in >> v;
    if (!in || !(in >> std::ws).eof()) throw ParseError("bad value '" + s + "'", line);
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s, int line) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) out.push_back(parse_scalar<T>(item, line));
    if (out.empty()) throw ParseError("empty list", line);
    return out;
}

inline bool parse_bool(const std::string& s, int line) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ParseError("bad boolean '" + s + "'", line);
}

}  // namespace detail

/// Reads a flat `key = value` file. Lists are comma separated, `#` starts a
/// comment. Relative paths are resolved against `base_dir`.
inline BenchmarkConfig parse_benchmark_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    BenchmarkConfig cfg;
    std::string raw;
    int line = 0;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
    };
    while (std::getline(in, raw)) {
        ++line;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        raw = detail::trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        const std::string key = detail::trim(raw.substr(0, eq));
        const std::string val = detail::trim(raw.substr(eq + 1));
        using detail::parse_list;
        using detail::parse_scalar;
        if (key == "solomon") {
            cfg.solomon.clear();
            for (const auto& p : detail::split_list(val)) cfg.solomon.push_back(resolve(p));
        } else if (key == "instances") {
            cfg.instances.clear();
            for (const auto& p : detail::split_list(val)) cfg.instances.push_back(resolve(p));
        } else if (key == "customers") cfg.customers = parse_scalar<int>(val, line);
        else if (key == "beta") cfg.beta = parse_list<double>(val, line);
        else if (key == "delta") cfg.delta = parse_list<double>(val, line);
        else if (key == "c") cfg.c = parse_list<double>(val, line);
        else if (key == "seeds") cfg.seeds = parse_list<std::uint64_t>(val, line);
        else if (key == "policies") cfg.policies = detail::split_list(val);
        else if (key == "rho") cfg.rho = parse_list<int>(val, line);
        else if (key == "scenarios") cfg.policy.n_scenarios = parse_scalar<int>(val, line);
        else if (key == "gamma") cfg.policy.gamma = parse_scalar<double>(val, line);
        else if (key == "phi") cfg.policy.phi = parse_scalar<double>(val, line);
        else if (key == "det_time_limit") cfg.policy.det_time_limit = parse_scalar<double>(val, line);
        else if (key == "sto_time_limit") cfg.policy.sto_time_limit = parse_scalar<double>(val, line);
        else if (key == "myopic_time_limit") cfg.policy.myopic_time_limit = parse_scalar<double>(val, line);
        else if (key == "pc") cfg.policy.pc_enabled = detail::parse_bool(val, line);
        else if (key == "pc_known_frac") cfg.policy.pc_known_frac = parse_scalar<double>(val, line);
        else if (key == "pc_time_frac") cfg.policy.pc_time_frac = parse_scalar<double>(val, line);
        else if (key == "ub_time_limit") cfg.ub_time_limit = parse_scalar<double>(val, line);
        else if (key == "jobs") cfg.jobs = parse_scalar<int>(val, line);
        else if (key == "update_rate") cfg.update_rate = parse_scalar<double>(val, line);
        else throw ParseError("unknown key '" + key + "'", line);
    }
    if (cfg.solomon.empty() && cfg.instances.empty()) throw ParseError("config names no instances");
    if (cfg.policies.empty()) throw ParseError("config names no policies");
    for (const auto& p : cfg.policies)
        if (p != "pfa" && p != "vfa" && p != "me" && p != "mh") throw ParseError("unknown policy '" + p + "'");
    cfg.policy.validate();
    for (int r : cfg.rho)
        if (r < 1) throw ParseError("rho values must be positive");
    return cfg;
}

inline BenchmarkConfig read_benchmark_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return parse_benchmark_config(in, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Running

inline std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// Instances named by the config: generated ones first (file, beta, delta,
/// c, seed order), then ready-made files.
inline std::vector<Instance> benchmark_instances(const BenchmarkConfig& cfg) {
    std::vector<Instance> out;
    for (const auto& file : cfg.solomon) {
        std::ifstream in(file);
        if (!in) throw Error("cannot open '" + file + "'");
        SolomonData data = parse_customers(in, cfg.customers);
        data.name = std::filesystem::path(file).stem().string();
        for (double b : cfg.beta)
            for (double d : cfg.delta)
                for (double c : cfg.c)
                    for (auto seed : cfg.seeds) {
                        GenerationParams gp;
                        gp.beta = b;
                        gp.delta = d;
                        gp.c = c;
                        gp.seed = seed;
                        Instance inst = generate_instance(data, gp);
                        inst.name = data.name + "_n" + std::to_string(inst.size()) + "_b" + format_param(b) + "_d" +
                                    format_param(d) + "_c" + format_param(c) + "_s" + std::to_string(seed);
                        out.push_back(std::move(inst));
                    }
    }
    for (const auto& file : cfg.instances) out.push_back(read_instance_file(file));
    return out;
}

inline ReleaseList realized_releases(const Instance& inst) {
    ReleaseList rel;
    for (Node v = 1; v <= inst.size(); ++v) rel.emplace_back(v, inst.at(v).true_release);
    return rel;
}

/// Perfect-information bound: direct-trip bound first, then the exact
/// multi-trip optimum warm-started from its schedule.
inline ExactResult perfect_information_bound(const Instance& inst, double time_limit) {
    const auto rel = realized_releases(inst);
    const auto ut = ub_trips(rel, inst.travel, inst.deadline);
    OprdOptions opt;
    opt.trip_bound = std::max(1, ut.value);
    opt.time_limit_s = time_limit;
    opt.warm_start = &ut.trips;
    return solve_oprd_perfect(rel, inst.travel, inst.deadline, opt);
}

struct KpiRow {
    std::string instance;
    std::string policy;
    int served = 0;
    int ub_perfect = 0;
    double gap_best = 0.0;
    double gap_ub = 0.0;
    double runtime_s = 0.0;
    bool is_best = false;
    int rho = 0;
    double beta = 0.0, delta = 0.0, c = 0.0;
    std::uint64_t seed = 0;
    std::string ub_status;
    std::string status = "ok";
};

struct BenchmarkOutput {
    std::vector<KpiRow> rows;
    std::vector<SimulationResult> runs;  ///< same order as rows
    std::vector<ExactResult> bounds;     ///< one per instance
    std::vector<Instance> instances;
    int failures = 0;
};

/// Runs `body(i)` for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(int n, int jobs, F&& body) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) body(i);
        });
    for (auto& t : pool) t.join();
}

/// Every (instance, rho, policy) cell: bound, simulation, gaps. Results are
/// stored by cell index, so output order does not depend on scheduling.
inline BenchmarkOutput run_benchmark(const BenchmarkConfig& cfg) {
    BenchmarkOutput out;
    out.instances = benchmark_instances(cfg);
    if (out.instances.empty()) throw ParameterError("no instances to run");
    const int ni = static_cast<int>(out.instances.size());
    const int nr = static_cast<int>(cfg.rho.size());
    const int np = static_cast<int>(cfg.policies.size());

    out.bounds.resize(static_cast<std::size_t>(ni));
    std::vector<std::string> bound_error(static_cast<std::size_t>(ni));
    parallel_for(ni, cfg.jobs, [&](int i) {
        try {
            out.bounds[static_cast<std::size_t>(i)] = perfect_information_bound(out.instances[static_cast<std::size_t>(i)], cfg.ub_time_limit);
        } catch (const Error& e) {
            bound_error[static_cast<std::size_t>(i)] = e.what();
        }
    });

    const int cells = ni * nr * np;
    out.runs.resize(static_cast<std::size_t>(cells));
    parallel_for(cells, cfg.jobs, [&](int cell) {
        const int i = cell / (nr * np);
        const int r = cell / np % nr;
        const int p = cell % np;
        const Instance& inst = out.instances[static_cast<std::size_t>(i)];
        PolicyConfig pc = cfg.policy;
        pc.rho = cfg.rho[static_cast<std::size_t>(r)];
        auto policy = make_policy(cfg.policies[static_cast<std::size_t>(p)], pc);
        SimConfig sc;
        sc.phi = pc.phi;
        sc.update_rate = cfg.update_rate;
        out.runs[static_cast<std::size_t>(cell)] = simulate(inst, *policy, inst.meta.seed, sc);
    });

    out.rows.resize(static_cast<std::size_t>(cells));
    for (int i = 0; i < ni; ++i) {
        const Instance& inst = out.instances[static_cast<std::size_t>(i)];
        const auto& ub = out.bounds[static_cast<std::size_t>(i)];
        for (int r = 0; r < nr; ++r) {
            std::vector<std::pair<std::string, int>> served;
            std::vector<int> cell_of;
            for (int p = 0; p < np; ++p) {
                const int cell = (i * nr + r) * np + p;
                const auto& run = out.runs[static_cast<std::size_t>(cell)];
                KpiRow& row = out.rows[static_cast<std::size_t>(cell)];
                row.instance = inst.name;
                row.policy = cfg.policies[static_cast<std::size_t>(p)];
                row.served = run.total_served;
                row.ub_perfect = ub.bound;
                row.runtime_s = run.wall_s;
                row.rho = cfg.rho[static_cast<std::size_t>(r)];
                row.beta = inst.meta.beta;
                row.delta = inst.meta.delta;
                row.c = inst.meta.c;
                row.seed = inst.meta.seed;
                row.ub_status = to_string(ub.status);
                if (!bound_error[static_cast<std::size_t>(i)].empty()) {
                    row.status = "bound_failed";
                } else if (run.failed) {
                    row.status = "run_failed";
                } else if (run.total_served > ub.bound) {
                    row.status = "bound_violated";
                } else {
                    served.emplace_back(row.policy, row.served);
                    cell_of.push_back(cell);
                }
            }
            if (served.empty()) continue;
            const auto gaps = compute_gaps(served, ub.bound);
            for (std::size_t k = 0; k < gaps.size(); ++k) {
                KpiRow& row = out.rows[static_cast<std::size_t>(cell_of[k])];
                row.gap_best = gaps[k].gap_best;
                row.gap_ub = gaps[k].gap_ub;
                row.is_best = gaps[k].is_best;
            }
        }
    }
    for (const auto& row : out.rows) out.failures += row.status != "ok";
    return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvSchema = "1";

struct SummaryRow {
    std::string group;
    std::string policy;
    int rho = 0;
    int runs = 0;
    double gap_best_pct = 0.0;
    double gap_ub_pct = 0.0;
    int freq = 0;
    double runtime_s = 0.0;
};

/// Averages over successful rows grouped by `key(row)` and policy, plus one
/// "avg" group over everything. Groups keep first-appearance order.
template <class Key>
std::vector<SummaryRow> summarize(const std::vector<KpiRow>& rows, Key&& key) {
    std::vector<std::tuple<std::string, std::string, int>> order;
    std::map<std::tuple<std::string, std::string, int>, SummaryRow> acc;
    auto add = [&](const std::string& g, const KpiRow& r) {
        const auto k = std::make_tuple(g, r.policy, r.rho);
        auto [it, fresh] = acc.try_emplace(k);
        if (fresh) {
            order.push_back(k);
            it->second.group = g;
            it->second.policy = r.policy;
            it->second.rho = r.rho;
        }
        auto& s = it->second;
        ++s.runs;
        s.gap_best_pct += 100.0 * r.gap_best;
        s.gap_ub_pct += 100.0 * r.gap_ub;
        s.freq += r.is_best;
        s.runtime_s += r.runtime_s;
    };
    for (const auto& r : rows)
        if (r.status == "ok") add(key(r), r);
    for (const auto& r : rows)
        if (r.status == "ok") add("avg", r);
    std::vector<SummaryRow> out;
    for (const auto& k : order) {
        SummaryRow s = acc.at(k);
        s.gap_best_pct /= s.runs;
        s.gap_ub_pct /= s.runs;
        s.runtime_s /= s.runs;
        out.push_back(s);
    }
    return out;
}

inline std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline std::string details_csv(const std::vector<KpiRow>& rows, bool normalize_time) {
    std::ostringstream o;
    o << "instance,policy,served,ub_perfect,gap_best,gap_ub,runtime_s,is_best,rho,beta,delta,c,seed,ub_status,status,schema\n";
    for (const auto& r : rows) {
        o << r.instance << ',' << r.policy << ',' << r.served << ',' << r.ub_perfect << ',' << fmt(r.gap_best) << ','
          << fmt(r.gap_ub) << ',' << fmt(normalize_time ? 0.0 : r.runtime_s, 3) << ',' << (r.is_best ? 1 : 0) << ','
          << r.rho << ',' << format_param(r.beta) << ',' << format_param(r.delta) << ',' << format_param(r.c) << ','
          << r.seed << ',' << r.ub_status << ',' << r.status << ',' << kCsvSchema << '\n';
    }
    return o.str();
}

inline std::string summary_csv(const std::string& group_name, const std::vector<SummaryRow>& rows, bool normalize_time) {
    std::ostringstream o;
    o << group_name << ",policy,rho,runs,gap_best_pct,gap_ub_pct,freq,runtime_s,schema\n";
    for (const auto& s : rows) {
        o << s.group << ',' << s.policy << ',' << s.rho << ',' << s.runs << ',' << fmt(s.gap_best_pct, 4) << ','
          << fmt(s.gap_ub_pct, 4) << ',' << s.freq << ',' << fmt(normalize_time ? 0.0 : s.runtime_s, 3) << ','
          << kCsvSchema << '\n';
    }
    return o.str();
}

/// Per (instance, policy, rho) loss against that policy's best rho, then the
/// average per (policy, rho).
inline std::string sensitivity_csv(const std::vector<KpiRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::map<int, int>> served;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& r : rows) {
        if (r.status != "ok") continue;
        const auto k = std::make_pair(r.instance, r.policy);
        if (!served.count(k)) order.push_back(k);
        served[k][r.rho] = r.served;
    }
    std::ostringstream o;
    o << "instance,policy,rho,gamma_pct,schema\n";
    std::map<std::pair<std::string, int>, std::pair<double, int>> avg;
    std::vector<std::pair<std::string, int>> avg_order;
    for (const auto& k : order) {
        for (const auto& [rho, g] : sensitivity_gamma(served[k])) {
            o << k.first << ',' << k.second << ',' << rho << ',' << fmt(100.0 * g, 4) << ',' << kCsvSchema << '\n';
            const auto ak = std::make_pair(k.second, rho);
            if (!avg.count(ak)) avg_order.push_back(ak);
            avg[ak].first += 100.0 * g;
            avg[ak].second += 1;
        }
    }
    for (const auto& ak : avg_order)
        o << "avg," << ak.first << ',' << ak.second << ',' << fmt(avg[ak].first / avg[ak].second, 4) << ',' << kCsvSchema
          << '\n';
    return o.str();
}

/// Writes details.csv, summary_beta_delta.csv, summary_c.csv and, when more
/// than one rho was run, sensitivity.csv.
inline void write_benchmark_csv(const BenchmarkOutput& out, const std::string& dir, bool normalize_time) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
        if (!f) throw Error("cannot write " + name);
        f << text;
    };
    write("details.csv", details_csv(out.rows, normalize_time));
    write("summary_beta_delta.csv",
          summary_csv("beta_delta",
                      summarize(out.rows, [](const KpiRow& r) { return format_param(r.beta) + "/" + format_param(r.delta); }),
                      normalize_time));
    write("summary_c.csv", summary_csv("c", summarize(out.rows, [](const KpiRow& r) { return format_param(r.c); }), normalize_time));
    std::map<int, int> rhos;
    for (const auto& r : out.rows) rhos[r.rho] = 1;
    if (rhos.size() > 1) write("sensitivity.csv", sensitivity_csv(out.rows));
}

}  // namespace doprd

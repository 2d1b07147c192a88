#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "doprd/doprd.hpp"

namespace {

void add_policy_flags(CLI::App* cmd, doprd::PolicyConfig& pc) {
    cmd->add_option("--rho", pc.rho, "batch capacity")->check(CLI::PositiveNumber);
    cmd->add_option("--scenarios", pc.n_scenarios, "scenarios per epoch")->check(CLI::PositiveNumber);
    cmd->add_option("--gamma", pc.gamma, "discount on the future term")->check(CLI::Range(1e-12, 1.0));
    cmd->add_option("--phi", pc.phi, "longest wait between epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--det-tl", pc.det_time_limit, "per-epoch limit for the scenario models (s)")->check(CLI::PositiveNumber);
    cmd->add_option("--sto-tl", pc.sto_time_limit, "per-epoch limit for the two-stage model (s)")->check(CLI::PositiveNumber);
    cmd->add_flag("--pc,!--no-pc", pc.pc_enabled, "run the immediate-dispatch check");
}

nlohmann::json route_json(const doprd::Action& a) { return a.route; }

int cmd_gen(const std::string& solomon, int n, doprd::GenerationParams gp, bool floor_rounding, const std::string& out) {
    std::ifstream in(solomon);
    if (!in) throw doprd::Error("cannot open '" + solomon + "'");
    auto data = doprd::parse_customers(in, n);
    data.name = std::filesystem::path(solomon).stem().string();
    if (floor_rounding) gp.rounding = doprd::DistanceRounding::floor;
    auto inst = doprd::generate_instance(data, gp);
    if (out.empty() || out == "-")
        std::cout << doprd::write_instance_string(inst);
    else
        doprd::write_instance_file(inst, out);
    if (inst.meta.nonstandard) std::cerr << "note: parameters outside the benchmark grid\n";
    return 0;
}

int cmd_simulate(const std::string& path, const std::string& policy_name, std::uint64_t seed, const doprd::PolicyConfig& pc) {
    const auto inst = doprd::read_instance_file(path);
    auto policy = doprd::make_policy(policy_name, pc);
    doprd::SimConfig sc;
    sc.phi = pc.phi;
    const auto res = doprd::simulate(inst, *policy, seed, sc);
    for (const auto& e : res.trajectory) {
        nlohmann::json j{{"epoch", e.epoch},   {"t", e.t_e},         {"action", e.action.is_wait() ? "wait" : "dispatch"},
                         {"route", route_json(e.action)}, {"reward", e.reward}, {"known", e.known},
                         {"unknown", e.unknown}, {"ms", e.wall_ms}};
        if (e.pc.evaluated) j["pc_ell"] = e.pc.ell, j["pc_fired"] = e.pc.fired;
        if (!e.note.empty()) j["note"] = e.note;
        std::cout << j.dump() << '\n';
    }
    nlohmann::json summary{{"summary", true},        {"instance", res.instance}, {"policy", res.policy},
                           {"seed", res.seed},       {"served", res.total_served}, {"final_time", res.final_time},
                           {"failed", res.failed},   {"wall_s", res.wall_s}};
    if (res.failed) summary["diagnostic"] = res.diagnostic;
    std::cout << summary.dump() << '\n';
    return res.failed ? 3 : 0;
}

int cmd_ub(const std::string& path, double time_limit) {
    const auto inst = doprd::read_instance_file(path);
    const auto rel = doprd::realized_releases(inst);
    const auto ut = doprd::ub_trips(rel, inst.travel, inst.deadline);
    const auto perfect = doprd::perfect_information_bound(inst, time_limit);
    std::cout << "instance " << inst.name << '\n'
              << "ub_trips " << ut.value << '\n'
              << "perfect_value " << perfect.value << '\n'
              << "perfect_bound " << perfect.bound << '\n'
              << "status " << doprd::to_string(perfect.status) << '\n';
    for (const auto& t : perfect.trips) {
        std::cout << "trip start " << t.start << " duration " << t.tour.duration << " :";
        for (auto v : t.tour.nodes) std::cout << ' ' << v;
        std::cout << '\n';
    }
    return 0;
}

int cmd_bench(const std::string& config, const std::string& out, int jobs, bool normalize) {
    auto cfg = doprd::read_benchmark_config(config);
    if (jobs > 0) cfg.jobs = jobs;
    const auto res = doprd::run_benchmark(cfg);
    doprd::write_benchmark_csv(res, out, normalize);
    std::cerr << res.rows.size() << " runs, " << res.failures << " failed\n";
    return res.failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dispatching with stochastic release dates: simulator, exact bounds, benchmarks"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate an instance from a Solomon file");
    std::string solomon, out = "-";
    int n = 25;
    doprd::GenerationParams gp;
    bool floor_rounding = false;
    gen->add_option("--solomon", solomon, "Solomon-layout customer file")->required();
    gen->add_option("--n", n, "number of customers")->check(CLI::PositiveNumber);
    gen->add_option("--beta", gp.beta, "release dispersion factor");
    gen->add_option("--delta", gp.delta, "fraction of dynamic customers");
    gen->add_option("--c", gp.c, "deadline factor");
    gen->add_option("--seed", gp.seed, "generation seed");
    gen->add_option("--horizon", gp.horizon, "nominal horizon (default: depot due date)");
    gen->add_option("--sigma0", gp.sigma0, "base estimate std (default: 5% of horizon)");
    gen->add_flag("--floor", floor_rounding, "round travel times down instead of up");
    gen->add_option("--out", out, "output file (default stdout)");

    auto* sim = app.add_subcommand("simulate", "run one policy on one instance");
    std::string instance, policy = "pfa";
    std::uint64_t seed = 1;
    doprd::PolicyConfig pc;
    sim->add_option("--instance", instance, "instance file")->required();
    sim->add_option("--policy", policy, "pfa, vfa, me or mh")->check(CLI::IsMember({"pfa", "vfa", "me", "mh"}));
    sim->add_option("--seed", seed, "scenario sampling seed");
    add_policy_flags(sim, pc);

    auto* ub = app.add_subcommand("ub", "perfect-information bounds");
    double time_limit = 60.0;
    ub->add_option("--instance", instance, "instance file")->required();
    ub->add_option("--time-limit", time_limit, "seconds")->check(CLI::PositiveNumber);

    auto* bench = app.add_subcommand("bench", "run a benchmark grid");
    std::string config, out_dir;
    int jobs = 0;
    bool normalize = false;
    bench->add_option("--config", config, "key = value config file")->required();
    bench->add_option("--out", out_dir, "output directory")->required();
    bench->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
    bench->add_flag("--normalize-time", normalize, "write zero runtimes");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_gen(solomon, n, gp, floor_rounding, out);
        if (*sim) return cmd_simulate(instance, policy, seed, pc);
        if (*ub) return cmd_ub(instance, time_limit);
        if (*bench) return cmd_bench(config, out_dir, jobs, normalize);
    } catch (const doprd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

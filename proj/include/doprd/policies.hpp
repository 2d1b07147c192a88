#pragma once

// Dispatch policies: scenario-based look-ahead (PFA with consensus, VFA with
// a two-stage program), the exact myopic ME and the greedy myopic MH, plus
// the immediate-dispatch optimality check shared by PFA and VFA.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doprd/batch.hpp"
#include "doprd/mdp.hpp"
#include "doprd/optkernel.hpp"
#include "doprd/tour_dp.hpp"
#include "doprd/uncertainty.hpp"

namespace doprd {

struct PolicyConfig {
    int rho = 15;
    int n_scenarios = 30;
    double gamma = 0.9;
    Time phi = 10.0;
    double det_time_limit = 300.0;
    double sto_time_limit = 600.0;
    double myopic_time_limit = 600.0;
    double pc_known_frac = 0.25;
    double pc_time_frac = 0.75;
    bool pc_enabled = true;
    double fixed_td = 0.0;  ///< > 0 overrides the per-epoch batch duration
    KernelConfig kernel{};

    void validate() const {
        if (rho < 1 || n_scenarios < 1) throw ParameterError("rho and scenario count must be positive");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in (0, 1]");
        if (!(phi > 0.0)) throw ParameterError("phi must be positive");
        if (!(det_time_limit > 0.0 && sto_time_limit > 0.0 && myopic_time_limit > 0.0))
            throw ParameterError("time limits must be positive");
        if (pc_known_frac < 0.0 || pc_time_frac < 0.0) throw ParameterError("check thresholds must be non-negative");
    }
};

/// One scenario's optimum of the deterministic look-ahead model.
struct ScenarioSolution {
    std::vector<Node> route0;  ///< sorted
    Tour tour;
    double objective = 0.0;
    std::vector<int> z;               ///< per batch, 1 = executed
    std::map<Node, int> known_batch;  ///< known id -> spare batch index serving it
};

namespace detail {

inline constexpr double kObjTol = 1e-9;

// Future value of a batch plan given a route 0 of `size` known parcels that
// returns at `t_end`: every batch starting no earlier is executed, spare
// capacity of those absorbs remaining known parcels.
inline double future_value(const BatchPlan& plan, int known_left, Time t_end, int* usable = nullptr) {
    int served = 0, spare = 0, m = 0;
    for (const auto& b : plan.batches) {
        if (b.tau_start < t_end) break;
        ++m;
        served += b.rho_k;
        if (b.rho_k < plan.rho) spare += plan.rho - b.rho_k;
    }
    if (usable) *usable = m;
    return served + std::min(known_left, spare);
}

// Greedy cheapest insertion within a budget; a quick lower bound for the
// orienteering optimum.
inline std::vector<Node> greedy_insertion(std::vector<Node> cand, const TravelMatrix& d, Duration budget) {
    std::sort(cand.begin(), cand.end());
    std::vector<Node> route;
    Duration len = 0;
    std::vector<char> used(cand.size(), 0);
    while (true) {
        Duration best_add = kInfDuration;
        std::size_t best_c = cand.size(), best_pos = 0;
        for (std::size_t c = 0; c < cand.size(); ++c) {
            if (used[c]) continue;
            for (std::size_t p = 0; p <= route.size(); ++p) {
                const Node a = p == 0 ? kDepot : route[p - 1];
                const Node b = p == route.size() ? kDepot : route[p];
                const Duration add = d(a, cand[c]) + d(cand[c], b) - d(a, b);
                if (len + add <= budget && add < best_add) {
                    best_add = add;
                    best_c = c;
                    best_pos = p;
                }
            }
        }
        if (best_c == cand.size()) break;
        used[best_c] = 1;
        route.insert(route.begin() + static_cast<std::ptrdiff_t>(best_pos), cand[best_c]);
        len += best_add;
    }
    return route;
}

inline std::vector<Node> sorted_copy(std::vector<Node> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace detail

/// Outcome of the immediate-dispatch optimality check.
struct PcResult {
    std::optional<Action> action;
    PcRecord record;
    int ell_known = -1;
};

/// Dispatching now is provably optimal when the best single tour over all
/// unserved customers (release dates ignored) can be matched using known
/// parcels only. Skipped when few parcels are known and much time remains.
inline PcResult pc_check(const State& s, const TravelMatrix& travel, Time deadline, const PolicyConfig& cfg) {
    PcResult out;
    if (!cfg.pc_enabled) return out;
    const auto unserved = s.unserved();
    const Time remaining = deadline - s.t_e;
    if (static_cast<double>(s.known.size()) < cfg.pc_known_frac * static_cast<double>(unserved.size()) &&
        remaining > cfg.pc_time_frac * deadline)
        return out;
    out.record.evaluated = true;
    out.record.unserved = unserved;
    out.record.budget = remaining;
    const Duration b = budget_of(remaining);
    if (b < 0 || s.known.empty()) return out;
    // A greedy tour already beating |known| means the exact optimum does too.
    if (detail::greedy_insertion(unserved, travel, b).size() > s.known.size()) return out;
    KernelConfig kc = cfg.kernel;
    kc.dp.time_limit_s = cfg.det_time_limit;
    const auto all = solve_op(unserved, travel, remaining, kc);
    if (all.status != SolveStatus::optimal) return out;
    out.record.ell = all.value;
    if (all.value > static_cast<int>(s.known.size()) || all.value == 0) return out;
    const auto mine = solve_op(s.known, travel, remaining, kc);
    out.ell_known = mine.value;
    if (mine.status != SolveStatus::optimal || mine.value != all.value) return out;
    out.record.fired = true;
    out.action = Action::dispatch(mine.tour.nodes);
    return out;
}

/// Per-size shortest tours over the known parcels that fit the remaining time.
inline TourProfile known_profile(const State& s, const TravelMatrix& travel, Time deadline, double time_limit,
                                 const KernelConfig& kc = {}) {
    DpLimits lim = kc.dp;
    lim.time_limit_s = time_limit;
    return tour_profile(s.known, travel, budget_of(deadline - s.t_e), lim);
}

namespace detail {

// Picks the route 0 maximizing `value(size, duration)` over a tour profile.
// Ties go to the larger route; within a size the profile already holds the
// shortest tour, lexicographically smallest set first.
template <class F>
int best_size(const TourProfile& prof, F&& value, double* best_value) {
    int best = -1;
    double bv = 0.0;
    for (int k = prof.max_size(); k >= 0; --k) {
        const auto& slot = prof.by_size[static_cast<std::size_t>(k)];
        if (!slot) continue;
        const double v = value(k, slot->duration);
        if (best < 0 || v > bv + kObjTol) {
            best = k;
            bv = v;
        }
    }
    if (best_value) *best_value = bv;
    return best;
}

inline std::vector<Node> mask_nodes(const TourProfile& prof, Mask m) {
    std::vector<Node> out;
    for (; m; m &= m - 1) out.push_back(prof.nodes[static_cast<std::size_t>(std::countr_zero(m))]);
    return out;
}

}  // namespace detail

/// Exact optimum of the single-scenario look-ahead model, given the tour
/// profile of the known parcels.
inline ScenarioSolution det_ilp_solve(const State& s, const BatchPlan& plan, const TourProfile& prof, double gamma) {
    const int known = static_cast<int>(s.known.size());
    double obj = 0.0;
    const int k = detail::best_size(
        prof, [&](int size, Duration dur) { return size + gamma * detail::future_value(plan, known - size, s.t_e + dur); }, &obj);
    ScenarioSolution sol;
    sol.objective = obj;
    const auto& slot = *prof.by_size[static_cast<std::size_t>(k)];
    sol.route0 = detail::mask_nodes(prof, slot.mask);
    sol.tour = {slot.order, slot.duration, true};
    int usable = 0;
    detail::future_value(plan, known - k, s.t_e + slot.duration, &usable);
    sol.z.assign(plan.batches.size(), 0);
    for (int b = 0; b < usable; ++b) sol.z[static_cast<std::size_t>(b)] = 1;
    // Leftover known parcels fill spare slots in batch order.
    std::vector<Node> left;
    for (Node v : s.known)
        if (!std::binary_search(sol.route0.begin(), sol.route0.end(), v)) left.push_back(v);
    std::size_t next = 0;
    for (int b = 0; b < usable && next < left.size(); ++b) {
        const auto& batch = plan.batches[static_cast<std::size_t>(b)];
        for (int slot_i = batch.rho_k; slot_i < plan.rho && next < left.size(); ++slot_i) sol.known_batch[left[next++]] = batch.index;
    }
    return sol;
}

/// Convenience overload computing the profile itself.
inline ScenarioSolution det_ilp_solve(const State& s, const BatchPlan& plan, const TravelMatrix& travel, Time deadline,
                                      const PolicyConfig& cfg) {
    return det_ilp_solve(s, plan, known_profile(s, travel, deadline, cfg.det_time_limit, cfg.kernel), cfg.gamma);
}

/// Majority vote over scenario route-0 sets: a known parcel goes out when it
/// is in at least half of them. The chosen set is sequenced by a TSP; if that
/// tour overruns the deadline an orienteering tour over the set is used.
inline Action consensus(const std::vector<ScenarioSolution>& sols, const TravelMatrix& travel, Time t_e, Time deadline,
                        const KernelConfig& kc = {}) {
    if (sols.empty()) throw ParameterError("consensus needs at least one scenario solution");
    std::map<Node, int> votes;
    for (const auto& s : sols)
        for (Node v : s.route0) ++votes[v];
    std::vector<Node> chosen;
    const double threshold = static_cast<double>(sols.size()) / 2.0;
    for (const auto& [v, f] : votes)
        if (static_cast<double>(f) >= threshold) chosen.push_back(v);
    if (chosen.empty()) return Action::wait();
    const Tour t = solve_tsp(chosen, travel, kc);
    if (t.duration <= budget_of(deadline - t_e)) return Action::dispatch(t.nodes);
    const auto op = solve_op(chosen, travel, deadline - t_e, kc);
    if (op.value == 0) return Action::wait();
    return Action::dispatch(op.tour.nodes);
}

/// Batch plan for one scenario at the current epoch.
inline BatchPlan scenario_plan(const State& s, const Scenario& sc, const Instance& inst, const PolicyConfig& cfg) {
    const double td = cfg.fixed_td > 0.0 ? cfg.fixed_td : batch_duration(inst, s.unserved(), cfg.rho);
    return build_batches(s.t_e, s.known, sc.realized, inst.deadline, cfg.rho, td > 0.0 ? td : 1.0);
}

/// Route 0 of the two-stage program: one shared first-stage route, batch usage
/// per scenario, expected future value weighted by scenario probability.
inline ScenarioSolution sto_solve(const State& s, const std::vector<BatchPlan>& plans, const std::vector<double>& prob,
                                  const TourProfile& prof, double gamma) {
    const int known = static_cast<int>(s.known.size());
    double obj = 0.0;
    const int k = detail::best_size(
        prof,
        [&](int size, Duration dur) {
            double ev = 0.0;
            for (std::size_t w = 0; w < plans.size(); ++w)
                ev += prob[w] * detail::future_value(plans[w], known - size, s.t_e + dur);
            return size + gamma * ev;
        },
        &obj);
    ScenarioSolution sol;
    sol.objective = obj;
    const auto& slot = *prof.by_size[static_cast<std::size_t>(k)];
    sol.route0 = detail::mask_nodes(prof, slot.mask);
    sol.tour = {slot.order, slot.duration, true};
    return sol;
}

class PfaPolicy : public Policy {
public:
    explicit PfaPolicy(PolicyConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }
    std::string name() const override { return "pfa"; }

    Decision decide(const State& s, const Instance& inst, Rng& rng) override {
        try {
            return decide_impl(s, inst, rng);
        } catch (const Error& e) {
            Decision d;
            d.note = std::string("solver failure, waiting: ") + e.what();
            return d;
        }
    }

private:
    Decision decide_impl(const State& s, const Instance& inst, Rng& rng) {
        Decision d;
        auto pc = pc_check(s, inst.travel, inst.deadline, cfg_);
        d.pc = pc.record;
        if (pc.action) {
            d.action = *pc.action;
            return d;
        }
        if (s.known.empty()) return d;
        const auto scenarios = sample_scenarios(s.unknown, s.t_e, cfg_.n_scenarios, rng);
        const auto prof = known_profile(s, inst.travel, inst.deadline, cfg_.det_time_limit, cfg_.kernel);
        d.timed_out = !prof.complete;
        std::vector<ScenarioSolution> sols;
        sols.reserve(scenarios.size());
        for (const auto& sc : scenarios) sols.push_back(det_ilp_solve(s, scenario_plan(s, sc, inst, cfg_), prof, cfg_.gamma));
        d.action = consensus(sols, inst.travel, s.t_e, inst.deadline, cfg_.kernel);
        return d;
    }

    PolicyConfig cfg_;
};

class VfaPolicy : public Policy {
public:
    explicit VfaPolicy(PolicyConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }
    std::string name() const override { return "vfa"; }

    Decision decide(const State& s, const Instance& inst, Rng& rng) override {
        try {
            return decide_impl(s, inst, rng);
        } catch (const Error& e) {
            Decision d;
            d.note = std::string("solver failure, waiting: ") + e.what();
            return d;
        }
    }

private:
    Decision decide_impl(const State& s, const Instance& inst, Rng& rng) {
        Decision d;
        auto pc = pc_check(s, inst.travel, inst.deadline, cfg_);
        d.pc = pc.record;
        if (pc.action) {
            d.action = *pc.action;
            return d;
        }
        if (s.known.empty()) return d;
        const auto scenarios = sample_scenarios(s.unknown, s.t_e, cfg_.n_scenarios, rng);
        const auto prof = known_profile(s, inst.travel, inst.deadline, cfg_.sto_time_limit, cfg_.kernel);
        d.timed_out = !prof.complete;
        std::vector<BatchPlan> plans;
        std::vector<double> prob;
        for (const auto& sc : scenarios) {
            plans.push_back(scenario_plan(s, sc, inst, cfg_));
            prob.push_back(sc.probability);
        }
        const auto sol = sto_solve(s, plans, prob, prof, cfg_.gamma);
        if (!sol.route0.empty()) d.action = Action::dispatch(sol.tour.nodes);
        return d;
    }

    PolicyConfig cfg_;
};

/// Exact myopic: serve every known parcel if one tour fits, else the largest
/// subset that does.
inline Action me_decide(const State& s, const TravelMatrix& travel, Time deadline, const PolicyConfig& cfg = {}) {
    if (s.known.empty()) return Action::wait();
    KernelConfig kc = cfg.kernel;
    kc.dp.time_limit_s = cfg.myopic_time_limit;
    const Tour t = solve_tsp(s.known, travel, kc);
    if (t.duration <= budget_of(deadline - s.t_e)) return Action::dispatch(t.nodes);
    const auto op = solve_op(s.known, travel, deadline - s.t_e, kc);
    if (op.value == 0) return Action::wait();
    return Action::dispatch(op.tour.nodes);
}

/// Nearest-neighbour myopic: from the depot, repeatedly go to the closest
/// known customer that still allows returning by the deadline (ties by id).
inline Action mh_decide(const State& s, const TravelMatrix& travel, Time deadline) {
    const Duration b = budget_of(deadline - s.t_e);
    std::vector<Node> route;
    std::vector<char> used(s.known.size(), 0);
    Node at = kDepot;
    Duration len = 0;
    while (true) {
        std::size_t pick = s.known.size();
        for (std::size_t k = 0; k < s.known.size(); ++k) {
            if (used[k]) continue;
            const Node v = s.known[k];
            if (len + travel(at, v) + travel(v, kDepot) > b) continue;
            if (pick == s.known.size() || travel(at, v) < travel(at, s.known[pick])) pick = k;
        }
        if (pick == s.known.size()) break;
        used[pick] = 1;
        len += travel(at, s.known[pick]);
        at = s.known[pick];
        route.push_back(at);
    }
    return route.empty() ? Action::wait() : Action::dispatch(route);
}

class MePolicy : public Policy {
public:
    explicit MePolicy(PolicyConfig cfg = {}) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "me"; }
    Decision decide(const State& s, const Instance& inst, Rng&) override {
        return {me_decide(s, inst.travel, inst.deadline, cfg_), {}, false, {}};
    }

private:
    PolicyConfig cfg_;
};

class MhPolicy : public Policy {
public:
    std::string name() const override { return "mh"; }
    Decision decide(const State& s, const Instance& inst, Rng&) override {
        return {mh_decide(s, inst.travel, inst.deadline), {}, false, {}};
    }
};

inline std::unique_ptr<Policy> make_policy(const std::string& name, const PolicyConfig& cfg) {
    if (name == "pfa") return std::make_unique<PfaPolicy>(cfg);
    if (name == "vfa") return std::make_unique<VfaPolicy>(cfg);
    if (name == "me") return std::make_unique<MePolicy>(cfg);
    if (name == "mh") return std::make_unique<MhPolicy>();
    throw ParameterError("unknown policy '" + name + "'");
}

}  // namespace doprd

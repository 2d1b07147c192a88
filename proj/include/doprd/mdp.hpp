#pragma once

// The dispatching environment: states, actions, transitions and the
// simulation loop.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "doprd/error.hpp"
#include "doprd/instance.hpp"
#include "doprd/rng.hpp"
#include "doprd/tour_dp.hpp"
#include "doprd/types.hpp"
#include "doprd/uncertainty.hpp"

namespace doprd {

struct State {
    Time t_e = 0.0;
    std::vector<Node> known;  ///< sorted; parcels at the depot
    EstimateSet unknown;      ///< beliefs for parcels still on their way
    std::vector<Node> served;  ///< sorted
    int epoch = 0;

    std::vector<Node> unserved() const {
        std::vector<Node> out = known;
        for (const auto& e : unknown.items) out.push_back(e.node);
        std::sort(out.begin(), out.end());
        return out;
    }
};

/// Wait (empty route) or dispatch a route over known parcels right now.
struct Action {
    std::vector<Node> route;

    static Action wait() { return {}; }
    static Action dispatch(std::vector<Node> r) { return {std::move(r)}; }
    bool is_wait() const noexcept { return route.empty(); }

    friend bool operator==(const Action&, const Action&) = default;
};

struct TransitionOutcome {
    State next;
    int reward = 0;
    Time elapsed = 0.0;
    bool terminal = false;
};

/// A copy of the instance with every true release date hidden, for policies.
inline Instance public_view(const Instance& inst) {
    Instance pub = inst;
    for (auto& c : pub.customers) c.true_release = std::numeric_limits<double>::quiet_NaN();
    return pub;
}

inline State initial_state(const Instance& inst) {
    State s;
    for (Node v = 1; v <= inst.size(); ++v)
        if (inst.at(v).true_release <= 0.0) s.known.push_back(v);
    s.unknown = initial_estimates(inst);
    return s;
}

/// Throws InfeasibleActionError unless `a` is a legal action in `s`.
inline void check_action(const State& s, const Action& a, const TravelMatrix& travel, Time deadline) {
    if (a.is_wait()) return;
    std::vector<Node> seen;
    for (Node v : a.route) {
        if (!std::binary_search(s.known.begin(), s.known.end(), v))
            throw InfeasibleActionError("route visits customer " + std::to_string(v) + " whose parcel is not at the depot");
        if (std::find(seen.begin(), seen.end(), v) != seen.end())
            throw InfeasibleActionError("route visits customer " + std::to_string(v) + " twice");
        seen.push_back(v);
    }
    if (travel.route_duration(a.route) > budget_of(deadline - s.t_e))
        throw InfeasibleActionError("route returns after the deadline");
}

namespace detail {

// Moves every parcel released by `t` from unknown to known and refreshes the
// remaining estimates.
inline void advance_to(State& s, const Instance& world, Time t, double rate) {
    s.unknown = update_estimates(world, s.unknown, t, rate);
    std::vector<Node> still;
    for (const auto& e : s.unknown.items) still.push_back(e.node);
    for (Node v = 1; v <= world.size(); ++v) {
        const Time r = world.at(v).true_release;
        if (r > 0.0 && r <= t && !std::binary_search(s.served.begin(), s.served.end(), v) &&
            !std::binary_search(s.known.begin(), s.known.end(), v))
            s.known.push_back(v);
    }
    std::sort(s.known.begin(), s.known.end());
    s.t_e = t;
}

inline std::optional<Time> next_arrival(const State& s, const Instance& world) {
    std::optional<Time> t;
    for (const auto& e : s.unknown.items) {
        const Time r = world.at(e.node).true_release;
        if (!t || r < *t) t = r;
    }
    return t;
}

}  // namespace detail

/// Executes one action. Dispatch: the vehicle is away for the route duration
/// and parcels released meanwhile (right end inclusive) become known. Wait:
/// the clock moves to the next arrival or by phi, whichever is first, and is
/// clamped to the deadline.
inline TransitionOutcome apply_action(const State& s, const Action& a, const Instance& world, Time phi,
                                      double update_rate = 1.0) {
    if (!(phi > 0.0)) throw ParameterError("phi must be positive");
    check_action(s, a, world.travel, world.deadline);
    TransitionOutcome out;
    out.next = s;
    out.next.epoch = s.epoch + 1;
    Time t_next;
    if (a.is_wait()) {
        t_next = s.t_e + phi;
        if (auto tp = detail::next_arrival(s, world)) t_next = std::min(t_next, *tp);
        if (t_next >= world.deadline) {
            t_next = world.deadline;
            out.terminal = true;
        }
    } else {
        t_next = s.t_e + world.travel.route_duration(a.route);
        out.reward = static_cast<int>(a.route.size());
        auto& known = out.next.known;
        for (Node v : a.route) known.erase(std::find(known.begin(), known.end(), v));
        out.next.served.insert(out.next.served.end(), a.route.begin(), a.route.end());
        std::sort(out.next.served.begin(), out.next.served.end());
        out.terminal = t_next >= world.deadline;
    }
    detail::advance_to(out.next, world, t_next, update_rate);
    out.elapsed = t_next - s.t_e;
    return out;
}

/// Extra information a policy reports about how it reached a decision.
struct PcRecord {
    bool evaluated = false;  ///< both skip rules passed and the check ran
    bool fired = false;
    int ell = -1;            ///< optimum over all unserved, when computed
    std::vector<Node> unserved;
    Time budget = 0.0;
};

struct Decision {
    Action action;
    PcRecord pc;
    bool timed_out = false;
    std::string note;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    /// `inst` is the public view: no true release dates.
    virtual Decision decide(const State& s, const Instance& inst, Rng& rng) = 0;
};

struct SimConfig {
    Time phi = 10.0;
    double update_rate = 1.0;
};

struct TrajectoryEntry {
    int epoch = 0;
    Time t_e = 0.0;
    Action action;
    int reward = 0;
    double wall_ms = 0.0;
    int known = 0;
    int unknown = 0;
    PcRecord pc;
    std::string note;
};

struct SimulationResult {
    std::string instance;
    std::string policy;
    std::uint64_t seed = 0;
    int total_served = 0;
    Time final_time = 0.0;
    std::vector<TrajectoryEntry> trajectory;
    std::vector<Node> served;
    bool failed = false;
    std::string diagnostic;
    double wall_s = 0.0;
};

/// Runs a policy on one instance until the deadline or until nothing more
/// can be served. Epochs in which no parcel is at the depot are skipped by
/// jumping to the next arrival.
inline SimulationResult simulate(const Instance& world, Policy& policy, std::uint64_t seed, const SimConfig& cfg = {}) {
    using clock = std::chrono::steady_clock;
    SimulationResult res;
    res.instance = world.name;
    res.policy = policy.name();
    res.seed = seed;
    const auto t0 = clock::now();
    const Instance pub = public_view(world);
    Rng rng = make_rng(seed, Stream::scenario_sampling);
    State s = initial_state(world);
    const Time deadline = world.deadline;

    auto min_round_trip = [&](const State& st) {
        Duration m = kInfDuration;
        for (Node v : st.unserved()) m = std::min(m, world.travel.round_trip(v));
        return m;
    };

    while (s.t_e < deadline) {
        if (s.known.empty() && s.unknown.empty()) break;
        if (static_cast<Time>(min_round_trip(s)) > deadline - s.t_e) break;
        if (s.known.empty()) {
            const Time tp = *detail::next_arrival(s, world);
            if (tp >= deadline) break;
            detail::advance_to(s, world, tp, cfg.update_rate);
            continue;
        }
        const auto d0 = clock::now();
        Decision dec;
        try {
            dec = policy.decide(s, pub, rng);
        } catch (const Error& e) {
            res.failed = true;
            res.diagnostic = std::string("policy error: ") + e.what();
            break;
        }
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - d0).count();
        TransitionOutcome out;
        try {
            out = apply_action(s, dec.action, world, cfg.phi, cfg.update_rate);
        } catch (const InfeasibleActionError& e) {
            res.failed = true;
            res.diagnostic = std::string("infeasible action at t=") + std::to_string(s.t_e) + ": " + e.what();
            break;
        }
        res.trajectory.push_back({s.epoch, s.t_e, dec.action, out.reward, ms, static_cast<int>(s.known.size()),
                                  static_cast<int>(s.unknown.size()), dec.pc, dec.note});
        res.total_served += out.reward;
        s = std::move(out.next);
    }
    res.final_time = s.t_e;
    res.served = s.served;
    res.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
    return res;
}

}  // namespace doprd

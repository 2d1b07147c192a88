#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "doprd/instance.hpp"
#include "doprd/rng.hpp"
#include "doprd/types.hpp"

namespace doprd {

/// Release-date belief for one customer whose parcel has not arrived yet.
struct Estimate {
    Node node = 0;
    bool dynamic = false;
    Time mean0 = 0.0;
    Time std0 = 0.0;
    Time mean = 0.0;
    Time std = 0.0;

    friend bool operator==(const Estimate&, const Estimate&) = default;
};

/// Beliefs for every unknown customer, sorted by node, valid as of `as_of`.
struct EstimateSet {
    Time as_of = 0.0;
    std::vector<Estimate> items;

    bool empty() const noexcept { return items.empty(); }
    std::size_t size() const noexcept { return items.size(); }

    const Estimate* find(Node v) const {
        auto it = std::lower_bound(items.begin(), items.end(), v, [](const Estimate& e, Node n) { return e.node < n; });
        return it != items.end() && it->node == v ? &*it : nullptr;
    }

    std::vector<Node> nodes() const {
        std::vector<Node> out;
        out.reserve(items.size());
        for (const auto& e : items) out.push_back(e.node);
        return out;
    }

    friend bool operator==(const EstimateSet&, const EstimateSet&) = default;
};

/// Epoch-0 beliefs: every customer whose parcel is not at the depot at time 0.
inline EstimateSet initial_estimates(const Instance& inst) {
    EstimateSet set;
    for (Node v = 1; v <= inst.size(); ++v) {
        const auto& c = inst.at(v);
        if (c.true_release <= 0.0) continue;
        const bool dyn = c.mode == ReleaseMode::dynamic_estimate;
        set.items.push_back({v, dyn, c.estimate_mean, c.estimate_std, c.estimate_mean, c.estimate_std});
    }
    return set;
}

/// Refreshes beliefs to clock `t`. Dynamic estimates move linearly from their
/// epoch-0 values toward the true release R (mean -> R, std -> 0) as t goes
/// from 0 to R / rate. Static estimates never change. Customers whose parcel
/// has arrived (R <= t) are dropped.
inline EstimateSet update_estimates(const Instance& world, const EstimateSet& est, Time t, double rate = 1.0) {
    if (t < est.as_of) throw ParameterError("estimate updates require a non-decreasing clock");
    EstimateSet out;
    out.as_of = t;
    out.items.reserve(est.items.size());
    for (const auto& e : est.items) {
        const Time release = world.at(e.node).true_release;
        if (release <= t) continue;
        Estimate next = e;
        if (e.dynamic) {
            const double progress = std::clamp(rate * t / release, 0.0, 1.0);
            next.mean = e.mean0 + (release - e.mean0) * progress;
            next.std = e.std0 * (1.0 - progress);
        }
        out.items.push_back(next);
    }
    return out;
}

/// One sampled realization of unknown release dates, sorted by node.
struct Scenario {
    std::vector<std::pair<Node, Time>> realized;
    double probability = 1.0;
};

/// Draws `count` independent scenarios. Each value is a Normal draw clamped
/// up to `t_e`, since a parcel that has not arrived cannot have a past release.
inline std::vector<Scenario> sample_scenarios(const EstimateSet& est, Time t_e, int count, Rng& rng) {
    if (count < 1) throw ParameterError("scenario count must be at least 1");
    std::vector<Scenario> out(static_cast<std::size_t>(count));
    for (auto& sc : out) {
        sc.probability = 1.0 / count;
        sc.realized.reserve(est.items.size());
        for (const auto& e : est.items) {
            double draw = e.mean;
            if (e.std > 0.0) draw = std::normal_distribution<double>(e.mean, e.std)(rng);
            sc.realized.emplace_back(e.node, std::max(draw, t_e));
        }
    }
    return out;
}

}  // namespace doprd

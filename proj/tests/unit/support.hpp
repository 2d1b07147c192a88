#pragma once

// Small instance builders and brute-force oracles shared by the unit tests.
// The oracles enumerate permutations and subsets directly and share no code
// with the solvers.

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "doprd/doprd.hpp"

namespace testing_support {

using namespace doprd;

/// Instance over explicit points with the given true releases (all static).
inline Instance make_instance(Point depot, const std::vector<Point>& pts, const std::vector<Time>& releases, Time deadline) {
    Instance inst;
    inst.name = "test";
    inst.depot = depot;
    inst.travel = travel_matrix(depot, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Customer c;
        c.id = static_cast<int>(i) + 1;
        c.pos = pts[i];
        c.true_release = releases.empty() ? 0.0 : releases[i];
        c.mode = c.true_release == 0.0 ? ReleaseMode::available_at_start : ReleaseMode::static_estimate;
        c.estimate_mean = c.true_release;
        c.estimate_std = c.true_release == 0.0 ? 0.0 : 1.0;
        inst.customers.push_back(c);
    }
    inst.deadline = deadline;
    return inst;
}

/// Customers on the positive x axis at the given offsets from a depot at 0.
inline Instance line_instance(const std::vector<double>& xs, const std::vector<Time>& releases, Time deadline) {
    std::vector<Point> pts;
    for (double x : xs) pts.push_back({x, 0.0});
    return make_instance({0, 0}, pts, releases, deadline);
}

/// Random integer-grid points without duplicates (depot included).
inline std::vector<Point> random_points(int n, std::mt19937_64& rng, int span = 20) {
    std::uniform_int_distribution<int> u(0, span);
    std::vector<Point> pts;
    while (static_cast<int>(pts.size()) < n + 1) {
        Point p{static_cast<double>(u(rng)), static_cast<double>(u(rng))};
        if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
    }
    return pts;
}

inline std::vector<Node> nodes_of(unsigned mask) {
    std::vector<Node> out;
    for (int j = 0; mask; ++j, mask >>= 1)
        if (mask & 1u) out.push_back(j + 1);
    return out;
}

/// Shortest tour through exactly `ids` by trying every permutation.
inline Duration brute_tsp(std::vector<Node> ids, const TravelMatrix& d) {
    if (ids.empty()) return 0;
    std::sort(ids.begin(), ids.end());
    Duration best = kInfDuration;
    do {
        best = std::min(best, d.route_duration(ids));
    } while (std::next_permutation(ids.begin(), ids.end()));
    return best;
}

/// brute_tsp for every subset of customers 1..n, indexed by bitmask.
inline std::vector<Duration> brute_tsp_table(int n, const TravelMatrix& d) {
    std::vector<Duration> t(std::size_t{1} << n);
    for (unsigned m = 0; m < t.size(); ++m) t[m] = brute_tsp(nodes_of(m), d);
    return t;
}

inline int brute_op(int n, const TravelMatrix& d, Time budget) {
    const auto t = brute_tsp_table(n, d);
    int best = 0;
    for (unsigned m = 0; m < t.size(); ++m)
        if (t[m] <= budget) best = std::max(best, std::popcount(m));
    return best;
}

/// Direct-trip bound by trying every alpha vector against the constraints
/// written over the release-sorted order.
inline int brute_ub_trips(const std::vector<Time>& releases, const TravelMatrix& d, Time deadline) {
    const int n = static_cast<int>(releases.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return releases[a] < releases[b]; });
    int best = 0;
    for (unsigned m = 0; m < (1u << n); ++m) {
        bool ok = true;
        for (int p = 0; p < n && ok; ++p) {
            double lhs = (m >> p & 1u) ? releases[order[p]] : 0.0;
            for (int q = p; q < n; ++q)
                if (m >> q & 1u) lhs += d.round_trip(order[q] + 1);
            if (lhs > deadline) ok = false;
        }
        if (ok) best = std::max(best, std::popcount(m));
    }
    return best;
}

/// Perfect-information optimum by forward search over trip sequences with
/// `slots` trip slots (empty slots allowed, taking no time). With
/// `empty_first` the non-empty trips must occupy the last slots. Waiting is
/// allowed before any trip. Returns the best count; `best_trips` receives
/// the number of non-empty trips of one optimal solution.
inline int brute_oprd(const std::vector<Time>& releases, const TravelMatrix& d, Time deadline, int slots,
                      bool empty_first = false, int* best_trips = nullptr) {
    const int n = static_cast<int>(releases.size());
    const auto tsp = brute_tsp_table(n, d);
    std::vector<Time> maxrel(tsp.size(), 0.0);
    for (unsigned m = 1; m < tsp.size(); ++m)
        for (int j = 0; j < n; ++j)
            if (m >> j & 1u) maxrel[m] = std::max(maxrel[m], releases[static_cast<std::size_t>(j)]);
    int best = 0, trips_at_best = 0;
    // (served, time, slot, trips, any nonempty yet)
    auto dfs = [&](auto&& self, unsigned served, Time now, int slot, int trips, bool started) -> void {
        if (std::popcount(served) > best) {
            best = std::popcount(served);
            trips_at_best = trips;
        }
        if (slot == slots) return;
        // empty slot
        if (!(empty_first && started)) self(self, served, now, slot + 1, trips, started);
        const unsigned rest = static_cast<unsigned>(tsp.size() - 1) & ~served;
        for (unsigned s = rest; s; s = (s - 1) & rest) {
            const Time dep = std::max(now, maxrel[s]);
            if (dep + tsp[s] > deadline) continue;
            self(self, served | s, dep + tsp[s], slot + 1, trips + 1, true);
        }
    };
    dfs(dfs, 0u, 0.0, 0, 0, false);
    if (best_trips) *best_trips = trips_at_best;
    return best;
}

/// Largest number of non-empty trips any feasible schedule can use.
inline int brute_max_trips(const std::vector<Time>& releases, const TravelMatrix& d, Time deadline) {
    const int n = static_cast<int>(releases.size());
    const auto tsp = brute_tsp_table(n, d);
    std::vector<Time> maxrel(tsp.size(), 0.0);
    for (unsigned m = 1; m < tsp.size(); ++m)
        for (int j = 0; j < n; ++j)
            if (m >> j & 1u) maxrel[m] = std::max(maxrel[m], releases[static_cast<std::size_t>(j)]);
    int best = 0;
    auto dfs = [&](auto&& self, unsigned served, Time now, int trips) -> void {
        best = std::max(best, trips);
        const unsigned rest = static_cast<unsigned>(tsp.size() - 1) & ~served;
        for (unsigned s = rest; s; s = (s - 1) & rest) {
            const Time dep = std::max(now, maxrel[s]);
            if (dep + tsp[s] > deadline) continue;
            self(self, served | s, dep + tsp[s], trips + 1);
        }
    };
    dfs(dfs, 0u, 0.0, 0);
    return best;
}

inline ReleaseList release_list(const std::vector<Time>& releases) {
    ReleaseList rel;
    for (std::size_t i = 0; i < releases.size(); ++i) rel.emplace_back(static_cast<Node>(i) + 1, releases[i]);
    return rel;
}

/// State with explicit known customers and unknown estimates (static, std 1).
inline State make_state(Time t_e, std::vector<Node> known, const std::vector<std::pair<Node, Time>>& unknown_means = {}) {
    State s;
    s.t_e = t_e;
    std::sort(known.begin(), known.end());
    s.known = known;
    s.unknown.as_of = t_e;
    for (const auto& [v, m] : unknown_means) s.unknown.items.push_back({v, false, m, 1.0, m, 1.0});
    std::sort(s.unknown.items.begin(), s.unknown.items.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
    return s;
}

}  // namespace testing_support

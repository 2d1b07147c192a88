#pragma once

// Exact solvers: TSP, unit-prize orienteering, the direct-trip bound and the
// perfect-information multi-trip problem with release dates.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "doprd/error.hpp"
#include "doprd/tour_dp.hpp"
#include "doprd/types.hpp"

namespace doprd {

struct Tour {
    std::vector<Node> nodes;  ///< depot implicit at both ends
    Duration duration = 0;
    bool optimal = true;  ///< false when produced by local search

    friend bool operator==(const Tour&, const Tour&) = default;
};

struct Trip {
    Time start = 0.0;
    Tour tour;
};

enum class SolveStatus { optimal, incumbent_with_bound };

inline const char* to_string(SolveStatus s) { return s == SolveStatus::optimal ? "optimal" : "incumbent_with_bound"; }

struct ExactResult {
    int value = 0;
    int bound = 0;
    SolveStatus status = SolveStatus::optimal;
    Tour tour;                ///< single-route problems
    std::vector<Trip> trips;  ///< multi-trip problems, in departure order
    bool warm_start_accepted = false;
};

struct KernelConfig {
    int tsp_exact_max = 18;
    DpLimits dp{};
};

using ReleaseList = std::vector<std::pair<Node, Time>>;

namespace detail {

inline std::vector<Node> sorted_unique(std::span<const Node> ids) {
    std::vector<Node> v(ids.begin(), ids.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace detail

/// Shortest closed tour from the depot through every id. Exact up to
/// `tsp_exact_max` ids, local search beyond (flagged `optimal = false`).
inline Tour solve_tsp(std::span<const Node> ids, const TravelMatrix& travel, const KernelConfig& cfg = {}) {
    auto nodes = detail::sorted_unique(ids);
    if (nodes.empty()) throw ParameterError("solve_tsp needs at least one customer");
    Tour t;
    if (static_cast<int>(nodes.size()) <= std::min(cfg.tsp_exact_max, 24)) {
        DenseTourTable table(nodes, travel, kInfDuration - 1);
        const Mask full = static_cast<Mask>((std::uint64_t{1} << nodes.size()) - 1);
        t.nodes = table.order(full);
        t.duration = table.tour(full);
        return t;
    }
    t.nodes = local_search_tour(nodes, travel);
    t.duration = travel.route_duration(t.nodes);
    t.optimal = false;
    return t;
}

/// Maximum number of ids one depot tour of duration <= budget can visit.
inline ExactResult solve_op(std::span<const Node> ids, const TravelMatrix& travel, Time budget, const KernelConfig& cfg = {}) {
    ExactResult res;
    const Duration b = budget_of(budget);
    auto nodes = detail::sorted_unique(ids);
    if (b < 0) return res;
    std::erase_if(nodes, [&](Node v) { return travel.round_trip(v) > b; });
    if (nodes.empty()) return res;

    // A heuristic tour through everything that fits settles the question.
    const auto all = local_search_tour(nodes, travel);
    const Duration all_dur = travel.route_duration(all);
    if (all_dur <= b) {
        res.value = res.bound = static_cast<int>(nodes.size());
        res.tour = {all, all_dur, false};
        if (static_cast<int>(nodes.size()) <= cfg.tsp_exact_max) res.tour = solve_tsp(nodes, travel, cfg);
        return res;
    }
    if (nodes.size() > 31) throw SizeLimitError("solve_op limited to 31 candidate customers");
    const TourProfile prof = tour_profile(nodes, travel, b, cfg.dp);
    const int best = prof.max_size();
    res.value = best;
    res.bound = best;
    if (const auto& slot = prof.by_size[static_cast<std::size_t>(best)]; slot && best > 0)
        res.tour = {slot->order, slot->duration, true};
    if (!prof.complete) {
        // Levels beyond the last finished one were never explored.
        res.status = SolveStatus::incumbent_with_bound;
        res.bound = static_cast<int>(nodes.size());
    }
    return res;
}

// ---------------------------------------------------------------------------
// Subtour separation

struct SupportArc {
    int from = 0;
    int to = 0;
    double weight = 0.0;
};

/// Support of a (possibly fractional) route solution over nodes 0..nodes-1,
/// node 0 being the depot.
struct SupportGraph {
    int nodes = 0;
    std::vector<SupportArc> arcs;
    std::vector<double> visit;  ///< y_i per node; visit[0] is ignored
};

/// Violated cut x(E(S)) <= sum_{i in S \ {anchor}} y_i.
struct GsecCut {
    std::vector<int> set;  ///< sorted
    int anchor = 0;
    double violation = 0.0;
};

namespace detail {

inline double gsec_lhs(const SupportGraph& g, const std::vector<char>& in) {
    double s = 0.0;
    for (const auto& a : g.arcs)
        if (in[static_cast<std::size_t>(a.from)] && in[static_cast<std::size_t>(a.to)]) s += a.weight;
    return s;
}

inline std::optional<GsecCut> make_cut(const SupportGraph& g, std::vector<int> set, double eps) {
    if (set.size() < 2) return std::nullopt;
    std::sort(set.begin(), set.end());
    std::vector<char> in(static_cast<std::size_t>(g.nodes), 0);
    for (int v : set) in[static_cast<std::size_t>(v)] = 1;
    int anchor = set.front();
    double ysum = 0.0;
    for (int v : set) {
        ysum += g.visit[static_cast<std::size_t>(v)];
        if (g.visit[static_cast<std::size_t>(v)] > g.visit[static_cast<std::size_t>(anchor)]) anchor = v;
    }
    const double viol = gsec_lhs(g, in) - (ysum - g.visit[static_cast<std::size_t>(anchor)]);
    if (viol <= eps) return std::nullopt;
    return GsecCut{std::move(set), anchor, viol};
}

// Edmonds-Karp on an undirected capacity matrix; returns the source side.
inline std::pair<double, std::vector<char>> min_cut(const std::vector<std::vector<double>>& cap, int s, int t) {
    const int n = static_cast<int>(cap.size());
    auto res = cap;
    double flow = 0.0;
    while (true) {
        std::vector<int> parent(static_cast<std::size_t>(n), -1);
        parent[static_cast<std::size_t>(s)] = s;
        std::queue<int> q;
        q.push(s);
        while (!q.empty() && parent[static_cast<std::size_t>(t)] < 0) {
            const int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v) {
                if (parent[static_cast<std::size_t>(v)] < 0 && res[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] > 1e-12) {
                    parent[static_cast<std::size_t>(v)] = u;
                    q.push(v);
                }
            }
        }
        if (parent[static_cast<std::size_t>(t)] < 0) break;
        double push = 1e300;
        for (int v = t; v != s; v = parent[static_cast<std::size_t>(v)])
            push = std::min(push, res[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])][static_cast<std::size_t>(v)]);
        for (int v = t; v != s; v = parent[static_cast<std::size_t>(v)]) {
            const auto u = static_cast<std::size_t>(parent[static_cast<std::size_t>(v)]);
            res[u][static_cast<std::size_t>(v)] -= push;
            res[static_cast<std::size_t>(v)][u] += push;
        }
        flow += push;
    }
    std::vector<char> reach(static_cast<std::size_t>(n), 0);
    std::queue<int> q;
    q.push(s);
    reach[static_cast<std::size_t>(s)] = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v) {
            if (!reach[static_cast<std::size_t>(v)] && res[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] > 1e-12) {
                reach[static_cast<std::size_t>(v)] = 1;
                q.push(v);
            }
        }
    }
    return {flow, reach};
}

}  // namespace detail

/// Finds violated generalized subtour elimination cuts. With an integral
/// support every connected component that misses the depot yields one cut.
/// With `fractional` set, a min-cut between the depot and each visited node
/// is also examined.
inline std::vector<GsecCut> separate_gsec(const SupportGraph& g, bool fractional = false, double eps = 1e-6) {
    std::vector<GsecCut> cuts;
    const int n = g.nodes;
    if (n <= 1) return cuts;
    if (static_cast<int>(g.visit.size()) != n) throw ParameterError("support graph needs one visit weight per node");

    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    for (const auto& a : g.arcs)
        if (a.weight > eps) parent[static_cast<std::size_t>(find(a.from))] = find(a.to);
    std::vector<std::vector<int>> comps(static_cast<std::size_t>(n));
    for (int v = 1; v < n; ++v)
        if (g.visit[static_cast<std::size_t>(v)] > eps) comps[static_cast<std::size_t>(find(v))].push_back(v);
    const int depot_root = find(0);
    for (int r = 0; r < n; ++r) {
        if (r == depot_root || comps[static_cast<std::size_t>(r)].empty()) continue;
        if (auto cut = detail::make_cut(g, comps[static_cast<std::size_t>(r)], eps)) cuts.push_back(std::move(*cut));
    }
    if (!fractional) return cuts;

    std::vector<std::vector<double>> cap(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (const auto& a : g.arcs) {
        cap[static_cast<std::size_t>(a.from)][static_cast<std::size_t>(a.to)] += a.weight;
        cap[static_cast<std::size_t>(a.to)][static_cast<std::size_t>(a.from)] += a.weight;
    }
    for (int v = 1; v < n; ++v) {
        if (g.visit[static_cast<std::size_t>(v)] <= eps) continue;
        auto [flow, src_side] = detail::min_cut(cap, 0, v);
        if (flow >= 2.0 * g.visit[static_cast<std::size_t>(v)] - eps) continue;
        std::vector<int> set;
        for (int u = 1; u < n; ++u)
            if (!src_side[static_cast<std::size_t>(u)]) set.push_back(u);
        auto cut = detail::make_cut(g, set, eps);
        if (!cut) continue;
        const bool dup = std::any_of(cuts.begin(), cuts.end(), [&](const GsecCut& c) { return c.set == cut->set; });
        if (!dup) cuts.push_back(std::move(*cut));
    }
    return cuts;
}

/// TSP by depth-first search over successor assignments; complete
/// assignments containing subtours are rejected through lazily separated
/// GSECs which then prune partial assignments. Intended for small sets.
inline std::optional<Tour> tsp_branch_and_cut(std::span<const Node> ids, const TravelMatrix& travel, Duration limit) {
    const auto nodes = detail::sorted_unique(ids);
    const int m = static_cast<int>(nodes.size()) + 1;  // local 0 = depot
    if (m == 1) return Tour{};
    auto global = [&](int local) { return local == 0 ? kDepot : nodes[static_cast<std::size_t>(local - 1)]; };
    auto cost = [&](int a, int b) { return travel(global(a), global(b)); };
    std::vector<Duration> min_out(static_cast<std::size_t>(m), kInfDuration);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (a != b) min_out[static_cast<std::size_t>(a)] = std::min(min_out[static_cast<std::size_t>(a)], cost(a, b));

    std::vector<GsecCut> pool;
    std::vector<int> succ(static_cast<std::size_t>(m), -1);
    std::vector<char> taken(static_cast<std::size_t>(m), 0);
    Duration best = limit + 1;
    std::vector<int> best_succ;

    auto violates_pool = [&]() {
        for (const auto& cut : pool) {
            int inside = 0;
            for (int v : cut.set) {
                const int s = succ[static_cast<std::size_t>(v)];
                if (s >= 0 && std::binary_search(cut.set.begin(), cut.set.end(), s)) ++inside;
            }
            if (inside > static_cast<int>(cut.set.size()) - 1) return true;
        }
        return false;
    };

    auto dfs = [&](auto&& self, int pos, Duration acc) -> void {
        Duration lb = acc;
        for (int v = pos; v < m; ++v) lb += min_out[static_cast<std::size_t>(v)];
        if (lb >= best) return;
        if (pos == m) {
            SupportGraph g;
            g.nodes = m;
            g.visit.assign(static_cast<std::size_t>(m), 1.0);
            for (int v = 0; v < m; ++v) g.arcs.push_back({v, succ[static_cast<std::size_t>(v)], 1.0});
            auto cuts = separate_gsec(g);
            if (!cuts.empty()) {
                for (auto& c : cuts) pool.push_back(std::move(c));
                return;
            }
            best = acc;
            best_succ = succ;
            return;
        }
        for (int nxt = 0; nxt < m; ++nxt) {
            if (nxt == pos || taken[static_cast<std::size_t>(nxt)]) continue;
            succ[static_cast<std::size_t>(pos)] = nxt;
            taken[static_cast<std::size_t>(nxt)] = 1;
            if (!violates_pool()) self(self, pos + 1, acc + cost(pos, nxt));
            taken[static_cast<std::size_t>(nxt)] = 0;
            succ[static_cast<std::size_t>(pos)] = -1;
        }
    };
    dfs(dfs, 0, 0);
    if (best_succ.empty()) return std::nullopt;
    Tour t;
    t.duration = best;
    for (int v = best_succ[0]; v != 0; v = best_succ[static_cast<std::size_t>(v)]) t.nodes.push_back(global(v));
    return t;
}

/// Orienteering by decreasing target size; each candidate subset is checked
/// with `tsp_branch_and_cut`. Exponential, used to cross-check `solve_op`.
inline ExactResult solve_op_branch_and_cut(std::span<const Node> ids, const TravelMatrix& travel, Time budget) {
    ExactResult res;
    const Duration b = budget_of(budget);
    auto nodes = detail::sorted_unique(ids);
    if (b < 0) return res;
    std::erase_if(nodes, [&](Node v) { return travel.round_trip(v) > b; });
    const int n = static_cast<int>(nodes.size());
    if (n > 16) throw SizeLimitError("branch-and-cut orienteering limited to 16 customers");
    for (int k = n; k >= 1; --k) {
        std::optional<Tour> found;
        Mask found_mask = 0;
        for (Mask m = 0; m < (Mask{1} << n); ++m) {
            if (std::popcount(m) != k) continue;
            std::vector<Node> sub;
            for (int j = 0; j < n; ++j)
                if (m >> j & 1u) sub.push_back(nodes[static_cast<std::size_t>(j)]);
            auto t = tsp_branch_and_cut(sub, travel, found ? found->duration - 1 : b);
            if (t) {
                found = std::move(t);
                found_mask = m;
            }
        }
        (void)found_mask;
        if (found) {
            res.value = res.bound = k;
            res.tour = *found;
            return res;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Multi-trip problems with release dates

namespace detail {

inline ReleaseList sorted_by_release(ReleaseList rel) {
    std::sort(rel.begin(), rel.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    return rel;
}

}  // namespace detail

/// Direct-trip bound: the largest number of customers that can each be served
/// by its own depot round trip, trips packed back-to-back so the last one ends
/// at T_E. Also returns that schedule.
inline ExactResult ub_trips(const ReleaseList& releases, const TravelMatrix& travel, Time deadline) {
    ExactResult res;
    const auto rel = detail::sorted_by_release(releases);
    const int n = static_cast<int>(rel.size());
    const Duration cap = budget_of(deadline);
    if (cap <= 0 || n == 0) return res;
    // f[s] = best count using customers i..n whose selected round trips sum to s.
    const auto width = static_cast<std::size_t>(cap) + 1;
    std::vector<int> f(width, -1);
    f[0] = 0;
    std::vector<std::vector<char>> take(static_cast<std::size_t>(n), std::vector<char>(width, 0));
    for (int i = n - 1; i >= 0; --i) {
        const Duration rt = travel.round_trip(rel[static_cast<std::size_t>(i)].first);
        const Time r = rel[static_cast<std::size_t>(i)].second;
        std::vector<int> g = f;
        for (Duration s = 0; s + rt <= cap; ++s) {
            if (f[static_cast<std::size_t>(s)] < 0) continue;
            if (r + s + rt > deadline) continue;
            const auto t = static_cast<std::size_t>(s + rt);
            if (f[static_cast<std::size_t>(s)] + 1 > g[t]) {
                g[t] = f[static_cast<std::size_t>(s)] + 1;
                take[static_cast<std::size_t>(i)][t] = 1;
            }
        }
        f = std::move(g);
    }
    // Best count, shortest total on ties.
    std::size_t s_best = 0;
    for (std::size_t s = 0; s < width; ++s)
        if (f[s] > f[s_best]) s_best = s;
    res.value = res.bound = f[s_best];
    // Forward reconstruction: customer i is taken iff its flag is set at the
    // current suffix sum.
    auto s = static_cast<Duration>(s_best);
    Time clock = deadline - s;
    for (int i = 0; i < n && s > 0; ++i) {
        if (!take[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)]) continue;
        const Node v = rel[static_cast<std::size_t>(i)].first;
        const Duration rt = travel.round_trip(v);
        res.trips.push_back({clock, Tour{{v}, rt, true}});
        clock += rt;
        s -= rt;
    }
    return res;
}

/// Checks that `trips` is a feasible multi-trip schedule: distinct customers,
/// departures after every carried release, no overlap, return by T_E.
inline bool schedule_feasible(const std::vector<Trip>& trips, const ReleaseList& releases, const TravelMatrix& travel,
                              Time deadline, int trip_bound = 1 << 30) {
    if (static_cast<int>(trips.size()) > trip_bound) return false;
    std::vector<char> seen(static_cast<std::size_t>(travel.size()), 0);
    Time free_at = 0.0;
    for (const auto& trip : trips) {
        if (trip.tour.nodes.empty()) return false;
        if (trip.start < free_at) return false;
        for (Node v : trip.tour.nodes) {
            if (v <= 0 || v >= travel.size() || seen[static_cast<std::size_t>(v)]) return false;
            seen[static_cast<std::size_t>(v)] = 1;
            auto it = std::find_if(releases.begin(), releases.end(), [&](const auto& p) { return p.first == v; });
            if (it == releases.end() || it->second > trip.start) return false;
        }
        if (travel.route_duration(trip.tour.nodes) != trip.tour.duration) return false;
        free_at = trip.start + trip.tour.duration;
    }
    return free_at <= deadline;
}

struct OprdOptions {
    int trip_bound = 1 << 30;
    double time_limit_s = 60.0;
    const std::vector<Trip>* warm_start = nullptr;
    int max_exact_customers = 20;
};

/// Perfect-information optimum: the most customers a single vehicle can serve
/// with consecutive trips, each departing after all its parcels are released,
/// all done by T_E.
///
/// Backward DP over served sets U: L(U) is the latest time the earliest trip
/// can start so that U is served by T_E (waiting is moved to the front).
inline ExactResult solve_oprd_perfect(const ReleaseList& releases, const TravelMatrix& travel, Time deadline,
                                      const OprdOptions& opt = {}) {
    if (!(opt.time_limit_s > 0.0)) throw ParameterError("time limit must be positive");
    if (opt.trip_bound < 1) throw ParameterError("trip bound must be at least 1");
    ExactResult res;

    ReleaseList servable;
    for (const auto& [v, r] : releases)
        if (r + travel.round_trip(v) <= deadline) servable.emplace_back(v, r);
    std::sort(servable.begin(), servable.end());
    const int n = static_cast<int>(servable.size());

    if (opt.warm_start) {
        if (schedule_feasible(*opt.warm_start, releases, travel, deadline, opt.trip_bound)) {
            res.warm_start_accepted = true;
            res.trips = *opt.warm_start;
            for (const auto& t : res.trips) res.value += static_cast<int>(t.tour.nodes.size());
        }
    }
    res.bound = res.value;
    if (n == 0) return res;

    SolveDeadline clock(opt.time_limit_s);
    std::vector<Node> nodes;
    for (const auto& p : servable) nodes.push_back(p.first);

    auto fallback_bound = [&]() {
        Time rmin = servable.front().second;
        for (const auto& p : servable) rmin = std::min(rmin, p.second);
        int ub = n;
        if (n <= 31) {
            KernelConfig kc;
            kc.dp.time_limit_s = std::max(1.0, opt.time_limit_s);
            const auto op = solve_op(nodes, travel, deadline - rmin, kc);
            ub = op.bound;
        }
        return ub;
    };

    if (n > opt.max_exact_customers) {
        res.status = SolveStatus::incumbent_with_bound;
        res.bound = std::max(res.value, fallback_bound());
        if (res.bound == res.value) res.status = SolveStatus::optimal;
        return res;
    }

    const DenseTourTable table(nodes, travel, budget_of(deadline));
    const std::size_t count = std::size_t{1} << n;
    std::vector<Time> release(static_cast<std::size_t>(n));
    std::vector<Duration> rt(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        release[static_cast<std::size_t>(i)] = servable[static_cast<std::size_t>(i)].second;
        rt[static_cast<std::size_t>(i)] = travel.round_trip(nodes[static_cast<std::size_t>(i)]);
    }
    std::vector<Time> maxrel(count, 0.0);
    for (std::size_t m = 1; m < count; ++m) {
        const int low = std::countr_zero(static_cast<Mask>(m));
        maxrel[m] = std::max(maxrel[m & (m - 1)], release[static_cast<std::size_t>(low)]);
    }
    const Mask full = static_cast<Mask>(count - 1);
    auto eligible = [&](Mask u, Time latest) {
        Mask e = 0;
        for (Mask rest = full & ~u; rest; rest &= rest - 1) {
            const int i = std::countr_zero(rest);
            if (release[static_cast<std::size_t>(i)] + rt[static_cast<std::size_t>(i)] <= latest) e |= Mask{1} << i;
        }
        return e;
    };

    const auto ut = ub_trips(servable, travel, deadline);
    const bool layered = opt.trip_bound < ut.value && opt.trip_bound < n;
    const int layers = layered ? opt.trip_bound : 1;
    if (layered && static_cast<double>(count) * (layers + 1) * 12.0 > 512e6) {
        res.status = SolveStatus::incumbent_with_bound;
        res.bound = std::max(res.value, fallback_bound());
        return res;
    }

    // latest[k][U]: layered by trip count when the bound binds; otherwise one
    // layer where trips are unlimited (direct-trip bound is not binding).
    constexpr Time kUnreached = -1.0;
    std::vector<std::vector<Time>> latest(static_cast<std::size_t>(layers) + 1, std::vector<Time>(count, kUnreached));
    std::vector<std::vector<Mask>> parent(static_cast<std::size_t>(layers) + 1, std::vector<Mask>(count, 0));
    latest[0][0] = deadline;

    int best = res.value;
    Mask best_u = 0;
    int best_layer = -1;
    bool timed_out = false;
    int open_bound = best;

    auto expand = [&](int from_layer, int to_layer) {
        auto& src = latest[static_cast<std::size_t>(from_layer)];
        auto& dst = latest[static_cast<std::size_t>(to_layer)];
        auto& par = parent[static_cast<std::size_t>(to_layer)];
        for (std::size_t ui = 0; ui < count; ++ui) {
            const Time lu = src[ui];
            if (lu < 0.0) continue;
            const Mask u = static_cast<Mask>(ui);
            const int have = std::popcount(u);
            if (have > best || (have == best && best_layer < 0)) {
                best = have;
                best_u = u;
                best_layer = from_layer;
            }
            const Mask e = eligible(u, lu);
            const int reach = have + std::popcount(e);
            if (timed_out || ((ui & 0xffu) == 0 && clock.expired())) {
                timed_out = true;
                open_bound = std::max(open_bound, reach);
                continue;
            }
            if (reach <= best) continue;
            for (Mask s = e; s; s = (s - 1) & e) {
                const Duration t = table.tour(s);
                if (t >= kInfDuration) continue;
                const Time start = lu - t;
                if (start < maxrel[s]) continue;
                const std::size_t v = u | s;
                if (start > dst[v]) {
                    dst[v] = start;
                    par[v] = u;
                }
            }
        }
    };

    if (!layered) {
        expand(0, 0);  // in-place: subsets precede supersets numerically
    } else {
        for (int k = 0; k < layers; ++k) {
            // Carry states forward so layer k+1 means "at most k+1 trips".
            for (std::size_t ui = 0; ui < count; ++ui) {
                if (latest[static_cast<std::size_t>(k)][ui] > latest[static_cast<std::size_t>(k) + 1][ui]) {
                    latest[static_cast<std::size_t>(k) + 1][ui] = latest[static_cast<std::size_t>(k)][ui];
                    parent[static_cast<std::size_t>(k) + 1][ui] = static_cast<Mask>(ui);
                }
            }
            expand(k, k + 1);
        }
        for (std::size_t ui = 0; ui < count; ++ui) {
            if (latest[static_cast<std::size_t>(layers)][ui] < 0.0) continue;
            const int have = std::popcount(static_cast<Mask>(ui));
            if (have > best || (have == best && best_layer < 0)) {
                best = have;
                best_u = static_cast<Mask>(ui);
                best_layer = layers;
            }
        }
    }

    if (best_layer >= 0) {
        // Walk parents back to the empty set; each step is one trip, the first
        // one found being the earliest in time.
        std::vector<Trip> trips;
        Mask v = best_u;
        int layer = best_layer;
        while (v != 0) {
            const Mask u = parent[static_cast<std::size_t>(layer)][v];
            const Time start = latest[static_cast<std::size_t>(layer)][v];
            if (layered && u == v) {  // carried, not a trip
                --layer;
                continue;
            }
            const Mask s = v ^ u;
            const auto order = table.order(s);
            trips.push_back({start, Tour{order, table.tour(s), true}});
            v = u;
            if (layered) --layer;
        }
        res.trips = std::move(trips);
        res.value = best;
    }
    res.bound = std::max(res.value, open_bound);
    res.status = timed_out && res.bound > res.value ? SolveStatus::incumbent_with_bound : SolveStatus::optimal;
    if (res.status == SolveStatus::optimal) res.bound = res.value;
    return res;
}

}  // namespace doprd

#pragma once

// Exact subset dynamic programs over depot tours (Held-Karp style) with a
// duration budget, plus a local-search tour for sets beyond the exact bound.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "doprd/error.hpp"
#include "doprd/types.hpp"

namespace doprd {

using Mask = std::uint32_t;

/// Wall-clock stop watch shared by the exact solvers.
class SolveDeadline {
public:
    SolveDeadline() = default;
    explicit SolveDeadline(double seconds) {
        if (seconds > 0.0 && seconds < 1e12) {
            limited_ = true;
            end_ = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
        }
    }

    bool expired() const { return limited_ && std::chrono::steady_clock::now() >= end_; }

private:
    bool limited_ = false;
    std::chrono::steady_clock::time_point end_{};
};

/// Largest integral tour duration that fits in `remaining` time units.
inline Duration budget_of(Time remaining) {
    if (!(remaining >= 0.0)) return -1;
    if (remaining >= static_cast<double>(kInfDuration)) return kInfDuration - 1;
    return static_cast<Duration>(std::floor(remaining));
}

/// True when set `a` precedes set `b` in lexicographic order of their sorted
/// members (bit k stands for the k-th smallest node). Sets have equal size.
inline bool lex_less(Mask a, Mask b) noexcept {
    const Mask diff = a ^ b;
    if (diff == 0) return false;
    return (diff & (~diff + 1) & a) != 0;
}

struct SubsetTour {
    Duration duration = 0;
    Mask mask = 0;
    std::vector<Node> order;  ///< visiting order, depot implicit at both ends
};

/// Best tour per cardinality: by_size[k] is the shortest tour over exactly k
/// of the nodes that fits the budget (ties: lexicographically smallest node
/// set). by_size[0] is the empty tour.
struct TourProfile {
    std::vector<Node> nodes;  ///< sorted; bit k of a mask is nodes[k]
    std::vector<std::optional<SubsetTour>> by_size;
    bool complete = true;  ///< false when a time or memory limit cut the search short

    int max_size() const {
        for (int k = static_cast<int>(by_size.size()) - 1; k >= 0; --k)
            if (by_size[static_cast<std::size_t>(k)]) return k;
        return 0;
    }
};

struct DpLimits {
    int dense_max_nodes = 20;
    std::size_t sparse_label_cap = std::size_t{1} << 23;
    double time_limit_s = 0.0;  ///< 0 = unlimited
};

namespace detail {

inline void offer(TourProfile& prof, int size, Duration dur, Mask mask) {
    auto& slot = prof.by_size[static_cast<std::size_t>(size)];
    if (!slot || dur < slot->duration || (dur == slot->duration && lex_less(mask, slot->mask))) {
        if (!slot) slot.emplace();
        slot->duration = dur;
        slot->mask = mask;
    }
}

}  // namespace detail

/// Dense Held-Karp table over up to `DpLimits::dense_max_nodes` nodes. Only
/// labels whose path can still return to the depot within the budget are kept.
class DenseTourTable {
public:
    DenseTourTable(std::span<const Node> nodes, const TravelMatrix& travel, Duration budget, double time_limit_s = 0.0)
        : nodes_(nodes.begin(), nodes.end()), travel_(&travel), budget_(budget) {
        const int n = static_cast<int>(nodes_.size());
        if (n > 24) throw SizeLimitError("dense tour table limited to 24 nodes");
        const Mask full = n == 0 ? 0 : static_cast<Mask>((std::uint64_t{1} << n) - 1);
        const std::size_t count = std::size_t{1} << n;
        base_.resize(count + 1);
        base_[0] = 0;
        for (std::size_t m = 0; m < count; ++m) base_[m + 1] = base_[m] + static_cast<std::uint32_t>(std::popcount(static_cast<Mask>(m)));
        dp_.assign(base_[count], kInfDuration);
        tour_.assign(count, kInfDuration);
        tour_[0] = 0;
        if (budget < 0) return;

        for (int j = 0; j < n; ++j) {
            if (travel.round_trip(nodes_[static_cast<std::size_t>(j)]) <= budget)
                dp_[idx(Mask{1} << j, j)] = travel(kDepot, nodes_[static_cast<std::size_t>(j)]);
        }
        SolveDeadline deadline(time_limit_s);
        for (Mask mask = 1; mask <= full && mask != 0; ++mask) {
            if ((mask & 0x3ffu) == 0 && deadline.expired()) {
                complete_ = false;
                break;
            }
            Duration best = kInfDuration;
            for (Mask rest = mask; rest; rest &= rest - 1) {
                const int j = std::countr_zero(rest);
                const Duration c = dp_[idx(mask, j)];
                if (c >= kInfDuration) continue;
                const Node vj = nodes_[static_cast<std::size_t>(j)];
                best = std::min(best, c + travel(vj, kDepot));
                for (Mask out = full & ~mask; out; out &= out - 1) {
                    const int k = std::countr_zero(out);
                    const Node vk = nodes_[static_cast<std::size_t>(k)];
                    const Duration nc = c + travel(vj, vk);
                    if (nc + travel(vk, kDepot) > budget) continue;
                    Duration& slot = dp_[idx(mask | (Mask{1} << k), k)];
                    if (nc < slot) slot = nc;
                }
            }
            tour_[mask] = best <= budget ? best : kInfDuration;
        }
    }

    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    bool complete() const noexcept { return complete_; }

    /// Shortest tour duration over exactly the nodes in `mask`, or kInfDuration.
    Duration tour(Mask mask) const noexcept { return tour_[mask]; }

    std::vector<Node> order(Mask mask) const {
        std::vector<Node> out;
        if (mask == 0 || tour_[mask] >= kInfDuration) return out;
        const TravelMatrix& d = *travel_;
        int end = -1;
        for (Mask rest = mask; rest; rest &= rest - 1) {
            const int j = std::countr_zero(rest);
            const Duration c = dp_[idx(mask, j)];
            if (c < kInfDuration && c + d(nodes_[static_cast<std::size_t>(j)], kDepot) == tour_[mask]) {
                end = j;
                break;
            }
        }
        Mask cur = mask;
        int j = end;
        while (true) {
            out.push_back(nodes_[static_cast<std::size_t>(j)]);
            const Mask prev = cur ^ (Mask{1} << j);
            if (prev == 0) break;
            const Duration target = dp_[idx(cur, j)];
            int pick = -1;
            for (Mask rest = prev; rest; rest &= rest - 1) {
                const int i = std::countr_zero(rest);
                const Duration c = dp_[idx(prev, i)];
                if (c < kInfDuration && c + d(nodes_[static_cast<std::size_t>(i)], nodes_[static_cast<std::size_t>(j)]) == target) {
                    pick = i;
                    break;
                }
            }
            cur = prev;
            j = pick;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    TourProfile profile() const {
        TourProfile prof;
        prof.nodes = nodes_;
        prof.complete = complete_;
        const int n = size();
        prof.by_size.resize(static_cast<std::size_t>(n) + 1);
        prof.by_size[0] = SubsetTour{};
        const std::size_t count = std::size_t{1} << n;
        for (std::size_t m = 1; m < count; ++m) {
            const Duration t = tour_[m];
            if (t < kInfDuration) detail::offer(prof, std::popcount(static_cast<Mask>(m)), t, static_cast<Mask>(m));
        }
        for (auto& slot : prof.by_size)
            if (slot && slot->mask) slot->order = order(slot->mask);
        return prof;
    }

private:
    std::size_t idx(Mask mask, int j) const noexcept {
        return base_[mask] + static_cast<std::uint32_t>(std::popcount(mask & ((Mask{1} << j) - 1)));
    }

    std::vector<Node> nodes_;
    const TravelMatrix* travel_;
    Duration budget_;
    bool complete_ = true;
    std::vector<std::uint32_t> base_;
    std::vector<Duration> dp_;
    std::vector<Duration> tour_;
};

/// Level-by-level Held-Karp that stores only budget-feasible labels in hash
/// maps. Handles up to 31 nodes when the budget keeps the label count small.
inline TourProfile sparse_tour_profile(std::span<const Node> nodes, const TravelMatrix& travel, Duration budget,
                                       const DpLimits& limits = {}) {
    const int n = static_cast<int>(nodes.size());
    if (n > 31) throw SizeLimitError("sparse tour DP limited to 31 nodes");
    TourProfile prof;
    prof.nodes.assign(nodes.begin(), nodes.end());
    prof.by_size.resize(static_cast<std::size_t>(n) + 1);
    prof.by_size[0] = SubsetTour{};
    if (budget < 0 || n == 0) return prof;

    struct Level {
        std::vector<Mask> masks;
        std::vector<Duration> cost;  // n entries per mask
        std::unordered_map<Mask, std::uint32_t> index;
    };
    std::vector<Level> levels(1);
    auto slot_of = [&](Level& lv, Mask m) -> std::uint32_t {
        auto [it, fresh] = lv.index.try_emplace(m, static_cast<std::uint32_t>(lv.masks.size()));
        if (fresh) {
            lv.masks.push_back(m);
            lv.cost.resize(lv.cost.size() + static_cast<std::size_t>(n), kInfDuration);
        }
        return it->second;
    };
    for (int j = 0; j < n; ++j) {
        const Node v = nodes[static_cast<std::size_t>(j)];
        if (travel.round_trip(v) > budget) continue;
        const auto s = slot_of(levels[0], Mask{1} << j);
        levels[0].cost[s * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = travel(kDepot, v);
    }

    SolveDeadline deadline(limits.time_limit_s);
    std::size_t labels = 0;
    const Mask full = static_cast<Mask>((std::uint64_t{1} << n) - 1);
    for (int size = 1; size <= n && !levels.back().masks.empty(); ++size) {
        Level& cur = levels.back();
        for (std::size_t s = 0; s < cur.masks.size(); ++s) {
            const Mask m = cur.masks[s];
            Duration best = kInfDuration;
            for (Mask rest = m; rest; rest &= rest - 1) {
                const int j = std::countr_zero(rest);
                const Duration c = cur.cost[s * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                if (c < kInfDuration) best = std::min(best, c + travel(nodes[static_cast<std::size_t>(j)], kDepot));
            }
            if (best <= budget) detail::offer(prof, size, best, m);
        }
        if (size == n) break;
        labels += cur.masks.size();
        if (labels > limits.sparse_label_cap || deadline.expired()) {
            prof.complete = false;
            break;
        }
        Level next;
        for (std::size_t s = 0; s < cur.masks.size(); ++s) {
            const Mask m = cur.masks[s];
            for (Mask rest = m; rest; rest &= rest - 1) {
                const int j = std::countr_zero(rest);
                const Duration c = cur.cost[s * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                if (c >= kInfDuration) continue;
                const Node vj = nodes[static_cast<std::size_t>(j)];
                for (Mask out = full & ~m; out; out &= out - 1) {
                    const int k = std::countr_zero(out);
                    const Node vk = nodes[static_cast<std::size_t>(k)];
                    const Duration nc = c + travel(vj, vk);
                    if (nc + travel(vk, kDepot) > budget) continue;
                    const auto t = slot_of(next, m | (Mask{1} << k));
                    Duration& slot = next.cost[t * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
                    if (nc < slot) slot = nc;
                }
            }
        }
        levels.push_back(std::move(next));
    }

    // Walk back through the stored levels to recover visiting orders.
    for (int size = 1; size <= n; ++size) {
        auto& slot = prof.by_size[static_cast<std::size_t>(size)];
        if (!slot) continue;
        Mask cur = slot->mask;
        int level = size - 1;
        auto cost_at = [&](int lvl, Mask m, int j) -> Duration {
            const Level& lv = levels[static_cast<std::size_t>(lvl)];
            auto it = lv.index.find(m);
            if (it == lv.index.end()) return kInfDuration;
            return lv.cost[it->second * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
        };
        int end = -1;
        for (Mask rest = cur; rest; rest &= rest - 1) {
            const int j = std::countr_zero(rest);
            const Duration c = cost_at(level, cur, j);
            if (c < kInfDuration && c + travel(nodes[static_cast<std::size_t>(j)], kDepot) == slot->duration) {
                end = j;
                break;
            }
        }
        std::vector<Node> order;
        int j = end;
        while (true) {
            order.push_back(nodes[static_cast<std::size_t>(j)]);
            const Mask prev = cur ^ (Mask{1} << j);
            if (prev == 0) break;
            const Duration target = cost_at(level, cur, j);
            int pick = -1;
            for (Mask rest = prev; rest; rest &= rest - 1) {
                const int i = std::countr_zero(rest);
                const Duration c = cost_at(level - 1, prev, i);
                if (c < kInfDuration &&
                    c + travel(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]) == target) {
                    pick = i;
                    break;
                }
            }
            cur = prev;
            j = pick;
            --level;
        }
        std::reverse(order.begin(), order.end());
        slot->order = std::move(order);
    }
    return prof;
}

/// Best tour per cardinality over `nodes` within `budget`; picks the dense or
/// sparse engine by size.
inline TourProfile tour_profile(std::vector<Node> nodes, const TravelMatrix& travel, Duration budget,
                                const DpLimits& limits = {}) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (static_cast<int>(nodes.size()) <= limits.dense_max_nodes) {
        DenseTourTable table(nodes, travel, budget, limits.time_limit_s);
        return table.profile();
    }
    return sparse_tour_profile(nodes, travel, budget, limits);
}

/// Nearest-neighbour construction followed by 2-opt and or-opt moves until no
/// improving move remains. Deterministic.
inline std::vector<Node> local_search_tour(std::vector<Node> nodes, const TravelMatrix& d) {
    std::sort(nodes.begin(), nodes.end());
    const std::size_t n = nodes.size();
    if (n <= 2) return nodes;
    std::vector<Node> tour;
    tour.reserve(n);
    std::vector<bool> used(n, false);
    Node at = kDepot;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pick = n;
        for (std::size_t k = 0; k < n; ++k) {
            if (used[k]) continue;
            if (pick == n || d(at, nodes[k]) < d(at, nodes[pick])) pick = k;
        }
        used[pick] = true;
        tour.push_back(nodes[pick]);
        at = nodes[pick];
    }
    auto node_at = [&](std::ptrdiff_t k) -> Node {
        return (k < 0 || k >= static_cast<std::ptrdiff_t>(tour.size())) ? kDepot : tour[static_cast<std::size_t>(k)];
    };
    bool improved = true;
    while (improved) {
        improved = false;
        const auto m = static_cast<std::ptrdiff_t>(tour.size());
        // 2-opt: reverse tour[i..j]
        for (std::ptrdiff_t i = 0; i < m && !improved; ++i) {
            for (std::ptrdiff_t j = i + 1; j < m && !improved; ++j) {
                const Duration before = d(node_at(i - 1), node_at(i)) + d(node_at(j), node_at(j + 1));
                const Duration after = d(node_at(i - 1), node_at(j)) + d(node_at(i), node_at(j + 1));
                if (after < before) {
                    std::reverse(tour.begin() + i, tour.begin() + j + 1);
                    improved = true;
                }
            }
        }
        // or-opt: move a segment of length 1..3 elsewhere
        for (std::ptrdiff_t len = 1; len <= 3 && !improved; ++len) {
            for (std::ptrdiff_t i = 0; i + len <= m && !improved; ++i) {
                const Duration removed = d(node_at(i - 1), node_at(i)) + d(node_at(i + len - 1), node_at(i + len)) -
                                         d(node_at(i - 1), node_at(i + len));
                std::vector<Node> seg(tour.begin() + i, tour.begin() + i + len);
                std::vector<Node> rest;
                rest.reserve(tour.size());
                rest.insert(rest.end(), tour.begin(), tour.begin() + i);
                rest.insert(rest.end(), tour.begin() + i + len, tour.end());
                const auto r = static_cast<std::ptrdiff_t>(rest.size());
                for (std::ptrdiff_t p = 0; p <= r && !improved; ++p) {
                    if (p == i) continue;
                    const Node a = p == 0 ? kDepot : rest[static_cast<std::size_t>(p - 1)];
                    const Node b = p == r ? kDepot : rest[static_cast<std::size_t>(p)];
                    const Duration fwd = d(a, seg.front()) + d(seg.back(), b) - d(a, b);
                    const Duration bwd = d(a, seg.back()) + d(seg.front(), b) - d(a, b);
                    const Duration add = std::min(fwd, bwd);
                    if (add < removed) {
                        if (bwd < fwd) std::reverse(seg.begin(), seg.end());
                        rest.insert(rest.begin() + p, seg.begin(), seg.end());
                        tour = std::move(rest);
                        improved = true;
                    }
                }
            }
        }
    }
    return tour;
}

}  // namespace doprd

#pragma once

// Backward batch construction used to estimate how many requests future
// routes will serve.

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "doprd/error.hpp"
#include "doprd/instance.hpp"
#include "doprd/types.hpp"

namespace doprd {

/// Expected duration of a tour through `rho` points spread over `area`.
inline double daganzo_duration(double area, int rho) {
    if (area < 0.0) throw ParameterError("area must be non-negative");
    if (rho < 1) throw ParameterError("rho must be at least 1");
    return 0.75 * std::sqrt(area * rho);
}

/// Area of the axis-aligned bounding box of the given nodes' locations.
inline double bounding_box_area(const Instance& inst, const std::vector<Node>& nodes) {
    if (nodes.empty()) return 0.0;
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (Node v : nodes) {
        const Point p = inst.location(v);
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    return (x1 - x0) * (y1 - y0);
}

/// Batch duration for the current unserved set. When the locations span no
/// area (one customer, or all on a line) the mean round trip is used instead.
inline double batch_duration(const Instance& inst, const std::vector<Node>& unserved, int rho) {
    const double td = daganzo_duration(bounding_box_area(inst, unserved), rho);
    if (td > 0.0 || unserved.empty()) return td;
    double sum = 0.0;
    for (Node v : unserved) sum += inst.travel.round_trip(v);
    return sum / static_cast<double>(unserved.size());
}

struct Batch {
    int index = 0;  ///< 1 = last route before the deadline
    Time tau_start = 0.0;
    Time tau_end = 0.0;
    int rho_k = 0;
    std::vector<Node> assigned_unknown;  ///< sorted
    bool saw_known = false;
};

struct BatchPlan {
    std::vector<Batch> batches;
    std::vector<int> spare_indices;        ///< K0, ascending
    std::map<Node, int> assignment;        ///< unknown id -> k(i), 0 = unassigned
    int rho = 0;
    double t_d = 0.0;

    int size() const noexcept { return static_cast<int>(batches.size()); }
    int assigned_count() const {
        int c = 0;
        for (const auto& [v, k] : assignment) c += k != 0;
        return c;
    }
    int spare_capacity() const {
        int s = 0;
        for (int k : spare_indices) s += rho - batches[static_cast<std::size_t>(k - 1)].rho_k;
        return s;
    }
};

/// Builds future batches backward from the deadline. Requests are swept from
/// the latest release; one joins the current batch when its release is no
/// later than the batch start. Known requests (release 0) fill capacity but
/// get no fixed assignment. Stops once a batch start would be <= t_e.
/// K0 holds every batch with unknown fill below rho.
inline BatchPlan build_batches(Time t_e, const std::vector<Node>& known, const std::vector<std::pair<Node, Time>>& realized,
                               Time deadline, int rho, double t_d) {
    if (rho < 1) throw ParameterError("rho must be at least 1");
    if (!(t_d > 0.0)) throw ParameterError("batch duration must be positive");
    BatchPlan plan;
    plan.rho = rho;
    plan.t_d = t_d;

    struct Req {
        Node id;
        Time release;
        bool known;
    };
    std::vector<Req> reqs;
    reqs.reserve(known.size() + realized.size());
    for (Node v : known) reqs.push_back({v, 0.0, true});
    for (const auto& [v, r] : realized) {
        reqs.push_back({v, r, false});
        plan.assignment[v] = 0;
    }
    std::sort(reqs.begin(), reqs.end(), [](const Req& a, const Req& b) {
        return a.release != b.release ? a.release < b.release : a.id < b.id;
    });

    int k = 1;
    Time t_k = deadline - t_d;
    int r = 0;
    Batch cur;
    cur.index = 1;
    for (int i = static_cast<int>(reqs.size()) - 1; i >= 0; --i) {
        if (t_k <= t_e) break;
        const Req& q = reqs[static_cast<std::size_t>(i)];
        if (q.release > t_k) continue;
        if (q.known) {
            cur.saw_known = true;
        } else {
            plan.assignment[q.id] = k;
            cur.assigned_unknown.push_back(q.id);
            ++cur.rho_k;
        }
        ++r;
        if (r == rho || i == 0) {
            cur.tau_start = t_k;
            cur.tau_end = t_k + t_d;
            std::sort(cur.assigned_unknown.begin(), cur.assigned_unknown.end());
            plan.batches.push_back(std::move(cur));
            ++k;
            t_k = deadline - k * t_d;
            r = 0;
            cur = Batch{};
            cur.index = k;
        }
    }
    for (const auto& b : plan.batches)
        if (b.rho_k < rho) plan.spare_indices.push_back(b.index);
    return plan;
}

/// Maximum number of requests the batch schedule can serve: all known plus
/// all assigned unknown requests when the known ones fit the spare capacity,
/// otherwise every batch full.
inline int opt_count(int known_count, const BatchPlan& plan) {
    if (known_count < plan.spare_capacity()) return known_count + plan.assigned_count();
    return plan.size() * plan.rho;
}

/// Exhaustive optimum for the same setting: back-to-back slots of length t_d
/// ending at the deadline, each starting after t_e, each holding at most rho
/// requests released by its start. Every subset of requests is tested for an
/// assignment with Hall's condition; a request fits slots 1..last(i) since
/// slot 1 starts latest.
inline int brute_force_max_served(Time t_e, const std::vector<Time>& releases, Time deadline, int rho, double t_d) {
    const int n = static_cast<int>(releases.size());
    if (n > 12) throw SizeLimitError("brute-force oracle limited to 12 requests");
    if (rho < 1 || !(t_d > 0.0)) throw ParameterError("rho and batch duration must be positive");
    int slots = 0;
    while (deadline - (slots + 1) * t_d > t_e) ++slots;
    std::vector<int> last(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        for (int k = 1; k <= slots; ++k)
            if (releases[static_cast<std::size_t>(i)] <= deadline - k * t_d) last[static_cast<std::size_t>(i)] = k;
    int best = 0;
    for (unsigned m = 0; m < (1u << n); ++m) {
        const int size = std::popcount(m);
        if (size <= best) continue;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            if ((m >> i & 1u) && last[static_cast<std::size_t>(i)] == 0) ok = false;
        for (int q = 1; q <= slots && ok; ++q) {
            int need = 0;
            for (int i = 0; i < n; ++i)
                if ((m >> i & 1u) && last[static_cast<std::size_t>(i)] <= q) ++need;
            if (need > rho * q) ok = false;
        }
        if (ok) best = size;
    }
    return best;
}

}  // namespace doprd

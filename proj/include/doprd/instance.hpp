#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doprd/error.hpp"
#include "doprd/rng.hpp"
#include "doprd/types.hpp"

namespace doprd {

/// How a customer's release-date information evolves.
enum class ReleaseMode {
    available_at_start,  ///< parcel is at the depot at time 0
    static_estimate,     ///< estimate fixed at time 0 until arrival
    dynamic_estimate,    ///< estimate refined as the supplier approaches
};

inline const char* to_string(ReleaseMode m) {
    switch (m) {
        case ReleaseMode::available_at_start: return "available_at_start";
        case ReleaseMode::static_estimate: return "static";
        case ReleaseMode::dynamic_estimate: return "dynamic";
    }
    return "?";
}

inline ReleaseMode release_mode_from_string(const std::string& s) {
    if (s == "available_at_start") return ReleaseMode::available_at_start;
    if (s == "static") return ReleaseMode::static_estimate;
    if (s == "dynamic") return ReleaseMode::dynamic_estimate;
    throw ParseError("unknown release mode '" + s + "'");
}

enum class DistanceRounding { ceil, floor };

struct Customer {
    int id = 0;
    Point pos;
    Time true_release = 0.0;  ///< hidden from policies
    ReleaseMode mode = ReleaseMode::static_estimate;
    Time estimate_mean = 0.0;
    Time estimate_std = 0.0;

    friend bool operator==(const Customer&, const Customer&) = default;
};

struct GenerationParams {
    double beta = 1.0;
    double delta = 0.0;
    double c = 1.0;
    std::uint64_t seed = 0;
    Time t_standard = 0.0;
    /// Nominal horizon H that scales release means; 0 means "use the depot due date".
    Time horizon = 0.0;
    /// Base standard deviation; 0 means 5% of the horizon.
    double sigma0 = 0.0;
    DistanceRounding rounding = DistanceRounding::ceil;
    /// Set when beta/delta/c fall outside the benchmark grids.
    bool nonstandard = false;

    friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

struct Instance {
    std::string name;
    Point depot;
    std::vector<Customer> customers;
    TravelMatrix travel;
    Time deadline = 0.0;
    GenerationParams meta;

    int size() const noexcept { return static_cast<int>(customers.size()); }

    /// Customer behind travel-matrix node `v` (1-based).
    const Customer& at(Node v) const { return customers[static_cast<std::size_t>(v - 1)]; }

    Point location(Node v) const { return v == kDepot ? depot : at(v).pos; }

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// One row of a Solomon file that survives parsing.
struct Site {
    int id = 0;
    Point pos;

    friend bool operator==(const Site&, const Site&) = default;
};

struct SolomonData {
    std::string name;
    Point depot;
    Time depot_due = 0.0;
    std::vector<Site> customers;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline bool parse_number(const std::string& tok, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(tok, &used);
        return used == tok.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

inline bool contains_ci(const std::string& hay, const std::string& needle) {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        return s;
    };
    return lower(hay).find(lower(needle)) != std::string::npos;
}

}  // namespace detail

/// Reads the Solomon VRPTW layout. When a "CUST NO." header is present, rows
/// start after it; otherwise every non-blank line is a row. Row 0 is the depot.
/// Demand and time-window columns are read and discarded, except the depot
/// due date which is kept as the nominal horizon.
inline SolomonData parse_customers(std::istream& text, std::optional<int> limit = std::nullopt) {
    std::vector<std::pair<int, std::string>> lines;
    int lineno = 0;
    int header_at = -1;
    for (std::string line; std::getline(text, line);) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::contains_ci(line, "CUST NO")) header_at = static_cast<int>(lines.size());
        lines.emplace_back(lineno, line);
    }

    SolomonData data;
    std::size_t first = header_at >= 0 ? static_cast<std::size_t>(header_at) + 1 : 0;
    if (header_at > 0) {
        for (std::size_t k = 0; k < static_cast<std::size_t>(header_at); ++k) {
            auto toks = detail::split_ws(lines[k].second);
            if (!toks.empty()) {
                data.name = toks.front();
                break;
            }
        }
    }

    bool have_depot = false;
    std::set<int> ids;
    for (std::size_t k = first; k < lines.size(); ++k) {
        const auto& [no, line] = lines[k];
        auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() != 7) throw ParseError("expected 7 columns (id x y demand ready due service), got " + std::to_string(toks.size()), no);
        double v[7];
        for (int c = 0; c < 7; ++c) {
            if (!detail::parse_number(toks[c], v[c])) throw ParseError("non-numeric field '" + toks[c] + "'", no);
        }
        if (v[0] != std::floor(v[0]) || v[0] < 0) throw ParseError("customer id must be a non-negative integer", no);
        const int id = static_cast<int>(v[0]);
        if (!have_depot) {
            data.depot = {v[1], v[2]};
            data.depot_due = v[5];
            have_depot = true;
            continue;
        }
        if (id <= 0) throw ParseError("customer id must be positive", no);
        if (!ids.insert(id).second) throw ParseError("duplicate customer id " + std::to_string(id), no);
        if (limit && static_cast<int>(data.customers.size()) >= *limit) continue;
        data.customers.push_back({id, {v[1], v[2]}});
    }
    if (!have_depot || data.customers.empty()) throw EmptyInstanceError("no customers in input");
    return data;
}

/// Pairwise travel times, rounded up by default. Node 0 is the depot.
inline TravelMatrix travel_matrix(Point depot, const std::vector<Point>& customers,
                                  DistanceRounding rounding = DistanceRounding::ceil) {
    std::vector<Point> pts;
    pts.reserve(customers.size() + 1);
    pts.push_back(depot);
    pts.insert(pts.end(), customers.begin(), customers.end());
    for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ParameterError("non-finite coordinate");
    }
    const int n = static_cast<int>(pts.size());
    TravelMatrix m(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dist = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
            const double r = rounding == DistanceRounding::ceil ? std::ceil(dist) : std::floor(dist);
            if (r <= 0.0) {
                throw DuplicateLocationError("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                                             " are too close to have a positive travel time");
            }
            m(i, j) = m(j, i) = static_cast<Duration>(r);
        }
    }
    return m;
}

inline TravelMatrix travel_matrix(Point depot, const std::vector<Site>& sites,
                                  DistanceRounding rounding = DistanceRounding::ceil) {
    std::vector<Point> pts;
    pts.reserve(sites.size());
    for (const auto& s : sites) pts.push_back(s.pos);
    return travel_matrix(depot, pts, rounding);
}

inline bool satisfies_triangle_inequality(const TravelMatrix& m) {
    const int n = m.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (m(i, j) > m(i, k) + m(k, j)) return false;
    return true;
}

/// Throws if the instance breaks a structural invariant.
inline void validate(const Instance& inst) {
    const int n = inst.size();
    if (inst.travel.size() != n + 1) throw ParameterError("travel matrix size does not match customer count");
    if (!(inst.deadline >= 0.0)) throw ParameterError("deadline must be non-negative");
    std::set<int> ids;
    for (const auto& c : inst.customers) {
        if (c.id <= 0) throw ParameterError("customer ids must be positive");
        if (!ids.insert(c.id).second) throw ParameterError("duplicate customer id " + std::to_string(c.id));
        if (!(c.true_release >= 0.0)) throw ParameterError("negative release date");
        if (!(c.estimate_std >= 0.0)) throw ParameterError("negative estimate std");
        if ((c.mode == ReleaseMode::available_at_start) != (c.true_release == 0.0))
            throw ParameterError("customer " + std::to_string(c.id) + ": available_at_start iff release is 0");
    }
    for (int i = 0; i <= n; ++i) {
        if (inst.travel(i, i) != 0) throw ParameterError("travel diagonal must be zero");
        for (int j = 0; j <= n; ++j) {
            if (inst.travel(i, j) != inst.travel(j, i)) throw ParameterError("travel matrix must be symmetric");
            if (i != j && inst.travel(i, j) <= 0) throw ParameterError("off-diagonal travel must be positive");
        }
    }
}

inline bool on_standard_grid(const GenerationParams& p) {
    auto in = [](double v, std::initializer_list<double> grid) {
        return std::any_of(grid.begin(), grid.end(), [v](double g) { return std::abs(v - g) < 1e-12; });
    };
    return in(p.beta, {0.5, 1.0, 1.5}) && in(p.delta, {0.0, 0.5, 1.0}) && in(p.c, {0.6, 0.8, 1.0, 1.2});
}

/// Builds a DOP-rd instance from Solomon sites.
///
/// Each customer gets an estimate mean drawn uniformly from [0, beta * H] and
/// an estimate std of sigma0 * beta; the true release is a draw from that
/// Normal truncated to [0, inf). round(delta * n) customers, chosen uniformly,
/// receive dynamically refined estimates. The deadline is round(c * latest
/// true release). Everything is a pure function of (sites, params).
inline Instance generate_instance(const SolomonData& data, GenerationParams params) {
    if (!(params.delta >= 0.0 && params.delta <= 1.0)) throw ParameterError("delta must lie in [0, 1]");
    if (!(params.beta >= 0.0)) throw ParameterError("beta must be non-negative");
    if (!(params.c > 0.0)) throw ParameterError("c must be positive");
    if (data.customers.empty()) throw EmptyInstanceError("no customers to generate from");

    const Time horizon = params.horizon > 0.0 ? params.horizon : data.depot_due;
    if (!(horizon > 0.0)) throw ParameterError("nominal horizon must be positive");
    params.horizon = horizon;
    if (!(params.sigma0 > 0.0)) params.sigma0 = 0.05 * horizon;
    params.nonstandard = !on_standard_grid(params);

    Instance inst;
    inst.name = data.name;
    inst.depot = data.depot;
    inst.travel = travel_matrix(data.depot, data.customers, params.rounding);

    Rng world = make_rng(params.seed, Stream::world_generation);
    const int n = static_cast<int>(data.customers.size());
    inst.customers.reserve(static_cast<std::size_t>(n));
    for (const auto& site : data.customers) {
        Customer c;
        c.id = site.id;
        c.pos = site.pos;
        c.estimate_mean = std::uniform_real_distribution<double>(0.0, params.beta * horizon)(world);
        c.estimate_std = params.sigma0 * params.beta;
        if (c.estimate_std > 0.0) {
            std::normal_distribution<double> normal(c.estimate_mean, c.estimate_std);
            double r = normal(world);
            // mean >= 0 keeps the acceptance rate at 1/2 or better
            for (int tries = 0; r < 0.0 && tries < 10000; ++tries) r = normal(world);
            c.true_release = std::max(r, 0.0);
        } else {
            c.true_release = c.estimate_mean;
        }
        inst.customers.push_back(c);
    }

    const int n_dynamic = static_cast<int>(std::lround(params.delta * n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng pick = make_rng(params.seed, Stream::dynamic_selection);
    std::shuffle(order.begin(), order.end(), pick);
    for (int k = 0; k < n; ++k) {
        inst.customers[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].mode =
            k < n_dynamic ? ReleaseMode::dynamic_estimate : ReleaseMode::static_estimate;
    }
    for (auto& c : inst.customers) {
        if (c.true_release == 0.0) c.mode = ReleaseMode::available_at_start;
    }

    params.t_standard = 0.0;
    for (const auto& c : inst.customers) params.t_standard = std::max(params.t_standard, c.true_release);
    inst.deadline = std::round(params.c * params.t_standard);
    inst.meta = params;
    return inst;
}

}  // namespace doprd

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "doprd/error.hpp"

namespace doprd {

/// Clock values and release dates. Travel times are integral but release
/// dates and decision epochs are continuous.
using Time = double;

/// Integral travel duration between two nodes.
using Duration = std::int32_t;

/// Node index into the travel matrix; 0 is the depot, customers are 1..n in
/// instance order.
using Node = int;

inline constexpr Node kDepot = 0;
inline constexpr Duration kInfDuration = std::numeric_limits<Duration>::max() / 4;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Dense square matrix of travel times over depot + customers.
class TravelMatrix {
public:
    TravelMatrix() = default;

    explicit TravelMatrix(int nodes) : n_(nodes), data_(static_cast<std::size_t>(nodes) * nodes, 0) {}

    int size() const noexcept { return n_; }

    Duration operator()(Node i, Node j) const noexcept { return data_[static_cast<std::size_t>(i) * n_ + j]; }
    Duration& operator()(Node i, Node j) noexcept { return data_[static_cast<std::size_t>(i) * n_ + j]; }

    /// Depot -> i -> depot.
    Duration round_trip(Node i) const noexcept { return (*this)(kDepot, i) + (*this)(i, kDepot); }

    /// Duration of depot -> route[0] -> ... -> route.back() -> depot.
    Duration route_duration(std::span<const Node> route) const noexcept {
        if (route.empty()) return 0;
        Duration total = (*this)(kDepot, route.front());
        for (std::size_t k = 1; k < route.size(); ++k) total += (*this)(route[k - 1], route[k]);
        return total + (*this)(route.back(), kDepot);
    }

    const std::vector<Duration>& raw() const noexcept { return data_; }

    friend bool operator==(const TravelMatrix&, const TravelMatrix&) = default;

private:
    int n_ = 0;
    std::vector<Duration> data_;
};

}  // namespace doprd

// types.hpp - vertex/weight/distance primitives shared by every index.
#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dynsp {

using Vertex = std::uint32_t;
using Weight = std::uint32_t;  // travel-time units, always >= 1
using Dist = std::uint64_t;    // wide enough for n * max_weight

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

// Saturating internal "infinity". Sums of two values <= kInfDist never wrap,
// so add() only has to clamp.
inline constexpr Dist kInfDist = std::numeric_limits<Dist>::max() / 4;

// Largest weight produced by doubling updates; keeps n * w far below kInfDist.
inline constexpr Weight kMaxWeight = Weight{1} << 30;

constexpr Dist add(Dist a, Dist b) noexcept {
    const Dist s = a + b;
    return s < kInfDist ? s : kInfDist;
}

/// Shortest-distance result at API boundaries. Unreachable is a distinct
/// state, never a large finite number, and orders after every finite value.
class Distance {
public:
    constexpr Distance() noexcept = default;
    constexpr explicit Distance(Dist value) noexcept : value_(value < kInfDist ? value : kInfDist) {}

    static constexpr Distance unreachable() noexcept { return Distance{}; }
    static constexpr Distance from_internal(Dist d) noexcept { return Distance{d}; }

    constexpr bool reachable() const noexcept { return value_ < kInfDist; }
    constexpr Dist value() const {
        if (!reachable()) throw std::logic_error("value() on unreachable distance");
        return value_;
    }
    constexpr Dist internal() const noexcept { return value_; }

    friend constexpr Distance operator+(Distance a, Distance b) noexcept {
        return Distance{add(a.value_, b.value_)};
    }
    friend constexpr bool operator==(Distance, Distance) noexcept = default;
    friend constexpr std::strong_ordering operator<=>(Distance a, Distance b) noexcept {
        return a.value_ <=> b.value_;
    }

    std::string to_string() const { return reachable() ? std::to_string(value_) : "unreachable"; }
    friend std::ostream& operator<<(std::ostream& os, Distance d) { return os << d.to_string(); }

private:
    Dist value_ = kInfDist;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Raised when a query is issued against an index stage that is not ready.
class StageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace dynsp

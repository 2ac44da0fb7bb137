#pragma once

#include <cmath>
#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cellgraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that violates a documented format or precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Lookup of an id that does not exist (node, dataset, session).
class NotFound : public Error {
public:
    using Error::Error;
};

/// UTC instant with one-second resolution.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t epoch_seconds) : seconds_(epoch_seconds) {}

    constexpr std::int64_t epoch_seconds() const { return seconds_; }

    /// Parses `YYYY-MM-DDTHH:MM:SSZ` (or a `+00:00` suffix). Anything without
    /// an explicit UTC designator is rejected.
    static Timestamp parse_iso8601(std::string_view text);
    std::string to_iso8601() const;

    constexpr auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t seconds_ = 0;
};

/// Half-open time interval [start, end).
struct TimeWindow {
    Timestamp start;
    Timestamp end;

    bool contains(Timestamp t) const { return start <= t && t < end; }
    bool operator==(const TimeWindow&) const = default;
};

/// Throws InvalidArgument unless start < end.
TimeWindow make_window(Timestamp start, Timestamp end);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Canvas {
    double width = 1000.0;
    double height = 1000.0;

    Vec2 center() const { return {width / 2.0, height / 2.0}; }
    double diagonal() const { return std::hypot(width, height); }
    bool contains(Vec2 p) const { return p.x >= 0 && p.x <= width && p.y >= 0 && p.y <= height; }
};

}  // namespace cellgraph

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>

namespace bellman {

/// Named failure state plus human-readable context. `state` values are stable
/// strings used programmatically (e.g. "degenerate root", "outside-strip").
struct Error {
    std::string state;
    std::string detail;
};

/// Value-or-error return for fallible module boundaries. Exceptions are
/// reserved for programmer errors (broken preconditions inside the library).
template <class T>
class Result {
public:
    Result(T v) : rep_(std::move(v)) {}
    Result(Error e) : rep_(std::move(e)) {}

    bool ok() const { return rep_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() { return std::get<0>(rep_); }
    const T& value() const { return std::get<0>(rep_); }
    const Error& error() const { return std::get<1>(rep_); }

private:
    std::variant<T, Error> rep_;
};

/// Point (or vector) in strip coordinates; x2 is the transverse coordinate,
/// bounded by the strip half-width.
struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }

/// 2x2 matrix, row major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;
};

inline double norm_inf(const Mat2& m) {
    double r1 = std::abs(m.a11) + std::abs(m.a12);
    double r2 = std::abs(m.a21) + std::abs(m.a22);
    return r1 > r2 ? r1 : r2;
}

}  // namespace bellman

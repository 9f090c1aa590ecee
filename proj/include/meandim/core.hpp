#pragma once

// Shared plumbing: error types, exact big integers, rationals, compensated
// summation and resource limits used across the library.

#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace meandim {

inline constexpr std::string_view version = "0.1.0";

using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------- errors --

class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Precondition of an operation violated by the caller.
class precondition_error : public error {
public:
    using error::error;
};

// A configured resource cap (memory, cells, states) would be exceeded.
class resource_error : public error {
public:
    using error::error;
};

// Bounded search (BFS radius cap) exhausted before the target was found.
class search_limit_error : public error {
public:
    using error::error;
};

// Two specs that must refer to compatible objects do not.
class incompatible_error : public error {
public:
    using error::error;
};

// Config file syntax or schema problem, with source position.
class config_error : public error {
public:
    config_error(const std::string& what, int line, int col)
        : error(what + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
          line(line), col(col) {}
    explicit config_error(const std::string& what) : error(what), line(0), col(0) {}
    int line;
    int col;
};

// ---------------------------------------------------------------- limits --

struct Limits {
    std::size_t ball_elements = 10'000'000;  // BFS memory guard
    std::size_t window_cells = 1'000'000;    // explicit window construction
    std::size_t backtrack_cells = 4096;      // general-SFT backtracking
    std::size_t ba_states = 4096;            // Blahut-Arimoto support cap
};

inline const Limits& default_limits() {
    static const Limits lim{};
    return lim;
}

// -------------------------------------------------------------- rational --

// Small exact rational; enough for boundary/invariance ratios.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den == 0) throw error("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
};

// ------------------------------------------------------------- summation --

// Kahan compensated accumulator for entropy sums.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// -------------------------------------------------------------- integers --

inline BigInt big_pow(std::uint64_t base, std::size_t exp) {
    BigInt r = 1;
    BigInt b = base;
    while (exp > 0) {
        if (exp & 1U) r *= b;
        b *= b;
        exp >>= 1U;
    }
    return r;
}

// log2 of a positive big integer, accurate to double precision.
inline double log2_big(const BigInt& x) {
    if (x <= 0) throw precondition_error("log2 of non-positive integer");
    const std::size_t bits = boost::multiprecision::msb(x);  // floor(log2 x)
    if (bits <= 62) return std::log2(static_cast<double>(x.convert_to<std::uint64_t>()));
    const std::size_t shift = bits - 62;
    const BigInt top = x >> shift;
    return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

// --------------------------------------------------------------- hashing --

namespace detail {

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

}  // namespace detail

}  // namespace meandim

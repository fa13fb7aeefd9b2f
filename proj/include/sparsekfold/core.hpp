#pragma once

// Shared scalar types, the tolerance policy, error types and seeding helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace skf {

using index_t = std::int64_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// All <=/>= comparisons on radii use relative tolerance 1e-9, with an
// absolute floor of 1e-12 near zero.
inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

inline double cmp_tol(double a, double b) {
    double m = std::max(std::fabs(a), std::fabs(b));
    if (!std::isfinite(m)) return kAbsTol;
    return std::max(kAbsTol, kRelTol * m);
}

inline bool leq_tol(double a, double b) { return a <= b + cmp_tol(a, b); }
inline bool geq_tol(double a, double b) { return a + cmp_tol(a, b) >= b; }
inline bool eq_tol(double a, double b) { return leq_tol(a, b) && leq_tol(b, a); }

struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

struct verification_error : std::runtime_error {
    explicit verification_error(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64; used everywhere a reproducible stream is needed so that output
// does not depend on the standard library's distribution internals.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return n ? next() % n : 0; }

    // uniform in [0, 1)
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x632be59bd9b4e019ULL + (b << 1)));
    g.next();
    return g.next() ^ b;
}

template <class T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    SplitMix64 g(seed);
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[g.next_below(i)]);
}

inline index_t binomial(index_t n, index_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    index_t r = 1;
    for (index_t i = 1; i <= k; ++i) {
        if (r > (std::numeric_limits<index_t>::max() / (n - k + i))) return std::numeric_limits<index_t>::max();
        r = r * (n - k + i) / i;
    }
    return r;
}

} // namespace skf

#pragma once

// Shared types for filtered complexes over lens vertices: run parameters,
// per-site radius schedules, the multiplicative value grid, and simplices.

#include <climits>
#include <optional>

#include "sparsekfold/core.hpp"
#include "sparsekfold/kdp.hpp"

namespace skf {

// A lens names a k-subset of sites by strictly increasing indices. Inside the
// library the indices are positions in the k-distance permutation; they are
// translated to original input indices only at serialization boundaries.
using lens_t = std::vector<index_t>;

struct Params {
    index_t k = 1;
    double epsilon = 1.0;
    double eps_prime = 1.0 / 3.0;  // epsilon / 3, computed once and stored
    int m_max = 1;
    std::uint64_t seed = 0;

    double one_plus() const { return 1.0 + eps_prime; }
};

inline Params make_params(index_t k, double epsilon, int m_max, std::uint64_t seed = 0) {
    if (k < 1) throw std::invalid_argument("params: k must be at least 1");
    if (!(epsilon > 0.0) || epsilon > 1.0) throw std::invalid_argument("params: epsilon must lie in (0, 1]");
    if (m_max < 0) throw std::invalid_argument("params: max dimension must be nonnegative");
    Params p;
    p.k = k;
    p.epsilon = epsilon;
    p.eps_prime = epsilon / 3.0;
    p.m_max = m_max;
    p.seed = seed;
    return p;
}

// Per-site radius schedule. The freezing radius of site i is
// (1+eps')*lambda_i/eps', the removal radius is (1+eps') times that; the
// first k sites carry infinite sentinels that are only ever compared, never
// used in arithmetic.
struct SiteSchedule {
    index_t k = 0;
    std::vector<double> lambda;
    std::vector<double> crit;
    std::vector<double> omega;
};

inline SiteSchedule make_schedule(const std::vector<double>& lambdas, const Params& params) {
    SiteSchedule s;
    s.k = params.k;
    s.lambda = lambdas;
    s.crit.resize(lambdas.size());
    s.omega.resize(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!std::isfinite(lambdas[i])) {
            s.crit[i] = kInf;
            s.omega[i] = kInf;
        } else {
            s.crit[i] = params.one_plus() * lambdas[i] / params.eps_prime;
            s.omega[i] = params.one_plus() * s.crit[i];
        }
    }
    return s;
}

// Everything the per-lens operations need: sites in permutation order, the
// permutation itself, parameters and the schedule.
struct SiteContext {
    PointCloud sites;           // permutation order
    std::vector<index_t> perm;  // perm[rank] = original input index
    Params params;
    SiteSchedule sched;
};

inline SiteContext make_context(const PointCloud& cloud, const Params& params) {
    KPermutation kp = kdp_fast(cloud, params.k);
    SiteContext ctx;
    ctx.params = params;
    ctx.perm = kp.order;
    ctx.sites.n = cloud.n;
    ctx.sites.dim = cloud.dim;
    ctx.sites.coords.resize(cloud.coords.size());
    for (index_t r = 0; r < cloud.n; ++r) {
        const double* src = cloud.at(kp.order[std::size_t(r)]);
        std::copy(src, src + cloud.dim, ctx.sites.coords.begin() + std::size_t(r) * cloud.dim);
    }
    ctx.sched = make_schedule(kp.lambdas, params);
    return ctx;
}

// Assemble a context from already-ordered sites and lambda values (used by
// tests that drive the lens operations with synthetic schedules).
inline SiteContext make_context_raw(PointCloud sites_in_order, std::vector<double> lambdas, Params params) {
    SiteContext ctx;
    ctx.params = params;
    ctx.perm.resize(std::size_t(sites_in_order.n));
    for (index_t i = 0; i < sites_in_order.n; ++i) ctx.perm[std::size_t(i)] = i;
    ctx.sites = std::move(sites_in_order);
    ctx.sched = make_schedule(lambdas, params);
    return ctx;
}

// ---------------------------------------------------------------------------
// The value grid: critical values are integer powers of (1+eps').

inline double grid_pow(double one_plus, long long z) {
    unsigned long long e = z < 0 ? 0ULL - (unsigned long long)(z) : (unsigned long long)(z);
    double base = one_plus, result = 1.0;
    while (e) {
        if (e & 1ULL) result *= base;
        base *= base;
        e >>= 1;
    }
    return z < 0 ? 1.0 / result : result;
}

// Smallest z with (1+eps')^z >= x, for x > 0. Comparison-exact with respect
// to grid_pow.
inline long long ceil_exponent(double one_plus, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("ceil_exponent: needs a positive finite value");
    long long z = (long long)(std::floor(std::log(x) / std::log(one_plus))) - 2;
    int guard = 0;
    while (grid_pow(one_plus, z) < x) {
        ++z;
        if (++guard > 1 << 12) throw std::logic_error("ceil_exponent: no convergence");
    }
    while (grid_pow(one_plus, z - 1) >= x) {
        --z;
        if (++guard > 1 << 12) throw std::logic_error("ceil_exponent: no convergence");
    }
    return z;
}

// Exponent assigned to vertices whose enclosing radius is zero (k = 1);
// replaced by the run-level minimum exponent when the output is assembled.
inline constexpr long long kZeroRadiusExponent = LLONG_MIN;

struct FilteredSimplex {
    std::vector<lens_t> vertices;  // sorted lexicographically
    long long z = 0;
    double value = 0.0;

    int dim() const { return int(vertices.size()) - 1; }
};

inline bool filtration_order(const FilteredSimplex& a, const FilteredSimplex& b) {
    if (a.z != b.z) return a.z < b.z;
    if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
    return a.vertices < b.vertices;
}

struct BuildStats {
    // per site, per simplex dimension: number of output simplices associated
    // to that site (a simplex is associated to its highest involved site)
    std::vector<std::vector<index_t>> per_site_dim_counts;
    double min_positive_alpha = kInf;
    index_t candidate_enumerations = 0;
};

struct SparseFiltration {
    Params params;
    std::vector<index_t> perm;
    std::vector<double> lambdas;
    std::vector<FilteredSimplex> simplices;  // sorted by (z, dim, vertices)
    long long min_exponent = 0;
    bool has_zero_alpha = false;  // some vertices were clamped to min_exponent
    BuildStats stats;
};

} // namespace skf

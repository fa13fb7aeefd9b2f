#pragma once

// Desk-scale exact constructions used to certify the sparse pipeline: the
// exact k-th order Cech filtration by brute force, a multiplicative grid scan
// that rediscovers critical values from the intersection predicate alone, and
// validators for the covering and packing properties of the ordering.

#include "sparsekfold/sparse.hpp"

namespace skf {

struct OracleLimits {
    index_t max_vertices = 100000;
    index_t max_simplices = 2000000;
};

struct ExactSimplex {
    std::vector<lens_t> vertices;  // lenses over original input indices, sorted
    double radius = 0.0;           // exact critical radius

    int dim() const { return int(vertices.size()) - 1; }
};

struct ExactFiltration {
    index_t k = 0;
    std::vector<ExactSimplex> simplices;  // sorted by (radius, dim, vertices)
};

inline bool exact_order(const ExactSimplex& a, const ExactSimplex& b) {
    if (a.radius != b.radius) return a.radius < b.radius;
    if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
    return a.vertices < b.vertices;
}

namespace detail {

inline double union_meb_radius(const PointCloud& cloud, const std::vector<lens_t>& lenses, std::uint64_t seed) {
    thread_local std::vector<index_t> usites;
    usites.clear();
    for (const lens_t& A : lenses) usites.insert(usites.end(), A.begin(), A.end());
    std::sort(usites.begin(), usites.end());
    usites.erase(std::unique(usites.begin(), usites.end()), usites.end());
    if (usites.size() == 1) return 0.0;
    thread_local std::vector<double> buf;
    buf.resize(usites.size() * std::size_t(cloud.dim));
    for (std::size_t j = 0; j < usites.size(); ++j)
        std::copy(cloud.at(usites[j]), cloud.at(usites[j]) + cloud.dim, buf.begin() + j * std::size_t(cloud.dim));
    MebResult out;
    meb_points(buf.data(), index_t(usites.size()), cloud.dim, seed, tls_meb_scratch(), out);
    return out.radius;
}

} // namespace detail

// A set of lenses spans a simplex of the exact filtration at radius v iff the
// balls around all involved sites meet by then, i.e. the enclosing radius of
// the involved sites is at most v.
inline bool exact_contains(const PointCloud& cloud, const std::vector<lens_t>& lenses, double v,
                           std::uint64_t seed = kGeomSeed) {
    return leq_tol(detail::union_meb_radius(cloud, lenses, seed), v);
}

inline double exact_critical_radius(const PointCloud& cloud, const std::vector<lens_t>& lenses,
                                    std::uint64_t seed = kGeomSeed) {
    return detail::union_meb_radius(cloud, lenses, seed);
}

// Full enumeration of the exact k-th order Cech filtration up to dimension
// m_max, omitting simplices born after r_max. Guarded against combinatorial
// blow-up.
inline ExactFiltration exact_cech(const PointCloud& cloud, index_t k, int m_max, double r_max = kInf,
                                  const OracleLimits& limits = {}, std::uint64_t seed = kGeomSeed) {
    if (cloud.n < k || k < 1) throw std::invalid_argument("exact_cech: need 1 <= k <= n");
    if (m_max < 0) throw std::invalid_argument("exact_cech: m_max must be nonnegative");
    const index_t lens_count = binomial(cloud.n, k);
    if (lens_count > limits.max_vertices)
        throw resource_error("exact_cech: vertex guard exceeded (" + std::to_string(lens_count) + " lenses)");

    ExactFiltration out;
    out.k = k;

    std::vector<lens_t> lenses;
    {
        std::vector<index_t> pool(static_cast<std::size_t>(cloud.n));
        for (index_t i = 0; i < cloud.n; ++i) pool[std::size_t(i)] = i;
        detail::for_each_subset(pool, k, [&](const std::vector<index_t>& pick) {
            double r = detail::union_meb_radius(cloud, {pick}, mix_seed(seed, lens_hash(pick)));
            if (!leq_tol(r, r_max)) return;
            lenses.push_back(pick);
            out.simplices.push_back(ExactSimplex{{pick}, r});
        });
    }

    const index_t v = index_t(lenses.size());
    index_t planned = 0;
    for (int m = 1; m <= m_max; ++m) planned += binomial(v, index_t(m) + 1);
    if (planned > limits.max_simplices)
        throw resource_error("exact_cech: simplex guard exceeded (" + std::to_string(planned) + " candidates)");

    std::vector<index_t> ids(static_cast<std::size_t>(v));
    for (index_t i = 0; i < v; ++i) ids[std::size_t(i)] = i;
    for (int m = 1; m <= m_max; ++m) {
        detail::for_each_subset(ids, index_t(m) + 1, [&](const std::vector<index_t>& pick) {
            std::vector<lens_t> vs;
            vs.reserve(pick.size());
            std::uint64_t h = seed;
            for (index_t id : pick) {
                vs.push_back(lenses[std::size_t(id)]);
                h = mix_seed(h, lens_hash(lenses[std::size_t(id)]));
            }
            double r = detail::union_meb_radius(cloud, vs, h);
            if (!leq_tol(r, r_max)) return;
            out.simplices.push_back(ExactSimplex{std::move(vs), r});
        });
    }
    std::sort(out.simplices.begin(), out.simplices.end(), exact_order);
    return out;
}

// Reference critical value: scan a multiplicative sub-grid (resolution points
// per grid interval) up to the smallest removal radius, test the frozen
// lenses at each scale, and report the first grid power at or above the
// first hit. Independent of the three-case classification.
inline std::optional<long long> grid_scan_status(const std::vector<lens_t>& sigma, const SiteContext& ctx,
                                                 int resolution) {
    if (resolution < 8) throw std::invalid_argument("grid_scan_status: resolution must be at least 8");
    assert(sigma.size() >= 2);
    double Lambda = kInf;
    for (const lens_t& A : sigma) Lambda = std::min(Lambda, lens_freezing_radius(A, ctx.sched));
    const double one_plus = ctx.params.one_plus();
    double r_meb = detail::union_meb_radius(ctx.sites, sigma, mix_seed(ctx.params.seed, 0x5ca11ed));

    if (!std::isfinite(Lambda)) {
        // no lens ever freezes: plain enclosing radius decides
        return ceil_exponent(one_plus, r_meb);
    }
    const double omega = (1.0 + ctx.params.eps_prime) * Lambda;

    const auto sub_value = [&](long long t) {
        long long q = t >= 0 ? t / resolution : -((-t + resolution - 1) / resolution);
        long long rem = t - q * resolution;
        return grid_pow(one_plus, q) * std::pow(one_plus, double(rem) / double(resolution));
    };
    const double start = std::max(std::min(r_meb, omega) * (1.0 - 1e-9), 1e-300);
    long long t = (long long)(std::floor(double(resolution) * std::log(start) / std::log(one_plus))) - 2;
    while (sub_value(t + 1) < start) ++t;

    for (;; ++t) {
        double v = sub_value(t);
        if (v >= omega) break;
        if (cones_intersect_at(sigma, v, ctx)) return ceil_exponent(one_plus, v);
    }
    if (cones_intersect_at(sigma, omega, ctx)) return ceil_exponent(one_plus, omega);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Lemma validators.

struct LemmaReport {
    index_t checks = 0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline double kdist_within(const PointCloud& cloud, const std::vector<index_t>& members, index_t skip,
                           const double* x, index_t k) {
    thread_local std::vector<double> d2;
    d2.clear();
    for (index_t m : members) {
        if (m == skip) continue;
        d2.push_back(sqdist_flat(x, cloud.at(m), cloud.dim));
    }
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    return std::sqrt(d2[std::size_t(k - 1)]);
}

} // namespace detail

// Exhaustive check of the packing property: within every ordered prefix,
// every member keeps k-distance at least lambda_i / 2 to the rest.
inline LemmaReport validate_packing(const PointCloud& cloud, const KPermutation& perm) {
    LemmaReport rep;
    const index_t n = cloud.n, k = perm.k;
    std::vector<index_t> prefix;
    for (index_t i = 0; i < n; ++i) prefix.push_back(perm.order[std::size_t(i)]);
    for (index_t i = k + 1; i <= n; ++i) {
        const double lambda = perm.lambdas[std::size_t(i - 1)];
        if (!std::isfinite(lambda)) continue;
        std::vector<index_t> members(prefix.begin(), prefix.begin() + i);
        for (index_t a = 0; a < i; ++a) {
            ++rep.checks;
            double kd = detail::kdist_within(cloud, members, members[std::size_t(a)],
                                             cloud.at(members[std::size_t(a)]), k);
            if (kd < lambda / 2.0 * (1.0 - kRelTol) - kAbsTol)
                rep.violations.push_back("packing violated at prefix " + std::to_string(i) + ", member " +
                                         std::to_string(a) + ": " + std::to_string(kd) + " < " +
                                         std::to_string(lambda / 2.0));
        }
    }
    return rep;
}

// Sampled check of the covering property: witnesses certified inside the
// k-fold cover at scale r stay within r + lambda_{i+1} of every prefix cover.
inline LemmaReport validate_covering(const PointCloud& cloud, const KPermutation& perm, index_t trials,
                                     std::uint64_t seed = 0x10ad5eed) {
    LemmaReport rep;
    const index_t n = cloud.n, k = perm.k;
    if (n <= k) return rep;
    SplitMix64 g(seed);
    point_t lo(cloud.dim, kInf), hi(cloud.dim, -kInf);
    for (index_t i = 0; i < n; ++i)
        for (int c = 0; c < cloud.dim; ++c) {
            lo[c] = std::min(lo[c], cloud.at(i)[c]);
            hi[c] = std::max(hi[c], cloud.at(i)[c]);
        }
    double box = 0.0;
    for (int c = 0; c < cloud.dim; ++c) box = std::max(box, hi[c] - lo[c]);

    std::vector<index_t> all(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) all[std::size_t(i)] = i;
    point_t x(cloud.dim);
    for (index_t t = 0; t < trials; ++t) {
        if (g.next_double() < 0.5) {
            index_t s = index_t(g.next_below(std::uint64_t(n)));
            double scale = box * (0.01 + 0.5 * g.next_double());
            for (int c = 0; c < cloud.dim; ++c) x[c] = cloud.at(s)[c] + (g.next_double() * 2 - 1) * scale;
        } else {
            for (int c = 0; c < cloud.dim; ++c) x[c] = lo[c] + g.next_double() * (hi[c] - lo[c]);
        }
        const double kd_all = detail::kdist_within(cloud, all, -1, x.data(), k);
        const double r = kd_all * (1.0 + g.next_double());  // certifies x in the cover at scale r
        const index_t i = k + index_t(g.next_below(std::uint64_t(n - k)));  // prefix size in [k, n-1]
        std::vector<index_t> prefix;
        for (index_t j = 0; j < i; ++j) prefix.push_back(perm.order[std::size_t(j)]);
        const double lhs = detail::kdist_within(cloud, prefix, -1, x.data(), k);
        const double bound = r + perm.lambdas[std::size_t(i)];
        ++rep.checks;
        if (lhs > bound * (1.0 + kRelTol) + kAbsTol)
            rep.violations.push_back("covering violated at prefix " + std::to_string(i) + ": " + std::to_string(lhs) +
                                     " > " + std::to_string(bound));
    }
    return rep;
}

} // namespace skf

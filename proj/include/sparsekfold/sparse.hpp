#pragma once

// Construction of the discrete sparse k-th order Cech filtration: freezing
// and removal radii drive which lenses survive, friends bound the candidate
// sites per pass, and each candidate simplex is classified by the three-case
// critical-value computation over frozen lenses.

#include <atomic>
#include <cstring>
#include <map>
#include <span>
#include <thread>

#include "sparsekfold/filtration.hpp"
#include "sparsekfold/geometry.hpp"
#include "sparsekfold/range_index.hpp"

namespace skf {

inline std::uint64_t lens_hash(const lens_t& A) {
    std::uint64_t h = 1469598103934665603ULL;
    for (index_t s : A) {
        h ^= std::uint64_t(s) + 0x9e3779b97f4a7c15ULL;
        h *= 1099511628211ULL;
    }
    return h;
}

// min over the lens's sites of the per-site freezing radius; infinite only
// for the lens drawn entirely from the first k sites
inline double lens_freezing_radius(const lens_t& A, const SiteSchedule& sched) {
    double m = kInf;
    for (index_t s : A) m = std::min(m, sched.crit[std::size_t(s)]);
    return m;
}

// Radius of the frozen lens at scale r: grows until the freezing radius,
// stays frozen until the removal radius, then disappears (nullopt).
inline std::optional<double> frozen_radius_at(double crit, double eps_prime, double r) {
    if (r < crit) return r;  // covers the infinite sentinel: never frozen
    if (r <= (1.0 + eps_prime) * crit) return crit;
    return std::nullopt;
}

inline std::optional<double> frozen_radius_at(const lens_t& A, double r, const SiteContext& ctx) {
    return frozen_radius_at(lens_freezing_radius(A, ctx.sched), ctx.params.eps_prime, r);
}

// All sites preceding site i within twice its removal radius. The index is
// queried at 2*omega_i and false friends are filtered by exact distance.
inline std::vector<index_t> friends(index_t i, const SiteContext& ctx, const RangeIndex& index) {
    const double w = ctx.sched.omega[std::size_t(i)];
    std::vector<index_t> out;
    if (!std::isfinite(w)) {
        for (index_t j = 0; j < i; ++j) out.push_back(j);
        return out;
    }
    std::vector<index_t> raw = index.query(ctx.sites.point(i), 2.0 * w);
    const double lim2 = 4.0 * w * w;
    for (index_t j : raw) {
        if (j >= i) continue;
        if (detail::sqdist_flat(ctx.sites.at(j), ctx.sites.at(i), ctx.sites.dim) <= lim2) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline MebScratch& tls_meb_scratch() {
    thread_local MebScratch s;
    return s;
}

inline double lens_meb_radius(const lens_t& A, const SiteContext& ctx, std::uint64_t seed) {
    if (A.size() == 1) return 0.0;
    thread_local std::vector<double> buf;
    const int dim = ctx.sites.dim;
    buf.resize(A.size() * std::size_t(dim));
    for (std::size_t j = 0; j < A.size(); ++j)
        std::copy(ctx.sites.at(A[j]), ctx.sites.at(A[j]) + dim, buf.begin() + j * std::size_t(dim));
    MebResult out;
    meb_points(buf.data(), index_t(A.size()), dim, seed, tls_meb_scratch(), out);
    return out.radius;
}

struct LensView {
    const index_t* sites;
    index_t count;
    double crit;
};

inline bool cones_core(std::span<const LensView> lenses, double r, const SiteContext& ctx, std::uint64_t seed) {
    std::vector<Ball> balls;
    for (const LensView& lv : lenses) {
        std::optional<double> fr = frozen_radius_at(lv.crit, ctx.params.eps_prime, r);
        if (!fr) throw std::logic_error("cones_intersect_at: lens already removed at the query radius");
        for (index_t j = 0; j < lv.count; ++j) balls.push_back(Ball{ctx.sites.point(lv.sites[std::size_t(j)]), *fr});
    }
    return balls_have_common_point(balls, seed);
}

// Three-case classification of a candidate simplex from the radius of the
// minimum enclosing ball of its involved sites and the smallest lens
// freezing radius. Returns the critical grid exponent, or nullopt.
inline std::optional<long long> status_core(std::span<const LensView> lenses, std::span<const index_t> usites,
                                            const SiteContext& ctx, std::uint64_t seed, double* r_meb_out = nullptr) {
    const int dim = ctx.sites.dim;
    thread_local std::vector<double> buf;
    buf.resize(usites.size() * std::size_t(dim));
    for (std::size_t j = 0; j < usites.size(); ++j)
        std::copy(ctx.sites.at(usites[j]), ctx.sites.at(usites[j]) + dim, buf.begin() + j * std::size_t(dim));
    MebResult meb;
    meb_points(buf.data(), index_t(usites.size()), dim, mix_seed(seed, 0xABCD), tls_meb_scratch(), meb);
    const double r_meb = meb.radius;
    if (r_meb_out) *r_meb_out = r_meb;

    double Lambda = kInf;
    for (const LensView& lv : lenses) Lambda = std::min(Lambda, lv.crit);

    if (leq_tol(r_meb, Lambda)) return ceil_exponent(ctx.params.one_plus(), r_meb);
    const double omega = (1.0 + ctx.params.eps_prime) * Lambda;
    if (!leq_tol(r_meb, omega)) return std::nullopt;
    if (!cones_core(lenses, omega, ctx, mix_seed(seed, 1))) return std::nullopt;
    const long long z = ceil_exponent(ctx.params.one_plus(), omega);
    const double below = grid_pow(ctx.params.one_plus(), z - 1);
    if (cones_core(lenses, below, ctx, mix_seed(seed, 2))) return z - 1;
    return z;
}

} // namespace detail

// Non-empty-cone test for a single lens capped at `cap`: present iff the
// enclosing radius of its sites is at most the cap. Returns the grid exponent
// of the birth value (kZeroRadiusExponent for single-site lenses).
inline std::optional<long long> vertex_check(const lens_t& A, double cap, const SiteContext& ctx,
                                             double* alpha_out = nullptr) {
    const double alpha = detail::lens_meb_radius(A, ctx, mix_seed(ctx.params.seed, lens_hash(A)));
    if (alpha_out) *alpha_out = alpha;
    if (!leq_tol(alpha, cap)) return std::nullopt;
    if (alpha <= kAbsTol) return kZeroRadiusExponent;
    return ceil_exponent(ctx.params.one_plus(), alpha);
}

// Do the frozen lenses of sigma have a common point at radius r? One ball per
// involved site, radius given by the lens's frozen radius at r.
inline bool cones_intersect_at(const std::vector<lens_t>& sigma, double r, const SiteContext& ctx) {
    std::vector<detail::LensView> views;
    views.reserve(sigma.size());
    std::uint64_t h = ctx.params.seed;
    for (const lens_t& A : sigma) {
        views.push_back(detail::LensView{A.data(), index_t(A.size()), lens_freezing_radius(A, ctx.sched)});
        h = mix_seed(h, lens_hash(A));
    }
    std::uint64_t rbits;
    std::memcpy(&rbits, &r, sizeof rbits);
    return detail::cones_core(views, r, ctx, mix_seed(h, rbits));
}

// Critical grid exponent of a candidate simplex (set of at least two lens
// vertices), or nullopt when its cones never meet.
inline std::optional<long long> simplex_status(const std::vector<lens_t>& sigma, const SiteContext& ctx) {
    assert(sigma.size() >= 2);
    std::vector<detail::LensView> views;
    views.reserve(sigma.size());
    std::vector<index_t> usites;
    std::uint64_t h = ctx.params.seed;
    for (const lens_t& A : sigma) {
        views.push_back(detail::LensView{A.data(), index_t(A.size()), lens_freezing_radius(A, ctx.sched)});
        usites.insert(usites.end(), A.begin(), A.end());
        h = mix_seed(h, lens_hash(A));
    }
    std::sort(usites.begin(), usites.end());
    usites.erase(std::unique(usites.begin(), usites.end()), usites.end());
    return detail::status_core(views, usites, ctx, h);
}

// Per-site packing bound on candidate sites and the size bound it implies.
inline double gamma_bound(index_t k, double epsilon, double delta) {
    return double(k) * std::pow(96.0 / epsilon, delta);
}

inline double size_bound(index_t n, index_t k, double epsilon, double delta, index_t m) {
    return double(n) * std::pow(gamma_bound(k, epsilon, delta), double(k) * double(m));
}

struct BuildOptions {
    index_t max_simplices = 2000000;
    index_t max_enumerations_per_site = 2000000;
    int threads = 0;  // 0: hardware concurrency
};

namespace detail {

struct Candidate {
    lens_t sites;
    double alpha = 0.0;
    double crit = kInf;
};

struct PerSiteOutput {
    std::vector<FilteredSimplex> simplices;
    std::vector<index_t> dim_counts;
    double min_positive_alpha = kInf;
    index_t enumerations = 0;
};

template <class Fn>
inline void for_each_subset(const std::vector<index_t>& pool, index_t choose, Fn&& fn) {
    if (choose == 0 || choose > index_t(pool.size())) return;
    std::vector<index_t> pick(static_cast<std::size_t>(choose));
    const index_t n = index_t(pool.size());
    std::vector<index_t> c(static_cast<std::size_t>(choose));
    for (index_t j = 0; j < choose; ++j) c[std::size_t(j)] = j;
    for (;;) {
        for (index_t j = 0; j < choose; ++j) pick[std::size_t(j)] = pool[std::size_t(c[std::size_t(j)])];
        fn(pick);
        index_t j = choose - 1;
        while (j >= 0 && c[std::size_t(j)] == n - choose + j) --j;
        if (j < 0) break;
        ++c[std::size_t(j)];
        for (index_t t = j + 1; t < choose; ++t) c[std::size_t(t)] = c[std::size_t(t) - 1] + 1;
    }
}

inline void emit(PerSiteOutput& res, std::vector<lens_t> vertices, long long z, const BuildOptions& opts) {
    std::sort(vertices.begin(), vertices.end());
    FilteredSimplex fs;
    fs.vertices = std::move(vertices);
    fs.z = z;
    res.simplices.push_back(std::move(fs));
    if (index_t(res.simplices.size()) > opts.max_simplices)
        throw resource_error("sparse filtration: simplex limit exceeded for one site");
}

// All simplices associated to site i: lenses over friends(i) + {i} that
// contain i as vertices, then cofacet expansion by dimension over the
// candidate vertex table.
inline PerSiteOutput process_site(index_t i, const std::vector<index_t>& frs, const SiteContext& ctx,
                                  const BuildOptions& opts) {
    const index_t k = ctx.params.k;
    const double crit_i = ctx.sched.crit[std::size_t(i)];
    const double omega_i = ctx.sched.omega[std::size_t(i)];
    const int dim = ctx.sites.dim;

    PerSiteOutput res;
    res.dim_counts.assign(std::size_t(ctx.params.m_max) + 1, 0);

    index_t planned = binomial(index_t(frs.size()) + 1, k);
    if (planned > opts.max_enumerations_per_site)
        throw resource_error("sparse filtration: per-site lens enumeration limit exceeded (site rank " +
                             std::to_string(i + 1) + ", " + std::to_string(planned) + " k-subsets)");

    std::vector<Candidate> cands;
    const auto consider = [&](const std::vector<index_t>& sites, bool contains_i) {
        ++res.enumerations;
        lens_t lens(sites);
        if (contains_i) lens.push_back(i);
        const double crit_lens = ctx.sched.crit[std::size_t(lens.back())];
        const double cap = contains_i ? crit_i : std::min(crit_lens, omega_i);
        const double alpha = lens_meb_radius(lens, ctx, mix_seed(ctx.params.seed, lens_hash(lens)));
        if (alpha > kAbsTol) res.min_positive_alpha = std::min(res.min_positive_alpha, alpha);
        if (!leq_tol(alpha, cap)) return;
        if (contains_i) {
            long long z = alpha <= kAbsTol ? kZeroRadiusExponent : ceil_exponent(ctx.params.one_plus(), alpha);
            emit(res, {lens}, z, opts);
            ++res.dim_counts[0];
        }
        cands.push_back(Candidate{std::move(lens), alpha, crit_lens});
    };

    // lenses containing site i first: their table slots seed the expansion
    if (k == 1) {
        consider({}, true);
    } else {
        for_each_subset(frs, k - 1, [&](const std::vector<index_t>& pick) { consider(pick, true); });
    }
    const index_t n_with_i = index_t(cands.size());
    for_each_subset(frs, k, [&](const std::vector<index_t>& pick) { consider(pick, false); });

    if (ctx.params.m_max == 0 || n_with_i == 0) return res;

    struct Node {
        std::vector<index_t> ids;
        std::vector<index_t> usites;
    };
    std::vector<Node> frontier, next;
    for (index_t c = 0; c < n_with_i; ++c) frontier.push_back(Node{{c}, cands[std::size_t(c)].sites});

    const double reject = 2.0 * omega_i * (1.0 + 1e-6) + 2e-9;
    const double reject2 = reject * reject;
    std::vector<index_t> merged;
    std::vector<LensView> views;

    for (int m = 1; m <= ctx.params.m_max && !frontier.empty(); ++m) {
        next.clear();
        for (const Node& node : frontier) {
            for (index_t w = node.ids.back() + 1; w < index_t(cands.size()); ++w) {
                const Candidate& cw = cands[std::size_t(w)];
                // cross-distance reject: beyond it the enclosing radius
                // certainly exceeds the removal radius
                bool far = false;
                for (index_t a : node.usites) {
                    const double* pa = ctx.sites.at(a);
                    for (index_t b : cw.sites) {
                        if (sqdist_flat(pa, ctx.sites.at(b), dim) > reject2) {
                            far = true;
                            break;
                        }
                    }
                    if (far) break;
                }
                if (far) continue;

                merged.resize(node.usites.size() + cw.sites.size());
                merged.erase(std::set_union(node.usites.begin(), node.usites.end(), cw.sites.begin(), cw.sites.end(),
                                            merged.begin()),
                             merged.end());

                views.clear();
                std::uint64_t h = ctx.params.seed;
                for (index_t id : node.ids) {
                    const Candidate& c = cands[std::size_t(id)];
                    views.push_back(LensView{c.sites.data(), index_t(c.sites.size()), c.crit});
                    h = mix_seed(h, lens_hash(c.sites));
                }
                views.push_back(LensView{cw.sites.data(), index_t(cw.sites.size()), cw.crit});
                h = mix_seed(h, lens_hash(cw.sites));

                double r_meb = 0.0;
                std::optional<long long> z = status_core(views, merged, ctx, h, &r_meb);
                if (r_meb > kAbsTol) res.min_positive_alpha = std::min(res.min_positive_alpha, r_meb);
                if (!z) continue;

                Node child;
                child.ids = node.ids;
                child.ids.push_back(w);
                child.usites = merged;
                std::vector<lens_t> vs;
                vs.reserve(child.ids.size());
                for (index_t id : child.ids) vs.push_back(cands[std::size_t(id)].sites);
                emit(res, std::move(vs), *z, opts);
                ++res.dim_counts[std::size_t(m)];
                next.push_back(std::move(child));
            }
        }
        frontier.swap(next);
    }
    return res;
}

} // namespace detail

// Full construction: order the sites, derive the schedule, then emit the
// simplices associated to each site (a closing pass adds the lens drawn from
// the first k sites, whose freezing radius is infinite).
inline SparseFiltration build_filtration(const PointCloud& cloud, const Params& params,
                                         const BuildOptions& opts = {}) {
    if (cloud.n < params.k) throw std::invalid_argument("build_filtration: need at least k sites");
    SiteContext ctx = make_context(cloud, params);
    const index_t n = cloud.n;
    const index_t k = params.k;

    SparseFiltration out;
    out.params = params;
    out.perm = ctx.perm;
    out.lambdas = ctx.sched.lambda;
    out.stats.per_site_dim_counts.assign(std::size_t(n), {});

    // friends need the incremental index of predecessors; this pass is
    // inherently sequential
    std::vector<std::vector<index_t>> site_friends(static_cast<std::size_t>(n));
    {
        RangeIndex index(cloud.dim);
        for (index_t i = 0; i < n; ++i) {
            if (i >= k) site_friends[std::size_t(i)] = friends(i, ctx, index);
            index.insert(i, ctx.sites.at(i));
        }
    }

    // per-site generation is independent given the shared read-only context
    std::vector<detail::PerSiteOutput> results(static_cast<std::size_t>(n));
    {
        unsigned hw = std::thread::hardware_concurrency();
        int threads = opts.threads > 0 ? opts.threads : int(hw ? hw : 1);
        threads = int(std::min<index_t>(threads, std::max<index_t>(1, n - k)));
        std::atomic<index_t> cursor(k);
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        const auto worker = [&](int t) {
            try {
                for (;;) {
                    index_t i = cursor.fetch_add(1);
                    if (i >= n) break;
                    results[std::size_t(i)] = detail::process_site(i, site_friends[std::size_t(i)], ctx, opts);
                }
            } catch (...) {
                errors[std::size_t(t)] = std::current_exception();
            }
        };
        if (threads <= 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // closing pass: the single lens over the first k sites
    double closing_alpha = 0.0;
    long long closing_z = kZeroRadiusExponent;
    {
        lens_t first(static_cast<std::size_t>(k));
        for (index_t j = 0; j < k; ++j) first[std::size_t(j)] = j;
        std::optional<long long> z = vertex_check(first, kInf, ctx, &closing_alpha);
        closing_z = *z;  // cap is infinite, always present
    }

    double min_alpha = closing_alpha > kAbsTol ? closing_alpha : kInf;
    long long min_finite = std::numeric_limits<long long>::max();
    index_t total = 1;
    for (index_t i = k; i < n; ++i) {
        const detail::PerSiteOutput& r = results[std::size_t(i)];
        total += index_t(r.simplices.size());
        min_alpha = std::min(min_alpha, r.min_positive_alpha);
        out.stats.candidate_enumerations += r.enumerations;
        for (const FilteredSimplex& fs : r.simplices)
            if (fs.z != kZeroRadiusExponent) min_finite = std::min(min_finite, fs.z);
    }
    if (closing_z != kZeroRadiusExponent) min_finite = std::min(min_finite, closing_z);
    if (total > opts.max_simplices) throw resource_error("sparse filtration: simplex limit exceeded");

    if (min_finite == std::numeric_limits<long long>::max())
        out.min_exponent = std::isfinite(min_alpha) ? ceil_exponent(params.one_plus(), min_alpha) : 0;
    else
        out.min_exponent = min_finite;
    out.stats.min_positive_alpha = min_alpha;

    out.simplices.reserve(static_cast<std::size_t>(total));
    const auto finalize = [&](FilteredSimplex fs) {
        if (fs.z == kZeroRadiusExponent) {
            fs.z = out.min_exponent;
            out.has_zero_alpha = true;
        }
        fs.value = grid_pow(params.one_plus(), fs.z);
        out.simplices.push_back(std::move(fs));
    };
    {
        FilteredSimplex closing;
        lens_t first(static_cast<std::size_t>(k));
        for (index_t j = 0; j < k; ++j) first[std::size_t(j)] = j;
        closing.vertices = {first};
        closing.z = closing_z;
        finalize(std::move(closing));
        if (k - 1 >= 0 && !out.stats.per_site_dim_counts.empty()) {
            auto& counts = out.stats.per_site_dim_counts[std::size_t(k - 1)];
            counts.assign(std::size_t(params.m_max) + 1, 0);
            counts[0] = 1;
        }
    }
    for (index_t i = k; i < n; ++i) {
        detail::PerSiteOutput& r = results[std::size_t(i)];
        out.stats.per_site_dim_counts[std::size_t(i)] = r.dim_counts;
        for (FilteredSimplex& fs : r.simplices) finalize(std::move(fs));
        r.simplices.clear();
        r.simplices.shrink_to_fit();
    }

    std::sort(out.simplices.begin(), out.simplices.end(), filtration_order);
    for (std::size_t j = 1; j < out.simplices.size(); ++j)
        if (out.simplices[j].vertices == out.simplices[j - 1].vertices)
            throw std::logic_error("sparse filtration: duplicate simplex emitted");
    return out;
}

// Structural checks over a built filtration: sorted order, face closure with
// monotone exponents, the lower bound on the output size, and the
// association bound on involved sites. Throws verification_error.
inline void check_filtration_consistency(const SparseFiltration& f, const PointCloud& cloud) {
    const index_t n = index_t(f.perm.size());
    if (index_t(f.simplices.size()) < n - f.params.k)
        throw verification_error("filtration: fewer simplices than sites minus k");
    SiteContext ctx;
    ctx.params = f.params;
    ctx.perm = f.perm;
    ctx.sites.n = cloud.n;
    ctx.sites.dim = cloud.dim;
    ctx.sites.coords.resize(cloud.coords.size());
    for (index_t r = 0; r < cloud.n; ++r) {
        const double* src = cloud.at(f.perm[std::size_t(r)]);
        std::copy(src, src + cloud.dim, ctx.sites.coords.begin() + std::size_t(r) * cloud.dim);
    }
    ctx.sched = make_schedule(f.lambdas, f.params);

    std::map<std::vector<lens_t>, long long> zmap;
    for (std::size_t j = 0; j < f.simplices.size(); ++j) {
        const FilteredSimplex& fs = f.simplices[j];
        if (j > 0 && filtration_order(fs, f.simplices[j - 1]))
            throw verification_error("filtration: not sorted");
        if (fs.value != grid_pow(f.params.one_plus(), fs.z))
            throw verification_error("filtration: value does not match exponent");
        if (!std::is_sorted(fs.vertices.begin(), fs.vertices.end()))
            throw verification_error("filtration: simplex vertices not canonical");
        zmap[fs.vertices] = fs.z;
        // association bound
        index_t hi = 0;
        for (const lens_t& A : fs.vertices)
            for (index_t s : A) hi = std::max(hi, s);
        const double w = ctx.sched.omega[std::size_t(hi)];
        if (std::isfinite(w)) {
            for (const lens_t& A : fs.vertices)
                for (index_t s : A) {
                    double d = detail::dist_flat(ctx.sites.at(s), ctx.sites.at(hi), ctx.sites.dim);
                    if (!leq_tol(d, 2.0 * w))
                        throw verification_error("filtration: involved site outside the association ball");
                }
        }
    }
    for (const FilteredSimplex& fs : f.simplices) {
        if (fs.vertices.size() == 1) continue;
        for (std::size_t drop = 0; drop < fs.vertices.size(); ++drop) {
            std::vector<lens_t> facet;
            for (std::size_t t = 0; t < fs.vertices.size(); ++t)
                if (t != drop) facet.push_back(fs.vertices[t]);
            auto it = zmap.find(facet);
            if (it == zmap.end()) throw verification_error("filtration: missing facet");
            if (it->second > fs.z) throw verification_error("filtration: facet enters after its coface");
        }
    }
}

} // namespace skf

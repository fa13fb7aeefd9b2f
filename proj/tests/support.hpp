#pragma once

// Test-only helpers: instance generators and independent oracles. Everything
// here is deliberately written against the definitions, not against the
// library code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sparsekfold/core.hpp"
#include "sparsekfold/geometry.hpp"

namespace testsupport {

using skf::index_t;
using skf::point_t;

inline std::vector<point_t> random_points(index_t n, int dim, std::uint64_t seed, double scale = 1.0) {
    skf::SplitMix64 g(seed);
    std::vector<point_t> pts;
    pts.reserve(static_cast<std::size_t>(n));
    while (index_t(pts.size()) < n) {
        point_t p(dim);
        for (int c = 0; c < dim; ++c) p[c] = (g.next_double() * 2.0 - 1.0) * scale;
        bool dup = false;
        for (const point_t& q : pts)
            if (q == p) dup = true;
        if (!dup) pts.push_back(std::move(p));
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Brute-force smallest enclosing ball of points: enumerate every support
// subset of size <= d+1, compute the smallest ball with that subset on its
// boundary (center in the subset's affine hull), keep the smallest candidate
// that encloses all points.

namespace bruteimpl {

inline bool gauss(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int c = 0; c < n; ++c) {
        int best = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(A[std::size_t(r) * n + c]) > std::fabs(A[std::size_t(best) * n + c])) best = r;
        if (std::fabs(A[std::size_t(best) * n + c]) < 1e-12) return false;
        if (best != c) {
            for (int j = 0; j < n; ++j) std::swap(A[std::size_t(best) * n + j], A[std::size_t(c) * n + j]);
            std::swap(b[best], b[c]);
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = A[std::size_t(r) * n + c] / A[std::size_t(c) * n + c];
            for (int j = 0; j < n; ++j) A[std::size_t(r) * n + j] -= f * A[std::size_t(c) * n + j];
            b[r] -= f * b[c];
        }
    }
    for (int c = 0; c < n; ++c) b[c] /= A[std::size_t(c) * n + c];
    return true;
}

inline bool circumball(const std::vector<point_t>& pts, const std::vector<int>& sub, point_t& center, double& radius) {
    const int dim = int(pts[0].size());
    const int m = int(sub.size());
    const point_t& x0 = pts[std::size_t(sub[0])];
    if (m == 1) {
        center = x0;
        radius = 0.0;
        return true;
    }
    const int q = m - 1;
    std::vector<double> A(std::size_t(q) * q), b(q);
    for (int i = 0; i < q; ++i) {
        const point_t& xi = pts[std::size_t(sub[std::size_t(i) + 1])];
        for (int j = 0; j < q; ++j) {
            const point_t& xj = pts[std::size_t(sub[std::size_t(j) + 1])];
            double gsum = 0.0;
            for (int c = 0; c < dim; ++c) gsum += (xi[c] - x0[c]) * (xj[c] - x0[c]);
            A[std::size_t(i) * q + j] = 2.0 * gsum;
        }
        b[i] = skf::squared_distance(xi, x0);
    }
    if (!gauss(A, b, q)) return false;
    center = x0;
    for (int j = 0; j < q; ++j) {
        const point_t& xj = pts[std::size_t(sub[std::size_t(j) + 1])];
        for (int c = 0; c < dim; ++c) center[c] += b[j] * (xj[c] - x0[c]);
    }
    radius = 0.0;
    for (int i = 0; i < m; ++i)
        radius = std::max(radius, skf::distance(center, pts[std::size_t(sub[std::size_t(i)])]));
    return true;
}

} // namespace bruteimpl

inline double brute_force_meb_radius(const std::vector<point_t>& pts) {
    const int dim = int(pts[0].size());
    const int n = int(pts.size());
    double best = skf::kInf;
    std::vector<int> sub;
    const std::function<void(int, int)> rec = [&](int start, int want) {
        if (want == 0) {
            point_t c;
            double r;
            if (!bruteimpl::circumball(pts, sub, c, r)) return;
            for (const point_t& p : pts)
                if (skf::distance(c, p) > r * (1.0 + 1e-10) + 1e-14) return;
            best = std::min(best, r);
            return;
        }
        for (int i = start; i + want <= n; ++i) {
            sub.push_back(i);
            rec(i + 1, want - 1);
            sub.pop_back();
        }
    };
    for (int sz = 1; sz <= std::min(dim + 1, n); ++sz) rec(0, sz);
    return best;
}

// Smallest enclosing ball of two balls along the line through their centers.
inline skf::Ball two_balls_meb_oracle(const skf::Ball& a, const skf::Ball& b) {
    const int dim = int(a.center.size());
    double d = skf::distance(a.center, b.center);
    if (d + a.radius <= b.radius) return b;
    if (d + b.radius <= a.radius) return a;
    double R = 0.5 * (d + a.radius + b.radius);
    skf::Ball out;
    out.center.resize(dim);
    double t = d > 0 ? (R - a.radius) / d : 0.0;
    for (int c = 0; c < dim; ++c) out.center[c] = a.center[c] + t * (b.center[c] - a.center[c]);
    out.radius = R;
    return out;
}

// ---------------------------------------------------------------------------
// Dense-grid membership oracle for ball intersection. Samples the bounding
// cube of the smallest input ball; the depth function min_j (r_j - |x - x_j|)
// is 1-Lipschitz, which turns the grid into a certificate either way.

enum class McVerdict { True, False, Undecided };

struct McResult {
    McVerdict verdict = McVerdict::Undecided;
    double best_depth = -skf::kInf;  // max sampled depth (the spec's margin at the best candidate)
    double cover_radius = 0.0;
};

inline McResult mc_balls_intersect(const std::vector<skf::Ball>& balls, int grid, double margin) {
    const int dim = int(balls[0].center.size());
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < balls.size(); ++j)
        if (balls[j].radius < balls[jmin].radius) jmin = j;
    const point_t& c0 = balls[jmin].center;
    const double r0 = balls[jmin].radius;

    McResult res;
    const double cell = (grid > 1) ? 2.0 * r0 / (grid - 1) : 0.0;
    res.cover_radius = 0.5 * cell * std::sqrt(double(dim));

    std::vector<int> it(dim, 0);
    point_t x(dim);
    bool done = false;
    while (!done) {
        for (int c = 0; c < dim; ++c) x[c] = c0[c] - r0 + it[c] * cell;
        double depth = skf::kInf;
        for (const skf::Ball& b : balls)
            depth = std::min(depth, b.radius - skf::distance(x, b.center));
        res.best_depth = std::max(res.best_depth, depth);
        int c = 0;
        for (; c < dim; ++c) {
            if (++it[c] < grid) break;
            it[c] = 0;
        }
        done = (c == dim);
        if (grid <= 1) break;
    }
    if (res.best_depth >= margin)
        res.verdict = McVerdict::True;
    else if (res.best_depth + res.cover_radius <= -margin)
        res.verdict = McVerdict::False;
    return res;
}

} // namespace testsupport

#pragma once

// Euclidean predicates: smallest enclosing balls of points and of balls, and
// the common-intersection test for a family of closed balls.

#include <cassert>
#include <cstring>
#include <functional>
#include <optional>
#include <span>

#include "sparsekfold/core.hpp"

namespace skf {

using point_t = std::vector<double>;

struct Ball {
    point_t center;
    double radius = 0.0;
};

struct MebResult {
    point_t center;
    double radius = 0.0;
    std::vector<index_t> support;
};

inline constexpr std::uint64_t kGeomSeed = 0x51f0a7d1u;

namespace detail {

inline double sqdist_flat(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist_flat(const double* a, const double* b, int dim) {
    return std::sqrt(sqdist_flat(a, b, dim));
}

// Gauss-Jordan reduction of A (rows x cols, row-major) with right-hand side b.
// Tiny pivots count as zero. Returns the pivot columns.
inline std::vector<int> echelon(std::vector<double>& A, std::vector<double>& b, int rows, int cols) {
    double scale = 0.0;
    for (double v : A) scale = std::max(scale, std::fabs(v));
    const double eps = std::max(1e-13 * scale, 1e-290);
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int best = -1;
        double bestv = eps;
        for (int i = r; i < rows; ++i) {
            double v = std::fabs(A[std::size_t(i) * cols + c]);
            if (v > bestv) {
                bestv = v;
                best = i;
            }
        }
        if (best < 0) continue;
        if (best != r) {
            for (int j = 0; j < cols; ++j) std::swap(A[std::size_t(best) * cols + j], A[std::size_t(r) * cols + j]);
            std::swap(b[best], b[r]);
        }
        const double p = A[std::size_t(r) * cols + c];
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            double f = A[std::size_t(i) * cols + c] / p;
            if (f == 0.0) continue;
            for (int j = c; j < cols; ++j) A[std::size_t(i) * cols + j] -= f * A[std::size_t(r) * cols + j];
            A[std::size_t(i) * cols + c] = 0.0;
            b[i] -= f * b[r];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

struct AffineSolution {
    bool consistent = false;
    std::vector<double> particular;             // length cols; free variables at zero
    std::vector<std::vector<double>> kernel;    // null-space basis of A
};

inline AffineSolution solve_affine(std::vector<double> A, std::vector<double> b, int rows, int cols) {
    double bscale = 0.0;
    for (double v : b) bscale = std::max(bscale, std::fabs(v));
    for (double v : A) bscale = std::max(bscale, std::fabs(v));
    AffineSolution out;
    std::vector<int> pivots = echelon(A, b, rows, cols);
    const int rank = int(pivots.size());
    for (int i = rank; i < rows; ++i)
        if (std::fabs(b[i]) > std::max(1e-9 * bscale, 1e-12)) return out;
    out.consistent = true;
    out.particular.assign(cols, 0.0);
    for (int r = 0; r < rank; ++r) out.particular[pivots[r]] = b[r] / A[std::size_t(r) * cols + pivots[r]];
    std::vector<char> is_pivot(cols, 0);
    for (int c : pivots) is_pivot[c] = 1;
    for (int f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<double> v(cols, 0.0);
        v[f] = 1.0;
        for (int r = 0; r < rank; ++r)
            v[pivots[r]] = -A[std::size_t(r) * cols + f] / A[std::size_t(r) * cols + pivots[r]];
        out.kernel.push_back(std::move(v));
    }
    return out;
}

// Solve the square system M x = rhs; false on (near-)singular M.
inline bool solve_square(std::vector<double> M, std::vector<double> rhs, int n, std::vector<double>& x) {
    std::vector<int> pivots = echelon(M, rhs, n, n);
    if (int(pivots.size()) != n) return false;
    x.assign(n, 0.0);
    for (int r = 0; r < n; ++r) x[pivots[r]] = rhs[r] / M[std::size_t(r) * n + pivots[r]];
    return true;
}

// ---------------------------------------------------------------------------
// Smallest enclosing ball of points: Welzl's move-to-front algorithm with the
// circumscribed ball of the support solved through its Gram system.

struct MebScratch {
    std::vector<index_t> order;
    std::vector<index_t> support;
    std::vector<double> mat, rhs, coef, center, tmp;
};

struct PointsWelzl {
    const double* pts;
    int dim;
    MebScratch& s;
    double radius = -1.0;  // negative: empty ball

    const double* at(index_t i) const { return pts + std::size_t(i) * dim; }

    void support_ball() {
        const int m = int(s.support.size());
        if (m == 0) {
            std::fill(s.center.begin(), s.center.end(), 0.0);
            radius = -1.0;
            return;
        }
        const double* x0 = at(s.support[0]);
        if (m == 1) {
            std::copy(x0, x0 + dim, s.center.begin());
            radius = 0.0;
            return;
        }
        const int q = m - 1;
        s.mat.assign(std::size_t(q) * q, 0.0);
        s.rhs.assign(q, 0.0);
        for (int i = 0; i < q; ++i) {
            const double* xi = at(s.support[i + 1]);
            for (int j = 0; j < q; ++j) {
                const double* xj = at(s.support[j + 1]);
                double g = 0.0;
                for (int c = 0; c < dim; ++c) g += (xi[c] - x0[c]) * (xj[c] - x0[c]);
                s.mat[std::size_t(i) * q + j] = 2.0 * g;
            }
            s.rhs[i] = sqdist_flat(xi, x0, dim);
        }
        // rank-deficient supports fall back to the solvable part; the caller
        // re-checks containment as the recursion unwinds
        {
            std::vector<int> pivots = echelon(s.mat, s.rhs, q, q);
            s.coef.assign(q, 0.0);
            for (std::size_t r = 0; r < pivots.size(); ++r)
                s.coef[pivots[r]] = s.rhs[r] / s.mat[r * q + pivots[r]];
        }
        std::copy(x0, x0 + dim, s.center.begin());
        for (int j = 0; j < q; ++j) {
            const double* xj = at(s.support[j + 1]);
            for (int c = 0; c < dim; ++c) s.center[c] += s.coef[j] * (xj[c] - x0[c]);
        }
        radius = 0.0;
        for (int i = 0; i < m; ++i)
            radius = std::max(radius, dist_flat(s.center.data(), at(s.support[i]), dim));
    }

    bool outside(index_t i) const {
        if (radius < 0.0) return true;
        double d2 = sqdist_flat(s.center.data(), at(i), dim);
        return d2 > radius * radius * (1.0 + 4e-13);
    }

    void run(index_t end) {
        support_ball();
        if (int(s.support.size()) == dim + 1) return;
        for (index_t i = 0; i < end; ++i) {
            if (outside(s.order[i])) {
                s.support.push_back(s.order[i]);
                run(i);  // leaves center/radius enclosing order[0..i) with the new support point tangent
                s.support.pop_back();
                std::rotate(s.order.begin(), s.order.begin() + i, s.order.begin() + i + 1);
            }
        }
    }
};

// Non-recursive contract: compute into `out`. `pts` is row-major n x dim.
inline void meb_points(const double* pts, index_t n, int dim, std::uint64_t seed, MebScratch& s, MebResult& out) {
    assert(n > 0 && dim > 0);
    s.order.resize(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) s.order[std::size_t(i)] = i;
    seeded_shuffle(s.order, seed);
    s.support.clear();
    s.center.assign(dim, 0.0);
    PointsWelzl w{pts, dim, s};
    w.run(n);
    out.center.assign(s.center.begin(), s.center.end());
    out.support.assign(s.support.begin(), s.support.end());
    double r = 0.0;
    for (index_t i = 0; i < n; ++i)
        r = std::max(r, dist_flat(s.center.data(), pts + std::size_t(i) * dim, dim));
    out.radius = r;
}

// ---------------------------------------------------------------------------
// Smallest enclosing ball of balls.
//
// The support ("basis") ball is the minimum-radius ball to which every
// support ball is internally tangent. With w = (c, R, t), t standing for
// |c|^2 - R^2, tangency is linear in w per ball; minimizing R on the residual
// quadric |c|^2 - R^2 - t = 0 is a one-parameter Lagrange problem.

struct BallsWelzl {
    const std::vector<Ball>* balls;
    int dim;
    std::vector<index_t> order;
    std::vector<index_t> support;
    std::vector<double> center;
    double radius = -1.0;
    bool failed = false;

    const Ball& at(index_t i) const { return (*balls)[std::size_t(i)]; }

    bool tangent_ball() {
        const int m = int(support.size());
        if (m == 0) {
            std::fill(center.begin(), center.end(), 0.0);
            radius = -1.0;
            return true;
        }
        if (m == 1) {
            const Ball& b = at(support[0]);
            center.assign(b.center.begin(), b.center.end());
            radius = b.radius;
            return true;
        }
        const int cols = dim + 2;
        std::vector<double> A(std::size_t(m) * cols), rhs(m);
        double rmax = 0.0;
        for (int i = 0; i < m; ++i) {
            const Ball& b = at(support[i]);
            rmax = std::max(rmax, b.radius);
            double n2 = 0.0;
            for (int c = 0; c < dim; ++c) {
                A[std::size_t(i) * cols + c] = -2.0 * b.center[c];
                n2 += b.center[c] * b.center[c];
            }
            A[std::size_t(i) * cols + dim] = 2.0 * b.radius;
            A[std::size_t(i) * cols + dim + 1] = 1.0;
            rhs[i] = b.radius * b.radius - n2;
        }
        AffineSolution sol = solve_affine(std::move(A), std::move(rhs), m, cols);
        if (!sol.consistent) return false;

        const auto quad = [&](const std::vector<double>& w) {
            double c2 = 0.0;
            for (int c = 0; c < dim; ++c) c2 += w[c] * w[c];
            return c2 - w[dim] * w[dim] - w[dim + 1];
        };

        double scale2 = 1.0;
        for (int i = 0; i < m; ++i) {
            const Ball& b = at(support[i]);
            for (int c = 0; c < dim; ++c) scale2 = std::max(scale2, b.center[c] * b.center[c]);
            scale2 = std::max(scale2, b.radius * b.radius);
        }

        std::vector<std::vector<double>> cands;
        const int q = int(sol.kernel.size());
        if (q == 0) {
            if (std::fabs(quad(sol.particular)) <= 1e-7 * scale2) cands.push_back(sol.particular);
        } else {
            // H u = V^T J V, g = V^T (2 J w0 - e_t), f = V^T e_R with
            // J = diag(1,..,1,-1,0)
            std::vector<double> H(std::size_t(q) * q), g(q), f(q);
            const std::vector<double>& w0 = sol.particular;
            for (int a = 0; a < q; ++a) {
                const std::vector<double>& va = sol.kernel[std::size_t(a)];
                for (int b = 0; b < q; ++b) {
                    const std::vector<double>& vb = sol.kernel[std::size_t(b)];
                    double h = 0.0;
                    for (int c = 0; c < dim; ++c) h += va[c] * vb[c];
                    h -= va[dim] * vb[dim];
                    H[std::size_t(a) * q + b] = h;
                }
                double gv = 0.0;
                for (int c = 0; c < dim; ++c) gv += 2.0 * w0[c] * va[c];
                gv -= 2.0 * w0[dim] * va[dim];
                gv -= va[dim + 1];
                g[a] = gv;
                f[a] = va[dim];
            }
            double fnorm = 0.0;
            for (double v : f) fnorm = std::max(fnorm, std::fabs(v));
            std::vector<double> a_vec, b_vec;
            std::vector<double> gneg(g);
            for (double& v : gneg) v *= -0.5;
            if (!solve_square(H, gneg, q, b_vec)) return false;
            double C = quad(w0);
            {
                // q(b0) = 0.5 * g.b0 + q0
                double gb = 0.0;
                for (int aa = 0; aa < q; ++aa) gb += g[aa] * b_vec[aa];
                C += 0.5 * gb;
            }
            if (fnorm <= 1e-13) {
                // radius is constant on the subspace; the stationary point
                // b0 decides feasibility
                if (std::fabs(C) <= 1e-7 * scale2) {
                    std::vector<double> w(w0);
                    for (int aa = 0; aa < q; ++aa)
                        for (int cc = 0; cc < dim + 2; ++cc) w[cc] += b_vec[aa] * sol.kernel[aa][cc];
                    cands.push_back(std::move(w));
                }
            } else {
                if (!solve_square(H, f, q, a_vec)) return false;
                double Acoef = 0.0;
                for (int aa = 0; aa < q; ++aa) Acoef += f[aa] * a_vec[aa];
                if (std::fabs(Acoef) <= 1e-300) return false;
                double disc = -C / Acoef;
                if (disc < 0.0) return false;
                double nu = std::sqrt(disc);
                for (double sgn : {-1.0, 1.0}) {
                    std::vector<double> w(w0);
                    for (int aa = 0; aa < q; ++aa) {
                        double u = sgn * nu * a_vec[aa] + b_vec[aa];
                        for (int cc = 0; cc < dim + 2; ++cc) w[cc] += u * sol.kernel[aa][cc];
                    }
                    cands.push_back(std::move(w));
                }
            }
        }

        double best = kInf;
        std::vector<double> bestw;
        const double rscale = std::sqrt(scale2);
        for (auto& w : cands) {
            double R = w[dim];
            if (!(R >= rmax - 1e-9 * rscale - kAbsTol)) continue;
            bool ok = true;
            for (int i = 0; i < m && ok; ++i) {
                const Ball& b = at(support[i]);
                double d = dist_flat(w.data(), b.center.data(), dim);
                if (d + b.radius > R + 1e-7 * rscale + kAbsTol) ok = false;
            }
            if (ok && R < best) {
                best = R;
                bestw = w;
            }
        }
        if (!std::isfinite(best)) return false;
        center.assign(bestw.begin(), bestw.begin() + dim);
        radius = best;
        return true;
    }

    bool inside(const Ball& b) const {
        if (radius < 0.0) return false;
        double d = dist_flat(center.data(), b.center.data(), dim);
        return d + b.radius <= radius * (1.0 + 1e-12) + 1e-300;
    }

    void run(index_t end) {
        if (failed) return;
        if (!tangent_ball()) {
            failed = true;
            return;
        }
        if (int(support.size()) == dim + 2) return;
        for (index_t i = 0; i < end && !failed; ++i) {
            if (!inside(at(order[std::size_t(i)]))) {
                support.push_back(order[std::size_t(i)]);
                run(i);
                support.pop_back();
                std::rotate(order.begin(), order.begin() + i, order.begin() + i + 1);
            }
        }
    }
};

// Deterministic fallback: bisection on the radius, deciding feasibility with
// an exact minimization of max_j (|c - x_j|^2 - rho_j^2) over candidate
// equal-power points of affinely independent center subsets.
inline double balls_fit_depth(const std::vector<Ball>& balls, double R, int dim, std::vector<double>& copt) {
    const index_t n = index_t(balls.size());
    std::vector<double> rho(balls.size());
    for (index_t j = 0; j < n; ++j) rho[std::size_t(j)] = R - balls[std::size_t(j)].radius;
    const auto power = [&](const std::vector<double>& c, index_t j) {
        double d2 = sqdist_flat(c.data(), balls[std::size_t(j)].center.data(), dim);
        return d2 - rho[std::size_t(j)] * rho[std::size_t(j)];
    };
    const auto value_at = [&](const std::vector<double>& c) {
        double v = -kInf;
        for (index_t j = 0; j < n; ++j) v = std::max(v, power(c, j));
        return v;
    };

    double best = kInf;
    std::vector<index_t> subset;
    std::vector<double> cand(dim);
    const int maxsz = std::min<int>(dim + 1, int(n));
    // iterate over all subsets of size 1..dim+1
    std::vector<index_t> idx;
    const std::function<void(index_t, int)> rec = [&](index_t start, int want) {
        if (want == 0) {
            const index_t m = index_t(idx.size());
            const point_t& x0 = balls[std::size_t(idx[0])].center;
            if (m == 1) {
                cand.assign(x0.begin(), x0.end());
            } else {
                const int q = int(m - 1);
                std::vector<double> A(std::size_t(q) * q), rhs(q);
                for (int i = 0; i < q; ++i) {
                    const point_t& xi = balls[std::size_t(idx[std::size_t(i) + 1])].center;
                    for (int j = 0; j < q; ++j) {
                        const point_t& xj = balls[std::size_t(idx[std::size_t(j) + 1])].center;
                        double g = 0.0;
                        for (int c = 0; c < dim; ++c) g += (xi[c] - x0[c]) * (xj[c] - x0[c]);
                        A[std::size_t(i) * q + j] = 2.0 * g;
                    }
                    double n2 = sqdist_flat(xi.data(), x0.data(), dim);
                    double r0 = rho[std::size_t(idx[0])], ri = rho[std::size_t(idx[std::size_t(i) + 1])];
                    rhs[i] = n2 + r0 * r0 - ri * ri;
                }
                std::vector<double> t;
                if (!solve_square(std::move(A), std::move(rhs), q, t)) return;
                cand.assign(x0.begin(), x0.end());
                for (int j = 0; j < q; ++j) {
                    const point_t& xj = balls[std::size_t(idx[std::size_t(j) + 1])].center;
                    for (int c = 0; c < dim; ++c) cand[c] += t[j] * (xj[c] - x0[c]);
                }
            }
            double v = value_at(cand);
            if (v < best) {
                best = v;
                copt = cand;
            }
            return;
        }
        for (index_t i = start; i + want <= n; ++i) {
            idx.push_back(i);
            rec(i + 1, want - 1);
            idx.pop_back();
        }
    };
    for (int sz = 1; sz <= maxsz; ++sz) rec(0, sz);
    return best;
}

inline void meb_balls_bisect(const std::vector<Ball>& balls, int dim, MebResult& out) {
    const index_t n = index_t(balls.size());
    double lo = 0.0, hi = 0.0;
    for (index_t j = 0; j < n; ++j) lo = std::max(lo, balls[std::size_t(j)].radius);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = i + 1; j < n; ++j) {
            double d = dist_flat(balls[std::size_t(i)].center.data(), balls[std::size_t(j)].center.data(), dim);
            lo = std::max(lo, 0.5 * (d + balls[std::size_t(i)].radius + balls[std::size_t(j)].radius));
        }
    for (index_t j = 0; j < n; ++j) {
        double d = dist_flat(balls[0].center.data(), balls[std::size_t(j)].center.data(), dim);
        hi = std::max(hi, d + balls[std::size_t(j)].radius);
    }
    hi = std::max(hi, lo);
    std::vector<double> c(dim), cbest(dim);
    const auto feasible = [&](double R) {
        double depth = balls_fit_depth(balls, R, dim, c);
        return depth <= 1e-11 * std::max(1.0, R * R);
    };
    if (!feasible(hi)) {
        // widen once; the initial hi encloses by construction, so this is
        // only reachable through severe degeneracy
        hi *= 1.0 + 1e-6;
        hi += 1e-12;
    }
    for (int it = 0; it < 80 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    feasible(hi);
    cbest = c;
    out.center = cbest;
    double r = 0.0;
    for (index_t j = 0; j < n; ++j) {
        double d = dist_flat(cbest.data(), balls[std::size_t(j)].center.data(), dim);
        r = std::max(r, d + balls[std::size_t(j)].radius);
    }
    out.radius = r;
    out.support.clear();
    for (index_t j = 0; j < n; ++j) {
        double d = dist_flat(cbest.data(), balls[std::size_t(j)].center.data(), dim);
        if (d + balls[std::size_t(j)].radius >= r - cmp_tol(r, r) * 100 - 1e-7 * std::max(1.0, r))
            out.support.push_back(j);
    }
    if (index_t(out.support.size()) > index_t(dim) + 2) out.support.resize(std::size_t(dim) + 2);
}

} // namespace detail

// Sum of squared coordinate differences.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("squared_distance: dimension mismatch");
    return detail::sqdist_flat(a.data(), b.data(), int(a.size()));
}

inline double squared_distance(const point_t& a, const point_t& b) {
    return squared_distance(std::span<const double>(a), std::span<const double>(b));
}

inline double distance(const point_t& a, const point_t& b) { return std::sqrt(squared_distance(a, b)); }

// Smallest ball containing all points. Randomized move-to-front; the
// permutation is drawn from `seed`, so results are reproducible.
inline MebResult min_enclosing_ball(const std::vector<point_t>& points, std::uint64_t seed = kGeomSeed) {
    if (points.empty()) throw std::invalid_argument("min_enclosing_ball: empty input");
    const int dim = int(points[0].size());
    for (const point_t& p : points)
        if (int(p.size()) != dim) throw std::invalid_argument("min_enclosing_ball: dimension mismatch");
    std::vector<double> flat(points.size() * std::size_t(dim));
    for (std::size_t i = 0; i < points.size(); ++i)
        std::copy(points[i].begin(), points[i].end(), flat.begin() + i * std::size_t(dim));
    detail::MebScratch scratch;
    MebResult out;
    detail::meb_points(flat.data(), index_t(points.size()), dim, seed, scratch, out);
    return out;
}

// Smallest ball containing every input ball. Randomized move-to-front over
// balls with a deterministic bisection fallback for degenerate inputs.
inline MebResult min_enclosing_ball_of_balls(const std::vector<Ball>& balls, std::uint64_t seed = kGeomSeed) {
    if (balls.empty()) throw std::invalid_argument("min_enclosing_ball_of_balls: empty input");
    const int dim = int(balls[0].center.size());
    for (const Ball& b : balls) {
        if (int(b.center.size()) != dim)
            throw std::invalid_argument("min_enclosing_ball_of_balls: dimension mismatch");
        if (!std::isfinite(b.radius) || b.radius < 0.0)
            throw std::invalid_argument("min_enclosing_ball_of_balls: radius must be finite and nonnegative");
    }
    // balls contained in another ball never determine the result
    std::vector<index_t> keep;
    for (index_t i = 0; i < index_t(balls.size()); ++i) {
        bool contained = false;
        for (index_t j : keep) {
            double d = detail::dist_flat(balls[std::size_t(i)].center.data(), balls[std::size_t(j)].center.data(), dim);
            if (d + balls[std::size_t(i)].radius <= balls[std::size_t(j)].radius + kAbsTol) {
                contained = true;
                break;
            }
        }
        if (contained) continue;
        // also drop previously kept balls that lie inside this one
        std::vector<index_t> next;
        for (index_t j : keep) {
            double d = detail::dist_flat(balls[std::size_t(i)].center.data(), balls[std::size_t(j)].center.data(), dim);
            if (!(d + balls[std::size_t(j)].radius <= balls[std::size_t(i)].radius + kAbsTol)) next.push_back(j);
        }
        next.push_back(i);
        keep = std::move(next);
    }
    std::vector<Ball> work;
    work.reserve(keep.size());
    for (index_t j : keep) work.push_back(balls[std::size_t(j)]);

    MebResult out;
    if (work.size() == 1) {
        out.center = work[0].center;
        out.radius = work[0].radius;
        out.support = {keep[0]};
        return out;
    }

    detail::BallsWelzl w;
    w.balls = &work;
    w.dim = dim;
    w.center.assign(dim, 0.0);
    w.order.resize(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) w.order[i] = index_t(i);
    seeded_shuffle(w.order, seed);
    w.run(index_t(work.size()));

    bool valid = !w.failed && w.radius >= 0.0;
    if (valid) {
        for (const Ball& b : work) {
            double d = detail::dist_flat(w.center.data(), b.center.data(), dim);
            if (d + b.radius > w.radius + cmp_tol(w.radius, w.radius) * 4 + 1e-9 * std::max(1.0, w.radius)) {
                valid = false;
                break;
            }
        }
    }
    if (valid) {
        out.center.assign(w.center.begin(), w.center.end());
        out.support.clear();
        for (index_t j : w.support) out.support.push_back(keep[std::size_t(j)]);
    } else {
        detail::meb_balls_bisect(work, dim, out);
        std::vector<index_t> mapped;
        for (index_t j : out.support) mapped.push_back(keep[std::size_t(j)]);
        out.support = std::move(mapped);
    }
    // tighten the radius to the exact enclosing value for the chosen center
    double r = 0.0;
    for (const Ball& b : work)
        r = std::max(r, detail::dist_flat(out.center.data(), b.center.data(), dim) + b.radius);
    out.radius = r;
    return out;
}

// Signed intersection depth of a family of closed balls: the largest D such
// that some point lies at distance <= r_j - D from every center (positive
// iff the common intersection is nonempty, up to tolerance).
inline double balls_intersection_depth(const std::vector<Ball>& balls, std::uint64_t seed = kGeomSeed) {
    if (balls.empty()) throw std::invalid_argument("balls_intersection_depth: empty input");
    const int dim = int(balls[0].center.size());
    double s = 0.0;
    for (const Ball& b : balls) {
        if (b.radius < 0.0 || !std::isfinite(b.radius))
            throw std::invalid_argument("balls_intersection_depth: invalid radius");
        s = std::max(s, b.radius);
    }
    if (s <= kAbsTol) {
        double worst = 0.0;
        for (const Ball& b : balls)
            worst = std::max(worst, detail::dist_flat(balls[0].center.data(), b.center.data(), dim));
        return -worst;
    }
    std::vector<Ball> shrunk;
    shrunk.reserve(balls.size());
    for (const Ball& b : balls) {
        Ball sb;
        sb.center.resize(dim);
        for (int c = 0; c < dim; ++c) sb.center[c] = b.center[c] / s;
        sb.radius = 1.0 - b.radius / s;
        shrunk.push_back(std::move(sb));
    }
    MebResult m = min_enclosing_ball_of_balls(shrunk, seed);
    return s * (1.0 - m.radius);
}

// True iff the intersection of all closed balls is nonempty: rescale the
// largest radius to 1, enclose the complementary balls, and compare the
// enclosing radius against 1.
inline bool balls_have_common_point(const std::vector<Ball>& balls, std::uint64_t seed = kGeomSeed) {
    if (balls.empty()) throw std::invalid_argument("balls_have_common_point: empty input");
    const int dim = int(balls[0].center.size());
    double s = 0.0;
    double cscale = 0.0;
    for (const Ball& b : balls) {
        if (int(b.center.size()) != dim)
            throw std::invalid_argument("balls_have_common_point: dimension mismatch");
        if (b.radius < 0.0 || !std::isfinite(b.radius))
            throw std::invalid_argument("balls_have_common_point: invalid radius");
        s = std::max(s, b.radius);
        for (double c : b.center) cscale = std::max(cscale, std::fabs(c));
    }
    if (s <= kAbsTol) {
        // all radii are (numerically) zero; nonempty iff all centers coincide
        const double tol = std::max(kAbsTol, kRelTol * cscale);
        for (const Ball& b : balls)
            if (detail::dist_flat(balls[0].center.data(), b.center.data(), dim) > tol) return false;
        return true;
    }
    std::vector<Ball> shrunk;
    shrunk.reserve(balls.size());
    for (const Ball& b : balls) {
        Ball sb;
        sb.center.resize(dim);
        for (int c = 0; c < dim; ++c) sb.center[c] = b.center[c] / s;
        sb.radius = 1.0 - b.radius / s;
        shrunk.push_back(std::move(sb));
    }
    MebResult m = min_enclosing_ball_of_balls(shrunk, seed);
    return leq_tol(m.radius, 1.0);
}

} // namespace skf

#pragma once

// The k-distance permutation: order sites by greedily maximizing the distance
// to the k-th closest already-ordered site, recording the insertion values
// lambda_1..lambda_n (the first k are infinite). Two interchangeable
// implementations are provided: a quadratic scan and a heap + range-index
// variant; they produce identical output including tie-breaks.

#include <queue>
#include <unordered_set>

#include "sparsekfold/core.hpp"
#include "sparsekfold/geometry.hpp"
#include "sparsekfold/range_index.hpp"

namespace skf {

struct PointCloud {
    index_t n = 0;
    int dim = 0;
    std::vector<double> coords;  // row-major n x dim

    const double* at(index_t i) const { return coords.data() + std::size_t(i) * dim; }

    point_t point(index_t i) const {
        return point_t(at(i), at(i) + dim);
    }
};

// Builds a cloud and rejects duplicate points (identical coordinate vectors).
inline PointCloud make_point_cloud(const std::vector<point_t>& points) {
    if (points.empty()) throw parse_error("point cloud: no points");
    PointCloud cloud;
    cloud.n = index_t(points.size());
    cloud.dim = int(points[0].size());
    if (cloud.dim < 1) throw parse_error("point cloud: dimension must be at least 1");
    cloud.coords.reserve(points.size() * std::size_t(cloud.dim));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (int(points[i].size()) != cloud.dim)
            throw parse_error("point cloud: dimension mismatch at point " + std::to_string(i + 1));
        for (double v : points[i]) {
            if (!std::isfinite(v)) throw parse_error("point cloud: non-finite coordinate at point " + std::to_string(i + 1));
            cloud.coords.push_back(v);
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j])
                throw parse_error("point cloud: duplicate point at positions " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1));
    return cloud;
}

struct KPermutation {
    index_t k = 0;
    std::vector<index_t> order;   // order[i] is the original index of the (i+1)-th site
    std::vector<double> lambdas;  // lambdas[i] for the (i+1)-th site; first k entries infinite
};

// Distance from x to its k-th closest neighbor in S (x itself contributes 0
// if present in S).
inline double k_distance(const point_t& x, const std::vector<point_t>& S, index_t k) {
    if (k < 1) throw std::invalid_argument("k_distance: k must be positive");
    if (index_t(S.size()) < k) throw std::invalid_argument("k_distance: need at least k sites");
    std::vector<double> d2;
    d2.reserve(S.size());
    for (const point_t& s : S) d2.push_back(squared_distance(x, s));
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    return std::sqrt(d2[std::size_t(k - 1)]);
}

namespace detail {

// Max-heap with exactly k entries: the current k smallest ordered-neighbor
// distances of one unordered site. The top is its current k-distance.
struct NeighborHeap {
    std::priority_queue<double> heap;

    void offer(double d) {
        if (d < heap.top()) {
            heap.pop();
            heap.push(d);
        }
    }
    double kdist() const { return heap.top(); }
};

inline void validate_kdp_input(const PointCloud& cloud, index_t k) {
    if (k < 1) throw std::invalid_argument("k-distance permutation: k must be positive");
    if (cloud.n < k) throw std::invalid_argument("k-distance permutation: need at least k sites");
}

} // namespace detail

// Quadratic-scan construction. The first k sites are the first k input
// points; later picks maximize the k-distance to the ordered prefix, ties
// broken by smallest original index.
inline KPermutation kdp_simple(const PointCloud& cloud, index_t k) {
    detail::validate_kdp_input(cloud, k);
    const index_t n = cloud.n;
    KPermutation out;
    out.k = k;
    out.order.reserve(static_cast<std::size_t>(n));
    out.lambdas.assign(std::size_t(n), kInf);
    for (index_t i = 0; i < k; ++i) out.order.push_back(i);

    std::vector<detail::NeighborHeap> heaps(static_cast<std::size_t>(n));
    std::vector<char> ordered(std::size_t(n), 0);
    for (index_t i = 0; i < k; ++i) ordered[std::size_t(i)] = 1;
    for (index_t y = k; y < n; ++y)
        for (index_t i = 0; i < k; ++i)
            heaps[std::size_t(y)].heap.push(detail::dist_flat(cloud.at(y), cloud.at(i), cloud.dim));

    for (index_t pos = k; pos < n; ++pos) {
        index_t best = -1;
        double bestv = -kInf;
        for (index_t y = k; y < n; ++y) {
            if (ordered[std::size_t(y)]) continue;
            double v = heaps[std::size_t(y)].kdist();
            if (v > bestv) {
                bestv = v;
                best = y;
            }
        }
        out.order.push_back(best);
        out.lambdas[std::size_t(pos)] = bestv;
        ordered[std::size_t(best)] = 1;
        for (index_t y = k; y < n; ++y) {
            if (ordered[std::size_t(y)]) continue;
            heaps[std::size_t(y)].offer(detail::dist_flat(cloud.at(y), cloud.at(best), cloud.dim));
        }
    }
    return out;
}

// Heap + range-index construction: when a site becomes ordered, only
// unordered sites within its lambda need a neighbor update; a global lazy
// max-heap picks the next site. Output is identical to kdp_simple.
inline KPermutation kdp_fast(const PointCloud& cloud, index_t k) {
    detail::validate_kdp_input(cloud, k);
    const index_t n = cloud.n;
    KPermutation out;
    out.k = k;
    out.order.reserve(static_cast<std::size_t>(n));
    out.lambdas.assign(std::size_t(n), kInf);
    for (index_t i = 0; i < k; ++i) out.order.push_back(i);
    if (n == k) return out;

    std::vector<detail::NeighborHeap> heaps(static_cast<std::size_t>(n));
    std::vector<double> current(std::size_t(n), kInf);
    std::vector<char> ordered(std::size_t(n), 0);
    for (index_t i = 0; i < k; ++i) ordered[std::size_t(i)] = 1;

    RangeIndex unordered_index(cloud.dim);
    // entry ordering matches kdp_simple's scan: larger k-distance first,
    // ties by smaller original index
    struct Entry {
        double v;
        index_t y;
        bool operator<(const Entry& o) const { return v < o.v || (v == o.v && y > o.y); }
    };
    std::priority_queue<Entry> heap;
    for (index_t y = k; y < n; ++y) {
        for (index_t i = 0; i < k; ++i)
            heaps[std::size_t(y)].heap.push(detail::dist_flat(cloud.at(y), cloud.at(i), cloud.dim));
        current[std::size_t(y)] = heaps[std::size_t(y)].kdist();
        heap.push(Entry{current[std::size_t(y)], y});
        unordered_index.insert(y, cloud.at(y));
    }

    std::vector<index_t> hits;
    for (index_t pos = k; pos < n; ++pos) {
        index_t pick = -1;
        double lambda = 0.0;
        for (;;) {
            Entry e = heap.top();
            heap.pop();
            if (ordered[std::size_t(e.y)] || e.v != current[std::size_t(e.y)]) continue;  // stale
            pick = e.y;
            lambda = e.v;
            break;
        }
        out.order.push_back(pick);
        out.lambdas[std::size_t(pos)] = lambda;
        ordered[std::size_t(pick)] = 1;
        unordered_index.erase(pick);
        unordered_index.query(cloud.at(pick), lambda, hits);
        for (index_t y : hits) {
            double d = detail::dist_flat(cloud.at(y), cloud.at(pick), cloud.dim);
            if (d < current[std::size_t(y)]) {
                heaps[std::size_t(y)].offer(d);
                double v = heaps[std::size_t(y)].kdist();
                if (v != current[std::size_t(y)]) {
                    current[std::size_t(y)] = v;
                    heap.push(Entry{v, y});
                }
            }
        }
    }
    return out;
}

// Ratio of the diameter to the minimum pairwise distance.
inline double spread(const PointCloud& cloud) {
    if (cloud.n < 2) throw std::invalid_argument("spread: need at least 2 points");
    double dmax2 = 0.0, dmin2 = kInf;
    for (index_t i = 0; i < cloud.n; ++i)
        for (index_t j = i + 1; j < cloud.n; ++j) {
            double d2 = detail::sqdist_flat(cloud.at(i), cloud.at(j), cloud.dim);
            dmax2 = std::max(dmax2, d2);
            dmin2 = std::min(dmin2, d2);
        }
    return std::sqrt(dmax2 / dmin2);
}

} // namespace skf

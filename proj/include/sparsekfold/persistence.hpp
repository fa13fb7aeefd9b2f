#pragma once

// Persistent homology over Z/2 by left-to-right boundary reduction, and the
// bottleneck distance between diagrams after mapping both axes through the
// natural logarithm (the scale on which multiplicative interleavings become
// additive shifts).

#include <map>

#include "sparsekfold/oracle.hpp"

namespace skf {

struct DiagramPoint {
    double birth = 0.0;
    double death = kInf;
};

struct PersistenceDiagram {
    std::vector<std::vector<DiagramPoint>> dims;

    const std::vector<DiagramPoint>& at(int d) const {
        static const std::vector<DiagramPoint> empty;
        return (d >= 0 && d < int(dims.size())) ? dims[std::size_t(d)] : empty;
    }
};

struct SimplexEntry {
    std::vector<index_t> verts;  // sorted dense vertex ids
    double value = 0.0;

    int dim() const { return int(verts.size()) - 1; }
};

// Standard column reduction. The input must be sorted by (value, dimension,
// vertex order) and closed under faces; zero-persistence pairs are dropped,
// unpaired creators die at infinity.
inline PersistenceDiagram compute_persistence(const std::vector<SimplexEntry>& filt, int max_dim) {
    const index_t m = index_t(filt.size());
    std::map<std::vector<index_t>, index_t> position;
    for (index_t j = 0; j < m; ++j) {
        const SimplexEntry& s = filt[std::size_t(j)];
        if (!std::is_sorted(s.verts.begin(), s.verts.end()) ||
            std::adjacent_find(s.verts.begin(), s.verts.end()) != s.verts.end())
            throw std::invalid_argument("compute_persistence: simplex vertices must be strictly increasing");
        if (j > 0) {
            const SimplexEntry& p = filt[std::size_t(j) - 1];
            if (s.value < p.value || (s.value == p.value && s.dim() < p.dim()))
                throw std::invalid_argument("compute_persistence: filtration not sorted");
        }
        position[s.verts] = j;
    }

    std::vector<std::vector<index_t>> reduced(static_cast<std::size_t>(m));
    std::vector<index_t> pivot_owner(std::size_t(m), -1);
    std::vector<char> paired(std::size_t(m), 0);
    PersistenceDiagram out;
    out.dims.resize(std::size_t(max_dim) + 1);

    std::vector<index_t> col, tmp;
    for (index_t j = 0; j < m; ++j) {
        const SimplexEntry& s = filt[std::size_t(j)];
        col.clear();
        if (s.dim() > 0) {
            for (std::size_t drop = 0; drop < s.verts.size(); ++drop) {
                std::vector<index_t> facet;
                facet.reserve(s.verts.size() - 1);
                for (std::size_t t = 0; t < s.verts.size(); ++t)
                    if (t != drop) facet.push_back(s.verts[t]);
                auto it = position.find(facet);
                if (it == position.end() || it->second > j)
                    throw std::invalid_argument("compute_persistence: filtration not closed under faces");
                col.push_back(it->second);
            }
            std::sort(col.begin(), col.end());
        }
        while (!col.empty()) {
            index_t piv = col.back();
            index_t owner = pivot_owner[std::size_t(piv)];
            if (owner < 0) break;
            // symmetric difference with the owning column
            const std::vector<index_t>& other = reduced[std::size_t(owner)];
            tmp.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(tmp));
            col.swap(tmp);
        }
        if (!col.empty()) {
            index_t piv = col.back();
            pivot_owner[std::size_t(piv)] = j;
            reduced[std::size_t(j)] = col;
            paired[std::size_t(piv)] = 1;
            paired[std::size_t(j)] = 1;
            int d = filt[std::size_t(piv)].dim();
            double birth = filt[std::size_t(piv)].value;
            double death = s.value;
            if (d <= max_dim && death > birth) out.dims[std::size_t(d)].push_back({birth, death});
        }
    }
    for (index_t j = 0; j < m; ++j) {
        if (paired[std::size_t(j)]) continue;
        int d = filt[std::size_t(j)].dim();
        if (d <= max_dim) out.dims[std::size_t(d)].push_back({filt[std::size_t(j)].value, kInf});
    }
    for (auto& pts : out.dims)
        std::sort(pts.begin(), pts.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
            return a.birth < b.birth || (a.birth == b.birth && a.death < b.death);
        });
    return out;
}

namespace detail {

struct LogPoint {
    double b, d;  // log coordinates; d may be +inf
};

// bipartite feasibility at cost c: every finite point is matched to a finite
// point of the other diagram or to its diagonal projection
inline bool bottleneck_feasible(const std::vector<LogPoint>& A, const std::vector<LogPoint>& B, double c) {
    const double lim = c * (1.0 + 1e-12) + 1e-15;
    const index_t na = index_t(A.size()), nb = index_t(B.size());
    const index_t L = na + nb, R = nb + na;  // left: A + diag(B); right: B + diag(A)
    std::vector<std::vector<index_t>> adj(static_cast<std::size_t>(L));
    const auto dist = [&](const LogPoint& p, const LogPoint& q) {
        return std::max(std::fabs(p.b - q.b), std::fabs(p.d - q.d));
    };
    const auto diag = [&](const LogPoint& p) { return (p.d - p.b) / 2.0; };
    for (index_t i = 0; i < na; ++i) {
        for (index_t j = 0; j < nb; ++j)
            if (dist(A[std::size_t(i)], B[std::size_t(j)]) <= lim) adj[std::size_t(i)].push_back(j);
        if (diag(A[std::size_t(i)]) <= lim) adj[std::size_t(i)].push_back(nb + i);
    }
    for (index_t j = 0; j < nb; ++j) {
        if (diag(B[std::size_t(j)]) <= lim) adj[std::size_t(na + j)].push_back(j);
        for (index_t i = 0; i < na; ++i) adj[std::size_t(na + j)].push_back(nb + i);  // diag-to-diag always
    }
    std::vector<index_t> match_right(std::size_t(R), -1);
    std::vector<char> seen;
    const std::function<bool(index_t)> augment = [&](index_t u) {
        for (index_t v : adj[std::size_t(u)]) {
            if (seen[std::size_t(v)]) continue;
            seen[std::size_t(v)] = 1;
            if (match_right[std::size_t(v)] < 0 || augment(match_right[std::size_t(v)])) {
                match_right[std::size_t(v)] = u;
                return true;
            }
        }
        return false;
    };
    for (index_t u = 0; u < L; ++u) {
        seen.assign(std::size_t(R), 0);
        if (!augment(u)) return false;
    }
    return true;
}

inline double bottleneck_single(const std::vector<DiagramPoint>& da, const std::vector<DiagramPoint>& db) {
    std::vector<LogPoint> A, B, Ainf, Binf;
    const auto convert = [](const std::vector<DiagramPoint>& src, std::vector<LogPoint>& fin,
                            std::vector<LogPoint>& inf) {
        for (const DiagramPoint& p : src) {
            if (!(p.birth > 0.0)) throw std::invalid_argument("log_bottleneck: births must be positive");
            if (p.death < p.birth) throw std::invalid_argument("log_bottleneck: death before birth");
            if (std::isinf(p.death))
                inf.push_back({std::log(p.birth), kInf});
            else
                fin.push_back({std::log(p.birth), std::log(p.death)});
        }
    };
    convert(da, A, Ainf);
    convert(db, B, Binf);

    // essential classes must pair among themselves
    if (Ainf.size() != Binf.size()) return kInf;
    double cost_inf = 0.0;
    {
        std::vector<double> ba, bb;
        for (auto& p : Ainf) ba.push_back(p.b);
        for (auto& p : Binf) bb.push_back(p.b);
        std::sort(ba.begin(), ba.end());
        std::sort(bb.begin(), bb.end());
        for (std::size_t i = 0; i < ba.size(); ++i) cost_inf = std::max(cost_inf, std::fabs(ba[i] - bb[i]));
    }

    std::vector<double> cands = {0.0};
    for (auto& p : A) {
        cands.push_back((p.d - p.b) / 2.0);
        for (auto& q : B) cands.push_back(std::max(std::fabs(p.b - q.b), std::fabs(p.d - q.d)));
    }
    for (auto& q : B) cands.push_back((q.d - q.b) / 2.0);
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    std::size_t lo = 0, hi = cands.size() - 1;
    if (!bottleneck_feasible(A, B, cands[hi])) return kInf;  // unreachable structurally
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (bottleneck_feasible(A, B, cands[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return std::max(cost_inf, cands[lo]);
}

} // namespace detail

// Bottleneck distance on the log scale for one homology dimension.
inline double log_bottleneck(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b) {
    return detail::bottleneck_single(a, b);
}

// Maximum over homology dimensions up to max_dim.
inline double log_bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, int max_dim) {
    double worst = 0.0;
    for (int d = 0; d <= max_dim; ++d) worst = std::max(worst, detail::bottleneck_single(a.at(d), b.at(d)));
    return worst;
}

// ---------------------------------------------------------------------------
// Adapters from lens-vertex filtrations to dense-vertex simplex lists.

namespace detail {

template <class SimplexRange, class ValueFn>
std::vector<SimplexEntry> relabel_filtration(const SimplexRange& simplices, ValueFn&& value_of) {
    std::map<lens_t, index_t> ids;
    for (const auto& s : simplices)
        if (s.vertices.size() == 1) {
            if (!ids.count(s.vertices[0])) {
                index_t next = index_t(ids.size());
                ids[s.vertices[0]] = next;
            }
        }
    std::vector<SimplexEntry> out;
    out.reserve(std::size_t(std::distance(std::begin(simplices), std::end(simplices))));
    for (const auto& s : simplices) {
        SimplexEntry e;
        e.value = value_of(s);
        for (const lens_t& A : s.vertices) {
            auto it = ids.find(A);
            if (it == ids.end()) throw std::invalid_argument("filtration has a simplex over a missing vertex");
            e.verts.push_back(it->second);
        }
        std::sort(e.verts.begin(), e.verts.end());
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const SimplexEntry& x, const SimplexEntry& y) {
        if (x.value != y.value) return x.value < y.value;
        if (x.verts.size() != y.verts.size()) return x.verts.size() < y.verts.size();
        return x.verts < y.verts;
    });
    return out;
}

} // namespace detail

inline std::vector<SimplexEntry> to_simplex_entries(const SparseFiltration& f) {
    return detail::relabel_filtration(f.simplices, [](const FilteredSimplex& s) { return s.value; });
}

inline std::vector<SimplexEntry> to_simplex_entries(const ExactFiltration& f) {
    return detail::relabel_filtration(f.simplices, [](const ExactSimplex& s) { return s.radius; });
}

} // namespace skf

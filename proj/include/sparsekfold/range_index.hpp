#pragma once

// Dynamic index for spherical range reporting over points in R^d.
//
// Contract: query(q, r) returns a superset of all stored points at distance
// <= r from q and contains no stored point at distance >= 2r. Inserts and
// deletes are expected-logarithmic, queries logarithmic plus output size.
// This realization is a kd-tree with exact reporting, leaf insertion and
// tombstone deletion (rebuilt once half the nodes are dead), which meets the
// contract with room to spare.

#include <unordered_map>

#include "sparsekfold/core.hpp"
#include "sparsekfold/geometry.hpp"

namespace skf {

class RangeIndex {
public:
    explicit RangeIndex(int dim) : dim_(dim) {}

    index_t size() const { return live_; }
    int dimension() const { return dim_; }

    void insert(index_t id, const double* pt) {
        if (slot_of_.count(id)) throw std::invalid_argument("RangeIndex::insert: duplicate id");
        index_t slot = index_t(ids_.size());
        ids_.push_back(id);
        alive_.push_back(1);
        pts_.insert(pts_.end(), pt, pt + dim_);
        nodes_.push_back(Node{});
        slot_of_[id] = slot;
        ++live_;
        attach(slot);
    }

    void insert(index_t id, const point_t& p) {
        if (int(p.size()) != dim_) throw std::invalid_argument("RangeIndex::insert: dimension mismatch");
        insert(id, p.data());
    }

    void erase(index_t id) {
        auto it = slot_of_.find(id);
        if (it == slot_of_.end() || !alive_[std::size_t(it->second)])
            throw std::invalid_argument("RangeIndex::erase: unknown id");
        alive_[std::size_t(it->second)] = 0;
        slot_of_.erase(it);
        --live_;
        ++dead_;
        if (dead_ > live_ + 16) rebuild();
    }

    void query(const double* q, double r, std::vector<index_t>& out) const {
        out.clear();
        if (live_ == 0) return;
        if (!std::isfinite(r)) {
            for (std::size_t s = 0; s < ids_.size(); ++s)
                if (alive_[s]) out.push_back(ids_[s]);
            return;
        }
        if (r < 0.0) return;
        search(root_, 0, q, r, r * r, out);
    }

    std::vector<index_t> query(const point_t& q, double r) const {
        if (int(q.size()) != dim_) throw std::invalid_argument("RangeIndex::query: dimension mismatch");
        std::vector<index_t> out;
        query(q.data(), r, out);
        return out;
    }

private:
    struct Node {
        index_t left = -1;
        index_t right = -1;
    };

    const double* at(index_t slot) const { return pts_.data() + std::size_t(slot) * dim_; }

    void attach(index_t slot) {
        if (root_ < 0) {
            root_ = slot;
            return;
        }
        index_t cur = root_;
        int depth = 0;
        for (;;) {
            int sd = depth % dim_;
            bool goleft = at(slot)[sd] < at(cur)[sd];
            index_t& next = goleft ? nodes_[std::size_t(cur)].left : nodes_[std::size_t(cur)].right;
            if (next < 0) {
                next = slot;
                return;
            }
            cur = next;
            ++depth;
        }
    }

    void rebuild() {
        std::vector<index_t> slots;
        std::vector<double> pts;
        std::vector<index_t> ids;
        ids.reserve(static_cast<std::size_t>(live_));
        pts.reserve(std::size_t(live_) * dim_);
        for (std::size_t s = 0; s < ids_.size(); ++s) {
            if (!alive_[s]) continue;
            ids.push_back(ids_[s]);
            pts.insert(pts.end(), at(index_t(s)), at(index_t(s)) + dim_);
        }
        ids_ = std::move(ids);
        pts_ = std::move(pts);
        alive_.assign(ids_.size(), 1);
        nodes_.assign(ids_.size(), Node{});
        slot_of_.clear();
        for (std::size_t s = 0; s < ids_.size(); ++s) slot_of_[ids_[s]] = index_t(s);
        dead_ = 0;
        slots.resize(ids_.size());
        for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = index_t(s);
        root_ = build(slots, 0, index_t(slots.size()), 0);
    }

    index_t build(std::vector<index_t>& slots, index_t lo, index_t hi, int depth) {
        if (lo >= hi) return -1;
        int sd = depth % dim_;
        index_t mid = lo + (hi - lo) / 2;
        std::nth_element(slots.begin() + lo, slots.begin() + mid, slots.begin() + hi,
                         [&](index_t a, index_t b) { return at(a)[sd] < at(b)[sd]; });
        index_t slot = slots[std::size_t(mid)];
        nodes_[std::size_t(slot)].left = build(slots, lo, mid, depth + 1);
        nodes_[std::size_t(slot)].right = build(slots, mid + 1, hi, depth + 1);
        return slot;
    }

    void search(index_t node, int depth, const double* q, double r, double r2, std::vector<index_t>& out) const {
        if (node < 0) return;
        if (alive_[std::size_t(node)] && detail::sqdist_flat(q, at(node), dim_) <= r2)
            out.push_back(ids_[std::size_t(node)]);
        int sd = depth % dim_;
        double delta = q[sd] - at(node)[sd];
        index_t near = delta < 0 ? nodes_[std::size_t(node)].left : nodes_[std::size_t(node)].right;
        index_t far = delta < 0 ? nodes_[std::size_t(node)].right : nodes_[std::size_t(node)].left;
        search(near, depth + 1, q, r, r2, out);
        if (std::fabs(delta) <= r) search(far, depth + 1, q, r, r2, out);
    }

    int dim_;
    index_t root_ = -1;
    index_t live_ = 0;
    index_t dead_ = 0;
    std::vector<index_t> ids_;
    std::vector<char> alive_;
    std::vector<double> pts_;
    std::vector<Node> nodes_;
    std::unordered_map<index_t, index_t> slot_of_;
};

} // namespace skf

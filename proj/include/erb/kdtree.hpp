#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "erb/numeric.hpp"

namespace erb {

// Bucketed kd-tree over the rows of a sample matrix, tuned for the
// moderate dimensions (n <= 16) the entropy estimator works in. Nodes carry
// their bounding boxes so queries can prune on full box distance, which
// matters once the dimension grows past 2 or 3.
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& points, int leaf_size = 16)
      : dim_(static_cast<int>(points.cols())),
        count_(static_cast<std::int64_t>(points.rows())),
        leaf_size_(leaf_size) {
    if (count_ == 0) throw InvalidInput("kd-tree: no points");
    coords_.resize(static_cast<std::size_t>(count_) * dim_);
    index_.resize(static_cast<std::size_t>(count_));
    std::iota(index_.begin(), index_.end(), 0);
    for (std::int64_t r = 0; r < count_; ++r) {
      for (int c = 0; c < dim_; ++c) {
        coords_[static_cast<std::size_t>(r) * dim_ + c] = points(r, c);
      }
    }
    nodes_.reserve(static_cast<std::size_t>(2 * count_ / leaf_size_ + 2));
    build(0, count_);
  }

  struct NeighborDistances {
    double nearest = 0.0;
    double kth = 0.0;
  };

  // Distances from points.row(query) to its nearest and k-th nearest other
  // points. Requires k < count.
  NeighborDistances neighbor_distances(std::int64_t query, int k) const {
    if (k < 1 || k >= count_) {
      throw InvalidInput("kd-tree: k must be in [1, count)");
    }
    // max-heap of the k best squared distances
    std::vector<double> heap;
    heap.reserve(static_cast<std::size_t>(k));
    search(0, query, k, heap);
    const double min_sq = *std::min_element(heap.begin(), heap.end());
    return NeighborDistances{std::sqrt(min_sq), std::sqrt(heap.front())};
  }

  double kth_neighbor_distance(std::int64_t query, int k) const {
    return neighbor_distances(query, k).kth;
  }

 private:
  struct Node {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    int axis = -1;          // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> box_lo;
    std::vector<double> box_hi;
  };

  const double* point(std::int64_t storage_index) const {
    return coords_.data() + static_cast<std::size_t>(index_[static_cast<std::size_t>(storage_index)]) * dim_;
  }

  int build(std::int64_t begin, std::int64_t end) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    {
      Node& node = nodes_.back();
      node.begin = begin;
      node.end = end;
      node.box_lo.assign(static_cast<std::size_t>(dim_), std::numeric_limits<double>::infinity());
      node.box_hi.assign(static_cast<std::size_t>(dim_), -std::numeric_limits<double>::infinity());
      for (std::int64_t i = begin; i < end; ++i) {
        const double* p = point(i);
        for (int c = 0; c < dim_; ++c) {
          node.box_lo[static_cast<std::size_t>(c)] = std::min(node.box_lo[static_cast<std::size_t>(c)], p[c]);
          node.box_hi[static_cast<std::size_t>(c)] = std::max(node.box_hi[static_cast<std::size_t>(c)], p[c]);
        }
      }
    }
    if (end - begin <= leaf_size_) return node_id;

    // split the widest extent at the median
    int axis = 0;
    double widest = -1.0;
    for (int c = 0; c < dim_; ++c) {
      const double w = nodes_[static_cast<std::size_t>(node_id)].box_hi[static_cast<std::size_t>(c)] -
                       nodes_[static_cast<std::size_t>(node_id)].box_lo[static_cast<std::size_t>(c)];
      if (w > widest) {
        widest = w;
        axis = c;
      }
    }
    if (widest <= 0.0) return node_id;  // all points identical: keep as leaf

    const std::int64_t mid = begin + (end - begin) / 2;
    const int d = dim_;
    const double* base = coords_.data();
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [base, d, axis](std::int64_t a, std::int64_t b) {
                       return base[static_cast<std::size_t>(a) * d + axis] <
                              base[static_cast<std::size_t>(b) * d + axis];
                     });
    const double split = coords_[static_cast<std::size_t>(index_[static_cast<std::size_t>(mid)]) * dim_ + axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(node_id)];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return node_id;
  }

  double box_sq_distance(const Node& node, const double* q) const {
    double acc = 0.0;
    for (int c = 0; c < dim_; ++c) {
      const double lo = node.box_lo[static_cast<std::size_t>(c)];
      const double hi = node.box_hi[static_cast<std::size_t>(c)];
      double d = 0.0;
      if (q[c] < lo) {
        d = lo - q[c];
      } else if (q[c] > hi) {
        d = q[c] - hi;
      }
      acc += d * d;
    }
    return acc;
  }

  void search(int node_id, std::int64_t query, int k, std::vector<double>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    const double* q = coords_.data() + static_cast<std::size_t>(query) * dim_;
    if (heap.size() == static_cast<std::size_t>(k) && box_sq_distance(node, q) >= heap.front()) {
      return;
    }
    if (node.axis < 0) {
      for (std::int64_t i = node.begin; i < node.end; ++i) {
        const std::int64_t idx = index_[static_cast<std::size_t>(i)];
        if (idx == query) continue;
        const double* p = coords_.data() + static_cast<std::size_t>(idx) * dim_;
        double sq = 0.0;
        for (int c = 0; c < dim_; ++c) {
          const double d = q[c] - p[c];
          sq += d * d;
        }
        if (heap.size() < static_cast<std::size_t>(k)) {
          heap.push_back(sq);
          std::push_heap(heap.begin(), heap.end());
        } else if (sq < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = sq;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    // near side first
    const int near = q[node.axis] < node.split ? node.left : node.right;
    const int far = near == node.left ? node.right : node.left;
    search(near, query, k, heap);
    search(far, query, k, heap);
  }

  int dim_;
  std::int64_t count_;
  int leaf_size_;
  std::vector<double> coords_;
  std::vector<std::int64_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace erb

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pnsr/error.hpp"

namespace pnsr {

template <typename Scalar, std::size_t Dim>
Scalar squared_distance(const std::array<Scalar, Dim>& a, const std::array<Scalar, Dim>& b) noexcept {
  Scalar acc = 0;
  for (std::size_t k = 0; k < Dim; ++k) {
    const Scalar d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

/// Exact nearest-neighbour index over a fixed point set.
///
/// Median split along the axis of largest spread, buckets of at most
/// `leaf_size` points. Queries return the true minimum squared distance as
/// computed by squared_distance(); among equidistant points the one with the
/// smallest input index wins, so results match a linear scan exactly.
template <typename Scalar, std::size_t Dim>
class KdTree {
 public:
  using Point = std::array<Scalar, Dim>;

  struct Hit {
    std::size_t index = 0;
    Scalar dist2 = std::numeric_limits<Scalar>::infinity();
  };

  explicit KdTree(std::span<const Point> points, std::size_t leaf_size = 16)
      : points_(points.begin(), points.end()), order_(points.size()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points_.empty()) build(0, points_.size());
  }

  std::size_t size() const noexcept { return points_.size(); }

  Hit nearest(const Point& query) const {
    if (points_.empty()) throw EmptyInputError("kd-tree: nearest() on an empty point set");
    Hit best;
    search(0, query, best);
    return best;
  }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t axis = 0;
    Scalar split = 0;
    std::int64_t left = -1;
    std::int64_t right = -1;
  };

  std::int64_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    std::size_t axis = 0;
    Scalar widest = -1;
    for (std::size_t k = 0; k < Dim; ++k) {
      Scalar lo = std::numeric_limits<Scalar>::max();
      Scalar hi = std::numeric_limits<Scalar>::lowest();
      for (std::size_t i = begin; i < end; ++i) {
        lo = std::min(lo, points_[order_[i]][k]);
        hi = std::max(hi, points_[order_[i]][k]);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = k;
      }
    }
    if (widest <= 0) return id;  // all points coincide: keep as one bucket

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       const Scalar pa = points_[a][axis];
                       const Scalar pb = points_[b][axis];
                       return pa < pb || (pa == pb && a < b);
                     });
    const Scalar split = points_[order_[mid]][axis];
    const std::int64_t left = build(begin, mid);
    const std::int64_t right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void search(std::int64_t id, const Point& q, Hit& best) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const Scalar d2 = squared_distance(points_[idx], q);
        if (d2 < best.dist2 || (d2 == best.dist2 && idx < best.index)) {
          best.dist2 = d2;
          best.index = idx;
        }
      }
      return;
    }
    // Left holds coordinates <= split, right holds >= split.
    const Scalar diff = q[node.axis] - node.split;
    const bool go_left = diff < 0;
    search(go_left ? node.left : node.right, q, best);
    // Equality still descends so index tie-breaking stays exact.
    if (diff * diff <= best.dist2) search(go_left ? node.right : node.left, q, best);
  }

  std::vector<Point> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace pnsr

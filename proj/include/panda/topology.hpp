#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "panda/types.hpp"

namespace panda {

/// Symmetric reachability between nodes, stored as sorted adjacency lists.
class Topology {
public:
  Topology() = default;

  explicit Topology(int n) : adjacency_(static_cast<std::size_t>(n)) {
    require(n >= 1, "topology needs at least one node");
  }

  static Topology clique(int n) {
    Topology t(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        t.connect(i, j);
      }
    }
    return t;
  }

  static Topology line(int n) {
    Topology t(n);
    for (int i = 0; i + 1 < n; ++i) {
      t.connect(i, i + 1);
    }
    return t;
  }

  static Topology from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    Topology t(n);
    for (auto [a, b] : edges) {
      t.connect(a, b);
    }
    return t;
  }

  void connect(int a, int b) {
    require(a >= 0 && b >= 0 && a < size() && b < size(),
            "edge " + std::to_string(a) + "-" + std::to_string(b) + " out of range");
    require(a != b, "self-edge on node " + std::to_string(a));
    if (adjacent(a, b)) {
      return;
    }
    insert_sorted(adjacency_[static_cast<std::size_t>(a)], b);
    insert_sorted(adjacency_[static_cast<std::size_t>(b)], a);
  }

  int size() const { return static_cast<int>(adjacency_.size()); }

  const std::vector<int>& neighbors(int node) const {
    return adjacency_[static_cast<std::size_t>(node)];
  }

  bool adjacent(int a, int b) const {
    for (int x : neighbors(a)) {
      if (x == b) {
        return true;
      }
    }
    return false;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& adj : adjacency_) {
      twice += adj.size();
    }
    return twice / 2;
  }

  bool is_clique() const {
    const auto n = static_cast<std::size_t>(size());
    return edge_count() == n * (n - 1) / 2;
  }

private:
  static void insert_sorted(std::vector<int>& v, int x) {
    auto it = v.begin();
    while (it != v.end() && *it < x) {
      ++it;
    }
    v.insert(it, x);
  }

  std::vector<std::vector<int>> adjacency_;
};

}  // namespace panda

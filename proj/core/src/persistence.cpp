/*
 Copyright 2026 trajtopo contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "trajtopo/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "trajtopo/parallel.hpp"

namespace trajtopo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNoiseLifetime = 1e-12;

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  // returns false when x and y were already connected
  bool unite(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent[y] = x;
    return true;
  }
};

struct Edge {
  double diam;
  int i, j;  // i < j

  std::int64_t packed(int n) const { return static_cast<std::int64_t>(i) * n + j; }
};

struct QueueEntry {
  double diam;
  std::int64_t key;
};

// priority_queue "less": the top entry is the pivot, i.e. the coface with
// minimal diameter, ties broken toward the maximal key.
struct PivotLess {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.diam != b.diam) return a.diam > b.diam;
    return a.key < b.key;
  }
};

using CofaceQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, PivotLess>;

std::int64_t triangle_key(int a, int b, int c, int n) {
  // a < b < c assumed
  return (static_cast<std::int64_t>(a) * n + b) * n + c;
}

bool pop_pivot(CofaceQueue& q, QueueEntry& out) {
  while (!q.empty()) {
    QueueEntry top = q.top();
    q.pop();
    if (!q.empty() && q.top().key == top.key) {
      q.pop();  // Z/2 cancellation
      continue;
    }
    out = top;
    return true;
  }
  return false;
}

class RipsReduction {
 public:
  RipsReduction(const Eigen::MatrixXd& d, double threshold)
      : d_(d), n_(static_cast<int>(d.rows())), threshold_(threshold) {}

  PersistenceDiagram run(int max_dim) {
    PersistenceDiagram diag;
    diag.threshold = threshold_;

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n_) * (n_ - 1) / 2);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (d_(i, j) <= threshold_) edges.push_back({d_(i, j), i, j});

    // H0: union-find over edges in filtration order (diameter ascending,
    // equal diameters refined by descending packed index).
    std::sort(edges.begin(), edges.end(), [this](const Edge& a, const Edge& b) {
      if (a.diam != b.diam) return a.diam < b.diam;
      return a.packed(n_) > b.packed(n_);
    });
    UnionFind uf(n_);
    std::vector<char> is_tree_edge(edges.size(), 0);
    int components = n_;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (uf.unite(edges[e].i, edges[e].j)) {
        is_tree_edge[e] = 1;
        --components;
        if (edges[e].diam >= kNoiseLifetime)
          diag.features.push_back({0, 0.0, edges[e].diam});
      }
    }
    for (int c = 0; c < components; ++c) diag.features.push_back({0, 0.0, kInf});

    if (max_dim >= 1 && n_ >= 3) reduce_h1(edges, is_tree_edge, diag);

    return diag;
  }

 private:
  void reduce_h1(const std::vector<Edge>& edges, const std::vector<char>& is_tree_edge,
                 PersistenceDiagram& diag) {
    // cycle edges in reverse filtration order (diameter descending, equal
    // diameters by ascending packed index) are the reduction columns
    std::vector<Edge> columns;
    columns.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (!is_tree_edge[e]) columns.push_back(edges[e]);
    std::reverse(columns.begin(), columns.end());

    pivot_owner_.clear();
    pivot_owner_.reserve(columns.size() * 2);
    reduction_.assign(columns.size(), {});

    CofaceQueue working;
    std::vector<std::int64_t> working_column;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const Edge& col = columns[c];
      working = CofaceQueue();
      working_column.clear();
      working_column.push_back(col.packed(n_));

      QueueEntry pivot{};
      bool has_pivot = init_coboundary(col, working, pivot);
      while (true) {
        if (!has_pivot) {
          diag.features.push_back({1, col.diam, kInf});
          break;
        }
        auto owner = pivot_owner_.find(pivot.key);
        if (owner == pivot_owner_.end()) {
          pivot_owner_.emplace(pivot.key, c);
          if (pivot.diam - col.diam >= kNoiseLifetime)
            diag.features.push_back({1, col.diam, pivot.diam});
          store_column(c, working_column);
          break;
        }
        // add the owning column's coboundary and look for a new pivot
        working.push(pivot);
        for (std::int64_t packed : reduction_[owner->second]) {
          working_column.push_back(packed);
          const int i = static_cast<int>(packed / n_);
          const int j = static_cast<int>(packed % n_);
          push_cofaces(i, j, d_(i, j), working);
        }
        has_pivot = pop_pivot(working, pivot);
      }
    }
  }

  // Enumerates cofaces of edge (i, j) with the added vertex descending from
  // n-1, which yields strictly decreasing triangle keys.
  template <typename Fn>
  void for_each_coface(int i, int j, double diam_ij, Fn&& fn) const {
    for (int v = n_ - 1; v >= 0; --v) {
      if (v == i || v == j) continue;
      const double diam = std::max({diam_ij, d_(std::min(v, i), std::max(v, i)),
                                    d_(std::min(v, j), std::max(v, j))});
      if (diam > threshold_) continue;
      int a = i, b = j, cc = v;
      if (cc < a) std::swap(a, cc);
      if (cc < b) std::swap(b, cc);
      if (!fn(diam, triangle_key(a, b, cc, n_))) return;
    }
  }

  void push_cofaces(int i, int j, double diam_ij, CofaceQueue& q) const {
    for_each_coface(i, j, diam_ij, [&](double diam, std::int64_t key) {
      q.push({diam, key});
      return true;
    });
  }

  // Builds the initial coboundary of `col`, short-circuiting on an emergent
  // pair: the first coface with the column's own diameter is the minimal
  // coface; when unclaimed it is the final pivot and enumeration can stop.
  bool init_coboundary(const Edge& col, CofaceQueue& q, QueueEntry& pivot) {
    bool check_emergent = true;
    bool shortcut = false;
    for_each_coface(col.i, col.j, col.diam, [&](double diam, std::int64_t key) {
      if (check_emergent && diam == col.diam) {
        if (pivot_owner_.find(key) == pivot_owner_.end()) {
          pivot = {diam, key};
          shortcut = true;
          return false;
        }
        check_emergent = false;
      }
      q.push({diam, key});
      return true;
    });
    if (shortcut) return true;
    return pop_pivot(q, pivot);
  }

  void store_column(std::size_t c, std::vector<std::int64_t>& column) {
    // canonicalize mod 2: sort and drop cancelling duplicate pairs
    std::sort(column.begin(), column.end());
    auto& out = reduction_[c];
    out.clear();
    for (std::size_t i = 0; i < column.size();) {
      std::size_t j = i;
      while (j < column.size() && column[j] == column[i]) ++j;
      if ((j - i) % 2 == 1) out.push_back(column[i]);
      i = j;
    }
  }

  const Eigen::MatrixXd& d_;
  int n_;
  double threshold_;
  std::unordered_map<std::int64_t, std::size_t> pivot_owner_;
  std::vector<std::vector<std::int64_t>> reduction_;
};

}  // namespace

std::vector<PersistenceFeature> PersistenceDiagram::h(int dim) const {
  std::vector<PersistenceFeature> out;
  for (const auto& f : features)
    if (f.dim == dim) out.push_back(f);
  return out;
}

std::vector<double> PersistenceDiagram::h1_lifetimes() const {
  std::vector<double> out;
  for (const auto& f : features)
    if (f.dim == 1) out.push_back(f.lifetime());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

FiltrationMatrix build_filtration_matrix(const std::vector<Trajectory>& trajs,
                                         bool connect_endpoints, int jobs) {
  if (trajs.empty()) throw std::invalid_argument("empty dataset");
  const int m = trajs.front().state_dim();
  for (const auto& t : trajs) {
    if (t.states.size() < 2) throw std::invalid_argument("trajectory needs at least 2 states");
    if (t.state_dim() != m) throw std::invalid_argument("state dimension mismatch across dataset");
  }

  FiltrationMatrix out;
  std::vector<Segment> segments;
  std::vector<int> first_rows, last_rows;
  for (int t = 0; t < static_cast<int>(trajs.size()); ++t) {
    const auto& states = trajs[t].states;
    for (int s = 0; s + 1 < static_cast<int>(states.size()); ++s) {
      if (s == 0) first_rows.push_back(static_cast<int>(segments.size()));
      if (s + 2 == static_cast<int>(states.size()))
        last_rows.push_back(static_cast<int>(segments.size()));
      segments.push_back({states[s], states[s + 1]});
      out.index_map.emplace_back(t, s);
    }
  }

  const int n = static_cast<int>(segments.size());
  out.d = Eigen::MatrixXd::Zero(n, n);
  parallel_for(n, jobs, [&](int i) {
    for (int j = i + 1; j < n; ++j) out.d(i, j) = segment_distance(segments[i], segments[j]);
  });

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (out.index_map[i].first == out.index_map[j].first &&
          out.index_map[j].second - out.index_map[i].second == 1)
        out.d(i, j) = 0.0;
      out.d(j, i) = out.d(i, j);
    }

  if (connect_endpoints) {
    for (std::size_t a = 0; a < first_rows.size(); ++a)
      for (std::size_t b = a + 1; b < first_rows.size(); ++b) {
        out.d(first_rows[a], first_rows[b]) = 0.0;
        out.d(first_rows[b], first_rows[a]) = 0.0;
      }
    for (std::size_t a = 0; a < last_rows.size(); ++a)
      for (std::size_t b = a + 1; b < last_rows.size(); ++b) {
        out.d(last_rows[a], last_rows[b]) = 0.0;
        out.d(last_rows[b], last_rows[a]) = 0.0;
      }
  }
  return out;
}

double enclosing_radius(const Eigen::MatrixXd& d) {
  if (d.rows() == 0) return 0.0;
  double radius = kInf;
  for (Eigen::Index i = 0; i < d.rows(); ++i) radius = std::min(radius, d.row(i).maxCoeff());
  return radius;
}

PersistenceDiagram rips_persistence(const FiltrationMatrix& m, int max_dim, double threshold) {
  const Eigen::MatrixXd& d = m.d;
  if (d.rows() != d.cols()) throw std::invalid_argument("distance matrix must be square");
  if (max_dim < 0 || max_dim > 1) throw std::invalid_argument("max_dim must be 0 or 1");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (d(i, j) != d(j, i)) throw std::invalid_argument("distance matrix must be symmetric");
      if (!(d(i, j) >= 0.0)) throw std::invalid_argument("distance matrix must be nonnegative");
    }
  }
  if (d.rows() == 0) throw std::invalid_argument("empty distance matrix");

  const double thr = (threshold == kAutoThreshold) ? enclosing_radius(d) : threshold;
  if (!(thr >= 0.0)) throw std::invalid_argument("threshold must be nonnegative");

  RipsReduction reduction(d, thr);
  return reduction.run(max_dim);
}

int retained_h1_count(const std::vector<double>& lifetimes_desc, double cutoff_ratio,
                      double min_lifetime) {
  int count = 0;
  double previous = kInf;
  for (double life : lifetimes_desc) {
    if (life < min_lifetime) break;
    if (std::isfinite(previous) && life < cutoff_ratio * previous) break;
    ++count;
    previous = life;
  }
  return count;
}

double separating_distance(const PersistenceDiagram& diag, double cutoff_ratio,
                           double min_lifetime) {
  const std::vector<double> lifetimes = diag.h1_lifetimes();
  const int retained = retained_h1_count(lifetimes, cutoff_ratio, min_lifetime);
  if (retained == 0) return diag.threshold;
  const double min_retained = lifetimes[retained - 1];
  if (std::isinf(min_retained)) return diag.threshold;
  const double max_dropped =
      retained < static_cast<int>(lifetimes.size()) ? lifetimes[retained] : 0.0;
  return 0.5 * (max_dropped + min_retained);
}

}  // namespace trajtopo

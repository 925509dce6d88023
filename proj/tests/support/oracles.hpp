#pragma once

// Independent reference implementations and random generators used by the
// unit and acceptance suites. Nothing here calls into the library's math.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

class Gen {
public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return engine_; }

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

private:
  std::mt19937_64 engine_;
};

// Gram matrix over columns of `x` with an explicit double loop.
inline Eigen::MatrixXd gram_linear(const Eigen::MatrixXd& x) {
  const auto n = x.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index f = 0; f < x.rows(); ++f) s += x(f, i) * x(f, j);
      k(i, j) = s;
    }
  return k;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// RBF gram with the median pairwise distance as bandwidth (median of the
// non-zero distances when the plain median is zero).
inline Eigen::MatrixXd gram_rbf_median(const Eigen::MatrixXd& x) {
  const auto n = x.cols();
  Eigen::MatrixXd d(n, n);
  std::vector<double> all;
  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index f = 0; f < x.rows(); ++f) s += (x(f, i) - x(f, j)) * (x(f, i) - x(f, j));
      d(i, j) = std::sqrt(s);
      if (i < j) {
        all.push_back(d(i, j));
        if (d(i, j) > 0) nonzero.push_back(d(i, j));
      }
    }
  double sigma = median(all);
  if (sigma == 0.0) sigma = median(nonzero);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = std::exp(-d(i, j) * d(i, j) / (2 * sigma * sigma));
  return k;
}

// n^-2 Tr(K H L H) with H = I - 11^T / n built explicitly.
inline double hsic_dense(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
  const auto n = k.rows();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  h.array() -= 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd prod = k * h * l * h;
  return prod.trace() / static_cast<double>(n * n);
}

// Cyclic Jacobi eigenvalue iteration for symmetric matrices. Returns the
// eigenvalues in descending order with matching eigenvector columns.
inline std::pair<std::vector<double>, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
  const auto n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  std::vector<double> values;
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values.push_back(a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]));
    vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {values, vectors};
}

// -B = 1/2 J D^2 J with explicit loops.
inline Eigen::MatrixXd double_center(const Eigen::MatrixXd& dist) {
  const auto n = dist.rows();
  Eigen::MatrixXd b(n, n);
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  double all = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      row[static_cast<std::size_t>(i)] += dist(i, j) * dist(i, j) / static_cast<double>(n);
      all += dist(i, j) * dist(i, j) / static_cast<double>(n * n);
    }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      b(i, j) = -0.5 * (dist(i, j) * dist(i, j) - row[static_cast<std::size_t>(i)] -
                        row[static_cast<std::size_t>(j)] + all);
  return b;
}

inline Eigen::MatrixXd pairwise(const std::vector<Eigen::Vector2d>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      d(i, j) = (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm();
  return d;
}

// Undirected adjacency over node ids; BFS edge count between two nodes.
inline std::size_t bfs_distance(const std::vector<std::vector<std::size_t>>& adj, std::size_t a, std::size_t b) {
  std::vector<std::size_t> dist(adj.size(), SIZE_MAX);
  std::queue<std::size_t> q;
  dist[a] = 0;
  q.push(a);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto w : adj[u])
      if (dist[w] == SIZE_MAX) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
  }
  return dist[b];
}

// Random rooted tree with `leaves` labelled leaves L0..; returns the Newick
// string plus adjacency, leaf node ids, and node depths.
struct RandomTree {
  std::string newick;
  std::vector<std::vector<std::size_t>> adj;
  std::map<std::string, std::size_t> leaf_node;
  std::vector<std::size_t> depth;
};

inline RandomTree random_tree(Gen& g, std::size_t leaves) {
  // Start with leaves as separate subtrees, then repeatedly merge 2-3 of
  // them under a new parent until one root remains.
  struct Sub {
    std::size_t node;
    std::string text;
  };
  RandomTree t;
  std::vector<Sub> pool;
  std::vector<std::vector<std::size_t>> children;
  for (std::size_t i = 0; i < leaves; ++i) {
    const std::string label = "L" + std::to_string(i);
    t.leaf_node[label] = children.size();
    pool.push_back({children.size(), label});
    children.emplace_back();
  }
  while (pool.size() > 1) {
    const auto take = std::min<std::size_t>(pool.size(), 2 + g.below(2));
    std::vector<Sub> group;
    for (std::size_t k = 0; k < take; ++k) {
      const auto idx = g.below(pool.size());
      group.push_back(pool[idx]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    const auto parent = children.size();
    children.emplace_back();
    std::string text = "(";
    for (std::size_t k = 0; k < group.size(); ++k) {
      children[parent].push_back(group[k].node);
      text += (k ? "," : "") + group[k].text + ":" + std::to_string(1 + g.below(9)) + ".5";
    }
    text += ")";
    pool.push_back({parent, text});
  }
  t.newick = pool.front().text + ";";
  t.adj.resize(children.size());
  t.depth.assign(children.size(), 0);
  for (std::size_t p = 0; p < children.size(); ++p)
    for (auto c : children[p]) {
      t.adj[p].push_back(c);
      t.adj[c].push_back(p);
    }
  // Depths by BFS from the root (last created node).
  const auto root = pool.front().node;
  for (std::size_t n = 0; n < children.size(); ++n) t.depth[n] = bfs_distance(t.adj, root, n);
  return t;
}

// Nested-loop join of (s, p) and (t, p) pairs on p.
inline std::set<std::pair<std::string, std::string>> pivot_join(
    const std::vector<std::pair<std::string, std::string>>& sp,
    const std::vector<std::pair<std::string, std::string>>& tp) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [s, p1] : sp)
    for (const auto& [t, p2] : tp)
      if (p1 == p2) out.insert({s, t});
  return out;
}

}  // namespace oracle

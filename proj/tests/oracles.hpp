// Test-only reference implementations, independent of the production paths
// they check.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "sadiv/rng.hpp"
#include "sadiv/similarity.hpp"
#include "sadiv/simplex.hpp"

namespace oracles {

// Central finite differences of a scalar field.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd finite_difference_hessian(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j) {
        Eigen::VectorXd hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        H(i, i) = (f(hi) - 2.0 * f0 + f(lo)) / (h * h);
      } else {
        Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
      }
    }
  }
  return H;
}

// Exact transportation optimum by enumerating every spanning-tree basis of
// the bipartite supply/demand graph (feasible vertices of the polytope).
// Exponential; intended for marginals of dimension <= 5.
inline double brute_force_w1(const Eigen::MatrixXd& cost,
                             const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q) {
  const int m = static_cast<int>(p.size());
  const int n = static_cast<int>(q.size());
  const int cells = m * n;
  const int basis_size = m + n - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> pick(static_cast<std::size_t>(basis_size));
  std::iota(pick.begin(), pick.end(), 0);

  auto evaluate = [&](const std::vector<int>& cellset) {
    // Union-find acyclicity check over the m + n node graph.
    std::vector<int> parent(static_cast<std::size_t>(m + n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
      while (parent[static_cast<std::size_t>(a)] != a) {
        a = parent[static_cast<std::size_t>(a)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      }
      return a;
    };
    for (int c : cellset) {
      const int i = c / n, j = m + c % n;
      const int ri = find(i), rj = find(j);
      if (ri == rj) return;  // cycle: not a tree basis
      parent[static_cast<std::size_t>(ri)] = rj;
    }

    // Solve the tree flows by repeated leaf elimination.
    std::vector<double> supply(static_cast<std::size_t>(m + n));
    for (int i = 0; i < m; ++i) supply[static_cast<std::size_t>(i)] = p[i];
    for (int j = 0; j < n; ++j) supply[static_cast<std::size_t>(m + j)] = -q[j];
    std::vector<int> degree(static_cast<std::size_t>(m + n), 0);
    std::vector<bool> used(cellset.size(), false);
    for (int c : cellset) {
      ++degree[static_cast<std::size_t>(c / n)];
      ++degree[static_cast<std::size_t>(m + c % n)];
    }
    double total = 0.0;
    for (int step = 0; step < basis_size; ++step) {
      int leaf_arc = -1, leaf_node = -1;
      for (std::size_t a = 0; a < cellset.size(); ++a) {
        if (used[a]) continue;
        const int i = cellset[a] / n, j = m + cellset[a] % n;
        if (degree[static_cast<std::size_t>(i)] == 1) {
          leaf_arc = static_cast<int>(a);
          leaf_node = i;
          break;
        }
        if (degree[static_cast<std::size_t>(j)] == 1) {
          leaf_arc = static_cast<int>(a);
          leaf_node = j;
          break;
        }
      }
      if (leaf_arc < 0) return;  // disconnected: not spanning
      const int c = cellset[static_cast<std::size_t>(leaf_arc)];
      const int i = c / n, j = m + c % n;
      const int other = leaf_node == i ? j : i;
      const double flow = leaf_node < m ? supply[static_cast<std::size_t>(leaf_node)]
                                        : -supply[static_cast<std::size_t>(leaf_node)];
      if (flow < -1e-12) return;  // infeasible vertex
      supply[static_cast<std::size_t>(other)] += supply[static_cast<std::size_t>(leaf_node)];
      supply[static_cast<std::size_t>(leaf_node)] = 0.0;
      total += std::max(flow, 0.0) * cost(c / n, c % n);
      used[static_cast<std::size_t>(leaf_arc)] = true;
      --degree[static_cast<std::size_t>(i)];
      --degree[static_cast<std::size_t>(j)];
    }
    best = std::min(best, total);
  };

  // Enumerate all cell subsets of size m + n - 1.
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == basis_size) {
      evaluate(pick);
      return;
    }
    for (int c = start; c < cells; ++c) {
      pick[static_cast<std::size_t>(depth)] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Quadratic-time Kendall tau-b, the obvious way.
inline double kendall_tau_naive(const std::vector<double>& x,
                                const std::vector<double>& y) {
  const std::size_t n = x.size();
  double concordant = 0, discordant = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) { ++tx; continue; }
      if (dy == 0) { ++ty; continue; }
      if (dx * dy > 0) ++concordant; else ++discordant;
    }
  }
  const double den = std::sqrt((concordant + discordant + tx) *
                               (concordant + discordant + ty));
  return den == 0 ? 0.0 : (concordant - discordant) / den;
}

// Random similarity matrix with a PD certificate: exp(-tau d) of a random
// Euclidean point set, which is PD for every tau > 0.
inline sadiv::SimilarityMatrix random_pd_similarity(Eigen::Index n,
                                                    sadiv::CounterRng& rng,
                                                    double tau = 1.0,
                                                    int dim = 4) {
  Eigen::MatrixXd X(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) X(i, j) = rng.next_double();
  }
  auto D = sadiv::DistanceMatrix::from_points(
      X, sadiv::DistanceMatrix::Metric::kEuclidean);
  auto Z = sadiv::similarity_from_metric(D, tau);
  Z.certify_pd();
  return Z;
}

inline sadiv::Distribution random_interior_distribution(Eigen::Index n,
                                                        sadiv::CounterRng& rng) {
  return sadiv::floor_to_interior(sadiv::sample_uniform_simplex(n, rng), 1e-6);
}

}  // namespace oracles

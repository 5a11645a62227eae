#include "sadiv/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sadiv/errors.hpp"
#include "sadiv/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sadiv {

namespace {

struct Arc {
  int row = 0;
  int col = 0;   // column index within the reduced problem (not offset)
  double flow = 0.0;
};

// Transportation simplex (MODI) on the reduced problem. Node ids: rows are
// 0..m-1, columns m..m+n-1; the basis is a spanning tree of m+n-1 arcs.
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                   const Eigen::VectorXd& demand, const W1Options& opts)
      : C_(cost),
        m_(static_cast<int>(cost.rows())),
        n_(static_cast<int>(cost.cols())),
        opts_(opts),
        is_basic_(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
            cost.rows(), cost.cols(), false)),
        adjacency_(static_cast<std::size_t>(m_ + n_)) {
    rc_tol_ = 1e-12 * std::max(1.0, C_.maxCoeff());
    northwest_corner(supply, demand);
  }

  int solve() {
    u_.resize(m_);
    v_.resize(n_);
    int pivots = 0;
    int degenerate_streak = 0;
    bool bland = false;
    while (true) {
      compute_duals();
      const auto [ei, ej] = entering_cell(bland);
      if (ei < 0) break;  // optimal
      if (++pivots > opts_.max_pivots) {
        throw NumericalError("transportation simplex exceeded pivot cap");
      }
      const double theta = pivot(ei, ej);
      if (theta <= 0.0) {
        if (++degenerate_streak >= opts_.bland_after) bland = true;
      } else {
        degenerate_streak = 0;
      }
    }
    return pivots;
  }

  const std::vector<Arc>& basis() const { return arcs_; }
  const Eigen::VectorXd& dual_u() const { return u_; }
  const Eigen::VectorXd& dual_v() const { return v_; }

 private:
  void add_arc(int i, int j, double flow) {
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back(Arc{i, j, flow});
    adjacency_[static_cast<std::size_t>(i)].push_back(id);
    adjacency_[static_cast<std::size_t>(m_ + j)].push_back(id);
    is_basic_(i, j) = true;
  }

  void northwest_corner(Eigen::VectorXd s, Eigen::VectorXd d) {
    int i = 0, j = 0;
    while (true) {
      const double x = std::min(s[i], d[j]);
      add_arc(i, j, x);
      const bool row_exhausted = (x == s[i]);
      s[i] -= x;
      d[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (row_exhausted) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_duals() {
    // Tree traversal from row 0 with u[0] = 0; u_i + v_j = c_ij on the basis.
    std::vector<int> stack{0};
    std::vector<bool> seen(static_cast<std::size_t>(m_ + n_), false);
    seen[0] = true;
    u_[0] = 0.0;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (const int id : adjacency_[static_cast<std::size_t>(node)]) {
        const Arc& a = arcs_[static_cast<std::size_t>(id)];
        const int other = (node == a.row) ? m_ + a.col : a.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = true;
        if (other >= m_) {
          v_[other - m_] = C_(a.row, a.col) - u_[a.row];
        } else {
          u_[other] = C_(a.row, a.col) - v_[a.col];
        }
        stack.push_back(other);
      }
    }
  }

  std::pair<int, int> entering_cell(bool bland) const {
    int bi = -1, bj = -1;
    double best = -rc_tol_;
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (is_basic_(i, j)) continue;
        const double rc = C_(i, j) - u_[i] - v_[j];
        if (rc < best) {
          bi = i;
          bj = j;
          if (bland) return {bi, bj};  // first eligible index
          best = rc;
        }
      }
    }
    return {bi, bj};
  }

  // Brings (ei, ej) into the basis; returns the flow shifted around the cycle.
  double pivot(int ei, int ej) {
    // Unique tree path from row node ei to column node m_+ej.
    std::vector<int> parent_node(static_cast<std::size_t>(m_ + n_), -1);
    std::vector<int> parent_arc(static_cast<std::size_t>(m_ + n_), -1);
    std::vector<int> stack{ei};
    parent_node[static_cast<std::size_t>(ei)] = ei;
    const int target = m_ + ej;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == target) break;
      for (const int id : adjacency_[static_cast<std::size_t>(node)]) {
        const Arc& a = arcs_[static_cast<std::size_t>(id)];
        const int other = (node == a.row) ? m_ + a.col : a.row;
        if (parent_node[static_cast<std::size_t>(other)] >= 0) continue;
        parent_node[static_cast<std::size_t>(other)] = node;
        parent_arc[static_cast<std::size_t>(other)] = id;
        stack.push_back(other);
      }
    }

    // Walk back from the column node; the arcs alternate -,+,-,... starting
    // from the entering (+) cell at the row end.
    std::vector<int> path;  // arc ids from ei towards target
    for (int node = target; node != ei;
         node = parent_node[static_cast<std::size_t>(node)]) {
      path.push_back(parent_arc[static_cast<std::size_t>(node)]);
    }
    std::reverse(path.begin(), path.end());

    double theta = std::numeric_limits<double>::infinity();
    int leave_pos = -1;
    for (std::size_t t = 0; t < path.size(); t += 2) {  // minus positions
      const Arc& a = arcs_[static_cast<std::size_t>(path[t])];
      const Arc* leader =
          leave_pos < 0
              ? nullptr
              : &arcs_[static_cast<std::size_t>(path[static_cast<std::size_t>(leave_pos)])];
      // Ties resolved toward the lowest cell index (Bland-compatible).
      if (leader == nullptr || a.flow < theta ||
          (a.flow == theta && bland_index(a) < bland_index(*leader))) {
        theta = a.flow;
        leave_pos = static_cast<int>(t);
      }
    }

    for (std::size_t t = 0; t < path.size(); ++t) {
      Arc& a = arcs_[static_cast<std::size_t>(path[t])];
      a.flow += (t % 2 == 0) ? -theta : theta;
      if (a.flow < 0.0) a.flow = 0.0;  // subtraction dust
    }

    const int leave_id = path[static_cast<std::size_t>(leave_pos)];
    replace_arc(leave_id, ei, ej, theta);
    return theta;
  }

  std::int64_t bland_index(const Arc& a) const {
    return static_cast<std::int64_t>(a.row) * n_ + a.col;
  }

  void replace_arc(int arc_id, int ei, int ej, double flow) {
    Arc& a = arcs_[static_cast<std::size_t>(arc_id)];
    is_basic_(a.row, a.col) = false;
    detach(a.row, arc_id);
    detach(m_ + a.col, arc_id);
    a = Arc{ei, ej, flow};
    is_basic_(ei, ej) = true;
    adjacency_[static_cast<std::size_t>(ei)].push_back(arc_id);
    adjacency_[static_cast<std::size_t>(m_ + ej)].push_back(arc_id);
  }

  void detach(int node, int arc_id) {
    auto& list = adjacency_[static_cast<std::size_t>(node)];
    list.erase(std::find(list.begin(), list.end(), arc_id));
  }

  const Eigen::MatrixXd& C_;
  int m_;
  int n_;
  W1Options opts_;
  double rc_tol_ = 0.0;
  std::vector<Arc> arcs_;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> is_basic_;
  std::vector<std::vector<int>> adjacency_;
  Eigen::VectorXd u_, v_;
};

}  // namespace

W1Result wasserstein1(const DistanceMatrix& D, const Distribution& p,
                      const Distribution& q, const W1Options& opts) {
  const Eigen::Index n = D.size();
  if (p.size() != n || q.size() != n) {
    throw InvalidInput("marginals and distance matrix dimensions differ");
  }

  // Pre-eliminate zero-mass entries.
  std::vector<int> rows, cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.probs()[i] > 0.0) rows.push_back(static_cast<int>(i));
    if (q.probs()[i] > 0.0) cols.push_back(static_cast<int>(i));
  }
  const auto m_red = static_cast<Eigen::Index>(rows.size());
  const auto n_red = static_cast<Eigen::Index>(cols.size());

  Eigen::MatrixXd C(m_red, n_red);
  Eigen::VectorXd s(m_red), d(n_red);
  for (Eigen::Index i = 0; i < m_red; ++i) {
    s[i] = p.probs()[rows[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < n_red; ++j) {
      C(i, j) = D.matrix()(rows[static_cast<std::size_t>(i)],
                           cols[static_cast<std::size_t>(j)]);
    }
  }
  for (Eigen::Index j = 0; j < n_red; ++j) {
    d[j] = q.probs()[cols[static_cast<std::size_t>(j)]];
  }

  TransportSimplex simplex(C, s, d, opts);
  const int pivots = simplex.solve();

  TransportPlan plan;
  plan.plan = Eigen::MatrixXd::Zero(n, n);
  plan.dual_u = Eigen::VectorXd::Zero(n);
  plan.dual_v = Eigen::VectorXd::Zero(n);
  plan.pivots = pivots;
  double cost = 0.0;
  for (const Arc& a : simplex.basis()) {
    const int oi = rows[static_cast<std::size_t>(a.row)];
    const int oj = cols[static_cast<std::size_t>(a.col)];
    plan.plan(oi, oj) += a.flow;
    cost += a.flow * D.matrix()(oi, oj);
  }
  for (Eigen::Index i = 0; i < m_red; ++i) {
    plan.dual_u[rows[static_cast<std::size_t>(i)]] = simplex.dual_u()[i];
  }
  for (Eigen::Index j = 0; j < n_red; ++j) {
    plan.dual_v[cols[static_cast<std::size_t>(j)]] = simplex.dual_v()[j];
  }
  plan.cost = cost;
  return W1Result{cost, std::move(plan)};
}

PairwiseDissimilarityMatrix all_pairs_wasserstein(
    const DistanceMatrix& D, std::span<const Distribution> members,
    const W1Options& opts) {
  const auto m = static_cast<Eigen::Index>(members.size());
  if (m == 0) throw InvalidInput("all-pairs input is empty");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  const Eigen::Index pairs = m * (m - 1) / 2;
  const int threads = parallel::effective_threads();
  std::string failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
#endif
  for (Eigen::Index t = 0; t < pairs; ++t) {
    Eigen::Index a = 0;
    while ((a + 1) * (2 * m - a - 2) / 2 <= t) ++a;
    const Eigen::Index b = t - a * (2 * m - a - 1) / 2 + a + 1;
    try {
      const double w = wasserstein1(D, members[a], members[b], opts).distance;
      out(a, b) = out(b, a) = w;
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      failure = e.what();
    }
  }
  (void)threads;
  if (!failure.empty()) throw NumericalError(failure);
  return PairwiseDissimilarityMatrix{std::move(out),
                                     DissimilarityMethod::kWasserstein1};
}

}  // namespace sadiv

#include "sadiv/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "sadiv/errors.hpp"
#include "sadiv/parallel.hpp"
#include "sadiv/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sadiv {

namespace {

constexpr double kDegenerateInfo = 1e-15;

Eigen::ArrayXd entrywise_pow(const Eigen::ArrayXd& v, double a) {
  if (a == 1.0) return v;
  if (a == 2.0) return v.square();
  if (a == 3.0) return v.cube();
  return v.pow(a);
}

// Shared per-run state for fast divergence evaluation: with S = [Z p^a] and
// t1_a = p^a' (Z p^a)^(alpha-1) precomputed, d(p^a || c) needs only O(n).
struct MemberCache {
  Eigen::MatrixXd P;   // m x n stacked members
  Eigen::MatrixXd S;   // m x n, row a = (Z p^a)'
  Eigen::VectorXd t1;  // p^a' (Z p^a)^(alpha-1)
  Eigen::VectorXd w;   // ensemble weights
};

MemberCache build_cache(const SimilarityMatrix& Z, double alpha,
                        const WeightedEnsemble& ensemble) {
  const Eigen::Index m = ensemble.size();
  const Eigen::Index n = ensemble.dimension();
  MemberCache c;
  c.P.resize(m, n);
  for (Eigen::Index a = 0; a < m; ++a) {
    c.P.row(a) = ensemble.members()[static_cast<std::size_t>(a)].probs();
  }
  c.S = c.P * Z.matrix();
  c.t1.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    c.t1[a] =
        (c.P.row(a).transpose().array() *
         entrywise_pow(c.S.row(a).transpose().array(), alpha - 1.0))
            .sum();
  }
  c.w = ensemble.weights();
  return c;
}

struct CentroidTerms {
  Eigen::VectorXd zc_am1;  // (Zc)^(alpha-1)
  Eigen::VectorXd wvec;    // c (x) (Zc)^(alpha-2)
  double self = 0.0;       // wvec' Z c
};

CentroidTerms centroid_terms(const SimilarityMatrix& Z, double alpha,
                             const Eigen::VectorXd& c) {
  CentroidTerms t;
  const Eigen::VectorXd zc = Z.matrix() * c;
  t.zc_am1 = entrywise_pow(zc.array(), alpha - 1.0).matrix();
  t.wvec = (c.array() * entrywise_pow(zc.array(), alpha - 2.0)).matrix();
  t.self = t.wvec.dot(zc);
  return t;
}

// d(p^a || c) from the cached member terms; clamps the usual cancellation dust.
double cached_divergence(const MemberCache& mc, Eigen::Index a,
                         const CentroidTerms& ct, double alpha) {
  const double cross = mc.P.row(a).dot(ct.zc_am1);
  const double mixed = ct.wvec.dot(mc.S.row(a));
  double d = (mc.t1[a] - cross) / (alpha - 1.0) - (mixed - ct.self);
  if (d < 0.0) d = 0.0;
  return d;
}

struct RestartResult {
  std::vector<int> assignments;
  std::vector<Eigen::VectorXd> centroids;
  double within = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

RestartResult run_single_restart(const SimilarityMatrix& Z, double alpha,
                                 const MemberCache& mc, int k,
                                 const KMeansOptions& opts, CounterRng rng) {
  const Eigen::Index m = mc.P.rows();
  RestartResult res;

  // k distinct members as the initial centroids.
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(m));
  for (Eigen::Index a = 0; a < m; ++a) pool[static_cast<std::size_t>(a)] = a;
  res.centroids.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const auto pick = static_cast<std::size_t>(
        rng.next_below(static_cast<std::uint64_t>(m - j)));
    res.centroids[static_cast<std::size_t>(j)] = mc.P.row(pool[pick]);
    std::swap(pool[pick], pool[static_cast<std::size_t>(m - 1 - j)]);
  }

  res.assignments.assign(static_cast<std::size_t>(m), -1);
  Eigen::MatrixXd div(m, k);
  double prev_within = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // Assignment step.
    std::vector<CentroidTerms> terms(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      terms[static_cast<std::size_t>(j)] =
          centroid_terms(Z, alpha, res.centroids[static_cast<std::size_t>(j)]);
    }
    std::vector<int> next(static_cast<std::size_t>(m));
    for (Eigen::Index a = 0; a < m; ++a) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < k; ++j) {
        const double d =
            cached_divergence(mc, a, terms[static_cast<std::size_t>(j)], alpha);
        div(a, j) = d;
        if (d < best) {  // strict: ties go to the lowest cluster index
          best = d;
          arg = j;
        }
      }
      next[static_cast<std::size_t>(a)] = arg;
    }
    empty_cluster_repair(next, div, k);

    double within_assign = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      within_assign += mc.w[a] * div(a, next[static_cast<std::size_t>(a)]);
    }
    if (opts.record_trace) res.trace.push_back(within_assign);

    const bool unchanged = next == res.assignments;
    res.assignments = std::move(next);
    res.iterations = iter + 1;

    // Update step: centroids become the weighted means of their clusters.
    std::vector<Eigen::VectorXd> means(
        static_cast<std::size_t>(k), Eigen::VectorXd::Zero(mc.P.cols()));
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto j = static_cast<std::size_t>(res.assignments[static_cast<std::size_t>(a)]);
      means[j] += mc.w[a] * mc.P.row(a).transpose();
      mass[j] += mc.w[a];
    }
    for (int j = 0; j < k; ++j) {
      auto& mj = means[static_cast<std::size_t>(j)];
      const double wj = mass[static_cast<std::size_t>(j)];
      if (wj > 0.0) {
        mj /= wj;
      } else {
        mj = res.centroids[static_cast<std::size_t>(j)];  // weightless cluster
      }
    }
    res.centroids = std::move(means);

    double within_update = 0.0;
    {
      std::vector<CentroidTerms> t2(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) {
        t2[static_cast<std::size_t>(j)] = centroid_terms(
            Z, alpha, res.centroids[static_cast<std::size_t>(j)]);
      }
      for (Eigen::Index a = 0; a < m; ++a) {
        within_update += mc.w[a] *
                         cached_divergence(
                             mc, a,
                             t2[static_cast<std::size_t>(
                                 res.assignments[static_cast<std::size_t>(a)])],
                             alpha);
      }
    }
    if (opts.record_trace) res.trace.push_back(within_update);

    if (unchanged || prev_within - within_update < opts.objective_tol) {
      res.within = within_update;
      break;
    }
    prev_within = within_update;
    res.within = within_update;
  }
  return res;
}

}  // namespace

InfoDecomposition information_decomposition(const SimilarityMatrix& Z,
                                            double alpha,
                                            const WeightedEnsemble& ensemble,
                                            std::span<const int> assignments,
                                            int k) {
  const Eigen::Index m = ensemble.size();
  if (static_cast<Eigen::Index>(assignments.size()) != m) {
    throw InvalidInput("assignment vector length differs from ensemble size");
  }
  if (k < 1) throw InvalidInput("cluster count must be >= 1");
  std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
  std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(k),
                                     Eigen::VectorXd::Zero(ensemble.dimension()));
  for (Eigen::Index a = 0; a < m; ++a) {
    const int j = assignments[static_cast<std::size_t>(a)];
    if (j < 0 || j >= k) {
      throw InvalidInput("cluster label " + std::to_string(j) +
                         " outside [0, k)");
    }
    mass[static_cast<std::size_t>(j)] += ensemble.weights()[a];
    means[static_cast<std::size_t>(j)] +=
        ensemble.weights()[a] * ensemble.members()[static_cast<std::size_t>(a)].probs();
  }
  for (int j = 0; j < k; ++j) {
    if (mass[static_cast<std::size_t>(j)] <= 0.0) {
      throw InvalidInput("cluster " + std::to_string(j) + " is empty");
    }
  }

  const BregmanInformation total = bregman_information(Z, alpha, ensemble);

  // Between: information of the cluster means weighted by their mass.
  // Within: per-cluster information, weighted by the cluster mass. Computed
  // through the entropy (Jensen-gap) form so additivity is exact.
  const double h_mean = entropy(Z, alpha, total.mean);
  double between = h_mean;
  InfoDecomposition out;
  out.per_cluster.assign(static_cast<std::size_t>(k), 0.0);
  for (int j = 0; j < k; ++j) {
    auto& mj = means[static_cast<std::size_t>(j)];
    mj /= mass[static_cast<std::size_t>(j)];
    const double hj =
        entropy(Z, alpha, Distribution::trusted(Eigen::VectorXd(mj)));
    between -= mass[static_cast<std::size_t>(j)] * hj;
    out.per_cluster[static_cast<std::size_t>(j)] =
        mass[static_cast<std::size_t>(j)] * hj;
  }
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto j = static_cast<std::size_t>(assignments[static_cast<std::size_t>(a)]);
    out.per_cluster[j] -=
        ensemble.weights()[a] *
        entropy(Z, alpha, ensemble.members()[static_cast<std::size_t>(a)]);
  }
  double within = 0.0;
  for (double c : out.per_cluster) within += c;

  out.total = total.value;
  out.between = std::max(between, 0.0);
  out.within = std::max(within, 0.0);
  return out;
}

void empty_cluster_repair(std::vector<int>& assignments,
                          const Eigen::MatrixXd& divergences, int k) {
  const auto m = static_cast<Eigen::Index>(assignments.size());
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++size[static_cast<std::size_t>(a)];
  for (int e = 0; e < k; ++e) {
    if (size[static_cast<std::size_t>(e)] > 0) continue;
    double worst = -1.0;
    Eigen::Index pick = -1;
    for (Eigen::Index a = 0; a < m; ++a) {
      const int owner = assignments[static_cast<std::size_t>(a)];
      if (size[static_cast<std::size_t>(owner)] <= 1) continue;
      const double d = divergences(a, owner);
      if (d > worst) {
        worst = d;
        pick = a;
      }
    }
    if (pick < 0) throw NumericalError("cannot repair empty cluster");
    --size[static_cast<std::size_t>(assignments[static_cast<std::size_t>(pick)])];
    assignments[static_cast<std::size_t>(pick)] = e;
    size[static_cast<std::size_t>(e)] = 1;
  }
}

ClusteringReport bregman_kmeans(const SimilarityMatrix& Z, double alpha,
                                const WeightedEnsemble& ensemble, int k,
                                const KMeansOptions& opts) {
  const Eigen::Index m = ensemble.size();
  if (k < 1) throw InvalidInput("cluster count must be >= 1");
  if (k > m) {
    throw InvalidInput("cluster count " + std::to_string(k) + " exceeds " +
                       std::to_string(m) + " members");
  }
  if (Z.size() != ensemble.dimension()) {
    throw InvalidInput("similarity matrix and ensemble dimensions differ");
  }
  const auto& cert = Z.pd_certificate();
  if (alpha < kDivergenceMinAlpha || !cert || !(cert->lambda_min > 0.0)) {
    throw InvalidInput(
        "clustering needs alpha >= 2 and a PD-certified similarity matrix");
  }
  for (const auto& member : ensemble.members()) {
    if (!(member.min_prob() > 0.0)) {
      throw InvalidInput("clustering members must be strictly interior");
    }
  }

  const MemberCache mc = build_cache(Z, alpha, ensemble);
  const BregmanInformation total = bregman_information(Z, alpha, ensemble);

  const int restarts = std::max(1, opts.n_restarts);
  std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
  CounterRng master(opts.seed);
  const int threads = parallel::effective_threads();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int r = 0; r < restarts; ++r) {
    results[static_cast<std::size_t>(r)] = run_single_restart(
        Z, alpha, mc, k, opts, master.derive(static_cast<std::uint64_t>(r)));
  }
  (void)threads;

  ClusteringReport report;
  report.seed = opts.seed;
  report.total_info = total.value;
  report.degenerate = total.value <= kDegenerateInfo && k > 1;

  report.restart_objectives.reserve(results.size());
  report.restart_iterations.reserve(results.size());
  int best_idx = 0;
  double best_explained = -1.0;
  for (int r = 0; r < restarts; ++r) {
    const auto& res = results[static_cast<std::size_t>(r)];
    const double explained =
        total.value > kDegenerateInfo
            ? std::clamp(1.0 - res.within / total.value, 0.0, 1.0)
            : 0.0;
    report.restart_objectives.push_back(explained);
    report.restart_iterations.push_back(res.iterations);
    if (opts.record_trace) report.traces.push_back(res.trace);
    if (explained > best_explained) {
      best_explained = explained;
      best_idx = r;
    }
  }

  auto& best = results[static_cast<std::size_t>(best_idx)];
  // Exact accounting for the winning partition.
  const InfoDecomposition dec =
      information_decomposition(Z, alpha, ensemble, best.assignments, k);
  report.between_info = dec.between;
  report.within_info = dec.within;
  report.best.assignments = std::move(best.assignments);
  report.best.k = k;
  report.best.explained_fraction =
      total.value > kDegenerateInfo ? dec.between / dec.total : 0.0;
  report.centroids.reserve(best.centroids.size());
  for (auto& c : best.centroids) {
    report.centroids.push_back(Distribution::trusted(std::move(c)));
  }
  return report;
}

double adjusted_mutual_information(std::span<const int> labels_a,
                                   std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw InvalidInput("label vectors differ in length");
  }
  if (labels_a.empty()) throw InvalidInput("label vectors are empty");
  const auto n = static_cast<double>(labels_a.size());

  std::map<int, int> ia, ib;
  for (int v : labels_a) ia.emplace(v, static_cast<int>(ia.size()));
  for (int v : labels_b) ib.emplace(v, static_cast<int>(ib.size()));
  const int A = static_cast<int>(ia.size());
  const int B = static_cast<int>(ib.size());
  if (A == 1 && B == 1) return 1.0;

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(A, B);
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    table(ia[labels_a[i]], ib[labels_b[i]]) += 1.0;
  }
  const Eigen::VectorXd ai = table.rowwise().sum();
  const Eigen::VectorXd bj = table.colwise().sum();

  double mi = 0.0;
  for (int i = 0; i < A; ++i) {
    for (int j = 0; j < B; ++j) {
      const double nij = table(i, j);
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (ai[i] * bj[j]));
    }
  }
  double ha = 0.0, hb = 0.0;
  for (int i = 0; i < A; ++i) ha -= (ai[i] / n) * std::log(ai[i] / n);
  for (int j = 0; j < B; ++j) hb -= (bj[j] / n) * std::log(bj[j] / n);

  // Expected MI under the permutation model (hypergeometric cell counts).
  double emi = 0.0;
  const double lg_n = std::lgamma(n + 1.0);
  for (int i = 0; i < A; ++i) {
    for (int j = 0; j < B; ++j) {
      const double a = ai[i], b = bj[j];
      const double lo = std::max(1.0, a + b - n);
      const double hi = std::min(a, b);
      for (double nij = lo; nij <= hi + 0.5; nij += 1.0) {
        const double log_term = std::log(n * nij / (a * b));
        const double log_prob =
            std::lgamma(a + 1.0) + std::lgamma(b + 1.0) +
            std::lgamma(n - a + 1.0) + std::lgamma(n - b + 1.0) - lg_n -
            std::lgamma(nij + 1.0) - std::lgamma(a - nij + 1.0) -
            std::lgamma(b - nij + 1.0) - std::lgamma(n - a - b + nij + 1.0);
        emi += (nij / n) * log_term * std::exp(log_prob);
      }
    }
  }

  const double normalizer = (ha + hb) / 2.0;
  double denom = normalizer - emi;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  if (denom < 0.0) {
    denom = std::min(denom, -kEps);
  } else {
    denom = std::max(denom, kEps);
  }
  return (mi - emi) / denom;
}

}  // namespace sadiv

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "sadiv/info.hpp"

namespace sadiv {

struct InfoDecomposition {
  double total = 0.0;
  double between = 0.0;
  double within = 0.0;
  // Weighted within-cluster information per cluster; sums to `within`.
  std::vector<double> per_cluster;
};

// Splits total Bregman information into between- and within-cluster parts:
// total = between + within exactly (both sides evaluated independently).
InfoDecomposition information_decomposition(const SimilarityMatrix& Z,
                                            double alpha,
                                            const WeightedEnsemble& ensemble,
                                            std::span<const int> assignments,
                                            int k);

struct Partition {
  std::vector<int> assignments;
  int k = 0;
  double explained_fraction = 0.0;  // between / total
};

struct KMeansOptions {
  int n_restarts = 100;
  int max_iters = 500;
  std::uint64_t seed = 0;
  double objective_tol = 1e-12;  // absolute within-information decrease
  bool record_trace = false;     // per-iteration objectives, for diagnostics
};

struct ClusteringReport {
  Partition best;
  std::vector<Distribution> centroids;       // of the best restart
  std::vector<double> restart_objectives;    // explained fraction per restart
  std::vector<int> restart_iterations;
  std::vector<std::vector<double>> traces;   // within-info per iteration
  double total_info = 0.0;
  double between_info = 0.0;
  double within_info = 0.0;
  std::uint64_t seed = 0;
  bool degenerate = false;  // all members identical with k > 1
};

// k-means over the divergence: centroids initialized as k distinct members,
// assignments break ties toward the lowest cluster index, centroids are the
// weighted means. Restarts run in parallel on derived seeds; the report is
// identical for a given (data, seed, restart count) regardless of threads.
ClusteringReport bregman_kmeans(const SimilarityMatrix& Z, double alpha,
                                const WeightedEnsemble& ensemble, int k,
                                const KMeansOptions& opts = {});

// Moves the member farthest from its own centroid into each empty cluster.
// `divergences` is members x clusters; assignments are edited in place.
void empty_cluster_repair(std::vector<int>& assignments,
                          const Eigen::MatrixXd& divergences, int k);

// Chance-corrected partition agreement: (MI - E[MI]) / (mean(Ha, Hb) - E[MI])
// with E[MI] under the permutation (hypergeometric) model.
double adjusted_mutual_information(std::span<const int> labels_a,
                                   std::span<const int> labels_b);

}  // namespace sadiv

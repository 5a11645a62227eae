#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "sadiv/similarity.hpp"
#include "sadiv/simplex.hpp"

namespace sadiv {

// ---------------------------------------------------------------------------
// Planted-partition recovery
// ---------------------------------------------------------------------------

struct LatticeElement {
  double x = 0.0;
  double y = 0.0;
  int group = 0;
};

// 60 elements in three groups of 20 on an integer lattice; the triangle and
// square blocks are adjacent and the circle block is offset.
std::vector<LatticeElement> load_planted_lattice(const std::string& csv_path);

struct PlantedConfig {
  std::vector<LatticeElement> lattice;
  std::vector<int> m_samples{2, 4, 8, 16};
  int distributions_per_group = 10;
  int runs = 50;
  double smoothing_lambda = 0.05;
  int k_min = 2;
  int k_max = 6;
  double alpha = 2.0;
  int restarts = 100;
  int max_iters = 500;
  std::uint64_t seed = 0;
};

struct PlantedRunRecord {
  int m = 0;
  int run = 0;
  std::vector<double> explained_by_k;  // k = k_min..k_max
  double ami_k2 = 0.0;                 // vs (triangle+square | circle)
  double ami_k3 = 0.0;                 // vs the three groups
};

struct PlantedReport {
  bool use_structure = true;
  std::vector<PlantedRunRecord> records;
  std::vector<double> median_ami_k2_by_m;
  std::vector<double> median_ami_k3_by_m;
};

PlantedReport run_planted_experiment(const PlantedConfig& config,
                                     bool use_structure);

// ---------------------------------------------------------------------------
// Runtime against exact optimal transport
// ---------------------------------------------------------------------------

struct RuntimeConfig {
  int support = 50;
  int embed_dim = 10;
  std::vector<int> sizes{10, 20, 50, 100, 200};
  int runs_per_size = 50;
  double alpha = 2.0;
  std::uint64_t seed = 0;
};

struct RuntimeRunRecord {
  int size = 0;
  int run = 0;
  double ot_seconds = 0.0;
  double naive_seconds = 0.0;
  double fast_seconds = 0.0;
  double pearson_r = 0.0;   // OT vs J-BD, strict upper triangle
  double kendall_tau = 0.0;
  double max_fast_naive_diff = 0.0;
};

struct RuntimeSizeSummary {
  int size = 0;
  double median_ot_seconds = 0.0;
  double median_naive_seconds = 0.0;
  double median_fast_seconds = 0.0;
  double median_pearson_r = 0.0;
  double median_kendall_tau = 0.0;
  double max_fast_naive_diff = 0.0;
};

struct RuntimeReport {
  std::vector<RuntimeRunRecord> records;
  std::vector<RuntimeSizeSummary> summaries;
};

// Timed sections run single-threaded (wall clock around the computation only).
RuntimeReport run_runtime_experiment(const RuntimeConfig& config);

// ---------------------------------------------------------------------------
// Beta diversity with a resampling null model
// ---------------------------------------------------------------------------

struct StageBetaDiversity {
  std::string stage;
  int n_plots = 0;
  double empirical = 0.0;
  std::vector<double> null_values;
  double percentile = 0.0;  // % of null values strictly below the empirical
};

struct BetaDiversityReport {
  double alpha = 2.0;
  int n_null = 0;
  bool with_replacement = true;
  std::vector<StageBetaDiversity> stages;
};

// Per stage: Bregman information of its plots under uniform weights, plus a
// null distribution from n_null resamples of the same plot count drawn from
// all plots. Abundance rows are normalized and floored to the interior.
BetaDiversityReport run_beta_diversity(const Eigen::MatrixXd& abundances,
                                       const std::vector<std::string>& stage_labels,
                                       const SimilarityMatrix& Z, double alpha,
                                       int n_null, std::uint64_t seed,
                                       bool with_replacement = true);

// Trait-based species similarity: standardize columns, Euclidean distances
// rescaled to max 1, then 1 - d. The result must certify positive definite.
SimilarityMatrix rutor_similarity(const Eigen::MatrixXd& traits);

}  // namespace sadiv

#pragma once

#include <Eigen/Core>
#include <span>

#include "sadiv/info.hpp"
#include "sadiv/similarity.hpp"
#include "sadiv/simplex.hpp"

namespace sadiv {

struct TransportPlan {
  Eigen::MatrixXd plan;     // n x n, row sums = p, column sums = q
  double cost = 0.0;        // sum plan_ij * D_ij
  Eigen::VectorXd dual_u;   // potentials; cost equals u'p + v'q at optimum
  Eigen::VectorXd dual_v;
  int pivots = 0;
};

struct W1Options {
  int max_pivots = 200000;   // hard cap; exceeded => NumericalError
  int bland_after = 2000;    // degenerate pivots before Bland's rule kicks in
};

struct W1Result {
  double distance = 0.0;
  TransportPlan plan;
};

// Exact discrete optimal transport with ground metric D, solved by the
// transportation simplex (MODI) with Bland's rule as the anti-cycling
// fallback. Zero-mass entries of p and q are eliminated up front.
W1Result wasserstein1(const DistanceMatrix& D, const Distribution& p,
                      const Distribution& q, const W1Options& opts = {});

// m x m matrix of exact W1 values; independent per-pair solves, parallel over
// the upper triangle.
PairwiseDissimilarityMatrix all_pairs_wasserstein(
    const DistanceMatrix& D, std::span<const Distribution> members,
    const W1Options& opts = {});

}  // namespace sadiv

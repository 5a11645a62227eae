#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "sadiv/similarity.hpp"
#include "sadiv/simplex.hpp"

namespace sadiv {

// Entropy is defined for alpha >= 0; the divergence family needs alpha >= 2
// and a certified positive definite Z (the strict-concavity regime).
inline constexpr double kDivergenceMinAlpha = 2.0;

// (Zp)_i: expected similarity of element i to a draw from p.
Eigen::VectorXd ordinariness(const SimilarityMatrix& Z, const Distribution& p);

// (1 - x^(alpha-1)) / (alpha - 1) for alpha != 1, -ln x at alpha = 1.
double surprise(double alpha, double x);

// Similarity-sensitive entropy of order alpha: expected surprise of the
// ordinariness vector. Coincides with Shannon entropy at (alpha=1, Z=I) and
// the Gini-Simpson index at (alpha=2, Z=I).
double entropy(const SimilarityMatrix& Z, double alpha, const Distribution& p);

// Gradient and Hessian of the entropy in p (alpha >= 2, interior p).
Eigen::VectorXd entropy_gradient(const SimilarityMatrix& Z, double alpha,
                                 const Distribution& p);
Eigen::MatrixXd entropy_hessian(const SimilarityMatrix& Z, double alpha,
                                const Distribution& p);

// Bregman divergence of negative entropy. Requires a cached PD certificate on
// Z and alpha >= 2; equals (p-q)'Z(p-q) at alpha = 2. Tiny negative values
// from cancellation (>= -1e-12) are clamped to 0; anything lower throws.
double divergence(const SimilarityMatrix& Z, double alpha,
                  const Distribution& p, const Distribution& q);

// Bregman information of {p, q} with weights (1/2, 1/2): a symmetric
// dissimilarity, H((p+q)/2) - (H(p) + H(q))/2.
double jensen_bregman(const SimilarityMatrix& Z, double alpha,
                      const Distribution& p, const Distribution& q);

struct BregmanInformation {
  double value = 0.0;
  Distribution mean;
};

// Expected divergence of the members from their weighted mean; equals the
// Jensen gap H(mean) - sum_a w_a H(p^a).
BregmanInformation bregman_information(const SimilarityMatrix& Z, double alpha,
                                       const WeightedEnsemble& ensemble);

enum class DissimilarityMethod { kJensenBregman, kWasserstein1 };

struct PairwiseDissimilarityMatrix {
  Eigen::MatrixXd values;  // symmetric, zero diagonal
  DissimilarityMethod method = DissimilarityMethod::kJensenBregman;
};

// Serial reference: one jensen_bregman call per pair (a matrix-vector product
// each). Kept as the oracle for the vectorized kernel.
PairwiseDissimilarityMatrix all_pairs_jbd_naive(
    const SimilarityMatrix& Z, double alpha,
    std::span<const Distribution> members);

// Vectorized kernel: precomputes S = [Z p^a] and the member entropies once,
// then evaluates each midpoint entropy from two rows of S in O(n). The pair
// loop parallelizes over the upper triangle. Matches the naive path to 1e-10.
PairwiseDissimilarityMatrix all_pairs_jbd_fast(
    const SimilarityMatrix& Z, double alpha,
    std::span<const Distribution> members);

}  // namespace sadiv

#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "sadiv/rng.hpp"

namespace sadiv {

inline constexpr double kSimplexTol = 1e-9;     // default validation tolerance
inline constexpr double kInteriorFloor = 1e-10;  // default interior floor

// A point of the probability simplex: nonnegative entries summing to 1.
// Immutable after construction.
class Distribution {
 public:
  // Validates v against the simplex within `tolerance`; entries in
  // [-tolerance, 0) are clipped to 0 and the vector is renormalized.
  static Distribution validated(const Eigen::VectorXd& v,
                                double tolerance = kSimplexTol);

  static Distribution uniform(Eigen::Index n);

  // Adopts `probs` without validation. Internal fast paths only: the caller
  // guarantees simplex membership.
  static Distribution trusted(Eigen::VectorXd probs);

  const Eigen::VectorXd& probs() const { return probs_; }
  Eigen::Index size() const { return probs_.size(); }
  double min_prob() const { return probs_.minCoeff(); }
  bool is_interior(double epsilon = kInteriorFloor) const {
    return min_prob() >= epsilon;
  }

 private:
  explicit Distribution(Eigen::VectorXd p) : probs_(std::move(p)) {}
  Eigen::VectorXd probs_;
};

// m distributions over a shared support with weights in the m-simplex.
class WeightedEnsemble {
 public:
  static WeightedEnsemble validated(std::vector<Distribution> members,
                                    const Eigen::VectorXd& weights,
                                    double tolerance = kSimplexTol);
  static WeightedEnsemble uniform_weights(std::vector<Distribution> members);

  const std::vector<Distribution>& members() const { return members_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(members_.size()); }
  Eigen::Index dimension() const { return members_.front().size(); }

  // Weighted mean, itself a simplex point.
  Distribution mean() const;

 private:
  WeightedEnsemble(std::vector<Distribution> m, Eigen::VectorXd w)
      : members_(std::move(m)), weights_(std::move(w)) {}
  std::vector<Distribution> members_;
  Eigen::VectorXd weights_;
};

// (1 - lambda) * p + lambda * u; strictly interior whenever u is.
Distribution smooth_to_interior(const Distribution& p, double lambda,
                                const Distribution& u);

// Raises entries below epsilon to epsilon, then renormalizes. Idempotent.
Distribution floor_to_interior(const Distribution& p,
                               double epsilon = kInteriorFloor);

// Flat-Dirichlet draw (uniform on the simplex) via normalized exponentials.
Distribution sample_uniform_simplex(Eigen::Index n, CounterRng& rng);
Distribution sample_uniform_simplex(Eigen::Index n, std::uint64_t seed);

// Empirical distribution of m_samples uniform draws (with replacement) from
// `group`, on the full `support_size`-element domain.
Distribution sample_group_distribution(std::span<const int> group,
                                       int m_samples, Eigen::Index support_size,
                                       CounterRng& rng);

}  // namespace sadiv

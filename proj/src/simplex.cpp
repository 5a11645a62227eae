#include "sadiv/simplex.hpp"

#include <cmath>
#include <string>

#include "sadiv/errors.hpp"

namespace sadiv {

Distribution Distribution::validated(const Eigen::VectorXd& v,
                                     double tolerance) {
  if (v.size() == 0) throw InvalidInput("distribution has dimension zero");
  if (!v.allFinite()) throw InvalidInput("distribution has non-finite entries");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < -tolerance) {
      throw InvalidInput("distribution entry " + std::to_string(i) + " is " +
                         std::to_string(v[i]) + ", below -tolerance");
    }
  }
  const double sum = v.sum();
  if (std::abs(sum - 1.0) > tolerance) {
    throw InvalidInput("distribution sums to " + std::to_string(sum) +
                       ", outside 1 +/- tolerance");
  }
  Eigen::VectorXd p = v.cwiseMax(0.0);
  p /= p.sum();
  return Distribution(std::move(p));
}

Distribution Distribution::uniform(Eigen::Index n) {
  if (n < 1) throw InvalidInput("distribution has dimension zero");
  return Distribution(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::trusted(Eigen::VectorXd probs) {
  return Distribution(std::move(probs));
}

WeightedEnsemble WeightedEnsemble::validated(std::vector<Distribution> members,
                                             const Eigen::VectorXd& weights,
                                             double tolerance) {
  if (members.empty()) throw InvalidInput("ensemble is empty");
  if (weights.size() != static_cast<Eigen::Index>(members.size())) {
    throw InvalidInput("ensemble has " + std::to_string(members.size()) +
                       " members but " + std::to_string(weights.size()) +
                       " weights");
  }
  const Eigen::Index n = members.front().size();
  for (const auto& m : members) {
    if (m.size() != n) throw InvalidInput("ensemble members differ in dimension");
  }
  // Weights are themselves a simplex point over the members.
  Distribution w = Distribution::validated(weights, tolerance);
  return WeightedEnsemble(std::move(members), w.probs());
}

WeightedEnsemble WeightedEnsemble::uniform_weights(
    std::vector<Distribution> members) {
  if (members.empty()) throw InvalidInput("ensemble is empty");
  const auto m = static_cast<Eigen::Index>(members.size());
  return validated(std::move(members),
                   Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
}

Distribution WeightedEnsemble::mean() const {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(dimension());
  for (std::size_t a = 0; a < members_.size(); ++a) {
    mu += weights_[static_cast<Eigen::Index>(a)] * members_[a].probs();
  }
  mu /= mu.sum();
  return Distribution::trusted(std::move(mu));
}

Distribution smooth_to_interior(const Distribution& p, double lambda,
                                const Distribution& u) {
  if (p.size() != u.size()) {
    throw InvalidInput("smoothing target dimension mismatch");
  }
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw InvalidInput("smoothing lambda must be in (0, 1]");
  }
  Eigen::VectorXd out = (1.0 - lambda) * p.probs() + lambda * u.probs();
  out /= out.sum();
  return Distribution::trusted(std::move(out));
}

Distribution floor_to_interior(const Distribution& p, double epsilon) {
  const auto n = static_cast<double>(p.size());
  if (!(epsilon > 0.0) || epsilon >= 1.0 / n) {
    throw InvalidInput("interior floor must be in (0, 1/n)");
  }
  if (p.min_prob() >= epsilon) return p;
  Eigen::VectorXd out = p.probs().cwiseMax(epsilon);
  out /= out.sum();
  return Distribution::trusted(std::move(out));
}

Distribution sample_uniform_simplex(Eigen::Index n, CounterRng& rng) {
  if (n < 1) throw InvalidInput("distribution has dimension zero");
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = rng.next_exponential();
  g /= g.sum();
  return Distribution::trusted(std::move(g));
}

Distribution sample_uniform_simplex(Eigen::Index n, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample_uniform_simplex(n, rng);
}

Distribution sample_group_distribution(std::span<const int> group,
                                       int m_samples, Eigen::Index support_size,
                                       CounterRng& rng) {
  if (group.empty()) throw InvalidInput("group is empty");
  if (m_samples < 1) throw InvalidInput("sample count must be >= 1");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(support_size);
  for (int s = 0; s < m_samples; ++s) {
    const auto pick = group[static_cast<std::size_t>(rng.next_below(group.size()))];
    if (pick < 0 || pick >= support_size) {
      throw InvalidInput("group index outside the support");
    }
    counts[pick] += 1.0;
  }
  counts /= static_cast<double>(m_samples);
  return Distribution::trusted(std::move(counts));
}

}  // namespace sadiv

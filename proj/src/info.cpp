#include "sadiv/info.hpp"

#include <cmath>
#include <string>

#include "sadiv/errors.hpp"
#include "sadiv/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sadiv {

namespace {

constexpr double kAlphaOneBand = 1e-12;  // treat alpha within this of 1 as 1
constexpr double kNegativeClamp = -1e-12;

// v^a entrywise, with fast paths for the common integer exponents.
Eigen::ArrayXd entrywise_pow(const Eigen::ArrayXd& v, double a) {
  if (a == 1.0) return v;
  if (a == 2.0) return v.square();
  if (a == 3.0) return v.cube();
  return v.pow(a);
}

void require_same_dim(const SimilarityMatrix& Z, const Distribution& p) {
  if (Z.size() != p.size()) {
    throw InvalidInput("similarity matrix is " + std::to_string(Z.size()) +
                       "-dimensional but distribution has " +
                       std::to_string(p.size()) + " entries");
  }
}

void require_interior(const Distribution& p, const char* what) {
  if (!(p.min_prob() > 0.0)) {
    throw InvalidInput(std::string(what) +
                       " requires a strictly interior distribution");
  }
}

void require_divergence_regime(const SimilarityMatrix& Z, double alpha) {
  if (alpha < kDivergenceMinAlpha) {
    throw InvalidInput("divergence is defined for alpha >= 2, got " +
                       std::to_string(alpha));
  }
  const auto& cert = Z.pd_certificate();
  if (!cert || !(cert->lambda_min > 0.0)) {
    throw InvalidInput(
        "similarity matrix has no positive definite certificate; call "
        "certify_pd() first");
  }
}

double entropy_from_ordinariness(const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& zp, double alpha) {
  if (std::abs(alpha - 1.0) <= kAlphaOneBand) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) continue;  // 0 ln 0 := 0
      if (zp[i] <= 0.0) {
        throw NumericalError(
            "ordinariness entry is nonpositive; floor the distribution first");
      }
      h -= p[i] * std::log(zp[i]);
    }
    return h;
  }
  if (alpha < 1.0) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0 && zp[i] <= 0.0) {
        throw NumericalError(
            "ordinariness entry is nonpositive; floor the distribution first");
      }
    }
  }
  const double moment = (p.array() * entrywise_pow(zp.array(), alpha - 1.0)).sum();
  const double h = (1.0 - moment) / (alpha - 1.0);
  return h < 0.0 && h > kNegativeClamp ? 0.0 : h;
}

}  // namespace

Eigen::VectorXd ordinariness(const SimilarityMatrix& Z, const Distribution& p) {
  require_same_dim(Z, p);
  return Z.matrix() * p.probs();
}

double surprise(double alpha, double x) {
  if (!(x > 0.0) || x > 1.0) {
    throw InvalidInput("surprise argument must be in (0, 1]");
  }
  if (alpha < 0.0) throw InvalidInput("order alpha must be >= 0");
  if (std::abs(alpha - 1.0) <= kAlphaOneBand) return -std::log(x);
  return (1.0 - std::pow(x, alpha - 1.0)) / (alpha - 1.0);
}

double entropy(const SimilarityMatrix& Z, double alpha, const Distribution& p) {
  require_same_dim(Z, p);
  if (alpha < 0.0) throw InvalidInput("order alpha must be >= 0");
  const Eigen::VectorXd zp = Z.matrix() * p.probs();
  return entropy_from_ordinariness(p.probs(), zp, alpha);
}

Eigen::VectorXd entropy_gradient(const SimilarityMatrix& Z, double alpha,
                                 const Distribution& p) {
  require_same_dim(Z, p);
  if (alpha < 2.0) throw InvalidInput("entropy gradient requires alpha >= 2");
  require_interior(p, "entropy gradient");
  const Eigen::ArrayXd zp = (Z.matrix() * p.probs()).array();
  const Eigen::ArrayXd zp_am1 = entrywise_pow(zp, alpha - 1.0);
  const Eigen::ArrayXd d1 = entrywise_pow(zp, alpha - 2.0);
  const Eigen::VectorXd zd1p = Z.matrix() * (d1 * p.probs().array()).matrix();
  return (-(1.0 / (alpha - 1.0)) * zp_am1).matrix() - zd1p;
}

Eigen::MatrixXd entropy_hessian(const SimilarityMatrix& Z, double alpha,
                                const Distribution& p) {
  require_same_dim(Z, p);
  if (alpha < 2.0) throw InvalidInput("entropy Hessian requires alpha >= 2");
  require_interior(p, "entropy Hessian");
  const Eigen::MatrixXd& M = Z.matrix();
  const Eigen::ArrayXd zp = (M * p.probs()).array();
  const Eigen::VectorXd d1 = entrywise_pow(zp, alpha - 2.0).matrix();
  const Eigen::VectorXd d2 =
      (p.probs().array() * entrywise_pow(zp, alpha - 3.0)).matrix();
  Eigen::MatrixXd H = M * d1.asDiagonal();          // Z D1
  H += d1.asDiagonal() * M;                          // + D1 Z
  H += (alpha - 2.0) * (M * d2.asDiagonal() * M);    // + (a-2) Z D2 Z
  H = -H;
  return ((H + H.transpose()) / 2.0).eval();
}

double divergence(const SimilarityMatrix& Z, double alpha,
                  const Distribution& p, const Distribution& q) {
  require_same_dim(Z, p);
  require_same_dim(Z, q);
  require_divergence_regime(Z, alpha);
  require_interior(p, "divergence");
  require_interior(q, "divergence");

  const Eigen::MatrixXd& M = Z.matrix();
  double d;
  if (alpha == 2.0) {
    const Eigen::VectorXd diff = p.probs() - q.probs();
    d = diff.dot(M * diff);
  } else {
    const Eigen::ArrayXd zp = (M * p.probs()).array();
    const Eigen::ArrayXd zq = (M * q.probs()).array();
    const Eigen::ArrayXd zp_am1 = entrywise_pow(zp, alpha - 1.0);
    const Eigen::ArrayXd zq_am1 = entrywise_pow(zq, alpha - 1.0);
    const Eigen::ArrayXd zq_am2 = entrywise_pow(zq, alpha - 2.0);
    const Eigen::VectorXd diff = p.probs() - q.probs();
    d = (p.probs().array() * (zp_am1 - zq_am1)).sum() / (alpha - 1.0) -
        (q.probs().array() * zq_am2 * (M * diff).array()).sum();
  }
  if (d < 0.0) {
    if (d < kNegativeClamp) {
      throw NumericalError("divergence evaluated to " + std::to_string(d) +
                           "; internal consistency violated");
    }
    d = 0.0;
  }
  return d;
}

double jensen_bregman(const SimilarityMatrix& Z, double alpha,
                      const Distribution& p, const Distribution& q) {
  require_same_dim(Z, p);
  require_same_dim(Z, q);
  require_divergence_regime(Z, alpha);
  require_interior(p, "jensen_bregman");
  require_interior(q, "jensen_bregman");
  const Eigen::VectorXd mid = (p.probs() + q.probs()) / 2.0;
  const Eigen::VectorXd zmid = Z.matrix() * mid;
  const double hm = entropy_from_ordinariness(mid, zmid, alpha);
  const double hp = entropy(Z, alpha, p);
  const double hq = entropy(Z, alpha, q);
  const double jb = hm - (hp + hq) / 2.0;
  if (jb < 0.0) {
    if (jb < kNegativeClamp) {
      throw NumericalError("Jensen-Bregman divergence evaluated to " +
                           std::to_string(jb));
    }
    return 0.0;
  }
  return jb;
}

BregmanInformation bregman_information(const SimilarityMatrix& Z, double alpha,
                                       const WeightedEnsemble& ensemble) {
  if (Z.size() != ensemble.dimension()) {
    throw InvalidInput("similarity matrix and ensemble dimensions differ");
  }
  require_divergence_regime(Z, alpha);
  Distribution mu = ensemble.mean();
  const Eigen::VectorXd zmu = Z.matrix() * mu.probs();
  double info = entropy_from_ordinariness(mu.probs(), zmu, alpha);
  for (Eigen::Index a = 0; a < ensemble.size(); ++a) {
    info -= ensemble.weights()[a] *
            entropy(Z, alpha, ensemble.members()[static_cast<std::size_t>(a)]);
  }
  if (info < 0.0) {
    if (info < kNegativeClamp) {
      throw NumericalError("Bregman information evaluated to " +
                           std::to_string(info));
    }
    info = 0.0;
  }
  return BregmanInformation{info, std::move(mu)};
}

PairwiseDissimilarityMatrix all_pairs_jbd_naive(
    const SimilarityMatrix& Z, double alpha,
    std::span<const Distribution> members) {
  const auto m = static_cast<Eigen::Index>(members.size());
  if (m == 0) throw InvalidInput("all-pairs input is empty");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const double v = jensen_bregman(Z, alpha, members[a], members[b]);
      out(a, b) = out(b, a) = v;
    }
  }
  return PairwiseDissimilarityMatrix{std::move(out),
                                     DissimilarityMethod::kJensenBregman};
}

PairwiseDissimilarityMatrix all_pairs_jbd_fast(
    const SimilarityMatrix& Z, double alpha,
    std::span<const Distribution> members) {
  const auto m = static_cast<Eigen::Index>(members.size());
  if (m == 0) throw InvalidInput("all-pairs input is empty");
  require_divergence_regime(Z, alpha);
  const Eigen::Index n = Z.size();

  Eigen::MatrixXd P(m, n);  // stacked distributions
  for (Eigen::Index a = 0; a < m; ++a) {
    if (members[a].size() != n) {
      throw InvalidInput("member dimension mismatch in all-pairs input");
    }
    if (!(members[a].min_prob() > 0.0)) {
      throw InvalidInput("all-pairs members must be strictly interior");
    }
    P.row(a) = members[a].probs();
  }

  // One matrix product replaces all per-pair matrix-vector work.
  const Eigen::MatrixXd S = P * Z.matrix();  // row a = (Z p^a)'

  Eigen::VectorXd h(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    h[a] = entropy_from_ordinariness(P.row(a), S.row(a), alpha);
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  const Eigen::Index pairs = m * (m - 1) / 2;
  const int threads = parallel::effective_threads();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (Eigen::Index t = 0; t < pairs; ++t) {
    // Unrank the flat upper-triangle index.
    Eigen::Index a = static_cast<Eigen::Index>(
        (2 * m - 1 - std::sqrt(static_cast<double>((2 * m - 1) * (2 * m - 1) -
                                                   8 * t))) /
        2.0);
    while ((a + 1) * (2 * m - a - 2) / 2 <= t) ++a;
    while (a > 0 && a * (2 * m - a - 1) / 2 > t) --a;
    const Eigen::Index b = t - a * (2 * m - a - 1) / 2 + a + 1;

    const Eigen::VectorXd mid = (P.row(a) + P.row(b)) / 2.0;
    const Eigen::VectorXd zmid = (S.row(a) + S.row(b)) / 2.0;
    const double hm = entropy_from_ordinariness(mid, zmid, alpha);
    double v = hm - (h[a] + h[b]) / 2.0;
    if (v < 0.0) v = v < kNegativeClamp ? v : 0.0;  // negatives checked below
    out(a, b) = out(b, a) = v;
  }
  (void)threads;
  if ((out.array() < kNegativeClamp).any()) {
    throw NumericalError("vectorized all-pairs produced a negative divergence");
  }
  return PairwiseDissimilarityMatrix{std::move(out),
                                     DissimilarityMethod::kJensenBregman};
}

}  // namespace sadiv

#include "sadiv/similarity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "sadiv/errors.hpp"

namespace sadiv {

namespace {

void require_square(const Eigen::MatrixXd& M, const char* what) {
  if (M.rows() == 0 || M.rows() != M.cols()) {
    throw InvalidInput(std::string(what) + " must be square and non-empty");
  }
}

void require_symmetric(const Eigen::MatrixXd& M, double tol, const char* what) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < M.cols(); ++j) {
      if (std::abs(M(i, j) - M(j, i)) > tol) {
        throw InvalidInput(std::string(what) + " not symmetric at (" +
                           std::to_string(i) + "," + std::to_string(j) +
                           "): " + std::to_string(M(i, j)) + " vs " +
                           std::to_string(M(j, i)));
      }
    }
  }
}

double smallest_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed");
  }
  return es.eigenvalues().minCoeff();
}

}  // namespace

SimilarityMatrix SimilarityMatrix::validated(Eigen::MatrixXd Z,
                                             double sym_tol) {
  require_square(Z, "similarity matrix");
  require_symmetric(Z, sym_tol, "similarity matrix");
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    if (Z(i, i) != 1.0) {
      if (std::abs(Z(i, i) - 1.0) > sym_tol) {
        throw InvalidInput("similarity diagonal entry " + std::to_string(i) +
                           " is " + std::to_string(Z(i, i)) + ", expected 1");
      }
      Z(i, i) = 1.0;
    }
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      if (Z(i, j) < -sym_tol || Z(i, j) > 1.0 + sym_tol) {
        throw InvalidInput("similarity entry (" + std::to_string(i) + "," +
                           std::to_string(j) + ") = " +
                           std::to_string(Z(i, j)) + " outside [0, 1]");
      }
      Z(i, j) = std::clamp(Z(i, j), 0.0, 1.0);
    }
  }
  // Exact symmetry keeps downstream eigen-solvers and tests deterministic.
  Z = ((Z + Z.transpose()) / 2.0).eval();
  return SimilarityMatrix(std::move(Z));
}

SimilarityMatrix SimilarityMatrix::identity(Eigen::Index n) {
  if (n < 1) throw InvalidInput("similarity matrix must be square and non-empty");
  SimilarityMatrix s(Eigen::MatrixXd::Identity(n, n));
  s.cert_ = PdCertificate{1.0, kPdTol};
  return s;
}

bool SimilarityMatrix::certify_pd(double tol) {
  const double lmin = smallest_eigenvalue(Z_);
  if (lmin > tol) {
    cert_ = PdCertificate{lmin, tol};
    return true;
  }
  cert_.reset();
  return false;
}

DistanceMatrix DistanceMatrix::validated(Eigen::MatrixXd D, double sym_tol) {
  require_square(D, "distance matrix");
  require_symmetric(D, sym_tol, "distance matrix");
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    if (std::abs(D(i, i)) > sym_tol) {
      throw InvalidInput("distance diagonal entry " + std::to_string(i) +
                         " is nonzero");
    }
    D(i, i) = 0.0;
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      if (D(i, j) < -sym_tol) {
        throw InvalidInput("negative distance at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      }
      if (D(i, j) < 0.0) D(i, j) = 0.0;
    }
  }
  D = ((D + D.transpose()) / 2.0).eval();
  return DistanceMatrix(std::move(D));
}

DistanceMatrix DistanceMatrix::from_points(const Eigen::MatrixXd& X,
                                           Metric metric) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::VectorXd diff = X.row(i) - X.row(j);
      const double d = metric == Metric::kEuclidean ? diff.norm()
                                                    : diff.lpNorm<1>();
      D(i, j) = D(j, i) = d;
    }
  }
  return DistanceMatrix(std::move(D));
}

void DistanceMatrix::check_triangle_inequality(double tol) const {
  const Eigen::Index n = D_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (D_(i, j) > D_(i, k) + D_(k, j) + tol) {
          throw InvalidInput("triangle inequality violated at (" +
                             std::to_string(i) + "," + std::to_string(j) +
                             ") via " + std::to_string(k));
        }
      }
    }
  }
}

Hierarchy Hierarchy::validated(std::vector<std::vector<std::string>> paths,
                               std::vector<double> level_similarity) {
  if (paths.empty()) throw InvalidInput("hierarchy has no elements");
  const std::size_t l = paths.front().size();
  if (l == 0) throw InvalidInput("hierarchy paths are empty");
  for (const auto& p : paths) {
    if (p.size() != l) throw InvalidInput("hierarchy paths differ in length");
  }
  if (level_similarity.size() != l + 1) {
    throw InvalidInput("level similarity map must have " + std::to_string(l + 1) +
                       " entries (levels 0.." + std::to_string(l) + ")");
  }
  for (std::size_t k = 0; k < level_similarity.size(); ++k) {
    const double f = level_similarity[k];
    if (f < 0.0 || f > 1.0) {
      throw InvalidInput("level similarity outside [0, 1] at level " +
                         std::to_string(k));
    }
    if (k > 0 && f < level_similarity[k - 1]) {
      throw InvalidInput("level similarity must be nondecreasing in level");
    }
  }
  if (level_similarity.back() != 1.0) {
    throw InvalidInput("level similarity at the leaf level must be 1");
  }
  return Hierarchy{std::move(paths), std::move(level_similarity)};
}

SimilarityMatrix similarity_from_metric(const DistanceMatrix& D, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  const Eigen::MatrixXd& M = D.matrix();
  const Eigen::Index n = M.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (M(i, j) <= 0.0) {
        throw InvalidInput("zero distance between distinct elements " +
                           std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
  Eigen::MatrixXd Z = (-tau * M.array()).exp().matrix();
  return SimilarityMatrix::validated(std::move(Z));
}

double calibrate_tau(const DistanceMatrix& D, double target_median_similarity) {
  if (!(target_median_similarity > 0.0) || !(target_median_similarity < 1.0)) {
    throw InvalidInput("target median similarity must be in (0, 1)");
  }
  const Eigen::MatrixXd& M = D.matrix();
  std::vector<double> offdiag;
  offdiag.reserve(static_cast<std::size_t>(M.rows()) * (M.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < M.cols(); ++j) offdiag.push_back(M(i, j));
  }
  if (offdiag.empty() ||
      *std::max_element(offdiag.begin(), offdiag.end()) <= 0.0) {
    throw InvalidInput("calibration needs a positive off-diagonal distance");
  }
  auto median_sim = [&offdiag](double tau) {
    std::vector<double> s(offdiag.size());
    for (std::size_t k = 0; k < offdiag.size(); ++k) {
      s[k] = std::exp(-tau * offdiag[k]);
    }
    const auto mid = s.size() / 2;
    std::nth_element(s.begin(), s.begin() + mid, s.end());
    double m = s[mid];
    if (s.size() % 2 == 0) {
      m = (m + *std::max_element(s.begin(), s.begin() + mid)) / 2.0;
    }
    return m;
  };
  double lo = 1e-12, hi = 1e12;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);  // geometric bisection over decades
    if (median_sim(mid) > target_median_similarity) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

SimilarityMatrix similarity_from_hierarchy(const Hierarchy& h) {
  const auto n = static_cast<Eigen::Index>(h.paths.size());
  const auto l = h.paths.front().size();
  Eigen::MatrixXd Z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Z(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      std::size_t common = 0;
      while (common < l && h.paths[static_cast<std::size_t>(i)][common] ==
                               h.paths[static_cast<std::size_t>(j)][common]) {
        ++common;
      }
      Z(i, j) = Z(j, i) = h.level_similarity[common];
    }
  }
  return SimilarityMatrix::validated(std::move(Z));
}

SimilarityMatrix similarity_linear_from_metric(const DistanceMatrix& D) {
  const double dmax = D.matrix().maxCoeff();
  if (!(dmax > 0.0)) throw InvalidInput("maximum distance is zero");
  Eigen::MatrixXd Z = 1.0 - (D.matrix() / dmax).array();
  auto sim = SimilarityMatrix::validated(std::move(Z));
  sim.certify_pd();  // sufficient conditions rarely hold; always check
  return sim;
}

SimilarityMatrix lift_psd_to_pd(const SimilarityMatrix& M, double delta) {
  if (!(delta > 0.0) || delta > 1.0) {
    throw InvalidInput("delta must be in (0, 1]");
  }
  const double lmin = smallest_eigenvalue(M.matrix());
  if (lmin < -1e-10) {
    throw InvalidInput("matrix is not positive semidefinite (lambda_min = " +
                       std::to_string(lmin) + ")");
  }
  const Eigen::Index n = M.size();
  Eigen::MatrixXd Z =
      delta * Eigen::MatrixXd::Identity(n, n) + (1.0 - delta) * M.matrix();
  auto out = SimilarityMatrix::validated(std::move(Z));
  out.certify_pd();
  return out;
}

NearestPdResult nearest_pd_similarity(const Eigen::MatrixXd& M,
                                      const NearestPdOptions& opts) {
  require_square(M, "input matrix");
  require_symmetric(M, 1e-9, "input matrix");
  if (!(opts.delta > 0.0)) throw InvalidInput("delta must be positive");
  if (!(opts.offdiag_cap > 0.0) || opts.offdiag_cap > 1.0) {
    throw InvalidInput("off-diagonal cap must be in (0, 1]");
  }

  const Eigen::Index n = M.rows();
  Eigen::MatrixXd X = (M + M.transpose()) / 2.0;
  Eigen::MatrixXd spectral_correction = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd box_correction = Eigen::MatrixXd::Zero(n, n);

  auto project_spectral = [&](const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition failed in nearest-pd");
    }
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(opts.delta);
    Eigen::MatrixXd P =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return ((P + P.transpose()) / 2.0).eval();
  };
  auto project_box = [&](const Eigen::MatrixXd& A) {
    Eigen::MatrixXd P = A.cwiseMax(0.0).cwiseMin(opts.offdiag_cap);
    P.diagonal().setOnes();
    return P;
  };

  bool converged = false;
  int it = 0;
  double change = 0.0;
  for (; it < opts.max_iters; ++it) {
    const Eigen::MatrixXd prev = X;
    Eigen::MatrixXd Y = project_spectral(X + spectral_correction);
    spectral_correction += X - Y;
    X = project_box(Y + box_correction);
    box_correction += Y - X;
    change = (X - prev).norm();
    if (change < opts.tol) {
      converged = true;
      ++it;
      break;
    }
  }

  auto sim = SimilarityMatrix::validated(X, 1e-9);
  sim.certify_pd(0.0);
  return NearestPdResult{std::move(sim), converged, it, change};
}

NegativeTypeResult is_negative_type(const DistanceMatrix& D, double tol_rel) {
  const Eigen::MatrixXd& M = D.matrix();
  const Eigen::Index n = M.rows();
  if (n == 1) return NegativeTypeResult{true, true, 0.0};
  const double scale = std::max(1.0, M.maxCoeff());
  const double tol = tol_rel * scale;

  // Orthonormal basis of the complement of span(1) via Householder: the last
  // n-1 columns of the Q factor of [1 | 0].
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.col(0).setOnes();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd B = Q.rightCols(n - 1);

  Eigen::MatrixXd restricted = -(B.transpose() * M * B);
  restricted = ((restricted + restricted.transpose()) / 2.0).eval();
  const double lmin = smallest_eigenvalue(restricted);

  NegativeTypeResult r;
  r.lambda_min_constrained = lmin;
  r.negative_type = lmin >= -tol;
  r.strictly = lmin > tol;
  return r;
}

PdCheck is_positive_definite(const SimilarityMatrix& Z, double tol) {
  const double lmin = smallest_eigenvalue(Z.matrix());
  return PdCheck{lmin > tol, lmin};
}

}  // namespace sadiv

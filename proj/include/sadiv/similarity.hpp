#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace sadiv {

inline constexpr double kMatrixSymTol = 1e-12;
inline constexpr double kPdTol = 1e-12;

struct PdCertificate {
  double lambda_min = 0.0;
  double tol = 0.0;
};

// Symmetric matrix in [0,1] with unit diagonal. Positive definiteness is
// certified once on demand and cached with the matrix.
class SimilarityMatrix {
 public:
  static SimilarityMatrix validated(Eigen::MatrixXd Z,
                                    double sym_tol = kMatrixSymTol);
  static SimilarityMatrix identity(Eigen::Index n);

  const Eigen::MatrixXd& matrix() const { return Z_; }
  Eigen::Index size() const { return Z_.rows(); }

  const std::optional<PdCertificate>& pd_certificate() const { return cert_; }

  // Computes the smallest eigenvalue and caches a certificate when it exceeds
  // tol. Returns true iff the matrix is positive definite at that tolerance.
  bool certify_pd(double tol = kPdTol);

 private:
  explicit SimilarityMatrix(Eigen::MatrixXd Z) : Z_(std::move(Z)) {}
  Eigen::MatrixXd Z_;
  std::optional<PdCertificate> cert_;
};

// Symmetric nonnegative matrix with zero diagonal. The triangle inequality is
// validated only on demand (O(n^3); some user dissimilarities are not metrics).
class DistanceMatrix {
 public:
  static DistanceMatrix validated(Eigen::MatrixXd D,
                                  double sym_tol = kMatrixSymTol);
  // Pairwise distances of row-point set X.
  enum class Metric { kEuclidean, kManhattan };
  static DistanceMatrix from_points(const Eigen::MatrixXd& X, Metric metric);

  const Eigen::MatrixXd& matrix() const { return D_; }
  Eigen::Index size() const { return D_.rows(); }

  void check_triangle_inequality(double tol = 1e-9) const;

 private:
  explicit DistanceMatrix(Eigen::MatrixXd D) : D_(std::move(D)) {}
  Eigen::MatrixXd D_;
};

// Rooted-tree similarity input: per-element code path (levels 1..l, one code
// per level) and a level -> similarity map f of size l+1 with f[l] = 1.
// Z_ij = f[length of the longest common prefix of the paths].
struct Hierarchy {
  std::vector<std::vector<std::string>> paths;
  std::vector<double> level_similarity;

  static Hierarchy validated(std::vector<std::vector<std::string>> paths,
                             std::vector<double> level_similarity);
  int levels() const { return static_cast<int>(level_similarity.size()) - 1; }
};

// Z_ij = exp(-tau * D_ij). Positive definite for every tau > 0 iff the metric
// is of negative type.
SimilarityMatrix similarity_from_metric(const DistanceMatrix& D, double tau);

// tau such that the median off-diagonal similarity exp(-tau d) hits the
// target; bisection over [1e-12, 1e12] (the median is decreasing in tau).
double calibrate_tau(const DistanceMatrix& D, double target_median_similarity);

SimilarityMatrix similarity_from_hierarchy(const Hierarchy& h);

// Z_ij = 1 - D_ij / max(D). PD is checked numerically: the sufficient
// condition (1 an eigenvector of D) rarely holds in real data.
SimilarityMatrix similarity_linear_from_metric(const DistanceMatrix& D);

// delta*I + (1-delta)*M for PSD M; raises the smallest eigenvalue to >= delta.
SimilarityMatrix lift_psd_to_pd(const SimilarityMatrix& M, double delta);

struct NearestPdOptions {
  double delta = 1e-6;            // required smallest eigenvalue
  double offdiag_cap = 1.0 - 1e-9;
  int max_iters = 10000;
  double tol = 1e-10;             // Frobenius change between sweeps
};

struct NearestPdResult {
  SimilarityMatrix similarity;
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
};

// Frobenius-nearest similarity matrix with lambda_min >= delta, computed by
// Dykstra-corrected alternating projections between the spectral set and the
// box/diagonal set. Non-convergence returns the best iterate, flagged.
NearestPdResult nearest_pd_similarity(const Eigen::MatrixXd& M,
                                      const NearestPdOptions& opts = {});

struct NegativeTypeResult {
  bool negative_type = false;    // v'Dv <= tol for all v orthogonal to 1
  bool strictly = false;         // v'Dv < -tol on that subspace
  double lambda_min_constrained = 0.0;  // smallest eigenvalue of -B'DB
};

// Checked via the eigenvalues of -B'DB where B is an orthonormal basis of the
// complement of span(1). tol_rel is relative to the largest distance.
NegativeTypeResult is_negative_type(const DistanceMatrix& D,
                                    double tol_rel = 1e-9);

struct PdCheck {
  bool positive_definite = false;
  double lambda_min = 0.0;
};

PdCheck is_positive_definite(const SimilarityMatrix& Z, double tol = kPdTol);

}  // namespace sadiv

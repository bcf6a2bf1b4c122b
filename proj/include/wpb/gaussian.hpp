#pragma once

#include <Eigen/Dense>

#include "wpb/rng.hpp"

namespace wpb {

/// Multivariate Gaussian with symmetric positive definite covariance.
///
/// The constructor symmetrizes covariances whose asymmetry is within 1e-10
/// (measured entrywise against (A + A^T)/2) and rejects anything worse, as
/// well as any covariance with an eigenvalue below 1e-12.
class GaussianMeasure {
 public:
  GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  Eigen::Index dim() const { return mean_.size(); }

  /// Eigenvalues of the covariance in increasing order.
  const Eigen::VectorXd& cov_eigenvalues() const { return cov_eigs_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::VectorXd cov_eigs_;
};

/// Set of Gaussians with mean norm at most `bigM` and covariance spectrum
/// inside [alpha, beta].
struct CompactClass {
  double alpha;
  double beta;
  double bigM;

  CompactClass(double alpha_in, double beta_in, double bigM_in);

  bool contains(const GaussianMeasure& g, double tol = 1e-9) const;
};

/// Cloud of n points in R^d stored row-wise.
struct SampleCloud {
  Eigen::MatrixXd points;  // n x d

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

/// 2-Wasserstein distance between Gaussians (Bures metric):
///   sqrt(|m1 - m2|^2 + tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2})).
double w2_gaussian(const GaussianMeasure& a, const GaussianMeasure& b);

/// KL(a || b) between Gaussians.
double kl_gaussian(const GaussianMeasure& a, const GaussianMeasure& b);

/// Smallest radius R such that, for every Gaussian in the class, the mass and
/// first two moments outside the R-ball are controlled at rate 1/m. Maximum
/// of three closed-form conditions; requires m >= 1 and d >= 1.
double rad_radius(const CompactClass& cls, int m, int d);

/// Bound on Q(|X| > R) at the radius above, uniform over the class:
/// beta * sqrt(2 beta) / m.
double tail_mass_bound(const CompactClass& cls, int m);

/// Bounds on E[|X| 1{|X|>R}] and E[|X|^2 1{|X|>R}] at the radius above:
/// (M+1) beta sqrt(2 beta) / m and (M+1)^2 beta sqrt(2 beta) / m.
struct TruncatedMomentBounds {
  double first_moment;
  double second_moment;
};
TruncatedMomentBounds truncated_moment_bounds(const CompactClass& cls, int m);

/// Euclidean projection onto the centered closed ball of radius R.
Eigen::VectorXd project_ball(const Eigen::VectorXd& x, double R);

/// Draw n independent samples.
SampleCloud sample(const GaussianMeasure& g, Eigen::Index n, RngStream& rng);

/// Mean and covariance of a cloud (covariance with 1/n normalization, floored
/// to stay usable as a GaussianMeasure).
GaussianMeasure moments_of(const SampleCloud& cloud);

}  // namespace wpb

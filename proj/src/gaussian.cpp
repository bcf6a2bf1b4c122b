#include "wpb/gaussian.hpp"

#include <cmath>
#include <sstream>

#include "wpb/common.hpp"

namespace wpb {

namespace {

constexpr double kAsymmetryTol = 1e-10;
constexpr double kMinEigenvalue = 1e-12;

}  // namespace

GaussianMeasure::GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols()) {
    throw ConfigError("covariance must be square");
  }
  if (covariance_.rows() != mean_.size()) {
    throw ConfigError("mean and covariance dimensions disagree");
  }
  if (mean_.size() == 0) {
    throw ConfigError("dimension must be positive");
  }
  const Eigen::MatrixXd sym = 0.5 * (covariance_ + covariance_.transpose());
  const double asym = (covariance_ - sym).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol) {
    std::ostringstream msg;
    msg << "covariance asymmetry " << asym << " exceeds tolerance " << kAsymmetryTol;
    throw ConfigError(msg.str());
  }
  covariance_ = sym;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition failed");
  }
  cov_eigs_ = es.eigenvalues();
  if (cov_eigs_.minCoeff() < kMinEigenvalue) {
    std::ostringstream msg;
    msg << "covariance not positive definite: min eigenvalue " << cov_eigs_.minCoeff();
    throw ConfigError(msg.str());
  }
}

CompactClass::CompactClass(double alpha_in, double beta_in, double bigM_in)
    : alpha(alpha_in), beta(beta_in), bigM(bigM_in) {
  if (!(alpha > 0.0)) throw ConfigError("compact class needs alpha > 0");
  if (!(beta >= alpha)) throw ConfigError("compact class needs beta >= alpha");
  if (!(bigM >= 0.0)) throw ConfigError("compact class needs bigM >= 0");
}

bool CompactClass::contains(const GaussianMeasure& g, double tol) const {
  if (g.mean().norm() > bigM + tol) return false;
  const auto& eigs = g.cov_eigenvalues();
  return eigs.minCoeff() >= alpha - tol && eigs.maxCoeff() <= beta + tol;
}

double w2_gaussian(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) throw ConfigError("w2_gaussian: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(a.covariance());
  if (es_a.info() != Eigen::Success) {
    throw NumericError("w2_gaussian: eigendecomposition failed");
  }
  const Eigen::MatrixXd root_a = es_a.operatorSqrt();
  const Eigen::MatrixXd inner = root_a * b.covariance() * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_inner(0.5 * (inner + inner.transpose()),
                                                          Eigen::EigenvaluesOnly);
  if (es_inner.info() != Eigen::Success) {
    throw NumericError("w2_gaussian: eigendecomposition failed");
  }
  // Cross term tr((S1^{1/2} S2 S1^{1/2})^{1/2}) as a sum of eigenvalue roots;
  // tiny negatives from roundoff are clamped to zero.
  const double cross = es_inner.eigenvalues().array().max(0.0).sqrt().sum();
  const double mean_sq = (a.mean() - b.mean()).squaredNorm();
  const double bures_sq =
      a.covariance().trace() + b.covariance().trace() - 2.0 * cross;
  return std::sqrt(std::max(mean_sq + bures_sq, 0.0));
}

double kl_gaussian(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) throw ConfigError("kl_gaussian: dimension mismatch");
  const Eigen::Index d = a.dim();
  Eigen::LLT<Eigen::MatrixXd> llt_b(b.covariance());
  if (llt_b.info() != Eigen::Success) {
    throw NumericError("kl_gaussian: covariance factorization failed");
  }
  const Eigen::MatrixXd sol = llt_b.solve(a.covariance());
  const Eigen::VectorXd diff = b.mean() - a.mean();
  const double quad = diff.dot(llt_b.solve(diff));
  const double logdet_b =
      2.0 * llt_b.matrixL().toDenseMatrix().diagonal().array().log().sum();
  Eigen::LLT<Eigen::MatrixXd> llt_a(a.covariance());
  if (llt_a.info() != Eigen::Success) {
    throw NumericError("kl_gaussian: covariance factorization failed");
  }
  const double logdet_a =
      2.0 * llt_a.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * (sol.trace() + quad - static_cast<double>(d) + logdet_b - logdet_a);
}

double rad_radius(const CompactClass& cls, int m, int d) {
  if (m < 1) throw ConfigError("rad_radius: m must be >= 1");
  if (d < 1) throw ConfigError("rad_radius: d must be >= 1");
  const double alpha = cls.alpha;
  const double beta = cls.beta;
  const double bigM = cls.bigM;
  const double dm = static_cast<double>(m);
  const double dd = static_cast<double>(d);

  const double cond1 = bigM + 1.0;
  // Floored at zero so that for very small d, beta the other conditions win.
  const double bracket =
      dd * std::log(dd * std::sqrt(beta) / std::sqrt(M_PI * alpha)) + 2.0 * std::log(dm);
  const double cond2 = bigM + std::sqrt(2.0 * beta) * std::sqrt(std::max(bracket, 0.0));
  const double cond3 = bigM + std::sqrt(2.0 * beta) * std::sqrt(1.0 + dd / 2.0);
  return std::max({cond1, cond2, cond3});
}

double tail_mass_bound(const CompactClass& cls, int m) {
  if (m < 1) throw ConfigError("tail_mass_bound: m must be >= 1");
  return cls.beta * std::sqrt(2.0 * cls.beta) / static_cast<double>(m);
}

TruncatedMomentBounds truncated_moment_bounds(const CompactClass& cls, int m) {
  const double base = tail_mass_bound(cls, m);
  const double mp1 = cls.bigM + 1.0;
  return TruncatedMomentBounds{mp1 * base, mp1 * mp1 * base};
}

Eigen::VectorXd project_ball(const Eigen::VectorXd& x, double R) {
  if (R < 0.0) throw ConfigError("project_ball: R must be >= 0");
  const double n = x.norm();
  if (n <= R) return x;
  if (n == 0.0) return x;
  return (R / n) * x;
}

SampleCloud sample(const GaussianMeasure& g, Eigen::Index n, RngStream& rng) {
  if (n < 0) throw ConfigError("sample: n must be >= 0");
  Eigen::LLT<Eigen::MatrixXd> llt(g.covariance());
  if (llt.info() != Eigen::Success) {
    throw NumericError("sample: covariance factorization failed");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  SampleCloud cloud;
  cloud.points.resize(n, g.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    cloud.points.row(i) = (g.mean() + L * rng.normal_vector(g.dim())).transpose();
  }
  return cloud;
}

GaussianMeasure moments_of(const SampleCloud& cloud) {
  const Eigen::Index n = cloud.size();
  if (n < 2) throw ConfigError("moments_of: need at least two points");
  const Eigen::VectorXd mean = cloud.points.colwise().mean();
  const Eigen::MatrixXd centered = cloud.points.rowwise() - mean.transpose();
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n);
  // Floor the spectrum so degenerate clouds still yield a usable measure.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NumericError("moments_of: eigendecomposition failed");
  }
  const Eigen::VectorXd eigs = es.eigenvalues().array().max(1e-10).matrix();
  cov = es.eigenvectors() * eigs.asDiagonal() * es.eigenvectors().transpose();
  return GaussianMeasure(mean, cov);
}

}  // namespace wpb

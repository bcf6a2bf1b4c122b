#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wpb/gaussian.hpp"
#include "wpb/losses.hpp"
#include "wpb/rng.hpp"

namespace wpb {

/// Potential of a Gibbs measure over predictors,
///   V(h) = scale * ( coef * R_S(h) + (h - m_P)^T Sigma_P^{-1} (h - m_P) / 2 ),
/// where coef = lambda / (2K) when scale_by_2K (K the loss Lipschitz constant)
/// and coef = lambda otherwise. The measure exp(-V) / Z has density known up
/// to the constant Z; value() omits additive constants accordingly.
class GibbsPotential {
 public:
  GibbsPotential(LossModel loss, Dataset dataset, GaussianMeasure prior, double lambda,
                 bool scale_by_2K, double scale = 1.0);

  double value(const Eigen::VectorXd& h) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& h) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& h) const;

  const LossModel& loss() const { return loss_; }
  const Dataset& dataset() const { return dataset_; }
  const GaussianMeasure& prior() const { return prior_; }
  double lambda() const { return lambda_; }
  bool scale_by_2K() const { return scale_by_2K_; }
  double scale() const { return scale_; }
  /// coef above: weight multiplying the empirical risk before scaling.
  double risk_coefficient() const { return coef_; }
  Eigen::Index dim() const { return prior_.dim(); }

  /// Same potential divided by divisor (tempered measure).
  GibbsPotential rescaled(double divisor) const;

 private:
  LossModel loss_;
  Dataset dataset_;
  GaussianMeasure prior_;
  double lambda_;
  bool scale_by_2K_;
  double scale_;
  double coef_;
  RiskEvaluator risk_;
  Eigen::MatrixXd prior_precision_;
};

/// Normalization putting the potential's curvature inside [alpha, 1]:
/// divides by beta_v = coef * L + 1/gamma_min (L the loss smoothness bound,
/// gamma_min/gamma_max the extreme prior covariance eigenvalues) and certifies
///   alpha = (coef * curvature_lo + 1/gamma_max) / beta_v.
/// Requires a centered prior with covariance spectrum inside (0, 1] and
/// alpha > 0; the normalized potential is again a Gibbs potential with
/// lambda_eff = lambda / beta_v against the prior N(0, gamma beta_v I).
struct A3Normalization {
  GibbsPotential potential;
  double alpha;
  double beta_v;
  double lambda_eff;
};
A3Normalization a3_normalize(const GibbsPotential& gp);

/// Exact Gibbs measure for the plain quadratic loss: a Gaussian with
/// precision scale * (coef I + Sigma_P^{-1}).
GaussianMeasure gibbs_closed_form(const GibbsPotential& gp);

/// Unadjusted Langevin: x <- x - step grad V(x) + sqrt(2 step) xi.
struct UlaOptions {
  double step = 1e-3;
  Eigen::Index burn_in = 1000;
  Eigen::Index thinning = 10;
};

/// Draws n points (after burn-in, keeping every thinning-th state) starting
/// from the prior mean. Raises NumericError if the chain leaves the 1e6 ball.
SampleCloud ula_sample(const GibbsPotential& gp, Eigen::Index n, const UlaOptions& options,
                       RngStream& rng);

/// Monte Carlo estimate of E[ |X| 1{|X| > R} ] under the Gibbs measure, via
/// ULA; the standard error uses batch means to absorb autocorrelation.
struct FREstimate {
  double estimate;
  double std_error;
};
FREstimate estimate_f_R(const GibbsPotential& gp, double R, Eigen::Index n,
                        const UlaOptions& options, RngStream& rng);

/// Standard error of the mean of a correlated sequence via batch means.
double batch_means_se(const std::vector<double>& values);

}  // namespace wpb

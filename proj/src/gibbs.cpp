#include "wpb/gibbs.hpp"

#include <cmath>

#include "wpb/common.hpp"

namespace wpb {

GibbsPotential::GibbsPotential(LossModel loss, Dataset dataset, GaussianMeasure prior,
                               double lambda, bool scale_by_2K, double scale)
    : loss_(std::move(loss)),
      dataset_(std::move(dataset)),
      prior_(std::move(prior)),
      lambda_(lambda),
      scale_by_2K_(scale_by_2K),
      scale_(scale) {
  if (!(lambda_ >= 0.0)) throw ConfigError("gibbs potential needs lambda >= 0");
  if (!(scale_ > 0.0)) throw ConfigError("gibbs potential needs scale > 0");
  if (loss_.dim_h != prior_.dim()) {
    throw ConfigError("loss predictor dimension and prior dimension disagree");
  }
  if (dataset_.dim() != loss_.dim_z) {
    throw ConfigError("dataset dimension and loss data dimension disagree");
  }
  if (scale_by_2K_) {
    if (std::isnan(loss_.lipschitz) || !(loss_.lipschitz > 0.0)) {
      throw ConfigError("scale_by_2K needs a loss with a positive Lipschitz constant");
    }
    coef_ = lambda_ / (2.0 * loss_.lipschitz);
  } else {
    coef_ = lambda_;
  }
  risk_ = loss_.make_risk(dataset_);
  Eigen::LLT<Eigen::MatrixXd> llt(prior_.covariance());
  if (llt.info() != Eigen::Success) {
    throw NumericError("gibbs potential: prior covariance factorization failed");
  }
  prior_precision_ = llt.solve(Eigen::MatrixXd::Identity(prior_.dim(), prior_.dim()));
}

double GibbsPotential::value(const Eigen::VectorXd& h) const {
  const Eigen::VectorXd centered = h - prior_.mean();
  return scale_ * (coef_ * risk_.value(h) +
                   0.5 * centered.dot(prior_precision_ * centered));
}

Eigen::VectorXd GibbsPotential::gradient(const Eigen::VectorXd& h) const {
  return scale_ * (coef_ * risk_.gradient(h) + prior_precision_ * (h - prior_.mean()));
}

Eigen::MatrixXd GibbsPotential::hessian(const Eigen::VectorXd& h) const {
  return scale_ * (coef_ * risk_.hessian(h) + prior_precision_);
}

GibbsPotential GibbsPotential::rescaled(double divisor) const {
  if (!(divisor > 0.0)) throw ConfigError("rescaled: divisor must be > 0");
  return GibbsPotential(loss_, dataset_, prior_, lambda_, scale_by_2K_, scale_ / divisor);
}

A3Normalization a3_normalize(const GibbsPotential& gp) {
  const LossModel& loss = gp.loss();
  if (std::isnan(loss.smoothness) || std::isnan(loss.curvature_lo)) {
    throw ConfigError("a3_normalize needs loss smoothness and curvature bounds");
  }
  if (gp.prior().mean().norm() > 1e-12) {
    throw ConfigError("a3_normalize needs a centered prior");
  }
  const Eigen::VectorXd prior_eigs = gp.prior().cov_eigenvalues();
  const double gamma_min = prior_eigs.minCoeff();
  const double gamma_max = prior_eigs.maxCoeff();
  if (gamma_max > 1.0 + 1e-12) {
    throw ConfigError("a3_normalize needs prior covariance eigenvalues <= 1");
  }
  const double s = gp.scale();
  const double coef = gp.risk_coefficient();
  const double beta_v = s * (coef * loss.smoothness + 1.0 / gamma_min);
  const double alpha = s * (coef * loss.curvature_lo + 1.0 / gamma_max) / beta_v;
  if (!(alpha > 0.0)) {
    throw ConfigError("a3_normalize: certified curvature lower bound is not positive");
  }
  A3Normalization out{gp.rescaled(beta_v), alpha, beta_v, gp.lambda() * s / beta_v};
  return out;
}

GaussianMeasure gibbs_closed_form(const GibbsPotential& gp) {
  if (gp.loss().name != "quadratic_plain") {
    throw ConfigError("gibbs_closed_form applies to the quadratic_plain loss only");
  }
  const Eigen::Index d = gp.dim();
  const Eigen::VectorXd zbar = gp.dataset().points.colwise().mean();
  Eigen::LLT<Eigen::MatrixXd> prior_llt(gp.prior().covariance());
  if (prior_llt.info() != Eigen::Success) {
    throw NumericError("gibbs_closed_form: prior factorization failed");
  }
  const Eigen::MatrixXd prior_prec = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const double coef = gp.risk_coefficient();
  const Eigen::MatrixXd a = coef * Eigen::MatrixXd::Identity(d, d) + prior_prec;
  const Eigen::VectorXd rhs = coef * zbar + prior_prec * gp.prior().mean();
  Eigen::LLT<Eigen::MatrixXd> a_llt(a);
  if (a_llt.info() != Eigen::Success) {
    throw NumericError("gibbs_closed_form: precision factorization failed");
  }
  const Eigen::VectorXd mean = a_llt.solve(rhs);
  const Eigen::MatrixXd cov =
      a_llt.solve(Eigen::MatrixXd::Identity(d, d)) / gp.scale();
  return GaussianMeasure(mean, 0.5 * (cov + cov.transpose()));
}

namespace {

constexpr double kUlaDivergenceRadius = 1e6;

void check_ula(const UlaOptions& options) {
  if (!(options.step > 0.0)) throw ConfigError("ula needs step > 0");
  if (options.burn_in < 0) throw ConfigError("ula needs burn_in >= 0");
  if (options.thinning < 1) throw ConfigError("ula needs thinning >= 1");
}

}  // namespace

SampleCloud ula_sample(const GibbsPotential& gp, Eigen::Index n, const UlaOptions& options,
                       RngStream& rng) {
  check_ula(options);
  if (n < 1) throw ConfigError("ula_sample needs n >= 1");
  const double root = std::sqrt(2.0 * options.step);
  Eigen::VectorXd x = gp.prior().mean();
  SampleCloud cloud;
  cloud.points.resize(n, gp.dim());
  Eigen::Index kept = 0;
  Eigen::Index step_index = 0;
  while (kept < n) {
    x = x - options.step * gp.gradient(x) + root * rng.normal_vector(gp.dim());
    ++step_index;
    if (x.norm() > kUlaDivergenceRadius) {
      throw NumericError("ula_sample: chain diverged (norm exceeded 1e6)");
    }
    if (step_index > options.burn_in &&
        (step_index - options.burn_in) % options.thinning == 0) {
      cloud.points.row(kept++) = x.transpose();
    }
  }
  return cloud;
}

FREstimate estimate_f_R(const GibbsPotential& gp, double R, Eigen::Index n,
                        const UlaOptions& options, RngStream& rng) {
  if (!(R >= 0.0)) throw ConfigError("estimate_f_R needs R >= 0");
  if (n < 4) throw ConfigError("estimate_f_R needs n >= 4");
  const SampleCloud cloud = ula_sample(gp, n, options, rng);
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = cloud.points.row(i).norm();
    vals[static_cast<std::size_t>(i)] = norm > R ? norm : 0.0;
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(n);
  return FREstimate{mean, batch_means_se(vals)};
}

double batch_means_se(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 4) throw ConfigError("batch_means_se needs at least 4 values");
  const std::size_t n_batches =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::sqrt(
                                   static_cast<double>(n)))));
  const std::size_t batch = n / n_batches;
  std::vector<double> means;
  means.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (std::size_t i = b * batch; i < (b + 1) * batch; ++i) acc += values[i];
    means.push_back(acc / static_cast<double>(batch));
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(n_batches);
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(n_batches - 1);
  return std::sqrt(var / static_cast<double>(n_batches));
}

}  // namespace wpb

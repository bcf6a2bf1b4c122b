#include "wpb/bwsgd.hpp"

#include <cmath>

#include "wpb/common.hpp"

namespace wpb {

namespace {

void check_config(const BwSgdConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw ConfigError("bwsgd needs alpha in (0, 1]");
  }
  if (!(cfg.eta > 0.0)) throw ConfigError("bwsgd needs eta > 0");
  if (cfg.eta > cfg.alpha * cfg.alpha / 60.0 + 1e-15) {
    throw ConfigError("bwsgd needs eta <= alpha^2 / 60");
  }
  if (!(cfg.bigM >= 0.0)) throw ConfigError("bwsgd needs bigM >= 0");
  if (cfg.steps < 0) throw ConfigError("bwsgd needs steps >= 0");
}

void check_init(const GaussianMeasure& init, const BwSgdConfig& cfg) {
  const double lo = cfg.alpha / 9.0;
  const double hi = 1.0 / cfg.alpha;
  const auto& eigs = init.cov_eigenvalues();
  if (eigs.minCoeff() < lo - 1e-12 || eigs.maxCoeff() > hi + 1e-12) {
    throw ConfigError("bwsgd init covariance spectrum must lie in [alpha/9, 1/alpha]");
  }
  if (init.mean().norm() > cfg.bigM + 1e-12) {
    throw ConfigError("bwsgd init mean must lie in the bigM-ball");
  }
}

}  // namespace

GaussianMeasure SgdTrajectory::iterate(Eigen::Index k) const {
  if (k < 0 || k >= size()) throw ConfigError("trajectory index out of range");
  return GaussianMeasure(means[static_cast<std::size_t>(k)],
                         covariances[static_cast<std::size_t>(k)]);
}

GaussianMeasure bwsgd_step_at(const GibbsPotential& gp, const GaussianMeasure& q,
                              const Eigen::VectorXd& x, const BwSgdConfig& cfg,
                              long long* lower_clips) {
  check_config(cfg);
  const Eigen::Index d = q.dim();
  if (x.size() != d) throw ConfigError("bwsgd_step_at: point dimension mismatch");

  const Eigen::VectorXd grad = gp.gradient(x);
  const Eigen::MatrixXd hess = gp.hessian(x);

  Eigen::LLT<Eigen::MatrixXd> llt(q.covariance());
  if (llt.info() != Eigen::Success) {
    throw NumericError("bwsgd_step_at: covariance factorization failed");
  }
  const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(d, d));

  const Eigen::VectorXd mean_next = project_ball(q.mean() - cfg.eta * grad, cfg.bigM);

  const Eigen::MatrixXd m_k =
      Eigen::MatrixXd::Identity(d, d) - cfg.eta * (hess - precision);
  Eigen::MatrixXd cov_next = m_k * q.covariance() * m_k.transpose();
  cov_next = 0.5 * (cov_next + cov_next.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_next);
  if (es.info() != Eigen::Success) {
    throw NumericError("bwsgd_step_at: eigendecomposition failed");
  }
  const double hi = 1.0 / cfg.alpha;
  const double lo = cfg.alpha / 9.0;
  Eigen::VectorXd eigs = es.eigenvalues();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (eigs(i) < lo) {
      eigs(i) = lo;
      if (lower_clips) ++*lower_clips;
    }
    if (eigs(i) > hi) eigs(i) = hi;
  }
  cov_next = es.eigenvectors() * eigs.asDiagonal() * es.eigenvectors().transpose();
  return GaussianMeasure(mean_next, 0.5 * (cov_next + cov_next.transpose()));
}

GaussianMeasure bwsgd_step(const GibbsPotential& gp, const GaussianMeasure& q,
                           const BwSgdConfig& cfg, RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(q.covariance());
  if (llt.info() != Eigen::Success) {
    throw NumericError("bwsgd_step: covariance factorization failed");
  }
  const Eigen::VectorXd x =
      q.mean() + Eigen::MatrixXd(llt.matrixL()) * rng.normal_vector(q.dim());
  return bwsgd_step_at(gp, q, x, cfg);
}

SgdTrajectory bwsgd_run(const GibbsPotential& gp, const GaussianMeasure& init,
                        const BwSgdConfig& cfg, RngStream& rng,
                        const GaussianMeasure* reference) {
  check_config(cfg);
  check_init(init, cfg);
  if (gp.dim() != init.dim()) throw ConfigError("bwsgd_run: dimension mismatch");

  SgdTrajectory traj;
  traj.means.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.covariances.reserve(static_cast<std::size_t>(cfg.steps) + 1);

  GaussianMeasure q = init;
  const Eigen::Index d = init.dim();
  auto record = [&](const GaussianMeasure& g) {
    traj.means.push_back(g.mean());
    traj.covariances.push_back(g.covariance());
    if (reference) {
      const double w2 = w2_gaussian(g, *reference);
      traj.w2sq_to_reference.push_back(w2 * w2);
    }
  };
  record(q);
  for (long long k = 0; k < cfg.steps; ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(q.covariance());
    if (llt.info() != Eigen::Success) {
      throw NumericError("bwsgd_run: covariance factorization failed");
    }
    const Eigen::VectorXd x =
        q.mean() + Eigen::MatrixXd(llt.matrixL()) * rng.normal_vector(d);
    q = bwsgd_step_at(gp, q, x, cfg, &traj.lower_clip_count);
    record(q);
  }
  return traj;
}

GaussianMeasure bwsgd_final(const GibbsPotential& gp, const GaussianMeasure& init,
                            const BwSgdConfig& cfg, RngStream& rng,
                            long long* lower_clips) {
  check_config(cfg);
  check_init(init, cfg);
  if (gp.dim() != init.dim()) throw ConfigError("bwsgd_final: dimension mismatch");
  GaussianMeasure q = init;
  const Eigen::Index d = init.dim();
  for (long long k = 0; k < cfg.steps; ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(q.covariance());
    if (llt.info() != Eigen::Success) {
      throw NumericError("bwsgd_final: covariance factorization failed");
    }
    const Eigen::VectorXd x =
        q.mean() + Eigen::MatrixXd(llt.matrixL()) * rng.normal_vector(d);
    q = bwsgd_step_at(gp, q, x, cfg, lower_clips);
  }
  return q;
}

double lambert_bound(double alpha, double eta, long long k, double w2sq_init, int d) {
  if (!(alpha > 0.0)) throw ConfigError("lambert_bound needs alpha > 0");
  if (!(eta > 0.0)) throw ConfigError("lambert_bound needs eta > 0");
  if (k < 0) throw ConfigError("lambert_bound needs k >= 0");
  if (!(w2sq_init >= 0.0)) throw ConfigError("lambert_bound needs w2sq_init >= 0");
  if (d < 1) throw ConfigError("lambert_bound needs d >= 1");
  return std::exp(-alpha * static_cast<double>(k) * eta) * w2sq_init +
         36.0 * static_cast<double>(d) * eta / (alpha * alpha);
}

Schedule schedule_for_accuracy(double alpha, int d, double eps, double w2sq_init,
                               double c_sched) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("schedule_for_accuracy needs alpha in (0, 1]");
  }
  if (d < 1) throw ConfigError("schedule_for_accuracy needs d >= 1");
  if (!(eps > 0.0)) throw ConfigError("schedule_for_accuracy needs eps > 0");
  if (!(w2sq_init >= 0.0)) throw ConfigError("schedule_for_accuracy needs w2sq_init >= 0");
  if (!(c_sched > 0.0)) throw ConfigError("schedule_for_accuracy needs c_sched > 0");

  const double dd = static_cast<double>(d);
  const double eta = std::min(alpha * alpha * eps * eps / (72.0 * dd),
                              alpha * alpha / 60.0);
  const double w2_init = std::sqrt(w2sq_init);
  const double n_rate = std::ceil(c_sched * (dd / (alpha * alpha * alpha * eps * eps)) *
                                  std::log(std::max(w2_init / eps, std::exp(1.0))));
  // Drives the exponential term below eps^2 / 2; the eta choice already puts
  // the noise floor 36 d eta / alpha^2 at or below eps^2 / 2.
  const double n_decay =
      std::ceil(std::log(std::max(2.0 * w2sq_init / (eps * eps), 1.0)) / (alpha * eta));
  const double n = std::max(n_rate, n_decay);
  if (!(n < 9.0e18)) throw NumericError("schedule_for_accuracy: step count overflows");
  Schedule s{eta, static_cast<long long>(n)};
  if (lambert_bound(alpha, s.eta, s.steps, w2sq_init, d) > eps * eps + 1e-12) {
    throw NumericError("schedule_for_accuracy: internal guarantee violated");
  }
  return s;
}

}  // namespace wpb

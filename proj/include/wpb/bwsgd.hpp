#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wpb/gaussian.hpp"
#include "wpb/gibbs.hpp"
#include "wpb/rng.hpp"

namespace wpb {

/// Stochastic Gaussian variational step configuration. The potential is
/// expected to have curvature inside [alpha, 1] (see a3_normalize); eta must
/// not exceed alpha^2 / 60 and iterate means are projected onto the
/// bigM-ball. Covariance eigenvalues are clipped from above at 1/alpha per
/// the update rule; the alpha/9 lower clamp is defensive and counted.
struct BwSgdConfig {
  double eta = 0.0;
  long long steps = 0;
  double alpha = 0.0;
  double bigM = 0.0;
};

struct SgdTrajectory {
  std::vector<Eigen::VectorXd> means;          // steps + 1 entries
  std::vector<Eigen::MatrixXd> covariances;    // steps + 1 entries
  std::vector<double> w2sq_to_reference;       // empty when no reference given
  long long lower_clip_count = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(means.size()); }
  GaussianMeasure iterate(Eigen::Index k) const;
};

/// One update with the linearization point x injected (deterministic):
///   mean <- project( mean - eta grad V(x) ),
///   cov  <- clip( M cov M ),  M = I - eta (hess V(x) - cov^{-1}).
GaussianMeasure bwsgd_step_at(const GibbsPotential& gp, const GaussianMeasure& q,
                              const Eigen::VectorXd& x, const BwSgdConfig& cfg,
                              long long* lower_clips = nullptr);

/// One update with x drawn from q.
GaussianMeasure bwsgd_step(const GibbsPotential& gp, const GaussianMeasure& q,
                           const BwSgdConfig& cfg, RngStream& rng);

/// Full run from init; records every iterate and, when reference is given,
/// the squared Gaussian 2-Wasserstein distance to it.
SgdTrajectory bwsgd_run(const GibbsPotential& gp, const GaussianMeasure& init,
                        const BwSgdConfig& cfg, RngStream& rng,
                        const GaussianMeasure* reference = nullptr);

/// Same dynamics but keeps only the final iterate; for long schedules where
/// storing the trajectory would dominate memory.
GaussianMeasure bwsgd_final(const GibbsPotential& gp, const GaussianMeasure& init,
                            const BwSgdConfig& cfg, RngStream& rng,
                            long long* lower_clips = nullptr);

/// Expected contraction envelope after k steps:
///   exp(-alpha k eta) w2sq_init + 36 d eta / alpha^2.
double lambert_bound(double alpha, double eta, long long k, double w2sq_init, int d);

/// Step size and iteration count meeting lambert_bound <= eps^2: eta is
/// min(alpha^2 eps^2 / (72 d), alpha^2 / 60) and the step count is the max of
/// the c_sched * (d / (alpha^3 eps^2)) * log(max(w2_init / eps, e)) rate and
/// the count that drives the exponential term below eps^2 / 2.
struct Schedule {
  double eta;
  long long steps;
};
Schedule schedule_for_accuracy(double alpha, int d, double eps, double w2sq_init,
                               double c_sched = 2.0);

}  // namespace wpb

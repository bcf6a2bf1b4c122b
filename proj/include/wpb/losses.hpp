#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "wpb/gaussian.hpp"
#include "wpb/rng.hpp"

namespace wpb {

/// Training set: one data point per row.
struct Dataset {
  Eigen::MatrixXd points;  // m x dim_z

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

/// Callable view of the empirical risk h -> (1/m) sum_i loss(h, z_i) with its
/// derivatives. Built once per dataset; builtin losses replace the naive
/// O(m d) loop by an exact sufficient-statistic reduction where one exists.
struct RiskEvaluator {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

/// A loss with its derivatives and certified analytic constants. Constants
/// that do not apply are quiet NaN (e.g. lipschitz for the plain quadratic).
struct LossModel {
  std::string name;
  int dim_h = 0;  // predictor dimension
  int dim_z = 0;  // data point dimension

  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> hessian;

  double lipschitz = std::numeric_limits<double>::quiet_NaN();      // K
  double smoothness = std::numeric_limits<double>::quiet_NaN();     // L
  double grad_at_zero = std::numeric_limits<double>::quiet_NaN();   // D
  double value_at_zero = std::numeric_limits<double>::quiet_NaN();  // D_ell
  double curvature_lo = std::numeric_limits<double>::quiet_NaN();   // min Hessian eigenvalue, global
  double convex_radius = std::numeric_limits<double>::infinity();   // certified convex ball radius
  bool bounded01 = false;        // values in [0, 1] for all h, z
  bool satisfies_A1 = false;     // uniformly Lipschitz in h
  bool satisfies_A2 = false;     // smooth with bounded gradient at 0

  std::function<RiskEvaluator(const Dataset&)> make_risk;
};

/// Builtins:
///   "quadratic_plain"        params: dim, z_bound (default 0)
///   "bounded_sigmoid_margin" params: dim, x_bound (default 1)
///   "quadratic_feature"      params: dim, scale (default 1), psi_scale (default 1)
LossModel builtin_loss(const std::string& name, const std::map<std::string, double>& params);

/// Lipschitz constant on the centered R-ball for smooth losses: D + L R.
double effective_lipschitz_on_ball(const LossModel& loss, double R);

/// Data generators:
///   "gaussian" params: dim, sigma (default 1)
///   "margin"   params: dim, x_bound (default 1), flip_prob (default 0.1);
///              emits (x, y) rows with x uniform on the x_bound-sphere and
///              y = +-1, the sign of x_0 flipped with probability flip_prob.
struct DataModel {
  std::string name;
  int dim_z = 0;
  std::function<Eigen::VectorXd(RngStream&)> draw;
};
DataModel make_data_model(const std::string& name, const std::map<std::string, double>& params);

Dataset draw_dataset(const DataModel& model, Eigen::Index m, RngStream& rng);

double empirical_risk(const LossModel& loss, const Dataset& data, const Eigen::VectorXd& h);

/// Monte Carlo estimate of E_{h~cloud}[ R_out(h) - R_S(h) ] where R_out uses
/// n_test fresh draws per predictor, so the per-predictor gaps are
/// independent and the standard error is std / sqrt(#predictors).
struct GapEstimate {
  double estimate;
  double std_error;
};
GapEstimate gap_estimate(const LossModel& loss, const DataModel& model, const Dataset& data,
                         const SampleCloud& predictors, Eigen::Index n_test, RngStream& rng);

}  // namespace wpb

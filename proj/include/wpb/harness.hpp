#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wpb/bounds.hpp"
#include "wpb/bwsgd.hpp"
#include "wpb/gibbs.hpp"
#include "wpb/losses.hpp"

namespace wpb {

/// Index-parallel loop. Thread count is min(WPB_THREADS if set, hardware
/// concurrency, n); each index runs with its own state so results do not
/// depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Dispatch by bound name. "constant" returns constant_value as the bound
/// (a +infinity-like surrogate for harness smoke tests).
BoundReport evaluate_bound(const std::string& name, const BoundInputs& inputs,
                           double constant_value = std::numeric_limits<double>::quiet_NaN());

/// Monte Carlo campaign checking gap <= bound across fresh datasets.
struct ExperimentConfig {
  std::string loss_name;
  std::map<std::string, double> loss_params;
  std::string data_name;
  std::map<std::string, double> data_params;
  int m = 0;

  std::string bound_name;
  BoundInputs inputs;              // w1 is overwritten per trial
  double constant_value = std::numeric_limits<double>::quiet_NaN();

  Eigen::VectorXd posterior_mean;  // posterior N(mean, cov_scale I)
  double posterior_cov_scale = 1.0;
  Eigen::VectorXd prior_mean;      // prior N(mean, cov_scale I)
  double prior_cov_scale = 1.0;
  bool project_to_R = false;       // project predictors and OT clouds onto the R-ball

  int trials = 0;
  Eigen::Index n_h = 64;           // predictors per gap estimate
  Eigen::Index n_test = 256;       // fresh data draws per predictor
  Eigen::Index n_ot = 1024;        // cloud size for the W1 estimate
  std::uint64_t seed = 0;
  std::string out_dir;             // when nonempty: trials.csv + summary.json
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double gap = 0.0;
  double gap_se = 0.0;
  double w1 = 0.0;
  double bound = 0.0;
  bool violated = false;
  bool bound_valid = true;
};

struct ValidationSummary {
  std::string bound_name;
  int trials = 0;
  int violations = 0;
  double violation_rate = 0.0;
  double delta = 0.0;
  double mean_gap = 0.0;
  double mean_bound = 0.0;
  bool all_valid = true;
  std::vector<TrialRecord> records;
};

/// One fresh dataset per trial (seed = base + trial index); a violation is
/// gap - 3 gap_se > bound. Writes artifacts when out_dir is set.
ValidationSummary validate_bound(const ExperimentConfig& cfg);

/// Checks the expected-contraction envelope of the variational SGD on exactly
/// solvable quadratic problems (closed-form target).
struct ConvergenceConfig {
  int d = 0;
  Eigen::MatrixXd data_points;     // dataset for the plain quadratic risk
  Eigen::VectorXd prior_diag;      // prior covariance diagonal, entries in (0, 1]
  double lambda = 1.0;             // risk weight (coef = lambda, no 2K scaling)
  double bigM = 0.0;
  Eigen::VectorXd init_mean;
  Eigen::MatrixXd init_cov;
  double eta = 0.0;
  long long steps = 0;
  int n_seeds = 0;
  std::uint64_t seed = 0;
  std::string out_csv;             // when nonempty: per-step curve
};

struct ConvergenceCurve {
  double alpha = 0.0;
  double w2sq_init = 0.0;
  std::vector<double> mean_w2sq;   // index k = 0..steps
  std::vector<double> se_w2sq;
  std::vector<double> envelope;    // contraction bound per k
  bool satisfied = true;           // mean <= envelope + 2 se at every k
  long long lower_clip_count = 0;
};

ConvergenceCurve sgd_convergence_experiment(const ConvergenceConfig& cfg);

/// Full pipeline: normalize the Gibbs potential, schedule the SGD for target
/// accuracy, run it, estimate the Wasserstein terms by sampling, evaluate the
/// SGD generalisation bound, and check it against gap estimates.
struct EndToEndConfig {
  std::string loss_name;
  std::map<std::string, double> loss_params;
  std::string data_name;
  std::map<std::string, double> data_params;
  int m = 0;

  double lambda = 0.0;             // temperature, scaled by 2K internally
  double gamma = 1.0;              // prior covariance gamma I, gamma <= 1
  double bigM = 1.0;
  double eps = 0.1;                // schedule target accuracy
  double delta = 0.1;
  double c_sched = 2.0;
  double beta_m = std::numeric_limits<double>::quiet_NaN();  // default 1/sqrt(m)
  double c_dp = 1.0;

  UlaOptions ula;                  // Gibbs-target sampler settings
  int trials = 0;
  Eigen::Index n_h = 64;
  Eigen::Index n_test = 256;
  Eigen::Index n_ot = 1024;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct EndToEndTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  double gap = 0.0;
  double gap_se = 0.0;
  double w1_star = 0.0;            // estimated W1 between SGD output and Gibbs target
  double f_R = 0.0;
  double bound = 0.0;
  bool violated = false;
  bool bound_valid = true;
};

struct EndToEndSummary {
  double alpha = 0.0;              // certified curvature of the normalized potential
  double beta_v = 0.0;
  double lambda_eff = 0.0;
  double eta = 0.0;
  long long steps = 0;
  double w2sq_init = 0.0;          // deterministic upper bound used for scheduling
  double f_N_eta = 0.0;
  double w2_term = 0.0;            // f sqrt(w2sq_init)
  int trials = 0;
  int violations = 0;
  double violation_rate = 0.0;
  bool all_valid = true;
  std::vector<EndToEndTrial> records;
};

EndToEndSummary end_to_end_sgd_generalisation(const EndToEndConfig& cfg);

}  // namespace wpb

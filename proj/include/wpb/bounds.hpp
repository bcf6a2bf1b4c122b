#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wpb/bwsgd.hpp"
#include "wpb/gaussian.hpp"

namespace wpb {

/// Shared inputs for the bound evaluators. Fields a given bound does not use
/// are ignored; fields it requires must be set (NaN means unset) or the
/// evaluator raises ConfigError. Numeric premises of the guarantee itself
/// (temperature ranges, confidence gates) are reported through the valid
/// flag instead.
struct BoundInputs {
  int m = 0;                  // sample size
  int d = 0;                  // predictor dimension
  double delta = 0.05;        // confidence level
  double w1 = 0.0;            // 1-Wasserstein term posterior vs prior

  double K = std::numeric_limits<double>::quiet_NaN();        // Lipschitz constant
  double L = std::numeric_limits<double>::quiet_NaN();        // smoothness constant
  double D = std::numeric_limits<double>::quiet_NaN();        // gradient bound at 0
  double D_ell = std::numeric_limits<double>::quiet_NaN();    // loss bound at 0
  double R = std::numeric_limits<double>::quiet_NaN();        // ball radius override
  double epsilon = std::numeric_limits<double>::quiet_NaN();  // covering resolution
  double lambda = std::numeric_limits<double>::quiet_NaN();   // temperature

  std::optional<CompactClass> compact;  // Gaussian class (alpha, beta, bigM)

  // Data-dependent-prior knobs.
  double f_R = 0.0;                                                // prior tail term
  double beta_m = std::numeric_limits<double>::quiet_NaN();        // default 1/sqrt(m)
  double c_dp = 1.0;                                               // max-information rate
  double alpha_strong = std::numeric_limits<double>::quiet_NaN();  // potential strong convexity
};

struct BoundReport {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> components;
  std::string regime = "n/a";  // "low-data" | "transitory" | "asymptotic" | "n/a"
  bool valid = true;
  std::vector<std::string> reasons;
};

nlohmann::json to_json(const BoundReport& report);

/// d >= m: "low-data"; else d log d >= log m: "transitory"; else "asymptotic".
std::string classify_regime(int d, int m);

/// Covering-number exponent of the R-ball at resolution eps: d log(1 + 2R/eps).
double log_covering_number_bound(int d, double R, double eps);

/// Largest admissible temperature for the projected covering bound:
/// (1/K) sqrt(2m / (2 d log(1 + 2R/eps) + log(2/delta))).
double lambda_max_catoni(double K, int m, int d, double R, double eps, double delta);

/// Margin term eps_m = (4 / log(3/delta)) (2 + sqrt((log(3/delta)
///   + 2 d log(1 + 2Rm)) / (2m))).
double epsilon_m(int m, int d, double R, double delta);

/// Largest temperature under which the Gibbs prior keeps bounded
/// max-information: (1/2K) sqrt(alpha_strong log m / (m (1 - 2 log log m
///   + 10 log m))). Requires m >= 3.
double dp_lambda_threshold(double K, double alpha_strong, int m);

/// Projected covering bound: 4 K eps + (w1 + 2 eps + log(2/delta)) / lambda
///   + lambda / (2m). Valid for 0 < lambda <= lambda_max_catoni.
/// eps defaults to 1/m when unset. Needs K, R, m, d, delta, w1.
BoundReport catoni_bound(const BoundInputs& in);

/// sqrt-rate covering bound over the R-ball for [0,1]-valued K-Lipschitz
/// losses. Needs K, R, m, d, delta, w1.
BoundReport mcallester_bound(const BoundInputs& in);

/// Compact Gaussian class version for [0,1]-valued K-Lipschitz losses; the
/// radius defaults to rad_radius(compact, m, d). Needs K, compact.
BoundReport gaussian_lipschitz_bound(const BoundInputs& in);

/// Compact Gaussian class version for [0,1]-valued smooth losses with
/// effective Lipschitz constant D + L R on the R-ball. Needs L, D, compact.
BoundReport smooth_bounded_bound(const BoundInputs& in);

/// Unbounded K-Lipschitz losses on the compact Gaussian class.
/// Needs K, D, compact.
BoundReport unbounded_lipschitz_bound(const BoundInputs& in);

/// Unbounded smooth losses on the compact Gaussian class.
/// Needs L, D, D_ell, compact.
BoundReport unbounded_smooth_bound(const BoundInputs& in);

/// Gibbs (data-dependent) prior on the compact Gaussian class, paying a
/// beta_m confidence cut and a c_dp log m max-information surcharge.
/// Needs K, D, compact; beta_m defaults to 1/sqrt(m). When lambda and
/// alpha_strong are set the temperature gates are checked into valid.
BoundReport data_dep_prior_bound(const BoundInputs& in);

/// End-to-end bound for the variational SGD output after N steps: plugs
///   f = sqrt(exp(-alpha N eta) w2sq_init / delta),
///   eps = sqrt(36 d eta / (alpha^2 delta)) + w1_hat_to_star
/// into the data-dependent skeleton over C_{alpha/9, 1/alpha, bigM} with the
/// Wasserstein slot f sqrt(w2sq_init) + 1 + eps. Needs K, D; the compact
/// class comes from cfg, and f_R / beta_m / c_dp / lambda / alpha_strong are
/// read from the inputs.
BoundReport sgd_bound(const BoundInputs& in, const BwSgdConfig& cfg, double w2sq_init,
                      double w1_hat_to_star, long long N);

}  // namespace wpb

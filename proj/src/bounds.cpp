#include "wpb/bounds.hpp"

#include <cmath>
#include <sstream>

#include "wpb/common.hpp"

namespace wpb {

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw ConfigError(message);
}

void check_core(const BoundInputs& in, const std::string& name) {
  require(in.m >= 1, name + " needs m >= 1");
  require(in.d >= 1, name + " needs d >= 1");
  require(in.delta > 0.0 && in.delta < 1.0, name + " needs delta in (0, 1)");
  require(in.w1 >= 0.0, name + " needs w1 >= 0");
}

double need(double v, const std::string& message) {
  require(!std::isnan(v), message);
  return v;
}

/// Radius: explicit override when given, else the class-uniform radius.
double resolve_radius(const BoundInputs& in, const std::string& name) {
  if (!std::isnan(in.R)) {
    require(in.R > 0.0, name + " needs R > 0");
    return in.R;
  }
  require(in.compact.has_value(), name + " needs a compact class or explicit R");
  return rad_radius(*in.compact, in.m, in.d);
}

double beta_root(const CompactClass& cls) {
  return cls.beta * std::sqrt(2.0 * cls.beta);
}

/// Margin term at an arbitrary confidence exponent log(3/delta').
double epsilon_m_from_log(double log3delta, int m, int d, double R) {
  const double dm = static_cast<double>(m);
  return 4.0 / log3delta *
         (2.0 + std::sqrt((log3delta + 2.0 * static_cast<double>(d) *
                                           std::log1p(2.0 * R * dm)) /
                          (2.0 * dm)));
}

}  // namespace

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json j;
  j["value"] = report.value;
  j["components"] = nlohmann::json::object();
  for (const auto& [k, v] : report.components) j["components"][k] = v;
  j["regime"] = report.regime;
  j["valid"] = report.valid;
  j["reasons"] = report.reasons;
  return j;
}

std::string classify_regime(int d, int m) {
  require(d >= 1 && m >= 1, "classify_regime needs d >= 1 and m >= 1");
  const double dd = static_cast<double>(d);
  if (d >= m) return "low-data";
  if (dd * std::log(dd) >= std::log(static_cast<double>(m))) return "transitory";
  return "asymptotic";
}

double log_covering_number_bound(int d, double R, double eps) {
  require(d >= 1, "log_covering_number_bound needs d >= 1");
  require(R >= 0.0, "log_covering_number_bound needs R >= 0");
  require(eps > 0.0, "log_covering_number_bound needs eps > 0");
  return static_cast<double>(d) * std::log1p(2.0 * R / eps);
}

double lambda_max_catoni(double K, int m, int d, double R, double eps, double delta) {
  require(K > 0.0, "lambda_max_catoni needs K > 0");
  require(m >= 1, "lambda_max_catoni needs m >= 1");
  require(delta > 0.0 && delta < 1.0, "lambda_max_catoni needs delta in (0, 1)");
  const double denom =
      2.0 * log_covering_number_bound(d, R, eps) + std::log(2.0 / delta);
  return (1.0 / K) * std::sqrt(2.0 * static_cast<double>(m) / denom);
}

double epsilon_m(int m, int d, double R, double delta) {
  require(m >= 1, "epsilon_m needs m >= 1");
  require(d >= 1, "epsilon_m needs d >= 1");
  require(R > 0.0, "epsilon_m needs R > 0");
  require(delta > 0.0 && delta < 1.0, "epsilon_m needs delta in (0, 1)");
  return epsilon_m_from_log(std::log(3.0 / delta), m, d, R);
}

double dp_lambda_threshold(double K, double alpha_strong, int m) {
  require(K > 0.0, "dp_lambda_threshold needs K > 0");
  require(alpha_strong > 0.0, "dp_lambda_threshold needs alpha_strong > 0");
  require(m >= 3, "dp_lambda_threshold needs m >= 3");
  const double dm = static_cast<double>(m);
  const double lm = std::log(dm);
  const double denom = dm * (1.0 - 2.0 * std::log(lm) + 10.0 * lm);
  if (!(denom > 0.0)) throw NumericError("dp_lambda_threshold: nonpositive denominator");
  return (1.0 / (2.0 * K)) * std::sqrt(alpha_strong * lm / denom);
}

BoundReport catoni_bound(const BoundInputs& in) {
  check_core(in, "catoni_bound");
  const double K = need(in.K, "catoni_bound needs K");
  require(K > 0.0, "catoni_bound needs K > 0");
  const double R = resolve_radius(in, "catoni_bound");
  const double eps = std::isnan(in.epsilon) ? 1.0 / static_cast<double>(in.m) : in.epsilon;
  require(eps > 0.0, "catoni_bound needs epsilon > 0");
  const double lam_max = lambda_max_catoni(K, in.m, in.d, R, eps, in.delta);
  const double lam = std::isnan(in.lambda) ? lam_max : in.lambda;
  require(lam > 0.0, "catoni_bound needs lambda > 0");

  BoundReport report;
  const double projection = 4.0 * K * eps;
  const double wasserstein =
      (in.w1 + 2.0 * eps + std::log(2.0 / in.delta)) / lam;
  const double moment = lam / (2.0 * static_cast<double>(in.m));
  report.value = projection + wasserstein + moment;
  report.components["projection"] = projection;
  report.components["wasserstein"] = wasserstein;
  report.components["moment"] = moment;
  report.components["lambda_max"] = lam_max;
  report.components["radius"] = R;
  report.components["epsilon"] = eps;
  report.regime = "n/a";
  if (lam > lam_max) {
    report.valid = false;
    std::ostringstream msg;
    msg << "lambda " << lam << " exceeds lambda_max " << lam_max;
    report.reasons.push_back(msg.str());
  }
  return report;
}

BoundReport mcallester_bound(const BoundInputs& in) {
  check_core(in, "mcallester_bound");
  const double K = need(in.K, "mcallester_bound needs K");
  require(K >= 0.0, "mcallester_bound needs K >= 0");
  const double R = resolve_radius(in, "mcallester_bound");
  const double dm = static_cast<double>(in.m);

  const double em = epsilon_m(in.m, in.d, R, in.delta);
  const double complexity = 2.0 * K * (2.0 * K + 1.0) *
                            (2.0 * static_cast<double>(in.d) *
                             std::log(3.0 * (1.0 + 2.0 * R * dm) / in.delta)) /
                            dm * (in.w1 + em);
  const double statistical = std::log(3.0 * dm / in.delta) / dm;

  BoundReport report;
  report.value = std::sqrt(complexity + statistical);
  report.components["complexity"] = complexity;
  report.components["statistical"] = statistical;
  report.components["epsilon_m"] = em;
  report.components["radius"] = R;
  report.regime = "n/a";
  return report;
}

namespace {

/// Shared skeleton of the compact-class bounds: value = residual
///   + sqrt(complexity + statistical), with alpha_m = tail + epsilon_m.
struct CompactTerms {
  double R;
  double em;
  double alpha_m;
  double tail;  // 2 (M+1) beta sqrt(2 beta) / m
};

CompactTerms compact_terms(const BoundInputs& in, const std::string& name) {
  require(in.compact.has_value(), name + " needs a compact class");
  CompactTerms t;
  t.R = resolve_radius(in, name);
  t.em = epsilon_m(in.m, in.d, t.R, in.delta);
  t.tail = 2.0 * (in.compact->bigM + 1.0) * beta_root(*in.compact) /
           static_cast<double>(in.m);
  t.alpha_m = t.tail + t.em;
  return t;
}

}  // namespace

BoundReport gaussian_lipschitz_bound(const BoundInputs& in) {
  check_core(in, "gaussian_lipschitz_bound");
  const double K = need(in.K, "gaussian_lipschitz_bound needs K");
  require(K >= 0.0, "gaussian_lipschitz_bound needs K >= 0");
  const CompactTerms t = compact_terms(in, "gaussian_lipschitz_bound");
  const double dm = static_cast<double>(in.m);

  const double residual = 2.0 * beta_root(*in.compact) / dm;
  const double complexity = 2.0 * K * (2.0 * K + 1.0) *
                            (2.0 * static_cast<double>(in.d) *
                             std::log(3.0 * (1.0 + 2.0 * t.R * dm) / in.delta)) /
                            dm * (in.w1 + t.alpha_m);
  const double statistical = std::log(3.0 * dm / in.delta) / dm;

  BoundReport report;
  report.value = residual + std::sqrt(complexity + statistical);
  report.components["residual"] = residual;
  report.components["complexity"] = complexity;
  report.components["statistical"] = statistical;
  report.components["epsilon_m"] = t.em;
  report.components["alpha_m"] = t.alpha_m;
  report.components["radius"] = t.R;
  report.regime = "n/a";
  return report;
}

BoundReport smooth_bounded_bound(const BoundInputs& in) {
  check_core(in, "smooth_bounded_bound");
  const double L = need(in.L, "smooth_bounded_bound needs L");
  const double D = need(in.D, "smooth_bounded_bound needs D");
  require(L >= 0.0 && D >= 0.0, "smooth_bounded_bound needs L >= 0 and D >= 0");
  const CompactTerms t = compact_terms(in, "smooth_bounded_bound");
  const double dm = static_cast<double>(in.m);
  const double D_R = D + L * t.R;

  const double residual = 2.0 * beta_root(*in.compact) / dm;
  const double complexity = 2.0 * D_R * (2.0 * D_R + 1.0) *
                            (2.0 * static_cast<double>(in.d) *
                             std::log(3.0 * (1.0 + 2.0 * t.R * dm) / in.delta)) /
                            dm * (in.w1 + t.alpha_m);
  const double statistical = std::log(3.0 * dm / in.delta) / dm;

  BoundReport report;
  report.value = residual + std::sqrt(complexity + statistical);
  report.components["residual"] = residual;
  report.components["complexity"] = complexity;
  report.components["statistical"] = statistical;
  report.components["epsilon_m"] = t.em;
  report.components["alpha_m"] = t.alpha_m;
  report.components["radius"] = t.R;
  report.components["D_R"] = D_R;
  report.regime = "n/a";
  return report;
}

BoundReport unbounded_lipschitz_bound(const BoundInputs& in) {
  check_core(in, "unbounded_lipschitz_bound");
  const double K = need(in.K, "unbounded_lipschitz_bound needs K");
  const double D = need(in.D, "unbounded_lipschitz_bound needs D");
  require(K > 0.0 && D >= 0.0, "unbounded_lipschitz_bound needs K > 0 and D >= 0");
  const CompactTerms t = compact_terms(in, "unbounded_lipschitz_bound");
  const double dm = static_cast<double>(in.m);
  const double D_R = D + 2.0 * K * t.R;

  const double residual =
      2.0 * K * (in.compact->bigM + 1.0) * beta_root(*in.compact) / dm;
  const double complexity =
      2.0 * K * (2.0 * K + D_R) *
      (std::log(1.0 / in.delta) +
       2.0 * static_cast<double>(in.d) * std::log1p(2.0 * t.R * dm)) /
      dm * (in.w1 + t.alpha_m);
  const double statistical = D_R * D_R * std::log(3.0 * dm / in.delta) / dm;

  BoundReport report;
  report.value = residual + std::sqrt(complexity + statistical);
  report.components["residual"] = residual;
  report.components["complexity"] = complexity;
  report.components["statistical"] = statistical;
  report.components["epsilon_m"] = t.em;
  report.components["alpha_m"] = t.alpha_m;
  report.components["radius"] = t.R;
  report.components["D_R"] = D_R;
  report.regime = classify_regime(in.d, in.m);
  return report;
}

BoundReport unbounded_smooth_bound(const BoundInputs& in) {
  check_core(in, "unbounded_smooth_bound");
  const double L = need(in.L, "unbounded_smooth_bound needs L");
  const double D = need(in.D, "unbounded_smooth_bound needs D");
  const double D_ell = need(in.D_ell, "unbounded_smooth_bound needs D_ell");
  require(L >= 0.0 && D >= 0.0 && D_ell >= 0.0,
          "unbounded_smooth_bound needs nonnegative L, D, D_ell");
  const CompactTerms t = compact_terms(in, "unbounded_smooth_bound");
  const double dm = static_cast<double>(in.m);
  const double bigM = in.compact->bigM;
  const double D_R = D + L * t.R;
  const double C_R = D_ell + t.R * D_R;

  const double residual =
      (D_R + 0.5 * L * (bigM + 1.0)) * (bigM + 1.0) * beta_root(*in.compact) / dm;
  const double complexity =
      2.0 * D_R * (2.0 * D_R + C_R) *
      (std::log(3.0 / in.delta) +
       2.0 * static_cast<double>(in.d) * std::log1p(2.0 * t.R * dm)) /
      dm * (in.w1 + t.alpha_m);
  const double statistical = C_R * C_R * std::log(3.0 * dm / in.delta) / dm;

  BoundReport report;
  report.value = residual + std::sqrt(complexity + statistical);
  report.components["residual"] = residual;
  report.components["complexity"] = complexity;
  report.components["statistical"] = statistical;
  report.components["epsilon_m"] = t.em;
  report.components["alpha_m"] = t.alpha_m;
  report.components["radius"] = t.R;
  report.components["D_R"] = D_R;
  report.components["C_R"] = C_R;
  report.regime = classify_regime(in.d, in.m);
  return report;
}

BoundReport data_dep_prior_bound(const BoundInputs& in) {
  check_core(in, "data_dep_prior_bound");
  const double K = need(in.K, "data_dep_prior_bound needs K");
  const double D = need(in.D, "data_dep_prior_bound needs D");
  require(K > 0.0 && D >= 0.0, "data_dep_prior_bound needs K > 0 and D >= 0");
  require(in.f_R >= 0.0, "data_dep_prior_bound needs f_R >= 0");
  require(in.c_dp >= 0.0, "data_dep_prior_bound needs c_dp >= 0");
  require(in.compact.has_value(), "data_dep_prior_bound needs a compact class");
  const double dm = static_cast<double>(in.m);
  const double beta_m =
      std::isnan(in.beta_m) ? 1.0 / std::sqrt(dm) : in.beta_m;
  require(beta_m >= 0.0, "data_dep_prior_bound needs beta_m >= 0");

  BoundReport report;
  report.regime = classify_regime(in.d, in.m);
  const double R = resolve_radius(in, "data_dep_prior_bound");
  report.components["radius"] = R;
  report.components["beta_m"] = beta_m;
  report.components["f_R"] = in.f_R;

  if (!(in.delta > beta_m)) {
    report.valid = false;
    report.reasons.push_back("delta must exceed beta_m; bound is undefined");
    report.value = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  const double log_cut = std::log(1.0 / (in.delta - beta_m));
  const double dp_term = in.c_dp * std::log(dm);
  const double log3dp = std::log(3.0) + log_cut + dp_term;
  const double em = epsilon_m_from_log(log3dp, in.m, in.d, R);
  const double tail =
      2.0 * (in.compact->bigM + 1.0) * beta_root(*in.compact) / dm;
  const double alpha_m = tail + em;
  const double D_R = D + K * R;
  const double C_R = 2.0 * K * (2.0 * K + D_R);

  const double residual =
      2.0 * K * (in.compact->bigM + 1.0) * beta_root(*in.compact) / dm;
  const double log_complexity =
      log_cut + dp_term +
      2.0 * static_cast<double>(in.d) * std::log1p(2.0 * R * dm);
  const double complexity =
      C_R * log_complexity / dm * (in.w1 + alpha_m + in.f_R);
  const double statistical =
      D_R * D_R * (std::log(dm / (in.delta - beta_m)) + dp_term) / dm;

  report.value = residual + std::sqrt(complexity + statistical);
  report.components["residual"] = residual;
  report.components["complexity"] = complexity;
  report.components["statistical"] = statistical;
  report.components["epsilon_m"] = em;
  report.components["alpha_m"] = alpha_m;
  report.components["D_R"] = D_R;
  report.components["C_R"] = C_R;

  if (!std::isnan(in.lambda)) {
    if (!(in.lambda > 0.0)) {
      report.valid = false;
      report.reasons.push_back("lambda must be positive");
    } else {
      if (in.lambda > std::sqrt(dm)) {
        report.valid = false;
        report.reasons.push_back("lambda exceeds sqrt(m)");
      }
      if (!std::isnan(in.alpha_strong) && in.m >= 3) {
        const double lam_prime = in.lambda / (2.0 * K * dm);
        const double threshold = dp_lambda_threshold(K, in.alpha_strong, in.m);
        if (lam_prime > threshold) {
          std::ostringstream msg;
          msg << "Gibbs temperature lambda/(2Km) = " << lam_prime
              << " exceeds max-information threshold " << threshold;
          report.valid = false;
          report.reasons.push_back(msg.str());
        }
      }
    }
  }
  return report;
}

BoundReport sgd_bound(const BoundInputs& in, const BwSgdConfig& cfg, double w2sq_init,
                      double w1_hat_to_star, long long N) {
  check_core(in, "sgd_bound");
  require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "sgd_bound needs cfg.alpha in (0, 1]");
  require(cfg.eta > 0.0, "sgd_bound needs cfg.eta > 0");
  require(cfg.bigM >= 0.0, "sgd_bound needs cfg.bigM >= 0");
  require(w2sq_init >= 0.0, "sgd_bound needs w2sq_init >= 0");
  require(w1_hat_to_star >= 0.0, "sgd_bound needs w1_hat_to_star >= 0");
  require(N >= 0, "sgd_bound needs N >= 0");

  const double dd = static_cast<double>(in.d);
  const double decay = std::exp(-cfg.alpha * static_cast<double>(N) * cfg.eta);
  const double f = std::sqrt(decay * w2sq_init / in.delta);
  const double noise_floor = 36.0 * dd * cfg.eta / (cfg.alpha * cfg.alpha);
  const double eps_sgd = std::sqrt(noise_floor / in.delta) + w1_hat_to_star;
  const double w2_term = f * std::sqrt(w2sq_init);
  const double w1_slot = w2_term + 1.0 + eps_sgd;
  const double markov_factor =
      std::sqrt(2.0 * (decay * w2sq_init + noise_floor) / in.delta);

  BoundInputs dep = in;
  dep.w1 = w1_slot;
  dep.compact = CompactClass(cfg.alpha / 9.0, 1.0 / cfg.alpha, cfg.bigM);
  dep.R = std::numeric_limits<double>::quiet_NaN();  // radius from the class

  BoundReport report = data_dep_prior_bound(dep);
  report.components["f_N_eta"] = f;
  report.components["epsilon_sgd"] = eps_sgd;
  report.components["w2_term"] = w2_term;
  report.components["w1_slot"] = w1_slot;
  report.components["markov_factor"] = markov_factor;
  if (cfg.eta > cfg.alpha * cfg.alpha / 60.0 + 1e-15) {
    report.valid = false;
    report.reasons.push_back("eta exceeds alpha^2 / 60");
  }
  return report;
}

}  // namespace wpb

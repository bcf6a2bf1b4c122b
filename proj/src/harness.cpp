#include "wpb/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "wpb/common.hpp"
#include "wpb/io.hpp"
#include "wpb/ot.hpp"

namespace wpb {

namespace {

unsigned thread_budget() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("WPB_THREADS")) {
    const long requested = std::strtol(env, nullptr, 10);
    if (requested >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(requested));
  }
  return n;
}

SampleCloud project_cloud(const SampleCloud& cloud, double R) {
  SampleCloud out = cloud;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.points.row(i) =
        project_ball(out.points.row(i).transpose(), R).transpose();
  }
  return out;
}

void write_summary_json(const std::string& dir, const nlohmann::json& j) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "summary.json");
  if (!out) throw ConfigError("cannot write summary.json under " + dir);
  out << j.dump(2) << '\n';
}

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          body(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

BoundReport evaluate_bound(const std::string& name, const BoundInputs& inputs,
                           double constant_value) {
  if (name == "catoni") return catoni_bound(inputs);
  if (name == "mcallester") return mcallester_bound(inputs);
  if (name == "gaussian_lipschitz") return gaussian_lipschitz_bound(inputs);
  if (name == "smooth_bounded") return smooth_bounded_bound(inputs);
  if (name == "unbounded_lipschitz") return unbounded_lipschitz_bound(inputs);
  if (name == "unbounded_smooth") return unbounded_smooth_bound(inputs);
  if (name == "data_dep_prior") return data_dep_prior_bound(inputs);
  if (name == "constant") {
    if (std::isnan(constant_value)) {
      throw ConfigError("constant bound needs a value");
    }
    BoundReport report;
    report.value = constant_value;
    report.components["constant"] = constant_value;
    return report;
  }
  throw ConfigError("unknown bound: " + name);
}

ValidationSummary validate_bound(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("validate_bound needs trials >= 1");
  if (cfg.m < 1) throw ConfigError("validate_bound needs m >= 1");
  if (cfg.n_h < 2 || cfg.n_test < 1 || cfg.n_ot < 1) {
    throw ConfigError("validate_bound needs n_h >= 2, n_test >= 1, n_ot >= 1");
  }
  const LossModel loss = builtin_loss(cfg.loss_name, cfg.loss_params);
  const DataModel model = make_data_model(cfg.data_name, cfg.data_params);
  if (model.dim_z != loss.dim_z) {
    throw ConfigError("data model and loss disagree on data dimension");
  }
  const Eigen::Index d = loss.dim_h;
  if (cfg.posterior_mean.size() != d || cfg.prior_mean.size() != d) {
    throw ConfigError("posterior/prior mean dimension must match the loss");
  }
  if (!(cfg.posterior_cov_scale > 0.0) || !(cfg.prior_cov_scale > 0.0)) {
    throw ConfigError("covariance scales must be positive");
  }

  BoundInputs base = cfg.inputs;
  base.m = cfg.m;
  base.d = static_cast<int>(d);

  double project_R = 0.0;
  if (cfg.project_to_R) {
    if (!std::isnan(base.R)) {
      project_R = base.R;
    } else if (base.compact.has_value()) {
      project_R = rad_radius(*base.compact, base.m, base.d);
    } else {
      throw ConfigError("project_to_R needs an explicit R or a compact class");
    }
  }

  const GaussianMeasure posterior(
      cfg.posterior_mean,
      cfg.posterior_cov_scale * Eigen::MatrixXd::Identity(d, d));
  const GaussianMeasure prior(
      cfg.prior_mean, cfg.prior_cov_scale * Eigen::MatrixXd::Identity(d, d));

  ValidationSummary summary;
  summary.bound_name = cfg.bound_name;
  summary.trials = cfg.trials;
  summary.delta = base.delta;
  summary.records.resize(static_cast<std::size_t>(cfg.trials));

  parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
    const std::uint64_t trial_seed = cfg.seed + static_cast<std::uint64_t>(t);
    RngStream data_rng = RngStream::derived(trial_seed, 1);
    RngStream predictor_rng = RngStream::derived(trial_seed, 2);
    RngStream gap_rng = RngStream::derived(trial_seed, 3);
    RngStream ot_rng = RngStream::derived(trial_seed, 4);

    const Dataset data = draw_dataset(model, cfg.m, data_rng);

    SampleCloud predictors = sample(posterior, cfg.n_h, predictor_rng);
    if (cfg.project_to_R) predictors = project_cloud(predictors, project_R);
    const GapEstimate gap = gap_estimate(loss, model, data, predictors, cfg.n_test, gap_rng);

    SampleCloud cloud_q = sample(posterior, cfg.n_ot, ot_rng);
    SampleCloud cloud_p = sample(prior, cfg.n_ot, ot_rng);
    if (cfg.project_to_R) {
      cloud_q = project_cloud(cloud_q, project_R);
      cloud_p = project_cloud(cloud_p, project_R);
    }
    const double w1 = empirical_w1(cloud_q, cloud_p);

    BoundInputs inputs = base;
    inputs.w1 = w1;
    const BoundReport report = evaluate_bound(cfg.bound_name, inputs, cfg.constant_value);

    TrialRecord rec;
    rec.trial = static_cast<int>(t);
    rec.seed = trial_seed;
    rec.gap = gap.estimate;
    rec.gap_se = gap.std_error;
    rec.w1 = w1;
    rec.bound = report.value;
    rec.violated = gap.estimate - 3.0 * gap.std_error > report.value;
    rec.bound_valid = report.valid;
    summary.records[t] = rec;
  });

  double gap_acc = 0.0, bound_acc = 0.0;
  for (const auto& rec : summary.records) {
    if (rec.violated) ++summary.violations;
    if (!rec.bound_valid) summary.all_valid = false;
    gap_acc += rec.gap;
    bound_acc += rec.bound;
  }
  summary.violation_rate =
      static_cast<double>(summary.violations) / static_cast<double>(cfg.trials);
  summary.mean_gap = gap_acc / static_cast<double>(cfg.trials);
  summary.mean_bound = bound_acc / static_cast<double>(cfg.trials);

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    CsvTable table;
    table.header = {"trial", "seed", "gap", "gap_se", "w1", "bound", "violated"};
    for (const auto& rec : summary.records) {
      table.rows.push_back({static_cast<double>(rec.trial), static_cast<double>(rec.seed),
                            rec.gap, rec.gap_se, rec.w1, rec.bound,
                            rec.violated ? 1.0 : 0.0});
    }
    write_csv((std::filesystem::path(cfg.out_dir) / "trials.csv").string(), table);
    nlohmann::json j;
    j["bound"] = summary.bound_name;
    j["trials"] = summary.trials;
    j["violations"] = summary.violations;
    j["violation_rate"] = summary.violation_rate;
    j["delta"] = summary.delta;
    j["mean_gap"] = summary.mean_gap;
    j["mean_bound"] = summary.mean_bound;
    j["all_valid"] = summary.all_valid;
    write_summary_json(cfg.out_dir, j);
  }
  return summary;
}

ConvergenceCurve sgd_convergence_experiment(const ConvergenceConfig& cfg) {
  if (cfg.d < 1) throw ConfigError("convergence experiment needs d >= 1");
  if (cfg.n_seeds < 2) throw ConfigError("convergence experiment needs n_seeds >= 2");
  if (cfg.steps < 1) throw ConfigError("convergence experiment needs steps >= 1");
  if (cfg.prior_diag.size() != cfg.d) {
    throw ConfigError("prior_diag must have d entries");
  }

  const LossModel loss =
      builtin_loss("quadratic_plain", {{"dim", static_cast<double>(cfg.d)}});
  Dataset data;
  data.points = cfg.data_points;
  if (data.dim() != cfg.d) throw ConfigError("data_points must have d columns");
  const GaussianMeasure prior(Eigen::VectorXd::Zero(cfg.d),
                              Eigen::MatrixXd(cfg.prior_diag.asDiagonal()));
  const GibbsPotential gp(loss, data, prior, cfg.lambda, /*scale_by_2K=*/false);
  const A3Normalization an = a3_normalize(gp);
  const GaussianMeasure target = gibbs_closed_form(an.potential);

  const GaussianMeasure init(cfg.init_mean, cfg.init_cov);
  BwSgdConfig sgd;
  sgd.eta = cfg.eta;
  sgd.steps = cfg.steps;
  sgd.alpha = an.alpha;
  sgd.bigM = cfg.bigM;

  const double w2_init = w2_gaussian(init, target);
  const std::size_t rows = static_cast<std::size_t>(cfg.steps) + 1;

  std::vector<std::vector<double>> curves(static_cast<std::size_t>(cfg.n_seeds));
  std::atomic<long long> clips{0};
  parallel_for(static_cast<std::size_t>(cfg.n_seeds), [&](std::size_t s) {
    RngStream rng(cfg.seed + static_cast<std::uint64_t>(s));
    const SgdTrajectory traj = bwsgd_run(an.potential, init, sgd, rng, &target);
    clips += traj.lower_clip_count;
    curves[s] = traj.w2sq_to_reference;
  });

  ConvergenceCurve out;
  out.alpha = an.alpha;
  out.w2sq_init = w2_init * w2_init;
  out.lower_clip_count = clips.load();
  out.mean_w2sq.resize(rows);
  out.se_w2sq.resize(rows);
  out.envelope.resize(rows);
  const double n = static_cast<double>(cfg.n_seeds);
  for (std::size_t k = 0; k < rows; ++k) {
    double mean = 0.0;
    for (const auto& c : curves) mean += c[k];
    mean /= n;
    double var = 0.0;
    for (const auto& c : curves) var += (c[k] - mean) * (c[k] - mean);
    var /= (n - 1.0);
    out.mean_w2sq[k] = mean;
    out.se_w2sq[k] = std::sqrt(var / n);
    out.envelope[k] = lambert_bound(an.alpha, cfg.eta, static_cast<long long>(k),
                                    out.w2sq_init, cfg.d);
    if (mean > out.envelope[k] + 2.0 * out.se_w2sq[k]) out.satisfied = false;
  }

  if (!cfg.out_csv.empty()) {
    CsvTable table;
    table.header = {"k", "mean_w2sq", "se_w2sq", "envelope"};
    for (std::size_t k = 0; k < rows; ++k) {
      table.rows.push_back({static_cast<double>(k), out.mean_w2sq[k], out.se_w2sq[k],
                            out.envelope[k]});
    }
    write_csv(cfg.out_csv, table);
  }
  return out;
}

EndToEndSummary end_to_end_sgd_generalisation(const EndToEndConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("end-to-end needs trials >= 1");
  if (cfg.m < 1) throw ConfigError("end-to-end needs m >= 1");
  if (!(cfg.lambda > 0.0)) throw ConfigError("end-to-end needs lambda > 0");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw ConfigError("end-to-end needs gamma in (0, 1]");
  }
  const LossModel loss = builtin_loss(cfg.loss_name, cfg.loss_params);
  const DataModel model = make_data_model(cfg.data_name, cfg.data_params);
  if (model.dim_z != loss.dim_z) {
    throw ConfigError("data model and loss disagree on data dimension");
  }
  const int d = loss.dim_h;
  const GaussianMeasure prior(
      Eigen::VectorXd::Zero(d),
      cfg.gamma * Eigen::MatrixXd::Identity(d, d));

  // Curvature normalization is data independent for the builtin losses, so
  // probe it once with a dummy dataset to fix the schedule for all trials.
  double alpha = 0.0, beta_v = 0.0, lambda_eff = 0.0;
  {
    RngStream probe_rng(cfg.seed);
    const Dataset probe = draw_dataset(model, 2, probe_rng);
    const A3Normalization an =
        a3_normalize(GibbsPotential(loss, probe, prior, cfg.lambda, true));
    alpha = an.alpha;
    beta_v = an.beta_v;
    lambda_eff = an.lambda_eff;
  }

  const double dd = static_cast<double>(d);
  // Deterministic W2^2 bound between N(0, I) and any target in the class:
  // (0 + M)^2 + (sqrt(tr I) + sqrt(d / alpha))^2.
  const double w2sq_init =
      cfg.bigM * cfg.bigM + std::pow(std::sqrt(dd) + std::sqrt(dd / alpha), 2.0);
  const Schedule sched = schedule_for_accuracy(alpha, d, cfg.eps, w2sq_init, cfg.c_sched);

  BwSgdConfig sgd;
  sgd.eta = sched.eta;
  sgd.steps = sched.steps;
  sgd.alpha = alpha;
  sgd.bigM = cfg.bigM;

  const CompactClass compact(alpha / 9.0, 1.0 / alpha, cfg.bigM);
  const double R = rad_radius(compact, cfg.m, d);
  const GaussianMeasure init(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));

  EndToEndSummary summary;
  summary.alpha = alpha;
  summary.beta_v = beta_v;
  summary.lambda_eff = lambda_eff;
  summary.eta = sched.eta;
  summary.steps = sched.steps;
  summary.w2sq_init = w2sq_init;
  summary.trials = cfg.trials;
  summary.records.resize(static_cast<std::size_t>(cfg.trials));

  parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
    const std::uint64_t trial_seed = cfg.seed + static_cast<std::uint64_t>(t);
    RngStream data_rng = RngStream::derived(trial_seed, 1);
    RngStream sgd_rng = RngStream::derived(trial_seed, 2);
    RngStream ula_rng = RngStream::derived(trial_seed, 3);
    RngStream posterior_rng = RngStream::derived(trial_seed, 4);
    RngStream gap_rng = RngStream::derived(trial_seed, 5);

    const Dataset data = draw_dataset(model, cfg.m, data_rng);
    const GibbsPotential gp(loss, data, prior, cfg.lambda, true);
    const A3Normalization an = a3_normalize(gp);

    const GaussianMeasure q_final = bwsgd_final(an.potential, init, sgd, sgd_rng);

    const SampleCloud cloud_star = ula_sample(an.potential, cfg.n_ot, cfg.ula, ula_rng);
    const SampleCloud cloud_q = sample(q_final, cfg.n_ot, posterior_rng);
    const double w1_star = empirical_w1(cloud_q, cloud_star);

    double f_R = 0.0;
    for (Eigen::Index i = 0; i < cloud_star.size(); ++i) {
      const double norm = cloud_star.points.row(i).norm();
      if (norm > R) f_R += norm;
    }
    f_R /= static_cast<double>(cloud_star.size());

    BoundInputs inputs;
    inputs.m = cfg.m;
    inputs.d = d;
    inputs.delta = cfg.delta;
    inputs.K = loss.lipschitz;
    inputs.D = loss.grad_at_zero;
    inputs.f_R = f_R;
    inputs.beta_m = cfg.beta_m;
    inputs.c_dp = cfg.c_dp;
    inputs.lambda = an.lambda_eff;
    inputs.alpha_strong = 1.0 / (cfg.gamma * an.beta_v);
    const BoundReport report = sgd_bound(inputs, sgd, w2sq_init, w1_star, sched.steps);

    const SampleCloud predictors = sample(q_final, cfg.n_h, posterior_rng);
    const GapEstimate gap = gap_estimate(loss, model, data, predictors, cfg.n_test, gap_rng);

    EndToEndTrial rec;
    rec.trial = static_cast<int>(t);
    rec.seed = trial_seed;
    rec.gap = gap.estimate;
    rec.gap_se = gap.std_error;
    rec.w1_star = w1_star;
    rec.f_R = f_R;
    rec.bound = report.value;
    rec.violated = gap.estimate - 3.0 * gap.std_error > report.value;
    rec.bound_valid = report.valid;
    summary.records[t] = rec;
    if (t == 0) {
      summary.f_N_eta = report.components.at("f_N_eta");
      summary.w2_term = report.components.at("w2_term");
    }
  });

  for (const auto& rec : summary.records) {
    if (rec.violated) ++summary.violations;
    if (!rec.bound_valid) summary.all_valid = false;
  }
  summary.violation_rate =
      static_cast<double>(summary.violations) / static_cast<double>(cfg.trials);

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    CsvTable table;
    table.header = {"trial", "seed", "gap", "gap_se", "w1_star", "f_R", "bound", "violated"};
    for (const auto& rec : summary.records) {
      table.rows.push_back({static_cast<double>(rec.trial), static_cast<double>(rec.seed),
                            rec.gap, rec.gap_se, rec.w1_star, rec.f_R, rec.bound,
                            rec.violated ? 1.0 : 0.0});
    }
    write_csv((std::filesystem::path(cfg.out_dir) / "trials.csv").string(), table);
    nlohmann::json j;
    j["alpha"] = summary.alpha;
    j["beta_v"] = summary.beta_v;
    j["lambda_eff"] = summary.lambda_eff;
    j["eta"] = summary.eta;
    j["steps"] = summary.steps;
    j["w2sq_init"] = summary.w2sq_init;
    j["f_N_eta"] = summary.f_N_eta;
    j["w2_term"] = summary.w2_term;
    j["trials"] = summary.trials;
    j["violations"] = summary.violations;
    j["violation_rate"] = summary.violation_rate;
    j["all_valid"] = summary.all_valid;
    write_summary_json(cfg.out_dir, j);
  }
  return summary;
}

}  // namespace wpb

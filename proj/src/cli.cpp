#include "wpb/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>

#include "wpb/bounds.hpp"
#include "wpb/bwsgd.hpp"
#include "wpb/common.hpp"
#include "wpb/gibbs.hpp"
#include "wpb/harness.hpp"
#include "wpb/io.hpp"
#include "wpb/ot.hpp"

namespace wpb::cli {

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

double num_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("config field must be numeric: " + key);
  return j.at(key).get<double>();
}

std::map<std::string, double> params_map(const json& j) {
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) {
      throw ConfigError("loss/data params must be numeric: " + it.key());
    }
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

Eigen::VectorXd vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " entries must be numeric");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ConfigError(what + " rows must be equally sized arrays");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

BoundInputs inputs_from(const json& j) {
  BoundInputs in;
  in.m = static_cast<int>(num_or(j, "m", 0));
  in.d = static_cast<int>(num_or(j, "d", 0));
  in.delta = num_or(j, "delta", in.delta);
  in.w1 = num_or(j, "w1", in.w1);
  in.K = num_or(j, "K", in.K);
  in.L = num_or(j, "L", in.L);
  in.D = num_or(j, "D", in.D);
  in.D_ell = num_or(j, "D_ell", in.D_ell);
  in.R = num_or(j, "R", in.R);
  in.epsilon = num_or(j, "epsilon", in.epsilon);
  in.lambda = num_or(j, "lambda", in.lambda);
  in.f_R = num_or(j, "f_R", in.f_R);
  in.beta_m = num_or(j, "beta_m", in.beta_m);
  in.c_dp = num_or(j, "c_dp", in.c_dp);
  in.alpha_strong = num_or(j, "alpha_strong", in.alpha_strong);
  if (j.contains("compact")) {
    const json& c = j.at("compact");
    in.compact = CompactClass(num_or(c, "alpha", 0.0), num_or(c, "beta", 0.0),
                              num_or(c, "bigM", 0.0));
  }
  return in;
}

GaussianMeasure measure_from(const json& j, Eigen::Index d, const std::string& what) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  if (j.contains("mean")) mean = vector_from(j.at("mean"), what + ".mean");
  if (mean.size() != d) throw ConfigError(what + ".mean has wrong dimension");
  Eigen::MatrixXd cov;
  if (j.contains("cov")) {
    cov = matrix_from(j.at("cov"), what + ".cov");
  } else if (j.contains("diag")) {
    const Eigen::VectorXd diag = vector_from(j.at("diag"), what + ".diag");
    if (diag.size() != d) throw ConfigError(what + ".diag has wrong dimension");
    cov = diag.asDiagonal();
  } else {
    cov = num_or(j, "cov_scale", 1.0) * Eigen::MatrixXd::Identity(d, d);
  }
  return GaussianMeasure(mean, cov);
}

struct PotentialBundle {
  LossModel loss;
  GibbsPotential potential;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // set when normalized
};

PotentialBundle potential_from(const json& j) {
  if (!j.contains("loss")) throw ConfigError("potential config needs a loss");
  const json& jl = j.at("loss");
  if (!jl.contains("name")) throw ConfigError("loss config needs a name");
  const LossModel loss = builtin_loss(
      jl.at("name").get<std::string>(),
      jl.contains("params") ? params_map(jl.at("params")) : std::map<std::string, double>{});

  Dataset data;
  if (j.contains("dataset_csv")) {
    data.points = read_cloud_csv(j.at("dataset_csv").get<std::string>()).points;
  } else if (j.contains("dataset")) {
    data.points = matrix_from(j.at("dataset"), "dataset");
  } else {
    throw ConfigError("potential config needs dataset or dataset_csv");
  }

  const GaussianMeasure prior = measure_from(
      j.contains("prior") ? j.at("prior") : json::object(), loss.dim_h, "prior");
  const double lambda = num_or(j, "lambda", 1.0);
  const bool by2k = j.contains("scale_by_2K") && j.at("scale_by_2K").get<bool>();

  GibbsPotential gp(loss, data, prior, lambda, by2k);
  PotentialBundle bundle{loss, gp};
  if (j.contains("a3_normalize") && j.at("a3_normalize").get<bool>()) {
    const A3Normalization an = a3_normalize(gp);
    bundle.potential = an.potential;
    bundle.alpha = an.alpha;
  }
  return bundle;
}

void write_or_print(const json& j, const std::string& out_path, std::ostream& out) {
  const std::string text = j.dump(2);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw ConfigError("cannot open for writing: " + out_path);
    f << text << '\n';
  }
  out << text << '\n';
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wasserstein PAC-Bayes toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_path;
  std::string config_path;
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--out", out_path, "output file or directory");
  app.add_option("--config", config_path, "JSON config file");

  // radius
  auto* sc_radius = app.add_subcommand("radius", "class-uniform truncation radius");
  double r_alpha = 1.0, r_beta = 1.0, r_bigM = 0.0;
  int r_m = 1, r_d = 1;
  sc_radius->add_option("--alpha", r_alpha)->required();
  sc_radius->add_option("--beta", r_beta)->required();
  sc_radius->add_option("--bigM", r_bigM)->required();
  sc_radius->add_option("--m", r_m)->required();
  sc_radius->add_option("--d", r_d)->required();

  // bound <name>
  auto* sc_bound = app.add_subcommand("bound", "evaluate a generalisation bound");
  std::string bound_name;
  sc_bound->add_option("name", bound_name, "bound identifier")->required();
  std::map<std::string, double> overrides;
  for (const char* key :
       {"m", "d", "delta", "w1", "K", "L", "D", "D_ell", "R", "epsilon", "lambda",
        "f_R", "beta_m", "c_dp", "alpha_strong", "alpha", "beta", "bigM", "value"}) {
    overrides[key] = std::numeric_limits<double>::quiet_NaN();
    sc_bound->add_option(std::string("--") + key, overrides[key]);
  }

  // bwsgd
  auto* sc_bwsgd = app.add_subcommand("bwsgd", "run the variational SGD");
  double o_eta = std::numeric_limits<double>::quiet_NaN();
  long long o_steps = -1;
  sc_bwsgd->add_option("--eta", o_eta, "step size override");
  sc_bwsgd->add_option("--steps", o_steps, "step count override");

  // gibbs-sample
  auto* sc_gibbs = app.add_subcommand("gibbs-sample", "Langevin samples of a Gibbs measure");
  long long o_n = -1;
  sc_gibbs->add_option("--n", o_n, "sample count override");

  // estimate-w1
  auto* sc_w1 = app.add_subcommand("estimate-w1", "exact W1 between two cloud files");
  std::string cloud_a, cloud_b;
  sc_w1->add_option("a", cloud_a, "first cloud csv")->required();
  sc_w1->add_option("b", cloud_b, "second cloud csv")->required();

  // campaigns
  auto* sc_validate = app.add_subcommand("validate", "bound validation campaign");
  auto* sc_sgdgen = app.add_subcommand("sgd-gen", "end-to-end SGD generalisation experiment");
  auto* sc_conv = app.add_subcommand("convergence", "SGD contraction experiment");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("wpb");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  }

  const bool seed_given = app.count("--seed") > 0;
  const bool out_given = app.count("--out") > 0;

  if (sc_radius->parsed()) {
    const CompactClass cls(r_alpha, r_beta, r_bigM);
    out << rad_radius(cls, r_m, r_d) << '\n';
    return 0;
  }

  if (sc_bound->parsed()) {
    json j = config_path.empty() ? json::object() : load_config(config_path);
    if (j.contains("name") && bound_name.empty()) {
      bound_name = j.at("name").get<std::string>();
    }
    json jin = j.contains("inputs") ? j.at("inputs") : j;
    auto set_if = [&](const std::string& key) {
      if (sc_bound->count("--" + key) > 0) jin[key] = overrides[key];
    };
    for (const char* key : {"m", "d", "delta", "w1", "K", "L", "D", "D_ell", "R",
                            "epsilon", "lambda", "f_R", "beta_m", "c_dp", "alpha_strong"}) {
      set_if(key);
    }
    for (const char* key : {"alpha", "beta", "bigM"}) {
      if (sc_bound->count(std::string("--") + key) > 0) {
        if (!jin.contains("compact")) jin["compact"] = json::object();
        jin["compact"][key] = overrides[key];
      }
    }
    const BoundInputs in = inputs_from(jin);
    double constant_value = num_or(jin, "value", std::numeric_limits<double>::quiet_NaN());
    if (sc_bound->count("--value") > 0) constant_value = overrides["value"];
    const BoundReport report = evaluate_bound(bound_name, in, constant_value);
    write_or_print(to_json(report), out_path, out);
    return 0;
  }

  if (sc_bwsgd->parsed()) {
    if (config_path.empty()) throw ConfigError("bwsgd needs --config");
    const json j = load_config(config_path);
    PotentialBundle bundle = potential_from(j);

    BwSgdConfig cfg;
    cfg.eta = std::isnan(o_eta) ? num_or(j, "eta", 0.0) : o_eta;
    cfg.steps = o_steps >= 0 ? o_steps : static_cast<long long>(num_or(j, "steps", 0));
    cfg.alpha = std::isnan(bundle.alpha) ? num_or(j, "alpha", 0.0) : bundle.alpha;
    cfg.bigM = num_or(j, "bigM", 0.0);

    const Eigen::Index d = bundle.potential.dim();
    const GaussianMeasure init = measure_from(
        j.contains("init") ? j.at("init") : json::object(), d, "init");
    if (seed_given || !j.contains("seed")) {
      // keep CLI seed; config seed used otherwise
    } else {
      seed = static_cast<std::uint64_t>(num_or(j, "seed", 0.0));
    }
    RngStream rng(seed);

    std::optional<GaussianMeasure> reference;
    if (bundle.loss.name == "quadratic_plain") {
      reference = gibbs_closed_form(bundle.potential);
    }
    const SgdTrajectory traj = bwsgd_run(bundle.potential, init, cfg, rng,
                                         reference ? &*reference : nullptr);

    CsvTable table;
    table.header = {"k"};
    for (Eigen::Index c = 0; c < d; ++c) table.header.push_back("m" + std::to_string(c));
    table.header.push_back("cov_eig_min");
    table.header.push_back("cov_eig_max");
    table.header.push_back("w2sq_to_reference");
    for (Eigen::Index k = 0; k < traj.size(); ++k) {
      std::vector<double> row;
      row.push_back(static_cast<double>(k));
      const auto& mean = traj.means[static_cast<std::size_t>(k)];
      for (Eigen::Index c = 0; c < d; ++c) row.push_back(mean(c));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          traj.covariances[static_cast<std::size_t>(k)], Eigen::EigenvaluesOnly);
      row.push_back(es.eigenvalues().minCoeff());
      row.push_back(es.eigenvalues().maxCoeff());
      row.push_back(traj.w2sq_to_reference.empty()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : traj.w2sq_to_reference[static_cast<std::size_t>(k)]);
      table.rows.push_back(std::move(row));
    }
    if (out_path.empty()) throw ConfigError("bwsgd needs --out for the trajectory csv");
    write_csv(out_path, table);
    out << "wrote " << traj.size() << " iterates to " << out_path << '\n';
    return 0;
  }

  if (sc_gibbs->parsed()) {
    if (config_path.empty()) throw ConfigError("gibbs-sample needs --config");
    const json j = load_config(config_path);
    const PotentialBundle bundle = potential_from(j);
    UlaOptions options;
    options.step = num_or(j, "step", options.step);
    options.burn_in = static_cast<Eigen::Index>(num_or(j, "burn_in", 1000));
    options.thinning = static_cast<Eigen::Index>(num_or(j, "thinning", 10));
    const Eigen::Index n =
        o_n >= 0 ? static_cast<Eigen::Index>(o_n)
                 : static_cast<Eigen::Index>(num_or(j, "n", 0));
    if (!seed_given && j.contains("seed")) {
      seed = static_cast<std::uint64_t>(num_or(j, "seed", 0.0));
    }
    RngStream rng(seed);
    const SampleCloud cloud = ula_sample(bundle.potential, n, options, rng);
    if (out_path.empty()) throw ConfigError("gibbs-sample needs --out for the cloud csv");
    write_cloud_csv(out_path, cloud);
    out << "wrote " << cloud.size() << " samples to " << out_path << '\n';
    return 0;
  }

  if (sc_w1->parsed()) {
    const SampleCloud a = read_cloud_csv(cloud_a);
    const SampleCloud b = read_cloud_csv(cloud_b);
    out << empirical_w1(a, b) << '\n';
    return 0;
  }

  if (sc_validate->parsed()) {
    if (config_path.empty()) throw ConfigError("validate needs --config");
    const json j = load_config(config_path);
    ExperimentConfig cfg;
    if (!j.contains("problem")) throw ConfigError("validate config needs problem");
    const json& jp = j.at("problem");
    cfg.loss_name = jp.at("loss").at("name").get<std::string>();
    if (jp.at("loss").contains("params")) cfg.loss_params = params_map(jp.at("loss").at("params"));
    cfg.data_name = jp.at("data").at("name").get<std::string>();
    if (jp.at("data").contains("params")) cfg.data_params = params_map(jp.at("data").at("params"));
    cfg.m = static_cast<int>(num_or(jp, "m", 0));
    if (!j.contains("bound")) throw ConfigError("validate config needs bound");
    cfg.bound_name = j.at("bound").at("name").get<std::string>();
    if (j.at("bound").contains("inputs")) cfg.inputs = inputs_from(j.at("bound").at("inputs"));
    cfg.constant_value = num_or(j.at("bound"), "value", cfg.constant_value);
    const json& jq = j.at("posterior");
    cfg.posterior_mean = vector_from(jq.at("mean"), "posterior.mean");
    cfg.posterior_cov_scale = num_or(jq, "cov_scale", 1.0);
    const json& jpr = j.at("prior");
    cfg.prior_mean = vector_from(jpr.at("mean"), "prior.mean");
    cfg.prior_cov_scale = num_or(jpr, "cov_scale", 1.0);
    cfg.project_to_R = j.contains("project_to_R") && j.at("project_to_R").get<bool>();
    cfg.trials = static_cast<int>(num_or(j, "trials", 0));
    cfg.n_h = static_cast<Eigen::Index>(num_or(j, "n_h", 64));
    cfg.n_test = static_cast<Eigen::Index>(num_or(j, "n_test", 256));
    cfg.n_ot = static_cast<Eigen::Index>(num_or(j, "n_ot", 1024));
    cfg.seed = seed_given ? seed : static_cast<std::uint64_t>(num_or(j, "seed", 0.0));
    cfg.out_dir = out_given ? out_path : (j.contains("out") ? j.at("out").get<std::string>() : "");

    const ValidationSummary summary = validate_bound(cfg);
    json js;
    js["bound"] = summary.bound_name;
    js["trials"] = summary.trials;
    js["violations"] = summary.violations;
    js["violation_rate"] = summary.violation_rate;
    js["delta"] = summary.delta;
    js["mean_gap"] = summary.mean_gap;
    js["mean_bound"] = summary.mean_bound;
    js["all_valid"] = summary.all_valid;
    out << js.dump(2) << '\n';
    return 0;
  }

  if (sc_sgdgen->parsed()) {
    if (config_path.empty()) throw ConfigError("sgd-gen needs --config");
    const json j = load_config(config_path);
    EndToEndConfig cfg;
    const json& jp = j.at("problem");
    cfg.loss_name = jp.at("loss").at("name").get<std::string>();
    if (jp.at("loss").contains("params")) cfg.loss_params = params_map(jp.at("loss").at("params"));
    cfg.data_name = jp.at("data").at("name").get<std::string>();
    if (jp.at("data").contains("params")) cfg.data_params = params_map(jp.at("data").at("params"));
    cfg.m = static_cast<int>(num_or(jp, "m", 0));
    cfg.lambda = num_or(j, "lambda", 0.0);
    cfg.gamma = num_or(j, "gamma", 1.0);
    cfg.bigM = num_or(j, "bigM", 1.0);
    cfg.eps = num_or(j, "eps", 0.1);
    cfg.delta = num_or(j, "delta", 0.1);
    cfg.c_sched = num_or(j, "c_sched", 2.0);
    cfg.beta_m = num_or(j, "beta_m", cfg.beta_m);
    cfg.c_dp = num_or(j, "c_dp", 1.0);
    if (j.contains("ula")) {
      const json& ju = j.at("ula");
      cfg.ula.step = num_or(ju, "step", cfg.ula.step);
      cfg.ula.burn_in = static_cast<Eigen::Index>(num_or(ju, "burn_in", cfg.ula.burn_in));
      cfg.ula.thinning = static_cast<Eigen::Index>(num_or(ju, "thinning", cfg.ula.thinning));
    }
    cfg.trials = static_cast<int>(num_or(j, "trials", 0));
    cfg.n_h = static_cast<Eigen::Index>(num_or(j, "n_h", 64));
    cfg.n_test = static_cast<Eigen::Index>(num_or(j, "n_test", 256));
    cfg.n_ot = static_cast<Eigen::Index>(num_or(j, "n_ot", 1024));
    cfg.seed = seed_given ? seed : static_cast<std::uint64_t>(num_or(j, "seed", 0.0));
    cfg.out_dir = out_given ? out_path : (j.contains("out") ? j.at("out").get<std::string>() : "");

    const EndToEndSummary summary = end_to_end_sgd_generalisation(cfg);
    json js;
    js["alpha"] = summary.alpha;
    js["beta_v"] = summary.beta_v;
    js["lambda_eff"] = summary.lambda_eff;
    js["eta"] = summary.eta;
    js["steps"] = summary.steps;
    js["w2sq_init"] = summary.w2sq_init;
    js["f_N_eta"] = summary.f_N_eta;
    js["w2_term"] = summary.w2_term;
    js["trials"] = summary.trials;
    js["violations"] = summary.violations;
    js["violation_rate"] = summary.violation_rate;
    js["all_valid"] = summary.all_valid;
    out << js.dump(2) << '\n';
    return 0;
  }

  if (sc_conv->parsed()) {
    if (config_path.empty()) throw ConfigError("convergence needs --config");
    const json j = load_config(config_path);
    ConvergenceConfig cfg;
    cfg.d = static_cast<int>(num_or(j, "d", 0));
    cfg.data_points = matrix_from(j.at("data_points"), "data_points");
    cfg.prior_diag = vector_from(j.at("prior_diag"), "prior_diag");
    cfg.lambda = num_or(j, "lambda", 1.0);
    cfg.bigM = num_or(j, "bigM", 0.0);
    cfg.init_mean = j.contains("init_mean") ? vector_from(j.at("init_mean"), "init_mean")
                                            : Eigen::VectorXd::Zero(cfg.d);
    cfg.init_cov = j.contains("init_cov")
                       ? matrix_from(j.at("init_cov"), "init_cov")
                       : Eigen::MatrixXd(num_or(j, "init_cov_scale", 1.0) *
                                         Eigen::MatrixXd::Identity(cfg.d, cfg.d));
    cfg.eta = num_or(j, "eta", 0.0);
    cfg.steps = static_cast<long long>(num_or(j, "steps", 0));
    cfg.n_seeds = static_cast<int>(num_or(j, "n_seeds", 0));
    cfg.seed = seed_given ? seed : static_cast<std::uint64_t>(num_or(j, "seed", 0.0));
    cfg.out_csv = out_given ? out_path
                            : (j.contains("out_csv") ? j.at("out_csv").get<std::string>() : "");

    const ConvergenceCurve curve = sgd_convergence_experiment(cfg);
    json js;
    js["alpha"] = curve.alpha;
    js["w2sq_init"] = curve.w2sq_init;
    js["satisfied"] = curve.satisfied;
    js["final_mean_w2sq"] = curve.mean_w2sq.back();
    js["final_envelope"] = curve.envelope.back();
    js["lower_clip_count"] = curve.lower_clip_count;
    out << js.dump(2) << '\n';
    return 0;
  }

  err << "no subcommand selected\n";
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_impl(args, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace wpb::cli

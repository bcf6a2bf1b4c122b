// Acceptance gate: one PASS/FAIL line per criterion, exit code = number of
// failures. Each criterion is self-contained and uses fixed seeds so the run
// is reproducible.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "wpb/bounds.hpp"
#include "wpb/bwsgd.hpp"
#include "wpb/common.hpp"
#include "wpb/gaussian.hpp"
#include "wpb/gibbs.hpp"
#include "wpb/harness.hpp"
#include "wpb/losses.hpp"
#include "wpb/ot.hpp"
#include "wpb/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. Tail-mass suite: Monte Carlo tail statistics of the widest class member
//    stay below the closed-form class-uniform bounds.
// ---------------------------------------------------------------------------
Criterion tail_mass_suite() {
  Criterion c{"tail-mass suite"};
  const auto start = Clock::now();
  const std::vector<std::array<double, 3>> classes = {
      {1.0, 1.0, 0.0}, {0.5, 2.0, 1.0}, {1.0, 1.0, 3.0}};
  const std::vector<int> dims = {3, 5, 10};
  const std::vector<int> ms = {10, 100, 1000};
  const Eigen::Index n_samples = 1000000;

  int cells = 0;
  std::uint64_t cell_seed = 1001;
  for (const auto& abm : classes) {
    const wpb::CompactClass cls(abm[0], abm[1], abm[2]);
    for (int d : dims) {
      for (int m : ms) {
        const double R = wpb::rad_radius(cls, m, d);
        const double mass_bound = wpb::tail_mass_bound(cls, m);
        const wpb::TruncatedMomentBounds mb = wpb::truncated_moment_bounds(cls, m);
        // Widest member: mean of norm bigM, covariance beta * I.
        wpb::RngStream rng(cell_seed++);
        const double sd = std::sqrt(cls.beta);
        double p_hat = 0.0, m1_hat = 0.0, m2_hat = 0.0;
        for (Eigen::Index i = 0; i < n_samples; ++i) {
          double sq = 0.0;
          for (int k = 0; k < d; ++k) {
            const double x = (k == 0 ? cls.bigM : 0.0) + sd * rng.normal();
            sq += x * x;
          }
          const double norm = std::sqrt(sq);
          if (norm > R) {
            p_hat += 1.0;
            m1_hat += norm;
            m2_hat += sq;
          }
        }
        const double n = static_cast<double>(n_samples);
        p_hat /= n;
        m1_hat /= n;
        m2_hat /= n;
        if (!(p_hat <= mass_bound && m1_hat <= mb.first_moment &&
              m2_hat <= mb.second_moment)) {
          std::ostringstream msg;
          msg << "violated at alpha=" << cls.alpha << " beta=" << cls.beta
              << " M=" << cls.bigM << " d=" << d << " m=" << m << ": mass " << p_hat
              << " vs " << mass_bound << ", first " << m1_hat << " vs "
              << mb.first_moment << ", second " << m2_hat << " vs "
              << mb.second_moment;
          c.detail = msg.str();
          return c;
        }
        ++cells;
      }
    }
  }
  const double secs = elapsed_s(start);
  if (secs > 120.0) {
    c.detail = "runtime " + std::to_string(secs) + "s exceeds 120s";
    return c;
  }
  std::ostringstream msg;
  msg << cells << " class/dim/m cells, 1e6 samples each, " << secs << "s";
  c.detail = msg.str();
  c.pass = true;
  return c;
}

// ---------------------------------------------------------------------------
// 2. Exact-transport oracle: assignment solver equals permutation brute force
//    on small clouds; gaussian closed-form W2 matches empirical W2.
// ---------------------------------------------------------------------------
double brute_force_w1(const wpb::SampleCloud& a, const wpb::SampleCloud& b) {
  const Eigen::Index n = a.size();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      total += (a.points.row(i) - b.points.row(perm[static_cast<std::size_t>(i)])).norm();
    }
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Criterion transport_oracle() {
  Criterion c{"exact-transport oracle"};
  wpb::RngStream rng(2002);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 5);  // 2..6
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next_u64() % 3);  // 1..3
    wpb::SampleCloud a, b;
    a.points.resize(n, d);
    b.points.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        a.points(i, k) = rng.uniform(-1.0, 1.0);
        b.points(i, k) = rng.uniform(-1.0, 1.0);
      }
    }
    const double solver = wpb::empirical_w1(a, b);
    const double brute = brute_force_w1(a, b);
    worst = std::max(worst, std::abs(solver - brute));
    if (std::abs(solver - brute) > 1e-9 * (1.0 + std::abs(brute))) {
      std::ostringstream msg;
      msg << "instance " << rep << ": solver " << solver << " vs brute " << brute;
      c.detail = msg.str();
      return c;
    }
  }

  // Closed-form W2 between two anisotropic gaussians vs the plug-in estimate.
  Eigen::VectorXd p1(2), p2(2);
  p1 << 0.0, 0.0;
  p2 << 1.0, -1.0;
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << 2.0, 0.3, 0.3, 1.0;
  s2 << 1.0, -0.2, -0.2, 1.5;
  const wpb::GaussianMeasure ga(p1, s1), gb(p2, s2);
  const double exact = wpb::w2_gaussian(ga, gb);
  wpb::RngStream sample_rng(2003);
  const wpb::SampleCloud ca = wpb::sample(ga, 2000, sample_rng);
  const wpb::SampleCloud cb = wpb::sample(gb, 2000, sample_rng);
  const double empirical = wpb::empirical_w2(ca, cb);
  const double rel = std::abs(empirical - exact) / exact;
  if (rel > 0.05) {
    std::ostringstream msg;
    msg << "gaussian W2 " << exact << " vs empirical " << empirical << " (rel " << rel
        << " > 0.05)";
    c.detail = msg.str();
    return c;
  }
  std::ostringstream msg;
  msg << "200 brute-force instances (worst gap " << worst << "), gaussian W2 rel err "
      << rel;
  c.detail = msg.str();
  c.pass = true;
  return c;
}

// ---------------------------------------------------------------------------
// 3 + 4. Variational SGD contraction envelope and the iterate-compactness
//        invariant, measured on the same trajectories.
// ---------------------------------------------------------------------------
struct SgdProblem {
  int d;
  Eigen::MatrixXd data;
  Eigen::VectorXd prior_diag;
  double lambda;
  double expected_alpha;
};

std::vector<SgdProblem> sgd_problems() {
  std::vector<SgdProblem> out;
  {
    SgdProblem p;
    p.d = 1;
    p.data.resize(3, 1);
    p.data << 0.5, -0.1, 0.3;
    p.prior_diag = Eigen::VectorXd::Ones(1);
    p.lambda = 1.0;
    p.expected_alpha = 1.0;
    out.push_back(p);
  }
  {
    SgdProblem p;
    p.d = 2;
    p.data.resize(3, 2);
    p.data << 0.5, -0.3, -0.2, 0.8, 1.0, 0.0;
    p.prior_diag.resize(2);
    p.prior_diag << 1.0, 0.5;
    p.lambda = 1.0;
    p.expected_alpha = 2.0 / 3.0;
    out.push_back(p);
  }
  {
    SgdProblem p;
    p.d = 5;
    p.data.resize(4, 5);
    p.data << 0.5, -0.3, 0.2, 0.0, -0.1, -0.2, 0.8, 0.1, -0.4, 0.3, 1.0, 0.0, -0.5,
        0.2, 0.6, 0.1, 0.4, 0.3, -0.2, -0.5;
    p.prior_diag.resize(5);
    p.prior_diag << 1.0, 0.8, 0.6, 0.5, 0.4;
    p.lambda = 0.5;
    p.expected_alpha = 0.5;
    out.push_back(p);
  }
  return out;
}

struct SgdRunStats {
  bool envelope_ok = true;
  bool invariant_ok = true;
  std::string envelope_msg;
  std::string invariant_msg;
  double runtime_s = 0.0;
};

SgdRunStats run_sgd_suite() {
  SgdRunStats stats;
  const auto start = Clock::now();
  const int n_seeds = 100;
  const long long steps = 500;
  const double bigM = 1.0;

  std::uint64_t base_seed = 5005;
  for (const SgdProblem& p : sgd_problems()) {
    const wpb::LossModel loss =
        wpb::builtin_loss("quadratic_plain", {{"dim", static_cast<double>(p.d)}});
    wpb::Dataset data;
    data.points = p.data;
    const wpb::GaussianMeasure prior(Eigen::VectorXd::Zero(p.d),
                                     Eigen::MatrixXd(p.prior_diag.asDiagonal()));
    const wpb::GibbsPotential gp(loss, data, prior, p.lambda, false);
    const wpb::A3Normalization an = wpb::a3_normalize(gp);
    if (std::abs(an.alpha - p.expected_alpha) > 1e-12) {
      stats.envelope_ok = false;
      stats.envelope_msg = "unexpected curvature ratio for d=" + std::to_string(p.d);
      return stats;
    }
    const wpb::GaussianMeasure target = wpb::gibbs_closed_form(an.potential);

    wpb::BwSgdConfig cfg;
    cfg.alpha = an.alpha;
    cfg.eta = an.alpha * an.alpha / 60.0;
    cfg.steps = steps;
    cfg.bigM = bigM;

    Eigen::VectorXd init_mean = Eigen::VectorXd::Zero(p.d);
    init_mean(0) = 0.9;
    const wpb::GaussianMeasure init(init_mean, 0.5 * Eigen::MatrixXd::Identity(p.d, p.d));
    const double w2sq_init = std::pow(wpb::w2_gaussian(init, target), 2);

    std::vector<double> sum(static_cast<std::size_t>(steps + 1), 0.0);
    std::vector<double> sumsq(static_cast<std::size_t>(steps + 1), 0.0);
    const double eig_lo = an.alpha / 9.0 - 1e-10;
    const double eig_hi = 1.0 / an.alpha + 1e-10;

    for (int s = 0; s < n_seeds; ++s) {
      wpb::RngStream rng =
          wpb::RngStream::derived(base_seed, static_cast<std::uint64_t>(s + 1));
      const wpb::SgdTrajectory traj = wpb::bwsgd_run(an.potential, init, cfg, rng, &target);
      for (Eigen::Index k = 0; k <= steps; ++k) {
        const double v = traj.w2sq_to_reference[static_cast<std::size_t>(k)];
        sum[static_cast<std::size_t>(k)] += v;
        sumsq[static_cast<std::size_t>(k)] += v * v;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            traj.covariances[static_cast<std::size_t>(k)], Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        const double mean_norm = traj.means[static_cast<std::size_t>(k)].norm();
        if (lo < eig_lo || hi > eig_hi || mean_norm > bigM * (1.0 + 1e-12) + 1e-12) {
          std::ostringstream msg;
          msg << "d=" << p.d << " seed=" << s << " k=" << k << ": spectrum [" << lo
              << ", " << hi << "], mean norm " << mean_norm;
          stats.invariant_ok = false;
          stats.invariant_msg = msg.str();
        }
      }
    }

    for (Eigen::Index k = 0; k <= steps; ++k) {
      const double n = static_cast<double>(n_seeds);
      const double mean = sum[static_cast<std::size_t>(k)] / n;
      const double var = std::max(
          0.0, (sumsq[static_cast<std::size_t>(k)] - n * mean * mean) / (n - 1.0));
      const double se = std::sqrt(var / n);
      const double envelope = wpb::lambert_bound(an.alpha, cfg.eta, k, w2sq_init, p.d);
      if (mean > envelope + 2.0 * se) {
        std::ostringstream msg;
        msg << "d=" << p.d << " k=" << k << ": mean " << mean << " > envelope "
            << envelope << " + 2se (se " << se << ")";
        stats.envelope_ok = false;
        stats.envelope_msg = msg.str();
      }
    }
  }
  stats.runtime_s = elapsed_s(start);
  if (stats.runtime_s > 300.0) {
    stats.envelope_ok = false;
    stats.envelope_msg = "runtime " + std::to_string(stats.runtime_s) + "s exceeds 300s";
  }
  return stats;
}

// ---------------------------------------------------------------------------
// 5. Bound-validity campaigns: measured violation rate of each bound stays
//    within binomial noise of the stated confidence level.
// ---------------------------------------------------------------------------
Criterion validity_campaigns() {
  Criterion c{"bound-validity campaigns"};
  const auto start = Clock::now();
  const int trials = 200;
  const double delta = 0.05;
  const double threshold = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / trials);

  wpb::ExperimentConfig mc;
  mc.loss_name = "bounded_sigmoid_margin";
  mc.loss_params = {{"dim", 2.0}, {"x_bound", 1.0}};
  mc.data_name = "margin";
  mc.data_params = {{"dim", 2.0}, {"x_bound", 1.0}, {"flip_prob", 0.1}};
  mc.m = 200;
  mc.bound_name = "mcallester";
  mc.inputs.delta = delta;
  mc.inputs.K = 0.25;
  mc.inputs.R = 3.0;
  mc.posterior_mean = Eigen::VectorXd::Zero(2);
  mc.posterior_mean(0) = 1.0;
  mc.posterior_cov_scale = 1.0;
  mc.prior_mean = Eigen::VectorXd::Zero(2);
  mc.prior_cov_scale = 1.0;
  mc.project_to_R = true;
  mc.trials = trials;
  mc.seed = 31;
  const wpb::ValidationSummary s_mc = wpb::validate_bound(mc);
  const double t_mc = elapsed_s(start);

  const auto start_b = Clock::now();
  wpb::ExperimentConfig ul;
  ul.loss_name = "bounded_sigmoid_margin";
  ul.loss_params = {{"dim", 3.0}, {"x_bound", 1.0}};
  ul.data_name = "margin";
  ul.data_params = {{"dim", 3.0}, {"x_bound", 1.0}, {"flip_prob", 0.1}};
  ul.m = 1000;
  ul.bound_name = "unbounded_lipschitz";
  ul.inputs.delta = delta;
  ul.inputs.K = 0.25;
  ul.inputs.D = 0.5;
  ul.inputs.compact = wpb::CompactClass(0.5, 1.5, 1.0);
  ul.posterior_mean = Eigen::VectorXd::Zero(3);
  ul.posterior_mean(0) = 0.8;
  ul.posterior_cov_scale = 1.0;
  ul.prior_mean = Eigen::VectorXd::Zero(3);
  ul.prior_cov_scale = 1.0;
  ul.trials = trials;
  ul.seed = 77;
  const wpb::ValidationSummary s_ul = wpb::validate_bound(ul);
  const double t_ul = elapsed_s(start_b);

  std::ostringstream msg;
  msg << "mcallester rate " << s_mc.violation_rate << ", lipschitz-class rate "
      << s_ul.violation_rate << " (threshold " << threshold << "); " << t_mc << "s / "
      << t_ul << "s";
  c.detail = msg.str();
  if (!s_mc.all_valid || !s_ul.all_valid) {
    c.detail += "; a bound premise failed";
    return c;
  }
  if (t_mc > 600.0 || t_ul > 600.0) {
    c.detail += "; campaign exceeded 600s";
    return c;
  }
  c.pass = s_mc.violation_rate <= threshold && s_ul.violation_rate <= threshold;
  return c;
}

// ---------------------------------------------------------------------------
// 6. Scheduled-SGD pipeline: the certified accuracy budget holds (the
//    decay-times-radius component stays below one) and measured violations
//    stay within binomial noise of twice the confidence level.
// ---------------------------------------------------------------------------
Criterion scheduled_pipeline() {
  Criterion c{"scheduled-sgd pipeline"};
  const auto start = Clock::now();
  wpb::EndToEndConfig cfg;
  cfg.loss_name = "quadratic_feature";
  cfg.loss_params = {{"dim", 3.0}, {"scale", 0.2}, {"psi_scale", 0.1}};
  cfg.data_name = "gaussian";
  cfg.data_params = {{"dim", 3.0}, {"sigma", 1.0}};
  cfg.m = 10000;
  const wpb::LossModel loss = wpb::builtin_loss(cfg.loss_name, cfg.loss_params);
  cfg.lambda = 2.0 * loss.lipschitz;
  cfg.gamma = 1.0;
  cfg.bigM = 1.0;
  cfg.eps = 0.1;
  cfg.delta = 0.1;
  cfg.ula.step = 0.01;
  cfg.ula.burn_in = 2000;
  cfg.ula.thinning = 10;
  cfg.trials = 100;
  cfg.seed = 2024;

  const wpb::EndToEndSummary summary = wpb::end_to_end_sgd_generalisation(cfg);
  const double threshold =
      2.0 * cfg.delta +
      3.0 * std::sqrt(2.0 * cfg.delta * (1.0 - 2.0 * cfg.delta) /
                      static_cast<double>(cfg.trials));
  std::ostringstream msg;
  msg << "w2 component " << summary.w2_term << " (<= 1), violation rate "
      << summary.violation_rate << " (threshold " << threshold << "), "
      << summary.steps << " steps, " << elapsed_s(start) << "s";
  c.detail = msg.str();
  if (!summary.all_valid) {
    c.detail += "; a bound premise failed";
    return c;
  }
  c.pass = summary.w2_term <= 1.0 && summary.violation_rate <= threshold;
  return c;
}

// ---------------------------------------------------------------------------
// 7. Formula spot checks against independently computed constants.
// ---------------------------------------------------------------------------
Criterion formula_spot_checks() {
  Criterion c{"formula spot checks"};
  struct Probe {
    std::string what;
    double got;
    double want;
  };
  const std::vector<Probe> probes = {
      {"lambda_max", wpb::lambda_max_catoni(1.0, 500, 3, 2.0, 0.002, 0.05),
       4.503897123339155},
      {"dp_lambda_threshold", wpb::dp_lambda_threshold(1.0, 1.0, 100),
       0.01617631604395419},
      {"rad_radius", wpb::rad_radius(wpb::CompactClass(1.0, 1.0, 0.0), 100, 3),
       4.6452303299635025},
      {"lambert_bound", wpb::lambert_bound(1.0, 1.0 / 300.0, 300, 1.0, 10),
       1.5678794411714423},
  };
  for (const Probe& p : probes) {
    const double rel = std::abs(p.got - p.want) / std::abs(p.want);
    if (rel > 1e-10) {
      std::ostringstream msg;
      msg << p.what << ": got " << p.got << ", expected " << p.want << " (rel " << rel
          << ")";
      c.detail = msg.str();
      return c;
    }
  }
  c.detail = "4 constants reproduced to 1e-10 relative";
  c.pass = true;
  return c;
}

// ---------------------------------------------------------------------------
// 8. Derivative and sampler oracles: analytic gradients/hessians of every
//    builtin loss and of the variational potential match central finite
//    differences; the Langevin sampler reproduces the closed-form Gibbs
//    moments within Monte Carlo error.
// ---------------------------------------------------------------------------
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    g(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                           const Eigen::VectorXd& x, double h) {
  Eigen::MatrixXd out(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    out.col(i) = (g(hi) - g(lo)) / (2.0 * h);
  }
  return 0.5 * (out + out.transpose());
}

Criterion derivative_and_sampler_oracles() {
  Criterion c{"derivative and sampler oracles"};
  const std::vector<std::pair<std::string, std::map<std::string, double>>> losses = {
      {"quadratic_plain", {{"dim", 3.0}}},
      {"bounded_sigmoid_margin", {{"dim", 3.0}, {"x_bound", 1.0}}},
      {"quadratic_feature", {{"dim", 3.0}, {"scale", 0.5}, {"psi_scale", 0.5}}},
  };
  wpb::RngStream rng(8008);
  for (const auto& [name, params] : losses) {
    const wpb::LossModel loss = wpb::builtin_loss(name, params);
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::VectorXd h = rng.normal_vector(loss.dim_h);
      const Eigen::VectorXd z = rng.normal_vector(loss.dim_z);
      const Eigen::VectorXd g = loss.gradient(h, z);
      const Eigen::VectorXd g_fd = fd_gradient(
          [&](const Eigen::VectorXd& x) { return loss.value(x, z); }, h, 1e-6);
      if ((g - g_fd).norm() > 1e-5 * std::max(1.0, g.norm())) {
        c.detail = name + ": gradient finite-difference mismatch";
        return c;
      }
      const Eigen::MatrixXd hess = loss.hessian(h, z);
      const Eigen::MatrixXd h_fd = fd_hessian(
          [&](const Eigen::VectorXd& x) { return loss.gradient(x, z); }, h, 1e-5);
      if ((hess - h_fd).norm() > 1e-4 * std::max(1.0, hess.norm())) {
        c.detail = name + ": hessian finite-difference mismatch";
        return c;
      }
    }
  }

  // The variational potential on a small quadratic problem.
  const wpb::LossModel qloss = wpb::builtin_loss("quadratic_plain", {{"dim", 2.0}});
  wpb::Dataset data;
  data.points.resize(3, 2);
  data.points << 0.5, -0.3, -0.2, 0.8, 1.0, 0.0;
  const wpb::GaussianMeasure prior(Eigen::VectorXd::Zero(2),
                                   0.8 * Eigen::MatrixXd::Identity(2, 2));
  const wpb::GibbsPotential gp(qloss, data, prior, 1.0, false);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd h = rng.normal_vector(2);
    const Eigen::VectorXd g = gp.gradient(h);
    const Eigen::VectorXd g_fd = fd_gradient(
        [&](const Eigen::VectorXd& x) { return gp.value(x); }, h, 1e-6);
    if ((g - g_fd).norm() > 1e-5 * std::max(1.0, g.norm())) {
      c.detail = "potential gradient finite-difference mismatch";
      return c;
    }
    const Eigen::MatrixXd hess = gp.hessian(h);
    const Eigen::MatrixXd h_fd = fd_hessian(
        [&](const Eigen::VectorXd& x) { return gp.gradient(x); }, h, 1e-5);
    if ((hess - h_fd).norm() > 1e-4 * std::max(1.0, hess.norm())) {
      c.detail = "potential hessian finite-difference mismatch";
      return c;
    }
  }

  // Langevin sampler vs the closed-form Gibbs measure.
  const wpb::GaussianMeasure target = wpb::gibbs_closed_form(gp);
  wpb::UlaOptions options;
  options.step = 0.005;
  options.burn_in = 4000;
  options.thinning = 10;
  wpb::RngStream ula_rng(8009);
  const wpb::SampleCloud cloud = wpb::ula_sample(gp, 8000, options, ula_rng);
  for (Eigen::Index k = 0; k < 2; ++k) {
    std::vector<double> coord(static_cast<std::size_t>(cloud.size()));
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      coord[static_cast<std::size_t>(i)] = cloud.points(i, k);
    }
    const double mean =
        std::accumulate(coord.begin(), coord.end(), 0.0) / static_cast<double>(cloud.size());
    const double se = wpb::batch_means_se(coord);
    if (std::abs(mean - target.mean()(k)) > 3.0 * se) {
      std::ostringstream msg;
      msg << "sampler mean[" << k << "] " << mean << " vs " << target.mean()(k)
          << " (3se " << 3.0 * se << ")";
      c.detail = msg.str();
      return c;
    }
    std::vector<double> sq(coord.size());
    for (std::size_t i = 0; i < coord.size(); ++i) {
      const double dcoord = coord[i] - mean;
      sq[i] = dcoord * dcoord;
    }
    const double var =
        std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size());
    const double var_se = wpb::batch_means_se(sq);
    if (std::abs(var - target.covariance()(k, k)) > 3.0 * var_se) {
      std::ostringstream msg;
      msg << "sampler var[" << k << "] " << var << " vs " << target.covariance()(k, k)
          << " (3se " << 3.0 * var_se << ")";
      c.detail = msg.str();
      return c;
    }
  }
  c.detail = "3 losses + potential at 100 points each; sampler moments within 3se";
  c.pass = true;
  return c;
}

void report(const Criterion& c, int index, int& failures) {
  if (!c.pass) ++failures;
  std::cout << (c.pass ? "PASS" : "FAIL") << " [" << index << "/8] " << c.name << ": "
            << c.detail << std::endl;
}

}  // namespace

int main() {
  int failures = 0;
  try {
    report(tail_mass_suite(), 1, failures);
    report(transport_oracle(), 2, failures);

    const SgdRunStats sgd = run_sgd_suite();
    Criterion c3{"sgd-contraction envelope"};
    c3.pass = sgd.envelope_ok;
    c3.detail = sgd.envelope_ok
                    ? "3 problems x 100 seeds x 500 steps within envelope + 2se, " +
                          std::to_string(sgd.runtime_s) + "s"
                    : sgd.envelope_msg;
    report(c3, 3, failures);
    Criterion c4{"iterate-compactness invariant"};
    c4.pass = sgd.invariant_ok;
    c4.detail = sgd.invariant_ok
                    ? "all spectra in [alpha/9, 1/alpha] and means inside the ball"
                    : sgd.invariant_msg;
    report(c4, 4, failures);

    report(validity_campaigns(), 5, failures);
    report(scheduled_pipeline(), 6, failures);
    report(formula_spot_checks(), 7, failures);
    report(derivative_and_sampler_oracles(), 8, failures);
  } catch (const std::exception& e) {
    std::cout << "FAIL unexpected exception: " << e.what() << std::endl;
    ++failures;
  }
  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
            << (8 - failures) << "/8)" << std::endl;
  return failures;
}

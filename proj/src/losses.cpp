#include "wpb/losses.hpp"

#include <cmath>

#include "wpb/common.hpp"

namespace wpb {

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int get_dim(const std::map<std::string, double>& params) {
  const double d = get_param(params, "dim", 0.0);
  const int dim = static_cast<int>(d);
  if (dim < 1 || static_cast<double>(dim) != d) {
    throw ConfigError("loss/data params need integral dim >= 1");
  }
  return dim;
}

RiskEvaluator loop_risk(const LossModel& loss, const Dataset& data) {
  if (data.size() < 1) throw ConfigError("empirical risk needs a nonempty dataset");
  const double inv_m = 1.0 / static_cast<double>(data.size());
  // Copy the pointwise callables so the evaluator owns everything it needs.
  auto value = loss.value;
  auto gradient = loss.gradient;
  auto hessian = loss.hessian;
  RiskEvaluator ev;
  ev.value = [value, data, inv_m](const Eigen::VectorXd& h) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      acc += value(h, data.points.row(i).transpose());
    }
    return acc * inv_m;
  };
  ev.gradient = [gradient, data, inv_m](const Eigen::VectorXd& h) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(h.size());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      acc += gradient(h, data.points.row(i).transpose());
    }
    return Eigen::VectorXd(acc * inv_m);
  };
  ev.hessian = [hessian, data, inv_m](const Eigen::VectorXd& h) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(h.size(), h.size());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      acc += hessian(h, data.points.row(i).transpose());
    }
    return Eigen::MatrixXd(acc * inv_m);
  };
  return ev;
}

LossModel quadratic_plain(const std::map<std::string, double>& params) {
  const int dim = get_dim(params);
  const double z_bound = get_param(params, "z_bound", 0.0);
  LossModel loss;
  loss.name = "quadratic_plain";
  loss.dim_h = dim;
  loss.dim_z = dim;
  loss.value = [](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    return 0.5 * (h - z).squaredNorm();
  };
  loss.gradient = [](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    return Eigen::VectorXd(h - z);
  };
  loss.hessian = [](const Eigen::VectorXd& h, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(h.size(), h.size()));
  };
  loss.smoothness = 1.0;
  loss.grad_at_zero = z_bound;
  loss.value_at_zero = 0.5 * z_bound * z_bound;
  loss.curvature_lo = 1.0;
  loss.satisfies_A2 = true;
  loss.make_risk = [](const Dataset& data) {
    if (data.size() < 1) throw ConfigError("empirical risk needs a nonempty dataset");
    const Eigen::VectorXd zbar = data.points.colwise().mean();
    const double mean_sq = data.points.rowwise().squaredNorm().mean();
    RiskEvaluator ev;
    ev.value = [zbar, mean_sq](const Eigen::VectorXd& h) {
      return 0.5 * (h.squaredNorm() - 2.0 * h.dot(zbar) + mean_sq);
    };
    ev.gradient = [zbar](const Eigen::VectorXd& h) { return Eigen::VectorXd(h - zbar); };
    ev.hessian = [](const Eigen::VectorXd& h) {
      return Eigen::MatrixXd(Eigen::MatrixXd::Identity(h.size(), h.size()));
    };
    return ev;
  };
  return loss;
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

LossModel bounded_sigmoid_margin(const std::map<std::string, double>& params) {
  const int dim = get_dim(params);
  const double x_bound = get_param(params, "x_bound", 1.0);
  if (!(x_bound > 0.0)) throw ConfigError("bounded_sigmoid_margin needs x_bound > 0");
  LossModel loss;
  loss.name = "bounded_sigmoid_margin";
  loss.dim_h = dim;
  loss.dim_z = dim + 1;  // (x, y) with y = +-1 in the last coordinate
  auto split = [dim](const Eigen::VectorXd& z) {
    if (z.size() != dim + 1) throw ConfigError("margin data point has wrong dimension");
    return std::pair<Eigen::VectorXd, double>(z.head(dim), z(dim));
  };
  loss.value = [split](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    const auto [x, y] = split(z);
    return sigmoid(-y * h.dot(x));
  };
  loss.gradient = [split](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    const auto [x, y] = split(z);
    const double s = sigmoid(-y * h.dot(x));
    return Eigen::VectorXd(-y * s * (1.0 - s) * x);
  };
  loss.hessian = [split](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    const auto [x, y] = split(z);
    const double s = sigmoid(-y * h.dot(x));
    const double curv = y * y * s * (1.0 - s) * (1.0 - 2.0 * s);
    return Eigen::MatrixXd(curv * (x * x.transpose()));
  };
  loss.lipschitz = x_bound / 4.0;
  loss.smoothness = x_bound * x_bound / (6.0 * std::sqrt(3.0));
  loss.grad_at_zero = x_bound / 4.0;
  loss.value_at_zero = 0.5;
  loss.curvature_lo = -x_bound * x_bound / (6.0 * std::sqrt(3.0));
  loss.convex_radius = 0.0;
  loss.bounded01 = true;
  loss.satisfies_A1 = true;
  // No sufficient-statistic reduction exists; builtin_loss installs the loop.
  return loss;
}

LossModel quadratic_feature(const std::map<std::string, double>& params) {
  const int dim = get_dim(params);
  const double c = get_param(params, "scale", 1.0);
  const double cpsi = get_param(params, "psi_scale", 1.0);
  if (!(c > 0.0) || !(cpsi > 0.0)) {
    throw ConfigError("quadratic_feature needs scale > 0 and psi_scale > 0");
  }
  LossModel loss;
  loss.name = "quadratic_feature";
  loss.dim_h = dim;
  loss.dim_z = dim;
  loss.value = [c, cpsi](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    const Eigen::ArrayXd e = c * h.array().tanh() - cpsi * z.array().tanh();
    return (e * e).sum();
  };
  loss.gradient = [c, cpsi](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    const Eigen::ArrayXd t = h.array().tanh();
    const Eigen::ArrayXd e = c * t - cpsi * z.array().tanh();
    return Eigen::VectorXd(2.0 * c * (1.0 - t * t) * e);
  };
  loss.hessian = [c, cpsi](const Eigen::VectorXd& h, const Eigen::VectorXd& z) {
    const Eigen::ArrayXd t = h.array().tanh();
    const Eigen::ArrayXd s2 = 1.0 - t * t;
    const Eigen::ArrayXd e = c * t - cpsi * z.array().tanh();
    const Eigen::ArrayXd diag = 2.0 * c * s2 * (c * s2 - 2.0 * t * e);
    return Eigen::MatrixXd(diag.matrix().asDiagonal());
  };
  const double sd = std::sqrt(static_cast<double>(dim));
  loss.lipschitz = 2.0 * c * sd * (c + cpsi);
  loss.smoothness = 2.0 * c * (3.0 * c + 2.0 * cpsi);
  loss.grad_at_zero = 2.0 * c * cpsi * sd;
  loss.value_at_zero = cpsi * cpsi * static_cast<double>(dim);
  // min over t in [-1,1], |psi| <= cpsi of 2c s^2 (c s^2 - 2 t (c t - psi))
  // >= -4c (c + cpsi) max |t| s^2 = -(8 / 3 sqrt 3) c (c + cpsi).
  loss.curvature_lo = -(8.0 / (3.0 * std::sqrt(3.0))) * c * (c + cpsi);
  // Componentwise convexity certified for |tanh h_k| <= (-r + sqrt(r^2+3))/3
  // with r = cpsi / c.
  {
    const double r = cpsi / c;
    const double t_max = (-r + std::sqrt(r * r + 3.0)) / 3.0;
    loss.convex_radius = std::atanh(t_max);
  }
  loss.bounded01 = static_cast<double>(dim) * (c + cpsi) * (c + cpsi) <= 1.0;
  loss.satisfies_A1 = true;
  loss.satisfies_A2 = true;
  loss.make_risk = [c, cpsi](const Dataset& data) {
    if (data.size() < 1) throw ConfigError("empirical risk needs a nonempty dataset");
    // The loss is separable in (tanh h_k, tanh z_k), so the empirical risk
    // depends on the data only through the feature mean and mean square.
    const Eigen::ArrayXd psi_mean =
        (cpsi * data.points.array().tanh()).colwise().mean();
    const double psi_sq_mean =
        (cpsi * data.points.array().tanh()).square().rowwise().sum().mean();
    RiskEvaluator ev;
    ev.value = [c, psi_mean, psi_sq_mean](const Eigen::VectorXd& h) {
      const Eigen::ArrayXd t = h.array().tanh();
      return (c * c * t * t - 2.0 * c * t * psi_mean).sum() + psi_sq_mean;
    };
    ev.gradient = [c, psi_mean](const Eigen::VectorXd& h) {
      const Eigen::ArrayXd t = h.array().tanh();
      return Eigen::VectorXd(2.0 * c * (1.0 - t * t) * (c * t - psi_mean));
    };
    ev.hessian = [c, psi_mean](const Eigen::VectorXd& h) {
      const Eigen::ArrayXd t = h.array().tanh();
      const Eigen::ArrayXd s2 = 1.0 - t * t;
      const Eigen::ArrayXd diag = 2.0 * c * s2 * (c * s2 - 2.0 * t * (c * t - psi_mean));
      return Eigen::MatrixXd(diag.matrix().asDiagonal());
    };
    return ev;
  };
  return loss;
}

}  // namespace

LossModel builtin_loss(const std::string& name, const std::map<std::string, double>& params) {
  LossModel loss;
  if (name == "quadratic_plain") {
    loss = quadratic_plain(params);
  } else if (name == "bounded_sigmoid_margin") {
    loss = bounded_sigmoid_margin(params);
  } else if (name == "quadratic_feature") {
    loss = quadratic_feature(params);
  } else {
    throw ConfigError("unknown loss model: " + name);
  }
  if (!loss.make_risk) {
    loss.make_risk = [loss_body = loss](const Dataset& data) {
      return loop_risk(loss_body, data);
    };
  }
  return loss;
}

double effective_lipschitz_on_ball(const LossModel& loss, double R) {
  if (!(R >= 0.0)) throw ConfigError("effective_lipschitz_on_ball needs R >= 0");
  if (std::isnan(loss.smoothness) || std::isnan(loss.grad_at_zero)) {
    throw ConfigError("loss lacks smoothness or gradient-at-zero constants");
  }
  return loss.grad_at_zero + loss.smoothness * R;
}

DataModel make_data_model(const std::string& name,
                          const std::map<std::string, double>& params) {
  DataModel model;
  model.name = name;
  if (name == "gaussian") {
    const int dim = get_dim(params);
    const double sigma = get_param(params, "sigma", 1.0);
    if (!(sigma > 0.0)) throw ConfigError("gaussian data model needs sigma > 0");
    model.dim_z = dim;
    model.draw = [dim, sigma](RngStream& rng) {
      return Eigen::VectorXd(sigma * rng.normal_vector(dim));
    };
  } else if (name == "margin") {
    const int dim = get_dim(params);
    const double x_bound = get_param(params, "x_bound", 1.0);
    const double flip_prob = get_param(params, "flip_prob", 0.1);
    if (!(x_bound > 0.0)) throw ConfigError("margin data model needs x_bound > 0");
    if (flip_prob < 0.0 || flip_prob > 1.0) {
      throw ConfigError("margin data model needs flip_prob in [0, 1]");
    }
    model.dim_z = dim + 1;
    model.draw = [dim, x_bound, flip_prob](RngStream& rng) {
      Eigen::VectorXd x = rng.normal_vector(dim);
      const double n = x.norm();
      x = (n > 0.0) ? Eigen::VectorXd(x_bound * x / n)
                    : Eigen::VectorXd(x_bound * Eigen::VectorXd::Unit(dim, 0));
      double y = x(0) >= 0.0 ? 1.0 : -1.0;
      if (rng.uniform() < flip_prob) y = -y;
      Eigen::VectorXd z(dim + 1);
      z << x, y;
      return z;
    };
  } else {
    throw ConfigError("unknown data model: " + name);
  }
  return model;
}

Dataset draw_dataset(const DataModel& model, Eigen::Index m, RngStream& rng) {
  if (m < 1) throw ConfigError("dataset size must be >= 1");
  Dataset data;
  data.points.resize(m, model.dim_z);
  for (Eigen::Index i = 0; i < m; ++i) {
    data.points.row(i) = model.draw(rng).transpose();
  }
  return data;
}

double empirical_risk(const LossModel& loss, const Dataset& data, const Eigen::VectorXd& h) {
  return loss.make_risk(data).value(h);
}

GapEstimate gap_estimate(const LossModel& loss, const DataModel& model, const Dataset& data,
                         const SampleCloud& predictors, Eigen::Index n_test, RngStream& rng) {
  if (predictors.size() < 2) throw ConfigError("gap_estimate needs at least two predictors");
  if (n_test < 1) throw ConfigError("gap_estimate needs n_test >= 1");
  const RiskEvaluator risk = loss.make_risk(data);
  const Eigen::Index n_h = predictors.size();
  Eigen::VectorXd gaps(n_h);
  for (Eigen::Index i = 0; i < n_h; ++i) {
    const Eigen::VectorXd h = predictors.points.row(i).transpose();
    double out = 0.0;
    for (Eigen::Index t = 0; t < n_test; ++t) {
      out += loss.value(h, model.draw(rng));
    }
    out /= static_cast<double>(n_test);
    gaps(i) = out - risk.value(h);
  }
  const double mean = gaps.mean();
  const double var = (gaps.array() - mean).square().sum() / static_cast<double>(n_h - 1);
  return GapEstimate{mean, std::sqrt(var / static_cast<double>(n_h))};
}

}  // namespace wpb

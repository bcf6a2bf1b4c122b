#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "wpb/common.hpp"
#include "wpb/losses.hpp"
#include "wpb/rng.hpp"

namespace {

Eigen::VectorXd fd_gradient(const wpb::LossModel& loss, const Eigen::VectorXd& h,
                            const Eigen::VectorXd& z, double step = 1e-5) {
  Eigen::VectorXd g(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    Eigen::VectorXd hp = h, hm = h;
    hp(i) += step;
    hm(i) -= step;
    g(i) = (loss.value(hp, z) - loss.value(hm, z)) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const wpb::LossModel& loss, const Eigen::VectorXd& h,
                           const Eigen::VectorXd& z, double step = 1e-5) {
  Eigen::MatrixXd m(h.size(), h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    Eigen::VectorXd hp = h, hm = h;
    hp(i) += step;
    hm(i) -= step;
    m.col(i) = (loss.gradient(hp, z) - loss.gradient(hm, z)) / (2.0 * step);
  }
  return m;
}

void check_derivatives(const wpb::LossModel& loss, wpb::RngStream& rng, int reps) {
  for (int rep = 0; rep < reps; ++rep) {
    const Eigen::VectorXd h = rng.normal_vector(loss.dim_h);
    const Eigen::VectorXd z = rng.normal_vector(loss.dim_z);
    const Eigen::VectorXd g = loss.gradient(h, z);
    const Eigen::VectorXd gfd = fd_gradient(loss, h, z);
    CHECK((g - gfd).norm() <= 1e-5 * (1.0 + g.norm()));
    const Eigen::MatrixXd hess = loss.hessian(h, z);
    const Eigen::MatrixXd hfd = fd_hessian(loss, h, z);
    CHECK((hess - hfd).norm() <= 1e-4 * (1.0 + hess.norm()));
  }
}

wpb::Dataset random_dataset(Eigen::Index m, Eigen::Index d, wpb::RngStream& rng) {
  wpb::Dataset data;
  data.points.resize(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < d; ++j) data.points(i, j) = rng.normal();
  return data;
}

void check_risk_reduction(const wpb::LossModel& loss, const wpb::Dataset& data,
                          wpb::RngStream& rng) {
  const wpb::RiskEvaluator fused = loss.make_risk(data);
  // Reference: the plain average over the dataset, one loss call per point.
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd h = rng.normal_vector(loss.dim_h);
    double v = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(loss.dim_h);
    Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(loss.dim_h, loss.dim_h);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const Eigen::VectorXd z = data.points.row(i).transpose();
      v += loss.value(h, z);
      g += loss.gradient(h, z);
      hs += loss.hessian(h, z);
    }
    const double inv_m = 1.0 / static_cast<double>(data.size());
    v *= inv_m;
    g *= inv_m;
    hs *= inv_m;
    CHECK(fused.value(h) == doctest::Approx(v).epsilon(1e-12));
    CHECK((fused.gradient(h) - g).norm() <= 1e-12 * (1.0 + g.norm()));
    CHECK((fused.hessian(h) - hs).norm() <= 1e-12 * (1.0 + hs.norm()));
  }
}

}  // namespace

TEST_CASE("plain quadratic loss: derivatives, constants, risk reduction") {
  const wpb::LossModel loss =
      wpb::builtin_loss("quadratic_plain", {{"dim", 3.0}, {"z_bound", 2.0}});
  CHECK(loss.dim_h == 3);
  CHECK(loss.dim_z == 3);
  CHECK(loss.smoothness == doctest::Approx(1.0));
  CHECK(loss.grad_at_zero == doctest::Approx(2.0));
  CHECK(loss.value_at_zero == doctest::Approx(2.0));
  CHECK(loss.curvature_lo == doctest::Approx(1.0));
  CHECK(loss.satisfies_A2);
  CHECK_FALSE(loss.bounded01);
  CHECK(std::isnan(loss.lipschitz));

  wpb::RngStream rng(11);
  check_derivatives(loss, rng, 20);
  check_risk_reduction(loss, random_dataset(37, 3, rng), rng);

  Eigen::VectorXd h(3), z(3);
  h << 1.0, 0.0, -1.0;
  z << 0.0, 0.0, 0.0;
  CHECK(loss.value(h, z) == doctest::Approx(1.0));

  CHECK(wpb::effective_lipschitz_on_ball(loss, 3.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(wpb::effective_lipschitz_on_ball(loss, -1.0), wpb::ConfigError);
}

TEST_CASE("sigmoid margin loss: range, derivatives, certified constants") {
  const double xb = 1.5;
  const wpb::LossModel loss =
      wpb::builtin_loss("bounded_sigmoid_margin", {{"dim", 2.0}, {"x_bound", xb}});
  CHECK(loss.dim_h == 2);
  CHECK(loss.dim_z == 3);
  CHECK(loss.lipschitz == doctest::Approx(xb / 4.0).epsilon(1e-12));
  CHECK(loss.smoothness == doctest::Approx(xb * xb / (6.0 * std::sqrt(3.0))).epsilon(1e-12));
  CHECK(loss.grad_at_zero == doctest::Approx(xb / 4.0).epsilon(1e-12));
  CHECK(loss.value_at_zero == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(loss.bounded01);
  CHECK(loss.satisfies_A1);

  wpb::RngStream rng(22);
  auto draw_z = [&rng, xb]() {
    Eigen::VectorXd x = rng.normal_vector(2);
    x *= xb / x.norm();
    Eigen::VectorXd z(3);
    z << x, (rng.uniform() < 0.5 ? 1.0 : -1.0);
    return z;
  };
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::VectorXd h = 3.0 * rng.normal_vector(2);
    const Eigen::VectorXd z = draw_z();
    const double v = loss.value(h, z);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    // Certified gradient bound on data with |x| <= x_bound.
    CHECK(loss.gradient(h, z).norm() <= loss.lipschitz + 1e-12);
    // Certified curvature floor.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(loss.hessian(h, z));
    CHECK(es.eigenvalues().minCoeff() >= loss.curvature_lo - 1e-12);
  }
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd h = rng.normal_vector(2);
    const Eigen::VectorXd z = draw_z();
    CHECK((loss.gradient(h, z) - fd_gradient(loss, h, z)).norm() <= 1e-6);
    CHECK((loss.hessian(h, z) - fd_hessian(loss, h, z)).norm() <= 1e-5);
  }
  check_risk_reduction(loss, random_dataset(13, 3, rng), rng);

  Eigen::VectorXd short_z(2);
  short_z << 1.0, 1.0;
  CHECK_THROWS_AS(loss.value(Eigen::VectorXd::Zero(2), short_z), wpb::ConfigError);
}

TEST_CASE("feature quadratic loss: frozen constants and derivatives") {
  const double c = 0.5, cpsi = 0.5;
  const wpb::LossModel loss = wpb::builtin_loss(
      "quadratic_feature", {{"dim", 3.0}, {"scale", c}, {"psi_scale", cpsi}});
  CHECK(loss.lipschitz == doctest::Approx(1.7320508075688772).epsilon(1e-12));
  CHECK(loss.smoothness == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(loss.grad_at_zero == doctest::Approx(0.8660254037844386).epsilon(1e-12));
  CHECK(loss.value_at_zero == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(loss.curvature_lo ==
        doctest::Approx(-(8.0 / (3.0 * std::sqrt(3.0))) * c * (c + cpsi)).epsilon(1e-12));
  const double r = cpsi / c;
  const double t_max = (-r + std::sqrt(r * r + 3.0)) / 3.0;
  CHECK(loss.convex_radius == doctest::Approx(std::atanh(t_max)).epsilon(1e-12));
  // Sup over (h, z) is d (c + cpsi)^2 = 3 here, so this model is not [0,1].
  CHECK_FALSE(loss.bounded01);
  CHECK(loss.satisfies_A1);
  CHECK(loss.satisfies_A2);

  wpb::RngStream rng(33);
  check_derivatives(loss, rng, 20);
  check_risk_reduction(loss, random_dataset(29, 3, rng), rng);

  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::VectorXd h = 2.0 * rng.normal_vector(3);
    const Eigen::VectorXd z = 2.0 * rng.normal_vector(3);
    const double v = loss.value(h, z);
    CHECK(v >= 0.0);
    CHECK(v <= 3.0 * (c + cpsi) * (c + cpsi) + 1e-12);
    CHECK(loss.gradient(h, z).norm() <= loss.lipschitz + 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(loss.hessian(h, z));
    CHECK(es.eigenvalues().minCoeff() >= loss.curvature_lo - 1e-12);
  }

  // A gentler configuration does stay inside [0, 1]: sup = d (c + cpsi)^2.
  const wpb::LossModel gentle = wpb::builtin_loss(
      "quadratic_feature", {{"dim", 3.0}, {"scale", 0.2}, {"psi_scale", 0.1}});
  CHECK(gentle.bounded01);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::VectorXd h = 3.0 * rng.normal_vector(3);
    const Eigen::VectorXd z = 3.0 * rng.normal_vector(3);
    const double v = gentle.value(h, z);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("feature quadratic loss is convex inside the certified radius") {
  const wpb::LossModel loss = wpb::builtin_loss(
      "quadratic_feature", {{"dim", 2.0}, {"scale", 0.2}, {"psi_scale", 0.1}});
  const double rad = loss.convex_radius;
  REQUIRE(rad > 0.0);
  wpb::RngStream rng(44);
  for (int rep = 0; rep < 200; ++rep) {
    // Points in the componentwise box |h_k| <= convex_radius, arbitrary data.
    Eigen::VectorXd a(2), b(2);
    for (int k = 0; k < 2; ++k) {
      a(k) = rng.uniform(-rad, rad);
      b(k) = rng.uniform(-rad, rad);
    }
    const Eigen::VectorXd z = 3.0 * rng.normal_vector(2);
    const Eigen::MatrixXd hess = loss.hessian(a, z);
    CHECK(hess.diagonal().minCoeff() >= -1e-12);
    const double mid = loss.value(0.5 * (a + b), z);
    CHECK(mid <= 0.5 * (loss.value(a, z) + loss.value(b, z)) + 1e-12);
  }
}

TEST_CASE("loss registry validation") {
  CHECK_THROWS_AS(wpb::builtin_loss("nope", {}), wpb::ConfigError);
  CHECK_THROWS_AS(wpb::builtin_loss("quadratic_plain", {}), wpb::ConfigError);
  CHECK_THROWS_AS(wpb::builtin_loss("quadratic_plain", {{"dim", 1.5}}), wpb::ConfigError);
  CHECK_THROWS_AS(
      wpb::builtin_loss("quadratic_feature", {{"dim", 2.0}, {"scale", -1.0}}),
      wpb::ConfigError);
}

TEST_CASE("data models draw the advertised distributions") {
  wpb::RngStream rng(55);

  const wpb::DataModel g =
      wpb::make_data_model("gaussian", {{"dim", 3.0}, {"sigma", 2.0}});
  CHECK(g.dim_z == 3);
  const wpb::Dataset gd = wpb::draw_dataset(g, 4000, rng);
  CHECK(gd.points.colwise().mean().norm() < 0.15);
  CHECK(gd.points.array().square().colwise().mean().mean() == doctest::Approx(4.0).epsilon(0.1));

  const wpb::DataModel m = wpb::make_data_model(
      "margin", {{"dim", 2.0}, {"x_bound", 1.5}, {"flip_prob", 0.0}});
  CHECK(m.dim_z == 3);
  const wpb::Dataset md = wpb::draw_dataset(m, 500, rng);
  for (Eigen::Index i = 0; i < md.size(); ++i) {
    CHECK(md.points.row(i).head(2).norm() == doctest::Approx(1.5).epsilon(1e-12));
    const double y = md.points(i, 2);
    CHECK(std::abs(y) == doctest::Approx(1.0));
    CHECK(y == (md.points(i, 0) >= 0.0 ? 1.0 : -1.0));  // no label noise
  }

  const wpb::DataModel noisy = wpb::make_data_model(
      "margin", {{"dim", 2.0}, {"x_bound", 1.0}, {"flip_prob", 0.25}});
  const wpb::Dataset nd = wpb::draw_dataset(noisy, 8000, rng);
  int flips = 0;
  for (Eigen::Index i = 0; i < nd.size(); ++i) {
    if (nd.points(i, 2) != (nd.points(i, 0) >= 0.0 ? 1.0 : -1.0)) ++flips;
  }
  CHECK(static_cast<double>(flips) / 8000.0 == doctest::Approx(0.25).epsilon(0.1));

  CHECK_THROWS_AS(wpb::make_data_model("nope", {}), wpb::ConfigError);
  CHECK_THROWS_AS(
      wpb::make_data_model("margin", {{"dim", 2.0}, {"flip_prob", 1.5}}),
      wpb::ConfigError);
  CHECK_THROWS_AS(wpb::draw_dataset(g, 0, rng), wpb::ConfigError);
}

TEST_CASE("gap estimate agrees with the closed form for the plain quadratic") {
  // For the plain quadratic with data z ~ N(0, sigma^2 I):
  //   R_out(h) - R_S(h) = (h . zbar) + (tr Sigma_z - mean |z_i|^2) / 2,
  // so the population gap over h ~ Q is mu_Q . zbar + (d sigma^2 - mean |z|^2)/2.
  const int d = 2;
  const double sigma = 1.0;
  const wpb::LossModel loss = wpb::builtin_loss("quadratic_plain", {{"dim", 2.0}});
  const wpb::DataModel model =
      wpb::make_data_model("gaussian", {{"dim", 2.0}, {"sigma", sigma}});
  wpb::RngStream rng(66);
  const wpb::Dataset data = wpb::draw_dataset(model, 50, rng);

  Eigen::VectorXd q_mean(d);
  q_mean << 0.4, -0.2;
  const wpb::GaussianMeasure q(q_mean, 0.25 * Eigen::MatrixXd::Identity(d, d));
  const wpb::SampleCloud predictors = wpb::sample(q, 512, rng);

  const wpb::GapEstimate est = wpb::gap_estimate(loss, model, data, predictors, 400, rng);
  const Eigen::VectorXd zbar = data.points.colwise().mean();
  const double mean_sq = data.points.rowwise().squaredNorm().mean();
  // The per-predictor gap is affine in h; average over the drawn cloud.
  const Eigen::VectorXd h_mean = predictors.points.colwise().mean();
  const double oracle = h_mean.dot(zbar) + 0.5 * (d * sigma * sigma - mean_sq);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.estimate - oracle) <= 4.0 * est.std_error);

  wpb::SampleCloud one;
  one.points = Eigen::MatrixXd::Zero(1, d);
  CHECK_THROWS_AS(wpb::gap_estimate(loss, model, data, one, 10, rng), wpb::ConfigError);
}

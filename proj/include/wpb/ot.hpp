#pragma once

#include <Eigen/Dense>

#include "wpb/gaussian.hpp"

namespace wpb {

/// Largest cloud size accepted by the exact assignment solver. Larger inputs
/// raise ConfigError instead of silently degrading accuracy or stalling.
inline constexpr Eigen::Index kMaxAssignmentSize = 4096;

/// Minimal total cost of a perfect matching on a square cost matrix, solved
/// exactly by reduction-initialized shortest augmenting paths.
double assignment_cost(const Eigen::MatrixXd& cost);

/// Exact 1-Wasserstein distance between two equally sized clouds under the
/// Euclidean ground metric: the optimal assignment cost divided by n.
double empirical_w1(const SampleCloud& a, const SampleCloud& b);

/// Exact 2-Wasserstein distance between two equally sized clouds:
/// sqrt of the optimal assignment under squared Euclidean cost, divided by n.
double empirical_w2(const SampleCloud& a, const SampleCloud& b);

}  // namespace wpb

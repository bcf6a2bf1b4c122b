#include "wpb/ot.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "wpb/common.hpp"

namespace wpb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Squared Euclidean cost matrix via the Gram identity.
Eigen::MatrixXd squared_cost(const SampleCloud& a, const SampleCloud& b) {
  const Eigen::VectorXd na = a.points.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.points.rowwise().squaredNorm();
  Eigen::MatrixXd c = -2.0 * (a.points * b.points.transpose());
  c.colwise() += na;
  c.rowwise() += nb.transpose();
  return c.cwiseMax(0.0);
}

void check_pair(const SampleCloud& a, const SampleCloud& b) {
  if (a.size() != b.size()) {
    throw ConfigError("empirical OT needs equally sized clouds");
  }
  if (a.dim() != b.dim()) {
    throw ConfigError("empirical OT needs clouds of equal dimension");
  }
  if (a.size() == 0) {
    throw ConfigError("empirical OT needs nonempty clouds");
  }
  if (a.size() > kMaxAssignmentSize) {
    std::ostringstream msg;
    msg << "cloud size " << a.size() << " exceeds assignment solver capacity "
        << kMaxAssignmentSize;
    throw ConfigError(msg.str());
  }
}

}  // namespace

double assignment_cost(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) {
    throw ConfigError("assignment_cost: matrix must be square");
  }
  const Eigen::Index n = cost.rows();
  if (n == 0) return 0.0;
  if (!cost.allFinite()) {
    throw NumericError("assignment_cost: non-finite cost entry");
  }

  std::vector<double> u(n, 0.0), v(n, 0.0);
  std::vector<Eigen::Index> row_to_col(n, -1), col_to_row(n, -1);

  // Column reduction, then a greedy pass over zero reduced costs. Both keep
  // the dual feasibility invariant cost(i,j) - u[i] - v[j] >= 0.
  for (Eigen::Index j = 0; j < n; ++j) v[j] = cost.col(j).minCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = kInf;
    Eigen::Index best_j = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = cost(i, j) - v[j];
      if (r < best) {
        best = r;
        best_j = j;
      }
    }
    u[i] = best;
    if (col_to_row[best_j] == -1) {
      row_to_col[i] = best_j;
      col_to_row[best_j] = i;
    }
  }

  // Shortest augmenting path (dense Dijkstra with potentials) per free row.
  std::vector<double> dist(n);
  std::vector<Eigen::Index> pred(n);
  std::vector<char> scanned(n);
  for (Eigen::Index f = 0; f < n; ++f) {
    if (row_to_col[f] != -1) continue;
    std::fill(scanned.begin(), scanned.end(), 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      dist[j] = cost(f, j) - u[f] - v[j];
      pred[j] = f;
    }
    Eigen::Index sink = -1;
    double mu = 0.0;
    while (sink == -1) {
      double best = kInf;
      Eigen::Index bj = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!scanned[j] && dist[j] < best) {
          best = dist[j];
          bj = j;
        }
      }
      if (bj == -1) {
        throw NumericError("assignment_cost: no augmenting path found");
      }
      scanned[bj] = 1;
      mu = dist[bj];
      if (col_to_row[bj] == -1) {
        sink = bj;
        break;
      }
      const Eigen::Index i = col_to_row[bj];
      for (Eigen::Index j = 0; j < n; ++j) {
        if (scanned[j]) continue;
        const double nd = mu + cost(i, j) - u[i] - v[j];
        if (nd < dist[j]) {
          dist[j] = nd;
          pred[j] = i;
        }
      }
    }
    // Dual update: scanned columns drop by mu - dist, their matched rows rise
    // by the same amount, and the free row absorbs mu. Keeps reduced costs
    // nonnegative and matched pairs tight.
    u[f] += mu;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!scanned[j]) continue;
      v[j] += dist[j] - mu;
      const Eigen::Index i = col_to_row[j];
      if (i != -1) u[i] += mu - dist[j];
    }
    // Walk the predecessor chain, flipping assignments back to the free row.
    Eigen::Index j = sink;
    while (true) {
      const Eigen::Index i = pred[j];
      col_to_row[j] = i;
      const Eigen::Index next = row_to_col[i];
      row_to_col[i] = j;
      if (i == f) break;
      j = next;
    }
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += cost(i, row_to_col[i]);
  return total;
}

double empirical_w1(const SampleCloud& a, const SampleCloud& b) {
  check_pair(a, b);
  const Eigen::MatrixXd c = squared_cost(a, b).cwiseSqrt();
  return assignment_cost(c) / static_cast<double>(a.size());
}

double empirical_w2(const SampleCloud& a, const SampleCloud& b) {
  check_pair(a, b);
  const Eigen::MatrixXd c = squared_cost(a, b);
  return std::sqrt(std::max(assignment_cost(c), 0.0) / static_cast<double>(a.size()));
}

}  // namespace wpb

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qtrade/qstate.hpp"

namespace qtrade {

enum class Direction { Min, Max };

struct OptConfig {
  int restarts = 20;
  int max_iters = 2000;
  /// Stop once a steepest-descent step improves the objective by less than tol.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Cap on POVM / ensemble cardinality; measures pick their default when unset.
  std::optional<int> m_outcomes;
  /// Keep every accepted objective value per restart (tests and diagnostics).
  bool record_trajectory = false;

  void validate() const;
};

/// Objective over m x r isometries V (V^dagger V = I_r).
///
/// If `row_term` is set, the objective must equal
/// offset + sum_x row_term(V.row(x)); the optimizer then updates only the
/// two rows a Givens generator touches when differencing.
struct Objective {
  std::function<double(const Mat&)> value;
  std::function<double(const Eigen::RowVectorXcd&)> row_term;
  double offset = 0.0;
  /// Value is unchanged by V -> diag(e^{i phi}) V; skips the diagonal generators.
  bool phase_invariant = false;

  double operator()(const Mat& v) const;
};

struct OptResult {
  double value = 0.0;
  Mat argument;  // best isometry found
  int iterations = 0;        // iterations of the winning restart
  int total_iterations = 0;  // summed over restarts
  int restarts_used = 0;
  int best_restart = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_restart_values;
  std::vector<std::vector<double>> trajectories;  // only with record_trajectory

  /// |best - runner-up| over restarts; +inf with a single restart.
  double spread() const;
};

/// U = exp(iH) where H is the Hermitian matrix read from theta (length m^2):
/// m diagonal entries, then for each pair j < k the real and the imaginary
/// part of H(j, k).
Mat param_to_unitary(const std::vector<double>& theta);

/// exp(iH) for Hermitian H.
Mat unitary_exp(const Mat& hermitian);

/// Orthonormalizes the columns of v (polar factor).
Mat polar_isometry(const Mat& v);

/// Seeded multi-restart local search over m x r isometries. Restart 0 starts
/// from the first r columns of the identity; restart k > 0 from a Haar
/// unitary drawn from derive_seed(config.seed, k). The result is the best
/// restart (lowest index on ties).
OptResult optimize(const Objective& objective, Direction direction, int rows, int cols, const OptConfig& config);

}  // namespace qtrade

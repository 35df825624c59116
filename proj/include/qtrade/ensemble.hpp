#pragma once

#include <vector>

#include "qtrade/entropy.hpp"
#include "qtrade/qstate.hpp"

namespace qtrade {

/// Members with weight below this are dropped from every constructed
/// ensemble.
inline constexpr double kZeroWeight = 1e-12;

/// Pure-state decomposition of `target`: sum_i weights[i] |psi_i><psi_i|.
///
/// Members are stored canonically: descending weight (ties broken by the
/// lexicographic order of the real parts of the amplitudes), each with its
/// largest-magnitude amplitude made real and positive.
class Ensemble {
 public:
  Ensemble(std::vector<double> weights, std::vector<PureState> states, DensityMatrix target);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<PureState>& states() const { return states_; }
  const DensityMatrix& target() const { return target_; }
  size_t size() const { return weights_.size(); }

  Mat mixture() const;

  /// sum_x p_x^q S_q(tr_{party 1} |psi_x><psi_x|) for a bipartite target.
  double q_expected_entanglement(QParam qp) const;

 private:
  std::vector<double> weights_;
  std::vector<PureState> states_;
  DensityMatrix target_;
};

/// Rank-one POVM {|v_x><v_x|} on a single subsystem of dimension dim().
class RankOnePovm {
 public:
  explicit RankOnePovm(std::vector<Vec> vectors);

  /// Rows of an m x d isometry V (V^dagger V = I) as <v_x|; rows with norm
  /// below sqrt(kZeroWeight) are dropped.
  static RankOnePovm from_isometry(const Mat& isometry);

  const std::vector<Vec>& vectors() const { return vectors_; }
  int dim() const { return static_cast<int>(vectors_.front().size()); }
  size_t size() const { return vectors_.size(); }

  /// Inverse of from_isometry: row x is <v_x|.
  Mat to_isometry() const;
  Mat element(size_t x) const { return vectors_[x] * vectors_[x].adjoint(); }

 private:
  std::vector<Vec> vectors_;
};

/// POVM with arbitrary positive elements.
class GeneralPovm {
 public:
  explicit GeneralPovm(std::vector<Mat> operators);
  explicit GeneralPovm(const RankOnePovm& povm);

  const std::vector<Mat>& operators() const { return operators_; }
  int dim() const { return static_cast<int>(operators_.front().rows()); }
  size_t size() const { return operators_.size(); }

 private:
  std::vector<Mat> operators_;
};

/// Decomposition from an isometric mixing of the eigen-ensemble:
/// |psi~_x> = sum_i mixing(x, i) sqrt(lambda_i) |e_i>, over the rank-r
/// support of rho. mixing must be m x r with orthonormal columns.
Ensemble hjw_ensemble(const DensityMatrix& rho, const Mat& mixing);

/// Number of nonzero eigenvalues (>= kZeroEigenvalue).
int numerical_rank(const DensityMatrix& rho);

/// Decomposition of rho_AC induced by measuring B of |psi>_ABC with a
/// rank-one POVM.
Ensemble povm_to_ensemble(const PureState& psi_abc, const RankOnePovm& povm_b);

/// Rank-one POVM on B whose induced decomposition of rho_AC reproduces
/// `ensemble_ac`. When rho_B is rank deficient the kernel of rho_B is
/// covered by extra zero-probability outcomes.
RankOnePovm ensemble_to_povm(const PureState& psi_abc, const Ensemble& ensemble_ac);

/// {p_x, rho_A^x} produced on A by measuring B of rho_AB; zero-probability
/// outcomes are dropped.
MixedEnsemble measure_induced_ensemble(const DensityMatrix& rho_ab, const GeneralPovm& povm_b);

struct RefinedPovm {
  RankOnePovm povm;
  std::vector<int> parent;  // parent[k] = index of the coarse element refined into element k
};

/// Splits each element into rank-one pieces along its eigenvectors.
RefinedPovm refine_to_rank1(const GeneralPovm& povm);

}  // namespace qtrade

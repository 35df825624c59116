#pragma once

#include <span>
#include <vector>

#include "qtrade/qstate.hpp"

namespace qtrade {

/// Entropic index q >= 0. Values within 1e-9 of 1 select the von Neumann
/// branch so that no (1 - q) denominator is ever formed near the limit.
class QParam {
 public:
  enum class Mode { General, VonNeumann };

  static constexpr double kVonNeumannThreshold = 1e-9;

  explicit QParam(double q);

  double q() const { return q_; }
  Mode mode() const { return mode_; }
  bool von_neumann() const { return mode_ == Mode::VonNeumann; }

 private:
  double q_;
  Mode mode_;
};

/// Eigenvalues (or probabilities) smaller than this are treated as zero.
inline constexpr double kZeroEigenvalue = 1e-12;

double q_log(double x, QParam qp);

/// S_q of a probability vector, after zeroing entries below kZeroEigenvalue.
double tsallis_entropy(std::span<const double> probabilities, QParam qp);
double tsallis_entropy(const DensityMatrix& rho, QParam qp);

/// p^q S_q(tau / p) for an unnormalized Hermitian PSD matrix tau with
/// p = tr(tau). Returns 0 when p < kZeroEigenvalue. This is the per-member
/// term of every q-expectation in the measures.
double weighted_entropy_term(const Mat& tau, QParam qp);

/// Eigenvalues of a small Hermitian matrix; closed form up to 2x2.
std::vector<double> hermitian_eigenvalues(const Mat& h);

/// S_q(rho_AB) - S_q(rho_B) for a bipartite rho with dims [dA, dB].
double conditional_entropy(const DensityMatrix& rho_ab, QParam qp);

/// S_q(rho_A) + S_q(rho_B) - S_q(rho_AB).
double mutual_entropy(const DensityMatrix& rho_ab, QParam qp);

/// Weighted ensemble of (possibly mixed) states of equal dimension.
struct MixedEnsemble {
  std::vector<double> weights;
  std::vector<DensityMatrix> states;

  DensityMatrix mixture() const;
};

/// S_q(sum p_i rho_i) - sum p_i^q S_q(rho_i).
double tsallis_difference(const MixedEnsemble& ensemble, QParam qp);

}  // namespace qtrade

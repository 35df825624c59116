#include "qtrade/entropy.hpp"

#include <cmath>
#include <string>

#include "qtrade/errors.hpp"

namespace qtrade {

QParam::QParam(double q) : q_(q) {
  if (!std::isfinite(q) || q < 0.0) throw ValidationError("q must be a finite real >= 0, got " + std::to_string(q));
  mode_ = std::abs(q - 1.0) < kVonNeumannThreshold ? Mode::VonNeumann : Mode::General;
}

double q_log(double x, QParam qp) {
  if (!(x > 0.0)) throw ValidationError("q_log: argument must be positive");
  if (qp.von_neumann()) return std::log(x);
  const double q = qp.q();
  return (std::pow(x, 1.0 - q) - 1.0) / (1.0 - q);
}

double tsallis_entropy(std::span<const double> probabilities, QParam qp) {
  int support = 0;
  for (double p : probabilities) support += p >= kZeroEigenvalue ? 1 : 0;
  // A single surviving eigenvalue is a pure state: exactly zero entropy.
  if (support <= 1) return 0.0;
  if (qp.von_neumann()) {
    double s = 0.0;
    for (double p : probabilities) {
      if (p >= kZeroEigenvalue) s -= p * std::log(p);
    }
    return s;
  }
  // sum p (p^(q-1) - 1) / (1 - q); expm1 keeps precision near q = 1.
  const double a = qp.q() - 1.0;
  double sum = 0.0;
  for (double p : probabilities) {
    if (p >= kZeroEigenvalue) sum -= p * std::expm1(a * std::log(p));
  }
  return sum / a;
}

double tsallis_entropy(const DensityMatrix& rho, QParam qp) {
  auto ev = hermitian_eigenvalues(rho.matrix());
  for (double& x : ev) x = std::max(0.0, x);
  return tsallis_entropy(ev, qp);
}

std::vector<double> hermitian_eigenvalues(const Mat& h) {
  const auto n = h.rows();
  if (n == 1) return {h(0, 0).real()};
  if (n == 2) {
    const double a = h(0, 0).real();
    const double d = h(1, 1).real();
    const double b2 = std::norm(h(0, 1));
    const double mean = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b2);
    return {mean + rad, mean - rad};
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = es.eigenvalues()(n - 1 - i);
  return out;
}

double weighted_entropy_term(const Mat& tau, QParam qp) {
  const double p = tau.trace().real();
  if (p < kZeroEigenvalue) return 0.0;
  auto ev = hermitian_eigenvalues(tau);
  for (double& x : ev) x = std::max(0.0, x / p);
  const double s = tsallis_entropy(ev, qp);
  return (qp.von_neumann() ? p : std::pow(p, qp.q())) * s;
}

namespace {

void require_bipartite(const DensityMatrix& rho, const char* what) {
  if (rho.parties() != 2) throw ValidationError(std::string(what) + ": expected a bipartite state");
}

}  // namespace

double conditional_entropy(const DensityMatrix& rho_ab, QParam qp) {
  require_bipartite(rho_ab, "conditional_entropy");
  return tsallis_entropy(rho_ab, qp) - tsallis_entropy(partial_trace(rho_ab, {1}), qp);
}

double mutual_entropy(const DensityMatrix& rho_ab, QParam qp) {
  require_bipartite(rho_ab, "mutual_entropy");
  return tsallis_entropy(partial_trace(rho_ab, {0}), qp) + tsallis_entropy(partial_trace(rho_ab, {1}), qp) -
         tsallis_entropy(rho_ab, qp);
}

DensityMatrix MixedEnsemble::mixture() const {
  if (weights.empty() || weights.size() != states.size()) {
    throw ValidationError("MixedEnsemble: weights and states must be nonempty and of equal length");
  }
  const Dims& dims = states.front().dims();
  Mat m = Mat::Zero(states.front().dimension(), states.front().dimension());
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw ValidationError("MixedEnsemble: weights must be positive");
    if (states[i].dims() != dims) throw ValidationError("MixedEnsemble: states have different dims");
    m += weights[i] * states[i].matrix();
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("MixedEnsemble: weights do not sum to 1");
  // Renormalize away the (<= 1e-10) weight defect so the mixture validates.
  return DensityMatrix(m / total, dims);
}

double tsallis_difference(const MixedEnsemble& ensemble, QParam qp) {
  const DensityMatrix mix = ensemble.mixture();
  double avg = 0.0;
  for (size_t i = 0; i < ensemble.weights.size(); ++i) {
    const double w = qp.von_neumann() ? ensemble.weights[i] : std::pow(ensemble.weights[i], qp.q());
    avg += w * tsallis_entropy(ensemble.states[i], qp);
  }
  return tsallis_entropy(mix, qp) - avg;
}

}  // namespace qtrade

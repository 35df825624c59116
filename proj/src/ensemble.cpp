#include "qtrade/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

constexpr double kWeightSumTol = 1e-10;
constexpr double kMixtureTol = 1e-9;
constexpr double kCompletenessTol = 1e-9;
constexpr double kIsometryTol = 1e-10;

// Rotates the global phase so the largest-magnitude amplitude is real positive.
Vec fix_phase(Vec v) {
  Eigen::Index best = 0;
  v.cwiseAbs().maxCoeff(&best);
  const double mag = std::abs(v(best));
  if (mag > 0.0) v *= std::conj(v(best)) / mag;
  v(best) = cplx(v(best).real(), 0.0);
  return v;
}

bool lexicographic_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() < b(i).real()) return true;
    if (a(i).real() > b(i).real()) return false;
  }
  return false;
}

// Coefficient matrix M with M[(a, c), b] = psi[a, b, c], so that
// (<v|_B) |psi> = M conj(v) as a vector on AC.
Mat ac_by_b(const PureState& psi) {
  const auto& d = psi.dims();
  const int da = d[0], db = d[1], dc = d[2];
  Mat m(da * dc, db);
  for (int a = 0; a < da; ++a) {
    for (int b = 0; b < db; ++b) {
      for (int c = 0; c < dc; ++c) m(a * dc + c, b) = psi.amplitudes()((a * db + b) * dc + c);
    }
  }
  return m;
}

void require_tripartite(const PureState& psi, const char* what) {
  if (psi.parties() != 3) throw ValidationError(std::string(what) + ": expected a tripartite pure state");
}

}  // namespace

Ensemble::Ensemble(std::vector<double> weights, std::vector<PureState> states, DensityMatrix target)
    : target_(std::move(target)) {
  if (weights.empty() || weights.size() != states.size()) {
    throw ValidationError("Ensemble: weights and states must be nonempty and of equal length");
  }
  std::vector<Vec> vecs;
  for (size_t i = 0; i < states.size(); ++i) {
    if (!(weights[i] > 0.0)) throw ValidationError("Ensemble: weights must be positive");
    if (states[i].dims() != target_.dims()) throw ValidationError("Ensemble: member dims differ from target dims");
    vecs.push_back(fix_phase(states[i].amplitudes()));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw ValidationError("Ensemble: weights sum to " + std::to_string(total));
  }

  std::vector<size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return lexicographic_less(vecs[a], vecs[b]);
  });
  for (size_t i : order) {
    weights_.push_back(weights[i]);
    states_.emplace_back(vecs[i], target_.dims());
  }

  const double err = (mixture() - target_.matrix()).cwiseAbs().maxCoeff();
  if (err > kMixtureTol) {
    throw ValidationError("Ensemble: mixture deviates from target by " + std::to_string(err));
  }
}

Mat Ensemble::mixture() const {
  Mat m = Mat::Zero(target_.dimension(), target_.dimension());
  for (size_t i = 0; i < weights_.size(); ++i) {
    m += weights_[i] * states_[i].amplitudes() * states_[i].amplitudes().adjoint();
  }
  return m;
}

double Ensemble::q_expected_entanglement(QParam qp) const {
  if (target_.parties() != 2) throw ValidationError("Ensemble: entanglement needs a bipartite target");
  double total = 0.0;
  for (size_t i = 0; i < weights_.size(); ++i) {
    const double w = qp.von_neumann() ? weights_[i] : std::pow(weights_[i], qp.q());
    total += w * tsallis_entropy(partial_trace(states_[i], {0}), qp);
  }
  return total;
}

RankOnePovm::RankOnePovm(std::vector<Vec> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw ValidationError("RankOnePovm: no elements");
  const auto d = vectors_.front().size();
  Mat sum = Mat::Zero(d, d);
  for (const auto& v : vectors_) {
    if (v.size() != d) throw ValidationError("RankOnePovm: elements act on different dimensions");
    if (!v.allFinite() || v.squaredNorm() == 0.0) throw ValidationError("RankOnePovm: zero or non-finite element");
    sum += v * v.adjoint();
  }
  const double err = (sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (err > kCompletenessTol) {
    throw ValidationError("RankOnePovm: elements do not resolve the identity (error " + std::to_string(err) + ")");
  }
}

RankOnePovm RankOnePovm::from_isometry(const Mat& isometry) {
  std::vector<Vec> vecs;
  for (Eigen::Index x = 0; x < isometry.rows(); ++x) {
    Vec v = isometry.row(x).adjoint();
    if (v.squaredNorm() >= kZeroWeight) vecs.push_back(std::move(v));
  }
  if (vecs.empty()) throw ValidationError("RankOnePovm: isometry has no nonzero rows");
  return RankOnePovm(std::move(vecs));
}

Mat RankOnePovm::to_isometry() const {
  Mat v(static_cast<Eigen::Index>(vectors_.size()), dim());
  for (size_t x = 0; x < vectors_.size(); ++x) v.row(static_cast<Eigen::Index>(x)) = vectors_[x].adjoint();
  return v;
}

GeneralPovm::GeneralPovm(std::vector<Mat> operators) : operators_(std::move(operators)) {
  if (operators_.empty()) throw ValidationError("GeneralPovm: no elements");
  const auto d = operators_.front().rows();
  Mat sum = Mat::Zero(d, d);
  for (auto& op : operators_) {
    if (op.rows() != d || op.cols() != d) throw ValidationError("GeneralPovm: element has wrong shape");
    if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("GeneralPovm: element not Hermitian");
    op = (0.5 * (op + op.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(op, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-10) throw ValidationError("GeneralPovm: element not positive semidefinite");
    sum += op;
  }
  if ((sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > kCompletenessTol) {
    throw ValidationError("GeneralPovm: elements do not resolve the identity");
  }
}

GeneralPovm::GeneralPovm(const RankOnePovm& povm) {
  for (size_t x = 0; x < povm.size(); ++x) operators_.push_back(povm.element(x));
}

int numerical_rank(const DensityMatrix& rho) {
  const auto s = spectral(rho);
  return static_cast<int>(std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                                        [](double l) { return l >= kZeroEigenvalue; }));
}

Ensemble hjw_ensemble(const DensityMatrix& rho, const Mat& mixing) {
  const Spectrum s = spectral(rho);
  const int r = static_cast<int>(std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                                               [](double l) { return l >= kZeroEigenvalue; }));
  if (mixing.cols() != r) {
    throw ValidationError("hjw_ensemble: mixing has " + std::to_string(mixing.cols()) + " columns, rank is " +
                          std::to_string(r));
  }
  if (mixing.rows() < r) throw ValidationError("hjw_ensemble: mixing needs at least rank rows");
  const double iso_err = (mixing.adjoint() * mixing - Mat::Identity(r, r)).cwiseAbs().maxCoeff();
  if (iso_err > kIsometryTol) {
    throw ValidationError("hjw_ensemble: mixing columns are not orthonormal (error " + std::to_string(iso_err) + ")");
  }

  Mat scaled(rho.dimension(), r);
  for (int i = 0; i < r; ++i) scaled.col(i) = std::sqrt(s.eigenvalues[i]) * s.eigenvectors.col(i);

  std::vector<double> weights;
  std::vector<PureState> states;
  for (Eigen::Index x = 0; x < mixing.rows(); ++x) {
    Vec unnorm = scaled * mixing.row(x).transpose();
    const double p = unnorm.squaredNorm();
    if (p < kZeroWeight) continue;
    weights.push_back(p);
    states.emplace_back(unnorm / std::sqrt(p), rho.dims());
  }
  // The dropped members carry at most m * kZeroWeight; fold it back.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return Ensemble(std::move(weights), std::move(states), rho);
}

Ensemble povm_to_ensemble(const PureState& psi_abc, const RankOnePovm& povm_b) {
  require_tripartite(psi_abc, "povm_to_ensemble");
  const auto& d = psi_abc.dims();
  if (povm_b.dim() != d[1]) throw ValidationError("povm_to_ensemble: POVM dimension does not match subsystem B");
  const Mat m = ac_by_b(psi_abc);
  const Dims ac_dims{d[0], d[2]};

  std::vector<double> weights;
  std::vector<PureState> states;
  for (const Vec& v : povm_b.vectors()) {
    Vec phi = m * v.conjugate();
    const double p = phi.squaredNorm();
    if (p < kZeroWeight) continue;
    weights.push_back(p);
    states.emplace_back(phi / std::sqrt(p), ac_dims);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return Ensemble(std::move(weights), std::move(states), partial_trace(psi_abc, {0, 2}));
}

RankOnePovm ensemble_to_povm(const PureState& psi_abc, const Ensemble& ensemble_ac) {
  require_tripartite(psi_abc, "ensemble_to_povm");
  const auto& d = psi_abc.dims();
  const DensityMatrix rho_ac = partial_trace(psi_abc, {0, 2});
  if (ensemble_ac.target().dims() != rho_ac.dims()) throw ValidationError("ensemble_to_povm: ensemble is not over AC");
  const double err = (ensemble_ac.mixture() - rho_ac.matrix()).cwiseAbs().maxCoeff();
  if (err > 1e-8) {
    throw ValidationError("ensemble_to_povm: ensemble does not decompose rho_AC (error " + std::to_string(err) + ")");
  }

  // M = sum_i s_i e_i w_i^dagger; psi = sum_i s_i |e_i>_AC |conj(w_i)>_B.
  const Mat m = ac_by_b(psi_abc);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  while (r < sv.size() && sv(r) * sv(r) >= kZeroEigenvalue) ++r;
  const Mat e = svd.matrixU().leftCols(r);
  const Mat w = svd.matrixV();

  std::vector<Vec> vecs;
  for (size_t x = 0; x < ensemble_ac.size(); ++x) {
    const Vec target = std::sqrt(ensemble_ac.weights()[x]) * ensemble_ac.states()[x].amplitudes();
    Vec u = e.adjoint() * target;
    for (int i = 0; i < r; ++i) u(i) /= sv(i);
    // conj(v_x) = sum_i u_i w_i
    Vec y = w.leftCols(r) * u;
    vecs.push_back(y.conjugate());
  }
  for (int j = r; j < d[1]; ++j) vecs.push_back(w.col(j).conjugate());
  return RankOnePovm(std::move(vecs));
}

MixedEnsemble measure_induced_ensemble(const DensityMatrix& rho_ab, const GeneralPovm& povm_b) {
  if (rho_ab.parties() != 2) throw ValidationError("measure_induced_ensemble: expected a bipartite state");
  const int da = rho_ab.dims()[0];
  const int db = rho_ab.dims()[1];
  if (povm_b.dim() != db) throw ValidationError("measure_induced_ensemble: POVM dimension does not match B");
  const Mat& rho = rho_ab.matrix();

  MixedEnsemble out;
  for (const Mat& op : povm_b.operators()) {
    // tau[a, a'] = sum_{b, b'} M[b, b'] rho[(a, b'), (a', b)]
    Mat tau = Mat::Zero(da, da);
    for (int a = 0; a < da; ++a) {
      for (int a2 = 0; a2 < da; ++a2) {
        cplx acc = 0.0;
        for (int b = 0; b < db; ++b) {
          for (int b2 = 0; b2 < db; ++b2) acc += op(b, b2) * rho(a * db + b2, a2 * db + b);
        }
        tau(a, a2) = acc;
      }
    }
    const double p = tau.trace().real();
    if (p < kZeroWeight) continue;
    out.weights.push_back(p);
    out.states.emplace_back(tau / p, Dims{da});
  }
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  for (double& w : out.weights) w /= total;
  return out;
}

RefinedPovm refine_to_rank1(const GeneralPovm& povm) {
  std::vector<Vec> vecs;
  std::vector<int> parent;
  for (size_t x = 0; x < povm.size(); ++x) {
    Eigen::SelfAdjointEigenSolver<Mat> es(povm.operators()[x]);
    for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) {
      const double mu = es.eigenvalues()(k);
      if (mu < kZeroEigenvalue) continue;
      vecs.push_back(std::sqrt(mu) * es.eigenvectors().col(k));
      parent.push_back(static_cast<int>(x));
    }
  }
  return RefinedPovm{RankOnePovm(std::move(vecs)), std::move(parent)};
}

}  // namespace qtrade

#include "qtrade/qstate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "qtrade/errors.hpp"
#include "qtrade/random.hpp"

namespace qtrade {

namespace {

std::atomic<int> g_max_dimension{64};

constexpr double kNormTol = 1e-12;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kNegativeEigTol = 1e-10;

void validate_dims(const Dims& dims, Eigen::Index length, const char* what) {
  if (dims.empty()) throw ValidationError(std::string(what) + ": empty dims");
  for (int d : dims) {
    if (d <= 0) throw ValidationError(std::string(what) + ": non-positive subsystem dimension");
  }
  const long long total = std::accumulate(dims.begin(), dims.end(), 1LL, std::multiplies<>());
  if (total != length) {
    throw ValidationError(std::string(what) + ": product of dims (" + std::to_string(total) +
                          ") does not match length " + std::to_string(length));
  }
  if (total > g_max_dimension.load()) {
    throw ValidationError(std::string(what) + ": total dimension " + std::to_string(total) +
                          " exceeds the configured maximum " +
                          std::to_string(g_max_dimension.load()));
  }
}

// Strides for the row-major (Kronecker) composite index.
std::vector<int> strides_of(const Dims& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

// Index tables for splitting a composite index into (kept, traced) parts.
// full[o * n_traced + t] is the composite index with kept digits o (in the
// order of `keep`) and traced digits t (in ascending subsystem order).
struct SplitIndex {
  Dims kept_dims;
  int n_kept = 1;
  int n_traced = 1;
  std::vector<int> full;
};

SplitIndex split_index(const Dims& dims, const std::vector<int>& keep) {
  const int n = static_cast<int>(dims.size());
  if (keep.empty()) throw ValidationError("partial_trace: keep set is empty");
  std::vector<bool> seen(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw ValidationError("partial_trace: subsystem index out of range");
    if (seen[k]) throw ValidationError("partial_trace: duplicate subsystem index");
    seen[k] = true;
  }
  std::vector<int> traced;
  for (int k = 0; k < n; ++k) {
    if (!seen[k]) traced.push_back(k);
  }

  const auto strides = strides_of(dims);
  SplitIndex out;
  for (int k : keep) {
    out.kept_dims.push_back(dims[k]);
    out.n_kept *= dims[k];
  }
  for (int k : traced) out.n_traced *= dims[k];
  out.full.resize(static_cast<size_t>(out.n_kept) * out.n_traced);

  std::vector<int> digit_kept(keep.size(), 0);
  for (int o = 0; o < out.n_kept; ++o) {
    int rem = o;
    for (int j = static_cast<int>(keep.size()) - 1; j >= 0; --j) {
      digit_kept[j] = rem % dims[keep[j]];
      rem /= dims[keep[j]];
    }
    int base = 0;
    for (size_t j = 0; j < keep.size(); ++j) base += digit_kept[j] * strides[keep[j]];
    for (int t = 0; t < out.n_traced; ++t) {
      int r = t;
      int off = 0;
      for (int j = static_cast<int>(traced.size()) - 1; j >= 0; --j) {
        off += (r % dims[traced[j]]) * strides[traced[j]];
        r /= dims[traced[j]];
      }
      out.full[static_cast<size_t>(o) * out.n_traced + t] = base + off;
    }
  }
  return out;
}

}  // namespace

int total_dimension(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

int max_dimension() { return g_max_dimension.load(); }

void set_max_dimension(int dim) {
  if (dim < 1) throw ValidationError("max dimension must be positive");
  g_max_dimension.store(dim);
}

PureState::PureState(Vec amplitudes, Dims dims)
    : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
  validate_dims(dims_, amplitudes_.size(), "PureState");
  if (!amplitudes_.allFinite()) throw ValidationError("PureState: non-finite amplitude");
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > kNormTol) {
    throw ValidationError("PureState: amplitudes are not normalized (norm " + std::to_string(norm) + ")");
  }
}

PureState PureState::regrouped(Dims dims) const { return PureState(amplitudes_, std::move(dims)); }

DensityMatrix::DensityMatrix(Mat matrix, Dims dims) : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  if (matrix_.rows() != matrix_.cols()) throw ValidationError("DensityMatrix: matrix is not square");
  validate_dims(dims_, matrix_.rows(), "DensityMatrix");
  if (!matrix_.allFinite()) throw ValidationError("DensityMatrix: non-finite entry");
  const double herm_dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > kHermitianTol) {
    throw ValidationError("DensityMatrix: not Hermitian (max deviation " + std::to_string(herm_dev) + ")");
  }
  matrix_ = (0.5 * (matrix_ + matrix_.adjoint())).eval();
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw ValidationError("DensityMatrix: trace is " + std::to_string(tr) + ", expected 1");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -kNegativeEigTol) {
    throw ValidationError("DensityMatrix: not positive semidefinite (min eigenvalue " +
                          std::to_string(es.eigenvalues()(0)) + ")");
  }
}

DensityMatrix::DensityMatrix(const PureState& psi)
    : DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.dims()) {}

double DensityMatrix::purity() const {
  // tr(rho^2) for Hermitian rho is the squared Frobenius norm.
  return matrix_.squaredNorm();
}

DensityMatrix DensityMatrix::regrouped(Dims dims) const { return DensityMatrix(matrix_, std::move(dims)); }

PureState tensor(const PureState& a, const PureState& b) {
  const auto& va = a.amplitudes();
  const auto& vb = b.amplitudes();
  Vec out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) out.segment(i * vb.size(), vb.size()) = va(i) * vb;
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return PureState(std::move(out), std::move(dims));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  const auto& ma = a.matrix();
  const auto& mb = b.matrix();
  const auto nb = mb.rows();
  Mat out(ma.rows() * nb, ma.cols() * nb);
  for (Eigen::Index i = 0; i < ma.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma.cols(); ++j) out.block(i * nb, j * nb, nb, nb) = ma(i, j) * mb;
  }
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix(std::move(out), std::move(dims));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const SplitIndex idx = split_index(rho.dims(), keep);
  const Mat& m = rho.matrix();
  Mat out = Mat::Zero(idx.n_kept, idx.n_kept);
  for (int o1 = 0; o1 < idx.n_kept; ++o1) {
    for (int o2 = 0; o2 < idx.n_kept; ++o2) {
      cplx acc = 0.0;
      for (int t = 0; t < idx.n_traced; ++t) {
        acc += m(idx.full[static_cast<size_t>(o1) * idx.n_traced + t],
                 idx.full[static_cast<size_t>(o2) * idx.n_traced + t]);
      }
      out(o1, o2) = acc;
    }
  }
  return DensityMatrix(std::move(out), idx.kept_dims);
}

DensityMatrix partial_trace(const PureState& psi, const std::vector<int>& keep) {
  const SplitIndex idx = split_index(psi.dims(), keep);
  Mat coeff(idx.n_kept, idx.n_traced);
  for (int o = 0; o < idx.n_kept; ++o) {
    for (int t = 0; t < idx.n_traced; ++t) {
      coeff(o, t) = psi.amplitudes()(idx.full[static_cast<size_t>(o) * idx.n_traced + t]);
    }
  }
  return DensityMatrix(coeff * coeff.adjoint(), idx.kept_dims);
}

Spectrum spectral(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("spectral: eigen-decomposition failed");
  const auto n = rho.dimension();
  Spectrum s;
  s.eigenvalues.resize(n);
  s.eigenvectors.resize(n, n);
  // Eigen returns ascending order.
  for (int i = 0; i < n; ++i) {
    double lam = es.eigenvalues()(n - 1 - i);
    if (lam < -kNegativeEigTol) throw ValidationError("spectral: negative eigenvalue beyond tolerance");
    s.eigenvalues[i] = std::clamp(lam, 0.0, 1.0);
    s.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return s;
}

PureState haar_random_pure(const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  Vec v = complex_gaussian(total_dimension(dims), rng);
  v /= v.norm();
  return PureState(std::move(v), dims);
}

CanonicalState parse_canonical(std::string_view name) {
  if (name == "GHZ") return CanonicalState::GHZ;
  if (name == "W") return CanonicalState::W;
  if (name == "PRODUCT") return CanonicalState::PRODUCT;
  if (name == "BELL_TENSOR_ZERO") return CanonicalState::BELL_TENSOR_ZERO;
  throw ValidationError("unknown canonical state '" + std::string(name) + "'");
}

std::string_view to_string(CanonicalState name) {
  switch (name) {
    case CanonicalState::GHZ: return "GHZ";
    case CanonicalState::W: return "W";
    case CanonicalState::PRODUCT: return "PRODUCT";
    case CanonicalState::BELL_TENSOR_ZERO: return "BELL_TENSOR_ZERO";
  }
  return "?";
}

PureState canonical_state(CanonicalState name, const Dims& dims) {
  const int n = total_dimension(dims);
  if (dims.size() != 3) throw ValidationError("canonical states are defined for three parties");
  Vec v = Vec::Zero(n);
  const auto strides = strides_of(dims);
  switch (name) {
    case CanonicalState::GHZ: {
      if (dims[0] != dims[1] || dims[1] != dims[2]) throw ValidationError("GHZ requires dims [d,d,d]");
      const int d = dims[0];
      for (int k = 0; k < d; ++k) v(k * (strides[0] + strides[1] + strides[2])) = 1.0 / std::sqrt(double(d));
      break;
    }
    case CanonicalState::W: {
      if (dims != Dims{2, 2, 2}) throw ValidationError("W is defined for dims [2,2,2]");
      const double a = 1.0 / std::sqrt(3.0);
      v(1) = a;  // |001>
      v(2) = a;  // |010>
      v(4) = a;  // |100>
      break;
    }
    case CanonicalState::PRODUCT:
      v(0) = 1.0;
      break;
    case CanonicalState::BELL_TENSOR_ZERO: {
      if (dims[0] < 2 || dims[1] < 2) throw ValidationError("BELL_TENSOR_ZERO requires dA, dB >= 2");
      const double a = 1.0 / std::sqrt(2.0);
      v(0) = a;                         // |0 0 0>
      v(strides[0] + strides[1]) = a;   // |1 1 0>
      break;
    }
  }
  return PureState(std::move(v), dims);
}

DensityMatrix random_mixed(int dim, int rank, std::uint64_t seed) { return random_mixed(Dims{dim}, rank, seed); }

DensityMatrix random_mixed(const Dims& dims, int rank, std::uint64_t seed) {
  const int dim = total_dimension(dims);
  if (rank < 1 || rank > dim) throw ValidationError("random_mixed: rank out of range");
  Rng rng(seed);
  Vec v = complex_gaussian(dim * rank, rng);
  v /= v.norm();
  // Purification laid out as system (x) ancilla; trace the ancilla.
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> coeff(v.data(), dim, rank);
  Mat m = coeff * coeff.adjoint();
  return DensityMatrix(std::move(m), dims);
}

}  // namespace qtrade

#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qtrade {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Ordered subsystem dimensions. Subsystem 0 is the most significant digit
/// of the composite index, matching the Kronecker product convention.
using Dims = std::vector<int>;

int total_dimension(const Dims& dims);

/// Upper bound on the total Hilbert-space dimension accepted by the state
/// constructors. Defaults to 64.
int max_dimension();
void set_max_dimension(int dim);

class PureState {
 public:
  PureState(Vec amplitudes, Dims dims);

  const Vec& amplitudes() const { return amplitudes_; }
  const Dims& dims() const { return dims_; }
  int dimension() const { return static_cast<int>(amplitudes_.size()); }
  int parties() const { return static_cast<int>(dims_.size()); }

  /// Same amplitudes under a different factorization of the total dimension,
  /// e.g. [dA, dB, dC] -> [dA, dB*dC].
  PureState regrouped(Dims dims) const;

 private:
  Vec amplitudes_;
  Dims dims_;
};

class DensityMatrix {
 public:
  DensityMatrix(Mat matrix, Dims dims);
  explicit DensityMatrix(const PureState& psi);

  const Mat& matrix() const { return matrix_; }
  const Dims& dims() const { return dims_; }
  int dimension() const { return static_cast<int>(matrix_.rows()); }
  int parties() const { return static_cast<int>(dims_.size()); }

  double purity() const;
  bool is_pure(double tol = 1e-9) const { return purity() >= 1.0 - tol; }

  DensityMatrix regrouped(Dims dims) const;

 private:
  Mat matrix_;
  Dims dims_;
};

struct Spectrum {
  std::vector<double> eigenvalues;  // descending, clamped to [0, 1]
  Mat eigenvectors;                 // column i pairs with eigenvalues[i]
};

PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state on the subsystems listed in `keep`. The output factors
/// appear in the order given, so {1, 0} yields the swapped bipartite state.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);
DensityMatrix partial_trace(const PureState& psi, const std::vector<int>& keep);

Spectrum spectral(const DensityMatrix& rho);

PureState haar_random_pure(const Dims& dims, std::uint64_t seed);

enum class CanonicalState { GHZ, W, PRODUCT, BELL_TENSOR_ZERO };

CanonicalState parse_canonical(std::string_view name);
std::string_view to_string(CanonicalState name);
PureState canonical_state(CanonicalState name, const Dims& dims);

/// Reduced state of a Haar-random purification on dim x rank.
DensityMatrix random_mixed(int dim, int rank, std::uint64_t seed);
/// As above with an explicit factorization of the system dimension.
DensityMatrix random_mixed(const Dims& dims, int rank, std::uint64_t seed);

}  // namespace qtrade

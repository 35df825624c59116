#include <doctest.h>

#include <cmath>

#include "qtrade/ensemble.hpp"
#include "qtrade/errors.hpp"
#include "test_support.hpp"

using namespace qtrade;

namespace {

double max_dev(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Coarse POVM: consecutive groups of `group` vectors of a random rank-one
// POVM summed into one element each.
GeneralPovm random_general_povm(int d, int elements, int group, Rng& rng) {
  const RankOnePovm fine = test::random_povm(d, elements * group, rng);
  std::vector<Mat> ops(static_cast<size_t>(elements), Mat::Zero(d, d));
  for (size_t k = 0; k < fine.size(); ++k) ops[k / static_cast<size_t>(group)] += fine.element(k);
  return GeneralPovm(ops);
}

Mat pauli_x_basis(int which) {
  Vec v(2);
  v << 1.0 / std::sqrt(2.0), (which == 0 ? 1.0 : -1.0) / std::sqrt(2.0);
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("ensemble validation and canonical form") {
  const DensityMatrix half(Mat::Identity(2, 2) / 2.0, {2});
  Vec e0 = Vec::Zero(2), e1 = Vec::Zero(2);
  e0(0) = 1.0;
  e1(1) = cplx(0.0, -1.0);
  CHECK_THROWS_AS(Ensemble({0.6, 0.6}, {PureState(e0, {2}), PureState(e1, {2})}, half), ValidationError);
  CHECK_THROWS_AS(Ensemble({0.7, 0.3}, {PureState(e0, {2}), PureState(e1, {2})}, half), ValidationError);
  CHECK_THROWS_AS(Ensemble({0.5}, {PureState(e0, {2}), PureState(e1, {2})}, half), ValidationError);

  const Ensemble ens({0.5, 0.5}, {PureState(e1, {2}), PureState(e0, {2})}, half);
  // Largest-magnitude amplitude made real positive.
  for (const PureState& s : ens.states()) {
    Eigen::Index i;
    s.amplitudes().cwiseAbs().maxCoeff(&i);
    CHECK(std::abs(s.amplitudes()(i).imag()) < 1e-15);
    CHECK(s.amplitudes()(i).real() > 0.0);
  }
  CHECK(max_dev(ens.mixture(), half.matrix()) < 1e-15);
}

TEST_CASE("hjw ensembles reproduce the target") {
  Rng rng(201);
  for (int k = 0; k < 200; ++k) {
    const int dim = 2 + k % 5;
    const DensityMatrix rho = random_mixed(dim, 1 + k % dim, derive_seed(202, k));
    const int r = numerical_rank(rho);
    const Ensemble ens = test::random_decomposition(rho, r + k % 4, rng);
    CHECK(max_dev(ens.mixture(), rho.matrix()) <= 1e-10);
    double sum = 0.0;
    for (size_t i = 0; i < ens.size(); ++i) {
      sum += ens.weights()[i];
      if (i > 0) CHECK(ens.weights()[i - 1] >= ens.weights()[i]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hjw ensemble special cases") {
  const DensityMatrix rho = random_mixed(3, 3, 211);
  const Spectrum s = spectral(rho);
  const Ensemble eigen = hjw_ensemble(rho, Mat::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(eigen.weights()[i] == doctest::Approx(s.eigenvalues[i]).epsilon(1e-12));

  const DensityMatrix half(Mat::Identity(2, 2) / 2.0, {2});
  Rng rng(212);
  const Ensemble rotated = hjw_ensemble(half, haar_unitary(2, rng));
  CHECK(rotated.weights()[0] == doctest::Approx(0.5));
  CHECK(std::abs(rotated.states()[0].amplitudes().dot(rotated.states()[1].amplitudes())) < 1e-12);

  CHECK_THROWS_AS(hjw_ensemble(rho, Mat::Identity(3, 2)), ValidationError);
  CHECK_THROWS_AS(hjw_ensemble(rho, 1.1 * Mat::Identity(3, 3)), ValidationError);
}

TEST_CASE("povm validation") {
  Vec a = Vec::Zero(2);
  a(0) = 1.0;
  CHECK_THROWS_AS(RankOnePovm({a}), ValidationError);
  CHECK_THROWS_AS(RankOnePovm({a, Vec::Zero(2)}), ValidationError);
  CHECK_THROWS_AS(GeneralPovm({Mat::Identity(2, 2) * 0.5}), ValidationError);
  Mat neg = Mat::Zero(2, 2);
  neg(0, 0) = -0.1;
  CHECK_THROWS_AS(GeneralPovm({neg, Mat::Identity(2, 2) - neg}), ValidationError);

  Rng rng(221);
  const RankOnePovm p = test::random_povm(3, 7, rng);
  const Mat v = p.to_isometry();
  CHECK(max_dev(v.adjoint() * v, Mat::Identity(3, 3)) < 1e-12);
  CHECK(max_dev(RankOnePovm::from_isometry(v).to_isometry(), v) < 1e-15);
}

TEST_CASE("povm to ensemble examples") {
  Vec e0 = Vec::Zero(2), e1 = Vec::Zero(2);
  e0(0) = 1.0;
  e1(1) = 1.0;
  const RankOnePovm z({e0, e1});

  const Ensemble ghz = povm_to_ensemble(test::ghz_state(), z);
  REQUIRE(ghz.size() == 2);
  CHECK(ghz.weights()[0] == doctest::Approx(0.5));
  CHECK(std::abs(std::abs(ghz.states()[0].amplitudes()(0)) + std::abs(ghz.states()[0].amplitudes()(3)) - 1.0) < 1e-12);

  Rng rng(231);
  // Every outcome on a product state leaves |00> on AC, up to phase.
  const Ensemble prod = povm_to_ensemble(test::product_state(), test::random_povm(2, 4, rng));
  REQUIRE(prod.size() == 4);
  double total = 0.0;
  for (size_t i = 0; i < prod.size(); ++i) {
    total += prod.weights()[i];
    CHECK(std::abs(prod.states()[i].amplitudes()(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  // W: outcome 0 on B leaves (|01> + |10>)/sqrt2 with weight 2/3, outcome
  // 1 leaves |00> with weight 1/3.
  const Ensemble w = povm_to_ensemble(test::w_state(), z);
  REQUIRE(w.size() == 2);
  CHECK(w.weights()[0] == doctest::Approx(2.0 / 3.0));
  CHECK(w.weights()[1] == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(w.states()[0].amplitudes()(1)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(w.states()[0].amplitudes()(2)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(w.states()[1].amplitudes()(0)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(povm_to_ensemble(test::ghz_state(), test::random_povm(3, 3, rng)), ValidationError);
}

TEST_CASE("bijection round trip") {
  Rng rng(241);
  for (int k = 0; k < 200; ++k) {
    const Dims dims = k % 2 == 0 ? Dims{2, 2, 2} : Dims{2, 2, 3};
    const PureState psi = haar_random_pure(dims, derive_seed(242, k));
    const RankOnePovm povm = test::random_povm(2, 2 + k % 4, rng);
    const Ensemble ens = povm_to_ensemble(psi, povm);
    const RankOnePovm back = ensemble_to_povm(psi, ens);
    const Ensemble again = povm_to_ensemble(psi, back);
    REQUIRE(again.size() == ens.size());
    for (size_t i = 0; i < ens.size(); ++i) {
      CHECK(std::abs(again.weights()[i] - ens.weights()[i]) <= 1e-8);
      const double overlap = std::abs(again.states()[i].amplitudes().dot(ens.states()[i].amplitudes()));
      CHECK(overlap == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("ensemble to povm special cases") {
  const PureState ghz = test::ghz_state();
  const Ensemble eigen = hjw_ensemble(partial_trace(ghz, {0, 2}), Mat::Identity(2, 2));
  const RankOnePovm p = ensemble_to_povm(ghz, eigen);
  for (size_t x = 0; x < p.size(); ++x) {
    const Mat e = p.element(x);
    CHECK(std::abs(e(0, 1)) < 1e-12);  // diagonal: computational basis up to phase
  }

  const PureState prod = test::product_state();
  const Ensemble trivial = hjw_ensemble(partial_trace(prod, {0, 2}), Mat::Identity(1, 1));
  const RankOnePovm q = ensemble_to_povm(prod, trivial);
  Mat sum = Mat::Zero(2, 2);
  for (size_t x = 0; x < q.size(); ++x) sum += q.element(x);
  CHECK(max_dev(sum, Mat::Identity(2, 2)) < 1e-9);

  const Ensemble wrong = hjw_ensemble(partial_trace(test::w_state(), {0, 2}), Mat::Identity(2, 2));
  CHECK_THROWS_AS(ensemble_to_povm(ghz, wrong), ValidationError);
}

TEST_CASE("measure induced ensembles") {
  const DensityMatrix bell(test::bell_state());
  const MixedEnsemble trivial = measure_induced_ensemble(bell, GeneralPovm({Mat::Identity(2, 2)}));
  REQUIRE(trivial.weights.size() == 1);
  CHECK(max_dev(trivial.states[0].matrix(), Mat::Identity(2, 2) / 2.0) < 1e-15);

  Mat z0 = Mat::Zero(2, 2), z1 = Mat::Zero(2, 2);
  z0(0, 0) = 1.0;
  z1(1, 1) = 1.0;
  const MixedEnsemble zb = measure_induced_ensemble(bell, GeneralPovm({z0, z1}));
  CHECK(zb.weights[0] == doctest::Approx(0.5));
  CHECK(max_dev(zb.states[0].matrix(), z0) < 1e-15);
  CHECK(max_dev(zb.states[1].matrix(), z1) < 1e-15);

  const DensityMatrix ghz_ab = partial_trace(test::ghz_state(), {0, 1});
  const MixedEnsemble xb = measure_induced_ensemble(ghz_ab, GeneralPovm({pauli_x_basis(0), pauli_x_basis(1)}));
  REQUIRE(xb.weights.size() == 2);
  for (const DensityMatrix& s : xb.states) CHECK(max_dev(s.matrix(), Mat::Identity(2, 2) / 2.0) < 1e-15);

  Rng rng(251);
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix rho = random_mixed(Dims{2, 3}, 1 + k % 6, derive_seed(252, k));
    const MixedEnsemble e = measure_induced_ensemble(rho, random_general_povm(3, 3, 2, rng));
    CHECK(max_dev(e.mixture().matrix(), partial_trace(rho, {0}).matrix()) <= 1e-9);
  }
}

TEST_CASE("rank-one refinement") {
  const RefinedPovm unit = refine_to_rank1(GeneralPovm({Mat::Identity(2, 2)}));
  CHECK(unit.povm.size() == 2);
  CHECK(unit.parent == std::vector<int>{0, 0});

  Rng rng(261);
  for (int k = 0; k < 500; ++k) {
    const int d = 2 + k % 2;
    const GeneralPovm coarse = random_general_povm(d, 2 + k % 3, 2, rng);
    const RefinedPovm fine = refine_to_rank1(coarse);
    Mat sum = Mat::Zero(d, d);
    for (size_t x = 0; x < fine.povm.size(); ++x) sum += fine.povm.element(x);
    CHECK(max_dev(sum, Mat::Identity(d, d)) <= 1e-9);

    const DensityMatrix rho = random_mixed(Dims{2, d}, 1 + k % (2 * d), derive_seed(262, k));
    for (double q : {1.0, 2.0}) {
      const QParam qp(q);
      const double chi_coarse = tsallis_difference(measure_induced_ensemble(rho, coarse), qp);
      const double chi_fine = tsallis_difference(measure_induced_ensemble(rho, GeneralPovm(fine.povm)), qp);
      CHECK(chi_fine >= chi_coarse - 1e-10);
    }
  }
}

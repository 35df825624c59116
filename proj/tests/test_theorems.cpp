#include <doctest.h>

#include <cmath>

#include "qtrade/errors.hpp"
#include "qtrade/serialize.hpp"
#include "qtrade/theorems.hpp"
#include "test_support.hpp"

using namespace qtrade;

namespace {

OptConfig config(int restarts = 20) {
  OptConfig cfg;
  cfg.restarts = restarts;
  return cfg;
}

void check_report_invariants(const TheoremReport& r) {
  CHECK(std::abs(r.residual - (r.lhs - r.rhs)) <= 1e-12);
  CHECK(r.converged == (r.spread <= kConvergenceSpread));
}

const MeasureReport& cert(const TheoremReport& r, const std::string& label) {
  for (const auto& [l, m] : r.certificates) {
    if (l == label) return m;
  }
  FAIL("missing certificate " << label);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("theorem names") {
  CHECK(parse_theorem("t2") == Theorem::T2);
  CHECK(parse_theorem("T3_IDENTITY") == Theorem::T3_IDENTITY);
  CHECK(parse_theorem("cond-cancel") == Theorem::COND_CANCEL);
  CHECK_THROWS_AS(parse_theorem("t9"), ValidationError);
  CHECK(scan_theorems().size() == 5);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(verify_t1_cc(test::bell_state(), QParam(1.0), config()), ValidationError);
  CHECK_THROWS_AS(verify_t2(test::ghz_state(), QParam(0.5), config()), ValidationError);
  const DensityMatrix mixed(Mat::Identity(8, 8) / 8.0, {2, 2, 2});
  CHECK_THROWS_AS(cond_entropy_cancellation(mixed, QParam(1.0)), ValidationError);
  CHECK(std::abs(cond_entropy_cancellation(DensityMatrix(test::w_state()), QParam(2.0)).residual) <= 1e-12);
}

TEST_CASE("product state: every term vanishes") {
  const PureState psi = test::product_state();
  for (double q : {1.0, 2.0}) {
    TheoremContext ctx(psi, QParam(q), config());
    for (Theorem t : {Theorem::T1_CC, Theorem::T1_UE, Theorem::T2, Theorem::T3_IDENTITY, Theorem::T4_IDENTITY,
                      Theorem::COND_CANCEL}) {
      const TheoremReport r = run_theorem(t, ctx);
      CHECK(r.lhs == 0.0);
      CHECK(r.rhs == 0.0);
      CHECK(r.residual == 0.0);
      CHECK(r.converged);
      CHECK_FALSE(r.violation_candidate);
    }
  }
}

TEST_CASE("GHZ values") {
  const PureState ghz = test::ghz_state();
  const double ln2 = std::log(2.0);

  const TheoremReport t1 = verify_t1_cc(ghz, QParam(2.0), config());
  CHECK(t1.lhs == doctest::Approx(0.5));
  CHECK(cert(t1, "q_cc(AB)").value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(cert(t1, "q_entanglement(AC)").value) <= 1e-9);

  const TheoremReport ue = verify_t1_ue(ghz, QParam(1.0), config());
  CHECK(ue.lhs == doctest::Approx(ln2));
  CHECK(std::abs(cert(ue, "q_ue(AB)").value) <= 1e-8);
  CHECK(cert(ue, "q_eoa(AC)").value == doctest::Approx(ln2).epsilon(1e-8));
  CHECK(std::abs(ue.residual) <= 1e-10);

  const TheoremReport t2 = verify_t2(ghz, QParam(1.0), config());
  CHECK(t2.lhs == doctest::Approx(ln2));
  CHECK(std::abs(t2.residual) <= 1e-6);

  const TheoremReport t3 = t3_equivalence_residual(ghz, QParam(1.0), config());
  CHECK(t3.lhs == doctest::Approx(ln2).epsilon(1e-8));
  CHECK(t3.rhs == doctest::Approx(ln2).epsilon(1e-8));
  REQUIRE(t3.verdicts.size() == 2);
  for (const Verdict& v : t3.verdicts) CHECK(v.satisfied);

  const TheoremReport cc = cond_entropy_cancellation(ghz, QParam(2.0));
  CHECK(cc.residual == 0.0);
}

TEST_CASE("Bell pair with a product third party") {
  const PureState psi = canonical_state(CanonicalState::BELL_TENSOR_ZERO, {2, 2, 2});
  const TheoremReport t4 = t4_equivalence_residual(psi, QParam(2.0), config());
  CHECK(t4.extra("check_b_lhs").value() == doctest::Approx(0.5));
  CHECK(t4.extra("check_b_rhs").value() == doctest::Approx(0.5));
  CHECK(std::abs(t4.extra("check_b_residual").value()) <= 1e-12);
  CHECK(std::abs(t4.residual) <= 1e-6);
  check_report_invariants(t4);
}

TEST_CASE("conditional entropy cancellation") {
  CHECK(std::abs(cond_entropy_cancellation(test::w_state(), QParam(1.0)).residual) <= 1e-12);
  for (int k = 0; k < 100; ++k) {
    const PureState psi = haar_random_pure({2, 2, 3}, derive_seed(501, k));
    for (double q : {1.0, 1.5, 2.0, 3.0}) {
      const TheoremReport r = cond_entropy_cancellation(psi, QParam(q));
      CHECK(std::abs(r.residual) <= 1e-9);
    }
  }
}

TEST_CASE("random states satisfy the identities") {
  for (int k = 0; k < 4; ++k) {
    const PureState p222 = haar_random_pure({2, 2, 2}, derive_seed(511, k));
    const PureState p223 = haar_random_pure({2, 2, 3}, derive_seed(512, k));
    for (double q : {1.0, 2.0, 3.0}) {
      const TheoremReport r = verify_t1_cc(p222, QParam(q), config());
      check_report_invariants(r);
      CHECK(std::abs(r.residual) <= 1e-4);
      CHECK(r.extra("slack").value() == doctest::Approx(r.rhs - r.lhs));
    }
    const TheoremReport ue = verify_t1_ue(p223, QParam(1.5), config());
    check_report_invariants(ue);
    CHECK(std::abs(ue.residual) <= 1e-10);
    CHECK(std::abs(ue.extra("independent_residual").value()) <= 1e-4);

    const TheoremReport t2 = verify_t2(p222, QParam(2.0), config());
    check_report_invariants(t2);
    CHECK(std::abs(t2.residual) <= 1e-4);

    for (double q : {1.0, 2.0}) {
      const TheoremReport t3 = t3_equivalence_residual(p222, QParam(q), config());
      check_report_invariants(t3);
      CHECK(std::abs(t3.residual) <= 2e-4);
    }
    const TheoremReport t4 = t4_equivalence_residual(p223, QParam(1.5), config());
    check_report_invariants(t4);
    CHECK(std::abs(t4.residual) <= 2e-4);
    CHECK(std::abs(t4.extra("check_b_residual").value()) <= 1e-9);
  }
}

TEST_CASE("context caches shared searches") {
  TheoremContext ctx(haar_random_pure({2, 2, 2}, 521), QParam(2.0), config(4));
  const MeasureReport& a = ctx.measure(Measure::QUE, "AB");
  const MeasureReport& b = ctx.measure(Measure::QUE, "AB");
  CHECK(&a == &b);
  const TheoremReport t1 = verify_t1_ue(ctx);
  const TheoremReport t3 = t3_equivalence_residual(ctx);
  CHECK(cert(t1, "q_ue(AB)").value == cert(t3, "q_ue(AB)").value);
  CHECK(ctx.marginal("A(BC)").dims() == Dims{2, 4});
  CHECK(ctx.marginal("CA").dims() == Dims{2, 2});
  CHECK_THROWS_AS(ctx.marginal("AD"), ValidationError);
}

TEST_CASE("scan") {
  SUBCASE("single product state") {
    const ScanResult r = scan({{"zero", test::product_state()}}, {1.0}, config(), 1);
    CHECK(r.reports.size() == 5);
    for (const TheoremReport& rep : r.reports) CHECK(rep.residual == 0.0);
    CHECK(r.summary.errors.empty());
  }
  SUBCASE("canonical corpus has no violation candidates") {
    const auto corpus = generate_corpus(0, {2, 2, 2}, 0, true);
    REQUIRE(corpus.size() == 3);
    CHECK(corpus[0].id == "GHZ");
    CHECK(corpus[1].id == "W");
    CHECK(corpus[2].id == "PRODUCT");
    const ScanResult r = scan(corpus, {1.0, 2.0}, config(), 1);
    CHECK(r.reports.size() == 3 * 2 * 5);
    CHECK(r.summary.violation_candidates.empty());
    for (const auto& [name, worst] : r.summary.max_abs_residual) CHECK_MESSAGE(worst <= 1e-6, name);
  }
  SUBCASE("order and content do not depend on the worker count") {
    const auto corpus = generate_corpus(3, {2, 2, 2}, 42, false);
    const ScanResult one = scan(corpus, {1.0, 2.0}, config(4), 1);
    const ScanResult many = scan(corpus, {1.0, 2.0}, config(4), 3);
    CHECK(to_json(one.summary).dump() == to_json(many.summary).dump());
    CHECK(to_json(one.reports).dump() == to_json(many.reports).dump());
    CHECK(one.reports[0].state_id == corpus[0].id);
    CHECK(one.reports[5].q == 2.0);
  }
  SUBCASE("failures are recorded per item") {
    std::vector<CorpusEntry> corpus = generate_corpus(1, {2, 2, 2}, 1, false);
    corpus.push_back({"bipartite", test::bell_state()});
    const ScanResult r = scan(corpus, {1.0}, config(2), 1);
    CHECK(r.reports.size() == 5);
    REQUIRE(r.summary.errors.size() == 1);
    CHECK(r.summary.errors[0].state_id == "bipartite");
  }
  SUBCASE("invalid grids") {
    CHECK_THROWS_AS(scan({{"zero", test::product_state()}}, {}, config()), ValidationError);
    CHECK_THROWS_AS(scan({{"zero", test::product_state()}}, {0.5}, config()), ValidationError);
    CHECK_THROWS_AS(scan({}, {1.0}, config()), ValidationError);
  }
}

TEST_CASE("corpus generation") {
  const auto a = generate_corpus(4, {2, 2, 3}, 7, true);
  const auto b = generate_corpus(4, {2, 2, 3}, 7, true);
  REQUIRE(a.size() == 5);  // PRODUCT only: GHZ and W need other dims
  CHECK(a[0].id == "PRODUCT");
  CHECK(a[1].id == "haar-2x2x3-0");
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].state.amplitudes() == b[i].state.amplitudes());
  CHECK_THROWS_AS(generate_corpus(2, {2, 2}, 7, false), ValidationError);
}

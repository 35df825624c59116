#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qtrade/errors.hpp"
#include "qtrade/serialize.hpp"
#include "test_support.hpp"

using namespace qtrade;

TEST_CASE("state round trips") {
  const PureState psi = haar_random_pure({2, 2, 3}, 601);
  const PureState back = pure_state_from_json(Json::parse(to_json(psi).dump()));
  CHECK(back.dims() == psi.dims());
  CHECK(back.amplitudes() == psi.amplitudes());

  const DensityMatrix rho = random_mixed(Dims{2, 3}, 3, 602);
  const DensityMatrix rback = density_from_json(Json::parse(to_json(rho).dump()));
  CHECK(rback.dims() == rho.dims());
  CHECK((rback.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);

  // A pure vector is accepted where a density matrix is expected.
  const DensityMatrix from_pure = density_from_json(to_json(psi));
  CHECK(from_pure.purity() == doctest::Approx(1.0));

  const Json real_only = {{"dims", {2}}, {"re", {0.6, 0.8}}};
  CHECK(pure_state_from_json(real_only).amplitudes()(1) == cplx(0.8, 0.0));
}

TEST_CASE("malformed states are rejected") {
  CHECK_THROWS_AS(pure_state_from_json(Json::parse(R"({"re": [1, 0]})")), ValidationError);
  CHECK_THROWS_AS(pure_state_from_json(Json::parse(R"({"dims": [2], "re": [1, "x"]})")), ValidationError);
  CHECK_THROWS_AS(pure_state_from_json(Json::parse(R"({"dims": [2], "re": [1, 0], "im": [0]})")), ValidationError);
  CHECK_THROWS_AS(pure_state_from_json(Json::parse(R"({"dims": [3], "re": [1, 0]})")), ValidationError);
  CHECK_THROWS_AS(pure_state_from_json(Json::parse(R"({"dims": [2], "re": [1, 1]})")), ValidationError);
  CHECK_THROWS_AS(pure_state_from_json(Json::parse(R"({"dims": [2.5], "re": [1, 0]})")), ValidationError);
  CHECK_THROWS_AS(density_from_json(Json::parse(R"({"dims": [2], "re": [[1, 0], [0]]})")), ValidationError);
  CHECK_THROWS_AS(pure_state_from_json(Json::parse("[1, 2]")), ValidationError);
}

TEST_CASE("ensemble and povm round trips") {
  Rng rng(611);
  const DensityMatrix rho = random_mixed(Dims{2, 2}, 3, 612);
  const Ensemble ens = test::random_decomposition(rho, 5, rng);
  const Ensemble eback = ensemble_from_json(Json::parse(to_json(ens).dump()));
  REQUIRE(eback.size() == ens.size());
  for (size_t i = 0; i < ens.size(); ++i) {
    CHECK(eback.weights()[i] == doctest::Approx(ens.weights()[i]).epsilon(1e-15));
    CHECK((eback.states()[i].amplitudes() - ens.states()[i].amplitudes()).norm() < 1e-15);
  }
  CHECK((eback.mixture() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  const RankOnePovm povm = test::random_povm(3, 5, rng);
  const RankOnePovm pback = povm_from_json(Json::parse(to_json(povm).dump()));
  CHECK((pback.to_isometry() - povm.to_isometry()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("measure reports round trip through their certificates") {
  OptConfig cfg;
  cfg.restarts = 6;
  for (int k = 0; k < 4; ++k) {
    const DensityMatrix rho = random_mixed(Dims{2, 2 + k % 2}, 2 + k % 2, derive_seed(621, k));
    for (Measure m : {Measure::QE, Measure::QEOA, Measure::QCC, Measure::QUE, Measure::QD, Measure::QUD}) {
      const MeasureReport r = compute_measure(m, rho, QParam(1.0 + k * 0.5), cfg);
      const Json j = Json::parse(to_json(r).dump());
      CHECK(j["measure"] == std::string(cli_name(m)));
      CHECK(j["opt"]["per_restart_values"].size() == 6);
      const MeasureReport back = measure_report_from_json(j);
      CHECK(back.measure == m);
      CHECK(back.bound_side == r.bound_side);
      CHECK(std::abs(evaluate_certificate(rho, back) - r.value) <= 1e-10);
    }
  }
  const MeasureReport closed = q_cc(DensityMatrix(test::bell_state()), QParam(2.0), cfg);
  const MeasureReport cback = measure_report_from_json(to_json(closed));
  CHECK(std::holds_alternative<std::monostate>(cback.certificate));
  CHECK(evaluate_certificate(DensityMatrix(test::bell_state()), cback) == doctest::Approx(0.5));
  CHECK_THROWS_AS(measure_report_from_json(Json::parse(R"({"measure": "q-cc"})")), ValidationError);
}

TEST_CASE("corpus and theorem output") {
  std::vector<CorpusEntry> corpus = generate_corpus(2, {2, 2, 2}, 3, true);
  const std::vector<CorpusEntry> back = corpus_from_json(corpus_to_json(corpus));
  REQUIRE(back.size() == corpus.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == corpus[i].id);
    CHECK(back[i].state.amplitudes() == corpus[i].state.amplitudes());
  }
  CHECK_THROWS_AS(corpus_from_json(Json::array()), ValidationError);

  OptConfig cfg;
  cfg.restarts = 2;
  const ScanResult r = scan({corpus[0]}, {1.0}, cfg, 1);
  const std::string csv = theorem_csv(r.reports);
  CHECK(csv.rfind("state_id,theorem,q,lhs,rhs,residual,converged\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const Json j = to_json(r.reports);
  CHECK(j[0]["theorem"] == "T1_CC");
  CHECK(j[0].contains("certificates"));
  const Json s = to_json(r.summary);
  CHECK(s["reports"] == 5);
  CHECK(s.contains("violation_candidates"));
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "qtrade_serialize_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.json").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS(write_file_atomic((dir / "missing" / "x.json").string(), "x"));
  CHECK_THROWS_AS(parse_json_file((dir / "absent.json").string()), ValidationError);
  std::ofstream(dir / "bad.json") << "{not json";
  CHECK_THROWS_AS(parse_json_file((dir / "bad.json").string()), ValidationError);
  std::filesystem::remove_all(dir);
}

#include "qtrade/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtrade/errors.hpp"
#include "qtrade/serialize.hpp"
#include "qtrade/theorems.hpp"

namespace qtrade {

namespace {

enum class Format { Json, Csv };

struct RunConfig {
  std::string measure;
  std::string theorem = "all";
  std::vector<double> qs;
  int restarts = OptConfig{}.restarts;
  int max_iters = OptConfig{}.max_iters;
  double tol = OptConfig{}.tol;
  std::uint64_t seed = 0;
  int m_outcomes = 0;
  std::string input;
  std::string output;
  Format format = Format::Json;
  int corpus_count = 10;
  std::vector<int> dims{2, 2, 2};
  bool include_canonical = false;
  unsigned workers = 0;
};

const std::vector<double> kDefaultGrid{1.0, 1.25, 1.5, 2.0, 3.0, 5.0};

OptConfig opt_config(const RunConfig& rc) {
  OptConfig cfg;
  cfg.restarts = rc.restarts;
  cfg.max_iters = rc.max_iters;
  cfg.tol = rc.tol;
  cfg.seed = rc.seed;
  if (rc.m_outcomes > 0) cfg.m_outcomes = rc.m_outcomes;
  cfg.validate();
  return cfg;
}

void log(const std::string& msg) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[qtrade] " << msg << '\n';
}

void emit(const RunConfig& rc, const std::string& content) {
  if (rc.output.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    std::cout.flush();
  } else {
    write_file_atomic(rc.output, content);
  }
}

std::string require_input(const RunConfig& rc) {
  if (rc.input.empty()) throw ValidationError("--input is required");
  return rc.input;
}

double require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalError(what + ": non-finite result");
  return v;
}

// Entropy-only queries, defined for every q >= 0.
std::optional<double> entropy_query(const std::string& name, const DensityMatrix& rho, QParam qp) {
  if (name == "tsallis-entropy") return tsallis_entropy(rho, qp);
  if (name == "mutual-entropy") return mutual_entropy(rho, qp);
  if (name == "conditional-entropy") return conditional_entropy(rho, qp);
  return std::nullopt;
}

bool is_entropy_query(const std::string& name) {
  return name == "tsallis-entropy" || name == "mutual-entropy" || name == "conditional-entropy";
}

int cmd_compute(const RunConfig& rc) {
  if (rc.measure.empty()) throw ValidationError("--measure is required");
  const DensityMatrix rho = density_from_json(parse_json_file(require_input(rc)));
  const std::vector<double> qs = rc.qs.empty() ? std::vector<double>{1.0} : rc.qs;
  Json out = Json::array();
  std::string csv;
  if (is_entropy_query(rc.measure)) {
    csv = "measure,q,value\n";
    for (double q : qs) {
      const double v = require_finite(*entropy_query(rc.measure, rho, QParam(q)), rc.measure);
      out.push_back({{"measure", rc.measure}, {"q", q}, {"value", v}});
      std::ostringstream row;
      row.precision(17);
      row << rc.measure << ',' << q << ',' << v << '\n';
      csv += row.str();
    }
  } else {
    const Measure m = parse_measure(rc.measure);
    const OptConfig cfg = opt_config(rc);
    for (double q : qs) {
      const MeasureReport rep = compute_measure(m, rho, QParam(q), cfg);
      require_finite(rep.value, rc.measure);
      out.push_back(to_json(rep));
      std::string row = measure_csv(rep);
      csv += csv.empty() ? row : row.substr(row.find('\n') + 1);
      log(std::string(cli_name(m)) + " q=" + std::to_string(q) + " value=" + std::to_string(rep.value) +
          " bound=" + std::string(to_string(rep.bound_side)));
    }
  }
  if (rc.format == Format::Csv) emit(rc, csv);
  else emit(rc, (out.size() == 1 ? out.front() : out).dump(2));
  return kExitOk;
}

PureState load_pure(const std::string& path) {
  const Json j = parse_json_file(path);
  const Json& state = j.is_array() ? (j.size() == 1 ? j.front() : throw ValidationError("expected one state")) : j;
  const DensityMatrix rho = density_from_json(state);
  if (!rho.is_pure()) throw ValidationError("pure-state theorem on a mixed input (purity below 1 - 1e-9)");
  const bool vector_form = !state.at("re").empty() && !state.at("re").front().is_array();
  if (vector_form) return pure_state_from_json(state);
  const Spectrum s = spectral(rho);
  return PureState(s.eigenvectors.col(0).normalized(), rho.dims());
}

int cmd_verify(const RunConfig& rc) {
  const PureState psi = load_pure(require_input(rc));
  std::vector<Theorem> theorems;
  if (rc.theorem == "all") {
    theorems = scan_theorems();
    theorems.push_back(Theorem::COND_CANCEL);
  } else {
    theorems.push_back(parse_theorem(rc.theorem));
  }
  const std::vector<double> qs = rc.qs.empty() ? std::vector<double>{1.0} : rc.qs;
  const OptConfig cfg = opt_config(rc);
  std::vector<TheoremReport> reports;
  for (double q : qs) {
    TheoremContext ctx(psi, QParam(q), cfg, "input");
    for (Theorem t : theorems) {
      TheoremReport rep = run_theorem(t, ctx);
      require_finite(rep.residual, std::string(to_string(t)));
      log(std::string(to_string(t)) + " q=" + std::to_string(q) + " residual=" + std::to_string(rep.residual) +
          (rep.converged ? "" : " (unconverged)") + (rep.violation_candidate ? " VIOLATION CANDIDATE" : ""));
      reports.push_back(std::move(rep));
    }
  }
  emit(rc, rc.format == Format::Csv ? theorem_csv(reports) : to_json(reports).dump(2));
  for (const TheoremReport& r : reports) {
    if (r.violation_candidate) return kExitViolation;
  }
  return kExitOk;
}

std::vector<CorpusEntry> corpus_for(const RunConfig& rc) {
  if (!rc.input.empty()) return corpus_from_json(parse_json_file(rc.input));
  return generate_corpus(rc.corpus_count, rc.dims, rc.seed, rc.include_canonical);
}

int cmd_scan(const RunConfig& rc) {
  const std::vector<CorpusEntry> corpus = corpus_for(rc);
  const std::vector<double> qs = rc.qs.empty() ? kDefaultGrid : rc.qs;
  const OptConfig cfg = opt_config(rc);
  const std::string prefix = rc.output.empty() ? "scan.json" : rc.output;
  log("scan: " + std::to_string(corpus.size()) + " states x " + std::to_string(qs.size()) + " q values");
  const auto start = std::chrono::steady_clock::now();
  const ScanResult result = scan(corpus, qs, cfg, rc.workers, [](const std::string& id, double q, double sec) {
    log("[scan " + id + " q=" + std::to_string(q) + "] done in " + std::to_string(sec) + " s");
  });
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const ScanError& e : result.summary.errors) {
    log("[scan " + e.state_id + " q=" + std::to_string(e.q) + "] error " + e.theorem + ": " + e.message);
  }
  write_file_atomic(prefix, to_json(result.reports).dump(2) + "\n");
  write_file_atomic(prefix + ".summary.json", to_json(result.summary).dump(2) + "\n");
  write_file_atomic(prefix + ".csv", theorem_csv(result.reports));
  log("scan: " + std::to_string(result.reports.size()) + " reports, " +
      std::to_string(result.summary.violation_candidates.size()) + " violation candidates, " + std::to_string(total) +
      " s");
  return result.summary.violation_candidates.empty() ? kExitOk : kExitViolation;
}

int cmd_gen_corpus(const RunConfig& rc) {
  if (rc.corpus_count < 1) throw ValidationError("--corpus-count must be at least 1");
  const auto corpus = generate_corpus(rc.corpus_count, rc.dims, rc.seed, rc.include_canonical);
  emit(rc, corpus_to_json(corpus).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Tsallis-q correlation measures and trade-off identity checks", "qtrade"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
  app.require_subcommand(1);

  RunConfig rc;
  std::string format = "json";
  app.add_option("--measure", rc.measure,
                 "q-entanglement | q-eoa | q-cc | q-ue | q-discord | q-ud | tsallis-entropy | mutual-entropy | "
                 "conditional-entropy");
  app.add_option("--theorem", rc.theorem, "t1-cc | t1-ue | t2 | t3 | t4 | cond-cancel | all")->capture_default_str();
  app.add_option("--q", rc.qs, "Tsallis index; repeatable or comma separated")->delimiter(',');
  app.add_option("--restarts", rc.restarts, "optimizer restarts")->capture_default_str();
  app.add_option("--max-iters", rc.max_iters, "iterations per restart")->capture_default_str();
  app.add_option("--tol", rc.tol, "optimizer stopping tolerance")->capture_default_str();
  app.add_option("--seed", rc.seed, "master seed")->envname("QTRADE_SEED")->capture_default_str();
  app.add_option("--m-outcomes", rc.m_outcomes, "POVM / ensemble cardinality cap (0 = default)");
  app.add_option("--input", rc.input, "state or corpus JSON file");
  app.add_option("--output", rc.output, "output path (stdout when omitted; scan prefix)");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--corpus-count", rc.corpus_count, "number of Haar-random states")->capture_default_str();
  app.add_option("--dims", rc.dims, "tripartite dimensions, e.g. 2,2,3")->delimiter(',')->expected(3);
  app.add_flag("--include-canonical", rc.include_canonical, "prepend GHZ, W and PRODUCT states");
  app.add_option("--workers", rc.workers, "scan threads (0 = hardware concurrency)");

  auto* compute = app.add_subcommand("compute", "compute a correlation measure or entropy of a state")->fallthrough();
  auto* verify = app.add_subcommand("verify", "check theorem identities on a tripartite pure state")->fallthrough();
  auto* scan_cmd = app.add_subcommand("scan", "run every identity check over a corpus and q grid")->fallthrough();
  auto* gen = app.add_subcommand("gen-corpus", "write a corpus of tripartite pure states")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }
  rc.format = format == "csv" ? Format::Csv : Format::Json;

  try {
    const bool entropy_only = compute->parsed() && is_entropy_query(rc.measure);
    for (double q : rc.qs) {
      if (!std::isfinite(q) || q < 0.0) throw ValidationError("q must be a finite nonnegative number");
      if (!entropy_only && q < 1.0) throw ValidationError("correlation measures and theorem checks require q >= 1");
    }
    if (compute->parsed()) return cmd_compute(rc);
    if (verify->parsed()) return cmd_verify(rc);
    if (scan_cmd->parsed()) return cmd_scan(rc);
    if (gen->parsed()) return cmd_gen_corpus(rc);
  } catch (const ValidationError& e) {
    std::cerr << "qtrade: input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NumericalError& e) {
    std::cerr << "qtrade: numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "qtrade: failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return kExitInputError;
}

}  // namespace qtrade

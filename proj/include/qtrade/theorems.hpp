#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtrade/measures.hpp"

namespace qtrade {

enum class Theorem {
  T1_CC,
  T1_UE,
  T2,
  T3_IDENTITY,
  T4_IDENTITY,
  MONOGAMY_UE,
  POLYGAMY_EOA,
  POLYGAMY_UD,
  COND_CANCEL,
};

std::string_view to_string(Theorem t);
Theorem parse_theorem(std::string_view name);

/// Declared residual tolerance of each identity check.
double theorem_tolerance(Theorem t);

/// Spread above which a search is not considered converged.
inline constexpr double kConvergenceSpread = 1e-6;

struct Verdict {
  Theorem inequality;
  double slack;  // >= 0 when the inequality holds
  bool satisfied;
};

struct TheoremReport {
  Theorem theorem = Theorem::T1_CC;
  std::string state_id;
  double q = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs
  bool converged = true;
  bool violation_candidate = false;
  double spread = 0.0;  // summed restart spread of the searches involved
  /// Named auxiliary quantities, in insertion order.
  std::vector<std::pair<std::string, double>> extras;
  std::vector<Verdict> verdicts;
  /// Measure reports (values plus certificates) that entered lhs / rhs.
  std::vector<std::pair<std::string, MeasureReport>> certificates;

  std::optional<double> extra(std::string_view name) const;
};

/// Lazily computed marginals and measures of one tripartite pure state at
/// one q, shared by the theorem checks. Pairs are written as two letters
/// from {A, B, C}: "BA" is rho_BA with B as party 0 (entropy side) and A as
/// party 1 (measured side). "A(BC)" denotes the pure state regrouped as
/// A versus BC.
class TheoremContext {
 public:
  TheoremContext(PureState psi, QParam qp, OptConfig cfg, std::string state_id = {});

  const PureState& state() const { return psi_; }
  QParam q() const { return qp_; }
  const OptConfig& config() const { return cfg_; }
  const std::string& state_id() const { return id_; }

  const DensityMatrix& marginal(std::string_view parties);
  double entropy(std::string_view parties);
  const MeasureReport& measure(Measure m, std::string_view pair);

 private:
  PureState psi_;
  QParam qp_;
  OptConfig cfg_;
  std::string id_;
  std::map<std::string, DensityMatrix, std::less<>> marginals_;
  std::map<std::string, MeasureReport, std::less<>> measures_;
};

TheoremReport verify_t1_cc(TheoremContext& ctx);
TheoremReport verify_t1_ue(TheoremContext& ctx);
TheoremReport verify_t2(TheoremContext& ctx);
TheoremReport t3_equivalence_residual(TheoremContext& ctx);
TheoremReport t4_equivalence_residual(TheoremContext& ctx);
TheoremReport cond_entropy_cancellation(TheoremContext& ctx);

TheoremReport verify_t1_cc(const PureState& psi, QParam qp, const OptConfig& cfg);
TheoremReport verify_t1_ue(const PureState& psi, QParam qp, const OptConfig& cfg);
TheoremReport verify_t2(const PureState& psi, QParam qp, const OptConfig& cfg);
TheoremReport t3_equivalence_residual(const PureState& psi, QParam qp, const OptConfig& cfg);
TheoremReport t4_equivalence_residual(const PureState& psi, QParam qp, const OptConfig& cfg);
TheoremReport cond_entropy_cancellation(const PureState& psi, QParam qp);
/// Accepts a density matrix; rejects states whose purity is below 1 - 1e-9.
TheoremReport cond_entropy_cancellation(const DensityMatrix& rho_abc, QParam qp);

TheoremReport run_theorem(Theorem t, TheoremContext& ctx);

struct CorpusEntry {
  std::string id;
  PureState state;
};

struct ScanError {
  std::string state_id;
  double q;
  std::string theorem;
  std::string message;
};

struct ScanSummary {
  size_t states = 0;
  std::vector<double> q_grid;
  size_t reports = 0;
  std::map<std::string, double> max_abs_residual;
  std::map<std::string, size_t> unconverged;
  std::map<std::string, size_t> within_tolerance;
  double max_cond_cancel_residual = 0.0;
  std::vector<TheoremReport> violation_candidates;
  /// verdict_tally[q]["<inequality>@<theorem>"] = {satisfied, total}
  std::map<std::string, std::map<std::string, std::pair<size_t, size_t>>> verdict_tally;
  std::vector<ScanError> errors;
};

struct ScanResult {
  std::vector<TheoremReport> reports;
  ScanSummary summary;
};

/// Theorems emitted per (state, q) by scan.
const std::vector<Theorem>& scan_theorems();

/// Runs every scan theorem on every (state, q). Items are evaluated by up to
/// `workers` threads (0 = hardware concurrency); the output order is always
/// corpus order, then q-grid order, then scan_theorems() order. Failures are
/// recorded per item and do not abort the scan. `on_item` is called from
/// the worker threads after each (state, q) item with its id, q and
/// wall-clock seconds.
using ScanProgress = std::function<void(const std::string& state_id, double q, double seconds)>;
ScanResult scan(const std::vector<CorpusEntry>& corpus, const std::vector<double>& q_grid, const OptConfig& cfg,
                unsigned workers = 0, const ScanProgress& on_item = {});

/// Haar-random states (ids "haar-<dA>x<dB>x<dC>-<k>", seeds derived from
/// `seed`), optionally
/// preceded by the canonical states defined for `dims`.
std::vector<CorpusEntry> generate_corpus(int count, const Dims& dims, std::uint64_t seed, bool include_canonical);

}  // namespace qtrade

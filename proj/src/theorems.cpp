#include "qtrade/theorems.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>

#include "qtrade/errors.hpp"
#include "qtrade/random.hpp"

namespace qtrade {

std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::T1_CC: return "T1_CC";
    case Theorem::T1_UE: return "T1_UE";
    case Theorem::T2: return "T2";
    case Theorem::T3_IDENTITY: return "T3_IDENTITY";
    case Theorem::T4_IDENTITY: return "T4_IDENTITY";
    case Theorem::MONOGAMY_UE: return "MONOGAMY_UE";
    case Theorem::POLYGAMY_EOA: return "POLYGAMY_EOA";
    case Theorem::POLYGAMY_UD: return "POLYGAMY_UD";
    case Theorem::COND_CANCEL: return "COND_CANCEL";
  }
  return "?";
}

Theorem parse_theorem(std::string_view name) {
  static const std::pair<const char*, Theorem> aliases[] = {
      {"t1", Theorem::T1_CC},          {"t1-cc", Theorem::T1_CC},       {"t1-ue", Theorem::T1_UE},
      {"t2", Theorem::T2},             {"t3", Theorem::T3_IDENTITY},    {"t4", Theorem::T4_IDENTITY},
      {"cond-cancel", Theorem::COND_CANCEL},
  };
  for (const auto& [alias, t] : aliases) {
    if (name == alias) return t;
  }
  for (Theorem t : {Theorem::T1_CC, Theorem::T1_UE, Theorem::T2, Theorem::T3_IDENTITY, Theorem::T4_IDENTITY,
                    Theorem::MONOGAMY_UE, Theorem::POLYGAMY_EOA, Theorem::POLYGAMY_UD, Theorem::COND_CANCEL}) {
    if (name == to_string(t)) return t;
  }
  throw ValidationError("unknown theorem '" + std::string(name) + "'");
}

double theorem_tolerance(Theorem t) {
  switch (t) {
    case Theorem::T1_CC: return 1e-4;
    case Theorem::T1_UE: return 1e-10;
    case Theorem::T2:
    case Theorem::T3_IDENTITY:
    case Theorem::T4_IDENTITY: return 2e-4;
    case Theorem::COND_CANCEL: return 1e-9;
    case Theorem::MONOGAMY_UE:
    case Theorem::POLYGAMY_EOA:
    case Theorem::POLYGAMY_UD: return 1e-6;
  }
  return 0.0;
}

std::optional<double> TheoremReport::extra(std::string_view name) const {
  for (const auto& [k, v] : extras) {
    if (k == name) return v;
  }
  return std::nullopt;
}

namespace {

void require_tripartite_pure(const PureState& psi) {
  if (psi.parties() != 3) throw ValidationError("theorem checks require a tripartite state");
}

void require_q(QParam qp) {
  if (qp.q() < 1.0 && !qp.von_neumann()) throw ValidationError("theorem checks require q >= 1");
}

int party_index(char c) {
  if (c < 'A' || c > 'C') throw ValidationError(std::string("unknown party '") + c + "'");
  return c - 'A';
}

void finish(TheoremReport& rep, std::initializer_list<const MeasureReport*> searches) {
  rep.residual = rep.lhs - rep.rhs;
  rep.spread = 0.0;
  for (const MeasureReport* m : searches) rep.spread += m->spread();
  rep.converged = rep.spread <= kConvergenceSpread;
  const double tol = theorem_tolerance(rep.theorem);
  const double r = std::abs(rep.residual);
  rep.violation_candidate = r > tol && r > 10.0 * rep.spread;
}

TheoremReport make_report(Theorem t, const TheoremContext& ctx) {
  TheoremReport rep;
  rep.theorem = t;
  rep.state_id = ctx.state_id();
  rep.q = ctx.q().q();
  return rep;
}

void add_verdict(TheoremReport& rep, Theorem inequality, double slack) {
  rep.verdicts.push_back({inequality, slack, slack >= -theorem_tolerance(inequality)});
}

}  // namespace

TheoremContext::TheoremContext(PureState psi, QParam qp, OptConfig cfg, std::string state_id)
    : psi_(std::move(psi)), qp_(qp), cfg_(std::move(cfg)), id_(std::move(state_id)) {
  require_tripartite_pure(psi_);
  require_q(qp_);
  cfg_.validate();
}

const DensityMatrix& TheoremContext::marginal(std::string_view parties) {
  if (auto it = marginals_.find(parties); it != marginals_.end()) return it->second;
  const std::string key(parties);
  if (key == "A(BC)") {
    const Dims& d = psi_.dims();
    return marginals_.emplace(key, DensityMatrix(psi_.regrouped({d[0], d[1] * d[2]}))).first->second;
  }
  std::vector<int> keep;
  for (char c : key) keep.push_back(party_index(c));
  return marginals_.emplace(key, partial_trace(psi_, keep)).first->second;
}

double TheoremContext::entropy(std::string_view parties) { return tsallis_entropy(marginal(parties), qp_); }

const MeasureReport& TheoremContext::measure(Measure m, std::string_view pair) {
  std::string key = std::string(to_string(m)) + ":" + std::string(pair);
  if (auto it = measures_.find(key); it != measures_.end()) return it->second;
  MeasureReport rep = compute_measure(m, marginal(pair), qp_, cfg_);
  return measures_.emplace(std::move(key), std::move(rep)).first->second;
}

TheoremReport verify_t1_cc(TheoremContext& ctx) {
  TheoremReport rep = make_report(Theorem::T1_CC, ctx);
  const MeasureReport& j = ctx.measure(Measure::QCC, "AB");
  const MeasureReport& e = ctx.measure(Measure::QE, "AC");
  rep.lhs = ctx.entropy("A");
  rep.rhs = j.value + e.value;
  finish(rep, {&j, &e});
  rep.extras.emplace_back("slack", rep.rhs - rep.lhs);
  rep.certificates.emplace_back("q_cc(AB)", j);
  rep.certificates.emplace_back("q_entanglement(AC)", e);
  return rep;
}

TheoremReport verify_t1_ue(TheoremContext& ctx) {
  TheoremReport rep = make_report(Theorem::T1_UE, ctx);
  const MeasureReport& ue = ctx.measure(Measure::QUE, "AB");
  rep.lhs = ctx.entropy("A");

  // The POVM on B that attains uE(AB) induces a decomposition of rho_AC whose
  // q-expected entanglement completes the identity.
  MeasureReport shared;
  shared.measure = Measure::QEOA;
  shared.q = ctx.q();
  shared.bound_side = BoundSide::Lower;
  if (const auto* povm = std::get_if<RankOnePovm>(&ue.certificate)) {
    Ensemble ens = povm_to_ensemble(ctx.state(), *povm);
    shared.value = ens.q_expected_entanglement(ctx.q());
    shared.m_outcomes = static_cast<int>(povm->size());
    shared.certificate = std::move(ens);
  } else {
    // Pure rho_AB: rho_AC is a product with a pure A part.
    shared.value = 0.0;
  }
  rep.rhs = ue.value + shared.value;

  const MeasureReport& eoa = ctx.measure(Measure::QEOA, "AC");
  finish(rep, {&ue});
  const double independent = rep.lhs - (ue.value + eoa.value);
  rep.extras.emplace_back("independent_residual", independent);
  rep.extras.emplace_back("independent_spread", ue.spread() + eoa.spread());
  rep.certificates.emplace_back("q_ue(AB)", ue);
  rep.certificates.emplace_back("q_eoa(AC) shared", std::move(shared));
  rep.certificates.emplace_back("q_eoa(AC)", eoa);
  return rep;
}

TheoremReport verify_t2(TheoremContext& ctx) {
  TheoremReport rep = make_report(Theorem::T2, ctx);
  const MeasureReport& ud = ctx.measure(Measure::QUD, "BA");
  const MeasureReport& ue = ctx.measure(Measure::QUE, "CA");
  rep.lhs = ctx.entropy("A");
  rep.rhs = ud.value + ue.value;
  finish(rep, {&ud, &ue});
  rep.certificates.emplace_back("q_ud(BA)", ud);
  rep.certificates.emplace_back("q_ue(CA)", ue);
  return rep;
}

TheoremReport t3_equivalence_residual(TheoremContext& ctx) {
  TheoremReport rep = make_report(Theorem::T3_IDENTITY, ctx);
  const MeasureReport& eoa_ab = ctx.measure(Measure::QEOA, "AB");
  const MeasureReport& eoa_ac = ctx.measure(Measure::QEOA, "AC");
  const MeasureReport& eoa_abc = ctx.measure(Measure::QEOA, "A(BC)");
  const MeasureReport& ue_ab = ctx.measure(Measure::QUE, "AB");
  const MeasureReport& ue_ac = ctx.measure(Measure::QUE, "AC");
  const MeasureReport& ue_abc = ctx.measure(Measure::QUE, "A(BC)");
  rep.lhs = eoa_ab.value + eoa_ac.value - eoa_abc.value;
  rep.rhs = ue_abc.value - ue_ab.value - ue_ac.value;
  finish(rep, {&eoa_ab, &eoa_ac, &eoa_abc, &ue_ab, &ue_ac, &ue_abc});
  add_verdict(rep, Theorem::POLYGAMY_EOA, rep.lhs);
  add_verdict(rep, Theorem::MONOGAMY_UE, rep.rhs);
  rep.certificates.emplace_back("q_eoa(AB)", eoa_ab);
  rep.certificates.emplace_back("q_eoa(AC)", eoa_ac);
  rep.certificates.emplace_back("q_eoa(A(BC))", eoa_abc);
  rep.certificates.emplace_back("q_ue(AB)", ue_ab);
  rep.certificates.emplace_back("q_ue(AC)", ue_ac);
  rep.certificates.emplace_back("q_ue(A(BC))", ue_abc);
  return rep;
}

TheoremReport t4_equivalence_residual(TheoremContext& ctx) {
  TheoremReport rep = make_report(Theorem::T4_IDENTITY, ctx);
  const MeasureReport& ud_ab = ctx.measure(Measure::QUD, "AB");
  const MeasureReport& ud_ac = ctx.measure(Measure::QUD, "AC");
  const MeasureReport& eoa_ab = ctx.measure(Measure::QEOA, "AB");
  const MeasureReport& eoa_ac = ctx.measure(Measure::QEOA, "AC");
  const MeasureReport& ud_abc = ctx.measure(Measure::QUD, "A(BC)");
  const MeasureReport& eoa_abc = ctx.measure(Measure::QEOA, "A(BC)");
  rep.lhs = ud_ab.value + ud_ac.value;
  rep.rhs = eoa_ac.value + eoa_ab.value;
  finish(rep, {&ud_ab, &ud_ac, &eoa_ab, &eoa_ac});

  const double check_b = ud_abc.value - eoa_abc.value;
  rep.extras.emplace_back("check_b_lhs", ud_abc.value);
  rep.extras.emplace_back("check_b_rhs", eoa_abc.value);
  rep.extras.emplace_back("check_b_residual", check_b);
  if (std::abs(check_b) > theorem_tolerance(Theorem::T4_IDENTITY)) rep.violation_candidate = true;

  add_verdict(rep, Theorem::POLYGAMY_EOA, eoa_ab.value + eoa_ac.value - eoa_abc.value);
  add_verdict(rep, Theorem::POLYGAMY_UD, ud_ab.value + ud_ac.value - ud_abc.value);
  rep.certificates.emplace_back("q_ud(AB)", ud_ab);
  rep.certificates.emplace_back("q_ud(AC)", ud_ac);
  rep.certificates.emplace_back("q_eoa(AB)", eoa_ab);
  rep.certificates.emplace_back("q_eoa(AC)", eoa_ac);
  rep.certificates.emplace_back("q_ud(A(BC))", ud_abc);
  rep.certificates.emplace_back("q_eoa(A(BC))", eoa_abc);
  return rep;
}

TheoremReport cond_entropy_cancellation(TheoremContext& ctx) {
  TheoremReport rep = make_report(Theorem::COND_CANCEL, ctx);
  const double ab = conditional_entropy(ctx.marginal("AB"), ctx.q());
  const double ac = conditional_entropy(ctx.marginal("AC"), ctx.q());
  rep.lhs = ab + ac;
  rep.rhs = 0.0;
  rep.extras.emplace_back("cond_AB", ab);
  rep.extras.emplace_back("cond_AC", ac);
  finish(rep, {});
  return rep;
}

TheoremReport verify_t1_cc(const PureState& psi, QParam qp, const OptConfig& cfg) {
  TheoremContext ctx(psi, qp, cfg);
  return verify_t1_cc(ctx);
}

TheoremReport verify_t1_ue(const PureState& psi, QParam qp, const OptConfig& cfg) {
  TheoremContext ctx(psi, qp, cfg);
  return verify_t1_ue(ctx);
}

TheoremReport verify_t2(const PureState& psi, QParam qp, const OptConfig& cfg) {
  TheoremContext ctx(psi, qp, cfg);
  return verify_t2(ctx);
}

TheoremReport t3_equivalence_residual(const PureState& psi, QParam qp, const OptConfig& cfg) {
  TheoremContext ctx(psi, qp, cfg);
  return t3_equivalence_residual(ctx);
}

TheoremReport t4_equivalence_residual(const PureState& psi, QParam qp, const OptConfig& cfg) {
  TheoremContext ctx(psi, qp, cfg);
  return t4_equivalence_residual(ctx);
}

TheoremReport cond_entropy_cancellation(const PureState& psi, QParam qp) {
  TheoremContext ctx(psi, qp, OptConfig{});
  return cond_entropy_cancellation(ctx);
}

TheoremReport cond_entropy_cancellation(const DensityMatrix& rho_abc, QParam qp) {
  if (rho_abc.parties() != 3) throw ValidationError("theorem checks require a tripartite state");
  if (!rho_abc.is_pure()) throw ValidationError("theorem checks require a pure state (purity below 1 - 1e-9)");
  const Spectrum s = spectral(rho_abc);
  Vec v = s.eigenvectors.col(0);
  v /= v.norm();
  return cond_entropy_cancellation(PureState(std::move(v), rho_abc.dims()), qp);
}

TheoremReport run_theorem(Theorem t, TheoremContext& ctx) {
  switch (t) {
    case Theorem::T1_CC: return verify_t1_cc(ctx);
    case Theorem::T1_UE: return verify_t1_ue(ctx);
    case Theorem::T2: return verify_t2(ctx);
    case Theorem::T3_IDENTITY: return t3_equivalence_residual(ctx);
    case Theorem::T4_IDENTITY: return t4_equivalence_residual(ctx);
    case Theorem::COND_CANCEL: return cond_entropy_cancellation(ctx);
    case Theorem::MONOGAMY_UE:
    case Theorem::POLYGAMY_EOA:
    case Theorem::POLYGAMY_UD: break;
  }
  throw ValidationError("inequalities are reported as verdicts of T3_IDENTITY / T4_IDENTITY");
}

const std::vector<Theorem>& scan_theorems() {
  static const std::vector<Theorem> list{Theorem::T1_CC, Theorem::T1_UE, Theorem::T2, Theorem::T3_IDENTITY,
                                         Theorem::T4_IDENTITY};
  return list;
}

namespace {

struct ItemResult {
  std::vector<TheoremReport> reports;
  std::vector<ScanError> errors;
  double cond_cancel = 0.0;
};

ItemResult run_item(const CorpusEntry& entry, double q, const OptConfig& cfg) {
  ItemResult out;
  std::optional<TheoremContext> ctx;
  try {
    ctx.emplace(entry.state, QParam(q), cfg, entry.id);
    out.cond_cancel = std::abs(cond_entropy_cancellation(*ctx).residual);
  } catch (const std::exception& e) {
    out.errors.push_back({entry.id, q, "", e.what()});
    return out;
  }
  for (Theorem t : scan_theorems()) {
    try {
      out.reports.push_back(run_theorem(t, *ctx));
    } catch (const std::exception& e) {
      out.errors.push_back({entry.id, q, std::string(to_string(t)), e.what()});
    }
  }
  return out;
}

std::string q_key(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return buf;
}

}  // namespace

ScanResult scan(const std::vector<CorpusEntry>& corpus, const std::vector<double>& q_grid, const OptConfig& cfg,
                unsigned workers, const ScanProgress& on_item) {
  if (corpus.empty()) throw ValidationError("scan: empty corpus");
  if (q_grid.empty()) throw ValidationError("scan: empty q grid");
  for (double q : q_grid) require_q(QParam(q));
  cfg.validate();

  const size_t n = corpus.size() * q_grid.size();
  std::vector<ItemResult> items(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      const CorpusEntry& entry = corpus[i / q_grid.size()];
      const double q = q_grid[i % q_grid.size()];
      const auto start = std::chrono::steady_clock::now();
      items[i] = run_item(entry, q, cfg);
      if (on_item) {
        on_item(entry.id, q, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<size_t>(workers, n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ScanResult result;
  ScanSummary& s = result.summary;
  s.states = corpus.size();
  s.q_grid = q_grid;
  for (Theorem t : scan_theorems()) {
    s.max_abs_residual[std::string(to_string(t))] = 0.0;
    s.unconverged[std::string(to_string(t))] = 0;
    s.within_tolerance[std::string(to_string(t))] = 0;
  }
  for (ItemResult& item : items) {
    s.max_cond_cancel_residual = std::max(s.max_cond_cancel_residual, item.cond_cancel);
    for (ScanError& e : item.errors) s.errors.push_back(std::move(e));
    for (TheoremReport& rep : item.reports) {
      const std::string name(to_string(rep.theorem));
      double& worst = s.max_abs_residual[name];
      worst = std::max(worst, std::abs(rep.residual));
      for (const auto& [k, v] : rep.extras) {
        if (k.size() > 9 && k.compare(k.size() - 9, 9, "_residual") == 0) {
          double& w = s.max_abs_residual[name + "." + k];
          w = std::max(w, std::abs(v));
        }
      }
      if (!rep.converged) ++s.unconverged[name];
      if (std::abs(rep.residual) <= theorem_tolerance(rep.theorem)) ++s.within_tolerance[name];
      for (const Verdict& v : rep.verdicts) {
        auto& tally = s.verdict_tally[q_key(rep.q)][std::string(to_string(v.inequality)) + "@" + name];
        tally.second += 1;
        tally.first += v.satisfied ? 1 : 0;
      }
      if (rep.violation_candidate) s.violation_candidates.push_back(rep);
      result.reports.push_back(std::move(rep));
    }
  }
  s.reports = result.reports.size();
  return result;
}

std::vector<CorpusEntry> generate_corpus(int count, const Dims& dims, std::uint64_t seed, bool include_canonical) {
  if (count < 0) throw ValidationError("corpus count must be nonnegative");
  if (dims.size() != 3) throw ValidationError("corpus states must be tripartite");
  std::vector<CorpusEntry> out;
  if (include_canonical) {
    const bool equal = dims[0] == dims[1] && dims[1] == dims[2];
    if (equal) out.push_back({"GHZ", canonical_state(CanonicalState::GHZ, dims)});
    if (dims == Dims{2, 2, 2}) out.push_back({"W", canonical_state(CanonicalState::W, dims)});
    out.push_back({"PRODUCT", canonical_state(CanonicalState::PRODUCT, dims)});
  }
  const std::string prefix =
      "haar-" + std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + "x" + std::to_string(dims[2]) + "-";
  for (int k = 0; k < count; ++k) {
    out.push_back({prefix + std::to_string(k), haar_random_pure(dims, derive_seed(seed, static_cast<std::uint64_t>(k)))});
  }
  if (out.empty()) throw ValidationError("empty corpus");
  return out;
}

}  // namespace qtrade

#include "qtrade/measures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "qtrade/errors.hpp"

namespace qtrade {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::QE: return "QE";
    case Measure::QEOA: return "QEOA";
    case Measure::QCC: return "QCC";
    case Measure::QUE: return "QUE";
    case Measure::QD: return "QD";
    case Measure::QUD: return "QUD";
  }
  return "?";
}

std::string_view cli_name(Measure m) {
  switch (m) {
    case Measure::QE: return "q-entanglement";
    case Measure::QEOA: return "q-eoa";
    case Measure::QCC: return "q-cc";
    case Measure::QUE: return "q-ue";
    case Measure::QD: return "q-discord";
    case Measure::QUD: return "q-ud";
  }
  return "?";
}

Measure parse_measure(std::string_view name) {
  for (Measure m : {Measure::QE, Measure::QEOA, Measure::QCC, Measure::QUE, Measure::QD, Measure::QUD}) {
    if (name == to_string(m) || name == cli_name(m)) return m;
  }
  throw ValidationError("unknown measure '" + std::string(name) + "'");
}

std::string_view to_string(BoundSide b) {
  switch (b) {
    case BoundSide::Upper: return "UPPER";
    case BoundSide::Lower: return "LOWER";
    case BoundSide::Exact: return "EXACT";
  }
  return "?";
}

namespace {

// tau(a) = sum_{i,j} a_i conj(a_j) K_ij, the unnormalized party-0 state of
// one ensemble member (or one measurement outcome) as a function of one row
// of the isometry.
struct QuadraticForm {
  int r = 0;
  int k = 0;
  std::vector<Mat> blocks;  // r * r blocks of size k x k

  Mat tau(const Eigen::RowVectorXcd& a) const {
    Mat t = Mat::Zero(k, k);
    for (int i = 0; i < r; ++i) {
      if (a(i) == cplx(0.0)) continue;
      for (int j = 0; j < r; ++j) {
        const cplx c = a(i) * std::conj(a(j));
        if (c != cplx(0.0)) t.noalias() += c * blocks[static_cast<size_t>(i * r + j)];
      }
    }
    return t;
  }
};

void require_measure_input(const DensityMatrix& rho, QParam qp, const char* what) {
  if (rho.parties() != 2) throw ValidationError(std::string(what) + ": expected a bipartite state");
  if (qp.q() < 1.0 && !qp.von_neumann()) {
    throw ValidationError(std::string(what) + ": correlation measures require q >= 1");
  }
}

double marginal_entropy(const DensityMatrix& rho, int party, QParam qp) {
  return tsallis_entropy(partial_trace(rho, {party}), qp);
}

// Values that are nonnegative in exact arithmetic lose sign only to rounding.
double clamp_rounding(double v) { return (v < 0.0 && v > -1e-12) ? 0.0 : v; }

MeasureReport closed_form(Measure m, const DensityMatrix& rho, QParam qp) {
  MeasureReport rep;
  rep.measure = m;
  rep.q = qp;
  rep.bound_side = BoundSide::Exact;
  // Every rank-one measurement (or decomposition) of a pure state leaves
  // pure conditional states on party 0.
  const int party = (m == Measure::QD || m == Measure::QUD) ? 1 : 0;
  rep.value = marginal_entropy(rho, party, qp);
  return rep;
}

int decomposition_cardinality(const OptConfig& cfg, int rank) {
  const int m = cfg.m_outcomes.value_or(rank * rank);
  if (m < rank) throw ValidationError("m_outcomes is smaller than the rank of the state");
  return m;
}

int measurement_cardinality(const DensityMatrix& rho, const OptConfig& cfg) {
  const int d = rho.dims()[1];
  const int m = cfg.m_outcomes.value_or(d * d);
  if (m < d) throw ValidationError("m_outcomes is smaller than the measured dimension");
  return m;
}

MeasureReport search_decomposition(Measure m, const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  const int rank = numerical_rank(rho);
  const int card = decomposition_cardinality(cfg, rank);
  const Direction dir = m == Measure::QE ? Direction::Min : Direction::Max;
  OptResult opt = optimize(decomposition_objective(rho, qp), dir, card, rank, cfg);
  MeasureReport rep;
  rep.measure = m;
  rep.q = qp;
  rep.value = clamp_rounding(opt.value);
  rep.certificate = hjw_ensemble(rho, opt.argument);
  rep.bound_side = m == Measure::QE ? BoundSide::Upper : BoundSide::Lower;
  rep.m_outcomes = card;
  rep.opt = std::move(opt);
  return rep;
}

MeasureReport search_measurement(Measure m, const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  const int card = measurement_cardinality(rho, cfg);
  const Direction dir = m == Measure::QCC ? Direction::Max : Direction::Min;
  OptResult opt = optimize(measurement_objective(rho, qp), dir, card, rho.dims()[1], cfg);
  MeasureReport rep;
  rep.measure = m;
  rep.q = qp;
  rep.value = clamp_rounding(opt.value);
  rep.certificate = RankOnePovm::from_isometry(opt.argument);
  rep.bound_side = m == Measure::QCC ? BoundSide::Lower : BoundSide::Upper;
  rep.m_outcomes = card;
  rep.opt = std::move(opt);
  return rep;
}

}  // namespace

Objective decomposition_objective(const DensityMatrix& rho, QParam qp) {
  const Spectrum s = spectral(rho);
  const int d0 = rho.dims()[0];
  const int d1 = rho.dims()[1];
  auto form = std::make_shared<QuadraticForm>();
  form->k = d0;
  for (double l : s.eigenvalues) form->r += l >= kZeroEigenvalue ? 1 : 0;
  std::vector<Mat> reshaped;
  for (int i = 0; i < form->r; ++i) {
    Mat e(d0, d1);
    for (int a = 0; a < d0; ++a) {
      for (int b = 0; b < d1; ++b) e(a, b) = s.eigenvectors(a * d1 + b, i);
    }
    reshaped.push_back(std::sqrt(s.eigenvalues[i]) * e);
  }
  for (int i = 0; i < form->r; ++i) {
    for (int j = 0; j < form->r; ++j) form->blocks.push_back(reshaped[i] * reshaped[j].adjoint());
  }
  Objective obj;
  obj.row_term = [form, qp](const Eigen::RowVectorXcd& a) { return weighted_entropy_term(form->tau(a), qp); };
  obj.phase_invariant = true;
  return obj;
}

Objective measurement_objective(const DensityMatrix& rho, QParam qp) {
  const int d0 = rho.dims()[0];
  const int d1 = rho.dims()[1];
  auto form = std::make_shared<QuadraticForm>();
  form->k = d0;
  form->r = d1;
  for (int b = 0; b < d1; ++b) {
    for (int b2 = 0; b2 < d1; ++b2) {
      Mat blk(d0, d0);
      for (int a = 0; a < d0; ++a) {
        for (int a2 = 0; a2 < d0; ++a2) blk(a, a2) = rho.matrix()(a * d1 + b, a2 * d1 + b2);
      }
      form->blocks.push_back(std::move(blk));
    }
  }
  Objective obj;
  obj.offset = marginal_entropy(rho, 0, qp);
  obj.row_term = [form, qp](const Eigen::RowVectorXcd& a) { return -weighted_entropy_term(form->tau(a), qp); };
  obj.phase_invariant = true;
  return obj;
}

MeasureReport q_entanglement(const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  require_measure_input(rho, qp, "q_entanglement");
  if (rho.is_pure()) return closed_form(Measure::QE, rho, qp);
  return search_decomposition(Measure::QE, rho, qp, cfg);
}

MeasureReport q_eoa(const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  require_measure_input(rho, qp, "q_eoa");
  if (rho.is_pure()) return closed_form(Measure::QEOA, rho, qp);
  return search_decomposition(Measure::QEOA, rho, qp, cfg);
}

MeasureReport q_cc(const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  require_measure_input(rho, qp, "q_cc");
  if (rho.is_pure()) return closed_form(Measure::QCC, rho, qp);
  return search_measurement(Measure::QCC, rho, qp, cfg);
}

MeasureReport q_ue(const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  require_measure_input(rho, qp, "q_ue");
  if (rho.is_pure()) return closed_form(Measure::QUE, rho, qp);
  return search_measurement(Measure::QUE, rho, qp, cfg);
}

MeasureReport q_discord(const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  require_measure_input(rho, qp, "q_discord");
  if (rho.is_pure()) return closed_form(Measure::QD, rho, qp);
  MeasureReport rep = search_measurement(Measure::QCC, rho, qp, cfg);
  rep.measure = Measure::QD;
  rep.value = mutual_entropy(rho, qp) - rep.value;
  rep.bound_side = BoundSide::Upper;
  return rep;
}

MeasureReport q_ud(const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  require_measure_input(rho, qp, "q_ud");
  if (rho.is_pure()) return closed_form(Measure::QUD, rho, qp);
  MeasureReport rep = search_measurement(Measure::QUE, rho, qp, cfg);
  rep.measure = Measure::QUD;
  rep.value = mutual_entropy(rho, qp) - rep.value;
  rep.bound_side = BoundSide::Lower;
  return rep;
}

MeasureReport compute_measure(Measure m, const DensityMatrix& rho, QParam qp, const OptConfig& cfg) {
  switch (m) {
    case Measure::QE: return q_entanglement(rho, qp, cfg);
    case Measure::QEOA: return q_eoa(rho, qp, cfg);
    case Measure::QCC: return q_cc(rho, qp, cfg);
    case Measure::QUE: return q_ue(rho, qp, cfg);
    case Measure::QD: return q_discord(rho, qp, cfg);
    case Measure::QUD: return q_ud(rho, qp, cfg);
  }
  throw ValidationError("unknown measure");
}

double evaluate_certificate(const DensityMatrix& rho, const MeasureReport& report) {
  require_measure_input(rho, report.q, "evaluate_certificate");
  const QParam qp = report.q;
  if (std::holds_alternative<std::monostate>(report.certificate)) {
    if (!rho.is_pure()) throw ValidationError("evaluate_certificate: closed form requires a pure state");
    return closed_form(report.measure, rho, qp).value;
  }
  if (const auto* ens = std::get_if<Ensemble>(&report.certificate)) {
    if (report.measure != Measure::QE && report.measure != Measure::QEOA) {
      throw ValidationError("evaluate_certificate: ensemble certificate for a measurement-based measure");
    }
    if (ens->target().dims() != rho.dims() || (ens->mixture() - rho.matrix()).cwiseAbs().maxCoeff() > 1e-9) {
      throw ValidationError("evaluate_certificate: ensemble does not decompose the state");
    }
    return ens->q_expected_entanglement(qp);
  }
  const auto& povm = std::get<RankOnePovm>(report.certificate);
  if (report.measure == Measure::QE || report.measure == Measure::QEOA) {
    throw ValidationError("evaluate_certificate: POVM certificate for a decomposition-based measure");
  }
  const double chi = tsallis_difference(measure_induced_ensemble(rho, GeneralPovm(povm)), qp);
  if (report.measure == Measure::QD || report.measure == Measure::QUD) return mutual_entropy(rho, qp) - chi;
  return chi;
}

}  // namespace qtrade

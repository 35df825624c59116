#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "qtrade/ensemble.hpp"
#include "qtrade/entropy.hpp"
#include "qtrade/optimize.hpp"
#include "qtrade/qstate.hpp"

namespace qtrade {

/// QE: q-expected entanglement, QEOA: its assistance dual, QCC: one-way
/// classical q-correlation, QUE: one-way unlocalizable q-entanglement,
/// QD / QUD: the corresponding discords (mutual entropy minus QCC / QUE).
/// All act on a bipartite rho with dims [d0, d1]; measurements act on
/// party 1 and entropies are taken on party 0.
enum class Measure { QE, QEOA, QCC, QUE, QD, QUD };

enum class BoundSide { Upper, Lower, Exact };

std::string_view to_string(Measure m);
std::string_view cli_name(Measure m);
Measure parse_measure(std::string_view name);
std::string_view to_string(BoundSide b);

using Certificate = std::variant<std::monostate, Ensemble, RankOnePovm>;

struct MeasureReport {
  Measure measure = Measure::QE;
  double value = 0.0;
  QParam q{1.0};
  Certificate certificate;
  std::optional<OptResult> opt;
  BoundSide bound_side = BoundSide::Exact;
  int m_outcomes = 0;  // cardinality cap used by the search; 0 for closed forms

  /// Restart spread of the underlying search; 0 for closed forms.
  double spread() const { return opt ? opt->spread() : 0.0; }
};

MeasureReport q_entanglement(const DensityMatrix& rho, QParam qp, const OptConfig& cfg);
MeasureReport q_eoa(const DensityMatrix& rho, QParam qp, const OptConfig& cfg);
MeasureReport q_cc(const DensityMatrix& rho, QParam qp, const OptConfig& cfg);
MeasureReport q_ue(const DensityMatrix& rho, QParam qp, const OptConfig& cfg);
MeasureReport q_discord(const DensityMatrix& rho, QParam qp, const OptConfig& cfg);
MeasureReport q_ud(const DensityMatrix& rho, QParam qp, const OptConfig& cfg);

MeasureReport compute_measure(Measure m, const DensityMatrix& rho, QParam qp, const OptConfig& cfg);

/// Re-evaluates a report's certificate through the ensemble/POVM routes
/// (no optimization). Closed-form reports are recomputed from rho.
double evaluate_certificate(const DensityMatrix& rho, const MeasureReport& report);

/// q-expectation of the marginal entropies on party 0 of a decomposition
/// given by an isometric mixing of rho's eigen-ensemble. Row-separable form
/// used by the searches; exposed for tests.
Objective decomposition_objective(const DensityMatrix& rho, QParam qp);

/// Tsallis-q difference on party 0 induced by a rank-one POVM on party 1
/// given as an isometry (row x = <v_x|).
Objective measurement_objective(const DensityMatrix& rho, QParam qp);

}  // namespace qtrade

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qtrade/measures.hpp"
#include "qtrade/theorems.hpp"

namespace qtrade {

using Json = nlohmann::ordered_json;

/// States are {"dims": [...], "re": [...], "im": [...]}; a vector of
/// amplitudes is a pure state, a list of rows is a density matrix. "im" may
/// be omitted.
Json to_json(const PureState& psi);
Json to_json(const DensityMatrix& rho);
PureState pure_state_from_json(const Json& j);
/// Accepts both the pure and the matrix form.
DensityMatrix density_from_json(const Json& j);

/// {"dims", "weights", "re", "im"} with one row of amplitudes per member.
Json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const Json& j);

/// {"dim", "re", "im"} with one row per vector |v_x>.
Json to_json(const RankOnePovm& povm);
RankOnePovm povm_from_json(const Json& j);

Json to_json(const OptResult& opt);
Json to_json(const MeasureReport& report);
/// Restores measure, q, value, bound side, cardinality and certificate; the
/// optimizer trace is not restored.
MeasureReport measure_report_from_json(const Json& j);

Json to_json(const TheoremReport& report);
Json to_json(const std::vector<TheoremReport>& reports);
Json to_json(const ScanSummary& summary);

/// Array of {"id", "dims", "re", "im"}.
Json corpus_to_json(const std::vector<CorpusEntry>& corpus);
std::vector<CorpusEntry> corpus_from_json(const Json& j);

std::string theorem_csv(const std::vector<TheoremReport>& reports);
std::string measure_csv(const MeasureReport& report);

Json parse_json_file(const std::string& path);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace qtrade

#include "qtrade/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec_part(const Vec& v, bool imag) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(imag ? v(i).imag() : v(i).real());
  return out;
}

Json mat_part(const Mat& m, bool imag) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(imag ? m(r, c).imag() : m(r, c).real());
    out.push_back(std::move(row));
  }
  return out;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected an array of numbers");
  std::vector<double> out;
  for (const Json& x : j) {
    if (!x.is_number()) throw ValidationError(std::string(what) + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Dims read_dims(const Json& j) {
  const Json& d = field(j, "dims");
  if (!d.is_array() || d.empty()) throw ValidationError("dims: expected a nonempty array");
  Dims dims;
  for (const Json& x : d) {
    if (!x.is_number_integer()) throw ValidationError("dims: expected integers");
    dims.push_back(x.get<int>());
  }
  return dims;
}

Vec read_vec(const Json& re, const Json* im, const char* what) {
  const std::vector<double> r = numbers(re, what);
  std::vector<double> i = im ? numbers(*im, what) : std::vector<double>(r.size(), 0.0);
  if (i.size() != r.size()) throw ValidationError(std::string(what) + ": re/im length mismatch");
  Vec v(static_cast<Eigen::Index>(r.size()));
  for (size_t k = 0; k < r.size(); ++k) v(static_cast<Eigen::Index>(k)) = cplx(r[k], i[k]);
  return v;
}

std::vector<Vec> read_rows(const Json& j, const char* what) {
  const Json& re = field(j, "re");
  const Json* im = j.contains("im") ? &j.at("im") : nullptr;
  if (!re.is_array() || (im && (!im->is_array() || im->size() != re.size()))) {
    throw ValidationError(std::string(what) + ": re/im must be arrays of equal length");
  }
  std::vector<Vec> rows;
  for (size_t k = 0; k < re.size(); ++k) rows.push_back(read_vec(re[k], im ? &(*im)[k] : nullptr, what));
  return rows;
}

bool is_matrix_form(const Json& j) {
  const Json& re = field(j, "re");
  return re.is_array() && !re.empty() && re.front().is_array();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json to_json(const PureState& psi) {
  Json j;
  j["dims"] = psi.dims();
  j["re"] = vec_part(psi.amplitudes(), false);
  j["im"] = vec_part(psi.amplitudes(), true);
  return j;
}

Json to_json(const DensityMatrix& rho) {
  Json j;
  j["dims"] = rho.dims();
  j["re"] = mat_part(rho.matrix(), false);
  j["im"] = mat_part(rho.matrix(), true);
  return j;
}

PureState pure_state_from_json(const Json& j) {
  if (is_matrix_form(j)) throw ValidationError("expected a pure state (amplitude vector)");
  const Json* im = j.contains("im") ? &j.at("im") : nullptr;
  return PureState(read_vec(field(j, "re"), im, "state"), read_dims(j));
}

DensityMatrix density_from_json(const Json& j) {
  if (!is_matrix_form(j)) return DensityMatrix(pure_state_from_json(j));
  const std::vector<Vec> rows = read_rows(j, "density matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Mat m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (rows[static_cast<size_t>(r)].size() != n) throw ValidationError("density matrix: not square");
    m.row(r) = rows[static_cast<size_t>(r)].transpose();
  }
  return DensityMatrix(std::move(m), read_dims(j));
}

Json to_json(const Ensemble& ensemble) {
  Json j;
  j["dims"] = ensemble.target().dims();
  j["weights"] = ensemble.weights();
  Json re = Json::array(), im = Json::array();
  for (const PureState& s : ensemble.states()) {
    re.push_back(vec_part(s.amplitudes(), false));
    im.push_back(vec_part(s.amplitudes(), true));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Ensemble ensemble_from_json(const Json& j) {
  const Dims dims = read_dims(j);
  const std::vector<double> weights = numbers(field(j, "weights"), "ensemble weights");
  const std::vector<Vec> rows = read_rows(j, "ensemble");
  if (rows.size() != weights.size()) throw ValidationError("ensemble: weights and members differ in number");
  std::vector<PureState> states;
  Mat mix = Mat::Zero(total_dimension(dims), total_dimension(dims));
  for (size_t k = 0; k < rows.size(); ++k) {
    states.emplace_back(rows[k], dims);
    mix += weights[k] * rows[k] * rows[k].adjoint();
  }
  const double tr = mix.trace().real();
  if (!(tr > 0.0)) throw ValidationError("ensemble: zero mixture");
  return Ensemble(weights, std::move(states), DensityMatrix(mix / tr, dims));
}

Json to_json(const RankOnePovm& povm) {
  Json j;
  j["dim"] = povm.dim();
  Json re = Json::array(), im = Json::array();
  for (const Vec& v : povm.vectors()) {
    re.push_back(vec_part(v, false));
    im.push_back(vec_part(v, true));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

RankOnePovm povm_from_json(const Json& j) {
  std::vector<Vec> rows = read_rows(j, "povm");
  if (rows.empty()) throw ValidationError("povm: no elements");
  if (j.contains("dim") && j.at("dim") != rows.front().size()) throw ValidationError("povm: dim mismatch");
  return RankOnePovm(std::move(rows));
}

Json to_json(const OptResult& opt) {
  Json j;
  j["value"] = opt.value;
  j["seed"] = opt.seed;
  j["restarts"] = opt.restarts_used;
  j["best_restart"] = opt.best_restart;
  j["iterations"] = opt.iterations;
  j["total_iterations"] = opt.total_iterations;
  j["spread"] = finite_or_null(opt.spread());
  j["per_restart_values"] = opt.per_restart_values;
  if (!opt.trajectories.empty()) j["trajectories"] = opt.trajectories;
  return j;
}

Json to_json(const MeasureReport& report) {
  Json j;
  j["measure"] = std::string(cli_name(report.measure));
  j["q"] = report.q.q();
  j["value"] = report.value;
  j["bound_side"] = std::string(to_string(report.bound_side));
  j["m_outcomes"] = report.m_outcomes;
  if (const auto* ens = std::get_if<Ensemble>(&report.certificate)) {
    j["certificate"] = {{"kind", "ensemble"}, {"ensemble", to_json(*ens)}};
  } else if (const auto* povm = std::get_if<RankOnePovm>(&report.certificate)) {
    j["certificate"] = {{"kind", "povm"}, {"povm", to_json(*povm)}};
  } else {
    j["certificate"] = {{"kind", "closed_form"}};
  }
  j["opt"] = report.opt ? to_json(*report.opt) : Json(nullptr);
  return j;
}

MeasureReport measure_report_from_json(const Json& j) {
  try {
    MeasureReport rep;
    rep.measure = parse_measure(field(j, "measure").get<std::string>());
    rep.q = QParam(field(j, "q").get<double>());
    rep.value = field(j, "value").get<double>();
    const std::string side = field(j, "bound_side").get<std::string>();
    if (side == "UPPER") rep.bound_side = BoundSide::Upper;
    else if (side == "LOWER") rep.bound_side = BoundSide::Lower;
    else if (side == "EXACT") rep.bound_side = BoundSide::Exact;
    else throw ValidationError("unknown bound side '" + side + "'");
    rep.m_outcomes = j.value("m_outcomes", 0);
    const Json& cert = field(j, "certificate");
    const std::string kind = field(cert, "kind").get<std::string>();
    if (kind == "ensemble") rep.certificate = ensemble_from_json(field(cert, "ensemble"));
    else if (kind == "povm") rep.certificate = povm_from_json(field(cert, "povm"));
    else if (kind != "closed_form") throw ValidationError("unknown certificate kind '" + kind + "'");
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("measure report: ") + e.what());
  }
}

Json to_json(const TheoremReport& report) {
  Json j;
  j["theorem"] = std::string(to_string(report.theorem));
  j["state_id"] = report.state_id;
  j["q"] = report.q;
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["residual"] = report.residual;
  j["converged"] = report.converged;
  j["violation_candidate"] = report.violation_candidate;
  j["spread"] = finite_or_null(report.spread);
  Json extras = Json::object();
  for (const auto& [k, v] : report.extras) extras[k] = finite_or_null(v);
  j["extras"] = std::move(extras);
  Json verdicts = Json::array();
  for (const Verdict& v : report.verdicts) {
    verdicts.push_back({{"inequality", std::string(to_string(v.inequality))}, {"slack", v.slack},
                        {"satisfied", v.satisfied}});
  }
  j["verdicts"] = std::move(verdicts);
  Json certs = Json::array();
  for (const auto& [label, m] : report.certificates) {
    Json c = to_json(m);
    c["label"] = label;
    certs.push_back(std::move(c));
  }
  j["certificates"] = std::move(certs);
  return j;
}

Json to_json(const std::vector<TheoremReport>& reports) {
  Json j = Json::array();
  for (const TheoremReport& r : reports) j.push_back(to_json(r));
  return j;
}

Json to_json(const ScanSummary& s) {
  Json j;
  j["states"] = s.states;
  j["q_grid"] = s.q_grid;
  j["reports"] = s.reports;
  j["max_abs_residual"] = s.max_abs_residual;
  j["within_tolerance"] = s.within_tolerance;
  j["unconverged"] = s.unconverged;
  j["max_cond_cancel_residual"] = s.max_cond_cancel_residual;
  Json tally = Json::object();
  for (const auto& [q, byname] : s.verdict_tally) {
    Json inner = Json::object();
    for (const auto& [name, counts] : byname) inner[name] = {{"satisfied", counts.first}, {"total", counts.second}};
    tally[q] = std::move(inner);
  }
  j["verdicts"] = std::move(tally);
  Json flags = Json::array();
  for (const TheoremReport& r : s.violation_candidates) {
    flags.push_back({{"state_id", r.state_id}, {"theorem", std::string(to_string(r.theorem))}, {"q", r.q},
                     {"residual", r.residual}, {"spread", finite_or_null(r.spread)}});
  }
  j["violation_candidates"] = std::move(flags);
  Json errors = Json::array();
  for (const ScanError& e : s.errors) {
    errors.push_back({{"state_id", e.state_id}, {"q", e.q}, {"theorem", e.theorem}, {"message", e.message}});
  }
  j["errors"] = std::move(errors);
  return j;
}

Json corpus_to_json(const std::vector<CorpusEntry>& corpus) {
  Json j = Json::array();
  for (const CorpusEntry& e : corpus) {
    Json s;
    s["id"] = e.id;
    const Json state = to_json(e.state);
    for (const auto& [k, v] : state.items()) s[k] = v;
    j.push_back(std::move(s));
  }
  return j;
}

std::vector<CorpusEntry> corpus_from_json(const Json& j) {
  // A single state object is accepted as a one-element corpus.
  if (j.is_object()) return {{j.value("id", std::string("state-0")), pure_state_from_json(j)}};
  if (!j.is_array() || j.empty()) throw ValidationError("corpus: expected a nonempty array of states");
  std::vector<CorpusEntry> out;
  for (size_t k = 0; k < j.size(); ++k) {
    std::string id = j[k].is_object() && j[k].contains("id") && j[k]["id"].is_string()
                         ? j[k]["id"].get<std::string>()
                         : "state-" + std::to_string(k);
    out.push_back({std::move(id), pure_state_from_json(j[k])});
  }
  return out;
}

std::string theorem_csv(const std::vector<TheoremReport>& reports) {
  std::ostringstream out;
  out << "state_id,theorem,q,lhs,rhs,residual,converged\n";
  for (const TheoremReport& r : reports) {
    out << r.state_id << ',' << to_string(r.theorem) << ',' << fmt(r.q) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs)
        << ',' << fmt(r.residual) << ',' << (r.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string measure_csv(const MeasureReport& r) {
  std::ostringstream out;
  out << "measure,q,value,bound_side,m_outcomes,spread\n";
  out << cli_name(r.measure) << ',' << fmt(r.q.q()) << ',' << fmt(r.value) << ',' << to_string(r.bound_side) << ','
      << r.m_outcomes << ',' << fmt(r.spread()) << '\n';
  return out.str();
}

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace qtrade

#include "dfslab/serialization.hpp"

#include <fstream>
#include <sstream>

#include "dfslab/error.hpp"

namespace dfslab {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) config_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return get_as<T>(j, key);
}

Operator operator_from_json(const Json& j, const char* what) {
  try {
    return Operator(matrix_from_json(j));
  } catch (const Error& e) {
    config_error(std::string(what) + ": " + e.what());
  }
}

Json ops_to_json(const std::vector<Operator>& ops) {
  Json arr = Json::array();
  for (const auto& o : ops) arr.push_back(to_json(o.matrix()));
  return arr;
}

std::vector<Operator> ops_from_json(const Json& j, const char* what) {
  if (!j.is_array()) config_error(std::string(what) + " must be an array");
  std::vector<Operator> out;
  for (const auto& x : j) out.push_back(operator_from_json(x, what));
  return out;
}

Json terms_to_json(const std::vector<CouplingTerm>& terms) {
  Json arr = Json::array();
  for (const auto& t : terms) arr.push_back({{"system", to_json(t.system.matrix())}, {"bath", to_json(t.bath.matrix())}});
  return arr;
}

std::vector<CouplingTerm> terms_from_json(const Json& j, const char* what) {
  if (!j.is_array()) config_error(std::string(what) + " must be an array");
  std::vector<CouplingTerm> out;
  for (const auto& x : j) out.push_back({operator_from_json(field(x, "system"), what), operator_from_json(field(x, "bath"), what)});
  return out;
}

LoadedModel builtin(const std::string& name, const Json& p) {
  LoadedModel out;
  out.name = name;
  if (name == "phase_damping") {
    out.propagator = phase_damping_propagator(get_or<double>(p, "lambda", 1.0));
  } else if (name == "collective_dephasing") {
    out.system_bath = collective_dephasing_model(get_or<int>(p, "n_qubits", 2), get_or<int>(p, "bath_dim", 2),
                                                 get_or<double>(p, "coupling", 1.0),
                                                 get_or<std::uint64_t>(p, "seed", 20240521));
  } else if (name == "perturbed_dfs") {
    out.system_bath = perturbed_dfs_model(get_or<double>(p, "coupling", 1.0),
                                          exchange_hamiltonian(get_or<double>(p, "omega", 0.0)),
                                          get_or<std::uint64_t>(p, "seed", 20240521));
  } else if (name == "perturbed_dfs_sme") {
    out.lindblad = perturbed_dfs_sme(get_or<double>(p, "gamma", 1.0), exchange_hamiltonian(get_or<double>(p, "omega", 0.0)),
                                     get_or<double>(p, "lamb", 0.5) * kron(pauli_x(), pauli_x()));
  } else {
    config_error("unknown builtin model '" + name + "'");
  }
  return out;
}

}  // namespace

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) config_error("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) config_error("matrix rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) config_error("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        config_error("matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

Json envelope(const std::string& kind, Json body) {
  if (!body.is_object()) body = Json{{"data", std::move(body)}};
  body["schema_version"] = kSchemaVersion;
  body["kind"] = kind;
  return body;
}

Json to_json(const SystemBathModel& m) {
  return envelope("system_bath", {{"dim_s", m.dim_s},
                                  {"dim_b", m.dim_b},
                                  {"h_s", to_json(m.h_s.matrix())},
                                  {"h_b", to_json(m.h_b.matrix())},
                                  {"couplings", terms_to_json(m.couplings)},
                                  {"perturbations", terms_to_json(m.perturbations)},
                                  {"rho_b", to_json(m.rho_b.matrix())}});
}

Json to_json(const LindbladModel& m) {
  Json j{{"dim", m.dim}, {"h_eff", to_json(m.h_eff.matrix())}, {"f_ops", ops_to_json(m.f_ops)}, {"a", to_json(m.a)}};
  if (m.perturbation) {
    const auto& p = *m.perturbation;
    j["perturbation"] = {{"g_ops", ops_to_json(p.g_ops)},
                         {"g", p.g.size() ? to_json(p.g) : Json::array()},
                         {"eps", p.eps},
                         {"h_lamb_pert", to_json(p.h_lamb_pert.matrix())},
                         {"c", p.c.size() ? to_json(p.c) : Json::array()}};
  }
  return envelope("lindblad", std::move(j));
}

SystemBathModel system_bath_model_from_json(const Json& j) {
  const int ds = get_as<int>(j, "dim_s");
  const int db = get_as<int>(j, "dim_b");
  try {
    SystemBathModel m{ds,
                      db,
                      operator_from_json(field(j, "h_s"), "h_s"),
                      operator_from_json(field(j, "h_b"), "h_b"),
                      j.contains("couplings") ? terms_from_json(j.at("couplings"), "couplings") : std::vector<CouplingTerm>{},
                      j.contains("perturbations") ? terms_from_json(j.at("perturbations"), "perturbations")
                                                  : std::vector<CouplingTerm>{},
                      DensityMatrix(operator_from_json(field(j, "rho_b"), "rho_b"))};
    m.validate();
    return m;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    config_error(std::string("invalid system_bath model: ") + e.what());
  }
}

LindbladModel lindblad_model_from_json(const Json& j) {
  const int d = get_as<int>(j, "dim");
  try {
    std::vector<Operator> f = j.contains("f_ops") ? ops_from_json(j.at("f_ops"), "f_ops") : std::vector<Operator>{};
    Matrix a = f.empty() ? Matrix(0, 0) : matrix_from_json(field(j, "a"));
    LindbladModel m{d, operator_from_json(field(j, "h_eff"), "h_eff"), std::move(f), std::move(a), std::nullopt};
    if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
      const Json& p = j.at("perturbation");
      std::vector<Operator> g_ops = ops_from_json(field(p, "g_ops"), "g_ops");
      const auto np = static_cast<Eigen::Index>(g_ops.size());
      const auto nf = static_cast<Eigen::Index>(m.f_ops.size());
      Matrix g = (np == 0 || nf == 0) ? Matrix(np, nf) : matrix_from_json(field(p, "g"));
      Matrix c = Matrix::Zero(np, np);
      if (p.contains("c") && !p.at("c").empty()) c = matrix_from_json(p.at("c"));
      Operator lamb = p.contains("h_lamb_pert") ? operator_from_json(p.at("h_lamb_pert"), "h_lamb_pert")
                                                : Operator::zero(d);
      m.perturbation = LindbladPerturbation{std::move(g_ops), std::move(g), get_or<double>(p, "eps", 0.0),
                                            std::move(lamb), std::move(c)};
    }
    m.validate();
    return m;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    config_error(std::string("invalid lindblad model: ") + e.what());
  }
}

LoadedModel load_model(const Json& j) {
  if (!j.is_object()) config_error("model document must be a JSON object");
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    config_error("unsupported schema_version " + j.at("schema_version").dump());
  }
  const std::string kind = j.contains("kind") ? get_as<std::string>(j, "kind") : "";
  if (kind == "system_bath") return {"system_bath", system_bath_model_from_json(j), std::nullopt, std::nullopt};
  if (kind == "lindblad") return {"lindblad", std::nullopt, lindblad_model_from_json(j), std::nullopt};
  if (kind == "builtin") {
    return builtin(get_as<std::string>(j, "name"), j.contains("params") ? j.at("params") : Json::object());
  }
  if (kind.empty() && j.size() == 1) {
    const auto it = j.begin();
    return builtin(it.key(), it.value());
  }
  config_error("unknown model kind '" + kind + "'");
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open model file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    config_error("malformed JSON in '" + path + "': " + e.what());
  }
  return load_model(j);
}

Json to_json(const KrausSet& k) {
  return envelope("kraus", {{"dim_s", k.dim_s},
                            {"time", k.time},
                            {"operators", ops_to_json(k.operators)},
                            {"normalization_defect", k.normalization_defect()}});
}

Json to_json(const ChiProcess& c) {
  return envelope("chi", {{"dim_s", c.basis.dim()},
                          {"time", c.time},
                          {"basis", ops_to_json(c.basis.elements())},
                          {"chi", to_json(c.chi)},
                          {"s", to_json(compute_s_operator(c).matrix())},
                          {"normalization_defect", c.normalization_defect()},
                          {"hermiticity_defect", c.hermiticity_defect()},
                          {"min_eigenvalue", c.min_eigenvalue()}});
}

Json to_json(const DfSubspace& s) {
  Json vecs = Json::array();
  for (const auto& v : s.basis_vectors) {
    Json row = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(to_json(v(i)));
    vecs.push_back(std::move(row));
  }
  Json cs = Json::array();
  for (auto c : s.eigenvalues) cs.push_back(to_json(c));
  return {{"dim", s.dim}, {"size", s.size()}, {"basis_vectors", vecs}, {"eigenvalues", cs}, {"trivial", s.is_trivial()}};
}

Json to_json(const DfsSearchResult& r) {
  Json subs = Json::array();
  for (const auto& s : r.subspaces) subs.push_back(to_json(s));
  return envelope("dfs", {{"subspaces", subs}, {"diagnostics", r.diagnostics}});
}

Json to_json(const DfCertificate& c) {
  Json cs = Json::array();
  for (auto x : c.fitted_eigenvalues) cs.push_back(to_json(x));
  return envelope("df_certificate", {{"residuals", c.residuals}, {"fitted_eigenvalues", cs}, {"pass", c.pass}});
}

Json to_json(const RateReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) terms.push_back({{"n", t.n}, {"value", t.value}, {"root", t.root}});
  return envelope("rates", {{"picture", std::string(to_string(r.picture))},
                            {"fidelity", std::string(to_string(r.kind))},
                            {"eps", r.eps},
                            {"method", r.method},
                            {"terms", terms}});
}

Json to_json(const ScalingFit& f) {
  return envelope("scaling_fit", {{"axis", std::string(to_string(f.axis))},
                                  {"grid", f.grid},
                                  {"deficits", f.deficits},
                                  {"excluded", f.excluded},
                                  {"slope", f.slope},
                                  {"intercept", f.intercept},
                                  {"r_squared", f.r_squared},
                                  {"certified", f.certified},
                                  {"refined", f.refined},
                                  {"skipped", f.skipped},
                                  {"diagnostic", f.diagnostic}});
}

Json to_json(const Table1Report& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"row", c.row},
                     {"picture", std::string(to_string(c.picture))},
                     {"claim", c.claim},
                     {"measured", c.measured},
                     {"status", std::string(to_string(c.status))},
                     {"note", c.note}});
  }
  return envelope("table1", {{"cells", cells}, {"all_pass", r.all_pass()}});
}

std::string to_csv(const ScalingFit& f) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(f.axis) << ",fidelity,deficit\n";
  for (std::size_t i = 0; i < f.grid.size(); ++i) os << f.grid[i] << "," << 1.0 - f.deficits[i] << "," << f.deficits[i] << "\n";
  return os.str();
}

std::string to_csv(const Table1Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "row,picture,claim,measured,status\n";
  for (const auto& c : r.cells) {
    os << c.row << "," << to_string(c.picture) << "," << c.claim << "," << c.measured << "," << to_string(c.status) << "\n";
  }
  return os.str();
}

}  // namespace dfslab

#include "dfslab/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dfslab/dfs.hpp"
#include "dfslab/error.hpp"
#include "dfslab/fidelity.hpp"
#include "dfslab/fixed_basis_osr.hpp"
#include "dfslab/serialization.hpp"
#include "dfslab/table1.hpp"

namespace dfslab {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    config_error("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) config_error("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

LoadedModel resolve_model(const ExperimentConfig& c) {
  if (c.model_file) return load_model_file(*c.model_file);
  Json params;
  if (c.model == "phase_damping") {
    params = {{"lambda", c.lambda}};
  } else if (c.model == "collective_dephasing") {
    params = {{"n_qubits", c.qubits}, {"bath_dim", c.bath_dim}, {"coupling", c.coupling}, {"seed", c.seed}};
  } else if (c.model == "perturbed_dfs") {
    params = {{"coupling", c.coupling}, {"omega", c.omega}, {"seed", c.seed}};
  } else if (c.model == "perturbed_dfs_sme") {
    params = {{"gamma", c.coupling}, {"omega", c.omega}};
  } else {
    config_error("unknown builtin model '" + c.model + "'");
  }
  try {
    return load_model({{"kind", "builtin"}, {"name", c.model}, {"params", params}});
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    config_error(e.what());
  }
}

int system_dim(const LoadedModel& m) {
  if (m.system_bath) return m.system_bath->dim_s;
  if (m.lindblad) return m.lindblad->dim;
  return m.propagator->dim_s;
}

DensityMatrix resolve_state(const ExperimentConfig& c, const LoadedModel& m) {
  const int d = system_dim(m);
  auto basis_state = [d](int i) {
    Vector v = Vector::Zero(d);
    v(i) = 1.0;
    return DensityMatrix::pure(v);
  };
  std::string s = c.state;
  if (s == "auto") {
    if (d == 4 && c.fidelity == "dynamical") {
      s = "01";
    } else if (d == 4 && m.name != "system_bath" && m.name != "lindblad") {
      s = "dfs";
    } else {
      s = "plus";
    }
  }
  if (s == "plus") return DensityMatrix::pure(Vector::Ones(d) / std::sqrt(static_cast<double>(d)));
  if (s == "zero") return basis_state(0);
  if (s == "mixed") return DensityMatrix::maximally_mixed(d);
  if (s == "dfs" || s == "01") {
    if (d != 4) config_error("state '" + s + "' needs a two-qubit system");
    return s == "dfs" ? dfs_bell_state() : basis_state(1);
  }
  config_error("unknown state '" + s + "' (plus|zero|mixed|dfs|01|auto)");
}

const SystemBathModel& need_system_bath(const LoadedModel& m, const char* what) {
  if (!m.system_bath) config_error(std::string(what) + " needs a system_bath model");
  return *m.system_bath;
}

LindbladModel sme_model(const LoadedModel& m, double tau) {
  if (m.lindblad) return *m.lindblad;
  if (m.system_bath) return coarse_grain_to_sme(*m.system_bath, tau);
  config_error("the sme picture needs a finite Hamiltonian model or a lindblad model");
}

GeneratorMode resolve_mode(const std::string& mode, GeneratorMode fallback) {
  if (mode == "auto") return fallback;
  if (mode == "truncated") return GeneratorMode::kTruncated;
  if (mode == "exact") return GeneratorMode::kExact;
  config_error("unknown generator mode '" + mode + "'");
}

Json model_json(const LoadedModel& m, const ExperimentConfig& c) {
  if (m.system_bath) return to_json(*m.system_bath);
  if (m.lindblad) return to_json(*m.lindblad);
  return envelope("builtin", {{"name", m.name}, {"params", {{"lambda", c.lambda}}}});
}

struct Output {
  Json json;
  std::optional<std::string> csv;
  int code = kExitOk;
};

Output cmd_simulate(const ExperimentConfig& c, const LoadedModel& m) {
  const DensityMatrix rho0 = resolve_state(c, m);
  const double eps = c.eps_grid.front();
  const bool sme = c.picture == "sme";
  std::optional<LindbladModel> lm;
  if (sme) lm = sme_model(m, c.tau);
  Json points = Json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "t,fidelity,deficit\n";
  for (double t : c.t_grid) {
    DensityMatrix rho = sme ? integrate_sme(*lm, rho0, t, eps, resolve_mode(c.mode, GeneratorMode::kExact))
                      : m.propagator ? evolve_reduced(*m.propagator, rho0, t)
                                     : evolve_reduced(need_system_bath(m, "simulate"), rho0, t, eps);
    const double f = memory_fidelity(rho0, rho);
    points.push_back({{"t", t}, {"memory_fidelity", f}, {"rho", to_json(rho.matrix())}});
    csv << t << "," << f << "," << 1.0 - f << "\n";
  }
  return {envelope("simulation", {{"picture", c.picture}, {"eps", eps}, {"rho0", to_json(rho0.matrix())}, {"points", points}}),
          csv.str()};
}

Output cmd_kraus(const ExperimentConfig& c, const LoadedModel& m) {
  const double t = c.t_grid.front();
  if (m.propagator) return {to_json(canonicalize_phases(extract_kraus(*m.propagator, t))), std::nullopt};
  return {to_json(extract_kraus(need_system_bath(m, "kraus"), t, c.eps_grid.front())), std::nullopt};
}

Output cmd_chi(const ExperimentConfig& c, const LoadedModel& m) {
  const double t = c.t_grid.front();
  if (m.propagator) return {to_json(chi_at(*m.propagator, t, su_basis(m.propagator->dim_s))), std::nullopt};
  const auto& sb = need_system_bath(m, "chi");
  return {to_json(chi_at(sb, t, c.eps_grid.front(), su_basis(sb.dim_s))), std::nullopt};
}

Output cmd_coarse_grain(const ExperimentConfig& c, const LoadedModel& m) {
  const auto& sb = need_system_bath(m, "coarse-grain");
  Json j = to_json(coarse_grain_to_sme(sb, c.tau, su_basis(sb.dim_s), c.eps_grid.front()));
  j["tau"] = c.tau;
  return {j, std::nullopt};
}

Output cmd_dfs_find(const ExperimentConfig&, const LoadedModel& m) {
  std::vector<Operator> ops;
  if (m.system_bath) {
    for (const auto& t : m.system_bath->couplings) ops.push_back(t.system);
  } else if (m.lindblad) {
    ops = m.lindblad->f_ops;
  } else {
    config_error("dfs-find needs coupling operators (system_bath or lindblad model)");
  }
  if (ops.empty()) config_error("model has no coupling operators");
  // DFSLAB_TOL, when set, replaces the clustering and certification tolerance.
  const double tol = std::getenv("DFSLAB_TOL") ? numeric_tolerance_from_env() : kClusterTol;
  const DfsSearchResult r = find_df_subspaces(ops, tol);
  Json j = to_json(r);
  j["tolerance"] = tol;
  Json certs = Json::array();
  int code = kExitOk;
  for (const auto& s : r.subspaces) {
    const DfCertificate cert = check_df_condition(s, ops, tol);
    if (!cert.pass) code = kExitCheckFailed;
    certs.push_back(to_json(cert));
  }
  j["certificates"] = certs;
  return {j, std::nullopt, code};
}

Output cmd_rates(const ExperimentConfig& c, const LoadedModel& m) {
  const double eps = c.eps_grid.front();
  const bool dynamical = c.fidelity == "dynamical";
  if (c.fidelity != "memory" && !dynamical) config_error("unknown fidelity '" + c.fidelity + "'");
  if (m.propagator) {
    if (c.picture != "osr" || dynamical) config_error("explicit propagators support only osr memory rates");
    const PureStateMinimum best = minimize_first_order_rate(*m.propagator);
    Json terms = Json::array({{{"n", 1}, {"value", best.rate}, {"root", best.rate}}});
    return {envelope("rates", {{"picture", "osr"},
                               {"fidelity", "memory"},
                               {"method", "finite-difference, minimized over pure states"},
                               {"first_order", best.rate},
                               {"theta", best.theta},
                               {"phi", best.phi},
                               {"terms", terms}}),
            std::nullopt};
  }
  const DensityMatrix rho0 = resolve_state(c, m);
  RateReport r;
  if (c.picture == "osr") {
    const auto& sb = need_system_bath(m, "osr rates");
    r = dynamical ? dynamical_rate_terms(sb, rho0, c.n_max, eps, DerivativeMethod::kExact)
                  : osr_rate_terms(sb, rho0, c.n_max, eps);
  } else if (c.picture == "sme") {
    const LindbladModel lm = sme_model(m, c.tau);
    const GeneratorMode mode = resolve_mode(c.mode, GeneratorMode::kTruncated);
    r = dynamical ? dynamical_rate_terms(lm, rho0, c.n_max, eps, mode, DerivativeMethod::kExact)
                  : sme_rate_terms(lm, rho0, c.n_max, eps, mode);
  } else {
    config_error("unknown picture '" + c.picture + "'");
  }
  Json j = to_json(r);
  j["first_order"] = r.term(1);
  return {j, std::nullopt};
}

Output cmd_stability_scan(const ExperimentConfig& c, const LoadedModel& m) {
  const DensityMatrix rho0 = resolve_state(c, m);
  const FidelityKind kind = c.fidelity == "dynamical" ? FidelityKind::kDynamical : FidelityKind::kMemory;
  const GeneratorMode mode = resolve_mode(c.mode, GeneratorMode::kExact);
  ScalingFit fit;
  if (c.axis == "eps") {
    if (kind != FidelityKind::kMemory) config_error("eps scans measure memory fidelity");
    const double t = c.t_grid.front();
    fit = c.picture == "sme" ? epsilon_sensitivity(sme_model(m, c.tau), rho0, t, c.eps_grid, mode)
                             : epsilon_sensitivity(need_system_bath(m, "stability-scan"), rho0, t, c.eps_grid);
  } else if (c.axis == "t") {
    const double eps = c.eps_grid.front();
    fit = c.picture == "sme" ? time_scaling(sme_model(m, c.tau), rho0, c.t_grid, eps, kind, mode)
                             : time_scaling(need_system_bath(m, "stability-scan"), rho0, c.t_grid, eps, kind);
  } else {
    config_error("unknown axis '" + c.axis + "' (eps|t)");
  }
  int code = kExitOk;
  if (!fit.skipped && !fit.certified) code = kExitCheckFailed;
  Json j = to_json(fit);
  if (c.expect_slope) {
    const bool ok = !fit.skipped && std::abs(fit.slope - *c.expect_slope) <= 0.1;
    j["expected_slope"] = *c.expect_slope;
    j["slope_check"] = ok;
    if (!ok) code = kExitCheckFailed;
  }
  return {j, to_csv(fit), code};
}

Output cmd_table1(const ExperimentConfig& c) {
  const Table1Report r = table1_report(default_table1_suite(c.seed));
  return {to_json(r), to_csv(r), r.all_pass() ? kExitOk : kExitCheckFailed};
}

void emit(const ExperimentConfig& c, const std::string& text, std::ostream& out) {
  if (!c.out) {
    out << text;
    return;
  }
  std::ofstream f(*c.out, std::ios::binary);
  if (!f) config_error("cannot write '" + *c.out + "'");
  f << text;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) config_error("empty grid");
  std::vector<double> out;
  if (text.rfind("log:", 0) == 0) {
    const auto parts = split(text.substr(4), ':');
    if (parts.size() != 3) config_error("log grid must be log:start:stop:count");
    const double a = parse_number(parts[0]);
    const double b = parse_number(parts[1]);
    const double n = parse_number(parts[2]);
    if (!(a > 0.0) || !(b > 0.0) || n < 2 || n != std::floor(n)) config_error("bad log grid '" + text + "'");
    const int count = static_cast<int>(n);
    for (int i = 0; i < count; ++i) out.push_back(a * std::pow(b / a, static_cast<double>(i) / (count - 1)));
    return out;
  }
  for (const auto& p : split(text, ',')) out.push_back(parse_number(p));
  return out;
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.format != "json" && c.format != "csv") config_error("unknown format '" + c.format + "'");
    if (c.picture != "osr" && c.picture != "sme") config_error("unknown picture '" + c.picture + "'");
    Output o;
    if (c.command == "table1") {
      o = cmd_table1(c);
    } else {
      const LoadedModel m = resolve_model(c);
      if (c.export_model) {
        std::ofstream f(*c.export_model, std::ios::binary);
        if (!f) config_error("cannot write '" + *c.export_model + "'");
        f << model_json(m, c).dump(2) << "\n";
      }
      if (c.command == "simulate") {
        o = cmd_simulate(c, m);
      } else if (c.command == "kraus") {
        o = cmd_kraus(c, m);
      } else if (c.command == "chi") {
        o = cmd_chi(c, m);
      } else if (c.command == "coarse-grain") {
        o = cmd_coarse_grain(c, m);
      } else if (c.command == "dfs-find") {
        o = cmd_dfs_find(c, m);
      } else if (c.command == "rates") {
        o = cmd_rates(c, m);
      } else if (c.command == "stability-scan") {
        o = cmd_stability_scan(c, m);
      } else {
        config_error("unknown command '" + c.command + "'");
      }
    }
    if (c.format == "csv") {
      if (!o.csv) config_error("csv output is not available for '" + c.command + "'");
      emit(c, *o.csv, out);
    } else {
      emit(c, o.json.dump(2) + "\n", out);
    }
    if (o.code == kExitCheckFailed) err << "check failed (see report)\n";
    return o.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-system dynamics and decoherence-free subspace laboratory", "dfslab"};
  app.require_subcommand(1);
  ExperimentConfig c;
  std::string t_grid, eps_grid;
  std::optional<double> expect;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "Evolve a state and report memory fidelity over --t-grid"},
      {"kraus", "Kraus operators at the first --t-grid time"},
      {"chi", "Process matrix and S operator at the first --t-grid time"},
      {"coarse-grain", "Semigroup generator from window averages over --tau"},
      {"dfs-find", "Decoherence-free subspaces of the coupling operators"},
      {"rates", "Short-time rate terms (--picture, --fidelity)"},
      {"stability-scan", "Log-log deficit scaling along --axis"},
      {"table1", "Reproduce the decoherence-rate table"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
  }
  app.add_option("--model", c.model, "Builtin model: phase_damping | collective_dephasing | perturbed_dfs | perturbed_dfs_sme");
  app.add_option("--model-file", c.model_file, "Model JSON document")->check(CLI::ExistingFile);
  app.add_option("--lambda", c.lambda, "Phase damping rate");
  app.add_option("--qubits", c.qubits, "Qubit count for collective dephasing");
  app.add_option("--bath-dim", c.bath_dim, "Bath dimension for collective dephasing");
  app.add_option("--coupling", c.coupling, "Coupling strength (gamma for perturbed_dfs_sme)");
  app.add_option("--omega", c.omega, "Exchange frequency of the DFS-compatible H_S");
  app.add_option("--state", c.state, "Initial state: auto | plus | zero | mixed | dfs | 01");
  app.add_option("--t-grid", t_grid, "Times: comma list or log:start:stop:count");
  app.add_option("--eps-grid", eps_grid, "Perturbation strengths: comma list or log:start:stop:count");
  app.add_option("--tau", c.tau, "Coarse-graining window");
  app.add_option("--picture", c.picture, "osr | sme");
  app.add_option("--fidelity", c.fidelity, "memory | dynamical");
  app.add_option("--axis", c.axis, "Scan axis for stability-scan: eps | t");
  app.add_option("--mode", c.mode, "SME generator: auto | truncated | exact");
  app.add_option("--n-max", c.n_max, "Highest rate order");
  app.add_option("--seed", c.seed, "Seed for randomized models");
  app.add_option("--expect-slope", expect, "Fail (exit 1) unless the fitted slope is within 0.1");
  app.add_option("--out", c.out, "Write the report here instead of stdout");
  app.add_option("--export-model", c.export_model, "Also write the resolved model as JSON");
  app.add_option("--format", c.format, "json | csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitConfig;
  }
  c.command = app.get_subcommands().front()->get_name();
  c.expect_slope = expect;
  try {
    if (!t_grid.empty()) c.t_grid = parse_grid(t_grid);
    if (!eps_grid.empty()) c.eps_grid = parse_grid(eps_grid);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run(c, out, err);
}

}  // namespace dfslab

// Command-line front end: offline design, invariant-set construction,
// closed-loop simulation, trace verification and filter-gain sweeps.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "iampc/simulator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace iampc;

namespace {

VertexModel load_model_arg(const std::string& arg) {
  if (arg == "example") return example_model();
  std::ifstream is(arg);
  if (!is) throw CLI::ValidationError("--model", "cannot open " + arg);
  return load_model(is);
}

// A cost weight is either a scalar (multiple of the identity) or a full
// row-major matrix given as nested arrays.
Matrix weight_from_json(const json& j, int dim, const std::string& name) {
  if (j.is_number()) return j.get<double>() * Matrix::Identity(dim, dim);
  if (!j.is_array()) throw std::runtime_error(name + ": expected number or matrix");
  Matrix M(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) M(r, c) = j.at(r).at(c).get<double>();
  return M;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig cfg;
  cfg.model = load_model_arg(j.at("model").get<std::string>());
  const int n = cfg.model.n_states(), m = cfg.model.n_inputs();
  cfg.Q = j.contains("Q") ? weight_from_json(j["Q"], n, "Q")
                          : Matrix::Identity(n, n);
  cfg.R = j.contains("R") ? weight_from_json(j["R"], m, "R")
                          : Matrix::Identity(m, m);
  cfg.eps_margin = j.value("eps_margin", -1.0);
  cfg.horizon_override = j.value("horizon_override", 0);
  cfg.T = j.value("T", 100);
  cfg.rng_seed = j.value("rng_seed", 0u);

  if (j.contains("estimator")) {
    const json& e = j["estimator"];
    cfg.estimator.oracle = e.value("oracle", false);
    cfg.estimator.config.N_m = e.value("N_m", 3);
    cfg.estimator.config.filter_gain = e.value("filter_gain", 0.5);
    cfg.estimator.config.lambda_reg = e.value("lambda_reg", 1e-8);
  }
  if (j.contains("xi_policy")) {
    const json& p = j["xi_policy"];
    const std::string kind = p.value("kind", "random");
    if (kind == "fixed") {
      cfg.xi_policy.kind = XiPolicy::Kind::fixed;
      cfg.xi_policy.fixed_value = vector_from_json(p.at("value"));
    } else if (kind == "random") {
      cfg.xi_policy.kind = XiPolicy::Kind::random_seeded;
      cfg.xi_policy.n_draws = p.value("n_draws", 4);
    } else if (kind == "piecewise") {
      cfg.xi_policy.kind = XiPolicy::Kind::piecewise;
      for (const json& entry : p.at("schedule"))
        cfg.xi_policy.schedule.emplace_back(entry.at(0).get<int>(),
                                            vector_from_json(entry.at(1)));
    } else {
      throw std::runtime_error("xi_policy.kind: unknown value " + kind);
    }
  }
  if (j.contains("init_policy")) {
    const json& p = j["init_policy"];
    const std::string kind = p.value("kind", "support");
    if (kind == "explicit") {
      cfg.init_policy.kind = InitPolicy::Kind::explicit_list;
      for (const json& s : p.at("states"))
        cfg.init_policy.states.push_back(vector_from_json(s));
    } else if (kind == "support") {
      cfg.init_policy.kind = InitPolicy::Kind::support_points;
      cfg.init_policy.n_directions = p.value("n_directions", 100);
    } else if (kind == "center") {
      cfg.init_policy.kind = InitPolicy::Kind::chebyshev_center;
    } else {
      throw std::runtime_error("init_policy.kind: unknown value " + kind);
    }
  }
  cfg.validate();
  return cfg;
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  return json::parse(is);
}

int cmd_design(const std::string& model_arg, const std::string& q_json,
               const std::string& r_json, double eps, const std::string& out) {
  VertexModel model = load_model_arg(model_arg);
  Matrix Q = weight_from_json(json::parse(q_json), model.n_states(), "Q");
  Matrix R = weight_from_json(json::parse(r_json), model.n_inputs(), "R");
  DesignResult d = solve_design(model, Q, R, eps);
  save_design_file(out, d);
  std::cout << "design: " << d.n_vertices() << " vertices, margin "
            << reevaluate_lmi_margin(d, model) << ", written to " << out << "\n";
  return 0;
}

int cmd_sets(const std::string& model_arg, const std::string& design_path,
             const std::string& out_dir) {
  VertexModel model = load_model_arg(model_arg);
  DesignResult d = load_design_file(design_path);
  SetSuite suite = build_set_suite(model, d);
  fs::create_directories(out_dir);
  save_set_suite(out_dir, suite);
  std::cout << "sets: horizon N = " << suite.N << ", terminal set "
            << suite.X_N.rows() << " rows, C " << suite.C.rows()
            << " rows, written to " << out_dir << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& design_path,
                 const std::string& sets_dir, const std::string& out_dir) {
  ScenarioConfig cfg = config_from_json(read_json_file(config_path));
  DesignResult d = load_design_file(design_path);
  SetSuite suite = load_set_suite(sets_dir);
  std::vector<Trace> traces = run_scenario(cfg, d, suite);
  fs::create_directories(out_dir);
  std::ofstream manifest(fs::path(out_dir) / "manifest.txt");
  for (const Trace& tr : traces) {
    char name[32];
    std::snprintf(name, sizeof(name), "trace_%04d.csv", tr.run_index);
    std::ofstream os(fs::path(out_dir) / name);
    write_trace_csv(os, tr);
    manifest << name << "\n";
  }
  std::cout << "simulate: " << traces.size() << " traces of " << cfg.T
            << " steps written to " << out_dir << "\n";
  return 0;
}

int cmd_verify(const std::string& traces_dir, const std::string& model_arg,
               const std::string& design_path, const std::string& sets_dir,
               const std::string& report_path) {
  VertexModel model = load_model_arg(model_arg);
  DesignResult d = load_design_file(design_path);
  SetSuite suite = load_set_suite(sets_dir);
  std::ifstream manifest(fs::path(traces_dir) / "manifest.txt");
  if (!manifest) throw std::runtime_error("cannot open manifest in " + traces_dir);
  std::ofstream report;
  std::ostream* out = &std::cout;
  if (!report_path.empty()) {
    report.open(report_path);
    out = &report;
  }
  std::string name;
  int failures = 0, count = 0;
  while (std::getline(manifest, name)) {
    if (name.empty()) continue;
    std::ifstream is(fs::path(traces_dir) / name);
    Trace tr = read_trace_csv(is);
    VerificationReport rep = verify_trace(tr, model, d, suite);
    *out << "trace " << name << "\n";
    write_report(*out, rep);
    if (!rep.pass()) ++failures;
    ++count;
  }
  *out << "traces_checked " << count << "\n";
  *out << "traces_failed " << failures << "\n";
  std::cout << "verify: " << count - failures << "/" << count << " traces pass\n";
  return failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& design_path,
              const std::string& sets_dir, std::vector<double> gains,
              const std::string& out) {
  ScenarioConfig cfg = config_from_json(read_json_file(config_path));
  DesignResult d = load_design_file(design_path);
  SetSuite suite = load_set_suite(sets_dir);
  std::vector<SweepRow> rows = sweep_filter_gain(cfg, d, suite, gains);
  std::ofstream os(out);
  write_sweep_csv(os, rows);
  for (const SweepRow& r : rows)
    std::cout << "gain " << r.gain << ": peak value " << r.peak_value
              << ", settling step " << r.settling_step << "\n";
  std::cout << "sweep: table written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Adaptive model predictive control toolkit for polytopic uncertain "
      "linear systems"};
  app.require_subcommand(1);

  std::string model_arg = "example", design_path = "design.ia";
  std::string sets_dir = "sets", out, config_path, traces_dir, report_path;
  std::string q_json = "1.0", r_json = "1.0";
  double eps = -1.0;
  std::vector<double> gains;

  CLI::App* design = app.add_subcommand(
      "design", "Solve the offline gain/terminal-cost synthesis");
  design->add_option("--model", model_arg,
                     "model file, or 'example' for the built-in benchmark");
  design->add_option("--q", q_json, "state weight: scalar or JSON matrix");
  design->add_option("--r", r_json, "input weight: scalar or JSON matrix");
  design->add_option("--eps", eps, "feasibility margin (negative: default)");
  design->add_option("--out", design_path, "output design artifact");

  CLI::App* sets =
      app.add_subcommand("sets", "Compute the invariant sets and the horizon");
  sets->add_option("--model", model_arg);
  sets->add_option("--design", design_path, "design artifact from 'design'");
  sets->add_option("--out-dir", sets_dir, "output directory");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run closed-loop scenarios from a config");
  simulate->add_option("--config", config_path, "JSON scenario config")->required();
  simulate->add_option("--design", design_path);
  simulate->add_option("--sets", sets_dir);
  simulate->add_option("--out-dir", traces_dir, "trace output directory")
      ->required();

  CLI::App* verify =
      app.add_subcommand("verify", "Check recorded traces against the theory");
  verify->add_option("--traces", traces_dir, "directory with manifest.txt")
      ->required();
  verify->add_option("--model", model_arg);
  verify->add_option("--design", design_path);
  verify->add_option("--sets", sets_dir);
  verify->add_option("--report", report_path, "report file (default: stdout)");

  CLI::App* sweep =
      app.add_subcommand("sweep", "Compare estimator filter gains");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--design", design_path);
  sweep->add_option("--sets", sets_dir);
  sweep->add_option("--gains", gains, "filter gains in (0, 1]")->required();
  sweep->add_option("--out", out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed())
      return cmd_design(model_arg, q_json, r_json, eps, design_path);
    if (sets->parsed()) return cmd_sets(model_arg, design_path, sets_dir);
    if (simulate->parsed())
      return cmd_simulate(config_path, design_path, sets_dir, traces_dir);
    if (verify->parsed())
      return cmd_verify(traces_dir, model_arg, design_path, sets_dir,
                        report_path);
    if (sweep->parsed())
      return cmd_sweep(config_path, design_path, sets_dir, gains, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#include "foctl_app.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "folti/baseline.hpp"
#include "folti/complexity.hpp"
#include "folti/dataset_io.hpp"
#include "folti/error.hpp"
#include "folti/forge.hpp"
#include "folti/linalg.hpp"
#include "folti/lqr.hpp"
#include "folti/sysid.hpp"

namespace foctl {

using folti::ConfigError;
using folti::Mat;
using folti::Vec;
using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Flag values as typed on the command line; presence is read from the option.
struct Flags {
  std::string config;
  bool json_errors = false;

  std::uint64_t seed = 0;
  std::string out, format, method, solver, convention;
  int workers = 1;
  double tol = 0.0;

  int n = 0, m = 0, horizon = 0, traj = 0, p = 0, replicates = 0, train = 0, memory = 0;
  double sigma = 0.0;
  std::string alpha, noise, model, cost, x0, inputs, data, diag_a, true_model, n_values, plot_data,
      lti_transitions;
  bool no_noise_files = false;
};

// Resolves each setting as flag > config file > default and records the result.
class Settings {
 public:
  Settings(std::string command, json section, json global)
      : command_(std::move(command)), section_(std::move(section)), global_(std::move(global)) {}

  template <class T>
  T get(const std::string& key, const CLI::Option* opt, const T& flag_value, const T& fallback) {
    T value = fallback;
    if (opt && opt->count() > 0) {
      value = flag_value;
    } else if (const json* j = lookup(key)) {
      try {
        value = j->get<T>();
      } catch (const json::exception&) {
        throw ConfigError(command_ + "." + key + ": wrong type in config file");
      }
    }
    effective_[key] = value;
    return value;
  }

  /// Like get, but absent everywhere yields nullopt (recorded as null).
  template <class T>
  std::optional<T> get_optional(const std::string& key, const CLI::Option* opt, const T& flag_value) {
    if ((opt && opt->count() > 0) || lookup(key)) return get<T>(key, opt, flag_value, T{});
    effective_[key] = nullptr;
    return std::nullopt;
  }

  /// A JSON value given inline on the flag, as a file path on the flag, or in the config.
  std::optional<json> get_json(const std::string& key, const CLI::Option* opt, const std::string& flag_value) {
    std::optional<json> value;
    if (opt && opt->count() > 0) {
      value = parse_json_arg(key, flag_value);
    } else if (const json* j = lookup(key)) {
      value = j->is_string() ? parse_json_arg(key, j->get<std::string>()) : *j;
    }
    effective_[key] = value ? *value : json(nullptr);
    return value;
  }

  void record(const std::string& key, json value) { effective_[key] = std::move(value); }

  json provenance(std::optional<std::uint64_t> seed) const {
    return {{"command", command_},
            {"toolkit_version", folti::kToolkitVersion},
            {"seed", seed ? json(*seed) : json(nullptr)},
            {"config_hash", fnv1a_hex(effective_.dump())},
            {"config", effective_}};
  }

  const std::string& command() const { return command_; }

 private:
  const json* lookup(const std::string& key) const {
    if (section_.is_object() && section_.contains(key)) return &section_[key];
    if (global_.is_object() && global_.contains(key)) return &global_[key];
    return nullptr;
  }

  json parse_json_arg(const std::string& key, const std::string& text) const {
    try {
      const auto first = text.find_first_not_of(" \t\n");
      if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) return json::parse(text);
      return json::parse(folti::read_text(text));
    } catch (const json::parse_error& e) {
      throw ConfigError(command_ + "." + key + ": invalid JSON (" + e.what() + ")");
    }
  }

  std::string command_;
  json section_;
  json global_;
  json effective_ = json::object();
};

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Vector setting given as "a,b,c" on the command line or a JSON array in the config.
std::optional<Vec> get_vector(Settings& s, const std::string& key, const CLI::Option* opt, const std::string& flag) {
  std::optional<std::vector<double>> parsed;
  if (opt && opt->count() > 0) parsed = parse_list(s.command() + "." + key, flag);
  const auto value = s.get_optional<std::vector<double>>(key, opt, parsed.value_or(std::vector<double>{}));
  if (!value) return std::nullopt;
  return to_vec(*value);
}

json vecseq_to_json(const folti::VecSeq& seq) {
  json out = json::array();
  for (const auto& v : seq) out.push_back(folti::vector_to_json(v));
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Writes `text` to `path`, or to `out` when no path was given.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    folti::write_text(p, text);
  }
}

// JSON results carry provenance inline; CSV results get a sidecar file.
void emit_result(std::ostream& out, const std::string& path, const std::string& format, json result,
                 const std::string& csv, const json& provenance) {
  if (format == "json") {
    result["provenance"] = provenance;
    emit(out, path, dump(result));
    return;
  }
  emit(out, path, csv);
  if (!path.empty()) folti::write_text(path + ".provenance.json", dump(provenance));
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    json j = json::parse(folti::read_text(path));
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
  }
}

int env_workers() {
  if (const char* env = std::getenv("FOCTL_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
    throw ConfigError("FOCTL_WORKERS: must be a positive integer");
  }
  return folti::default_workers();
}

folti::SolveOptions solve_options(Settings& s, const Flags& f, CLI::App* cmd) {
  folti::SolveOptions opts;
  const std::string solver = s.get<std::string>("solver", cmd->get_option("--solver"), f.solver, "dense");
  if (solver == "dense") {
    opts.method = folti::SolveMethod::kDense;
  } else if (solver == "iterative") {
    opts.method = folti::SolveMethod::kIterative;
  } else {
    throw ConfigError(s.command() + ".solver: expected dense|iterative");
  }
  opts.tol = s.get<double>("tol", cmd->get_option("--tol"), f.tol, 1e-10);
  if (!(opts.tol > 0.0)) throw ConfigError(s.command() + ".tol: must be positive");
  return opts;
}

std::string get_format(Settings& s, const Flags& f, CLI::App* cmd) {
  const std::string fmt = s.get<std::string>("format", cmd->get_option("--format"), f.format, "json");
  if (fmt != "json" && fmt != "csv") throw ConfigError(s.command() + ".format: expected json|csv");
  return fmt;
}

folti::Convention get_convention(Settings& s, const Flags& f, CLI::App* cmd, folti::Convention fallback) {
  const std::string c =
      s.get<std::string>("convention", cmd->get_option("--convention"), f.convention, folti::to_string(fallback));
  try {
    return folti::convention_from_string(c);
  } catch (const folti::Error& e) {
    throw ConfigError(s.command() + ".convention: " + e.what());
  }
}

folti::FoltiModel require_model(Settings& s, const Flags& f, CLI::App* cmd) {
  const auto j = s.get_json("model", cmd->get_option("--model"), f.model);
  if (!j) throw ConfigError(s.command() + ".model: required (file path or inline JSON)");
  return folti::model_from_json(*j);
}

folti::Dataset require_dataset(Settings& s, const Flags& f, CLI::App* cmd) {
  const std::string data = s.get<std::string>("data", cmd->get_option("--data"), f.data, "");
  if (data.empty()) throw ConfigError(s.command() + ".data: dataset directory required");
  return folti::read_dataset(data);
}

// ---- gen ---------------------------------------------------------------------

int cmd_gen(CLI::App* cmd, const Flags& f, const json& config, std::ostream& out) {
  Settings s("gen", config.value("gen", json::object()), config);
  folti::GenSpec spec;
  spec.n = s.get<int>("n", cmd->get_option("--n"), f.n, 2);
  spec.m = s.get<int>("m", cmd->get_option("--m"), f.m, 2);
  spec.horizon = s.get<int>("T", cmd->get_option("--T"), f.horizon, 64);
  spec.n_trajectories = s.get<int>("traj", cmd->get_option("--traj"), f.traj, 1);
  const std::string alpha = s.get<std::string>("alpha", cmd->get_option("--alpha"), f.alpha, "sampled");
  if (alpha == "sampled") {
    spec.alpha_mode = folti::AlphaMode::kSampledCommensurate;
  } else {
    spec.alpha_mode = folti::AlphaMode::kFixed;
    auto values = parse_list("gen.alpha", alpha);
    if (values.size() == 1 && spec.n > 1) values.assign(spec.n, values[0]);
    spec.alpha_fixed = to_vec(values);
  }
  spec.noise_family = folti::noise_family_from_string(
      s.get<std::string>("noise", cmd->get_option("--noise"), f.noise, "gaussian"));
  spec.noise_scale = s.get<double>("sigma", cmd->get_option("--sigma"), f.sigma, 0.0);
  spec.seed = s.get<std::uint64_t>("seed", cmd->get_option("--seed"), f.seed, 0);
  spec.convention = get_convention(s, f, cmd, folti::Convention::kOrderSubtracted);
  spec.store_noise = !s.get<bool>("no_noise_files", cmd->get_option("--no-noise-files"), f.no_noise_files, false);
  const std::string dir = s.get<std::string>("out", cmd->get_option("--out"), f.out, "dataset");
  const int workers = s.get<int>("workers", cmd->get_option("--workers"), f.workers, env_workers());
  spec.validate();

  const folti::Dataset ds = folti::generate(spec, workers);
  json prov = s.provenance(spec.seed);
  // The worker count never changes results, so it stays out of the hash.
  prov["config"].erase("workers");
  prov["config_hash"] = fnv1a_hex(prov["config"].dump());
  folti::write_dataset(ds, dir, {{"config_hash", prov["config_hash"]}, {"config", prov["config"]}});

  out << dump({{"command", "gen"},
               {"out", dir},
               {"n_trajectories", spec.n_trajectories},
               {"alpha", folti::vector_to_json(ds.model.alpha().values())},
               {"spectral_radius_a", folti::spectral_radius(ds.model.a())},
               {"provenance", prov}});
  return 0;
}

// ---- simulate ----------------------------------------------------------------

int cmd_simulate(CLI::App* cmd, const Flags& f, const json& config, std::ostream& out) {
  Settings s("simulate", config.value("simulate", json::object()), config);
  const folti::FoltiModel model = require_model(s, f, cmd);
  const int n = model.state_dim(), m = model.input_dim();
  const Vec x0 = get_vector(s, "x0", cmd->get_option("--x0"), f.x0).value_or(Vec::Zero(n));
  if (x0.size() != n) throw ConfigError("simulate.x0: expected " + std::to_string(n) + " components");

  folti::VecSeq inputs;
  const std::string inputs_path = s.get<std::string>("inputs", cmd->get_option("--inputs"), f.inputs, "");
  if (!inputs_path.empty()) {
    inputs = folti::sequence_from_csv(folti::read_text(inputs_path), m);
    s.record("T", static_cast<int>(inputs.size()));
  } else {
    const int t = s.get<int>("T", cmd->get_option("--T"), f.horizon, 10);
    if (t < 0) throw ConfigError("simulate.T: must be non-negative");
    inputs.assign(t, Vec::Zero(m));
  }

  const double sigma = s.get<double>("sigma", cmd->get_option("--sigma"), f.sigma, 0.0);
  const auto family =
      folti::noise_family_from_string(s.get<std::string>("noise", cmd->get_option("--noise"), f.noise, "gaussian"));
  const std::uint64_t seed = s.get<std::uint64_t>("seed", cmd->get_option("--seed"), f.seed, 0);
  const int memory = s.get<int>("memory", cmd->get_option("--memory"), f.memory, 0);
  const std::string fmt = get_format(s, f, cmd);
  const std::string path = s.get<std::string>("out", cmd->get_option("--out"), f.out, "");
  if (sigma < 0.0) throw ConfigError("simulate.sigma: must be non-negative");
  if (memory < 0) throw ConfigError("simulate.memory: must be non-negative");

  folti::Rng rng = folti::make_stream(seed, 0);
  const folti::VecSeq noise =
      folti::sample_noise(family, sigma, static_cast<int>(inputs.size()), n, rng);
  folti::SimulateOptions opts;
  if (memory > 0) opts.memory_length = memory;
  const folti::Trajectory traj = folti::simulate(model, x0, inputs, noise, opts);

  json result = {{"command", "simulate"},
                 {"model", folti::model_to_json(model)},
                 {"states", vecseq_to_json(traj.states)},
                 {"inputs", vecseq_to_json(traj.inputs)}};
  if (sigma > 0.0) result["noise"] = vecseq_to_json(noise);
  emit_result(out, path, fmt, result, folti::trajectory_to_csv(traj), s.provenance(seed));
  return 0;
}

// ---- control -----------------------------------------------------------------

int cmd_control(CLI::App* cmd, const Flags& f, const json& config, std::ostream& out) {
  Settings s("control", config.value("control", json::object()), config);
  const folti::FoltiModel model = require_model(s, f, cmd);
  const int n = model.state_dim();
  const auto cost_json = s.get_json("cost", cmd->get_option("--cost"), f.cost);
  const folti::CostSpec cost = cost_json ? folti::cost_from_json(*cost_json)
                                         : folti::CostSpec(Mat::Identity(n, n), Mat::Identity(model.input_dim(),
                                                                                               model.input_dim()));
  if (!cost_json) s.record("cost", folti::cost_to_json(cost));
  const Vec x0 = get_vector(s, "x0", cmd->get_option("--x0"), f.x0).value_or(Vec::Zero(n));
  if (x0.size() != n) throw ConfigError("control.x0: expected " + std::to_string(n) + " components");
  const int t = s.get<int>("T", cmd->get_option("--T"), f.horizon, 10);
  if (t < 1) throw ConfigError("control.T: must be at least 1");
  const std::string method = s.get<std::string>("method", cmd->get_option("--method"), f.method, "ls");
  if (method != "ls" && method != "lagrange" && method != "both") {
    throw ConfigError("control.method: expected ls|lagrange|both");
  }
  const folti::SolveOptions opts = solve_options(s, f, cmd);
  const std::string fmt = get_format(s, f, cmd);
  const std::string path = s.get<std::string>("out", cmd->get_option("--out"), f.out, "");

  std::vector<folti::ControlSolution> sols;
  if (method != "lagrange") {
    sols.push_back(folti::solve_control(model, cost, x0, t, folti::ControlMethod::kLeastSquares, opts));
  }
  if (method != "ls") sols.push_back(folti::solve_control(model, cost, x0, t, folti::ControlMethod::kLagrange, opts));

  json solutions = json::array();
  folti::Trajectory first_traj;
  for (const auto& sol : sols) {
    const folti::Trajectory traj = folti::simulate(model, x0, sol.u);
    if (solutions.empty()) first_traj = traj;
    solutions.push_back({{"method", folti::to_string(sol.method)},
                         {"u", vecseq_to_json(sol.u)},
                         {"cost", sol.cost},
                         {"states", vecseq_to_json(traj.states)}});
  }
  json result = {{"command", "control"}, {"horizon", t}, {"solutions", solutions}};
  if (sols.size() == 2) {
    const double diff = (folti::stack(sols[0].u) - folti::stack(sols[1].u)).lpNorm<Eigen::Infinity>();
    result["discrepancy_inf"] = diff;
  }
  emit_result(out, path, fmt, result, folti::trajectory_to_csv(first_traj), s.provenance(std::nullopt));
  return 0;
}

// ---- identify ----------------------------------------------------------------

int cmd_identify(CLI::App* cmd, const Flags& f, const json& config, std::ostream& out) {
  Settings s("identify", config.value("identify", json::object()), config);
  const folti::Dataset ds = require_dataset(s, f, cmd);
  const int n = ds.spec.n;
  const Vec diag_a = get_vector(s, "diag_a", cmd->get_option("--diag-a"), f.diag_a).value_or(ds.model.a().diagonal());
  if (diag_a.size() != n) throw ConfigError("identify.diag_a: expected " + std::to_string(n) + " components");
  const folti::Convention conv = get_convention(s, f, cmd, ds.model.convention());
  const auto sigma = s.get_optional<double>("sigma", cmd->get_option("--sigma"), f.sigma);
  const auto true_json = s.get_json("true_model", cmd->get_option("--true-model"), f.true_model);
  const std::string fmt = get_format(s, f, cmd);
  const std::string path = s.get<std::string>("out", cmd->get_option("--out"), f.out, "");
  if (ds.trajectories.empty()) throw ConfigError("identify.data: dataset has no trajectories");

  folti::RegressionData data{folti::first_transitions(ds.trajectories), diag_a};
  std::optional<Mat> kw;
  if (sigma) kw = (*sigma) * (*sigma) * Mat::Identity(n, n);
  const folti::IdentifiedParams est = folti::estimate(data, conv, kw);

  json result = {{"command", "identify"},
                 {"n_samples", data.samples.size()},
                 {"a_alpha_hat", folti::matrix_to_json(est.a_alpha_hat)},
                 {"b_hat", folti::matrix_to_json(est.b_hat)},
                 {"alpha_hat", folti::vector_to_json(est.alpha_hat)},
                 {"residual_norm", est.residual_norm}};
  std::string csv = "field,row,col,value\n";
  auto add_matrix = [&csv](const std::string& name, const Mat& mat) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j)
        csv += name + "," + std::to_string(i) + "," + std::to_string(j) + "," + folti::format_double(mat(i, j)) + "\n";
  };
  add_matrix("a_alpha_hat", est.a_alpha_hat);
  add_matrix("b_hat", est.b_hat);
  add_matrix("alpha_hat", est.alpha_hat);
  csv += "residual_norm,0,0," + folti::format_double(est.residual_norm) + "\n";

  if (est.theta_cov) {
    const int nn = n * n;
    const int nm = n * ds.spec.m;
    const double b_trace = est.theta_cov->block(nn, nn, nm, nm).trace();
    result["theta_cov"] = folti::matrix_to_json(*est.theta_cov);
    result["predicted_b_error_rms"] = std::sqrt(b_trace);
    csv += "predicted_b_error_rms,0,0," + folti::format_double(std::sqrt(b_trace)) + "\n";
  }
  if (true_json) {
    const folti::FoltiModel truth = folti::model_from_json(*true_json);
    if (truth.state_dim() != n || truth.input_dim() != ds.spec.m) {
      throw ConfigError("identify.true_model: dimensions differ from the dataset");
    }
    const double b_err = (est.b_hat - truth.b()).norm();
    const double alpha_err = (est.alpha_hat - truth.alpha().values()).norm();
    result["errors"] = {{"b_fro", b_err}, {"alpha_l2", alpha_err}};
    csv += "b_error_fro,0,0," + folti::format_double(b_err) + "\n";
    csv += "alpha_error_l2,0,0," + folti::format_double(alpha_err) + "\n";
  }
  emit_result(out, path, fmt, result, csv, s.provenance(ds.spec.seed));
  return 0;
}

// ---- complexity --------------------------------------------------------------

int cmd_complexity(CLI::App* cmd, const Flags& f, const json& config, std::ostream& out) {
  Settings s("complexity", config.value("complexity", json::object()), config);
  const std::uint64_t seed = s.get<std::uint64_t>("seed", cmd->get_option("--seed"), f.seed, 0);
  const int t = s.get<int>("T", cmd->get_option("--T"), f.horizon, 10);
  const int p = s.get<int>("p", cmd->get_option("--p"), f.p, 20);
  const double sigma = s.get<double>("sigma", cmd->get_option("--sigma"), f.sigma, 0.1);
  const int replicates = s.get<int>("replicates", cmd->get_option("--replicates"), f.replicates, 200);
  std::vector<int> n_values;
  {
    std::optional<std::vector<int>> parsed;
    if (cmd->get_option("--N")->count() > 0) {
      parsed.emplace();
      for (double v : parse_list("complexity.N", f.n_values)) parsed->push_back(static_cast<int>(v));
    }
    n_values = s.get<std::vector<int>>("N", cmd->get_option("--N"), parsed.value_or(std::vector<int>{}),
                                       {10, 20, 50, 100, 200, 500, 1000});
  }

  // Instance: explicit model/cost/x0, otherwise drawn from the seed.
  folti::Rng instance_rng = folti::make_stream(seed, std::numeric_limits<std::uint64_t>::max());
  const auto model_json = s.get_json("model", cmd->get_option("--model"), f.model);
  std::optional<folti::FoltiModel> model;
  if (model_json) {
    model = folti::model_from_json(*model_json);
  } else {
    folti::GenSpec g;
    g.n = s.get<int>("n", cmd->get_option("--n"), f.n, 2);
    g.m = s.get<int>("m", cmd->get_option("--m"), f.m, 2);
    g.alpha_mode = folti::AlphaMode::kFixed;
    const auto alpha = parse_list("complexity.alpha", s.get<std::string>("alpha", cmd->get_option("--alpha"), f.alpha, "0.5"));
    g.alpha_fixed = alpha.size() == 1 ? Vec::Constant(std::max(g.n, 1), alpha[0]) : to_vec(alpha);
    g.convention = get_convention(s, f, cmd, folti::Convention::kOrderSubtracted);
    g.validate();
    model = folti::random_model(g, instance_rng);
  }
  const int n = model->state_dim(), m = model->input_dim();
  const auto cost_json = s.get_json("cost", cmd->get_option("--cost"), f.cost);
  const folti::CostSpec cost = cost_json ? folti::cost_from_json(*cost_json) : folti::random_cost(n, m, instance_rng);
  std::optional<Vec> x0 = get_vector(s, "x0", cmd->get_option("--x0"), f.x0);
  if (!x0) {
    std::normal_distribution<double> normal;
    x0 = Vec(n);
    for (int i = 0; i < n; ++i) (*x0)[i] = normal(instance_rng);
  }
  const int workers = s.get<int>("workers", cmd->get_option("--workers"), f.workers, env_workers());
  const std::string dir = s.get<std::string>("out", cmd->get_option("--out"), f.out, "");
  const std::string plot = s.get<std::string>("plot_data", cmd->get_option("--plot-data"), f.plot_data, "");

  folti::BoundInputs inputs{*model, cost, *x0, t, sigma, p, 1};
  inputs.validate();
  if (replicates < 1) throw ConfigError("complexity.replicates: must be at least 1");

  const folti::ComplexityReport report = folti::monte_carlo_gap(inputs, n_values, replicates, seed, workers);
  json prov = s.provenance(seed);
  prov["config"].erase("workers");
  prov["config_hash"] = fnv1a_hex(prov["config"].dump());

  json result = folti::report_to_json(report);
  result["command"] = "complexity";
  result["instance"] = {{"model", folti::model_to_json(*model)},
                        {"cost", folti::cost_to_json(cost)},
                        {"x0", folti::vector_to_json(*x0)}};
  result["provenance"] = prov;

  if (!dir.empty()) {
    fs::create_directories(dir);
    folti::write_text(fs::path(dir) / "report.json", dump(result));
    folti::write_text(fs::path(dir) / "report.csv", folti::report_to_csv(report));
    folti::write_text(fs::path(dir) / "provenance.json", dump(prov));
  }
  if (!plot.empty()) {
    std::string csv = "N,gap,bound\n";
    for (const auto& row : report.rows) {
      csv += std::to_string(row.n_batches) + "," + folti::format_double(row.gap) + "," +
             folti::format_double(row.bound_ls) + "\n";
    }
    emit(out, plot, csv);
  }

  json summary = {{"command", "complexity"},
                  {"loglog_slope", report.loglog_slope ? json(*report.loglog_slope) : json(nullptr)},
                  {"bound_holds", true},
                  {"failures", 0}};
  int failures = 0;
  for (const auto& row : report.rows) {
    failures += row.failures;
    if (row.gap > row.bound_ls + 2.0 * row.gap_std_error) summary["bound_holds"] = false;
  }
  summary["failures"] = failures;
  if (dir.empty()) summary["report"] = result;
  out << dump(summary);
  return 0;
}

// ---- baseline ----------------------------------------------------------------

int cmd_baseline(CLI::App* cmd, const Flags& f, const json& config, std::ostream& out) {
  Settings s("baseline", config.value("baseline", json::object()), config);
  const folti::Dataset ds = require_dataset(s, f, cmd);
  if (ds.trajectories.size() < 2) throw ConfigError("baseline.data: needs at least two trajectories");
  const int n = ds.spec.n;
  const Vec diag_a = get_vector(s, "diag_a", cmd->get_option("--diag-a"), f.diag_a).value_or(ds.model.a().diagonal());
  if (diag_a.size() != n) throw ConfigError("baseline.diag_a: expected " + std::to_string(n) + " components");
  const folti::Convention conv = get_convention(s, f, cmd, ds.model.convention());
  folti::BaselineOptions opts;
  opts.n_train = s.get<int>("train", cmd->get_option("--train"), f.train,
                            static_cast<int>(ds.trajectories.size() / 2));
  const std::string lti = s.get<std::string>("lti_transitions", cmd->get_option("--lti-transitions"),
                                             f.lti_transitions, "first");
  if (lti != "first" && lti != "all") throw ConfigError("baseline.lti_transitions: expected first|all");
  opts.lti_all_transitions = lti == "all";
  const std::string fmt = get_format(s, f, cmd);
  const std::string path = s.get<std::string>("out", cmd->get_option("--out"), f.out, "");

  const folti::BaselineReport rep = folti::compare_baseline(ds.trajectories, diag_a, conv, opts);
  json result = {{"command", "baseline"},
                 {"n_train", rep.n_train},
                 {"n_test", rep.n_test},
                 {"folti_mse", rep.folti_mse},
                 {"lti_mse", rep.lti_mse},
                 {"ratio", rep.ratio},
                 {"reduction_percent", 100.0 * (1.0 - rep.ratio)},
                 {"alpha_hat", folti::vector_to_json(rep.folti.alpha_hat)},
                 {"alpha_clamped", rep.alpha_clamped}};
  std::string csv = "estimator,mse\nfolti," + folti::format_double(rep.folti_mse) + "\nlti," +
                    folti::format_double(rep.lti_mse) + "\n";
  emit_result(out, path, fmt, result, csv, s.provenance(ds.spec.seed));
  return 0;
}

void report_error(std::ostream& err, bool as_json, const std::exception& e) {
  if (!as_json) {
    err << "foctl: error: " << e.what() << "\n";
    return;
  }
  json j = {{"kind", "error"}, {"message", e.what()}};
  if (const auto* fe = dynamic_cast<const folti::Error*>(&e)) j["kind"] = fe->kind();
  if (const auto* se = dynamic_cast<const folti::SolverError*>(&e)) {
    j["condition_estimate"] = se->condition_estimate();
    j["residual"] = se->residual();
    j["iterations"] = se->iterations();
  }
  if (const auto* ie = dynamic_cast<const folti::IdentifiabilityError*>(&e)) j["null_space_dim"] = ie->null_space_dim();
  err << json{{"error", j}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional-order LTI toolkit: generation, simulation, control, identification, sample complexity"};
  app.name("foctl");
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON config file (flags override its values)");
  app.add_flag("--json-errors", f.json_errors, "Report errors as JSON on standard error");

  auto common = [&f](CLI::App* c, bool with_solver) {
    c->add_option("--seed", f.seed, "Random seed");
    c->add_option("--out", f.out, "Output path");
    c->add_option("--format", f.format, "Result format")->check(CLI::IsMember({"json", "csv"}));
    c->add_option("--workers", f.workers, "Worker threads (default: FOCTL_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    c->add_option("--convention", f.convention, "order-subtracted | order-added");
    if (with_solver) {
      c->add_option("--method", f.method, "Control solver")->check(CLI::IsMember({"ls", "lagrange", "both"}));
      c->add_option("--solver", f.solver, "Lagrange linear solver")->check(CLI::IsMember({"dense", "iterative"}));
      c->add_option("--tol", f.tol, "Iterative solver tolerance");
    }
  };

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  common(gen, false);
  gen->add_option("--n", f.n, "State dimension");
  gen->add_option("--m", f.m, "Input dimension");
  gen->add_option("--T", f.horizon, "Horizon");
  gen->add_option("--traj", f.traj, "Number of trajectories");
  gen->add_option("--alpha", f.alpha, "'sampled' or a fixed order (one value or n comma-separated)");
  gen->add_option("--noise", f.noise, "gaussian|cauchy|gamma|sinc_squared|uniform|poisson");
  gen->add_option("--sigma", f.sigma, "Noise scale");
  gen->add_flag("--no-noise-files", f.no_noise_files, "Do not store the noise sequences");

  auto* sim = app.add_subcommand("simulate", "Simulate a model under given inputs");
  common(sim, false);
  sim->add_option("--model", f.model, "Model JSON (file or inline)");
  sim->add_option("--x0", f.x0, "Initial state, comma-separated");
  sim->add_option("--inputs", f.inputs, "Input CSV (k,u_0..); default zero inputs");
  sim->add_option("--T", f.horizon, "Horizon when no input file is given");
  sim->add_option("--noise", f.noise, "Noise family");
  sim->add_option("--sigma", f.sigma, "Noise scale");
  sim->add_option("--memory", f.memory, "Truncate the memory sum to this many lags (0 = full)");

  auto* ctl = app.add_subcommand("control", "Solve the finite-horizon LQR problem");
  common(ctl, true);
  ctl->add_option("--model", f.model, "Model JSON (file or inline)");
  ctl->add_option("--cost", f.cost, "Cost JSON {q, r, q_f} (file or inline); default identity");
  ctl->add_option("--x0", f.x0, "Initial state, comma-separated");
  ctl->add_option("--T", f.horizon, "Horizon");

  auto* idf = app.add_subcommand("identify", "Identify A_0, B and alpha from a dataset");
  common(idf, false);
  idf->add_option("--data", f.data, "Dataset directory");
  idf->add_option("--diag-a", f.diag_a, "Known diag(A), comma-separated (default: from the manifest)");
  idf->add_option("--sigma", f.sigma, "Noise std for the predicted covariance");
  idf->add_option("--true-model", f.true_model, "True model JSON (file or inline) for error norms");

  auto* cpx = app.add_subcommand("complexity", "Sample-complexity Monte-Carlo sweep");
  common(cpx, false);
  cpx->add_option("--n", f.n, "State dimension of the random instance");
  cpx->add_option("--m", f.m, "Input dimension of the random instance");
  cpx->add_option("--alpha", f.alpha, "Order of the random instance");
  cpx->add_option("--model", f.model, "Model JSON instead of a random instance");
  cpx->add_option("--cost", f.cost, "Cost JSON instead of a random draw");
  cpx->add_option("--x0", f.x0, "Initial state, comma-separated");
  cpx->add_option("--T", f.horizon, "Control horizon");
  cpx->add_option("--p", f.p, "Samples per batch");
  cpx->add_option("--sigma", f.sigma, "Noise std");
  cpx->add_option("--N", f.n_values, "Batch counts, comma-separated");
  cpx->add_option("--replicates", f.replicates, "Replicates per N");
  cpx->add_option("--plot-data", f.plot_data, "Write plot CSV (N,gap,bound) to this path");

  auto* base = app.add_subcommand("baseline", "Compare FOLTI and LTI multi-step prediction");
  common(base, false);
  base->add_option("--data", f.data, "Dataset directory");
  base->add_option("--diag-a", f.diag_a, "Known diag(A), comma-separated (default: from the manifest)");
  base->add_option("--train", f.train, "Number of training trajectories (default: half)");
  base->add_option("--lti-transitions", f.lti_transitions, "first | all");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const json config = load_config(f.config);
    if (gen->parsed()) return cmd_gen(gen, f, config, out);
    if (sim->parsed()) return cmd_simulate(sim, f, config, out);
    if (ctl->parsed()) return cmd_control(ctl, f, config, out);
    if (idf->parsed()) return cmd_identify(idf, f, config, out);
    if (cpx->parsed()) return cmd_complexity(cpx, f, config, out);
    if (base->parsed()) return cmd_baseline(base, f, config, out);
  } catch (const ConfigError& e) {
    report_error(err, f.json_errors, e);
    return 2;
  } catch (const std::exception& e) {
    report_error(err, f.json_errors, e);
    return 1;
  }
  return 2;
}

}  // namespace foctl

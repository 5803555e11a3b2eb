#include "folti/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "folti/error.hpp"

namespace folti {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(field + ": expected a non-empty array of rows");
  }
  const auto rows = j.size();
  const auto cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(field + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw ConfigError(field + ": non-numeric entry");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field + ": non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

json model_to_json(const FoltiModel& model) {
  return {{"a", matrix_to_json(model.a())},
          {"b", matrix_to_json(model.b())},
          {"alpha", vector_to_json(model.alpha().values())},
          {"convention", to_string(model.convention())}};
}

FoltiModel model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model: expected an object");
  for (const char* key : {"a", "b", "alpha"}) {
    if (!j.contains(key)) throw ConfigError(std::string("model.") + key + ": missing");
  }
  const Convention conv = j.contains("convention")
                              ? convention_from_string(j["convention"].get<std::string>())
                              : Convention::kOrderSubtracted;
  try {
    return {matrix_from_json(j["a"], "model.a"), matrix_from_json(j["b"], "model.b"),
            FracOrder(vector_from_json(j["alpha"], "model.alpha")), conv};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

json cost_to_json(const CostSpec& cost) {
  return {{"q", matrix_to_json(cost.q())}, {"r", matrix_to_json(cost.r())}, {"q_f", matrix_to_json(cost.q_f())}};
}

CostSpec cost_from_json(const json& j) {
  if (!j.is_object() || !j.contains("q") || !j.contains("r")) throw ConfigError("cost: needs q and r");
  const Mat q = matrix_from_json(j["q"], "cost.q");
  const Mat qf = j.contains("q_f") ? matrix_from_json(j["q_f"], "cost.q_f") : q;
  try {
    return {q, matrix_from_json(j["r"], "cost.r"), qf};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("cost: ") + e.what());
  }
}

json gen_spec_to_json(const GenSpec& spec) {
  json j = {{"n", spec.n},
            {"m", spec.m},
            {"T", spec.horizon},
            {"n_trajectories", spec.n_trajectories},
            {"alpha_mode", spec.alpha_mode == AlphaMode::kFixed ? "fixed" : "sampled"},
            {"noise_family", to_string(spec.noise_family)},
            {"noise_scale", spec.noise_scale},
            {"seed", spec.seed},
            {"convention", to_string(spec.convention)},
            {"store_noise", spec.store_noise}};
  if (spec.alpha_mode == AlphaMode::kFixed) j["alpha"] = vector_to_json(spec.alpha_fixed);
  return j;
}

GenSpec gen_spec_from_json(const json& j) {
  GenSpec spec;
  try {
    spec.n = j.at("n").get<int>();
    spec.m = j.at("m").get<int>();
    spec.horizon = j.at("T").get<int>();
    spec.n_trajectories = j.at("n_trajectories").get<int>();
    spec.alpha_mode = j.at("alpha_mode").get<std::string>() == "fixed" ? AlphaMode::kFixed
                                                                         : AlphaMode::kSampledCommensurate;
    if (spec.alpha_mode == AlphaMode::kFixed) spec.alpha_fixed = vector_from_json(j.at("alpha"), "spec.alpha");
    spec.noise_family = noise_family_from_string(j.at("noise_family").get<std::string>());
    spec.noise_scale = j.at("noise_scale").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.convention = convention_from_string(j.at("convention").get<std::string>());
    spec.store_noise = j.at("store_noise").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  return spec;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::string header(const char* prefix, Eigen::Index count) {
  std::string h;
  for (Eigen::Index i = 0; i < count; ++i) h += "," + std::string(prefix) + "_" + std::to_string(i);
  return h;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad CSV number '" + s + "'");
  return v;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (!line.empty()) rows.push_back(split_row(line));
  }
  return rows;
}

std::string indexed_name(const char* stem, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05d.csv", stem, i);
  return buf;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  const Eigen::Index n = traj.states.front().size();
  const Eigen::Index m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
  std::string out = "k" + header("x", n) + header("u", m) + "\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out += std::to_string(k);
    for (Eigen::Index i = 0; i < n; ++i) out += "," + format_double(traj.states[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) {
      out += ",";
      if (k < traj.inputs.size()) out += format_double(traj.inputs[k][i]);
    }
    out += "\n";
  }
  return out;
}

Trajectory trajectory_from_csv(const std::string& text, int n, int m) {
  Trajectory traj;
  const auto rows = csv_rows(text);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (static_cast<int>(r.size()) != 1 + n + m) throw IoError("trajectory CSV row has wrong width");
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = parse_cell(r[1 + i]);
    traj.states.push_back(std::move(x));
    if (k + 1 < rows.size()) {
      Vec u(m);
      for (int i = 0; i < m; ++i) u[i] = parse_cell(r[1 + n + i]);
      traj.inputs.push_back(std::move(u));
    }
  }
  if (traj.states.empty()) throw IoError("trajectory CSV has no rows");
  return traj;
}

std::string sequence_to_csv(const VecSeq& seq, const std::string& prefix) {
  const Eigen::Index w = seq.empty() ? 0 : seq.front().size();
  std::string out = "k" + header(prefix.c_str(), w) + "\n";
  for (std::size_t k = 0; k < seq.size(); ++k) {
    out += std::to_string(k);
    for (Eigen::Index i = 0; i < w; ++i) out += "," + format_double(seq[k][i]);
    out += "\n";
  }
  return out;
}

VecSeq sequence_from_csv(const std::string& text, int width) {
  VecSeq seq;
  for (const auto& r : csv_rows(text)) {
    if (static_cast<int>(r.size()) != 1 + width) throw IoError("sequence CSV row has wrong width");
    Vec v(width);
    for (int i = 0; i < width; ++i) v[i] = parse_cell(r[1 + i]);
    seq.push_back(std::move(v));
  }
  return seq;
}

void write_dataset(const Dataset& ds, const fs::path& dir, const json& extra_provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json trajectories = json::array();
  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    const int idx = static_cast<int>(i);
    json entry = {{"index", idx},
                  {"states_file", indexed_name("traj", idx)},
                  {"controls_file", indexed_name("controls", idx)},
                  {"cost", cost_to_json(ds.costs[i])},
                  {"optimal_cost", ds.optimal_costs[i]}};
    write_text(dir / indexed_name("traj", idx), trajectory_to_csv(ds.trajectories[i]));
    write_text(dir / indexed_name("controls", idx), sequence_to_csv(ds.optimal_controls[i], "u"));
    if (!ds.noise.empty()) {
      entry["noise_file"] = indexed_name("noise", idx);
      write_text(dir / indexed_name("noise", idx), sequence_to_csv(ds.noise[i], "w"));
    }
    trajectories.push_back(std::move(entry));
  }

  json manifest = {
      {"format", "folti-dataset"},
      {"format_version", 1},
      {"dimensions",
       {{"n", ds.spec.n}, {"m", ds.spec.m}, {"T", ds.spec.horizon}, {"n_trajectories", ds.spec.n_trajectories}}},
      {"spec", gen_spec_to_json(ds.spec)},
      {"model", model_to_json(ds.model)},
      {"provenance",
       {{"toolkit_version", ds.toolkit_version},
        {"seed", ds.spec.seed},
        {"spectral_radius_target", kSpectralRadiusTarget},
        {"r_ridge", kCostRidge},
        {"sinc_squared_truncation", sinc_squared_truncation()},
        {"optimal_control_method", "least-squares"}}},
      {"trajectories", std::move(trajectories)}};
  for (const auto& [key, value] : extra_provenance.items()) manifest["provenance"][key] = value;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw IoError("manifest.json: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "folti-dataset") throw IoError("manifest.json: not a folti dataset");

  const GenSpec spec = gen_spec_from_json(manifest.at("spec"));
  Dataset ds{spec, model_from_json(manifest.at("model")), {}, {}, {}, {}, {}};
  ds.toolkit_version = manifest.at("provenance").value("toolkit_version", kToolkitVersion);
  for (const auto& entry : manifest.at("trajectories")) {
    ds.trajectories.push_back(
        trajectory_from_csv(read_text(dir / entry.at("states_file").get<std::string>()), spec.n, spec.m));
    ds.optimal_controls.push_back(
        sequence_from_csv(read_text(dir / entry.at("controls_file").get<std::string>()), spec.m));
    ds.costs.push_back(cost_from_json(entry.at("cost")));
    ds.optimal_costs.push_back(entry.at("optimal_cost").get<double>());
    if (entry.contains("noise_file")) {
      ds.noise.push_back(sequence_from_csv(read_text(dir / entry.at("noise_file").get<std::string>()), spec.n));
    }
  }
  return ds;
}

}  // namespace folti

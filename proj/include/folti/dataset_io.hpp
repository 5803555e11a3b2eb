#pragma once

// Interchange format: JSON manifest plus per-trajectory CSV files.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "folti/forge.hpp"

namespace folti {

using json = nlohmann::json;

/// Shortest round-trip decimal for JSON; CSV cells use 17 significant digits.
std::string format_double(double v);

json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, const std::string& field);
json vector_to_json(const Vec& v);
Vec vector_from_json(const json& j, const std::string& field);

json model_to_json(const FoltiModel& model);
FoltiModel model_from_json(const json& j);
json cost_to_json(const CostSpec& cost);
CostSpec cost_from_json(const json& j);
json gen_spec_to_json(const GenSpec& spec);
GenSpec gen_spec_from_json(const json& j);

/// Writes manifest.json and the trajectory/control/noise CSVs into `dir`.
/// Keys of `extra_provenance` are added to the manifest's provenance block.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir,
                   const json& extra_provenance = json::object());
Dataset read_dataset(const std::filesystem::path& dir);

/// CSV with header `k,x_0..x_{n-1},u_0..u_{m-1}`; the final row leaves the
/// input cells empty.
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text, int n, int m);
/// CSV with header `k,<prefix>_0..` for an input or noise sequence.
std::string sequence_to_csv(const VecSeq& seq, const std::string& prefix);
VecSeq sequence_from_csv(const std::string& text, int width);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace folti

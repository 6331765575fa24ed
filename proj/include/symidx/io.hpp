#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "symidx/core.hpp"
#include "symidx/dynamics.hpp"
#include "symidx/init.hpp"
#include "symidx/model.hpp"
#include "symidx/train.hpp"

namespace symidx {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
/// Strict parse of a whole token; ValidationError otherwise.
double parse_double(const std::string& text);

Json complex_to_json(const CVector& v);
CVector complex_from_json(const Json& j, const std::string& what);

/// Serialized model: everything needed to rebuild the teacher and student.
struct ModelFile {
  int N = 0;
  int M = 0;
  int K = 0;
  std::string activation;
  double activation_param = 0.0;
  CVector custom_coeffs;  // only for the custom activation
  CVector frozen_weights;
  CVector h_star;
  CVector alphas;
  std::uint64_t seed = 0;
};

ModelFile describe_model(const StudentSpec& student, const TeacherSpec& teacher, std::uint64_t seed);
Json model_to_json(const ModelFile& model);
ModelFile model_from_json(const Json& j);
/// Rebuilds teacher and student (link attached with the given convention).
Problem problem_from_model(const ModelFile& model, LinkConvention convention = LinkConvention::Theory);

Json init_report_to_json(const InitReport& report);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Json events_to_json(const Trajectory& traj);

void write_run_csv(std::ostream& out, const RunRecord& record);
Json train_config_to_json(const TrainConfig& config);
Json run_sidecar_json(const RunRecord& record);

/// Reads a JSON document; ValidationError when missing or malformed.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64-bit hash of a byte string, as 16 hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string file_checksum(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_path;
  Json seeds = Json::object();
  std::string output_dir;
  std::vector<std::pair<std::string, std::string>> artifacts;  // file name, checksum
};

Json manifest_to_json(const RunManifest& manifest);

}  // namespace symidx

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symidx/core.hpp"
#include "symidx/io.hpp"
#include "symidx/sympoly.hpp"
#include "symidx/train.hpp"

namespace symidx {

/// Exit codes shared by all commands.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitCheckFailed = 3 };

constexpr int kSchemaVersion = 1;

struct SemigroupRequest {
  CVector h;
  CVector h_tilde;
  int k = 1;
  int l = 1;
};

struct OrthogonalityConfig {
  int N = 25;
  int n_samples = 20000;
  std::uint64_t seed = 2001;
  int max_degree = 5;  // single-part checks <p_k, p_l> for k, l <= max_degree
  std::vector<std::pair<Partition, Partition>> partitions;
  std::vector<SemigroupRequest> semigroup;
  double z_threshold = 4.0;
};

struct FlowConfig {
  int s = 3;
  double delta = 0.0;
  double r0 = 0.1;
  double cos_s_theta0 = 0.6;
  std::optional<double> v0;  // defaults to 1 - r0^2
  double eps = 1e-2;
  double horizon = 1e4;
  double max_step = 0.05;
};

struct InitDiagConfig {
  int N = 25;
  int M = 100;
  int K = 150;
  std::string activation = "experiment";
  CVector alphas = experiment_alphas();
  std::uint64_t seed_frozen = 1002;
  std::uint64_t seed_hstar = 1004;
  std::uint64_t seed_weights = 1001;
  int seeds = 1;
  bool vary_frozen = false;  // redraw the frozen layer for every seed
};

/// Parsers for the JSON config documents. Every document carries
/// "schema_version": 1; unknown keys are rejected with ValidationError.
OrthogonalityConfig parse_orthogonality_config(const Json& j);
FlowConfig parse_flow_config(const Json& j);
TrainConfig parse_train_config(const Json& j);
InitDiagConfig parse_init_diag_config(const Json& j);

struct CommandOptions {
  std::optional<std::string> config_path;
  std::string out_dir = "out";
  std::optional<int> seeds;
  bool reference_preset = false;
  std::optional<LossKind> loss;
  bool quiet = false;
};

int cmd_orthogonality(const CommandOptions& opts);
int cmd_flow(const CommandOptions& opts);
int cmd_train(const CommandOptions& opts);
int cmd_init_diag(const CommandOptions& opts);

/// Parses argv, dispatches, and maps exceptions to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace symidx

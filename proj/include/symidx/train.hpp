#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symidx/core.hpp"
#include "symidx/dynamics.hpp"
#include "symidx/loss.hpp"
#include "symidx/model.hpp"

namespace symidx {

struct TrainConfig {
  int N = 25;
  int M = 100;
  int K = 150;
  int n_samples = 50000;
  int iterations = 20000;
  double learning_rate = 0.0025;
  LossKind loss_kind = LossKind::L;
  std::string activation = "experiment";
  CVector alphas = experiment_alphas();
  LinkConvention link_convention = LinkConvention::Theory;
  std::uint64_t seed_weights = 1001;
  std::uint64_t seed_frozen = 1002;
  std::uint64_t seed_data = 1003;
  std::uint64_t seed_hstar = 1004;
  int record_every = 10;
  double success_threshold = 0.9;
  /// Store the projected design matrix in single precision (halves memory traffic).
  bool single_precision_features = true;

  /// Throws ValidationError on any violated invariant.
  void validate() const;
};

/// Seeds for run j of a multi-seed suite: weights, data and h* are re-derived,
/// the frozen layer is shared by all runs.
TrainConfig config_for_run(const TrainConfig& base, int run_index);

/// The fixed ingredients of a run.
struct Problem {
  TeacherSpec teacher;
  StudentSpec student;
  double delta = 0.0;
};

Problem build_problem(const TrainConfig& config);

struct TrainPoint {
  int iteration = 0;
  SummaryStats stats;
  double emp_loss = 0.0;
};

struct RunRecord {
  TrainConfig config;
  std::vector<TrainPoint> trajectory;
  SummaryStats outcome;
  double wallclock = 0.0;
  double delta = 0.0;
  int rank = 0;
  /// Largest gap between the statistic increments computed through w-space
  /// (A dw) and through the projected feature increment (-eta P_A g).
  double projection_gap = 0.0;
  CVector w_final;

  double r0() const { return trajectory.front().stats.r; }
  bool success() const { return outcome.r >= config.success_threshold; }
};

/// Full-batch preconditioned GD on the empirical loss. Throws NumericalError
/// naming the iterate when the loss or gradient stops being finite.
RunRecord train_gd(const TrainConfig& config);
/// Same, starting from a given w0 on a prebuilt problem.
RunRecord train_gd(const TrainConfig& config, const Problem& problem, const CVector& w0);

struct GridResult {
  double best_rate = 0.0;
  std::vector<double> rates;
  std::vector<int> successes;
  std::vector<int> aborted;
};

/// Runs every rate over `seeds` runs; success is terminal r >= threshold.
/// Aborted runs count as failures; ties go to the smaller rate.
GridResult lr_grid_search(const TrainConfig& config, const std::vector<double>& grid, int seeds);

struct PhaseDurations {
  int search_duration = 0;                 // last recorded iteration with r < 2 r0
  std::optional<int> descent_duration;     // iterations from there to the first r >= threshold
};

PhaseDurations search_descent_metrics(const RunRecord& record);

/// Terminal success with a recorded r below r0 before the threshold is first reached.
bool shows_dip_then_rise(const RunRecord& record);

}  // namespace symidx

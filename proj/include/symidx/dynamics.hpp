#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symidx/core.hpp"
#include "symidx/model.hpp"

namespace symidx {

/// Dimension-free state of the preconditioned flow.
struct SummaryStats {
  cplx m{0.0, 0.0};          // <Aw, h*>
  double r = 0.0;            // |m|
  double cos_s_theta = 1.0;  // cos(s arg m), 1 when r = 0
  double v = 0.0;            // ||Aw||^2 - r^2
  double delta = 0.0;        // 1 - ||P_A h*||^2, constant along the flow
};

/// Statistics of a feature vector u = Aw against h* (h* zero-padded).
SummaryStats summary_from_features(const CVector& u, const CVector& h_star, int s, double delta = 0.0);
SummaryStats summary_from_weights(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                                  double delta = 0.0);
/// State with a given (r, cos s theta, v); the phase is taken as arccos(cos)/s.
SummaryStats make_state(double r, double cos_s_theta, double v, double delta, int s);

struct OdeRates {
  double dr = 0.0;
  double dcos = 0.0;
  double dv = 0.0;
  double dtheta = 0.0;  // auxiliary phase, kept for reporting m
};

/// Right-hand side of the (r, cos s theta, v) system.
/// For s = 1 the 1/r factor uses max(r, 1e-10); for s >= 2 and r == 0 the phase is frozen.
OdeRates ode_rhs(const SummaryStats& state, int s);

struct PhaseEvent {
  std::string label;
  double time = 0.0;
};

struct ClampEvent {
  double time = 0.0;
  std::string variable;
  double magnitude = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SummaryStats> states;
  std::vector<PhaseEvent> events;
  std::vector<ClampEvent> clamps;
  int rejected_steps = 0;
  int info_exponent = 1;

  std::size_t size() const { return times.size(); }
  const SummaryStats& back() const { return states.back(); }
  /// Cubic Hermite interpolation of (r, cos, v, m) at time t inside the recorded range.
  SummaryStats at(double t) const;
};

struct StepControl {
  double initial_step = 1e-3;
  double max_step = 0.05;
  double min_step = 1e-12;
  double abs_tol = 1e-9;            // per-step error on each statistic
  double invariant_tol = 1e-12;     // allowed excursion before a step is rejected
  std::optional<double> stop_at_accuracy;  // stop once the epsilon region is reached
};

/// Classical RK4 with step doubling. Steps whose error exceeds abs_tol or that
/// push a statistic out of its range by more than invariant_tol are halved; tiny
/// excursions are clamped and logged. Throws NumericalError on step underflow.
Trajectory integrate_flow(const SummaryStats& initial, int s, double horizon,
                          const StepControl& control = {});

/// First recorded time with r >= 1-eps, cos s theta >= 1-eps and v <= eps.
std::optional<double> stopping_time(const Trajectory& traj, double eps);

/// Reference scale of the time-to-accuracy bound with unit constants:
/// log(1/eps) for s = 1, 2^{s^2} r0^{-4s} + log(1/eps) otherwise.
double time_bound(int s, double eps, double r0);

/// tanh(k t): lower envelope for cos s theta under d/dt cos >= k (1 - cos^2).
double tanh_bound(double k, double t);
/// Time by which r reaches (a/b)^2 under r' >= a r^{s-1} - b r^{2s-1} (0 < a < b, s >= 2).
double bihari_bound(double a, double b, double r0, int s);

struct FlowComparison {
  Trajectory ode;
  Trajectory descent;
  double max_deviation = 0.0;  // max_n |r_gd(n eta) - r_ode(n eta)|
};

/// Discrete preconditioned GD on the population loss L,
///   w <- w - eta/(s |alpha_s|) pinv(A^dagger A) grad L(w),
/// against integrate_flow from the same summary state at matched times t = n eta.
/// Throws NumericalError if r or v exceeds 1e3.
FlowComparison flow_vs_descent(const CVector& w0, const StudentSpec& student, const TeacherSpec& teacher,
                               double eta, int iterations, double delta = 0.0);

/// Audits used by the CLI and the acceptance suite.
bool cos_monotone(const Trajectory& traj, double tol = 1e-12);
bool r_in_unit_interval(const Trajectory& traj, double tol = 1e-12);

}  // namespace symidx

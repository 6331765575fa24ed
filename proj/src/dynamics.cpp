#include "symidx/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "symidx/loss.hpp"

namespace symidx {

namespace {

constexpr double kSingularCap = 1e-10;

// Integrator state: r, cos s theta, v, theta.
using State = std::array<double, 4>;

SummaryStats to_stats(const State& y, double delta) {
  SummaryStats st;
  st.r = y[0];
  st.cos_s_theta = y[1];
  st.v = y[2];
  st.delta = delta;
  st.m = std::polar(std::max(y[0], 0.0), y[3]);
  return st;
}

State rates(const State& y, double delta, int s) {
  const OdeRates d = ode_rhs(to_stats(y, delta), s);
  return {d.dr, d.dcos, d.dv, d.dtheta};
}

State axpy(const State& y, double h, const State& k) {
  return {y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
}

State rk4_step(const State& y, double h, double delta, int s) {
  const State k1 = rates(y, delta, s);
  const State k2 = rates(axpy(y, h / 2, k1), delta, s);
  const State k3 = rates(axpy(y, h / 2, k2), delta, s);
  const State k4 = rates(axpy(y, h, k3), delta, s);
  State out;
  for (int i = 0; i < 4; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct Excursion {
  double worst = 0.0;  // largest violation
  bool any = false;
};

// Distance outside [lo, hi], zero if inside.
double outside(double x, double lo, double hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

struct EventRule {
  std::string label;
  std::function<bool(const SummaryStats&)> reached;
};

std::vector<EventRule> event_rules(const SummaryStats& initial, int s) {
  std::vector<EventRule> rules;
  rules.push_back({"cos_nonnegative", [](const SummaryStats& x) { return x.cos_s_theta >= 0.0; }});
  rules.push_back({"cos_ge_half", [](const SummaryStats& x) { return x.cos_s_theta >= 0.5; }});
  rules.push_back({"r_ge_0.2", [](const SummaryStats& x) { return x.r >= 0.2; }});
  rules.push_back({"r_ge_0.9", [](const SummaryStats& x) { return x.r >= 0.9; }});
  rules.push_back({"r_zero", [](const SummaryStats& x) { return x.r <= 0.0; }});
  if (s > 1) {
    const double r0 = initial.r;
    const double v_star = std::pow(2.0, -s) / 36.0 / (s * s) * ipow(r0, 4);
    const double cos_target = (1.0 - 1.0 / (4.0 * ipow(static_cast<double>(s), 4))) / (1.0 - initial.delta);
    const double r_star = 1.0 - 1.0 / (s * s);
    rules.push_back({"v_le_vstar", [v_star](const SummaryStats& x) { return x.v <= v_star; }});
    rules.push_back({"cos_ge_phase3", [cos_target](const SummaryStats& x) { return x.cos_s_theta >= cos_target; }});
    rules.push_back({"r_ge_rstar", [r_star](const SummaryStats& x) { return x.r >= r_star; }});
  }
  return rules;
}

double hermite(double y0, double y1, double d0, double d1, double h, double tau) {
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tau) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

}  // namespace

SummaryStats summary_from_features(const CVector& u, const CVector& h_star, int s, double delta) {
  SummaryStats st;
  st.m = coeff_inner(u, h_star);
  st.r = std::abs(st.m);
  st.cos_s_theta = st.r > 0.0 ? (ipow(st.m / st.r, s)).real() : 1.0;
  st.cos_s_theta = std::clamp(st.cos_s_theta, -1.0, 1.0);
  st.v = u.squaredNorm() - st.r * st.r;
  st.delta = delta;
  return st;
}

SummaryStats summary_from_weights(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                                  double delta) {
  if (w.size() != student.width()) throw ValidationError("summary_from_weights: weight dimension mismatch");
  if (std::abs(teacher.h_star.norm() - 1.0) > 1e-12) throw ValidationError("summary_from_weights: ||h*|| != 1");
  return summary_from_features(student.A() * w, teacher.h_star, teacher.info_exponent, delta);
}

SummaryStats make_state(double r, double cos_s_theta, double v, double delta, int s) {
  if (s < 1) throw ValidationError("make_state: s must be >= 1");
  SummaryStats st;
  st.r = r;
  st.cos_s_theta = cos_s_theta;
  st.v = v;
  st.delta = delta;
  st.m = std::polar(r, std::acos(std::clamp(cos_s_theta, -1.0, 1.0)) / s);
  return st;
}

OdeRates ode_rhs(const SummaryStats& x, int s) {
  if (s < 1) throw ValidationError("ode_rhs: s must be >= 1");
  const double gain = 1.0 - x.delta;
  const double r = x.r;
  const double c = x.cos_s_theta;
  const double shrink = ipow(x.v + r * r, s - 1);
  OdeRates d;
  d.dr = gain * ipow(r, s - 1) * c - shrink * r;
  d.dv = 2.0 * x.delta * ipow(r, s) * c - 2.0 * shrink * x.v;
  // Phase equations carry r^{s-2}; sin(s theta) is recovered from the tracked phase.
  double phase_factor;
  if (s == 1) {
    phase_factor = 1.0 / std::max(r, kSingularCap);
  } else if (r == 0.0) {
    phase_factor = 0.0;
  } else {
    phase_factor = ipow(r, s - 2);
  }
  d.dcos = gain * s * phase_factor * (1.0 - c * c);
  const double theta = std::arg(x.m);
  d.dtheta = -gain * phase_factor * std::sin(s * theta);
  return d;
}

SummaryStats Trajectory::at(double t) const {
  if (times.empty()) throw ValidationError("Trajectory::at: empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const std::size_t i = j - 1;
  const double h = times[j] - times[i];
  const double tau = (t - times[i]) / h;
  const SummaryStats& a = states[i];
  const SummaryStats& b = states[j];
  const OdeRates da = ode_rhs(a, info_exponent);
  const OdeRates db = ode_rhs(b, info_exponent);
  SummaryStats out;
  out.delta = a.delta;
  out.r = hermite(a.r, b.r, da.dr, db.dr, h, tau);
  out.cos_s_theta = hermite(a.cos_s_theta, b.cos_s_theta, da.dcos, db.dcos, h, tau);
  out.v = hermite(a.v, b.v, da.dv, db.dv, h, tau);
  const double th0 = std::arg(a.m);
  const double th1 = th0 + std::remainder(std::arg(b.m) - th0, 2.0 * std::numbers::pi);
  out.m = std::polar(std::max(out.r, 0.0), hermite(th0, th1, da.dtheta, db.dtheta, h, tau));
  return out;
}

Trajectory integrate_flow(const SummaryStats& initial, int s, double horizon, const StepControl& control) {
  if (s < 1) throw ValidationError("integrate_flow: s must be >= 1");
  if (!(horizon > 0.0)) throw ValidationError("integrate_flow: horizon must be positive");
  if (!(initial.r >= 0.0) || !(initial.v >= -control.invariant_tol) ||
      std::abs(initial.cos_s_theta) > 1.0 + control.invariant_tol || initial.delta < 0.0 || initial.delta > 1.0)
    throw ValidationError("integrate_flow: initial state violates r >= 0, v >= 0, |cos| <= 1, delta in [0,1]");

  const double delta = initial.delta;
  const bool bounded_r = initial.r <= 1.0;
  Trajectory traj;
  traj.info_exponent = s;
  State y{initial.r, initial.cos_s_theta, initial.v, std::arg(initial.m)};
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(to_stats(y, delta));

  const auto rules = event_rules(initial, s);
  std::vector<bool> fired(rules.size(), false);
  auto check_events = [&](const SummaryStats& st, double now) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (!fired[i] && rules[i].reached(st)) {
        fired[i] = true;
        traj.events.push_back({rules[i].label, now});
      }
    }
  };
  check_events(traj.states.back(), t);

  const double tol = control.invariant_tol;
  auto violation = [&](const State& z) {
    Excursion ex;
    const double parts[3] = {outside(z[0], 0.0, bounded_r ? 1.0 : INFINITY), outside(z[1], -1.0, 1.0),
                             outside(z[2], 0.0, INFINITY)};
    for (double p : parts) {
      ex.worst = std::max(ex.worst, p);
      ex.any = ex.any || p > 0.0;
    }
    return ex;
  };

  double h = std::min(control.initial_step, control.max_step);
  while (t < horizon) {
    if (control.stop_at_accuracy) {
      const SummaryStats& cur = traj.states.back();
      const double eps = *control.stop_at_accuracy;
      if (cur.r >= 1.0 - eps && cur.cos_s_theta >= 1.0 - eps && cur.v <= eps) break;
    }
    const double step = std::min(h, horizon - t);
    const State full = rk4_step(y, step, delta, s);
    const State mid = rk4_step(y, step / 2, delta, s);
    const State two = rk4_step(mid, step / 2, delta, s);
    double err = 0.0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(two[i] - full[i]) / 15.0);
    const Excursion ex_mid = violation(mid);
    const Excursion ex = violation(two);
    const bool finite = std::isfinite(two[0]) && std::isfinite(two[1]) && std::isfinite(two[2]);
    if (!finite || err > control.abs_tol || ex.worst > tol || ex_mid.worst > tol) {
      ++traj.rejected_steps;
      h = step / 2;
      if (h < control.min_step) {
        const SummaryStats& last = traj.states.back();
        throw NumericalError("integrate_flow: step underflow at t = " + std::to_string(t) +
                             " (r = " + std::to_string(last.r) + ", cos = " + std::to_string(last.cos_s_theta) +
                             ", v = " + std::to_string(last.v) + ")");
      }
      continue;
    }
    y = two;
    t += step;
    if (ex.any) {
      const double r_hi = bounded_r ? 1.0 : INFINITY;
      if (double e = outside(y[0], 0.0, r_hi); e > 0.0) traj.clamps.push_back({t, "r", e});
      if (double e = outside(y[1], -1.0, 1.0); e > 0.0) traj.clamps.push_back({t, "cos_s_theta", e});
      if (double e = outside(y[2], 0.0, INFINITY); e > 0.0) traj.clamps.push_back({t, "v", e});
      y[0] = std::clamp(y[0], 0.0, r_hi);
      y[1] = std::clamp(y[1], -1.0, 1.0);
      y[2] = std::max(y[2], 0.0);
    }
    traj.times.push_back(t);
    traj.states.push_back(to_stats(y, delta));
    check_events(traj.states.back(), t);
    if (err < control.abs_tol / 32.0) h = std::min(step * 2.0, control.max_step);
    else h = step;
  }

  const auto low = std::min_element(traj.states.begin(), traj.states.end(),
                                    [](const SummaryStats& a, const SummaryStats& b) { return a.r < b.r; });
  const auto k = static_cast<std::size_t>(low - traj.states.begin());
  if (k > 0 && k + 1 < traj.states.size()) traj.events.push_back({"r_minimum", traj.times[k]});
  return traj;
}

std::optional<double> stopping_time(const Trajectory& traj, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("stopping_time: eps must be in (0, 1)");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SummaryStats& x = traj.states[i];
    if (x.r >= 1.0 - eps && x.cos_s_theta >= 1.0 - eps && x.v <= eps) return traj.times[i];
  }
  return std::nullopt;
}

double time_bound(int s, double eps, double r0) {
  if (s < 1) throw ValidationError("time_bound: s must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("time_bound: eps must be in (0, 1)");
  if (!(r0 > 0.0 && r0 <= 1.0)) throw ValidationError("time_bound: r0 must be in (0, 1]");
  const double tail = std::log(1.0 / eps);
  if (s == 1) return tail;
  return std::pow(2.0, s * s) * std::pow(r0, -4.0 * s) + tail;
}

double tanh_bound(double k, double t) {
  if (!(k > 0.0)) throw ValidationError("tanh_bound: k must be positive");
  return std::tanh(k * t);
}

double bihari_bound(double a, double b, double r0, int s) {
  if (!(a > 0.0 && a < b)) throw ValidationError("bihari_bound: need 0 < a < b");
  if (s < 2) throw ValidationError("bihari_bound: s must be >= 2");
  if (!(r0 > 0.0)) throw ValidationError("bihari_bound: r0 must be positive");
  const double k = a / b;
  return (2.0 * k / ipow(r0, s - 1) + std::log(1.0 / (1.0 - k))) / (b * k * k);
}

FlowComparison flow_vs_descent(const CVector& w0, const StudentSpec& student, const TeacherSpec& teacher,
                               double eta, int iterations, double delta) {
  if (!(eta > 0.0)) throw ValidationError("flow_vs_descent: eta must be positive");
  if (iterations < 1) throw ValidationError("flow_vs_descent: iterations must be >= 1");
  const int s = teacher.info_exponent;
  const double scale = 1.0 / (s * std::abs(teacher.alpha_s()));
  const Preconditioner& pre = student.preconditioner();

  FlowComparison out;
  out.descent.info_exponent = s;
  CVector w = w0;
  for (int n = 0; n <= iterations; ++n) {
    const SummaryStats st = summary_from_weights(w, student, teacher, delta);
    if (!(st.r <= 1e3 && st.v <= 1e3) || !std::isfinite(st.r) || !std::isfinite(st.v))
      throw NumericalError("flow_vs_descent: divergence at iteration " + std::to_string(n));
    out.descent.times.push_back(n * eta);
    out.descent.states.push_back(st);
    if (n == iterations) break;
    const CVector grad = wirtinger_gradient(LossKind::L, w, student, teacher, nullptr);
    w -= (eta * scale) * (pre.pinv_gram * grad);
  }

  // Dense output through Hermite interpolation, so the flow keeps its own step size.
  out.ode = integrate_flow(out.descent.states.front(), s, iterations * eta);
  for (std::size_t n = 0; n < out.descent.size(); ++n) {
    const double dev = std::abs(out.descent.states[n].r - out.ode.at(out.descent.times[n]).r);
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

bool cos_monotone(const Trajectory& traj, double tol) {
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (traj.states[i].cos_s_theta < traj.states[i - 1].cos_s_theta - tol) return false;
  return true;
}

bool r_in_unit_interval(const Trajectory& traj, double tol) {
  for (const auto& st : traj.states)
    if (st.r < -tol || st.r > 1.0 + tol) return false;
  return true;
}

}  // namespace symidx

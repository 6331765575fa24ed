#include "symidx/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "symidx/cue.hpp"
#include "symidx/init.hpp"
#include "symidx/rng.hpp"

namespace symidx {

namespace {

std::uint64_t run_seed(std::uint64_t base, int run_index) {
  return run_index == 0 ? base : derive_seed(base, static_cast<std::uint64_t>(run_index));
}

// z = P' c and P'^H q in the chosen precision.
class Design {
 public:
  Design(const CMatrix& projected, bool single) : single_(single) {
    if (single_) single_mat_ = projected.cast<std::complex<float>>();
    else double_mat_ = projected;
  }

  CVector apply(const CVector& c) const {
    if (!single_) return double_mat_ * c;
    const Eigen::VectorXcf cf = c.cast<std::complex<float>>();
    const Eigen::VectorXcf z = single_mat_ * cf;
    return z.cast<cplx>();
  }

  CVector apply_adjoint(const CVector& q) const {
    if (!single_) return double_mat_.adjoint() * q;
    const Eigen::VectorXcf qf = q.cast<std::complex<float>>();
    const Eigen::VectorXcf g = single_mat_.adjoint() * qf;
    return g.cast<cplx>();
  }

 private:
  bool single_;
  CMatrix double_mat_;
  Eigen::MatrixXcf single_mat_;
};

bool all_finite(const CVector& x) { return x.allFinite(); }

}  // namespace

void TrainConfig::validate() const {
  if (N < 1 || M < 1 || K < 1) throw ValidationError("train config: N, M, K must be >= 1");
  if (n_samples < 1) throw ValidationError("train config: n_samples must be >= 1");
  if (iterations < 1) throw ValidationError("train config: iterations must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("train config: learning_rate must be positive");
  if (record_every < 1) throw ValidationError("train config: record_every must be >= 1");
  if (alphas.size() < 1) throw ValidationError("train config: empty teacher coefficients");
  if (alphas.size() > isqrt(N)) throw RegimeError("train config: teacher degree exceeds floor(sqrt N)");
  if (K < isqrt(N)) throw RegimeError("train config: K shorter than the teacher support");
  if (!(success_threshold > 0.0 && success_threshold <= 1.0))
    throw ValidationError("train config: success_threshold must be in (0, 1]");
  if (activation != "experiment" && activation != "arctan")
    throw ValidationError("train config: unknown activation '" + activation + "'");
}

TrainConfig config_for_run(const TrainConfig& base, int run_index) {
  if (run_index < 0) throw ValidationError("config_for_run: negative run index");
  TrainConfig c = base;
  c.seed_weights = run_seed(base.seed_weights, run_index);
  c.seed_data = run_seed(base.seed_data, run_index);
  c.seed_hstar = run_seed(base.seed_hstar, run_index);
  return c;
}

Problem build_problem(const TrainConfig& config) {
  config.validate();
  Rng frozen_rng(config.seed_frozen);
  const CVector frozen = uniform_frozen_weights(config.M, frozen_rng);
  Rng hstar_rng(config.seed_hstar);
  const CVector h = random_h_star(config.N, hstar_rng);
  Problem p;
  p.teacher = make_teacher(h, config.alphas, config.N);
  p.student = build_A(make_activation(config.activation, config.N, config.K), frozen, config.K);
  attach_link(p.student, p.teacher, config.link_convention);
  p.delta = projection_deficiency(p.student, p.teacher.h_star);
  return p;
}

RunRecord train_gd(const TrainConfig& config) {
  const Problem problem = build_problem(config);
  Rng weight_rng(config.seed_weights);
  const InitDraw draw = init_weights(problem.student, weight_rng);
  return train_gd(config, problem, draw.w0);
}

RunRecord train_gd(const TrainConfig& config, const Problem& problem, const CVector& w0) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const StudentSpec& student = problem.student;
  const TeacherSpec& teacher = problem.teacher;
  if (w0.size() != student.width()) throw ValidationError("train_gd: w0 dimension mismatch");
  const Preconditioner& pre = student.preconditioner();
  const CMatrix& Ur = pre.range_basis;
  const int s = teacher.info_exponent;

  // Coordinates of u = A w in the orthonormal range basis; the update acts there as c <- c - eta Ur^H g.
  CMatrix projected;
  CVector labels;
  {
    const FeatureBatch batch =
        make_feature_batch(sample_batch(config.N, static_cast<std::size_t>(config.n_samples), config.seed_data),
                           teacher, student.depth());
    projected = batch.powersums * Ur;
    labels = batch.teacher_values;
  }
  const Design design(projected, config.single_precision_features);
  projected.resize(0, 0);
  const double n = static_cast<double>(config.n_samples);

  CVector h_pad = CVector::Zero(student.depth());
  h_pad.head(teacher.h_star.size()) = teacher.h_star;
  const CVector h_coords = Ur.adjoint() * h_pad;

  RunRecord rec;
  rec.config = config;
  rec.delta = problem.delta;
  rec.rank = pre.rank;

  CVector w = w0;
  CVector c = Ur.adjoint() * (student.A() * w);
  auto stats_of = [&](const CVector& coords) {
    SummaryStats st;
    st.m = h_coords.dot(coords);
    st.r = std::abs(st.m);
    st.cos_s_theta = st.r > 0.0 ? std::clamp(ipow(st.m / st.r, s).real(), -1.0, 1.0) : 1.0;
    st.v = coords.squaredNorm() - st.r * st.r;
    st.delta = problem.delta;
    return st;
  };

  for (int it = 0;; ++it) {
    const CVector z = design.apply(c);
    const bool record = it % config.record_every == 0 || it == config.iterations;
    const CorrelationEval corr = evaluate_correlation(config.loss_kind, z, labels, student, teacher, true);
    const double norm2 = c.squaredNorm();
    const double loss = corr.mean + regularizer_value(config.loss_kind, norm2, teacher);
    if (!std::isfinite(loss))
      throw NumericalError("train_gd: non-finite loss at iteration " + std::to_string(it));
    if (record) rec.trajectory.push_back({it, stats_of(c), loss});
    if (it == config.iterations) break;

    CVector gc = design.apply_adjoint(corr.weights) / (-n);
    gc += regularizer_slope(config.loss_kind, norm2, teacher) * c;
    if (!all_finite(gc)) throw NumericalError("train_gd: non-finite gradient at iteration " + std::to_string(it));
    const CVector dw = (-config.learning_rate) * (pre.coeff_map * gc);
    const CVector dc = (-config.learning_rate) * gc;
    if (it == 0 || it == config.iterations - 1) {
      // Image of the step through w-space versus the projected feature increment.
      const CVector du_w = student.A() * dw;
      const CVector du_f = Ur * dc;
      const cplx dm_gap = du_w.dot(h_pad) - du_f.dot(h_pad);
      const double dn_gap = (student.A() * (w + dw)).squaredNorm() - (Ur * (c + dc)).squaredNorm() -
                            ((student.A() * w).squaredNorm() - (Ur * c).squaredNorm());
      rec.projection_gap = std::max({rec.projection_gap, std::abs(dm_gap), std::abs(dn_gap)});
    }
    w += dw;
    c += dc;
    if (!all_finite(c) || c.squaredNorm() > 1e12)
      throw NumericalError("train_gd: iterate diverged at iteration " + std::to_string(it + 1));
  }
  rec.outcome = rec.trajectory.back().stats;
  rec.w_final = w;
  rec.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

GridResult lr_grid_search(const TrainConfig& config, const std::vector<double>& grid, int seeds) {
  if (grid.empty()) throw ValidationError("lr_grid_search: empty grid");
  if (seeds < 1) throw ValidationError("lr_grid_search: seeds must be >= 1");
  GridResult out;
  std::vector<double> rates = grid;
  std::sort(rates.begin(), rates.end());
  int best = -1;
  for (double rate : rates) {
    int ok = 0;
    int aborted = 0;
    for (int j = 0; j < seeds; ++j) {
      TrainConfig c = config_for_run(config, j);
      c.learning_rate = rate;
      try {
        if (train_gd(c).success()) ++ok;
      } catch (const NumericalError&) {
        ++aborted;
      }
    }
    out.rates.push_back(rate);
    out.successes.push_back(ok);
    out.aborted.push_back(aborted);
    if (ok > best) {
      best = ok;
      out.best_rate = rate;
    }
  }
  return out;
}

PhaseDurations search_descent_metrics(const RunRecord& record) {
  if (record.trajectory.empty()) throw ValidationError("search_descent_metrics: empty trajectory");
  const double r0 = record.r0();
  const double threshold = record.config.success_threshold;
  PhaseDurations out;
  std::size_t last = 0;
  for (std::size_t i = 0; i < record.trajectory.size(); ++i)
    if (record.trajectory[i].stats.r < 2.0 * r0) last = i;
  out.search_duration = record.trajectory[last].iteration;
  for (std::size_t i = last; i < record.trajectory.size(); ++i) {
    if (record.trajectory[i].stats.r >= threshold) {
      out.descent_duration = record.trajectory[i].iteration - out.search_duration;
      break;
    }
  }
  return out;
}

bool shows_dip_then_rise(const RunRecord& record) {
  if (!record.success()) return false;
  const double r0 = record.r0();
  for (const TrainPoint& p : record.trajectory) {
    if (p.stats.r >= record.config.success_threshold) return false;
    if (p.stats.r < r0) return true;
  }
  return false;
}

}  // namespace symidx

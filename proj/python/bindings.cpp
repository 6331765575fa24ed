#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "symidx/cue.hpp"
#include "symidx/dynamics.hpp"
#include "symidx/init.hpp"
#include "symidx/rng.hpp"
#include "symidx/sympoly.hpp"
#include "symidx/train.hpp"

namespace py = pybind11;
using namespace symidx;

namespace {

struct FlowResult {
  std::vector<double> t, r, cos_s_theta, v;
  std::vector<std::pair<std::string, double>> events;
  std::optional<double> stopping_time;
  std::size_t clamps = 0;
};

struct RunResult {
  std::vector<int> iteration;
  std::vector<double> r, cos_s_theta, v, emp_loss;
  double delta = 0.0;
  int rank = 0;
  bool success = false;
  CVector w_final;
};

}  // namespace

PYBIND11_MODULE(_symidx, m) {
  m.doc() = "Powersum features, CUE sampling, flow integration and preconditioned training.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::enum_<LossKind>(m, "LossKind").value("L", LossKind::L).value("Lhat", LossKind::Lhat);

  m.def("powersum", &powersum_eval, py::arg("k"), py::arg("x"), "k^{-1/2} sum_n x_n^k");
  m.def(
      "powersum_vector", [](const CVector& x, int depth) { return powersum_vector(x, depth).values; },
      py::arg("x"), py::arg("depth"));
  m.def(
      "sample_cue",
      [](int N, std::size_t count, std::uint64_t seed) {
        const auto batch = sample_batch(N, count, seed);
        CMatrix out(static_cast<Eigen::Index>(count), N);
        for (std::size_t i = 0; i < count; ++i) out.row(static_cast<Eigen::Index>(i)) = batch[i].points.transpose();
        return out;
      },
      py::arg("N"), py::arg("count"), py::arg("seed"), "count x N matrix of CUE eigenvalues");
  m.def(
      "hall_inner_product",
      [](std::vector<int> lambda, std::vector<int> mu, int N) {
        return hall_inner_product_exact(Partition(std::move(lambda)), Partition(std::move(mu)), N);
      },
      py::arg("lam"), py::arg("mu"), py::arg("N"));
  m.def("semigroup_exact", &semigroup_identity_exact, py::arg("h"), py::arg("h_tilde"), py::arg("k"), py::arg("l"));
  m.def(
      "semigroup_check",
      [](const CVector& h, const CVector& h_tilde, int k, int l, int N, std::size_t n, std::uint64_t seed) {
        const SemigroupCheck c = semigroup_identity_check(h, h_tilde, k, l, N, n, seed);
        return py::dict(py::arg("estimate") = c.lhs.estimate, py::arg("std_error") = c.lhs.std_error,
                        py::arg("exact") = c.rhs, py::arg("z_score") = c.z_score);
      },
      py::arg("h"), py::arg("h_tilde"), py::arg("k"), py::arg("l"), py::arg("N"), py::arg("n_samples"),
      py::arg("seed"));

  py::class_<FlowResult>(m, "FlowResult")
      .def_readonly("t", &FlowResult::t)
      .def_readonly("r", &FlowResult::r)
      .def_readonly("cos_s_theta", &FlowResult::cos_s_theta)
      .def_readonly("v", &FlowResult::v)
      .def_readonly("events", &FlowResult::events)
      .def_readonly("stopping_time", &FlowResult::stopping_time)
      .def_readonly("clamps", &FlowResult::clamps);
  m.def(
      "integrate_flow",
      [](int s, double r0, double cos_s_theta0, std::optional<double> v0, double delta, double horizon,
         std::optional<double> eps) {
        StepControl control;
        control.stop_at_accuracy = eps;
        const Trajectory tr =
            integrate_flow(make_state(r0, cos_s_theta0, v0.value_or(1.0 - r0 * r0), delta, s), s, horizon, control);
        FlowResult out;
        out.t = tr.times;
        for (const auto& st : tr.states) {
          out.r.push_back(st.r);
          out.cos_s_theta.push_back(st.cos_s_theta);
          out.v.push_back(st.v);
        }
        for (const auto& e : tr.events) out.events.emplace_back(e.label, e.time);
        if (eps) out.stopping_time = stopping_time(tr, *eps);
        out.clamps = tr.clamps.size();
        return out;
      },
      py::arg("s"), py::arg("r0"), py::arg("cos_s_theta0"), py::arg("v0") = py::none(), py::arg("delta") = 0.0,
      py::arg("horizon") = 1e4, py::arg("eps") = py::none());
  m.def("time_bound", &time_bound, py::arg("s"), py::arg("eps"), py::arg("r0"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("N", &TrainConfig::N)
      .def_readwrite("M", &TrainConfig::M)
      .def_readwrite("K", &TrainConfig::K)
      .def_readwrite("n_samples", &TrainConfig::n_samples)
      .def_readwrite("iterations", &TrainConfig::iterations)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("loss", &TrainConfig::loss_kind)
      .def_readwrite("activation", &TrainConfig::activation)
      .def_readwrite("alphas", &TrainConfig::alphas)
      .def_readwrite("seed_weights", &TrainConfig::seed_weights)
      .def_readwrite("seed_frozen", &TrainConfig::seed_frozen)
      .def_readwrite("seed_data", &TrainConfig::seed_data)
      .def_readwrite("seed_hstar", &TrainConfig::seed_hstar)
      .def_readwrite("record_every", &TrainConfig::record_every)
      .def_readwrite("success_threshold", &TrainConfig::success_threshold)
      .def_readwrite("single_precision_features", &TrainConfig::single_precision_features)
      .def("validate", &TrainConfig::validate)
      .def("for_run", &config_for_run, py::arg("run_index"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("iteration", &RunResult::iteration)
      .def_readonly("r", &RunResult::r)
      .def_readonly("cos_s_theta", &RunResult::cos_s_theta)
      .def_readonly("v", &RunResult::v)
      .def_readonly("emp_loss", &RunResult::emp_loss)
      .def_readonly("delta", &RunResult::delta)
      .def_readonly("rank", &RunResult::rank)
      .def_readonly("success", &RunResult::success)
      .def_readonly("w_final", &RunResult::w_final);
  m.def(
      "train",
      [](const TrainConfig& config) {
        RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = train_gd(config);
        }
        RunResult out;
        for (const TrainPoint& p : rec.trajectory) {
          out.iteration.push_back(p.iteration);
          out.r.push_back(p.stats.r);
          out.cos_s_theta.push_back(p.stats.cos_s_theta);
          out.v.push_back(p.stats.v);
          out.emp_loss.push_back(p.emp_loss);
        }
        out.delta = rec.delta;
        out.rank = rec.rank;
        out.success = rec.success();
        out.w_final = rec.w_final;
        return out;
      },
      py::arg("config"));

  m.def(
      "projection_deficiency", [](const TrainConfig& config) { return build_problem(config).delta; },
      py::arg("config"), "1 - ||P_A h*||^2 for the configured frozen layer and target");

  py::class_<InitReport>(m, "InitReport")
      .def_readonly("r0", &InitReport::r0)
      .def_readonly("cos_s_theta0", &InitReport::cos_s_theta0)
      .def_readonly("v0", &InitReport::v0)
      .def_readonly("delta", &InitReport::delta)
      .def_readonly("sigma1_X", &InitReport::sigma1_X)
      .def_readonly("sigmaN_X", &InitReport::sigmaN_X)
      .def_readonly("predicted_r0_lower", &InitReport::predicted_r0_lower);
  m.def(
      "init_report",
      [](const TrainConfig& config) {
        const Problem p = build_problem(config);
        Rng rng(config.seed_weights);
        return init_stats(init_weights(p.student, rng), p.student, p.teacher);
      },
      py::arg("config"));
  m.def(
      "vandermonde_diagnostics",
      [](const CVector& frozen, int N) {
        const VandermondeReport rep = vandermonde_diagnostics(frozen, N);
        return py::dict(py::arg("sigma1") = rep.sigma1, py::arg("sigmaN") = rep.sigmaN,
                        py::arg("duplicates") = rep.duplicates);
      },
      py::arg("frozen"), py::arg("N"));
}

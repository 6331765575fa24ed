#include "symidx/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace symidx {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) throw ValidationError("invalid number '" + text + "'");
  return x;
}

Json complex_to_json(const CVector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(Json::array({v[i].real(), v[i].imag()}));
  return arr;
}

CVector complex_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + ": expected an array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    if (e.is_number()) {
      v[static_cast<Eigen::Index>(i)] = cplx(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      v[static_cast<Eigen::Index>(i)] = cplx(e[0].get<double>(), e[1].get<double>());
    } else {
      throw ValidationError(what + ": entry " + std::to_string(i) + " is not [re, im]");
    }
  }
  return v;
}

ModelFile describe_model(const StudentSpec& student, const TeacherSpec& teacher, std::uint64_t seed) {
  const auto& act = student.activation();
  if (!act) throw ValidationError("describe_model: student was not built from an activation");
  ModelFile m;
  m.N = teacher.dimension;
  m.M = student.width();
  m.K = student.depth();
  m.activation = act->name;
  m.activation_param = act->param;
  if (act->kind == ActivationKind::Custom) m.custom_coeffs = act->coeffs;
  m.frozen_weights = student.frozen_weights();
  m.h_star = teacher.h_star;
  m.alphas = teacher.alphas;
  m.seed = seed;
  return m;
}

Json model_to_json(const ModelFile& m) {
  Json params = Json::object();
  if (m.activation == "custom") params["coeffs"] = complex_to_json(m.custom_coeffs);
  else params[m.activation == "arctan" ? "xi" : "q"] = m.activation_param;
  Json j;
  j["N"] = m.N;
  j["M"] = m.M;
  j["K"] = m.K;
  j["activation"] = {{"name", m.activation}, {"params", params}};
  j["frozen_weights"] = complex_to_json(m.frozen_weights);
  j["h_star"] = complex_to_json(m.h_star);
  j["alphas"] = complex_to_json(m.alphas);
  j["seed"] = m.seed;
  return j;
}

ModelFile model_from_json(const Json& j) {
  static const char* keys[] = {"N", "M", "K", "activation", "frozen_weights", "h_star", "alphas", "seed"};
  if (!j.is_object()) throw ValidationError("model file: expected a JSON object");
  for (const char* k : keys)
    if (!j.contains(k)) throw ValidationError(std::string("model file: missing '") + k + "'");
  try {
    ModelFile m;
    m.N = j.at("N").get<int>();
    m.M = j.at("M").get<int>();
    m.K = j.at("K").get<int>();
    const Json& act = j.at("activation");
    m.activation = act.at("name").get<std::string>();
    const Json& params = act.contains("params") ? act.at("params") : Json::object();
    if (m.activation == "custom") m.custom_coeffs = complex_from_json(params.at("coeffs"), "activation.coeffs");
    else if (params.contains("xi")) m.activation_param = params.at("xi").get<double>();
    else if (params.contains("q")) m.activation_param = params.at("q").get<double>();
    m.frozen_weights = complex_from_json(j.at("frozen_weights"), "frozen_weights");
    m.h_star = complex_from_json(j.at("h_star"), "h_star");
    m.alphas = complex_from_json(j.at("alphas"), "alphas");
    m.seed = j.at("seed").get<std::uint64_t>();
    if (m.frozen_weights.size() != m.M) throw ValidationError("model file: frozen_weights length differs from M");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

Problem problem_from_model(const ModelFile& m, LinkConvention convention) {
  Problem p;
  p.teacher = make_teacher(m.h_star, m.alphas, m.N);
  const ActivationSpec act = make_activation(m.activation, m.N, m.K, m.custom_coeffs);
  if (m.activation != "custom" && act.param != m.activation_param)
    throw ValidationError("model file: activation parameter does not match N");
  p.student = build_A(act, m.frozen_weights, m.K);
  attach_link(p.student, p.teacher, convention);
  p.delta = projection_deficiency(p.student, p.teacher.h_star);
  return p;
}

namespace {

// JSON number, or null for NaN and infinities.
Json real_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json stats_to_json(const SummaryStats& s) {
  return {{"r", s.r}, {"cos_s_theta", s.cos_s_theta}, {"v", s.v}, {"m", {s.m.real(), s.m.imag()}},
          {"delta", s.delta}};
}

}  // namespace

Json init_report_to_json(const InitReport& r) {
  Json j;
  j["r0"] = r.r0;
  j["cos_s_theta0"] = r.cos_s_theta0;
  j["v0"] = r.v0;
  j["delta"] = r.delta;
  j["norm_Aw_pre_normalization"] = r.norm_Aw_pre_normalization;
  j["sigma1_X"] = real_or_null(r.sigma1_X);
  j["sigmaN_X"] = real_or_null(r.sigmaN_X);
  j["w_norm"] = r.w_norm;
  j["predicted_r0_lower"] = real_or_null(r.predicted_r0_lower);
  return j;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,r,cos_s_theta,v,m_re,m_im\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SummaryStats& s = traj.states[i];
    out << format_double(traj.times[i]) << ',' << format_double(s.r) << ',' << format_double(s.cos_s_theta) << ','
        << format_double(s.v) << ',' << format_double(s.m.real()) << ',' << format_double(s.m.imag()) << '\n';
  }
}

Json events_to_json(const Trajectory& traj) {
  Json events = Json::array();
  for (const auto& e : traj.events) events.push_back({{"label", e.label}, {"time", e.time}});
  Json clamps = Json::array();
  for (const auto& c : traj.clamps)
    clamps.push_back({{"time", c.time}, {"variable", c.variable}, {"magnitude", c.magnitude}});
  return {{"events", events}, {"clamps", clamps}, {"rejected_steps", traj.rejected_steps}};
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  out << "iter,r,cos_s_theta,v,emp_loss\n";
  for (const TrainPoint& p : record.trajectory) {
    out << p.iteration << ',' << format_double(p.stats.r) << ',' << format_double(p.stats.cos_s_theta) << ','
        << format_double(p.stats.v) << ',' << format_double(p.emp_loss) << '\n';
  }
}

Json train_config_to_json(const TrainConfig& c) {
  Json j;
  j["N"] = c.N;
  j["M"] = c.M;
  j["K"] = c.K;
  j["n_samples"] = c.n_samples;
  j["iterations"] = c.iterations;
  j["learning_rate"] = c.learning_rate;
  j["loss"] = loss_kind_name(c.loss_kind);
  j["activation"] = c.activation;
  j["alphas"] = complex_to_json(c.alphas);
  j["link_convention"] = c.link_convention == LinkConvention::Theory ? "theory" : "experiment";
  j["seed_weights"] = c.seed_weights;
  j["seed_frozen"] = c.seed_frozen;
  j["seed_data"] = c.seed_data;
  j["seed_hstar"] = c.seed_hstar;
  j["record_every"] = c.record_every;
  j["success_threshold"] = c.success_threshold;
  j["design_precision"] = c.single_precision_features ? "single" : "double";
  return j;
}

Json run_sidecar_json(const RunRecord& rec) {
  const PhaseDurations phases = search_descent_metrics(rec);
  Json j;
  j["config"] = train_config_to_json(rec.config);
  j["outcome"] = stats_to_json(rec.outcome);
  j["initial"] = stats_to_json(rec.trajectory.front().stats);
  j["success"] = rec.success();
  j["dip_then_rise"] = shows_dip_then_rise(rec);
  j["search_duration"] = phases.search_duration;
  j["descent_duration"] = phases.descent_duration ? Json(*phases.descent_duration) : Json(nullptr);
  j["delta"] = rec.delta;
  j["rank"] = rec.rank;
  j["projection_gap"] = rec.projection_gap;
  j["initial_loss"] = rec.trajectory.front().emp_loss;
  j["final_loss"] = rec.trajectory.back().emp_loss;
  j["wallclock_seconds"] = rec.wallclock;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

Json manifest_to_json(const RunManifest& m) {
  Json arts = Json::array();
  for (const auto& [name, sum] : m.artifacts) arts.push_back({{"file", name}, {"fnv1a64", sum}});
  return {{"command", m.command}, {"config_path", m.config_path}, {"seeds", m.seeds},
          {"output_dir", m.output_dir}, {"artifacts", arts}};
}

}  // namespace symidx

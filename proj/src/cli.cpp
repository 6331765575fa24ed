#include "symidx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "symidx/cue.hpp"
#include "symidx/dynamics.hpp"
#include "symidx/init.hpp"
#include "symidx/rng.hpp"

namespace fs = std::filesystem;

namespace symidx {

namespace {

// Key-checked view of a config object.
class Fields {
 public:
  Fields(const Json& j, const std::string& what) : j_(j), what_(what) {
    if (!j.is_object()) throw ValidationError(what + " config: expected a JSON object");
    if (!j.contains("schema_version")) throw ValidationError(what + " config: missing schema_version");
    const Json& v = j.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
      throw ValidationError(what + " config: unsupported schema_version (expected " +
                            std::to_string(kSchemaVersion) + ")");
    seen_.insert("schema_version");
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      target = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(what_ + " config: bad value for '" + key + "'");
    }
  }

  void read_complex(const std::string& key, CVector& target) {
    seen_.insert(key);
    if (j_.contains(key)) target = complex_from_json(j_.at(key), what_ + "." + key);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const Json& at(const std::string& key) const { return j_.at(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(what_ + " config: unknown key '" + it.key() + "'");
  }

 private:
  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Partition partition_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("orthogonality config: a partition must be an array of parts");
  std::vector<int> parts;
  for (const Json& p : j) {
    if (!p.is_number_integer()) throw ValidationError("orthogonality config: partition parts must be integers");
    parts.push_back(p.get<int>());
  }
  return Partition(parts);
}

std::uint64_t seed_for(std::uint64_t base, int index) {
  return index == 0 ? base : derive_seed(base, static_cast<std::uint64_t>(index));
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

Json quantiles(const std::vector<double>& xs) {
  return {{"min", quantile(xs, 0.0)}, {"q05", quantile(xs, 0.05)}, {"median", quantile(xs, 0.5)},
          {"q95", quantile(xs, 0.95)}, {"max", quantile(xs, 1.0)}};
}

Json cplx_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json load_config(const CommandOptions& opts) {
  if (!opts.config_path) return Json{{"schema_version", kSchemaVersion}};
  return read_json_file(*opts.config_path);
}

class Output {
 public:
  Output(const CommandOptions& opts, const std::string& command) : dir_(opts.out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir_.string() + "'");
    manifest_.command = command;
    manifest_.config_path = opts.config_path.value_or("");
    manifest_.output_dir = dir_.string();
  }

  void write(const std::string& name, const std::string& text) {
    write_text_file(dir_ / name, text);
    manifest_.artifacts.emplace_back(name, fnv1a64_hex(text));
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  RunManifest& manifest() { return manifest_; }
  void finish() { write_text_file(dir_ / "manifest.json", manifest_to_json(manifest_).dump(2) + "\n"); }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

void say(const CommandOptions& opts, const std::string& line) {
  if (!opts.quiet) std::cout << line << '\n';
}

}  // namespace

OrthogonalityConfig parse_orthogonality_config(const Json& j) {
  Fields f(j, "orthogonality");
  OrthogonalityConfig c;
  f.read("N", c.N);
  f.read("n_samples", c.n_samples);
  f.read("seed", c.seed);
  f.read("max_degree", c.max_degree);
  f.read("z_threshold", c.z_threshold);
  if (f.has("partitions")) {
    for (const Json& pair : f.at("partitions")) {
      if (!pair.is_array() || pair.size() != 2)
        throw ValidationError("orthogonality config: partitions entries must be [lambda, mu]");
      c.partitions.emplace_back(partition_from_json(pair[0]), partition_from_json(pair[1]));
    }
  }
  if (f.has("semigroup")) {
    for (const Json& e : f.at("semigroup")) {
      SemigroupRequest r;
      if (!e.is_object() || !e.contains("h") || !e.contains("h_tilde"))
        throw ValidationError("orthogonality config: semigroup entries need h and h_tilde");
      for (auto it = e.begin(); it != e.end(); ++it)
        if (it.key() != "h" && it.key() != "h_tilde" && it.key() != "k" && it.key() != "l")
          throw ValidationError("orthogonality config: unknown semigroup key '" + it.key() + "'");
      r.h = complex_from_json(e.at("h"), "semigroup.h");
      r.h_tilde = complex_from_json(e.at("h_tilde"), "semigroup.h_tilde");
      r.k = e.value("k", 1);
      r.l = e.value("l", 1);
      c.semigroup.push_back(r);
    }
  }
  f.finish();
  if (c.N < 1) throw ValidationError("orthogonality config: N must be >= 1");
  if (c.n_samples < 2) throw ValidationError("orthogonality config: n_samples must be >= 2");
  if (c.max_degree < 0) throw ValidationError("orthogonality config: max_degree must be >= 0");
  if (c.max_degree > c.N) throw RegimeError("orthogonality config: max_degree exceeds N");
  for (const auto& [a, b] : c.partitions) hall_inner_product_exact(a, b, c.N);
  for (const auto& r : c.semigroup) {
    if (r.k < 1 || r.l < 1) throw ValidationError("orthogonality config: semigroup exponents must be >= 1");
    require_low_support(r.h, c.N, "semigroup h");
    if (std::max(r.k, r.l) > isqrt(c.N)) throw RegimeError("orthogonality config: exponent exceeds floor(sqrt N)");
  }
  return c;
}

FlowConfig parse_flow_config(const Json& j) {
  Fields f(j, "flow");
  FlowConfig c;
  f.read("s", c.s);
  f.read("delta", c.delta);
  f.read("r0", c.r0);
  f.read("cos_s_theta0", c.cos_s_theta0);
  if (f.has("v0")) {
    double v = 0.0;
    f.read("v0", v);
    c.v0 = v;
  }
  f.read("eps", c.eps);
  f.read("horizon", c.horizon);
  f.read("max_step", c.max_step);
  f.finish();
  if (c.s < 1) throw ValidationError("flow config: s must be >= 1");
  if (!(c.r0 > 0.0 && c.r0 <= 1.0)) throw ValidationError("flow config: r0 must be in (0, 1]");
  if (!(std::abs(c.cos_s_theta0) <= 1.0)) throw ValidationError("flow config: |cos_s_theta0| must be <= 1");
  if (!(c.delta >= 0.0 && c.delta < 1.0)) throw ValidationError("flow config: delta must be in [0, 1)");
  if (c.v0 && !(*c.v0 >= 0.0)) throw ValidationError("flow config: v0 must be >= 0");
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ValidationError("flow config: eps must be in (0, 1)");
  if (!(c.horizon > 0.0)) throw ValidationError("flow config: horizon must be positive");
  if (!(c.max_step > 0.0)) throw ValidationError("flow config: max_step must be positive");
  return c;
}

TrainConfig parse_train_config(const Json& j) {
  Fields f(j, "train");
  TrainConfig c;
  f.read("N", c.N);
  f.read("M", c.M);
  f.read("K", c.K);
  f.read("n_samples", c.n_samples);
  f.read("iterations", c.iterations);
  f.read("learning_rate", c.learning_rate);
  std::string loss = loss_kind_name(c.loss_kind);
  f.read("loss", loss);
  c.loss_kind = parse_loss_kind(loss);
  f.read("activation", c.activation);
  f.read_complex("alphas", c.alphas);
  std::string convention = "theory";
  f.read("link_convention", convention);
  if (convention == "theory") c.link_convention = LinkConvention::Theory;
  else if (convention == "experiment") c.link_convention = LinkConvention::Experiment;
  else throw ValidationError("train config: link_convention must be 'theory' or 'experiment'");
  f.read("seed_weights", c.seed_weights);
  f.read("seed_frozen", c.seed_frozen);
  f.read("seed_data", c.seed_data);
  f.read("seed_hstar", c.seed_hstar);
  f.read("record_every", c.record_every);
  f.read("success_threshold", c.success_threshold);
  std::string precision = "single";
  f.read("design_precision", precision);
  if (precision != "single" && precision != "double")
    throw ValidationError("train config: design_precision must be 'single' or 'double'");
  c.single_precision_features = precision == "single";
  f.finish();
  c.validate();
  return c;
}

InitDiagConfig parse_init_diag_config(const Json& j) {
  Fields f(j, "init-diag");
  InitDiagConfig c;
  f.read("N", c.N);
  f.read("M", c.M);
  f.read("K", c.K);
  f.read("activation", c.activation);
  f.read_complex("alphas", c.alphas);
  f.read("seed_frozen", c.seed_frozen);
  f.read("seed_hstar", c.seed_hstar);
  f.read("seed_weights", c.seed_weights);
  f.read("seeds", c.seeds);
  f.read("vary_frozen", c.vary_frozen);
  f.finish();
  if (c.N < 1 || c.M < 1 || c.K < 1) throw ValidationError("init-diag config: N, M, K must be >= 1");
  if (c.seeds < 1) throw ValidationError("init-diag config: seeds must be >= 1");
  if (c.alphas.size() > isqrt(c.N)) throw RegimeError("init-diag config: teacher degree exceeds floor(sqrt N)");
  return c;
}

int cmd_orthogonality(const CommandOptions& opts) {
  OrthogonalityConfig c = parse_orthogonality_config(load_config(opts));
  if (opts.seeds) c.seed = static_cast<std::uint64_t>(*opts.seeds);
  Output out(opts, "orthogonality");
  out.manifest().seeds = {{"seed", c.seed}};

  int depth = c.max_degree;
  for (const auto& [a, b] : c.partitions)
    for (const Partition* p : {&a, &b})
      for (int part : p->parts()) depth = std::max(depth, part);
  for (const auto& r : c.semigroup) depth = std::max<int>(depth, static_cast<int>(r.h_tilde.size()));
  depth = std::max(depth, 1);

  const auto batch = sample_batch(c.N, static_cast<std::size_t>(c.n_samples), c.seed);
  std::vector<CVector> p(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) p[i] = powersum_vector(batch[i].points, depth).values;

  auto estimate = [&](const std::function<cplx(const CVector&)>& f, const std::function<cplx(const CVector&)>& g) {
    std::vector<cplx> vals(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) vals[i] = f(p[i]) * std::conj(g(p[i]));
    return mean_with_stderr(vals);
  };

  Json checks = Json::array();
  double worst = 0.0;
  auto add = [&](const std::string& kind, const Json& labels, const McEstimate& est, cplx exact) {
    const double z = est.z_score(exact);
    worst = std::max(worst, z);
    checks.push_back({{"kind", kind}, {"labels", labels}, {"estimate", cplx_json(est.estimate)},
                      {"std_error", est.std_error}, {"exact", cplx_json(exact)}, {"z_score", z}});
  };

  for (int k = 1; k <= c.max_degree; ++k) {
    for (int l = 1; l <= c.max_degree; ++l) {
      const McEstimate est = estimate([k](const CVector& v) { return v[k - 1]; },
                                      [l](const CVector& v) { return v[l - 1]; });
      add("powersum", Json::array({k, l}), est, cplx(k == l ? 1.0 : 0.0, 0.0));
    }
  }
  for (const auto& [a, b] : c.partitions) {
    const double exact = static_cast<double>(hall_inner_product_exact(a, b, c.N));
    auto prod = [](const Partition& lam) {
      return [lam](const CVector& v) {
        cplx acc{1.0, 0.0};
        for (int part : lam.parts()) acc *= v[part - 1];
        return acc;
      };
    };
    add("partition", Json::array({a.parts(), b.parts()}), estimate(prod(a), prod(b)), cplx(exact, 0.0));
  }
  for (const auto& r : c.semigroup) {
    auto pair = [](const CVector& h, int e) {
      return [h, e](const CVector& v) {
        cplx acc{0.0, 0.0};
        for (Eigen::Index i = 0; i < h.size(); ++i) acc += h[i] * v[i];
        return ipow(acc, e);
      };
    };
    add("semigroup", Json::array({r.k, r.l}), estimate(pair(r.h, r.k), pair(r.h_tilde, r.l)),
        semigroup_identity_exact(r.h, r.h_tilde, r.k, r.l));
  }

  const bool pass = worst <= c.z_threshold;
  Json report = {{"N", c.N},           {"n_samples", c.n_samples}, {"seed", c.seed},
                 {"z_threshold", c.z_threshold}, {"max_z_score", worst}, {"pass", pass},
                 {"checks", checks}};
  out.write_json("orthogonality.json", report);
  out.finish();
  std::ostringstream line;
  line << "orthogonality: " << checks.size() << " checks, max z = " << worst << (pass ? " (pass)" : " (FAIL)");
  say(opts, line.str());
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_flow(const CommandOptions& opts) {
  const FlowConfig c = parse_flow_config(load_config(opts));
  Output out(opts, "flow");
  const double v0 = c.v0.value_or(1.0 - c.r0 * c.r0);
  StepControl control;
  control.max_step = c.max_step;
  control.stop_at_accuracy = c.eps;
  const Trajectory traj = integrate_flow(make_state(c.r0, c.cos_s_theta0, v0, c.delta, c.s), c.s, c.horizon, control);
  const auto t_stop = stopping_time(traj, c.eps);

  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  out.write("trajectory.csv", csv.str());
  Json report = events_to_json(traj);
  report["stopping_time"] = t_stop ? Json(*t_stop) : Json(nullptr);
  report["time_bound"] = time_bound(c.s, c.eps, c.r0);
  report["cos_monotone"] = cos_monotone(traj);
  report["r_in_unit_interval"] = r_in_unit_interval(traj);
  report["final_state"] = {{"t", traj.times.back()}, {"r", traj.back().r},
                           {"cos_s_theta", traj.back().cos_s_theta}, {"v", traj.back().v}};
  out.write_json("events.json", report);
  out.finish();
  std::ostringstream line;
  line << "flow: " << traj.size() << " steps, stopping time ";
  if (t_stop) line << *t_stop;
  else line << "not reached by t = " << c.horizon;
  say(opts, line.str());
  return kExitOk;
}

int cmd_train(const CommandOptions& opts) {
  TrainConfig base = parse_train_config(load_config(opts));
  if (opts.reference_preset) {
    const TrainConfig preset;
    base.N = preset.N;
    base.M = preset.M;
    base.K = preset.K;
    base.alphas = preset.alphas;
    base.activation = preset.activation;
    base.n_samples = preset.n_samples;
    base.iterations = preset.iterations;
    base.learning_rate = preset.learning_rate;
  }
  if (opts.loss) base.loss_kind = *opts.loss;
  base.validate();
  const int runs = opts.seeds.value_or(1);
  if (runs < 1) throw ValidationError("--seeds must be >= 1");

  Output out(opts, "train");
  Json seeds = Json::array();
  Json per_run = Json::array();
  int successes = 0;
  int dips = 0;
  std::vector<double> terminal;
  for (int j = 0; j < runs; ++j) {
    const TrainConfig cfg = config_for_run(base, j);
    seeds.push_back({{"seed_weights", cfg.seed_weights}, {"seed_frozen", cfg.seed_frozen},
                     {"seed_data", cfg.seed_data}, {"seed_hstar", cfg.seed_hstar}});
    const RunRecord rec = train_gd(cfg);
    std::ostringstream csv;
    write_run_csv(csv, rec);
    const std::string stem = "run_" + std::to_string(j);
    out.write(stem + ".csv", csv.str());
    const Json side = run_sidecar_json(rec);
    out.write_json(stem + ".json", side);
    successes += rec.success() ? 1 : 0;
    dips += shows_dip_then_rise(rec) ? 1 : 0;
    terminal.push_back(rec.outcome.r);
    per_run.push_back({{"run", j}, {"terminal_r", rec.outcome.r}, {"success", rec.success()},
                       {"dip_then_rise", shows_dip_then_rise(rec)}, {"search_duration", side["search_duration"]},
                       {"descent_duration", side["descent_duration"]}});
    std::ostringstream line;
    line << "train[" << loss_kind_name(cfg.loss_kind) << "] run " << j << ": r " << rec.r0() << " -> "
         << rec.outcome.r << " (" << rec.wallclock << " s)";
    say(opts, line.str());
  }
  out.manifest().seeds = seeds;
  Json summary = {{"loss", loss_kind_name(base.loss_kind)}, {"runs", runs}, {"successes", successes},
                  {"stalled", runs - successes}, {"dip_then_rise", dips}, {"terminal_r", quantiles(terminal)},
                  {"per_run", per_run}};
  int code = kExitOk;
  if (opts.reference_preset) {
    bool pass;
    if (base.loss_kind == LossKind::L) pass = 10 * successes >= 6 * runs && dips == successes;
    else pass = runs - successes >= 1;
    summary["reproduction_check"] = pass;
    if (!pass) code = kExitCheckFailed;
  }
  out.write_json("summary.json", summary);
  out.finish();
  std::ostringstream line;
  line << "train: " << successes << "/" << runs << " runs reached r >= " << base.success_threshold;
  say(opts, line.str());
  return code;
}

int cmd_init_diag(const CommandOptions& opts) {
  InitDiagConfig c = parse_init_diag_config(load_config(opts));
  if (opts.seeds) c.seeds = *opts.seeds;
  if (c.seeds < 1) throw ValidationError("--seeds must be >= 1");
  Output out(opts, "init-diag");
  out.manifest().seeds = {{"seed_frozen", c.seed_frozen}, {"seed_hstar", c.seed_hstar},
                          {"seed_weights", c.seed_weights}, {"seeds", c.seeds}};

  auto build_student = [&](std::uint64_t frozen_seed) {
    Rng rng(frozen_seed);
    const CVector frozen = uniform_frozen_weights(c.M, rng);
    return build_A(make_activation(c.activation, c.N, c.K), frozen, c.K);
  };
  StudentSpec student = build_student(c.seed_frozen);

  Json reports = Json::array();
  std::vector<double> deltas, sigma_ratio;
  int cos_hits = 0;
  double worst_v_gap = 0.0;
  for (int j = 0; j < c.seeds; ++j) {
    if (c.vary_frozen && j > 0) student = build_student(seed_for(c.seed_frozen, j));
    Rng hrng(seed_for(c.seed_hstar, j));
    const TeacherSpec teacher = make_teacher(random_h_star(c.N, hrng), c.alphas, c.N);
    Rng wrng(seed_for(c.seed_weights, j));
    const InitDraw draw = init_weights(student, wrng);
    const InitReport rep = init_stats(draw, student, teacher);
    if (j == 0) out.write_json("model.json", model_to_json(describe_model(student, teacher, c.seed_frozen)));
    reports.push_back(init_report_to_json(rep));
    deltas.push_back(rep.delta);
    if (std::isfinite(rep.sigmaN_X)) sigma_ratio.push_back(rep.sigmaN_X / std::sqrt(static_cast<double>(c.M)));
    cos_hits += rep.cos_s_theta0 >= 0.5 ? 1 : 0;
    worst_v_gap = std::max(worst_v_gap, std::abs(rep.v0 - (1.0 - rep.r0 * rep.r0)));
  }
  out.write_json("init_reports.json", reports);
  std::ostringstream line;
  if (c.seeds > 1) {
    Json summary = {{"seeds", c.seeds},
                    {"info_exponent", information_exponent(c.alphas)},
                    {"cos_ge_half_frequency", static_cast<double>(cos_hits) / c.seeds},
                    {"delta", quantiles(deltas)},
                    {"max_v0_identity_gap", worst_v_gap}};
    if (!sigma_ratio.empty()) summary["sigmaN_over_sqrtM"] = quantiles(sigma_ratio);
    out.write_json("summary.json", summary);
    line << "init-diag: " << c.seeds << " seeds, P(cos >= 1/2) = " << static_cast<double>(cos_hits) / c.seeds
         << ", max delta = " << quantile(deltas, 1.0);
  } else {
    line << "init-diag: r0 = " << reports[0]["r0"] << ", delta = " << deltas[0];
  }
  out.finish();
  say(opts, line.str());
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"symidx: powersum single-index models on the unitary spectrum"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::string loss;
  int seeds = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seeds", seeds, "number of seeds / runs")->check(CLI::PositiveNumber);
    sub->add_flag("--reproduce-paper", opts.reference_preset, "pin the reference experiment settings");
    sub->add_option("--loss", loss, "loss kind")->check(CLI::IsMember({"L", "Lhat"}));
    sub->add_flag("--quiet", opts.quiet, "suppress progress output");
  };
  CLI::App* ortho = app.add_subcommand("orthogonality", "Monte Carlo checks of powersum orthogonality");
  CLI::App* flow = app.add_subcommand("flow", "integrate the summary-statistic flow");
  CLI::App* train = app.add_subcommand("train", "empirical preconditioned gradient descent");
  CLI::App* init = app.add_subcommand("init-diag", "initialization and projection diagnostics");
  for (CLI::App* sub : {ortho, flow, train, init}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (seeds > 0) opts.seeds = seeds;
  try {
    if (!loss.empty()) opts.loss = parse_loss_kind(loss);
    if (ortho->parsed()) return cmd_orthogonality(opts);
    if (flow->parsed()) return cmd_flow(opts);
    if (train->parsed()) return cmd_train(opts);
    return cmd_init_diag(opts);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace symidx

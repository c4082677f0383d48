#include "qoct/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "qoct/artifact.hpp"
#include "qoct/config.hpp"

namespace qoct {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

double rad_ns_to_mhz(double w) { return w / kTwoPi * 1e3; }

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 1;
  std::string run_id;
};

struct RunContext {
  ExperimentConfig config;
  fs::path run_dir;
  std::string run_id;
  std::string command;
  int threads = 1;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

RunContext make_run_context(const GlobalOptions& g, const std::string& command) {
  RunContext rc;
  rc.command = command;
  rc.config = g.config_path.empty() ? ExperimentConfig::defaults()
                                    : ExperimentConfig::load(g.config_path);
  if (g.seed) rc.config.cost.seed = *g.seed;
  rc.config.validate();
  rc.threads = g.threads;

  std::string out = g.out_dir;
  if (out.empty()) {
    const char* env = std::getenv("QOCT_OUT");
    out = env != nullptr && *env != '\0' ? env : "out";
  }
  rc.run_id = g.run_id.empty() ? command + "-" + std::to_string(rc.config.cost.seed) : g.run_id;
  rc.run_dir = fs::path(out) / rc.run_id;
  fs::create_directories(rc.run_dir);
  return rc;
}

void save(RunContext& rc, const std::string& name, const std::string& content) {
  write_text_atomic(rc.run_dir / name, content);
  rc.outputs.push_back(name);
}

// Writes the run manifest (stable content) and the wall-time report (kept in
// its own file so result artifacts hash identically across reruns).
void finish_run(RunContext& rc) {
  rc.outputs.push_back("run.json");
  ordered_json manifest{{"run_id", rc.run_id},
                        {"command", rc.command},
                        {"seed", rc.config.cost.seed},
                        {"outputs", rc.outputs},
                        {"config", ordered_json::parse(rc.config.to_json_text())}};
  write_text_atomic(rc.run_dir / "run.json", manifest.dump(2) + "\n");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - rc.started).count();
  ordered_json timing{{"wall_seconds", wall}};
  write_text_atomic(rc.run_dir / "timings.json", timing.dump(2) + "\n");
  std::cout << "run " << rc.run_id << ": wrote " << rc.outputs.size() << " files to "
            << rc.run_dir.string() << "\n";
}

CostContext make_cost_context(const ExperimentConfig& cfg, const CliffordTable& table) {
  CostContext ctx;
  ctx.device = cfg.device_config();
  ctx.noise = cfg.noise_model();
  ctx.rise_time = cfg.filter.rise_time_ns;
  ctx.ssb_nominal = cfg.ssb_nominal();
  ctx.dephasing_scale = cfg.noise.dephasing_k;
  ctx.drag_sigma = cfg.drag_sigma();
  ctx.drag_samples = cfg.drag.n_samples;
  ctx.table = &table;
  return ctx;
}

std::string best_params_text(const ParameterSet& best, double cost) {
  ordered_json j;
  j["stage"] = best.stage == ParameterSet::Stage::Drag ? "drag" : "pwc";
  j["cost"] = cost;
  j["amplitude_rad_ns"] = best.amplitude();
  j["beta"] = best.beta();
  j["ssb_freq_mhz"] = rad_ns_to_mhz(best.ssb_frequency());
  std::vector<double> values(best.values.data(), best.values.data() + best.values.size());
  j["values"] = values;
  return j.dump(2) + "\n";
}

ParameterSet load_best_params(const fs::path& path_or_dir, ParameterSet::Stage expected) {
  fs::path path = path_or_dir;
  if (fs::is_directory(path)) path /= "best_params.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stage artifact '" + path.string() + "'");
  ordered_json j;
  ParameterSet p;
  try {
    in >> j;
    std::string stage = j.at("stage").get<std::string>();
    p.stage = stage == "pwc" ? ParameterSet::Stage::Pwc : ParameterSet::Stage::Drag;
    auto values = j.at("values").get<std::vector<double>>();
    p.values = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
  } catch (const ordered_json::exception& e) {
    throw ConfigError("bad stage artifact '" + path.string() + "': " + e.what());
  }
  if (p.stage != expected) throw ConfigError("stage artifact '" + path.string() + "' has wrong stage");
  if (p.values.size() < 3) throw ConfigError("stage artifact '" + path.string() + "' is incomplete");
  return p;
}

void save_optimization_outputs(RunContext& rc, const OptimizationTrace& trace,
                               const std::string& prefix) {
  write_trace_jsonl(rc.run_dir / (prefix + "trace.jsonl"), trace);
  rc.outputs.push_back(prefix + "trace.jsonl");
  write_candidates_csv(rc.run_dir / (prefix + "candidates.csv"), trace);
  rc.outputs.push_back(prefix + "candidates.csv");
}

void save_pulse_outputs(RunContext& rc, const SampledPulse& pulse, const std::string& csv_name,
                        const std::string& description, double ssb_abs) {
  write_pulse(rc.run_dir / csv_name, pulse, description);
  rc.outputs.push_back(csv_name);
  rc.outputs.push_back(fs::path(csv_name).replace_extension(".json").string());

  CarrierConfig carrier;
  carrier.ssb_frequency = ssb_abs;
  std::string awg_name = fs::path(csv_name).stem().string() + "_awg.csv";
  write_awg(rc.run_dir / awg_name, export_awg(pulse, carrier));
  rc.outputs.push_back(awg_name);
}

int cmd_simulate_pulse(const GlobalOptions& g, const std::string& pulse_path) {
  RunContext rc = make_run_context(g, "simulate-pulse");
  SampledPulse pulse = read_pulse(pulse_path);

  DeviceConfig dev = rc.config.device_config();
  NoiseModel noise = rc.config.noise_model();
  SampledPulse played = bandwidth_filter(pulse, rc.config.filter.rise_time_ns);
  QuantumChannel ch = collapse_operators(noise, dev.dim).empty()
                          ? QuantumChannel::from_unitary(propagate_unitary(played, dev))
                          : propagate_open(played, dev, noise);

  Matrix rho0 = Matrix::Zero(dev.dim, dev.dim);
  rho0(0, 0) = 1.0;
  Eigen::VectorXd pops = populations(ch.apply(rho0));

  FidelityResult fx = gate_fidelity(ch, atomic_unitary(Atomic::PlusX));
  FidelityResult fy = gate_fidelity(ch, atomic_unitary(Atomic::PlusY));

  ordered_json j;
  for (int i = 0; i < pops.size(); ++i) j["p" + std::to_string(i)] = pops(i);
  double leak = 0.0;
  for (int i = 2; i < pops.size(); ++i) leak += pops(i);
  j["leakage"] = leak;
  j["fidelity_vs"] = {{"x_half", fx.value}, {"y_half", fy.value}};
  j["cptp_ok"] = fx.cptp_ok;
  save(rc, "report.json", j.dump(2) + "\n");
  finish_run(rc);
  return 0;
}

int cmd_calibrate_drag(const GlobalOptions& g) {
  RunContext rc = make_run_context(g, "calibrate-drag");
  CliffordTable table = CliffordTable::build();
  CostContext ctx = make_cost_context(rc.config, table);
  CostConfig cost = rc.config.cost_config();
  PipelineSettings settings = rc.config.pipeline_settings();
  settings.threads = rc.threads;

  std::vector<RbSequence> sequences = cost_sequences(cost, table);
  CmaesConfig c1 = stage1_cmaes_config(settings, ctx);
  Objective obj = cost_objective(ParameterSet::Stage::Drag, cost, ctx, &sequences);
  OptimizationTrace trace = run_optimization(obj, c1, settings.threads);

  save(rc, "config.json", rc.config.to_json_text());
  save_optimization_outputs(rc, trace, "");
  if (trace.aborted) {
    std::cerr << "optimization aborted: " << trace.abort_reason << "\n";
    finish_run(rc);
    return 1;
  }

  ParameterSet best;
  best.stage = ParameterSet::Stage::Drag;
  best.values = trace.best;
  save(rc, "best_params.json", best_params_text(best, trace.best_cost));

  DecodedCandidate decoded = decode_parameters(best, ctx);
  save_pulse_outputs(rc, decoded.pulse, "pulse.csv", "calibrated analytic pulse, +X/2 envelope",
                     best.ssb_frequency());
  finish_run(rc);
  return 0;
}

int cmd_optimize_pwc(const GlobalOptions& g, const std::string& drag_artifact) {
  RunContext rc = make_run_context(g, "optimize-pwc");
  CliffordTable table = CliffordTable::build();
  CostContext ctx = make_cost_context(rc.config, table);
  CostConfig cost = rc.config.cost_config();
  PipelineSettings settings = rc.config.pipeline_settings();
  settings.threads = rc.threads;

  ParameterSet drag_best = load_best_params(drag_artifact, ParameterSet::Stage::Drag);

  std::vector<RbSequence> sequences = cost_sequences(cost, table);
  CmaesConfig c2 = stage2_cmaes_config(settings, ctx, drag_best);
  Objective obj = cost_objective(ParameterSet::Stage::Pwc, cost, ctx, &sequences);
  OptimizationTrace trace = run_optimization(obj, c2, settings.threads);

  save(rc, "config.json", rc.config.to_json_text());
  save_optimization_outputs(rc, trace, "");
  if (trace.aborted) {
    std::cerr << "optimization aborted: " << trace.abort_reason << "\n";
    finish_run(rc);
    return 1;
  }

  ParameterSet best;
  best.stage = ParameterSet::Stage::Pwc;
  best.values = trace.best;
  save(rc, "best_params.json", best_params_text(best, trace.best_cost));

  DecodedCandidate base = decode_parameters(drag_best, ctx);
  DecodedCandidate corrected = decode_parameters(best, ctx);
  save_pulse_outputs(rc, base.pulse, "base_pulse.csv", "stage-1 analytic pulse, +X/2 envelope",
                     drag_best.ssb_frequency());
  save_pulse_outputs(rc, corrected.pulse, "pulse.csv",
                     "piecewise-corrected pulse, +X/2 envelope", best.ssb_frequency());
  finish_run(rc);
  return 0;
}

int cmd_rb(const GlobalOptions& g, const std::string& pulse_path) {
  RunContext rc = make_run_context(g, "rb");
  CliffordTable table = CliffordTable::build();
  SampledPulse pulse = read_pulse(pulse_path);

  RbDataset data = generate_rb_dataset(
      pulse, rc.config.device_config(), rc.config.noise_model(), rc.config.filter.rise_time_ns,
      rc.config.noise.dephasing_k, table, rc.config.rb.lengths, rc.config.rb.k,
      rc.config.rb.shots, rc.config.cost.seed);

  write_rb_dataset(rc.run_dir / "dataset.csv", data);
  rc.outputs.push_back("dataset.csv");

  std::vector<RbCurvePoint> curve = rb_curve_p0(data);
  write_rb_curve(rc.run_dir / "curve.csv", curve);
  rc.outputs.push_back("curve.csv");

  std::vector<double> ns, p0, err;
  for (const RbCurvePoint& cp : curve) {
    ns.push_back(cp.length);
    p0.push_back(cp.mean);
    err.push_back(cp.stderr_mean);
  }
  bool weighted = true;
  for (double e : err)
    if (!(e > 0.0)) weighted = false;
  DecayFitResult fit = fit_single_decay(ns, p0, weighted ? err : std::vector<double>{});

  ordered_json j{{"A", fit.offset},
                 {"B", fit.amplitude},
                 {"lambda", fit.decay},
                 {"stderr", {{"A", fit.offset_err}, {"B", fit.amplitude_err}, {"lambda", fit.decay_err}}},
                 {"avg_error_per_clifford", 0.5 * (1.0 - fit.decay)},
                 {"converged", fit.converged},
                 {"identifiable", fit.identifiable}};
  save(rc, "fit.json", j.dump(2) + "\n");
  save(rc, "config.json", rc.config.to_json_text());
  finish_run(rc);
  return 0;
}

int cmd_leakage_rb(const GlobalOptions& g, const std::vector<std::string>& pulse_paths) {
  RunContext rc = make_run_context(g, "leakage-rb");
  CliffordTable table = CliffordTable::build();

  std::ostringstream comparison;
  comparison << "pulse,L1,L1_err,one_minus_lambda2,lambda2_err,F_avg,F_avg_err\n";

  for (const std::string& path : pulse_paths) {
    SampledPulse pulse = read_pulse(path);
    std::string stem = fs::path(path).stem().string();

    RbDataset data = generate_rb_dataset(
        pulse, rc.config.device_config(), rc.config.noise_model(),
        rc.config.filter.rise_time_ns, rc.config.noise.dephasing_k, table,
        rc.config.rb.lengths, rc.config.rb.k, rc.config.rb.shots, rc.config.cost.seed);
    write_rb_dataset(rc.run_dir / ("dataset_" + stem + ".csv"), data);
    rc.outputs.push_back("dataset_" + stem + ".csv");

    LeakageResult res = analyze_leakage_rb(data);
    write_leakage_result(rc.run_dir / ("leakage_" + stem + ".json"), res);
    rc.outputs.push_back("leakage_" + stem + ".json");

    comparison << stem << ',' << format_double(res.l1) << ',' << format_double(res.l1_err) << ','
               << format_double(1.0 - res.lambda2) << ',' << format_double(res.lambda2_err) << ','
               << format_double(res.f_avg) << ',' << format_double(res.f_avg_err) << '\n';
  }

  save(rc, "comparison.csv", comparison.str());
  save(rc, "config.json", rc.config.to_json_text());
  finish_run(rc);
  return 0;
}

int cmd_profile(const GlobalOptions& g, std::vector<int> lambdas, int reps) {
  RunContext rc = make_run_context(g, "profile");
  if (lambdas.empty()) lambdas = {4, 8, 16, 32};
  if (reps < 1) reps = 1;

  CostConfig cost = rc.config.cost_config();
  PipelineSettings settings = rc.config.pipeline_settings();

  // Population sizes are interleaved within each repetition so slow drift in
  // machine load spreads evenly across them instead of biasing one lambda.
  struct Samples {
    std::vector<double> iter_ns, seq_ns, setup_ns, eval_ns;
  };
  std::vector<Samples> samples(lambdas.size());

  for (int rep = 0; rep < reps; ++rep) {
    for (std::size_t pos = 0; pos < lambdas.size(); ++pos) {
      // Alternate the sweep direction so no population size always sits at
      // the same position within a repetition; together with interleaving
      // this cancels both slow drift and within-repetition trends.
      const std::size_t li = rep % 2 == 0 ? pos : lambdas.size() - 1 - pos;
      const int lambda = lambdas[li];
      auto iter_start = std::chrono::steady_clock::now();

      // Fixed per-iteration work, shared by all candidates: the group table
      // is rebuilt, the benchmarking sequences are drawn and their dump files
      // (the waveform-upload analog) rewritten.
      CliffordTable table = CliffordTable::build();
      CostConfig rep_cost = cost;
      rep_cost.seed = RngStream(cost.seed).child(lambda).child(rep).next_u64();
      std::vector<RbSequence> sequences = cost_sequences(rep_cost, table);
      ordered_json dump = ordered_json::array();
      for (const RbSequence& s : sequences) {
        ordered_json js{{"m", s.indices.size()},
                        {"seed", s.seed},
                        {"indices", s.indices},
                        {"recovery", s.recovery}};
        std::vector<int> schedule;
        for (int idx : s.indices)
          for (Atomic a : table.element(idx).decomposition)
            schedule.push_back(static_cast<int>(a));
        js["atomic_schedule"] = schedule;
        dump.push_back(js);
      }
      write_text_atomic(rc.run_dir / "sequences.json", dump.dump() + "\n");
      double fixed_ns = std::chrono::duration<double, std::nano>(
                            std::chrono::steady_clock::now() - iter_start)
                            .count();

      CostContext ctx = make_cost_context(rc.config, table);
      PipelineSettings s = settings;
      s.lambda = lambda;
      CmaesConfig c1 = stage1_cmaes_config(s, ctx);
      c1.seed = RngStream(settings.seed).child(lambda).next_u64();
      CmaesState state(c1);
      Objective obj = cost_objective(ParameterSet::Stage::Drag, rep_cost, ctx, &sequences);

      std::vector<Eigen::VectorXd> candidates = state.ask();
      TimingSplit split;
      std::vector<double> costs(candidates.size());
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        EvalOutcome out = obj(candidates[k], rep, static_cast<int>(k));
        costs[k] = out.ok ? out.cost : 0.0;
        split += out.timings;
      }
      state.tell(candidates, costs);

      double total_ns = std::chrono::duration<double, std::nano>(
                            std::chrono::steady_clock::now() - iter_start)
                            .count();
      samples[li].iter_ns.push_back(total_ns);
      samples[li].seq_ns.push_back(fixed_ns + split.sequence_construction);
      samples[li].setup_ns.push_back(split.setup);
      samples[li].eval_ns.push_back(split.evaluation);
    }
  }

  ordered_json records = ordered_json::array();
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const int lambda = lambdas[li];
    double it = median(samples[li].iter_ns), sq = median(samples[li].seq_ns),
           st = median(samples[li].setup_ns), ev = median(samples[li].eval_ns);
    double uncategorized = it - sq - st - ev;
    records.push_back(ordered_json{
        {"lambda", lambda},
        {"per_iteration_ns",
         {{"sequence_construction", sq}, {"setup", st}, {"evaluation", ev}, {"total", it}}},
        {"per_evaluation_ns",
         {{"sequence_construction", sq / lambda},
          {"setup", st / lambda},
          {"evaluation", ev / lambda},
          {"total", it / lambda}}},
        {"uncategorized_ns", uncategorized}});
  }

  ordered_json j{{"repetitions", reps}, {"records", records}};
  save(rc, "profile.json", j.dump(2) + "\n");
  save(rc, "config.json", rc.config.to_json_text());
  finish_run(rc);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"closed-loop pulse calibration on a simulated transmon"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "experiment config JSON");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override config cost.seed");
  app.add_option("--out", g.out_dir, "output directory (default $QOCT_OUT or ./out)");
  app.add_option("--threads", g.threads, "worker threads for candidate evaluation")
      ->check(CLI::PositiveNumber);
  app.add_option("--run-id", g.run_id, "run directory name (default <command>-<seed>)");

  std::string pulse_path;
  std::vector<std::string> pulse_paths;
  std::string drag_artifact;
  std::vector<int> lambdas;
  int reps = 7;

  auto* sim = app.add_subcommand("simulate-pulse", "propagate a stored pulse and report metrics");
  sim->add_option("--pulse", pulse_path, "pulse CSV file")->required();

  app.add_subcommand("calibrate-drag", "stage-1 calibration of the analytic pulse");

  auto* pwc = app.add_subcommand("optimize-pwc", "stage-2 piecewise-constant optimization");
  pwc->add_option("--drag", drag_artifact, "stage-1 best_params.json or its run directory")
      ->required();

  auto* rb = app.add_subcommand("rb", "randomized benchmarking of a stored pulse");
  rb->add_option("--pulse", pulse_path, "pulse CSV file")->required();

  auto* leak = app.add_subcommand("leakage-rb", "leakage randomized benchmarking");
  leak->add_option("--pulse", pulse_paths, "pulse CSV file (repeatable)")->required();

  auto* prof = app.add_subcommand("profile", "per-iteration timing sweep over population sizes");
  prof->add_option("--lambdas", lambdas, "population sizes to sweep");
  prof->add_option("--reps", reps, "repetitions per population size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*seed_opt) g.seed = seed_value;

  try {
    if (sim->parsed()) return cmd_simulate_pulse(g, pulse_path);
    if (app.get_subcommand("calibrate-drag")->parsed()) return cmd_calibrate_drag(g);
    if (pwc->parsed()) return cmd_optimize_pwc(g, drag_artifact);
    if (rb->parsed()) return cmd_rb(g, pulse_path);
    if (leak->parsed()) return cmd_leakage_rb(g, pulse_paths);
    if (prof->parsed()) return cmd_profile(g, lambdas, reps);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qoct

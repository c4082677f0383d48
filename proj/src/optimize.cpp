#include "qoct/optimize.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qoct {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::int64_t elapsed_ns(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              from)
      .count();
}

// MHz to rad/ns.
double mhz(double f) { return kTwoPi * f * 1e-3; }

}  // namespace

OptimizationTrace run_optimization(const Objective& objective, const CmaesConfig& config,
                                   int threads) {
  if (threads < 1) threads = 1;
  CmaesState state(config);
  OptimizationTrace trace;
  trace.best = config.x0;
  trace.best_cost = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    std::vector<Eigen::VectorXd> candidates = state.ask();
    const int lambda = static_cast<int>(candidates.size());
    std::vector<EvalOutcome> outcomes(lambda);

    if (threads == 1) {
      for (int k = 0; k < lambda; ++k) outcomes[k] = objective(candidates[k], iter, k);
    } else {
      std::atomic<int> next{0};
      auto worker = [&] {
        for (;;) {
          int k = next.fetch_add(1);
          if (k >= lambda) return;
          outcomes[k] = objective(candidates[k], iter, k);
        }
      };
      std::vector<std::thread> pool;
      const int n_workers = std::min(threads, lambda);
      pool.reserve(n_workers);
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    IterationRecord rec;
    rec.iteration = iter;
    rec.candidates = candidates;
    rec.costs.resize(lambda);
    int failures = 0;
    for (int k = 0; k < lambda; ++k) {
      rec.costs[k] = outcomes[k].ok ? outcomes[k].cost : 0.0;
      if (!outcomes[k].ok) ++failures;
      rec.timings += outcomes[k].timings;
    }

    if (2 * failures > lambda) {
      trace.aborted = true;
      trace.abort_reason = "objective failed for " + std::to_string(failures) + " of " +
                           std::to_string(lambda) + " candidates at iteration " +
                           std::to_string(iter);
      trace.iterations.push_back(std::move(rec));
      return trace;
    }

    state.tell(candidates, rec.costs);

    rec.mean = state.mean();
    rec.sigma = state.sigma();
    double sum = 0.0;
    for (double c : rec.costs) sum += c;
    rec.mean_cost = sum / lambda;
    rec.best_so_far = state.best_cost();
    trace.iterations.push_back(std::move(rec));

    trace.best_cost = state.best_cost();
    trace.best = state.best();
    if (state.best_cost() >= config.target_cost) break;
  }
  return trace;
}

double half_pi_amplitude(double sigma, int n_samples, double dt) {
  DragParams p;
  p.amplitude = 1.0;
  p.sigma = sigma;
  p.beta = 0.0;
  p.anharmonicity = -1.0;  // irrelevant at beta = 0
  p.n_samples = n_samples;
  double area = rotation_angle(drag_pulse(p, dt));
  return 0.5 * 3.14159265358979323846 / area;
}

namespace {

struct DerivedScales {
  double a0 = 0.0;
  double sigma_ssb = 0.0;
  double bound_ssb = 0.0;
};

DerivedScales derive_scales(const PipelineSettings& s, const CostContext& ctx) {
  DerivedScales d;
  d.a0 = s.initial_amplitude > 0.0
             ? s.initial_amplitude
             : half_pi_amplitude(ctx.drag_sigma, ctx.drag_samples, ctx.device.sample_period);
  d.sigma_ssb = s.sigma0_ssb > 0.0 ? s.sigma0_ssb : mhz(2.0);
  d.bound_ssb = s.bound_ssb > 0.0 ? s.bound_ssb : mhz(20.0);
  return d;
}

double effective_target(double target) {
  return target > 0.0 ? target : std::numeric_limits<double>::infinity();
}

}  // namespace

CmaesConfig stage1_cmaes_config(const PipelineSettings& s, const CostContext& ctx) {
  DerivedScales d = derive_scales(s, ctx);
  CmaesConfig c;
  c.x0.resize(3);
  c.x0 << d.a0, 0.0, ctx.ssb_nominal;
  c.sigma0.resize(3);
  c.sigma0 << s.sigma0_amplitude_frac * d.a0, s.sigma0_beta, d.sigma_ssb;
  c.lower.resize(3);
  c.upper.resize(3);
  c.lower << 0.0, -s.bound_beta, ctx.ssb_nominal - d.bound_ssb;
  c.upper << s.bound_amplitude_frac * d.a0, s.bound_beta, ctx.ssb_nominal + d.bound_ssb;
  c.lambda = s.lambda;
  c.max_iterations = s.max_iterations_drag;
  c.target_cost = effective_target(s.target_cost);
  c.seed = RngStream(s.seed).child(1).next_u64();
  return c;
}

CmaesConfig stage2_cmaes_config(const PipelineSettings& s, const CostContext& ctx,
                                const ParameterSet& drag_best) {
  DerivedScales d = derive_scales(s, ctx);
  const int n = ctx.drag_samples;
  CmaesConfig c;
  c.x0 = Eigen::VectorXd::Zero(3 + 2 * n);
  c.x0.head(3) = drag_best.values.head(3);
  c.sigma0.resize(3 + 2 * n);
  c.sigma0.head(3) << s.stage2_shrink * s.sigma0_amplitude_frac * d.a0,
      s.stage2_shrink * s.sigma0_beta, s.stage2_shrink * d.sigma_ssb;
  c.sigma0.tail(2 * n).setConstant(s.sigma0_correction_frac * d.a0);
  c.lower.resize(3 + 2 * n);
  c.upper.resize(3 + 2 * n);
  c.lower.head(3) << 0.0, -s.bound_beta, ctx.ssb_nominal - d.bound_ssb;
  c.upper.head(3) << s.bound_amplitude_frac * d.a0, s.bound_beta, ctx.ssb_nominal + d.bound_ssb;
  c.lower.tail(2 * n).setConstant(-s.bound_correction_frac * d.a0);
  c.upper.tail(2 * n).setConstant(s.bound_correction_frac * d.a0);
  c.lambda = s.lambda;
  c.max_iterations = s.max_iterations_pwc;
  c.target_cost = effective_target(s.target_cost);
  c.seed = RngStream(s.seed).child(2).next_u64();
  return c;
}

Objective cost_objective(ParameterSet::Stage stage, const CostConfig& config,
                         const CostContext& ctx, const std::vector<RbSequence>* sequences) {
  return [stage, config, ctx, sequences](const Eigen::VectorXd& x, int iteration,
                                         int index) -> EvalOutcome {
    EvalOutcome out;
    ParameterSet params;
    params.stage = stage;
    params.values = x;
    EvalKey key{static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(index)};
    try {
      CostBreakdown cb = evaluate_cost_detailed(params, config, ctx, key, sequences);
      out.cost = cb.value;  // decode failures keep the zero-cost penalty
      out.timings.sequence_construction = cb.decode_ns;
      out.timings.setup = cb.setup_ns;
      out.timings.evaluation = cb.evaluation_ns;
    } catch (const std::exception&) {
      out.ok = false;
    }
    return out;
  };
}

PipelineResult two_stage_pipeline(const CostContext& ctx, const CostConfig& cost,
                                  const PipelineSettings& settings) {
  if (ctx.table == nullptr) throw std::invalid_argument("pipeline: context has no clifford table");

  PipelineResult result;
  auto seq_start = std::chrono::steady_clock::now();
  const std::vector<RbSequence> sequences = cost_sequences(cost, *ctx.table);
  const std::int64_t shared_seq_ns = elapsed_ns(seq_start);

  CmaesConfig c1 = stage1_cmaes_config(settings, ctx);
  Objective obj1 = cost_objective(ParameterSet::Stage::Drag, cost, ctx, &sequences);
  result.drag_trace = run_optimization(obj1, c1, settings.threads);
  if (!result.drag_trace.iterations.empty())
    result.drag_trace.iterations.front().timings.sequence_construction += shared_seq_ns;
  result.drag_best.stage = ParameterSet::Stage::Drag;
  result.drag_best.values = result.drag_trace.best;
  result.drag_cost = result.drag_trace.best_cost;
  if (result.drag_trace.aborted) return result;

  CmaesConfig c2 = stage2_cmaes_config(settings, ctx, result.drag_best);
  Objective obj2 = cost_objective(ParameterSet::Stage::Pwc, cost, ctx, &sequences);
  result.pwc_trace = run_optimization(obj2, c2, settings.threads);
  result.pwc_best.stage = ParameterSet::Stage::Pwc;
  result.pwc_best.values = result.pwc_trace.best;
  result.pwc_cost = result.pwc_trace.best_cost;
  return result;
}

}  // namespace qoct

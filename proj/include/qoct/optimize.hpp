#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qoct/cmaes.hpp"
#include "qoct/params.hpp"
#include "qoct/rb_cost.hpp"

namespace qoct {

// Per-iteration wall-time split, in nanoseconds. "sequence_construction"
// covers decoding parameters into pulses plus benchmarking-sequence
// generation; "setup" covers channel and table preparation; "evaluation"
// covers propagation and sampling.
struct TimingSplit {
  std::int64_t sequence_construction = 0;
  std::int64_t setup = 0;
  std::int64_t evaluation = 0;

  std::int64_t total() const { return sequence_construction + setup + evaluation; }
  TimingSplit& operator+=(const TimingSplit& o) {
    sequence_construction += o.sequence_construction;
    setup += o.setup;
    evaluation += o.evaluation;
    return *this;
  }
};

struct EvalOutcome {
  double cost = 0.0;
  bool ok = true;  // false marks an objective failure, not a penalized candidate
  TimingSplit timings;
};

// Objective contract: deterministic given (candidate, iteration, index).
using Objective = std::function<EvalOutcome(const Eigen::VectorXd& candidate, int iteration,
                                            int index)>;

struct IterationRecord {
  int iteration = 0;
  std::vector<Eigen::VectorXd> candidates;
  std::vector<double> costs;
  Eigen::VectorXd mean;
  double sigma = 0.0;
  double mean_cost = 0.0;
  double best_so_far = 0.0;
  TimingSplit timings;
};

struct OptimizationTrace {
  std::vector<IterationRecord> iterations;
  double best_cost = 0.0;
  Eigen::VectorXd best;
  bool aborted = false;
  std::string abort_reason;
};

// Runs ask/evaluate/tell until max_iterations or target_cost (reached when
// best >= target). Candidate evaluations within an iteration may run on
// `threads` workers; results are keyed by candidate index so scheduling does
// not affect the outcome. If more than half of a population's evaluations
// fail, the run aborts with a diagnostic in the trace.
OptimizationTrace run_optimization(const Objective& objective, const CmaesConfig& config,
                                   int threads = 1);

// Scalar knobs from which the per-coordinate CMA-ES vectors are assembled.
// Fractions are relative to the stage-1 initial amplitude guess.
struct PipelineSettings {
  double initial_amplitude = 0.0;  // rad/ns; 0 derives the pi/2-area amplitude
  double sigma0_amplitude_frac = 0.1;
  double sigma0_beta = 0.3;
  double sigma0_ssb = 0.0;  // rad/ns; 0 derives 2 MHz
  double sigma0_correction_frac = 0.03;
  double stage2_shrink = 1.0;  // extra factor on stage-2 sigma0 for (A, beta, ssb)
  double bound_amplitude_frac = 3.0;
  double bound_beta = 5.0;
  double bound_ssb = 0.0;  // rad/ns; 0 derives 20 MHz
  double bound_correction_frac = 0.5;
  int lambda = 0;
  int max_iterations_drag = 150;
  int max_iterations_pwc = 400;
  double target_cost = 0.0;  // <= 0 disables the early stop
  std::uint64_t seed = 0;
  int threads = 1;
};

struct PipelineResult {
  ParameterSet drag_best;
  ParameterSet pwc_best;
  double drag_cost = 0.0;
  double pwc_cost = 0.0;
  OptimizationTrace drag_trace;
  OptimizationTrace pwc_trace;
};

// Amplitude for which the pedestal-subtracted Gaussian integrates to a pi/2
// rotation at the given width and sample count.
double half_pi_amplitude(double sigma, int n_samples, double dt);

CmaesConfig stage1_cmaes_config(const PipelineSettings& s, const CostContext& ctx);
CmaesConfig stage2_cmaes_config(const PipelineSettings& s, const CostContext& ctx,
                                const ParameterSet& drag_best);

// Builds the cost objective for one stage, wiring iteration/candidate keys
// into the shot-noise streams.
Objective cost_objective(ParameterSet::Stage stage, const CostConfig& config,
                         const CostContext& ctx, const std::vector<RbSequence>* sequences);

// Stage 1 calibrates (A, beta, ssb) of the analytic pulse; stage 2 extends
// the winner with per-sample corrections started at zero and reoptimizes all
// parameters together.
PipelineResult two_stage_pipeline(const CostContext& ctx, const CostConfig& cost,
                                  const PipelineSettings& settings);

}  // namespace qoct

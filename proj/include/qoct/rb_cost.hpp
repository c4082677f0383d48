#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qoct/clifford.hpp"
#include "qoct/params.hpp"
#include "qoct/quantum.hpp"

namespace qoct {

// Benchmarking protocol knobs for one cost evaluation.
struct CostConfig {
  int sequence_length = 120;  // Cliffords per sequence
  int sequences = 20;         // independent random sequences averaged
  int shots = 1000;           // projective measurements per sequence
  std::uint64_t seed = 0;     // master seed; sequences depend only on this
};

// Fixed experimental context shared by all candidates of an optimization run.
struct CostContext {
  DeviceConfig device;            // detuning field is overwritten per candidate
  NoiseModel noise;
  double rise_time = 0.0;         // ns, line bandwidth model
  double ssb_nominal = 0.0;       // rad/ns, calibrated sideband setpoint
  double dephasing_scale = 0.0;   // gamma_phi per unit (mean amplitude * gate time)
  double drag_sigma = 0.0;        // ns
  int drag_samples = 0;
  const CliffordTable* table = nullptr;
};

// Decoded candidate: the baseband envelope of the +X/2 atomic before
// filtering, plus the detuning implied by the ssb offset from its setpoint.
struct DecodedCandidate {
  SampledPulse pulse;
  double detuning = 0.0;
  bool ok = false;
};

DecodedCandidate decode_parameters(const ParameterSet& params, const CostContext& ctx);

// The four atomic gate channels as played on the device: phase-rotated
// envelope -> bandwidth filter -> open-system propagation -> amplitude-
// dependent dephasing. gamma_phi uses the unfiltered envelope's mean |sample|
// and nominal duration, matching a phase noise budget that scales with drive
// power.
struct AtomicChannels {
  std::array<QuantumChannel, 4> gate;
  double gamma_phi = 0.0;
};

AtomicChannels build_atomic_channels(const SampledPulse& base, const DeviceConfig& cfg,
                                     const NoiseModel& noise, double rise_time,
                                     double dephasing_scale);

// Channel of one Clifford: its decomposition's atomics composed in time order.
QuantumChannel clifford_channel(const CliffordElement& element, const AtomicChannels& atomics);
QuantumChannel clifford_channel(const CliffordElement& element, const SampledPulse& base,
                                const DeviceConfig& cfg, const NoiseModel& noise,
                                double rise_time = 0.0, double dephasing_scale = 0.0);

// All 24 Clifford channels, index-aligned with the table.
std::vector<QuantumChannel> clifford_channels(const CliffordTable& table,
                                              const AtomicChannels& atomics);

// Populations after playing the sequence (recovery included) on |0>.
Eigen::VectorXd sequence_survival(const RbSequence& seq,
                                  const std::vector<QuantumChannel>& cliffords);
Eigen::VectorXd sequence_survival(const RbSequence& seq, const CliffordTable& table,
                                  const SampledPulse& base, const DeviceConfig& cfg,
                                  const NoiseModel& noise, double rise_time = 0.0,
                                  double dephasing_scale = 0.0);

// Addresses the shot-noise stream of one candidate evaluation so repeated
// calls with the same key reproduce the same counts.
struct EvalKey {
  std::uint64_t iteration = 0;
  std::uint64_t candidate = 0;
};

struct CostBreakdown {
  double value = 0.0;
  bool ok = false;
  std::int64_t decode_ns = 0;      // parameter -> pulse and sequence prep
  std::int64_t setup_ns = 0;       // channel construction
  std::int64_t evaluation_ns = 0;  // propagation through sequences + sampling
};

// Mean ground-state survival over the benchmarking ensemble, estimated from
// multinomial shot counts. Fully deterministic given (config.seed, params,
// key). Out-of-range or non-finite parameters yield ok = false with value 0.
CostBreakdown evaluate_cost_detailed(const ParameterSet& params, const CostConfig& config,
                                     const CostContext& ctx, EvalKey key = {},
                                     const std::vector<RbSequence>* sequences = nullptr);

double evaluate_cost(const ParameterSet& params, const CostConfig& config, const CostContext& ctx,
                     EvalKey key = {});

// Same estimator with externally supplied per-Clifford channels; used to
// validate the protocol against channels with known analytic behaviour.
double cost_from_channels(const std::vector<QuantumChannel>& cliffords,
                          const std::vector<RbSequence>& sequences, const CostConfig& config,
                          EvalKey key = {});

// The benchmarking sequences used for every candidate under this config.
std::vector<RbSequence> cost_sequences(const CostConfig& config, const CliffordTable& table);

}  // namespace qoct

#include "qoct/rb_cost.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "qoct/rng.hpp"

namespace qoct {

namespace {

// Domain tags separating the sequence-draw streams from the shot streams.
constexpr std::uint64_t kSequenceDomain = 0x53455144ull;
constexpr std::uint64_t kShotDomain = 0x53484f54ull;

std::int64_t elapsed_ns(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              from)
      .count();
}

}  // namespace

ParameterSet ParameterSet::drag(double amplitude, double beta, double ssb) {
  ParameterSet p;
  p.stage = Stage::Drag;
  p.values.resize(3);
  p.values << amplitude, beta, ssb;
  return p;
}

ParameterSet ParameterSet::pwc_from_drag(const ParameterSet& drag_params, int n_samples) {
  ParameterSet p;
  p.stage = Stage::Pwc;
  p.values = Eigen::VectorXd::Zero(3 + 2 * n_samples);
  p.values.head(3) = drag_params.values.head(3);
  return p;
}

DecodedCandidate decode_parameters(const ParameterSet& params, const CostContext& ctx) {
  DecodedCandidate out;
  if (params.values.size() < 3) return out;
  if (!params.values.allFinite()) return out;
  if (params.amplitude() < 0.0) return out;
  if (params.stage == ParameterSet::Stage::Pwc &&
      params.values.size() != 3 + 2 * ctx.drag_samples)
    return out;

  DragParams dp;
  dp.amplitude = params.amplitude();
  dp.sigma = ctx.drag_sigma;
  dp.beta = params.beta();
  dp.anharmonicity = ctx.device.anharmonicity;
  dp.n_samples = ctx.drag_samples;
  out.pulse = drag_pulse(dp, ctx.device.sample_period);

  if (params.stage == ParameterSet::Stage::Pwc) {
    std::vector<double> corr(params.values.data() + 3,
                             params.values.data() + params.values.size());
    out.pulse = apply_corrections(out.pulse, corr);
  }

  out.detuning = params.ssb_frequency() - ctx.ssb_nominal;
  out.ok = true;
  return out;
}

AtomicChannels build_atomic_channels(const SampledPulse& base, const DeviceConfig& cfg,
                                     const NoiseModel& noise, double rise_time,
                                     double dephasing_scale) {
  base.validate();
  cfg.validate();

  AtomicChannels out;
  double mean_amp = 0.0;
  for (const auto& s : base.samples) mean_amp += std::abs(s);
  mean_amp /= static_cast<double>(base.samples.size());
  out.gamma_phi = dephasing_scale * mean_amp * base.duration();
  if (out.gamma_phi > 1.0) out.gamma_phi = 1.0;

  const bool closed = collapse_operators(noise, cfg.dim).empty();
  QuantumChannel extra =
      out.gamma_phi > 0.0 ? dephasing_channel(out.gamma_phi, cfg.dim) : QuantumChannel::identity(cfg.dim);

  for (int g = 0; g < 4; ++g) {
    SampledPulse played = bandwidth_filter(atomic_pulse(base, atomic_phase(static_cast<Atomic>(g))),
                                           rise_time);
    QuantumChannel ch = closed ? QuantumChannel::from_unitary(propagate_unitary(played, cfg))
                               : propagate_open(played, cfg, noise);
    out.gate[g] = ch.then(extra);
  }
  return out;
}

QuantumChannel clifford_channel(const CliffordElement& element, const AtomicChannels& atomics) {
  const int d = atomics.gate[0].dim();
  QuantumChannel acc = QuantumChannel::identity(d);
  for (Atomic a : element.decomposition) acc = acc.then(atomics.gate[static_cast<int>(a)]);
  return acc;
}

QuantumChannel clifford_channel(const CliffordElement& element, const SampledPulse& base,
                                const DeviceConfig& cfg, const NoiseModel& noise,
                                double rise_time, double dephasing_scale) {
  return clifford_channel(element,
                          build_atomic_channels(base, cfg, noise, rise_time, dephasing_scale));
}

std::vector<QuantumChannel> clifford_channels(const CliffordTable& table,
                                              const AtomicChannels& atomics) {
  std::vector<QuantumChannel> out;
  out.reserve(table.size());
  for (int i = 0; i < table.size(); ++i) out.push_back(clifford_channel(table.element(i), atomics));
  return out;
}

Eigen::VectorXd sequence_survival(const RbSequence& seq,
                                  const std::vector<QuantumChannel>& cliffords) {
  if (cliffords.empty()) throw std::invalid_argument("survival: no channels");
  const int d = cliffords[0].dim();
  // The state stays in vectorized form across the whole sequence; repacking
  // the density matrix every gate costs more than the matvec at these dims.
  Vector state = Vector::Zero(d * d);
  state(0) = 1.0;  // vec(|0><0|)
  Vector scratch(d * d);
  for (int idx : seq.indices) {
    scratch.noalias() = cliffords.at(idx).super() * state;
    state.swap(scratch);
  }
  scratch.noalias() = cliffords.at(seq.recovery).super() * state;
  state.swap(scratch);
  Eigen::VectorXd pops(d);
  for (int i = 0; i < d; ++i) pops(i) = state(i * d + i).real();
  return pops;
}

Eigen::VectorXd sequence_survival(const RbSequence& seq, const CliffordTable& table,
                                  const SampledPulse& base, const DeviceConfig& cfg,
                                  const NoiseModel& noise, double rise_time,
                                  double dephasing_scale) {
  AtomicChannels atomics = build_atomic_channels(base, cfg, noise, rise_time, dephasing_scale);
  return sequence_survival(seq, clifford_channels(table, atomics));
}

std::vector<RbSequence> cost_sequences(const CostConfig& config, const CliffordTable& table) {
  RngStream domain = RngStream(config.seed).child(kSequenceDomain);
  std::vector<RbSequence> seqs;
  seqs.reserve(config.sequences);
  for (int k = 0; k < config.sequences; ++k)
    seqs.push_back(random_sequence(config.sequence_length, table, domain.child(k).next_u64()));
  return seqs;
}

double cost_from_channels(const std::vector<QuantumChannel>& cliffords,
                          const std::vector<RbSequence>& sequences, const CostConfig& config,
                          EvalKey key) {
  if (sequences.empty()) throw std::invalid_argument("cost: no sequences");
  if (config.shots < 1) throw std::invalid_argument("cost: shots must be at least 1");

  RngStream shot_domain = RngStream(config.seed).child(kShotDomain);
  double mean = 0.0;
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    Eigen::VectorXd pops = sequence_survival(sequences[k], cliffords);
    std::vector<double> probs(pops.data(), pops.data() + pops.size());
    RngStream shots_rng = shot_domain.child(k).child(key.iteration).child(key.candidate);
    auto counts = shots_rng.multinomial(config.shots, probs);
    mean += static_cast<double>(counts[0]) / static_cast<double>(config.shots);
  }
  return mean / static_cast<double>(sequences.size());
}

CostBreakdown evaluate_cost_detailed(const ParameterSet& params, const CostConfig& config,
                                     const CostContext& ctx, EvalKey key,
                                     const std::vector<RbSequence>* sequences) {
  if (ctx.table == nullptr) throw std::invalid_argument("cost: context has no clifford table");
  if (config.sequence_length < 1 || config.sequences < 1 || config.shots < 1)
    throw std::invalid_argument("cost: invalid benchmarking config");

  CostBreakdown out;

  auto t0 = std::chrono::steady_clock::now();
  DecodedCandidate decoded = decode_parameters(params, ctx);
  std::vector<RbSequence> local;
  if (sequences == nullptr) {
    local = cost_sequences(config, *ctx.table);
    sequences = &local;
  }
  out.decode_ns = elapsed_ns(t0);
  if (!decoded.ok) return out;

  auto t1 = std::chrono::steady_clock::now();
  DeviceConfig cfg = ctx.device;
  cfg.detuning = decoded.detuning;
  AtomicChannels atomics =
      build_atomic_channels(decoded.pulse, cfg, ctx.noise, ctx.rise_time, ctx.dephasing_scale);
  std::vector<QuantumChannel> cliffords = clifford_channels(*ctx.table, atomics);
  out.setup_ns = elapsed_ns(t1);

  auto t2 = std::chrono::steady_clock::now();
  out.value = cost_from_channels(cliffords, *sequences, config, key);
  out.evaluation_ns = elapsed_ns(t2);
  out.ok = true;
  return out;
}

double evaluate_cost(const ParameterSet& params, const CostConfig& config, const CostContext& ctx,
                     EvalKey key) {
  return evaluate_cost_detailed(params, config, ctx, key).value;
}

}  // namespace qoct

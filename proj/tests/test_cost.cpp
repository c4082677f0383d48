#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "qoct/clifford.hpp"
#include "qoct/optimize.hpp"
#include "qoct/rb_cost.hpp"

using namespace qoct;

namespace {

struct Fixture {
  CliffordTable table = CliffordTable::build();
  CostContext ctx;

  Fixture() {
    ctx.device.dim = 4;
    ctx.device.anharmonicity = -1.981;
    ctx.device.sample_period = 1.0 / 2.4;
    ctx.rise_time = 0.3;
    ctx.ssb_nominal = 2.0 * M_PI * 100.0 * 1e-3;
    ctx.dephasing_scale = 0.0;
    ctx.drag_samples = 20;
    ctx.drag_sigma = 0.25 * ctx.drag_samples * ctx.device.sample_period;
    ctx.table = &table;
  }

  ParameterSet nominal_params(double beta = 0.2) const {
    double amp = half_pi_amplitude(ctx.drag_sigma, ctx.drag_samples, ctx.device.sample_period);
    return ParameterSet::drag(amp, beta, ctx.ssb_nominal);
  }
};

// Qubit depolarizing superoperator rho -> (1-p) rho + p Tr(rho) I/2, composed
// after each ideal Clifford to give channels with known RB behaviour.
QuantumChannel depolarizing2(double p) {
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(4, 4);
  t(0, 0) = t(0, 3) = t(3, 0) = t(3, 3) = 0.5;
  Eigen::MatrixXcd s = (1.0 - p) * Eigen::MatrixXcd::Identity(4, 4) + p * t;
  return QuantumChannel(s);
}

std::vector<QuantumChannel> depolarized_cliffords(const CliffordTable& table, double p) {
  QuantumChannel noise = depolarizing2(p);
  std::vector<QuantumChannel> out;
  for (int i = 0; i < table.size(); ++i)
    out.push_back(QuantumChannel::from_unitary(table.element(i).unitary).then(noise));
  return out;
}

}  // namespace

TEST_CASE("decoding reproduces the analytic envelope and the ssb detuning") {
  Fixture f;
  ParameterSet p = ParameterSet::drag(0.35, 0.2, 0.64);
  DecodedCandidate d = decode_parameters(p, f.ctx);
  REQUIRE(d.ok);
  CHECK(std::abs(d.detuning - (0.64 - f.ctx.ssb_nominal)) < 1e-15);

  DragParams dp;
  dp.amplitude = 0.35;
  dp.sigma = f.ctx.drag_sigma;
  dp.beta = 0.2;
  dp.anharmonicity = f.ctx.device.anharmonicity;
  dp.n_samples = f.ctx.drag_samples;
  SampledPulse expect = drag_pulse(dp, f.ctx.device.sample_period);
  REQUIRE(d.pulse.samples.size() == expect.samples.size());
  for (std::size_t i = 0; i < expect.samples.size(); ++i)
    CHECK(std::abs(d.pulse.samples[i] - expect.samples[i]) < 1e-15);
}

TEST_CASE("pwc decoding adds the per-sample corrections") {
  Fixture f;
  ParameterSet base = f.nominal_params(0.1);
  ParameterSet p = ParameterSet::pwc_from_drag(base, f.ctx.drag_samples);
  p.values(3) = 0.01;   // a_0
  p.values(4) = -0.02;  // b_0
  p.values(3 + 2 * 7) = 0.005;
  DecodedCandidate with = decode_parameters(p, f.ctx);
  DecodedCandidate without = decode_parameters(base, f.ctx);
  REQUIRE(with.ok);
  CHECK(std::abs(with.pulse.samples[0] - without.pulse.samples[0] -
                 std::complex<double>(0.01, -0.02)) < 1e-15);
  CHECK(std::abs(with.pulse.samples[7] - without.pulse.samples[7] - 0.005) < 1e-15);
  CHECK(std::abs(with.pulse.samples[3] - without.pulse.samples[3]) < 1e-15);
}

TEST_CASE("malformed parameter vectors are rejected without throwing") {
  Fixture f;
  ParameterSet negative = ParameterSet::drag(-0.1, 0.0, f.ctx.ssb_nominal);
  CHECK_FALSE(decode_parameters(negative, f.ctx).ok);

  ParameterSet nan = f.nominal_params();
  nan.values(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(decode_parameters(nan, f.ctx).ok);

  ParameterSet trunc;
  trunc.stage = ParameterSet::Stage::Drag;
  trunc.values = Eigen::VectorXd::Zero(2);
  CHECK_FALSE(decode_parameters(trunc, f.ctx).ok);

  ParameterSet short_pwc = ParameterSet::pwc_from_drag(f.nominal_params(), 5);
  CHECK_FALSE(decode_parameters(short_pwc, f.ctx).ok);  // wrong correction count
}

TEST_CASE("noiseless atomic channels equal the unitary propagation") {
  Fixture f;
  DecodedCandidate d = decode_parameters(f.nominal_params(0.3), f.ctx);
  DeviceConfig cfg = f.ctx.device;
  cfg.detuning = d.detuning;
  AtomicChannels atomics = build_atomic_channels(d.pulse, cfg, NoiseModel{}, f.ctx.rise_time, 0.0);
  CHECK(atomics.gamma_phi == 0.0);

  SampledPulse played = bandwidth_filter(atomic_pulse(d.pulse, atomic_phase(Atomic::PlusY)),
                                         f.ctx.rise_time);
  QuantumChannel expect = QuantumChannel::from_unitary(propagate_unitary(played, cfg));
  CHECK((atomics.gate[static_cast<int>(Atomic::PlusY)].super() - expect.super()).norm() < 1e-12);
}

TEST_CASE("the four atomics share one leakage rate by phase symmetry") {
  Fixture f;
  DecodedCandidate d = decode_parameters(f.nominal_params(0.0), f.ctx);
  DeviceConfig cfg = f.ctx.device;
  cfg.detuning = d.detuning;
  AtomicChannels atomics = build_atomic_channels(d.pulse, cfg, NoiseModel{}, f.ctx.rise_time, 0.0);
  double l0 = leakage_rate(atomics.gate[0]);
  CHECK(l0 > 0.0);  // beta = 0 at this duration must leak measurably
  for (int g = 1; g < 4; ++g) CHECK(std::abs(leakage_rate(atomics.gate[g]) - l0) < 1e-12);
}

TEST_CASE("the amplitude-dependent dephasing budget is clamped") {
  Fixture f;
  DecodedCandidate d = decode_parameters(f.nominal_params(0.2), f.ctx);
  double mean_amp = 0.0;
  for (auto s : d.pulse.samples) mean_amp += std::abs(s);
  mean_amp /= static_cast<double>(d.pulse.samples.size());
  double k = 0.003;
  AtomicChannels atomics = build_atomic_channels(d.pulse, f.ctx.device, NoiseModel{}, 0.0, k);
  CHECK(std::abs(atomics.gamma_phi - k * mean_amp * d.pulse.duration()) < 1e-15);

  AtomicChannels saturated = build_atomic_channels(d.pulse, f.ctx.device, NoiseModel{}, 0.0, 1e9);
  CHECK(saturated.gamma_phi == 1.0);
}

TEST_CASE("identity channels give certain survival") {
  Fixture f;
  std::vector<QuantumChannel> ids(24, QuantumChannel::identity(2));
  RbSequence seq = random_sequence(30, f.table, 9);
  Eigen::VectorXd pops = sequence_survival(seq, ids);
  CHECK(std::abs(pops(0) - 1.0) < 1e-12);
  CHECK(std::abs(pops(1)) < 1e-12);
}

TEST_CASE("ideal clifford channels recover the ground state exactly") {
  Fixture f;
  std::vector<QuantumChannel> perfect = depolarized_cliffords(f.table, 0.0);
  for (std::uint64_t s : {3ull, 14ull}) {
    RbSequence seq = random_sequence(50, f.table, s);
    Eigen::VectorXd pops = sequence_survival(seq, perfect);
    CHECK(std::abs(pops(0) - 1.0) < 1e-9);
  }
}

TEST_CASE("survival under depolarizing noise follows the analytic decay") {
  Fixture f;
  double eps = 0.01;  // per-Clifford average error, p = 2 eps
  CostConfig config;
  config.sequence_length = 10;
  config.sequences = 40;
  config.shots = 2000;
  config.seed = 21;
  auto seqs = cost_sequences(config, f.table);
  double cost = cost_from_channels(depolarized_cliffords(f.table, 2 * eps), seqs, config);
  double expected = 0.5 + 0.5 * std::pow(1.0 - 2.0 * eps, config.sequence_length);
  CHECK(std::abs(cost - expected) < 0.02);
}

TEST_CASE("added depolarizing noise strictly degrades the cost") {
  Fixture f;
  CostConfig config;
  config.sequence_length = 20;
  config.sequences = 5;
  config.shots = 100000;  // suppress sampling noise
  config.seed = 33;
  auto seqs = cost_sequences(config, f.table);
  double c1 = cost_from_channels(depolarized_cliffords(f.table, 2 * 0.002), seqs, config);
  double c2 = cost_from_channels(depolarized_cliffords(f.table, 2 * 0.01), seqs, config);
  double c3 = cost_from_channels(depolarized_cliffords(f.table, 2 * 0.03), seqs, config);
  CHECK(c1 > c2);
  CHECK(c2 > c3);
}

TEST_CASE("cost evaluation is deterministic and keyed by iteration and candidate") {
  Fixture f;
  CostConfig config;
  config.sequence_length = 15;
  config.sequences = 6;
  config.shots = 300;
  config.seed = 5;
  ParameterSet p = f.nominal_params(0.0);
  p.values(0) *= 0.9;  // imperfect pulse so survival sits strictly inside (0, 1)

  double a = evaluate_cost(p, config, f.ctx, EvalKey{2, 3});
  double b = evaluate_cost(p, config, f.ctx, EvalKey{2, 3});
  CHECK(a == b);
  CHECK(a > 0.1);
  CHECK(a < 0.9999);

  double other = evaluate_cost(p, config, f.ctx, EvalKey{2, 4});
  CHECK(a != other);  // different shot stream, same sequences
}

TEST_CASE("benchmark sequences depend only on the seed") {
  Fixture f;
  CostConfig config;
  config.sequence_length = 12;
  config.sequences = 4;
  config.seed = 77;
  auto s1 = cost_sequences(config, f.table);
  auto s2 = cost_sequences(config, f.table);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].indices == s2[i].indices);
    CHECK(s1[i].recovery == s2[i].recovery);
  }
  config.seed = 78;
  auto s3 = cost_sequences(config, f.table);
  CHECK(s1[0].indices != s3[0].indices);
}

TEST_CASE("invalid candidates score zero without evaluation") {
  Fixture f;
  CostConfig config;
  config.sequence_length = 5;
  config.sequences = 2;
  config.shots = 10;
  ParameterSet bad = ParameterSet::drag(-1.0, 0.0, f.ctx.ssb_nominal);
  CostBreakdown b = evaluate_cost_detailed(bad, config, f.ctx);
  CHECK_FALSE(b.ok);
  CHECK(b.value == 0.0);
  CHECK(b.setup_ns == 0);
  CHECK(b.evaluation_ns == 0);
}

TEST_CASE("timing split covers the evaluation pipeline") {
  Fixture f;
  CostConfig config;
  config.sequence_length = 8;
  config.sequences = 3;
  config.shots = 50;
  CostBreakdown b = evaluate_cost_detailed(f.nominal_params(), config, f.ctx);
  REQUIRE(b.ok);
  CHECK(b.decode_ns >= 0);
  CHECK(b.setup_ns > 0);
  CHECK(b.evaluation_ns > 0);
}

TEST_CASE("a calibrated-area pulse beats a detuned one") {
  // Sanity direction check: the cost must prefer the pulse that actually
  // rotates by pi/2.
  Fixture f;
  CostConfig config;
  config.sequence_length = 20;
  config.sequences = 8;
  config.shots = 4000;
  config.seed = 11;
  ParameterSet good = f.nominal_params(0.0);
  ParameterSet off = good;
  off.values(0) *= 0.8;
  double cg = evaluate_cost(good, config, f.ctx);
  double co = evaluate_cost(off, config, f.ctx);
  CHECK(cg > co);
}

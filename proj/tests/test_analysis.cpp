#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qoct/clifford.hpp"
#include "qoct/optimize.hpp"
#include "qoct/rb_analysis.hpp"

using namespace qoct;

namespace {

using Eigen::MatrixXcd;

// Superoperator of a Kraus set in column-stacked convention.
QuantumChannel kraus_channel(const std::vector<MatrixXcd>& ops) {
  const int d = static_cast<int>(ops[0].rows());
  MatrixXcd s = MatrixXcd::Zero(d * d, d * d);
  for (const auto& k : ops) {
    MatrixXcd kc = k.conjugate();
    // kron(conj(K), K)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        s.block(i * d, j * d, d, d) += kc(i, j) * k;
  }
  return QuantumChannel(s);
}

// Moves a fraction l of each computational population to level 2, one way.
QuantumChannel leak_channel(double l) {
  MatrixXcd k0 = MatrixXcd::Identity(3, 3);
  k0(0, 0) = k0(1, 1) = std::sqrt(1.0 - l);
  MatrixXcd k1 = MatrixXcd::Zero(3, 3);
  k1(2, 0) = std::sqrt(l);
  MatrixXcd k2 = MatrixXcd::Zero(3, 3);
  k2(2, 1) = std::sqrt(l);
  return kraus_channel({k0, k1, k2});
}

// Depolarizes the computational block while leaving level-2 population alone.
QuantumChannel subspace_depolarizing(double p, int dim) {
  MatrixXcd t = MatrixXcd::Zero(dim * dim, dim * dim);
  auto idx = [dim](int r, int c) { return r + c * dim; };
  t(idx(0, 0), idx(0, 0)) = t(idx(0, 0), idx(1, 1)) = 0.5;
  t(idx(1, 1), idx(0, 0)) = t(idx(1, 1), idx(1, 1)) = 0.5;
  for (int j = 2; j < dim; ++j) t(idx(j, j), idx(j, j)) = 1.0;
  MatrixXcd s = (1.0 - p) * MatrixXcd::Identity(dim * dim, dim * dim) + p * t;
  return QuantumChannel(s);
}

MatrixXcd embed(const Eigen::Matrix2cd& u, int dim) {
  MatrixXcd big = MatrixXcd::Identity(dim, dim);
  big.topLeftCorner<2, 2>() = u;
  return big;
}

std::vector<QuantumChannel> synthetic_cliffords(const CliffordTable& table, int dim,
                                                const QuantumChannel& error) {
  std::vector<QuantumChannel> out;
  for (int i = 0; i < table.size(); ++i)
    out.push_back(QuantumChannel::from_unitary(embed(table.element(i).unitary, dim)).then(error));
  return out;
}

const std::vector<int> kLengths = {1, 3, 6, 10, 16, 24, 36, 50, 70, 100};

}  // namespace

TEST_CASE("dataset regeneration with the same seed is exact") {
  CliffordTable table = CliffordTable::build();
  auto channels = synthetic_cliffords(table, 2, subspace_depolarizing(0.02, 2));
  RbDataset a = generate_rb_dataset_from_channels(channels, table, {1, 4, 9}, 5, 300, 42);
  RbDataset b = generate_rb_dataset_from_channels(channels, table, {1, 4, 9}, 5, 300, 42);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].n0 == b.points[i].n0);
    CHECK(a.points[i].n1 == b.points[i].n1);
    CHECK(a.points[i].n2 == b.points[i].n2);
  }
  RbDataset c = generate_rb_dataset_from_channels(channels, table, {1, 4, 9}, 5, 300, 43);
  bool all_equal = true;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    if (a.points[i].n0 != c.points[i].n0) all_equal = false;
  CHECK_FALSE(all_equal);
}

TEST_CASE("counts sum to the shot budget and respect the dimension") {
  CliffordTable table = CliffordTable::build();
  auto channels = synthetic_cliffords(table, 2, subspace_depolarizing(0.05, 2));
  RbDataset data = generate_rb_dataset_from_channels(channels, table, {2, 7}, 4, 250, 1);
  REQUIRE(data.points.size() == 8);
  for (const RbPoint& pt : data.points) {
    CHECK(pt.n0 + pt.n1 + pt.n2 == 250);
    CHECK(pt.n2 == 0);  // two-level channels cannot leak
  }
}

TEST_CASE("length grids must be strictly increasing") {
  CliffordTable table = CliffordTable::build();
  auto channels = synthetic_cliffords(table, 2, QuantumChannel::identity(2));
  CHECK_THROWS_AS(
      generate_rb_dataset_from_channels(channels, table, {5, 5}, 2, 10, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      generate_rb_dataset_from_channels(channels, table, {9, 4}, 2, 10, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(generate_rb_dataset_from_channels(channels, table, {}, 2, 10, 0),
                  std::invalid_argument);
}

TEST_CASE("perfect gates keep every shot in the ground state") {
  CliffordTable table = CliffordTable::build();
  auto channels = synthetic_cliffords(table, 2, QuantumChannel::identity(2));
  RbDataset data = generate_rb_dataset_from_channels(channels, table, {1, 10, 50}, 3, 500, 7);
  for (const RbPoint& pt : data.points) CHECK(pt.n0 == 500);
  LeakageResult res = analyze_leakage_rb(data);
  CHECK(res.l1 == 0.0);
  CHECK_FALSE(res.p0_fit.identifiable);  // nothing decays, so lambda2 is meaningless
}

TEST_CASE("curve summaries implement the sample mean and error") {
  RbDataset data;
  data.lengths = {2, 5};
  data.sequences = 2;
  data.shots = 100;
  data.points = {
      {2, 0, 100, 80, 15, 5},
      {2, 1, 100, 90, 8, 2},
      {5, 0, 100, 70, 20, 10},
      {5, 1, 100, 60, 30, 10},
  };
  auto p0 = rb_curve_p0(data);
  REQUIRE(p0.size() == 2);
  CHECK(p0[0].length == 2);
  CHECK(std::abs(p0[0].mean - 0.85) < 1e-12);
  CHECK(std::abs(p0[0].stderr_mean - std::sqrt(0.005 / 2)) < 1e-12);
  CHECK(std::abs(p0[1].mean - 0.65) < 1e-12);
  auto chi1 = rb_curve_chi1(data);
  CHECK(std::abs(chi1[0].mean - 0.965) < 1e-12);
  CHECK(std::abs(chi1[1].mean - 0.90) < 1e-12);
}

TEST_CASE("a single sequence falls back to the binomial error") {
  RbDataset data;
  data.lengths = {3};
  data.sequences = 1;
  data.shots = 100;
  data.points = {{3, 0, 100, 80, 15, 5}};
  auto p0 = rb_curve_p0(data);
  CHECK(std::abs(p0[0].stderr_mean - std::sqrt(0.8 * 0.2 / 100)) < 1e-12);
}

TEST_CASE("two-level depolarizing noise fits to the analytic decay") {
  CliffordTable table = CliffordTable::build();
  const double p = 0.02;
  auto channels = synthetic_cliffords(table, 2, subspace_depolarizing(p, 2));
  RbDataset data = generate_rb_dataset_from_channels(channels, table, kLengths, 10, 100000, 11);
  LeakageResult res = analyze_leakage_rb(data);
  CHECK(std::abs(res.lambda2 - (1.0 - p)) < 0.02);
  CHECK(res.l1 < 1e-3);
  CHECK(res.p0_fit.converged);
}

TEST_CASE("injected leakage is recovered by the invariant-subspace fit") {
  CliffordTable table = CliffordTable::build();
  const double leak = 0.004;
  auto channels = synthetic_cliffords(table, 3, leak_channel(leak));
  RbDataset data = generate_rb_dataset_from_channels(channels, table, kLengths, 16, 50000, 13);
  LeakageResult res = analyze_leakage_rb(data);
  CHECK(res.chi1_fit.converged);
  CHECK(std::abs(res.l1 - leak) < 0.1 * leak);
}

TEST_CASE("combined leakage and depolarizing separate into the two decays") {
  CliffordTable table = CliffordTable::build();
  const double leak = 0.004, p = 0.03;
  QuantumChannel error = leak_channel(leak).then(subspace_depolarizing(p, 3));
  auto channels = synthetic_cliffords(table, 3, error);
  RbDataset data = generate_rb_dataset_from_channels(channels, table, kLengths, 16, 50000, 17);
  LeakageResult res = analyze_leakage_rb(data);
  const double lambda2_true = (1.0 - p) * (1.0 - leak);
  CHECK(std::abs(res.l1 - leak) < 0.1 * leak);
  CHECK(std::abs(res.lambda2 - lambda2_true) < 0.02);
  double f_true = 0.5 * (lambda2_true + 1.0 - leak);
  CHECK(std::abs(res.f_avg - f_true) < 0.01);
  CHECK(res.f_avg_err > 0.0);
  CHECK(res.f_avg_err < 0.05);
}

TEST_CASE("the pulse-level pipeline matches the channel-level one") {
  CliffordTable table = CliffordTable::build();
  DeviceConfig cfg;
  cfg.dim = 4;
  cfg.anharmonicity = -1.981;
  cfg.sample_period = 1.0 / 2.4;
  DragParams dp;
  dp.amplitude = half_pi_amplitude(0.25 * 20 * cfg.sample_period, 20, cfg.sample_period);
  dp.sigma = 0.25 * 20 * cfg.sample_period;
  dp.beta = 0.3;
  dp.anharmonicity = cfg.anharmonicity;
  dp.n_samples = 20;
  SampledPulse pulse = drag_pulse(dp, cfg.sample_period);

  AtomicChannels atomics = build_atomic_channels(pulse, cfg, NoiseModel{}, 0.3, 0.0);
  auto channels = clifford_channels(table, atomics);
  RbDataset via_channels =
      generate_rb_dataset_from_channels(channels, table, {1, 6, 14}, 4, 120, 23);
  RbDataset via_pulse = generate_rb_dataset(pulse, cfg, NoiseModel{}, 0.3, 0.0, table,
                                            {1, 6, 14}, 4, 120, 23);
  REQUIRE(via_channels.points.size() == via_pulse.points.size());
  for (std::size_t i = 0; i < via_pulse.points.size(); ++i) {
    CHECK(via_pulse.points[i].n0 == via_channels.points[i].n0);
    CHECK(via_pulse.points[i].n2 == via_channels.points[i].n2);
  }
}

TEST_CASE("full pipeline produces a sane report for a real pulse") {
  CliffordTable table = CliffordTable::build();
  DeviceConfig cfg;
  cfg.dim = 4;
  cfg.anharmonicity = -1.981;
  cfg.sample_period = 1.0 / 2.4;
  DragParams dp;
  dp.sigma = 0.25 * 20 * cfg.sample_period;
  dp.amplitude = half_pi_amplitude(dp.sigma, 20, cfg.sample_period);
  dp.beta = 0.3;
  dp.anharmonicity = cfg.anharmonicity;
  dp.n_samples = 20;
  SampledPulse pulse = drag_pulse(dp, cfg.sample_period);
  NoiseModel noise;
  noise.amplitude_damping = true;
  noise.pure_dephasing = true;
  noise.t1 = 105000.0;
  noise.t2 = 39000.0;

  LeakageResult res = full_leakage_rb(pulse, cfg, noise, 0.3, 0.0, table,
                                      {1, 10, 30, 60, 100}, 5, 400, 29);
  CHECK(res.l1 >= 0.0);
  CHECK(res.l1 < 0.05);
  CHECK(res.f_avg > 0.5);
  CHECK(res.f_avg <= 1.0 + 1e-9);
  CHECK(std::isfinite(res.f_avg_err));
}

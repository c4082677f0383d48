#include "qoct/rb_analysis.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "qoct/rng.hpp"

namespace qoct {

namespace {

constexpr std::uint64_t kRbSequenceDomain = 0x52425351ull;
constexpr std::uint64_t kRbShotDomain = 0x52425348ull;

void check_lengths(const std::vector<int>& lengths) {
  if (lengths.empty()) throw std::invalid_argument("rb dataset: no lengths");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] < 1) throw std::invalid_argument("rb dataset: lengths must be >= 1");
    if (i > 0 && lengths[i] <= lengths[i - 1])
      throw std::invalid_argument("rb dataset: lengths must be strictly increasing");
  }
}

std::vector<RbCurvePoint> curve(const RbDataset& dataset,
                                const std::function<double(const RbPoint&)>& value) {
  std::vector<RbCurvePoint> out;
  for (int m : dataset.lengths) {
    double sum = 0.0, sum2 = 0.0;
    int k = 0;
    double p_last = 0.0;
    for (const RbPoint& pt : dataset.points) {
      if (pt.length != m) continue;
      double v = value(pt);
      sum += v;
      sum2 += v * v;
      p_last = v;
      ++k;
    }
    RbCurvePoint cp;
    cp.length = m;
    cp.mean = sum / k;
    if (k > 1) {
      double var = (sum2 - sum * sum / k) / (k - 1);
      cp.stderr_mean = std::sqrt(std::max(0.0, var) / k);
    } else {
      // Single sequence: fall back to the binomial error of the counts.
      cp.stderr_mean = std::sqrt(std::max(p_last * (1.0 - p_last), 1e-12) /
                                 static_cast<double>(dataset.shots));
    }
    out.push_back(cp);
  }
  return out;
}

}  // namespace

RbDataset generate_rb_dataset_from_channels(const std::vector<QuantumChannel>& cliffords,
                                            const CliffordTable& table,
                                            const std::vector<int>& lengths, int sequences,
                                            int shots, std::uint64_t seed) {
  check_lengths(lengths);
  if (sequences < 1) throw std::invalid_argument("rb dataset: need at least one sequence");
  if (shots < 1) throw std::invalid_argument("rb dataset: need at least one shot");
  if (static_cast<int>(cliffords.size()) != table.size())
    throw std::invalid_argument("rb dataset: channel count does not match table");

  RbDataset data;
  data.lengths = lengths;
  data.sequences = sequences;
  data.shots = shots;
  data.seed = seed;

  RngStream seq_domain = RngStream(seed).child(kRbSequenceDomain);
  RngStream shot_domain = RngStream(seed).child(kRbShotDomain);

  for (std::size_t li = 0; li < lengths.size(); ++li) {
    for (int k = 0; k < sequences; ++k) {
      RbSequence seq = random_sequence(
          lengths[li], table, seq_domain.child(li).child(k).next_u64());
      Eigen::VectorXd pops = sequence_survival(seq, cliffords);
      std::vector<double> probs(pops.data(), pops.data() + pops.size());
      RngStream shot_rng = shot_domain.child(li).child(k);
      auto counts = shot_rng.multinomial(shots, probs);

      RbPoint pt;
      pt.length = lengths[li];
      pt.seq_index = k;
      pt.shots = shots;
      pt.n0 = static_cast<int>(counts[0]);
      pt.n1 = counts.size() > 1 ? static_cast<int>(counts[1]) : 0;
      pt.n2 = 0;
      for (std::size_t j = 2; j < counts.size(); ++j) pt.n2 += static_cast<int>(counts[j]);
      data.points.push_back(pt);
    }
  }
  return data;
}

RbDataset generate_rb_dataset(const SampledPulse& base, const DeviceConfig& cfg,
                              const NoiseModel& noise, double rise_time, double dephasing_scale,
                              const CliffordTable& table, const std::vector<int>& lengths,
                              int sequences, int shots, std::uint64_t seed) {
  AtomicChannels atomics = build_atomic_channels(base, cfg, noise, rise_time, dephasing_scale);
  return generate_rb_dataset_from_channels(clifford_channels(table, atomics), table, lengths,
                                           sequences, shots, seed);
}

std::vector<RbCurvePoint> rb_curve_p0(const RbDataset& dataset) {
  return curve(dataset,
               [](const RbPoint& pt) { return static_cast<double>(pt.n0) / pt.shots; });
}

std::vector<RbCurvePoint> rb_curve_chi1(const RbDataset& dataset) {
  return curve(dataset, [](const RbPoint& pt) {
    return static_cast<double>(pt.n0 + pt.n1) / pt.shots;
  });
}

LeakageResult analyze_leakage_rb(const RbDataset& dataset) {
  std::vector<double> ns, chi1, chi1_err, p0, p0_err;
  for (const RbCurvePoint& cp : rb_curve_chi1(dataset)) {
    ns.push_back(cp.length);
    chi1.push_back(cp.mean);
    chi1_err.push_back(cp.stderr_mean);
  }
  for (const RbCurvePoint& cp : rb_curve_p0(dataset)) {
    p0.push_back(cp.mean);
    p0_err.push_back(cp.stderr_mean);
  }

  // Zero spread (e.g. noiseless data) would break inverse-variance weights;
  // fall back to the unweighted fit in that case.
  auto usable = [](const std::vector<double>& errs) {
    for (double e : errs)
      if (!(e > 0.0)) return false;
    return true;
  };

  LeakageResult out;
  out.chi1_fit = fit_single_decay(ns, chi1, usable(chi1_err) ? chi1_err : std::vector<double>{});
  const double a = out.chi1_fit.offset;
  const double b = out.chi1_fit.amplitude;
  out.lambda1 = out.chi1_fit.decay;
  out.lambda1_err = out.chi1_fit.decay_err;
  out.l1 = leakage_per_clifford(a, out.lambda1);

  // First-order propagation through L1 = (1 - A)(1 - lambda1).
  Eigen::Vector2d grad(-(1.0 - out.lambda1), -(1.0 - a));
  Eigen::Matrix2d cov_al;
  cov_al << out.chi1_fit.covariance(0, 0), out.chi1_fit.covariance(0, 2),
      out.chi1_fit.covariance(2, 0), out.chi1_fit.covariance(2, 2);
  out.l1_err = std::sqrt(std::max(0.0, grad.dot(cov_al * grad)));

  out.p0_fit =
      fit_double_decay(ns, p0, b, out.lambda1, usable(p0_err) ? p0_err : std::vector<double>{});
  out.lambda2 = out.p0_fit.decay;
  out.lambda2_err = out.p0_fit.decay_err;

  out.f_avg = average_fidelity(out.lambda2, out.l1);
  out.f_avg_err = 0.5 * std::sqrt(out.lambda2_err * out.lambda2_err + out.l1_err * out.l1_err);
  return out;
}

LeakageResult full_leakage_rb(const SampledPulse& base, const DeviceConfig& cfg,
                              const NoiseModel& noise, double rise_time, double dephasing_scale,
                              const CliffordTable& table, const std::vector<int>& lengths,
                              int sequences, int shots, std::uint64_t seed) {
  RbDataset data = generate_rb_dataset(base, cfg, noise, rise_time, dephasing_scale, table,
                                       lengths, sequences, shots, seed);
  return analyze_leakage_rb(data);
}

}  // namespace qoct

#pragma once

#include <cstdint>
#include <vector>

#include "qoct/decay_fit.hpp"
#include "qoct/rb_cost.hpp"

namespace qoct {

struct RbPoint {
  int length = 0;
  int seq_index = 0;
  int shots = 0;
  int n0 = 0;
  int n1 = 0;
  int n2 = 0;  // levels >= 2 folded together
};

struct RbDataset {
  std::vector<int> lengths;  // strictly increasing
  int sequences = 0;         // K per length
  int shots = 0;
  std::uint64_t seed = 0;
  std::vector<RbPoint> points;
};

// Simulates K random sequences per length through the given per-Clifford
// channels and samples multinomial counts. Every (length, sequence) cell has
// its own derived RNG streams, so regeneration with the same seed is exact.
RbDataset generate_rb_dataset_from_channels(const std::vector<QuantumChannel>& cliffords,
                                            const CliffordTable& table,
                                            const std::vector<int>& lengths, int sequences,
                                            int shots, std::uint64_t seed);

// Same protocol with the channels built from a pulse envelope and device
// model.
RbDataset generate_rb_dataset(const SampledPulse& base, const DeviceConfig& cfg,
                              const NoiseModel& noise, double rise_time, double dephasing_scale,
                              const CliffordTable& table, const std::vector<int>& lengths,
                              int sequences, int shots, std::uint64_t seed);

// Per-length summary: mean and standard error over the K sequences.
struct RbCurvePoint {
  int length = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

// Curves of p0 and p_chi1 = (n0 + n1)/shots against sequence length.
std::vector<RbCurvePoint> rb_curve_p0(const RbDataset& dataset);
std::vector<RbCurvePoint> rb_curve_chi1(const RbDataset& dataset);

struct LeakageResult {
  double l1 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double f_avg = 0.0;
  double l1_err = 0.0;
  double lambda1_err = 0.0;
  double lambda2_err = 0.0;
  double f_avg_err = 0.0;
  DecayFitResult chi1_fit;
  DecayFitResult p0_fit;
};

// Two-step decay analysis: fit p_chi1 = A + B lambda1^n, derive the leakage
// per Clifford, then fit p0 with the first exponential held fixed and combine
// into the average fidelity. Standard errors come from first-order
// propagation of the fit covariances (fits treated as independent).
LeakageResult analyze_leakage_rb(const RbDataset& dataset);

LeakageResult full_leakage_rb(const SampledPulse& base, const DeviceConfig& cfg,
                              const NoiseModel& noise, double rise_time, double dephasing_scale,
                              const CliffordTable& table, const std::vector<int>& lengths,
                              int sequences, int shots, std::uint64_t seed);

}  // namespace qoct

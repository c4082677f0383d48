#pragma once

#include <complex>
#include <vector>

namespace qoct {

// Complex baseband envelope sampled on a uniform grid. Re is the in-phase
// drive amplitude and Im the quadrature, both in rad/ns.
struct SampledPulse {
  std::vector<std::complex<double>> samples;
  double dt = 1.0;  // ns

  double duration() const { return static_cast<double>(samples.size()) * dt; }
  void validate() const;
};

struct DragParams {
  double amplitude = 0.0;      // peak of the in-phase Gaussian, rad/ns
  double sigma = 0.0;          // Gaussian width, ns
  double beta = 0.0;           // dimensionless quadrature weight
  double anharmonicity = 0.0;  // rad/ns, must be nonzero
  int n_samples = 0;
};

// Gaussian-with-derivative envelope: the in-phase part is a pedestal-
// subtracted Gaussian centered on the pulse (zero at the outer sample edges),
// the quadrature part is (beta/anharmonicity) times its exact derivative.
// Samples are taken at interval midpoints t_n = (n + 1/2) dt.
SampledPulse drag_pulse(const DragParams& params, double dt);

// Adds one complex correction per sample: samples[n] += a[n] + i b[n].
// `corrections` holds (a_0, b_0, a_1, b_1, ...) and must match the length.
SampledPulse apply_corrections(const SampledPulse& pulse, const std::vector<double>& corrections);

// Integral of the in-phase part: sum(Re) * dt, radians.
double rotation_angle(const SampledPulse& pulse);

// Convolves the envelope with a truncated Gaussian kernel whose width is set
// so a step input rises from 10% to 90% in `rise_time` ns. The kernel is
// normalized to unit sum after truncation, so the output area equals the
// input area exactly and the pulse is padded by the kernel half-width on each
// side. rise_time <= 0 returns the input unchanged.
SampledPulse bandwidth_filter(const SampledPulse& pulse, double rise_time);

// Rotates the envelope in the IQ plane: samples[n] *= exp(i phase). Phase 0
// drives +X, pi/2 drives +Y.
SampledPulse atomic_pulse(const SampledPulse& base, double phase);

struct CarrierConfig {
  double ssb_frequency = 0.0;  // rad/ns, single-sideband offset written into the AWG
  double phase = 0.0;          // rad
};

struct IqSamples {
  std::vector<double> i;
  std::vector<double> q;
  double dt = 1.0;
};

// Mixes the baseband envelope onto the sideband carrier evaluated at sample
// midpoints: I + iQ = samples[n] * exp(+i (w (n + 1/2) dt + phase)).
IqSamples export_awg(const SampledPulse& pulse, const CarrierConfig& carrier);

// Inverse of export_awg on the same grid.
SampledPulse demodulate_awg(const IqSamples& iq, const CarrierConfig& carrier);

}  // namespace qoct

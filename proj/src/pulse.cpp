#include "qoct/pulse.hpp"

#include <cmath>
#include <stdexcept>

namespace qoct {

namespace {
const std::complex<double> kI(0.0, 1.0);
}

void SampledPulse::validate() const {
  if (samples.empty()) throw std::invalid_argument("pulse: no samples");
  if (!(dt > 0.0)) throw std::invalid_argument("pulse: dt must be positive");
  for (const auto& s : samples)
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw std::invalid_argument("pulse: non-finite sample");
}

SampledPulse drag_pulse(const DragParams& params, double dt) {
  if (params.n_samples < 2) throw std::invalid_argument("drag: need at least two samples");
  if (!(dt > 0.0)) throw std::invalid_argument("drag: dt must be positive");
  if (!(params.sigma > 0.0)) throw std::invalid_argument("drag: sigma must be positive");
  if (params.anharmonicity == 0.0)
    throw std::invalid_argument("drag: anharmonicity must be nonzero");

  const int n = params.n_samples;
  const double duration = n * dt;
  const double center = 0.5 * duration;
  const double s2 = params.sigma * params.sigma;

  // Pedestal subtraction: the raw Gaussian is shifted and rescaled so the
  // envelope hits exactly zero at t = 0 and t = duration while keeping the
  // requested peak amplitude at the center.
  const double edge = std::exp(-0.5 * center * center / s2);
  const double rescale = 1.0 / (1.0 - edge);

  SampledPulse p;
  p.dt = dt;
  p.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) * dt - center;
    double g = std::exp(-0.5 * t * t / s2);
    double in_phase = params.amplitude * (g - edge) * rescale;
    // Quadrature is the exact derivative of the pedestal-subtracted shape.
    double deriv = params.amplitude * rescale * g * (-t / s2);
    p.samples[i] = in_phase + kI * (params.beta / params.anharmonicity) * deriv;
  }
  return p;
}

SampledPulse apply_corrections(const SampledPulse& pulse, const std::vector<double>& corrections) {
  pulse.validate();
  if (corrections.size() != 2 * pulse.samples.size())
    throw std::invalid_argument("corrections: need one (a, b) pair per sample");
  SampledPulse out = pulse;
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] += corrections[2 * i] + kI * corrections[2 * i + 1];
  return out;
}

double rotation_angle(const SampledPulse& pulse) {
  double area = 0.0;
  for (const auto& s : pulse.samples) area += s.real();
  return area * pulse.dt;
}

SampledPulse bandwidth_filter(const SampledPulse& pulse, double rise_time) {
  pulse.validate();
  if (rise_time <= 0.0) return pulse;

  // For a Gaussian kernel the 10-90% step response time is 2.563 sigma.
  const double sigma = rise_time / 2.563;
  const int half = static_cast<int>(std::ceil(3.0 * sigma / pulse.dt));
  if (half < 1) return pulse;

  std::vector<double> kernel(2 * half + 1);
  double norm = 0.0;
  for (int k = -half; k <= half; ++k) {
    double t = k * pulse.dt;
    kernel[k + half] = std::exp(-0.5 * t * t / (sigma * sigma));
    norm += kernel[k + half];
  }
  for (double& v : kernel) v /= norm;

  const int n = static_cast<int>(pulse.samples.size());
  SampledPulse out;
  out.dt = pulse.dt;
  out.samples.assign(n + 2 * half, {0.0, 0.0});
  for (int i = 0; i < n + 2 * half; ++i) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = -half; k <= half; ++k) {
      int src = i - half - k;  // input index feeding output sample i
      if (src >= 0 && src < n) acc += kernel[k + half] * pulse.samples[src];
    }
    out.samples[i] = acc;
  }
  return out;
}

SampledPulse atomic_pulse(const SampledPulse& base, double phase) {
  base.validate();
  SampledPulse out = base;
  const std::complex<double> rot = std::exp(kI * phase);
  for (auto& s : out.samples) s *= rot;
  return out;
}

IqSamples export_awg(const SampledPulse& pulse, const CarrierConfig& carrier) {
  pulse.validate();
  IqSamples iq;
  iq.dt = pulse.dt;
  iq.i.resize(pulse.samples.size());
  iq.q.resize(pulse.samples.size());
  for (std::size_t n = 0; n < pulse.samples.size(); ++n) {
    double t = (static_cast<double>(n) + 0.5) * pulse.dt;
    std::complex<double> mixed =
        pulse.samples[n] * std::exp(kI * (carrier.ssb_frequency * t + carrier.phase));
    iq.i[n] = mixed.real();
    iq.q[n] = mixed.imag();
  }
  return iq;
}

SampledPulse demodulate_awg(const IqSamples& iq, const CarrierConfig& carrier) {
  if (iq.i.size() != iq.q.size()) throw std::invalid_argument("awg: I/Q length mismatch");
  if (!(iq.dt > 0.0)) throw std::invalid_argument("awg: dt must be positive");
  SampledPulse p;
  p.dt = iq.dt;
  p.samples.resize(iq.i.size());
  for (std::size_t n = 0; n < iq.i.size(); ++n) {
    double t = (static_cast<double>(n) + 0.5) * iq.dt;
    p.samples[n] =
        (iq.i[n] + kI * iq.q[n]) * std::exp(-kI * (carrier.ssb_frequency * t + carrier.phase));
  }
  return p;
}

}  // namespace qoct

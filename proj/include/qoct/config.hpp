#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoct/device.hpp"
#include "qoct/optimize.hpp"

namespace qoct {

// Raised for malformed or out-of-range configuration and input files; the CLI
// maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment configuration in boundary units (MHz, us, ns, GS/s). Conversion
// to the core's rad/ns happens in the derived-view accessors below, once.
struct ExperimentConfig {
  struct Device {
    int d = 4;
    double anharmonicity_mhz = -315.28;
    double qubit_freq_mhz = 5117.22;
    double sample_rate_gsps = 2.4;
    double ssb_freq_mhz = 100.0;
  } device;

  struct Noise {
    double t1_us = 105.0;  // 0 disables amplitude damping
    double t2_us = 39.0;   // 0 disables dephasing
    double dephasing_k = 0.0;
  } noise;

  struct Cost {
    int m = 120;
    int k = 20;
    int shots = 1000;
    std::uint64_t seed = 1;
  } cost;

  struct Drag {
    int n_samples = 20;
    double sigma_fraction = 0.25;      // sigma = fraction * duration
    double initial_amplitude = 0.0;    // rad/ns; 0 derives the pi/2 amplitude
  } drag;

  struct Cmaes {
    int lambda = 0;
    struct Sigma0 {
      double amplitude_frac = 0.1;
      double beta = 0.3;
      double ssb_mhz = 2.0;
      double correction_frac = 0.03;
      double stage2_shrink = 0.3;
    } sigma0;
    struct Bounds {
      double amplitude_frac = 3.0;
      double beta = 5.0;
      double ssb_mhz = 20.0;
      double correction_frac = 0.5;
    } bounds;
    struct MaxIter {
      int drag = 150;
      int pwc = 400;
    } max_iter;
    double target = 0.0;  // 0 disables the early stop
  } cmaes;

  struct Rb {
    std::vector<int> lengths = {1, 5, 10, 20, 40, 60, 90, 120, 160, 200};
    int k = 20;
    int shots = 1000;
  } rb;

  struct Filter {
    double rise_time_ns = 0.3;
  } filter;

  void validate() const;

  // Derived views in core units.
  DeviceConfig device_config() const;
  NoiseModel noise_model() const;
  CostConfig cost_config() const;
  double ssb_nominal() const;       // rad/ns
  double drag_sigma() const;        // ns
  double drag_duration() const;     // ns
  PipelineSettings pipeline_settings() const;

  static ExperimentConfig defaults();
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string to_json_text() const;
};

}  // namespace qoct

#pragma once

#include <stdexcept>

namespace qoct {

// Simulated transmon in the frame rotating at the drive frequency. All rates
// are angular (rad/ns); conversion from the MHz / GS/s units used in config
// files happens at the config boundary, never inside the core.
struct DeviceConfig {
  int dim = 4;                  // number of levels kept in the simulation
  double anharmonicity = 0.0;   // rad/ns, negative for a transmon
  double detuning = 0.0;        // rad/ns, drive frequency minus qubit frequency
  double sample_period = 1.0;   // ns per sample

  void validate() const {
    if (dim < 2) throw std::invalid_argument("device: need at least two levels");
    if (!(sample_period > 0.0)) throw std::invalid_argument("device: sample period must be positive");
  }
};

// Incoherent error model. Times are in ns; a disabled channel ignores its
// time constant entirely (amplitude damping off means T1 is treated as
// infinite when deriving the pure dephasing rate).
struct NoiseModel {
  bool amplitude_damping = false;
  bool pure_dephasing = false;
  double t1 = 0.0;  // ns
  double t2 = 0.0;  // ns

  void validate() const {
    if (amplitude_damping && !(t1 > 0.0))
      throw std::invalid_argument("noise: amplitude damping enabled with nonpositive T1");
    if (pure_dephasing && !(t2 > 0.0))
      throw std::invalid_argument("noise: pure dephasing enabled with nonpositive T2");
    if (amplitude_damping && pure_dephasing && t2 > 2.0 * t1)
      throw std::invalid_argument("noise: T2 must not exceed 2*T1");
  }
};

}  // namespace qoct

#pragma once

#include <Eigen/Dense>

namespace qoct {

// Optimizer search space. Stage one tunes the analytic pulse
// (amplitude, beta, ssb frequency); stage two appends one complex correction
// per sample, flattened as (a_0, b_0, a_1, b_1, ...).
struct ParameterSet {
  enum class Stage { Drag, Pwc };

  Stage stage = Stage::Drag;
  Eigen::VectorXd values;

  int correction_samples() const {
    return stage == Stage::Pwc ? static_cast<int>(values.size() - 3) / 2 : 0;
  }

  double amplitude() const { return values(0); }
  double beta() const { return values(1); }
  double ssb_frequency() const { return values(2); }  // rad/ns, absolute

  static ParameterSet drag(double amplitude, double beta, double ssb);
  static ParameterSet pwc_from_drag(const ParameterSet& drag_params, int n_samples);
};

}  // namespace qoct

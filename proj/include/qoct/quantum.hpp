#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "qoct/device.hpp"
#include "qoct/pulse.hpp"

namespace qoct {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Drift Hamiltonian in the drive frame, diagonal in the level basis: level j
// carries j * detuning + anharmonicity * j(j-1)/2 (rad/ns).
Matrix drift_hamiltonian(const DeviceConfig& cfg);

// Ladder quadratures with bosonic matrix elements: X couples neighbouring
// levels with sqrt(j), Y is its i-rotated partner. Drive term in the
// Hamiltonian is Re(env)/2 * X + Im(env)/2 * Y.
std::pair<Matrix, Matrix> control_operators(int dim);

// Piecewise-constant unitary propagator over the pulse: product of
// exp(-i H_n dt) taken sample by sample, via Hermitian eigendecomposition so
// the result is unitary to machine precision.
Matrix propagate_unitary(const SampledPulse& pulse, const DeviceConfig& cfg);

// Completely positive map stored as a dim^2 x dim^2 superoperator acting on
// column-stacked density matrices: vec(rho) index = row + col * dim, and
// vec(A rho B) = (B^T (x) A) vec(rho).
class QuantumChannel {
 public:
  QuantumChannel() = default;
  explicit QuantumChannel(Matrix super) : super_(std::move(super)) {}

  static QuantumChannel identity(int dim);
  static QuantumChannel from_unitary(const Matrix& u);

  int dim() const;
  const Matrix& super() const { return super_; }

  // Sequential composition: (a.then(b))(rho) = b(a(rho)).
  QuantumChannel then(const QuantumChannel& after) const;

  Matrix apply(const Matrix& rho) const;

  // Trace of the Choi matrix equals dim for a trace-preserving map; this
  // checks the trace-preservation identity directly on the superoperator.
  bool is_trace_preserving(double tol = 1e-9) const;

  Matrix choi() const;
  double choi_min_eigenvalue() const;

 private:
  Matrix super_;
};

// Lindblad collapse operators for the enabled channels: amplitude damping
// sqrt(j/T1) |j-1><j| for each level j, and pure dephasing
// sqrt(2 gamma_pd) * diag(0, 1, ..., d-1) with gamma_pd = 1/T2 - 1/(2 T1)
// (T1 taken infinite when amplitude damping is disabled). Channels whose
// derived rate is zero are omitted.
std::vector<Matrix> collapse_operators(const NoiseModel& noise, int dim);

// Piecewise-constant Lindblad propagation of the master equation
// drho/dt = -i[H, rho] + sum_k D[C_k] rho over the pulse.
QuantumChannel propagate_open(const SampledPulse& pulse, const DeviceConfig& cfg,
                              const NoiseModel& noise);

// Qubit-phase-flip channel on a d-level system:
// rho -> (1-gamma) rho + gamma Z rho Z with Z = diag(1, -1, 1, ..., 1).
QuantumChannel dephasing_channel(double gamma, int dim);

// Average gate fidelity of the qubit block of `channel` against a 2x2 target
// unitary: the superoperator is projected onto the computational subspace,
// composed with the inverse target, and F = (2 chi00 + 1) / 3 where chi00 is
// the identity-process weight Tr(S_err) / 4. Leakage shows up as trace loss,
// so F accounts for it. `cptp_ok` reports whether the full channel passed a
// CPTP sanity check.
struct FidelityResult {
  double value = 0.0;
  bool cptp_ok = false;
};
FidelityResult gate_fidelity(const QuantumChannel& channel, const Eigen::Matrix2cd& target);

// Populations (real diagonal) of a density matrix.
Eigen::VectorXd populations(const Matrix& rho);

// Average probability that a state prepared uniformly in the computational
// subspace leaves it after the channel: 1 - Tr[P ch(P/2)] with
// P = |0><0| + |1><1|.
double leakage_rate(const QuantumChannel& channel);

}  // namespace qoct

#include "qoct/quantum.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace qoct {

namespace {
const std::complex<double> kI(0.0, 1.0);
}

Matrix drift_hamiltonian(const DeviceConfig& cfg) {
  cfg.validate();
  Matrix h = Matrix::Zero(cfg.dim, cfg.dim);
  for (int j = 0; j < cfg.dim; ++j)
    h(j, j) = j * cfg.detuning + 0.5 * cfg.anharmonicity * j * (j - 1);
  return h;
}

std::pair<Matrix, Matrix> control_operators(int dim) {
  if (dim < 2) throw std::invalid_argument("control operators: need at least two levels");
  Matrix x = Matrix::Zero(dim, dim);
  Matrix y = Matrix::Zero(dim, dim);
  for (int j = 1; j < dim; ++j) {
    double g = std::sqrt(static_cast<double>(j));
    x(j - 1, j) = g;
    x(j, j - 1) = g;
    y(j - 1, j) = -kI * g;
    y(j, j - 1) = kI * g;
  }
  return {x, y};
}

Matrix propagate_unitary(const SampledPulse& pulse, const DeviceConfig& cfg) {
  pulse.validate();
  cfg.validate();
  const int d = cfg.dim;
  const Matrix h0 = drift_hamiltonian(cfg);
  const auto [sx, sy] = control_operators(d);
  Matrix u = Matrix::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  for (const auto& s : pulse.samples) {
    Matrix h = h0 + 0.5 * s.real() * sx + 0.5 * s.imag() * sy;
    es.compute(h);
    Vector phases = (-kI * pulse.dt * es.eigenvalues().cast<std::complex<double>>().array()).exp();
    u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * u;
  }
  return u;
}

QuantumChannel QuantumChannel::identity(int dim) {
  return QuantumChannel(Matrix::Identity(dim * dim, dim * dim));
}

QuantumChannel QuantumChannel::from_unitary(const Matrix& u) {
  return QuantumChannel(Eigen::kroneckerProduct(u.conjugate(), u));
}

int QuantumChannel::dim() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(super_.rows()))));
}

QuantumChannel QuantumChannel::then(const QuantumChannel& after) const {
  return QuantumChannel(after.super_ * super_);
}

Matrix QuantumChannel::apply(const Matrix& rho) const {
  const int d = dim();
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("channel: dimension mismatch");
  Vector v(Eigen::Map<const Vector>(rho.data(), d * d));
  Vector out = super_ * v;
  return Eigen::Map<const Matrix>(out.data(), d, d);
}

bool QuantumChannel::is_trace_preserving(double tol) const {
  const int d = dim();
  // Tr(ch(rho)) = sum over diagonal vec indices of S vec(rho); the map is TP
  // iff the row-sum functional matches the trace functional.
  Eigen::RowVectorXcd tr = Eigen::RowVectorXcd::Zero(d * d);
  for (int j = 0; j < d; ++j) tr(j + j * d) = 1.0;
  Eigen::RowVectorXcd pulled = tr * super_;
  return (pulled - tr).cwiseAbs().maxCoeff() < tol;
}

Matrix QuantumChannel::choi() const {
  const int d = dim();
  // Choi = sum_{ij} |i><j| (x) ch(|i><j|), assembled column by column from
  // the superoperator's action on matrix units.
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Vector unit = Vector::Zero(d * d);
      unit(i + j * d) = 1.0;
      Vector mapped = super_ * unit;
      Matrix block = Eigen::Map<const Matrix>(mapped.data(), d, d);
      choi.block(i * d, j * d, d, d) = block;
    }
  return choi;
}

double QuantumChannel::choi_min_eigenvalue() const {
  Matrix c = choi();
  Matrix herm = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<Matrix> collapse_operators(const NoiseModel& noise, int dim) {
  noise.validate();
  std::vector<Matrix> ops;
  if (noise.amplitude_damping) {
    Matrix lower = Matrix::Zero(dim, dim);
    for (int j = 1; j < dim; ++j) lower(j - 1, j) = std::sqrt(j / noise.t1);
    ops.push_back(lower);
  }
  if (noise.pure_dephasing) {
    double inv_t1 = noise.amplitude_damping ? 1.0 / noise.t1 : 0.0;
    double gamma_pd = 1.0 / noise.t2 - 0.5 * inv_t1;
    if (gamma_pd < -1e-15) throw std::invalid_argument("noise: negative pure dephasing rate");
    if (gamma_pd > 0.0) {
      Matrix num = Matrix::Zero(dim, dim);
      for (int j = 0; j < dim; ++j) num(j, j) = j;
      ops.push_back(std::sqrt(2.0 * gamma_pd) * num);
    }
  }
  return ops;
}

QuantumChannel propagate_open(const SampledPulse& pulse, const DeviceConfig& cfg,
                              const NoiseModel& noise) {
  pulse.validate();
  cfg.validate();
  const int d = cfg.dim;
  const Matrix id = Matrix::Identity(d, d);
  const Matrix h0 = drift_hamiltonian(cfg);
  const auto [sx, sy] = control_operators(d);

  // Dissipative part of the generator is pulse-independent.
  Matrix dissipator = Matrix::Zero(d * d, d * d);
  for (const Matrix& c : collapse_operators(noise, d)) {
    Matrix cdc = c.adjoint() * c;
    dissipator += Eigen::kroneckerProduct(c.conjugate(), c).eval();
    dissipator -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
    dissipator -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
  }

  Matrix total = Matrix::Identity(d * d, d * d);
  for (const auto& s : pulse.samples) {
    Matrix h = h0 + 0.5 * s.real() * sx + 0.5 * s.imag() * sy;
    Matrix gen = -kI * (Eigen::kroneckerProduct(id, h).eval() -
                        Eigen::kroneckerProduct(h.transpose(), id).eval()) +
                 dissipator;
    Matrix step = (gen * pulse.dt).exp();
    total = step * total;
  }
  return QuantumChannel(std::move(total));
}

QuantumChannel dephasing_channel(double gamma, int dim) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("dephasing: gamma outside [0,1]");
  if (dim < 2) throw std::invalid_argument("dephasing: need at least two levels");
  Matrix z = Matrix::Identity(dim, dim);
  z(1, 1) = -1.0;
  Matrix super = (1.0 - gamma) * Matrix::Identity(dim * dim, dim * dim) +
                 gamma * Eigen::kroneckerProduct(z.conjugate(), z).eval();
  return QuantumChannel(std::move(super));
}

FidelityResult gate_fidelity(const QuantumChannel& channel, const Eigen::Matrix2cd& target) {
  const int d = channel.dim();
  if (d < 2) throw std::invalid_argument("fidelity: channel too small");

  FidelityResult res;
  res.cptp_ok = channel.is_trace_preserving(1e-6) && channel.choi_min_eigenvalue() > -1e-9;

  // Project the superoperator onto the qubit block: keep vec indices whose
  // row and column labels are both in {0, 1}.
  Eigen::Matrix4cd s2;
  const auto& s = channel.super();
  for (int c1 = 0; c1 < 2; ++c1)
    for (int r1 = 0; r1 < 2; ++r1)
      for (int c2 = 0; c2 < 2; ++c2)
        for (int r2 = 0; r2 < 2; ++r2)
          s2(r2 + 2 * c2, r1 + 2 * c1) = s(r2 + d * c2, r1 + d * c1);

  Eigen::Matrix2cd tinv = target.adjoint();
  Eigen::Matrix4cd err = Eigen::kroneckerProduct(tinv.conjugate(), tinv).eval() * s2;
  double chi00 = 0.25 * err.trace().real();
  res.value = (2.0 * chi00 + 1.0) / 3.0;
  return res;
}

Eigen::VectorXd populations(const Matrix& rho) { return rho.diagonal().real(); }

double leakage_rate(const QuantumChannel& channel) {
  const int d = channel.dim();
  Matrix proj = Matrix::Zero(d, d);
  proj(0, 0) = 1.0;
  proj(1, 1) = 1.0;
  Matrix out = channel.apply(0.5 * proj);
  return 1.0 - (out(0, 0) + out(1, 1)).real();
}

}  // namespace qoct

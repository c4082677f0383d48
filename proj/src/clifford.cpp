#include "qoct/clifford.hpp"

#include <cmath>
#include <complex>
#include <deque>
#include <stdexcept>

#include "qoct/rng.hpp"

namespace qoct {

namespace {

const std::complex<double> kI(0.0, 1.0);
constexpr double kPi = 3.14159265358979323846;

// Two unitaries represent the same Clifford iff |Tr(U^dag V)| = 2.
bool same_up_to_phase(const Eigen::Matrix2cd& u, const Eigen::Matrix2cd& v) {
  return std::abs((u.adjoint() * v).trace()) > 2.0 - 1e-9;
}

// Fixes the global phase so table entries are unique: rotate so the largest-
// magnitude entry (first in column-major order on ties) is real positive.
Eigen::Matrix2cd canonical_phase(const Eigen::Matrix2cd& u) {
  int best_r = 0, best_c = 0;
  double best = -1.0;
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r)
      if (std::abs(u(r, c)) > best + 1e-12) {
        best = std::abs(u(r, c));
        best_r = r;
        best_c = c;
      }
  std::complex<double> z = u(best_r, best_c);
  return u * (std::abs(z) / z);
}

}  // namespace

double atomic_phase(Atomic gate) {
  switch (gate) {
    case Atomic::PlusX: return 0.0;
    case Atomic::MinusX: return kPi;
    case Atomic::PlusY: return 0.5 * kPi;
    case Atomic::MinusY: return 1.5 * kPi;
  }
  throw std::invalid_argument("atomic: unknown gate");
}

Eigen::Matrix2cd atomic_unitary(Atomic gate) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  switch (gate) {
    case Atomic::PlusX:
      u << s, -kI * s, -kI * s, s;
      return u;
    case Atomic::MinusX:
      u << s, kI * s, kI * s, s;
      return u;
    case Atomic::PlusY:
      u << s, -s, s, s;
      return u;
    case Atomic::MinusY:
      u << s, s, -s, s;
      return u;
  }
  throw std::invalid_argument("atomic: unknown gate");
}

CliffordTable CliffordTable::build() {
  CliffordTable table;

  CliffordElement id;
  id.unitary = Eigen::Matrix2cd::Identity();
  table.elements_.push_back(id);

  // Breadth-first closure over the atomic alphabet; BFS order guarantees the
  // stored decomposition is among the shortest for each element.
  std::deque<int> frontier{0};
  const std::array<Atomic, 4> alphabet{Atomic::PlusX, Atomic::MinusX, Atomic::PlusY,
                                       Atomic::MinusY};
  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    for (Atomic a : alphabet) {
      Eigen::Matrix2cd candidate =
          canonical_phase(atomic_unitary(a) * table.elements_[cur].unitary);
      if (table.lookup(candidate) >= 0) continue;
      CliffordElement next;
      next.unitary = candidate;
      next.decomposition = table.elements_[cur].decomposition;
      next.decomposition.push_back(a);
      table.elements_.push_back(std::move(next));
      frontier.push_back(static_cast<int>(table.elements_.size()) - 1);
    }
  }
  if (table.size() != 24) throw std::logic_error("clifford: closure did not reach 24 elements");

  table.identity_ = 0;
  table.product_.resize(24);
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b) {
      int idx = table.lookup(table.elements_[a].unitary * table.elements_[b].unitary);
      if (idx < 0) throw std::logic_error("clifford: product left the group");
      table.product_[a][b] = idx;
    }
  for (int a = 0; a < 24; ++a) {
    int idx = table.lookup(table.elements_[a].unitary.adjoint());
    if (idx < 0) throw std::logic_error("clifford: inverse left the group");
    table.inverse_[a] = idx;
  }
  return table;
}

int CliffordTable::lookup(const Eigen::Matrix2cd& u) const {
  for (int i = 0; i < size(); ++i)
    if (same_up_to_phase(elements_[i].unitary, u)) return i;
  return -1;
}

RbSequence random_sequence(int m, const CliffordTable& table, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("rb sequence: length must be at least 1");
  RbSequence seq;
  seq.seed = seed;
  seq.indices.resize(m);
  RngStream rng(seed);
  int running = table.identity_index();
  for (int k = 0; k < m; ++k) {
    int idx = static_cast<int>(rng.next_below(24));
    seq.indices[k] = idx;
    running = table.compose(running, idx);
  }
  seq.recovery = table.inverse(running);
  return seq;
}

}  // namespace qoct

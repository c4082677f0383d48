#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace qoct {

// The four calibrated quarter-turn gates. Everything else is composed from
// these, so the table below stores decompositions over this alphabet.
enum class Atomic : int { PlusX = 0, MinusX = 1, PlusY = 2, MinusY = 3 };

// IQ phase that turns the base envelope into the given gate: 0 for +X/2,
// pi for -X/2, pi/2 for +Y/2, 3pi/2 for -Y/2.
double atomic_phase(Atomic gate);

// Ideal qubit unitary, exp(-i pi/4 * sigma) for the signed axis.
Eigen::Matrix2cd atomic_unitary(Atomic gate);

struct CliffordElement {
  Eigen::Matrix2cd unitary;            // phase-canonical representative
  std::vector<Atomic> decomposition;   // time order: first entry is played first
};

// The 24 single-qubit Cliffords (modulo global phase) with shortest-first
// decompositions over the atomic alphabet, plus closed product and inverse
// tables for exact recovery-gate lookup.
class CliffordTable {
 public:
  static CliffordTable build();

  int size() const { return static_cast<int>(elements_.size()); }
  const CliffordElement& element(int idx) const { return elements_.at(idx); }

  // Index of the element equal to u up to global phase, or -1.
  int lookup(const Eigen::Matrix2cd& u) const;

  // Index of the composition "first, then second" (unitary U2 * U1).
  int compose(int first, int second) const { return product_.at(second).at(first); }

  int inverse(int idx) const { return inverse_.at(idx); }
  int identity_index() const { return identity_; }

 private:
  std::vector<CliffordElement> elements_;
  std::vector<std::array<int, 24>> product_;  // product_[a][b] = lookup(U_a U_b)
  std::array<int, 24> inverse_{};
  int identity_ = 0;
};

// Random benchmarking sequence: m uniformly drawn Cliffords plus the exact
// recovery element that inverts their product.
struct RbSequence {
  std::vector<int> indices;
  int recovery = 0;
  std::uint64_t seed = 0;
};

RbSequence random_sequence(int m, const CliffordTable& table, std::uint64_t seed);

}  // namespace qoct

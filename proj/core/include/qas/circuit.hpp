#pragma once

#include "qas/gates.hpp"

#include <vector>

namespace qas {

/// Ordered gate list over n qubits with per-qubit moment counters.
///
/// A moment is an abstract time slice; a gate lands in the earliest slice
/// after everything already touching its qubits, so depth() equals the
/// maximum counter. The counters are maintained incrementally on append
/// and can be recomputed from scratch for verification.
class Circuit {
 public:
  explicit Circuit(int n);

  int num_qubits() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<int>& moments() const { return moments_; }

  void append(const Gate& g);

  int depth() const;
  int gate_count() const { return static_cast<int>(gates_.size()); }
  int rotation_count() const;
  int cnot_count() const;
  int parameter_count() const { return rotation_count(); }

  /// Moments recomputed from the gate list alone; equals moments().
  std::vector<int> recompute_moments() const;

  /// Copy with rotation angles replaced in gate order.
  /// Throws if the angle count differs from parameter_count().
  Circuit bind_angles(const std::vector<double>& angles) const;

  /// Current rotation angles in gate order.
  std::vector<double> angles() const;

  /// Circuit applying the inverse unitary (reversed gates, negated angles).
  Circuit inverse() const;

 private:
  int n_;
  std::vector<Gate> gates_;
  std::vector<int> moments_;
};

}  // namespace qas

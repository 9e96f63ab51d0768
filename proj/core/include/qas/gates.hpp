#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qas {

/// Maximum qubit count for dense simulation.
inline constexpr int kMaxQubits = 10;

enum class GateKind { RX, RY, RZ, CNOT, CZ, X, H };

inline bool is_rotation(GateKind k) {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

inline bool is_two_qubit(GateKind k) {
  return k == GateKind::CNOT || k == GateKind::CZ;
}

const char* gate_name(GateKind k);
GateKind gate_kind_from_name(const std::string& name);

/// One gate application. Two-qubit gates list control then target.
/// Rotation kinds carry an angle in radians; all other kinds must not.
struct Gate {
  GateKind kind;
  std::vector<int> qubits;
  std::optional<double> angle;

  static Gate rx(int q, double theta) { return {GateKind::RX, {q}, theta}; }
  static Gate ry(int q, double theta) { return {GateKind::RY, {q}, theta}; }
  static Gate rz(int q, double theta) { return {GateKind::RZ, {q}, theta}; }
  static Gate cnot(int ctrl, int targ) { return {GateKind::CNOT, {ctrl, targ}, std::nullopt}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, std::nullopt}; }
  static Gate x(int q) { return {GateKind::X, {q}, std::nullopt}; }
  static Gate h(int q) { return {GateKind::H, {q}, std::nullopt}; }

  /// Throws if qubit indices repeat, exceed n, or the angle is
  /// missing/forbidden/non-finite for the kind.
  void validate(int n) const;
};

/// Unitary matrix of a gate (2x2 or 4x4). Rotations use half-angle
/// convention, RZ = diag(exp(-i theta/2), exp(i theta/2)). For two-qubit
/// gates the first listed qubit is the more significant row/column bit.
Eigen::MatrixXcd gate_matrix(const Gate& g);

}  // namespace qas

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftcost/errors.hpp"

namespace ftcost {

using cplx = std::complex<double>;

/// Tolerance for matrix identities (unitarity, determinant, equality checks).
inline constexpr double kMatTol = 1e-12;

/// Logical-cycle weights of the basic gate set, in units of the code
/// distance d (Fowler et al. gate timings: T = 11.25d, S = 10d, H = 2.5d,
/// Pauli gates are instantaneous).
inline constexpr double kCyclesT = 11.25;
inline constexpr double kCyclesS = 10.0;
inline constexpr double kCyclesH = 2.5;

// ---------------------------------------------------------------------------
// Gate labels
// ---------------------------------------------------------------------------

enum class Gate : std::uint8_t { I = 0, H, S, Sd, T, Td, X, Y, Z };

inline constexpr std::array<Gate, 9> kAllGates = {
    Gate::I, Gate::H, Gate::S, Gate::Sd, Gate::T,
    Gate::Td, Gate::X, Gate::Y, Gate::Z};

inline std::string_view gate_name(Gate g) {
  switch (g) {
    case Gate::I: return "I";
    case Gate::H: return "H";
    case Gate::S: return "S";
    case Gate::Sd: return "S+";
    case Gate::T: return "T";
    case Gate::Td: return "T+";
    case Gate::X: return "X";
    case Gate::Y: return "Y";
    case Gate::Z: return "Z";
  }
  return "?";
}

inline Gate parse_gate(std::string_view s) {
  if (s == "I") return Gate::I;
  if (s == "H") return Gate::H;
  if (s == "S") return Gate::S;
  if (s == "S+" || s == "Sd" || s == "S*") return Gate::Sd;
  if (s == "T") return Gate::T;
  if (s == "T+" || s == "Td" || s == "T*") return Gate::Td;
  if (s == "X") return Gate::X;
  if (s == "Y") return Gate::Y;
  if (s == "Z") return Gate::Z;
  throw rejected_input("unknown gate label '" + std::string(s) + "'");
}

inline Gate adjoint_gate(Gate g) {
  switch (g) {
    case Gate::S: return Gate::Sd;
    case Gate::Sd: return Gate::S;
    case Gate::T: return Gate::Td;
    case Gate::Td: return Gate::T;
    default: return g;  // I, H and Paulis are self-inverse
  }
}

// ---------------------------------------------------------------------------
// Unitary2
// ---------------------------------------------------------------------------

/// A 2x2 complex matrix, row-major. Values produced by this module satisfy
/// U U+ = I and |det U| = 1 to within kMatTol.
struct Unitary2 {
  cplx a{1.0}, b{0.0};  // row 0
  cplx c{0.0}, d{1.0};  // row 1

  friend Unitary2 operator*(const Unitary2& l, const Unitary2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }

  Unitary2 adjoint() const {
    return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
  }

  cplx det() const { return a * d - b * c; }

  /// max-entry magnitude of (*this - o)
  double max_abs_diff(const Unitary2& o) const {
    return std::max(std::max(std::abs(a - o.a), std::abs(b - o.b)),
                    std::max(std::abs(c - o.c), std::abs(d - o.d)));
  }

  bool is_unitary(double tol = kMatTol) const {
    const Unitary2 p = *this * adjoint();
    const double dev = p.max_abs_diff(Unitary2{});
    return dev <= tol && std::abs(std::abs(det()) - 1.0) <= tol;
  }

  /// Snap back onto the unitary group (Gram-Schmidt on the rows). Used to
  /// keep very long gate products from drifting; a no-op to within fp
  /// rounding for matrices that are already unitary.
  void reunitarize() {
    const double n0 = std::sqrt(std::norm(a) + std::norm(b));
    a /= n0;
    b /= n0;
    const cplx ip = std::conj(a) * c + std::conj(b) * d;
    c -= ip * a;
    d -= ip * b;
    const double n1 = std::sqrt(std::norm(c) + std::norm(d));
    c /= n1;
    d /= n1;
  }
};

inline Unitary2 basis_gate(Gate g) {
  constexpr double s2 = 0.7071067811865475244;  // 1/sqrt(2)
  const cplx i{0.0, 1.0};
  switch (g) {
    case Gate::I: return {1, 0, 0, 1};
    case Gate::H: return {s2, s2, s2, -s2};
    case Gate::S: return {1, 0, 0, i};
    case Gate::Sd: return {1, 0, 0, -i};
    case Gate::T: return {1, 0, 0, std::polar(1.0, M_PI / 4)};
    case Gate::Td: return {1, 0, 0, std::polar(1.0, -M_PI / 4)};
    case Gate::X: return {0, 1, 1, 0};
    case Gate::Y: return {0, -i, i, 0};
    case Gate::Z: return {1, 0, 0, -1};
  }
  throw rejected_input("unknown gate label");
}

/// R_z(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
inline Unitary2 rz(double theta) {
  if (!std::isfinite(theta)) throw rejected_input("rz: theta must be finite");
  return {std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2)};
}

/// R_x(theta) = H R_z(theta) H.
inline Unitary2 rx(double theta) {
  if (!std::isfinite(theta)) throw rejected_input("rx: theta must be finite");
  const double co = std::cos(theta / 2), si = std::sin(theta / 2);
  const cplx mi{0.0, -1.0};
  return {co, mi * si, mi * si, co};
}

// ---------------------------------------------------------------------------
// Global-phase-invariant distance
// ---------------------------------------------------------------------------

/// dist(A, B) = min over phases phi of the spectral norm ||A - e^{i phi} B||.
///
/// For unitary inputs this reduces to sqrt(2 - |tr(B+ A)|): the minimum over
/// phi of the larger chordal distance from e^{i phi} to the two eigenvalues
/// of B+ A is attained at the midpoint of their short arc. The plain formula
/// loses half the working precision near zero (sqrt cancellation), so small
/// distances are recomputed from the eigenphase spread of the phase-aligned
/// residual, which is accurate to ~1e-15 absolutely.
inline double dist(const Unitary2& A, const Unitary2& B) {
  // tr(B+ A) equals the Frobenius inner product <B, A>.
  const cplx t = std::conj(B.a) * A.a + std::conj(B.b) * A.b +
                 std::conj(B.c) * A.c + std::conj(B.d) * A.d;
  const double g = 2.0 - std::abs(t);
  if (g > 1e-8) return std::sqrt(g);

  // Near-coincident case: C = B+ A ~ e^{i phi} I. Align the phase, then take
  // the eigenvalue spread of the small residual E = e^{-i phi} C - I.
  const Unitary2 C = B.adjoint() * A;
  const cplx ph = std::polar(1.0, -std::arg(t));
  const cplx e00 = ph * C.a - 1.0, e01 = ph * C.b;
  const cplx e10 = ph * C.c, e11 = ph * C.d - 1.0;
  const cplx tr = e00 + e11;
  const cplx disc = std::sqrt(tr * tr - 4.0 * (e00 * e11 - e01 * e10));
  const cplx l1 = 1.0 + (tr + disc) / 2.0;
  const cplx l2 = 1.0 + (tr - disc) / 2.0;
  const double spread = std::abs(std::arg(l1 * std::conj(l2)));
  return 2.0 * std::sin(spread / 4.0);
}

// ---------------------------------------------------------------------------
// Gate sequences
// ---------------------------------------------------------------------------

/// Normalized gate tallies per the cycle-cost rule: T and T+ both count into
/// n_t, S and S+ into n_s, H into n_h; Pauli and identity labels are free.
struct GateCounts {
  std::int64_t n_h = 0;
  std::int64_t n_s = 0;
  std::int64_t n_t = 0;

  bool operator==(const GateCounts&) const = default;
};

inline GateCounts counts_of(std::span<const Gate> gates) {
  GateCounts c;
  for (Gate g : gates) {
    switch (g) {
      case Gate::H: ++c.n_h; break;
      case Gate::S:
      case Gate::Sd: ++c.n_s; break;
      case Gate::T:
      case Gate::Td: ++c.n_t; break;
      default: break;
    }
  }
  return c;
}

/// Cycle cost of the tallies at code distance d (T = 11.25d etc.).
inline double cycle_cost(const GateCounts& c, double d = 1.0) {
  return d * (kCyclesT * static_cast<double>(c.n_t) +
              kCyclesS * static_cast<double>(c.n_s) +
              kCyclesH * static_cast<double>(c.n_h));
}

/// An ordered gate list plus its normalized counts.
///
/// Application-order convention (used everywhere in this library): index 0
/// is applied first, i.e. seq_to_matrix([g0, g1, ..., gk]) returns the
/// matrix product U(gk) ... U(g1) U(g0).
struct GateSeq {
  std::vector<Gate> gates;
  GateCounts counts;
};

inline GateSeq normalize_counts(GateSeq seq) {
  seq.counts = counts_of(seq.gates);
  return seq;
}

inline GateSeq make_seq(std::vector<Gate> gates) {
  GateSeq s{std::move(gates), {}};
  s.counts = counts_of(s.gates);
  return s;
}

inline Unitary2 seq_to_matrix(std::span<const Gate> gates) {
  Unitary2 acc;
  std::size_t since_fix = 0;
  for (Gate g : gates) {
    acc = basis_gate(g) * acc;
    if (++since_fix == 4096) {  // fp hygiene for very long products
      acc.reunitarize();
      since_fix = 0;
    }
  }
  return acc;
}

inline Unitary2 seq_to_matrix(const GateSeq& seq) {
  return seq_to_matrix(std::span<const Gate>(seq.gates));
}

/// Sequence implementing the adjoint: reversed order, per-gate adjoints.
inline std::vector<Gate> adjoint_sequence(std::span<const Gate> gates) {
  std::vector<Gate> out;
  out.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it)
    out.push_back(adjoint_gate(*it));
  return out;
}

inline std::string seq_to_string(std::span<const Gate> gates) {
  std::string out;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (i) out += ' ';
    out += gate_name(gates[i]);
  }
  return out;
}

inline std::vector<Gate> seq_from_string(std::string_view text) {
  std::vector<Gate> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos >= text.size()) break;
    std::size_t end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(parse_gate(text.substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

}  // namespace ftcost

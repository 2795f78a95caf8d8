#pragma once

// Exact diagonalization of the two-mode circuit Hamiltonian in a truncated
// product of harmonic-oscillator bases, used to check the perturbative
// quantities produced by the quantizer.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "istq/circuit.hpp"
#include "istq/errors.hpp"
#include "istq/quantizer.hpp"

namespace istq {

struct OracleBasis {
  int N_q = 16;
  int N_r = 16;
};

struct OracleLevel {
  int n_q = 0;
  int n_r = 0;
  double energy = 0.0;   // GHz
  double overlap = 0.0;  // |<n_q n_r | state>|^2
};

struct OracleSpectrum {
  OracleBasis basis;
  std::vector<OracleLevel> levels;  // n_q + n_r <= 2, ordered by (n_q, n_r)
  double convergence = 0.0;         // max level drift against basis + 4, GHz
  SpectrumPoint point;              // perturbative values at the same bias

  const OracleLevel& level(int n_q, int n_r) const {
    for (const auto& l : levels)
      if (l.n_q == n_q && l.n_r == n_r) return l;
    throw LabelingError("oracle: level (" + std::to_string(n_q) + "," + std::to_string(n_r) + ") not labeled");
  }
  double energy(int n_q, int n_r) const { return level(n_q, n_r).energy; }
};

namespace detail {

constexpr int kMaxExcitations = 2;
constexpr double kConvergenceGate = 1e-4;  // GHz

inline void check_basis(const OracleBasis& b) {
  if (b.N_q < 8 || b.N_r < 8) throw DomainError("oracle: basis sizes must be >= 8");
  if (static_cast<long>(b.N_q) * b.N_r > 4096) throw DomainError("oracle: N_q * N_r exceeds 4096");
}

// Eigen-decomposition of the position operator lambda (a + a^dagger).
inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> position_dvr(int n, double lambda) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) x(i, i + 1) = x(i + 1, i) = lambda * std::sqrt(i + 1.0);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(x);
}

struct Diagonalization {
  Eigen::VectorXd energies;
  Eigen::MatrixXd states;
  Eigen::MatrixXd delta_r;  // resonator displacement operator from the minimum
  SpectrumPoint point;
};

// Harmonic part exact in the number basis; the anharmonic remainder of U,
// relative to the expansion minimum, is applied through the position
// eigenbasis (discrete variable representation).
inline Eigen::MatrixXd hamiltonian(const CircuitParams& p, const FluxBias& f, const OracleBasis& b,
                                   SpectrumPoint& pt, Eigen::MatrixXd* delta_r) {
  check_basis(b);
  pt = analyze_point(p, f);
  const auto model = circuit_model(p);
  const auto t = taylor_expand(p, f, pt.minimum);
  const double c20 = t.c[2][0], c02 = t.c[0][2];

  const auto dq = position_dvr(b.N_q, pt.lambda_q);
  const auto dr = position_dvr(b.N_r, pt.lambda_r);
  const int n = b.N_q * b.N_r;

  Eigen::VectorXd w(n);
  for (int i = 0; i < b.N_q; ++i) {
    const double xq = dq.eigenvalues()(i);
    for (int j = 0; j < b.N_r; ++j) {
      const double xr = dr.eigenvalues()(j);
      const double u = potential(model, f, pt.minimum.phi_q + xq, pt.minimum.phi_r + xr);
      w(i * b.N_r + j) = u - t.U0 - c20 * xq * xq - c02 * xr * xr;
    }
  }
  Eigen::MatrixXd s(n, n);
  for (int a = 0; a < b.N_q; ++a)
    for (int c = 0; c < b.N_r; ++c)
      for (int i = 0; i < b.N_q; ++i) {
        const double vq = dq.eigenvectors()(a, i);
        for (int j = 0; j < b.N_r; ++j) s(a * b.N_r + c, i * b.N_r + j) = vq * dr.eigenvectors()(c, j);
      }

  Eigen::MatrixXd h = s * w.asDiagonal() * s.transpose();
  for (int a = 0; a < b.N_q; ++a)
    for (int c = 0; c < b.N_r; ++c)
      h(a * b.N_r + c, a * b.N_r + c) += pt.omega_q * (a + 0.5) + pt.omega_r * (c + 0.5) + t.U0;
  h = 0.5 * (h + h.transpose()).eval();

  if (delta_r) {
    *delta_r = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < b.N_q; ++a)
      for (int c = 0; c + 1 < b.N_r; ++c) {
        const double v = pt.lambda_r * std::sqrt(c + 1.0);
        (*delta_r)(a * b.N_r + c, a * b.N_r + c + 1) = v;
        (*delta_r)(a * b.N_r + c + 1, a * b.N_r + c) = v;
      }
  }
  return h;
}

inline Diagonalization diagonalize(const CircuitParams& p, const FluxBias& f, const OracleBasis& b) {
  Diagonalization d;
  const Eigen::MatrixXd h = hamiltonian(p, f, b, d.point, &d.delta_r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw ConvergenceError("oracle: eigensolver failed");
  d.energies = es.eigenvalues();
  d.states = es.eigenvectors();
  return d;
}

// Eigenvector index carrying the largest weight of the bare state.
inline int label_index(const Diagonalization& d, const OracleBasis& b, int n_q, int n_r, double* overlap) {
  const int row = n_q * b.N_r + n_r;
  int best = 0;
  double w = -1.0;
  for (int j = 0; j < d.states.cols(); ++j) {
    const double o = d.states(row, j) * d.states(row, j);
    if (o > w) {
      w = o;
      best = j;
    }
  }
  if (!(w >= 0.5)) {
    std::ostringstream os;
    os << "oracle: state (" << n_q << "," << n_r << ") has maximal bare overlap " << w << " < 0.5";
    throw LabelingError(os.str());
  }
  if (overlap) *overlap = w;
  return best;
}

inline std::vector<OracleLevel> label_levels(const Diagonalization& d, const OracleBasis& b) {
  std::vector<OracleLevel> out;
  for (int q = 0; q <= kMaxExcitations; ++q)
    for (int r = 0; q + r <= kMaxExcitations; ++r) {
      OracleLevel l{q, r, 0.0, 0.0};
      l.energy = d.energies(label_index(d, b, q, r, &l.overlap));
      out.push_back(l);
    }
  return out;
}

}  // namespace detail

/// Full Hamiltonian matrix in the product number basis |n_q> (x) |n_r>,
/// index n_q * N_r + n_r, in GHz.
inline Eigen::MatrixXd build_hamiltonian(const CircuitParams& p, const FluxBias& f, const OracleBasis& b = {}) {
  SpectrumPoint pt;
  return detail::hamiltonian(p, f, b, pt, nullptr);
}

/// Labeled low levels plus a basis-convergence estimate from a solve at
/// (N_q + 4, N_r + 4).
inline OracleSpectrum solve_oracle(const CircuitParams& p, const FluxBias& f, const OracleBasis& b = {}) {
  const auto d = detail::diagonalize(p, f, b);
  OracleSpectrum s;
  s.basis = b;
  s.point = d.point;
  s.levels = detail::label_levels(d, b);
  const OracleBasis big{b.N_q + 4, b.N_r + 4};
  if (static_cast<long>(big.N_q) * big.N_r <= 4096) {
    const auto d2 = detail::diagonalize(p, f, big);
    const auto l2 = detail::label_levels(d2, big);
    for (std::size_t i = 0; i < l2.size(); ++i)
      s.convergence = std::max(s.convergence, std::abs(l2[i].energy - s.levels[i].energy));
  }
  return s;
}

namespace detail {

inline void require_converged(const OracleSpectrum& s) {
  if (!(s.convergence < kConvergenceGate)) {
    std::ostringstream os;
    os << "oracle: levels drift by " << s.convergence << " GHz when the basis grows by 4";
    throw ConvergenceError(os.str());
  }
}

}  // namespace detail

/// chi = E11 - E10 - E01 + E00, in MHz.
inline double dispersive_shift(const OracleSpectrum& s) {
  detail::require_converged(s);
  return 1e3 * (s.energy(1, 1) - s.energy(1, 0) - s.energy(0, 1) + s.energy(0, 0));
}

inline double dispersive_shift(const CircuitParams& p, const FluxBias& f, const OracleBasis& b = {}) {
  return dispersive_shift(solve_oracle(p, f, b));
}

/// Qubit ladder anharmonicity E20 - 2 E10 + E00, in GHz.
inline double exact_qubit_anharmonicity(const OracleSpectrum& s) {
  detail::require_converged(s);
  return s.energy(2, 0) - 2.0 * s.energy(1, 0) + s.energy(0, 0);
}

/// Resonator transition E01 - E00, in GHz.
inline double exact_resonator_frequency(const OracleSpectrum& s) {
  detail::require_converged(s);
  return s.energy(0, 1) - s.energy(0, 0);
}

struct Displacement {
  double measured = 0.0;   // <10|dr|10> - <00|dr|00>, rad
  double predicted = 0.0;  // -4 g_zx lambda_r / omega_r, rad
};

/// Qubit-state-dependent shift of the resonator phase expectation.
inline Displacement longitudinal_displacement(const CircuitParams& p, const FluxBias& f,
                                              const OracleBasis& b = {}) {
  const auto s = solve_oracle(p, f, b);
  detail::require_converged(s);
  const auto d = detail::diagonalize(p, f, b);
  auto expect = [&](int q, int r) {
    const int j = detail::label_index(d, b, q, r, nullptr);
    const Eigen::VectorXd v = d.states.col(j);
    return v.dot(d.delta_r * v);
  };
  Displacement out;
  out.measured = expect(1, 0) - expect(0, 0);
  out.predicted = -4.0 * (1e-3 * d.point.g.g_zx) * d.point.lambda_r / d.point.omega_r;
  return out;
}

}  // namespace istq

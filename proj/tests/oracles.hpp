#pragma once

// Reference implementations that share no code with the library: a Jacobi
// eigensolver, the textbook DEJMPS recurrence, RK4, explicit twirls, and
// random generators for property tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

// Cyclic Jacobi on a real symmetric matrix; returns eigenvalues, fills vecs.
inline Eigen::VectorXd jacobi(RMat a, RMat* vecs = nullptr) {
  const Eigen::Index n = a.rows();
  RMat v = RMat::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  if (vecs) *vecs = v;
  return a.diagonal();
}

// Real embedding [[Re, -Im], [Im, Re]]: each eigenvalue of h appears twice.
inline RMat embed(const CMat& h) {
  const Eigen::Index n = h.rows();
  RMat r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = h.real();
  r.topRightCorner(n, n) = -h.imag();
  r.bottomLeftCorner(n, n) = h.imag();
  r.bottomRightCorner(n, n) = h.real();
  return r;
}

// Eigenvalues of a Hermitian matrix, ascending, via the embedding.
inline std::vector<double> eigenvalues(const CMat& h) {
  const Eigen::VectorXd d = jacobi(embed(h));
  std::vector<double> all(d.data(), d.data() + d.size());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < all.size(); i += 2) out.push_back(0.5 * (all[i] + all[i + 1]));
  return out;
}

inline double entropy_bits(const CMat& rho) {
  double s = 0.0;
  for (double x : eigenvalues(rho))
    if (x > 1e-12) s -= x * std::log2(x);
  return s;
}

// log2 of a real symmetric positive matrix.
inline RMat log2m(const RMat& a) {
  RMat v;
  const Eigen::VectorXd d = jacobi(a, &v);
  Eigen::VectorXd l(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) l(i) = d(i) > 1e-12 ? std::log2(d(i)) : -1e6;
  return v * l.asDiagonal() * v.transpose();
}

// S(rho||sigma) in bits for full-rank sigma.
inline double relative_entropy_bits(const CMat& rho, const CMat& sigma) {
  const RMat r = embed(rho);
  return 0.5 * ((r * log2m(r)).trace() - (r * log2m(embed(sigma))).trace());
}

inline double h2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

// Explicit index loops; qubit pair, keep subsystem `keep` (0 or 1).
inline CMat partial_trace_pair(const CMat& rho, int keep) {
  CMat out = CMat::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out(i, j) += keep == 0 ? rho(2 * i + k, 2 * j + k) : rho(2 * k + i, 2 * k + j);
  return out;
}

inline CMat pauli(int i) {
  CMat m(2, 2);
  switch (i) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cd(0, -1), cd(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Depolarizing by its defining formula, acting on the second qubit of a pair.
inline CMat depolarize_second(const CMat& rho, double p) {
  CMat out = (1.0 - p) * rho;
  for (int k = 1; k < 4; ++k) {
    const CMat u = kron(pauli(0), pauli(k));
    out += (p / 3.0) * u * rho * u.adjoint();
  }
  return out;
}

// |psi+> and the Bell projectors in the library's documented order.
inline Eigen::VectorXcd bell(int i) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  switch (i) {
    case 0: v(0) = r; v(3) = r; break;
    case 1: v(1) = r; v(2) = r; break;
    case 2: v(1) = r; v(2) = -r; break;
    default: v(0) = r; v(3) = -r; break;
  }
  return v;
}

inline CMat bell_density(const std::array<double, 4>& c) {
  CMat m = CMat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) m += c[static_cast<std::size_t>(i)] * bell(i) * bell(i).adjoint();
  return m;
}

// Textbook DEJMPS recurrence on (A, B, C, D) = weights of
// (Phi+, Psi-, Psi+, Phi-) in the standard labelling.
struct Dejmps {
  std::array<double, 4> out;
  double success;
};
inline Dejmps dejmps_recurrence(const std::array<double, 4>& x, const std::array<double, 4>& y) {
  const double a1 = x[0], b1 = x[1], c1 = x[2], d1 = x[3];
  const double a2 = y[0], b2 = y[1], c2 = y[2], d2 = y[3];
  const double n = (a1 + b1) * (a2 + b2) + (c1 + d1) * (c2 + d2);
  return {{(a1 * a2 + b1 * b2) / n, (c1 * d2 + d1 * c2) / n, (c1 * c2 + d1 * d2) / n, (a1 * b2 + b1 * a2) / n}, n};
}

// Library order (psi+, phi+, phi-, psi-) in the (|00>+|11>) naming maps to
// standard labels: psi+ -> A, psi- -> D, phi- -> B, phi+ -> C.
inline std::array<double, 4> to_standard(const std::array<double, 4>& lib) { return {lib[0], lib[2], lib[1], lib[3]}; }
inline std::array<double, 4> from_standard(const std::array<double, 4>& s) { return {s[0], s[2], s[1], s[3]}; }

// Classical RK4 for dF/dt = -p F.
inline double rk4_fidelity(double f0, double p, double t, int steps) {
  const double h = t / steps;
  double f = f0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = -p * f, k2 = -p * (f + 0.5 * h * k1), k3 = -p * (f + 0.5 * h * k2), k4 = -p * (f + h * k3);
    f += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return f;
}

// Composite Simpson rule.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// ---- generators ---------------------------------------------------------------

struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(eng); }
  cd gauss() {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(eng), n(eng)};
  }
  CMat ginibre(Eigen::Index rows, Eigen::Index cols) {
    CMat g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = gauss();
    return g;
  }
  // Random density matrix of given rank (induced measure).
  CMat density(Eigen::Index dim, Eigen::Index rank) {
    const CMat g = ginibre(dim, rank);
    CMat r = g * g.adjoint();
    r /= r.trace().real();
    return 0.5 * (r + r.adjoint());
  }
  CMat unitary(Eigen::Index dim) {
    Eigen::HouseholderQR<CMat> qr(ginibre(dim, dim));
    CMat q = qr.householderQ();
    const CMat r = qr.matrixQR();
    for (Eigen::Index i = 0; i < dim; ++i) q.col(i) *= std::polar(1.0, -std::arg(r(i, i)));
    return q;
  }
  // Kraus operators of a random channel: blocks of a random isometry.
  std::vector<CMat> kraus(Eigen::Index dim, Eigen::Index count) {
    const CMat u = unitary(dim * count);
    std::vector<CMat> out;
    for (Eigen::Index k = 0; k < count; ++k) out.push_back(u.block(k * dim, 0, dim, dim));
    return out;
  }
  // Bell-weighted mixture with a random state, likely entangled.
  CMat entangled_pair(double bell_weight) {
    const Eigen::VectorXcd v = bell(0);
    return bell_weight * v * v.adjoint() + (1.0 - bell_weight) * density(4, 4);
  }
};

}  // namespace oracle

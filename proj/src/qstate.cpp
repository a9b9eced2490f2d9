#include "entshape/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "entshape/errors.hpp"

namespace entshape::qstate {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
  return out;
}

std::size_t compose(const std::vector<std::size_t>& ds, const std::vector<std::size_t>& dims) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) index = index * dims[k] + ds[k];
  return index;
}

void require_two_qubit(const DensityMatrix& rho, const char* what) {
  if (!rho.is_two_qubit()) throw InvalidArgument(std::string(what) + ": expected a two-qubit state");
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::vector<std::size_t> subsystem_dims)
    : matrix_(std::move(matrix)), dims_(std::move(subsystem_dims)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
    throw InvalidArgument("density matrix must be square and non-empty");
  if (dims_.empty() || product(dims_) != dim())
    throw InvalidArgument("subsystem dimensions do not multiply to the matrix dimension");
  if (dim() > kMaxDim) throw InvalidArgument("registers beyond 16 dimensions are not supported");
  if (!matrix_.allFinite()) throw InvalidArgument("density matrix has non-finite entries");
  if (max_abs_diff(matrix_, matrix_.adjoint()) > kHermitianTol)
    throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(matrix_.trace() - Complex(1.0)) > kTraceTol)
    throw InvalidArgument("density matrix trace is " + std::to_string(matrix_.trace().real()));
  // Symmetrise away the residual anti-Hermitian part so downstream solvers
  // see an exactly Hermitian matrix.
  matrix_ = (0.5 * (matrix_ + matrix_.adjoint())).eval();
  if (hermitian_eigen(matrix_).values.minCoeff() < -kPsdTol)
    throw InvalidArgument("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi, std::vector<std::size_t> subsystem_dims) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvalidArgument("pure state is not normalised");
  return DensityMatrix(psi * psi.adjoint(), std::move(subsystem_dims));
}

DensityMatrix DensityMatrix::maximally_mixed(std::vector<std::size_t> subsystem_dims) {
  const auto d = static_cast<Eigen::Index>(product(subsystem_dims));
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d), std::move(subsystem_dims));
}

DensityMatrix DensityMatrix::basis_state(std::size_t index, std::vector<std::size_t> subsystem_dims) {
  const auto d = static_cast<Eigen::Index>(product(subsystem_dims));
  if (static_cast<Eigen::Index>(index) >= d) throw InvalidArgument("basis index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(std::move(m), std::move(subsystem_dims));
}

DensityMatrix mixture(std::span<const double> weights, std::span<const DensityMatrix> states) {
  if (weights.size() != states.size() || states.empty())
    throw InvalidArgument("mixture: weights and states must be non-empty and of equal length");
  ComplexMatrix acc = ComplexMatrix::Zero(states[0].matrix().rows(), states[0].matrix().cols());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].subsystem_dims() != states[0].subsystem_dims())
      throw InvalidArgument("mixture: dimension mismatch");
    if (weights[i] < 0.0) throw InvalidArgument("mixture: negative weight");
    acc += weights[i] * states[i].matrix();
  }
  return DensityMatrix(std::move(acc), states[0].subsystem_dims());
}

Spectrum hermitian_eigen(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return (a - b).cwiseAbs().maxCoeff();
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  const auto& ma = a.matrix();
  const auto& mb = b.matrix();
  ComplexMatrix out(ma.rows() * mb.rows(), ma.cols() * mb.cols());
  for (Eigen::Index i = 0; i < ma.rows(); ++i)
    for (Eigen::Index j = 0; j < ma.cols(); ++j)
      out.block(i * mb.rows(), j * mb.cols(), mb.rows(), mb.cols()) = ma(i, j) * mb;
  std::vector<std::size_t> dims = a.subsystem_dims();
  dims.insert(dims.end(), b.subsystem_dims().begin(), b.subsystem_dims().end());
  return DensityMatrix(std::move(out), std::move(dims));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  const auto& dims = rho.subsystem_dims();
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (kept.empty() || std::adjacent_find(kept.begin(), kept.end()) != kept.end() || kept.back() >= dims.size())
    throw InvalidArgument("partial_trace: invalid subsystem index set");

  std::vector<bool> is_kept(dims.size(), false);
  for (auto k : kept) is_kept[k] = true;
  std::vector<std::size_t> kept_dims;
  for (auto k : kept) kept_dims.push_back(dims[k]);
  const auto out_dim = static_cast<Eigen::Index>(product(kept_dims));

  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  const std::size_t d = rho.dim();
  for (std::size_t i = 0; i < d; ++i) {
    const auto di = digits(i, dims);
    for (std::size_t j = 0; j < d; ++j) {
      const auto dj = digits(j, dims);
      bool traced_match = true;
      for (std::size_t k = 0; k < dims.size() && traced_match; ++k)
        if (!is_kept[k] && di[k] != dj[k]) traced_match = false;
      if (!traced_match) continue;
      std::vector<std::size_t> ri, rj;
      for (auto k : kept) {
        ri.push_back(di[k]);
        rj.push_back(dj[k]);
      }
      out(static_cast<Eigen::Index>(compose(ri, kept_dims)), static_cast<Eigen::Index>(compose(rj, kept_dims))) +=
          rho(i, j);
    }
  }
  return DensityMatrix(std::move(out), std::move(kept_dims));
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, std::size_t subsystem) {
  if (m.rows() != 4 || m.cols() != 4) throw InvalidArgument("partial_transpose: expected a 4x4 matrix");
  if (subsystem > 1) throw InvalidArgument("partial_transpose: subsystem must be 0 or 1");
  ComplexMatrix out(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) {
          const Complex v = m(2 * a + b, 2 * ap + bp);
          if (subsystem == 0)
            out(2 * ap + b, 2 * a + bp) = v;
          else
            out(2 * a + bp, 2 * ap + b) = v;
        }
  return out;
}

ComplexMatrix partial_transpose(const DensityMatrix& rho, std::size_t subsystem) {
  require_two_qubit(rho, "partial_transpose");
  return partial_transpose(rho.matrix(), subsystem);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const Spectrum s = hermitian_eigen(rho.matrix());
  double h = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    const double l = s.values(i);
    if (l > kEigenFloor) h -= l * std::log2(l);
  }
  return std::max(0.0, h);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("relative_entropy: dimension mismatch");
  const Spectrum ss = hermitian_eigen(sigma.matrix());
  double cross = 0.0;  // Tr rho log2 sigma over the support of sigma
  double outside = 0.0;
  for (Eigen::Index j = 0; j < ss.values.size(); ++j) {
    const auto v = ss.vectors.col(j);
    const double weight = (v.adjoint() * rho.matrix() * v)(0, 0).real();
    if (ss.values(j) > kEigenFloor)
      cross += weight * std::log2(ss.values(j));
    else
      outside += weight;
  }
  if (outside > kEigenFloor) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -von_neumann_entropy(rho) - cross);
}

Mixedness purity_and_mixedness(const DensityMatrix& rho) {
  const double purity = (rho.matrix() * rho.matrix()).trace().real();
  const double d = static_cast<double>(rho.dim());
  const double linear = d > 1 ? d / (d - 1.0) * (1.0 - purity) : 0.0;
  return {purity, std::clamp(linear, 0.0, 1.0)};
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("binary_entropy: argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

StateVector bell_vector(std::size_t index) {
  const double r = 1.0 / std::sqrt(2.0);
  StateVector v = StateVector::Zero(4);
  switch (index) {
    case 0: v << r, 0, 0, r; break;
    case 1: v << 0, r, r, 0; break;
    case 2: v << 0, r, -r, 0; break;
    case 3: v << r, 0, 0, -r; break;
    default: throw InvalidArgument("Bell index must be in [0,3]");
  }
  return v;
}

StateVector bell_vector(Bell which) { return bell_vector(static_cast<std::size_t>(which)); }

DensityMatrix bell_state(Bell which) { return DensityMatrix::from_pure(bell_vector(which), {2, 2}); }

BellDiagonalState::BellDiagonalState(std::array<double, 4> coefficients) : c_(coefficients) {
  double sum = 0.0;
  for (double x : c_) {
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) throw InvalidArgument("Bell coefficient outside [0,1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("Bell coefficients do not sum to 1");
  for (double& x : c_) x = std::clamp(x, 0.0, 1.0);
}

BellDiagonalState BellDiagonalState::project(const DensityMatrix& rho) {
  require_two_qubit(rho, "BellDiagonalState::project");
  std::array<double, 4> c{};
  double sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const StateVector v = bell_vector(k);
    c[k] = std::max(0.0, (v.adjoint() * rho.matrix() * v)(0, 0).real());
    sum += c[k];
  }
  for (double& x : c) x /= sum;
  return BellDiagonalState(c);
}

double BellDiagonalState::max_coefficient() const noexcept { return *std::max_element(c_.begin(), c_.end()); }

DensityMatrix BellDiagonalState::to_density() const {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const StateVector v = bell_vector(k);
    m += c_[k] * (v * v.adjoint());
  }
  return DensityMatrix(std::move(m), {2, 2});
}

double bell_offdiagonal_norm(const DensityMatrix& rho) {
  require_two_qubit(rho, "bell_offdiagonal_norm");
  ComplexMatrix basis(4, 4);
  for (std::size_t k = 0; k < 4; ++k) basis.col(static_cast<Eigen::Index>(k)) = bell_vector(k);
  ComplexMatrix in_bell = basis.adjoint() * rho.matrix() * basis;
  in_bell.diagonal().setZero();
  return in_bell.cwiseAbs().maxCoeff();
}

BellDiagonalState werner_paper(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("werner_paper: F outside [0,1]");
  const double rest = (1.0 - f) / 4.0;
  return BellDiagonalState({f + rest, rest, rest, rest});
}

}  // namespace entshape::qstate

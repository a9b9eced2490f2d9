#pragma once

// Dense linear algebra for small multi-qubit registers (at most 16x16).
//
// All entropies are in bits. Bell-basis ordering used everywhere:
//   0  psi+ = (|00> + |11>)/sqrt2
//   1  phi+ = (|01> + |10>)/sqrt2
//   2  phi- = (|01> - |10>)/sqrt2
//   3  psi- = (|00> - |11>)/sqrt2
// Basis index of a register is big-endian: the first subsystem is the most
// significant digit.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace entshape::qstate {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
// Eigenvalues below this are treated as exact zeros before any logarithm.
inline constexpr double kEigenFloor = 1e-12;
inline constexpr std::size_t kMaxDim = 16;

// Hermitian, unit-trace, PSD matrix tagged with local dimensions.
class DensityMatrix {
 public:
  // Throws InvalidArgument if any invariant fails.
  DensityMatrix(ComplexMatrix matrix, std::vector<std::size_t> subsystem_dims);

  static DensityMatrix from_pure(const StateVector& psi, std::vector<std::size_t> subsystem_dims);
  static DensityMatrix maximally_mixed(std::vector<std::size_t> subsystem_dims);
  // |index><index| in the computational basis.
  static DensityMatrix basis_state(std::size_t index, std::vector<std::size_t> subsystem_dims);

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::size_t>& subsystem_dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  Complex operator()(std::size_t r, std::size_t c) const {
    return matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  bool is_two_qubit() const noexcept { return dims_.size() == 2 && dims_[0] == 2 && dims_[1] == 2; }

 private:
  ComplexMatrix matrix_;
  std::vector<std::size_t> dims_;
};

// Convex combination sum_i w_i rho_i; all inputs share dimensions. Weights
// must be non-negative and sum to 1.
DensityMatrix mixture(std::span<const double> weights, std::span<const DensityMatrix> states);

struct Spectrum {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // columns
};

// Eigendecomposition of a Hermitian matrix (only the lower triangle is read).
Spectrum hermitian_eigen(const ComplexMatrix& h);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep);
// Transpose on one factor of a qubit pair. Output is Hermitian, not
// necessarily PSD.
ComplexMatrix partial_transpose(const DensityMatrix& rho, std::size_t subsystem);
// Same map on a raw 4x4 matrix (used for involution checks).
ComplexMatrix partial_transpose(const ComplexMatrix& m, std::size_t subsystem);

double von_neumann_entropy(const DensityMatrix& rho);
// S(rho||sigma) in bits, or +infinity when supp(rho) is not inside supp(sigma).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

struct Mixedness {
  double purity;
  double linear_entropy;  // d/(d-1) * (1 - purity), in [0, 1]
};
Mixedness purity_and_mixedness(const DensityMatrix& rho);

double binary_entropy(double x);

// Matrix function f(H) for Hermitian H through its eigendecomposition.
template <typename F>
ComplexMatrix hermitian_apply(const ComplexMatrix& h, F&& f) {
  const Spectrum s = hermitian_eigen(h);
  Eigen::VectorXcd d(s.values.size());
  for (Eigen::Index i = 0; i < s.values.size(); ++i) d(i) = f(s.values(i));
  return s.vectors * d.asDiagonal() * s.vectors.adjoint();
}

// ---- Bell-diagonal states --------------------------------------------------

enum class Bell : std::size_t { PsiPlus = 0, PhiPlus = 1, PhiMinus = 2, PsiMinus = 3 };

StateVector bell_vector(Bell which);
StateVector bell_vector(std::size_t index);
DensityMatrix bell_state(Bell which);

class BellDiagonalState {
 public:
  // Coefficients in the fixed Bell order; each in [0,1], sum 1 within 1e-12.
  explicit BellDiagonalState(std::array<double, 4> coefficients);

  // Diagonal of rho in the Bell basis (exact for Bell-diagonal input, the
  // Bell twirl otherwise).
  static BellDiagonalState project(const DensityMatrix& rho);

  const std::array<double, 4>& coefficients() const noexcept { return c_; }
  double operator[](std::size_t i) const { return c_[i]; }
  double fidelity() const noexcept { return c_[0]; }
  double max_coefficient() const noexcept;
  DensityMatrix to_density() const;

  bool operator==(const BellDiagonalState&) const = default;

 private:
  std::array<double, 4> c_;
};

// Largest deviation of rho from its Bell-basis diagonal part.
double bell_offdiagonal_norm(const DensityMatrix& rho);

// F|psi+><psi+| + (1-F) I/4.
BellDiagonalState werner_paper(double f);

}  // namespace entshape::qstate

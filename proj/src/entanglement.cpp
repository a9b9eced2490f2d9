#include "entshape/entanglement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "entshape/errors.hpp"

namespace entshape::entanglement {

using qstate::Complex;
using qstate::ComplexMatrix;

namespace {

using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

constexpr double kLn2 = std::numbers::ln2;

Vec2 qubit_vector(const QubitAngles& q) {
  return Vec2(std::cos(0.5 * q.theta), std::polar(std::sin(0.5 * q.theta), q.phi));
}

QubitAngles qubit_angles(const Vec2& v) {
  const double n0 = std::abs(v(0));
  const double n1 = std::abs(v(1));
  QubitAngles q;
  q.theta = 2.0 * std::atan2(n1, n0);
  q.phi = (n0 > 0.0 && n1 > 0.0) ? std::arg(v(1)) - std::arg(v(0)) : 0.0;
  return q;
}

Vec4 kron(const Vec2& a, const Vec2& b) { return Vec4(a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1)); }

Vec4 product_vector(const ProductState& s) { return kron(qubit_vector(s.a), qubit_vector(s.b)); }

// Round-trip through angles so the solver works on exactly what the
// certificate stores.
struct Atom {
  ProductState angles;
  Vec4 vec;
  explicit Atom(const ProductState& s) : angles(s), vec(product_vector(s)) {}
  Atom(const Vec2& a, const Vec2& b) : Atom(ProductState{qubit_angles(a), qubit_angles(b)}) {}
};

Vec2 top_eigenvector(const Mat2& m) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(m);
  return es.eigenvectors().col(1);
}

// Separable projection of Bell weights: cap the largest at 1/2 and rescale
// the others to fill the remaining mass.
std::array<double, 4> separable_bell_weights(std::array<double, 4> c) {
  const auto top = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  if (c[top] <= 0.5) return c;
  const double rest = 1.0 - c[top];
  for (std::size_t i = 0; i < 4; ++i) {
    if (i == top)
      c[i] = 0.5;
    else
      c[i] = rest > 0.0 ? c[i] * 0.5 / rest : 1.0 / 6.0;
  }
  return c;
}

// The two product states whose equal mixture equals (B_i + B_j)/2.
std::array<std::pair<Vec2, Vec2>, 2> vertex_atoms(std::size_t i, std::size_t j) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex im(0.0, 1.0);
  const std::array<std::array<Vec2, 2>, 3> axes = {{
      {Vec2(r, r), Vec2(r, -r)},            // x
      {Vec2(r, r * im), Vec2(r, -r * im)},  // y
      {Vec2(1, 0), Vec2(0, 1)},             // z
  }};
  const Vec4 bi = qstate::bell_vector(i);
  const Vec4 bj = qstate::bell_vector(j);
  const Mat4 target = 0.5 * (bi * bi.adjoint() + bj * bj.adjoint());
  for (const auto& axis : axes)
    for (int anti = 0; anti < 2; ++anti) {
      const Vec2& u0 = axis[0];
      const Vec2& u1 = axis[1];
      const Vec2& w0 = anti ? u1 : u0;
      const Vec2& w1 = anti ? u0 : u1;
      const Vec4 p = kron(u0, w0);
      const Vec4 q = kron(u1, w1);
      const Mat4 m = 0.5 * (p * p.adjoint() + q * q.adjoint());
      if ((m - target).cwiseAbs().maxCoeff() < 1e-12) return {{{u0, w0}, {u1, w1}}};
    }
  throw Error("no product decomposition for Bell vertex");
}

class Objective {
 public:
  Objective(const Mat4& rho, double floor) : rho_(rho), floor_(floor) {}

  Mat4 sigma(const std::vector<Atom>& atoms, const std::vector<double>& w) const {
    Mat4 s = Mat4::Identity() * (floor_ / 4.0);
    for (std::size_t k = 0; k < atoms.size(); ++k)
      if (w[k] > 0.0) s += ((1.0 - floor_) * w[k]) * (atoms[k].vec * atoms[k].vec.adjoint());
    return s;
  }

  // -Tr rho ln sigma (nats).
  double cross(const Mat4& sigma) const {
    Eigen::SelfAdjointEigenSolver<Mat4> es(sigma);
    double g = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double mu = std::max(es.eigenvalues()(j), std::numeric_limits<double>::min());
      const auto u = es.eigenvectors().col(j);
      g -= (u.adjoint() * rho_ * u)(0, 0).real() * std::log(mu);
    }
    return g;
  }

  double cross(const std::vector<Atom>& atoms, const std::vector<double>& w) const { return cross(sigma(atoms, w)); }

  // Frechet derivative of ln at sigma applied to rho; d(-Tr rho ln sigma) =
  // -Tr[gamma dsigma].
  Mat4 gradient_operator(const Mat4& sigma) const {
    Eigen::SelfAdjointEigenSolver<Mat4> es(sigma);
    const auto& mu = es.eigenvalues();
    const Mat4& u = es.eigenvectors();
    Mat4 r = u.adjoint() * rho_ * u;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double mi = std::max(mu(i), std::numeric_limits<double>::min());
        const double mj = std::max(mu(j), std::numeric_limits<double>::min());
        const double l = std::abs(mi - mj) > 1e-12 * std::max(mi, mj) ? (std::log(mi) - std::log(mj)) / (mi - mj)
                                                                        : 2.0 / (mi + mj);
        r(i, j) *= l;
      }
    Mat4 g = u * r * u.adjoint();
    return 0.5 * (g + g.adjoint());
  }

 private:
  Mat4 rho_;
  double floor_;
};

// Product state maximising <ab|G|ab> by alternating top-eigenvector sweeps.
std::pair<Vec2, Vec2> alternating_maximizer(const Mat4& g, Vec2 a, Vec2 b, int sweeps) {
  for (int s = 0; s < sweeps; ++s) {
    Mat2 ma, mb;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        ma(i, j) = Complex(0.0);
        mb(i, j) = Complex(0.0);
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) ma(i, j) += std::conj(b(k)) * g(2 * i + k, 2 * j + l) * b(l);
      }
    a = top_eigenvector(ma);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) mb(i, j) += std::conj(a(k)) * g(2 * k + i, 2 * l + j) * a(l);
    b = top_eigenvector(mb);
  }
  return {a, b};
}

double expectation(const Mat4& g, const Vec4& v) { return (v.adjoint() * g * v)(0, 0).real(); }

Vec2 random_qubit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec2 v(Complex(n(rng), n(rng)), Complex(n(rng), n(rng)));
  return v / v.norm();
}

void require_two_qubit(const DensityMatrix& rho, const char* what) {
  if (!rho.is_two_qubit()) throw InvalidArgument(std::string(what) + ": expected a two-qubit state");
}

}  // namespace

SeparableAnsatz::SeparableAnsatz(std::vector<double> weights, std::vector<ProductState> product_states, double floor)
    : weights_(std::move(weights)), states_(std::move(product_states)), floor_(floor) {
  if (weights_.empty() || weights_.size() != states_.size())
    throw InvalidArgument("separable ansatz: weights and product states must be non-empty and of equal length");
  if (!(floor_ >= 0.0 && floor_ < 1.0)) throw InvalidArgument("separable ansatz: floor outside [0,1)");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InvalidArgument("separable ansatz: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("separable ansatz: weights do not sum to 1");
  for (double& w : weights_) w /= sum;
}

DensityMatrix SeparableAnsatz::assemble() const {
  ComplexMatrix s = ComplexMatrix::Identity(4, 4) * (floor_ / 4.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Vec4 v = product_vector(states_[k]);
    s += ((1.0 - floor_) * weights_[k]) * ComplexMatrix(v * v.adjoint());
  }
  return DensityMatrix(std::move(s), {2, 2});
}

ERResult er_pure(const StateVector& psi, std::size_t dim_a, std::size_t dim_b) {
  if (static_cast<std::size_t>(psi.size()) != dim_a * dim_b) throw InvalidArgument("er_pure: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvalidArgument("er_pure: state is not normalised");
  const auto rho = DensityMatrix::from_pure(psi, {dim_a, dim_b});
  const std::array<std::size_t, 1> keep{0};
  ERResult r;
  r.value = qstate::von_neumann_entropy(qstate::partial_trace(rho, keep));
  r.kind = ERKind::ClosedForm;
  return r;
}

ERResult er_bell_diagonal(const BellDiagonalState& state) {
  const double lambda = state.max_coefficient();
  ERResult r;
  r.kind = ERKind::ClosedForm;
  r.value = lambda <= 0.5 ? 0.0 : 1.0 - qstate::binary_entropy(lambda);
  return r;
}

double werner_lambda(double f, WernerBridge bridge) {
  if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("Werner parameter outside [0,1]");
  return bridge == WernerBridge::Paper ? 0.5 * (1.0 + f) : 0.25 * (1.0 + 3.0 * f);
}

double er_werner(double f, WernerBridge bridge) {
  const double lambda = werner_lambda(f, bridge);
  if (bridge == WernerBridge::Paper) return 1.0 - qstate::binary_entropy(lambda);
  return er_bell_diagonal(qstate::werner_paper(f)).value;
}

SeparableAnsatz bell_separable_start(const DensityMatrix& rho, const SolverSettings& settings) {
  require_two_qubit(rho, "bell_separable_start");
  const auto c = separable_bell_weights(BellDiagonalState::project(rho).coefficients());

  std::vector<double> weights;
  std::vector<ProductState> states;
  // Each perfect matching {i,j}|{k,l} of the four Bell states carries mass
  // s_M split between its two edges; s_M >= |d_M| keeps both edges >= 0.
  constexpr std::array<std::array<std::size_t, 4>, 3> matchings = {{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
  std::array<double, 3> d{};
  double slack = 0.5;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& q = matchings[m];
    d[m] = 0.5 * (c[q[0]] + c[q[1]] - c[q[2]] - c[q[3]]);
    slack -= std::abs(d[m]);
  }
  slack = std::max(0.0, slack);
  const double eps = settings.init_mixing;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& q = matchings[m];
    const double s = std::abs(d[m]) + slack / 3.0;
    const std::array<std::pair<std::size_t, std::size_t>, 2> edges = {{{q[0], q[1]}, {q[2], q[3]}}};
    const std::array<double, 2> edge_mass = {0.5 * (s + d[m]), 0.5 * (s - d[m])};
    for (std::size_t e = 0; e < 2; ++e) {
      for (const auto& [a, b] : vertex_atoms(edges[e].first, edges[e].second)) {
        weights.push_back((1.0 - eps) * std::max(0.0, edge_mass[e]));
        states.push_back({qubit_angles(a), qubit_angles(b)});
      }
    }
  }
  for (int k = 0; k < 4; ++k) {
    weights.push_back(eps / 4.0);
    states.push_back({QubitAngles{k & 2 ? std::numbers::pi : 0.0, 0.0}, QubitAngles{k & 1 ? std::numbers::pi : 0.0, 0.0}});
  }

  // Fit to the requested size: drop the lightest atoms or pad with empty slots.
  std::mt19937_64 rng(settings.seed);
  while (weights.size() > settings.ansatz_size && weights.size() > 1) {
    const auto it = std::min_element(weights.begin(), weights.end());
    const auto idx = it - weights.begin();
    weights.erase(it);
    states.erase(states.begin() + idx);
  }
  while (weights.size() < settings.ansatz_size) {
    weights.push_back(0.0);
    states.push_back({qubit_angles(random_qubit(rng)), qubit_angles(random_qubit(rng))});
  }
  double sum = 0.0;
  for (double w : weights) sum += w;
  for (double& w : weights) w /= sum;
  return SeparableAnsatz(std::move(weights), std::move(states), settings.floor);
}

RelativeEntropySolver::RelativeEntropySolver(SolverSettings settings)
    : settings_(settings), rng_(settings.seed) {
  if (settings_.ansatz_size < 1) throw InvalidArgument("solver: ansatz size must be positive");
  if (!(settings_.floor > 0.0 && settings_.floor < 1.0)) throw InvalidArgument("solver: floor must lie in (0,1)");
  if (settings_.stall_window < 1) throw InvalidArgument("solver: stall window must be positive");
}

ERResult RelativeEntropySolver::minimize(const DensityMatrix& rho) {
  require_two_qubit(rho, "er_numeric");
  rng_.seed(settings_.seed);
  const Mat4 rho4 = rho.matrix();
  const Objective obj(rho4, settings_.floor);
  const double entropy_nats = qstate::von_neumann_entropy(rho) * kLn2;

  const SeparableAnsatz start = bell_separable_start(rho, settings_);
  std::vector<Atom> atoms;
  for (const auto& s : start.product_states()) atoms.emplace_back(s);
  std::vector<double> w = start.weights();

  double g = obj.cross(atoms, w);
  std::vector<double> history{(g - entropy_nats) / kLn2};
  double gap_nats = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t it = 0;

  for (; it < settings_.max_iterations; ++it) {
    // 1. EM weight update with backtracking.
    {
      const Mat4 grad = obj.gradient_operator(obj.sigma(atoms, w));
      std::vector<double> target(w.size());
      double norm = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        target[k] = w[k] * std::max(0.0, expectation(grad, atoms[k].vec));
        norm += target[k];
      }
      if (norm > 0.0) {
        for (double& t : target) t /= norm;
        for (double step = 1.0; step > 1e-6; step *= 0.5) {
          std::vector<double> trial(w.size());
          for (std::size_t k = 0; k < w.size(); ++k) trial[k] = w[k] + step * (target[k] - w[k]);
          const double gt = obj.cross(atoms, trial);
          if (gt < g) {
            w = std::move(trial);
            g = gt;
            break;
          }
        }
      }
    }

    // 2. Frank-Wolfe oracle: most violated product direction.
    const Mat4 grad = obj.gradient_operator(obj.sigma(atoms, w));
    double current = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) current += w[k] * expectation(grad, atoms[k].vec);
    std::pair<Vec2, Vec2> best{Vec2(1, 0), Vec2(1, 0)};
    double best_val = -std::numeric_limits<double>::infinity();
    auto consider = [&](Vec2 a, Vec2 b) {
      const auto [a2, b2] = alternating_maximizer(grad, a, b, 12);
      const double v = expectation(grad, kron(a2, b2));
      if (v > best_val) {
        best_val = v;
        best = {a2, b2};
      }
    };
    {
      const std::array<Vec2, 6> seeds = {Vec2(1, 0), Vec2(0, 1), Vec2(1, 1) / std::sqrt(2.0),
                                         Vec2(1, -1) / std::sqrt(2.0), Vec2(1, Complex(0, 1)) / std::sqrt(2.0),
                                         Vec2(1, Complex(0, -1)) / std::sqrt(2.0)};
      for (const auto& s : seeds) consider(s, s);
      for (int r = 0; r < 4; ++r) consider(random_qubit(rng_), random_qubit(rng_));
      std::size_t heaviest = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
      const Atom& h = atoms[heaviest];
      consider(qubit_vector(h.angles.a), qubit_vector(h.angles.b));
    }
    gap_nats = std::max(0.0, (1.0 - settings_.floor) * (best_val - current));

    if (best_val > current + 1e-15) {
      const std::size_t slot = static_cast<std::size_t>(std::min_element(w.begin(), w.end()) - w.begin());
      std::vector<Atom> trial_atoms = atoms;
      trial_atoms[slot] = Atom(best.first, best.second);
      const double rest = 1.0 - w[slot];
      auto weights_at = [&](double tau) {
        std::vector<double> t(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) t[k] = rest > 0.0 ? w[k] * (1.0 - tau) / rest : 0.0;
        t[slot] = tau;
        return t;
      };
      // Golden-section search over the inserted weight.
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double lo = 0.0, hi = 1.0;
      double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      double f1 = obj.cross(trial_atoms, weights_at(x1)), f2 = obj.cross(trial_atoms, weights_at(x2));
      for (int k = 0; k < 40; ++k) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = obj.cross(trial_atoms, weights_at(x1));
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = obj.cross(trial_atoms, weights_at(x2));
        }
      }
      const double tau = f1 < f2 ? x1 : x2;
      const double gt = std::min(f1, f2);
      if (gt < g) {
        atoms = std::move(trial_atoms);
        w = weights_at(tau);
        g = gt;
      }
    }

    // 3. Local refinement of each weighted atom towards its own maximiser.
    {
      const Mat4 grad2 = obj.gradient_operator(obj.sigma(atoms, w));
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (w[k] <= 0.0) continue;
        const Vec2 a0 = qubit_vector(atoms[k].angles.a);
        const Vec2 b0 = qubit_vector(atoms[k].angles.b);
        auto [a1, b1] = alternating_maximizer(grad2, a0, b0, 1);
        // Align phases so interpolation moves along the short arc.
        const Complex pa = a0.dot(a1), pb = b0.dot(b1);
        if (std::abs(pa) > 0.0) a1 *= std::conj(pa) / std::abs(pa);
        if (std::abs(pb) > 0.0) b1 *= std::conj(pb) / std::abs(pb);
        for (double t : {1.0, 0.5, 0.25, 0.125}) {
          Vec2 a = a0 + t * (a1 - a0);
          Vec2 b = b0 + t * (b1 - b0);
          if (a.norm() < 1e-12 || b.norm() < 1e-12) continue;
          std::vector<Atom> trial = atoms;
          trial[k] = Atom(a / a.norm(), b / b.norm());
          const double gt = obj.cross(trial, w);
          if (gt < g) {
            atoms = std::move(trial);
            g = gt;
            break;
          }
        }
      }
    }

    history.push_back((g - entropy_nats) / kLn2);
    if (gap_nats < 1e-12) {
      converged = true;
      ++it;
      break;
    }
    if (history.size() > settings_.stall_window) {
      const double before = history[history.size() - 1 - settings_.stall_window];
      if (before - history.back() < settings_.stall_tolerance) {
        converged = true;
        ++it;
        break;
      }
    }
  }

  std::vector<ProductState> states;
  for (const auto& a : atoms) states.push_back(a.angles);
  SeparableAnsatz cert(w, std::move(states), settings_.floor);

  ERResult r;
  r.kind = ERKind::NumericUpperBound;
  r.value = qstate::relative_entropy(rho, cert.assemble());
  r.certificate = std::move(cert);
  r.iterations = it;
  r.converged = converged;
  r.duality_gap = gap_nats / kLn2;
  return r;
}

ERResult er_numeric(const DensityMatrix& rho, const SolverSettings& settings) {
  RelativeEntropySolver solver(settings);
  return solver.minimize(rho);
}

double negativity(const DensityMatrix& rho) {
  require_two_qubit(rho, "negativity");
  const auto values = qstate::hermitian_eigen(qstate::partial_transpose(rho, 1)).values;
  double n = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) < 0.0) n -= values(i);
  return n;
}

bool is_ppt(const DensityMatrix& rho, double tolerance) {
  require_two_qubit(rho, "is_ppt");
  return qstate::hermitian_eigen(qstate::partial_transpose(rho, 1)).values.minCoeff() >= -tolerance;
}

}  // namespace entshape::entanglement

#include "entshape/protocols.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <thread>

#include "entshape/errors.hpp"
#include "entshape/rng.hpp"

namespace entshape::protocols {

using qstate::Complex;

namespace {

using Mat16 = Eigen::Matrix<Complex, 16, 16>;
using Mat4 = Eigen::Matrix4cd;
using Mat2 = Eigen::Matrix2cd;

Mat2 rx(double angle) {
  Mat2 m;
  const Complex c(std::cos(0.5 * angle), 0.0);
  const Complex s(0.0, -std::sin(0.5 * angle));
  m << c, s, s, c;
  return m;
}

template <int N, int M>
Eigen::Matrix<Complex, N * M, N * M> kron(const Eigen::Matrix<Complex, N, N>& a, const Eigen::Matrix<Complex, M, M>& b) {
  Eigen::Matrix<Complex, N * M, N * M> out;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out.template block<M, M>(i * M, j * M) = a(i, j) * b;
  return out;
}

// Permutation matrix for CNOT(control, target) on 4 qubits, big-endian.
Mat16 cnot4(int control, int target) {
  Mat16 u = Mat16::Zero();
  for (int i = 0; i < 16; ++i) {
    int j = i;
    if ((i >> (3 - control)) & 1) j ^= 1 << (3 - target);
    u(j, i) = 1.0;
  }
  return u;
}

const Mat16& dejmps_unitary() {
  static const Mat16 u = [] {
    const Mat2 ra = rx(std::numbers::pi / 2);
    const Mat2 rb = rx(-std::numbers::pi / 2);
    const Mat4 pair = kron<2, 2>(ra, rb);
    const Mat16 rot = kron<4, 4>(pair, pair);
    return Mat16(cnot4(1, 3) * cnot4(0, 2) * rot);
  }();
  return u;
}

struct Step {
  double success_mass;
  Mat4 success;  // unnormalised source-pair states
  Mat4 failure;
};

Step simulate_step(const BellDiagonalState& p1, const BellDiagonalState& p2) {
  const Mat4 r1 = p1.to_density().matrix();
  const Mat4 r2 = p2.to_density().matrix();
  const Mat16& u = dejmps_unitary();
  const Mat16 rho = u * kron<4, 4>(r1, r2) * u.adjoint();
  // Trace out A2 B2 keeping only the diagonal blocks selected by the
  // measurement record (ma, mb).
  Step s{0.0, Mat4::Zero(), Mat4::Zero()};
  for (int k = 0; k < 4; ++k) {
    const bool match = (k == 0 || k == 3);
    Mat4 block;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) block(i, j) = rho(4 * i + k, 4 * j + k);
    (match ? s.success : s.failure) += block;
  }
  s.success_mass = s.success.trace().real();
  return s;
}

BellDiagonalState bell_from_unnormalised(const Mat4& m) {
  const double tr = m.trace().real();
  const DensityMatrix rho(qstate::ComplexMatrix(m / tr), {2, 2});
  if (qstate::bell_offdiagonal_norm(rho) > 1e-10) throw Error("DEJMPS output left the Bell-diagonal manifold");
  return BellDiagonalState::project(rho);
}

std::array<double, 4> axpy(double a, const BellDiagonalState& x, std::array<double, 4> y) {
  for (std::size_t i = 0; i < 4; ++i) y[i] += a * x[i];
  return y;
}

BellDiagonalState normalised(std::array<double, 4> c) {
  double s = 0.0;
  for (double x : c) s += x;
  for (double& x : c) x /= s;
  return BellDiagonalState(c);
}

// Merged success/failure view of a subtree.
struct Node {
  double p_success;
  std::optional<BellDiagonalState> success;
  std::optional<BellDiagonalState> failure;
};

Node combine(const Node& left, const Node& right) {
  std::array<double, 4> succ{}, fail{};
  double succ_mass = 0.0, fail_mass = 0.0;
  const std::array<std::pair<double, const std::optional<BellDiagonalState>*>, 2> ls = {
      {{left.p_success, &left.success}, {1.0 - left.p_success, &left.failure}}};
  const std::array<std::pair<double, const std::optional<BellDiagonalState>*>, 2> rs = {
      {{right.p_success, &right.success}, {1.0 - right.p_success, &right.failure}}};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double w = ls[i].first * rs[j].first;
      if (w <= 0.0 || !ls[i].second->has_value() || !rs[j].second->has_value()) continue;
      const Step s = simulate_step(**ls[i].second, **rs[j].second);
      const double q = s.success_mass;
      if (q > 0.0) {
        const BellDiagonalState st = bell_from_unnormalised(s.success);
        if (i == 0 && j == 0) {
          succ = axpy(w * q, st, succ);
          succ_mass += w * q;
        } else {
          fail = axpy(w * q, st, fail);
          fail_mass += w * q;
        }
      }
      if (q < 1.0 && s.failure.trace().real() > 0.0) {
        fail = axpy(w * (1.0 - q), bell_from_unnormalised(s.failure), fail);
        fail_mass += w * (1.0 - q);
      }
    }
  Node n;
  n.p_success = succ_mass / (succ_mass + fail_mass);
  if (succ_mass > 0.0) n.success = normalised(succ);
  if (fail_mass > 0.0) n.failure = normalised(fail);
  return n;
}

DistillationOutcome outcome_from(const Node& node, std::size_t pairs_per_block, std::size_t blocks) {
  std::vector<Branch> branches;
  std::vector<double> weights;
  std::vector<DensityMatrix> states;
  if (node.success && node.p_success > 0.0) {
    branches.push_back({node.p_success, true, *node.success});
    weights.push_back(node.p_success);
    states.push_back(node.success->to_density());
  }
  if (node.failure && node.p_success < 1.0) {
    branches.push_back({1.0 - node.p_success, false, *node.failure});
    weights.push_back(1.0 - node.p_success);
    states.push_back(node.failure->to_density());
  }
  DistillationOutcome out{std::move(branches), node.p_success, qstate::mixture(weights, states),
                          node.p_success > 0.0 ? node.success : std::nullopt, pairs_per_block, blocks, {}};
  return out;
}

std::size_t log2_exact(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) throw InvalidArgument("n_pairs must be a power of two");
  return static_cast<std::size_t>(std::countr_zero(n));
}

}  // namespace

std::optional<BellDiagonalState> DistillationOutcome::trash_state() const {
  for (const auto& b : branches)
    if (!b.success && b.probability > 0.0) return b.state;
  return std::nullopt;
}

ComplexMatrix u_pre() {
  const double r = 1.0 / std::sqrt(2.0);
  Mat2 h, x, id = Mat2::Identity();
  h << r, r, r, -r;
  x << 0, 1, 1, 0;
  Mat4 cnot = Mat4::Zero();
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
  return ComplexMatrix(kron<2, 2>(id, x) * cnot * kron<2, 2>(h, id));
}

DistillationOutcome dejmps_branch_map(const BellDiagonalState& pair1, const BellDiagonalState& pair2) {
  const Node leaf1{1.0, pair1, std::nullopt};
  const Node leaf2{1.0, pair2, std::nullopt};
  const Node n = combine(leaf1, leaf2);
  DistillationOutcome out = outcome_from(n, 2, 1);
  out.rounds.push_back({n.p_success, n.success, n.failure});
  return out;
}

DistillationOutcome dejmps_recursive(std::size_t n_pairs, const BellDiagonalState& input, std::size_t rounds) {
  const std::size_t depth = log2_exact(n_pairs);
  if (rounds > depth) throw InvalidArgument("dejmps_recursive: more rounds than log2(n_pairs)");
  Node node{1.0, input, std::nullopt};
  std::vector<DistillationOutcome::Round> record;
  for (std::size_t r = 0; r < rounds; ++r) {
    node = combine(node, node);
    record.push_back({node.p_success, node.success, node.failure});
  }
  DistillationOutcome out = outcome_from(node, std::size_t{1} << rounds, n_pairs >> rounds);
  out.rounds = std::move(record);
  return out;
}

namespace {

struct Sample {
  bool success;
  BellDiagonalState state;
};

struct StepCache {
  // Memoised branch map keyed on the exact input coefficients; a run only
  // ever sees a handful of distinct states.
  struct Entry {
    BellDiagonalState a, b;
    double q;
    std::optional<BellDiagonalState> succ, fail;
  };
  std::vector<Entry> entries;

  const Entry& get(const BellDiagonalState& a, const BellDiagonalState& b) {
    for (const auto& e : entries)
      if (e.a == a && e.b == b) return e;
    const Step s = simulate_step(a, b);
    Entry e{a, b, s.success_mass, std::nullopt, std::nullopt};
    if (s.success_mass > 0.0) e.succ = bell_from_unnormalised(s.success);
    if (s.success_mass < 1.0 && s.failure.trace().real() > 0.0) e.fail = bell_from_unnormalised(s.failure);
    entries.push_back(std::move(e));
    return entries.back();
  }
};

Sample sample_tree(std::size_t depth, const BellDiagonalState& input, std::mt19937_64& engine, StepCache& cache) {
  if (depth == 0) return {true, input};
  const Sample l = sample_tree(depth - 1, input, engine, cache);
  const Sample r = sample_tree(depth - 1, input, engine, cache);
  const auto& e = cache.get(l.state, r.state);
  const double u = rng::uniform01(engine);
  if (u < e.q) return {l.success && r.success, *e.succ};
  return {false, *e.fail};
}

struct RunRecord {
  double success_fraction = 0.0;
  double fidelity_mean = 0.0;
  std::array<double, 4> bell_mean{};
  std::size_t successes = 0;
  std::array<double, 4> success_bell_sum{};
  double success_fidelity_sum = 0.0;
  double success_fidelity_sq = 0.0;
};

MeanStd summarise(const std::vector<double>& xs) {
  MeanStd m;
  m.samples = xs.size();
  if (xs.empty()) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    m.standard_error = m.std / std::sqrt(static_cast<double>(xs.size()));
  }
  return m;
}

}  // namespace

MonteCarloStats dejmps_monte_carlo(std::size_t n_pairs, const BellDiagonalState& input, std::size_t rounds,
                                   std::size_t run_count, std::uint64_t master_seed, std::size_t workers) {
  const std::size_t depth = log2_exact(n_pairs);
  if (rounds > depth) throw InvalidArgument("dejmps_monte_carlo: more rounds than log2(n_pairs)");
  if (run_count < 1) throw InvalidArgument("dejmps_monte_carlo: run_count must be at least 1");
  const std::size_t blocks = n_pairs >> rounds;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, run_count);

  std::vector<RunRecord> records(run_count);
  auto work = [&](std::size_t begin, std::size_t end) {
    StepCache cache;
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 engine(rng::run_seed(master_seed, i));
      RunRecord rec;
      for (std::size_t b = 0; b < blocks; ++b) {
        const Sample s = sample_tree(rounds, input, engine, cache);
        rec.fidelity_mean += s.state.fidelity();
        for (std::size_t k = 0; k < 4; ++k) rec.bell_mean[k] += s.state[k];
        if (s.success) {
          ++rec.successes;
          for (std::size_t k = 0; k < 4; ++k) rec.success_bell_sum[k] += s.state[k];
          rec.success_fidelity_sum += s.state.fidelity();
          rec.success_fidelity_sq += s.state.fidelity() * s.state.fidelity();
        }
      }
      const double nb = static_cast<double>(blocks);
      rec.success_fraction = static_cast<double>(rec.successes) / nb;
      rec.fidelity_mean /= nb;
      for (double& x : rec.bell_mean) x /= nb;
      records[i] = rec;
    }
  };
  if (workers == 1) {
    work(0, run_count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (run_count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(run_count, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // Serial reduction in run order.
  MonteCarloStats stats;
  stats.runs = run_count;
  stats.master_seed = master_seed;
  std::vector<double> ps, gf, sf;
  std::array<double, 4> global{}, selected{};
  std::size_t total_success = 0;
  for (const auto& r : records) {
    ps.push_back(r.success_fraction);
    gf.push_back(r.fidelity_mean);
    for (std::size_t k = 0; k < 4; ++k) {
      global[k] += r.bell_mean[k];
      selected[k] += r.success_bell_sum[k];
    }
    total_success += r.successes;
    if (r.successes > 0) sf.push_back(r.success_fidelity_sum / static_cast<double>(r.successes));
  }
  stats.success_probability = summarise(ps);
  stats.global_fidelity = summarise(gf);
  stats.selected_fidelity = summarise(sf);
  stats.global_mixture = normalised(global);
  if (total_success > 0) stats.selected_mixture = normalised(selected);

  // Batch means for the E_R of the sampled mixtures.
  const std::size_t batches = std::min(kMonteCarloBatches, run_count);
  std::vector<double> ge, se;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t begin = b * run_count / batches;
    const std::size_t end = (b + 1) * run_count / batches;
    std::array<double, 4> g{}, s{};
    std::size_t succ = 0;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        g[k] += records[i].bell_mean[k];
        s[k] += records[i].success_bell_sum[k];
      }
      succ += records[i].successes;
    }
    ge.push_back(entanglement::er_bell_diagonal(normalised(g)).value);
    if (succ > 0) se.push_back(entanglement::er_bell_diagonal(normalised(s)).value);
  }
  stats.global_er = summarise(ge);
  stats.global_er.mean = entanglement::er_bell_diagonal(stats.global_mixture).value;
  stats.selected_er = summarise(se);
  if (stats.selected_mixture) stats.selected_er.mean = entanglement::er_bell_diagonal(*stats.selected_mixture).value;
  return stats;
}

QuantumChannel dd_effective(const QuantumChannel& channel, const DDConfig& cfg) {
  return cfg.mode == channels::DDMode::Parametric ? channels::dd_effective_parametric(channel, cfg)
                                                  : channels::dd_effective_pulse_average(channel, cfg);
}

PESOutcome pes_pipeline(std::size_t n_pairs, const QuantumChannel& channel, const DDConfig& dd, bool use_u_pre,
                        const entanglement::SolverSettings& solver) {
  if (n_pairs < 1) throw InvalidArgument("pes_pipeline: n_pairs must be at least 1");
  if (channel.dim() != 2) throw InvalidArgument("pes_pipeline: expected a qubit channel");
  if (use_u_pre && n_pairs % 2 != 0) throw InvalidArgument("pes_pipeline: U_pre acts on blocks of two pairs");
  QuantumChannel eff = dd_effective(channel, dd);

  auto pair_er = [&](const DensityMatrix& pair) {
    if (qstate::bell_offdiagonal_norm(pair) < 1e-12)
      return entanglement::er_bell_diagonal(qstate::BellDiagonalState::project(pair));
    return entanglement::er_numeric(pair, solver);
  };
  auto fidelity = [](const DensityMatrix& pair) {
    const auto v = qstate::bell_vector(qstate::Bell::PsiPlus);
    return (v.adjoint() * pair.matrix() * v)(0, 0).real();
  };

  if (!use_u_pre) {
    DensityMatrix out = channels::apply(eff, qstate::bell_state(qstate::Bell::PsiPlus), 1);
    const bool bd = qstate::bell_offdiagonal_norm(out) < 1e-12;
    const double f = fidelity(out);
    ERResult er = pair_er(out);
    return {std::move(out), std::move(eff), std::move(er), n_pairs, bd, f};
  }

  // Block ordering A1 A2 B1 B2: |psi+>_{A1B1} |psi+>_{A2B2}.
  qstate::StateVector psi = qstate::StateVector::Zero(16);
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2) psi(8 * a1 + 4 * a2 + 2 * a1 + a2) = 0.5;
  const ComplexMatrix u = u_pre();
  ComplexMatrix full = ComplexMatrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i) full.block(4 * i, 4 * i, 4, 4) = u;
  DensityMatrix block = DensityMatrix::from_pure(full * psi, {2, 2, 2, 2});
  block = channels::apply(eff, block, 2);
  block = channels::apply(eff, block, 3);

  const std::array<std::size_t, 2> keep1{0, 2};
  const std::array<std::size_t, 2> keep2{1, 3};
  const DensityMatrix pair1 = qstate::partial_trace(block, keep1);
  const DensityMatrix pair2 = qstate::partial_trace(block, keep2);
  ERResult e1 = pair_er(pair1);
  const ERResult e2 = pair_er(pair2);
  ERResult er = e1;
  er.value = 0.5 * (e1.value + e2.value);
  er.converged = e1.converged && e2.converged;
  const bool bd = qstate::bell_offdiagonal_norm(pair1) < 1e-12 && qstate::bell_offdiagonal_norm(pair2) < 1e-12;
  const double f = 0.5 * (fidelity(pair1) + fidelity(pair2));
  return {std::move(block), std::move(eff), std::move(er), n_pairs, bd, f};
}

namespace {

template <class F>
PesCalibration calibrate_with(double p, double target_er, F er_of) {
  if (!(p > 0.0 && p <= 0.75)) throw InvalidArgument("calibrate_pes: p outside (0, 3/4]");
  if (!(target_er >= 0.0 && target_er <= 1.0)) throw InvalidArgument("calibrate_pes: target outside [0, 1]");
  // er_of is non-increasing in p'; bisect on [0, 3/4].
  double lo = 0.0, hi = 0.75;
  if (er_of(hi) > target_er) throw InvalidArgument("calibrate_pes: target below the channel's reachable range");
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (er_of(mid) > target_er)
      lo = mid;
    else
      hi = mid;
  }
  const double pp = 0.5 * (lo + hi);
  return {p, pp, pp / p, std::log(p / pp), pp <= p};
}

}  // namespace

PesCalibration calibrate_pes(double p, double target_er, entanglement::WernerBridge bridge) {
  return calibrate_with(p, target_er, [bridge](double q) { return entanglement::er_werner(1.0 - q, bridge); });
}

PesCalibration calibrate_pes(double p, double target_er, Convention c) {
  return calibrate_with(p, target_er, [c](double q) { return depolarized_pair_er(q, c); });
}

const char* convention_name(Convention c) { return c == Convention::Paper ? "paper" : "oracle"; }

BellDiagonalState depolarized_pair(double p, Convention c) {
  if (!(p >= 0.0 && p <= 0.75)) throw InvalidArgument("depolarized_pair: p outside [0, 3/4]");
  if (c == Convention::Paper) return qstate::werner_paper(1.0 - p);
  return channels::werner_from_channel(p);
}

double depolarized_pair_er(double p, Convention c) {
  if (c == Convention::Paper) return entanglement::er_werner(1.0 - p, entanglement::WernerBridge::Paper);
  return entanglement::er_bell_diagonal(depolarized_pair(p, c)).value;
}

RotationSearch pre_rotation_search_ad(double gamma, std::size_t grid, const entanglement::SolverSettings& solver) {
  if (grid < 1) throw InvalidArgument("pre_rotation_search_ad: grid must be at least 1");
  const auto ad = channels::amplitude_damping(gamma);
  const auto psi = qstate::bell_vector(qstate::Bell::PsiPlus);
  entanglement::RelativeEntropySolver s(solver);
  RotationSearch best{0.0, 0.0, -1.0, 2.0, 0, true};
  const double g = static_cast<double>(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double theta = grid == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / (g - 1.0);
    for (std::size_t j = 0; j < grid; ++j) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / g;
      Mat2 ry, rz;
      ry << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
      rz << std::polar(1.0, -phi / 2), 0, 0, std::polar(1.0, phi / 2);
      const Mat4 u = kron<2, 2>(Mat2::Identity(), Mat2(rz * ry));
      const auto rho = channels::apply(ad, DensityMatrix::from_pure(qstate::StateVector(u * psi), {2, 2}), 1);
      const ERResult r = s.minimize(rho);
      ++best.evaluations;
      best.all_converged = best.all_converged && r.converged;
      best.worst_er = std::min(best.worst_er, r.value);
      if (r.value > best.best_er + 1e-6) {
        best.best_er = r.value;
        best.theta = theta;
        best.phi = phi;
      }
    }
  }
  return best;
}

HashingRate hashing_rate(double p) {
  if (!(p >= 0.0 && p <= 0.75)) throw InvalidArgument("hashing_rate: p outside [0, 3/4]");
  const double v = 1.0 - qstate::binary_entropy(p) - p * std::log2(3.0);
  return {v, v < 0.0};
}

double effective_rate(const DistillationOutcome& outcome) {
  if (!outcome.selected_state) return 0.0;
  return outcome.success_probability * entanglement::er_bell_diagonal(*outcome.selected_state).value /
         static_cast<double>(outcome.pairs_per_block);
}

}  // namespace entshape::protocols

#include "entshape/channels.hpp"

#include <cmath>
#include <string>

#include "entshape/errors.hpp"

namespace entshape::channels {

using qstate::Complex;

namespace {

ComplexMatrix embed(const ComplexMatrix& op, const std::vector<std::size_t>& dims, std::size_t target) {
  ComplexMatrix full = ComplexMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const auto d = static_cast<Eigen::Index>(dims[k]);
    const ComplexMatrix local = (k == target) ? op : ComplexMatrix::Identity(d, d);
    ComplexMatrix next(full.rows() * local.rows(), full.cols() * local.cols());
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = 0; j < full.cols(); ++j)
        next.block(i * local.rows(), j * local.cols(), local.rows(), local.cols()) = full(i, j) * local;
    full = std::move(next);
  }
  return full;
}

void require_qubit(const QuantumChannel& channel, const char* what) {
  if (channel.dim() != 2) throw InvalidArgument(std::string(what) + ": expected a qubit channel");
}

}  // namespace

QuantumChannel::QuantumChannel(std::vector<ComplexMatrix> kraus, FamilyTag tag)
    : kraus_(std::move(kraus)), tag_(tag) {
  if (kraus_.empty()) throw InvalidArgument("channel needs at least one Kraus operator");
  const auto d = kraus_.front().rows();
  ComplexMatrix completeness = ComplexMatrix::Zero(d, d);
  for (const auto& k : kraus_) {
    if (k.rows() != d || k.cols() != d) throw InvalidArgument("Kraus operators must share one square shape");
    if (!k.allFinite()) throw InvalidArgument("Kraus operator has non-finite entries");
    completeness += k.adjoint() * k;
  }
  if (qstate::max_abs_diff(completeness, ComplexMatrix::Identity(d, d)) > kCompletenessTol)
    throw InvalidArgument("Kraus operators are not trace preserving");
}

ComplexMatrix QuantumChannel::operator()(const ComplexMatrix& x) const {
  if (x.rows() != static_cast<Eigen::Index>(dim()) || x.cols() != x.rows())
    throw InvalidArgument("channel applied to an operator of the wrong dimension");
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (const auto& k : kraus_) out += k * x * k.adjoint();
  return out;
}

ComplexMatrix pauli(std::size_t index) {
  ComplexMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (index) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -i, i, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw InvalidArgument("Pauli index must be in [0,3]");
  }
  return m;
}

std::vector<ComplexMatrix> pauli_set() { return {pauli(0), pauli(1), pauli(2), pauli(3)}; }

QuantumChannel identity_channel(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return QuantumChannel({ComplexMatrix::Identity(d, d)});
}

QuantumChannel unitary_channel(const ComplexMatrix& u) { return QuantumChannel({u}); }

QuantumChannel depolarizing(double p) {
  if (!(p >= 0.0 && p <= 0.75)) throw InvalidArgument("depolarizing: p outside [0, 3/4]");
  const double a = std::sqrt(1.0 - p);
  const double b = std::sqrt(p / 3.0);
  return QuantumChannel({a * pauli(0), b * pauli(1), b * pauli(2), b * pauli(3)}, {Family::Depolarizing, p});
}

QuantumChannel amplitude_damping(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("amplitude_damping: gamma outside [0, 1]");
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  return QuantumChannel({k0, k1}, {Family::AmplitudeDamping, gamma});
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  if (second.dim() != first.dim()) throw InvalidArgument("compose: dimension mismatch");
  std::vector<ComplexMatrix> kraus;
  for (const auto& b : second.kraus())
    for (const auto& a : first.kraus()) {
      ComplexMatrix k = b * a;
      if (k.norm() >= kKrausPruneNorm) kraus.push_back(std::move(k));
    }
  FamilyTag tag;
  const auto& t1 = first.tag();
  const auto& t2 = second.tag();
  if (t1.family == Family::AmplitudeDamping && t2.family == Family::AmplitudeDamping)
    tag = {Family::AmplitudeDamping, 1.0 - (1.0 - t1.parameter) * (1.0 - t2.parameter)};
  return QuantumChannel(std::move(kraus), tag);
}

DensityMatrix apply(const QuantumChannel& channel, const DensityMatrix& rho, std::size_t target) {
  const auto& dims = rho.subsystem_dims();
  if (target >= dims.size()) throw InvalidArgument("apply: target subsystem out of range");
  if (dims[target] != channel.dim()) throw InvalidArgument("apply: channel dimension does not match target");
  ComplexMatrix out = ComplexMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const auto& k : channel.kraus()) {
    const ComplexMatrix full = embed(k, dims, target);
    out += full * rho.matrix() * full.adjoint();
  }
  return DensityMatrix(std::move(out), dims);
}

DensityMatrix choi(const QuantumChannel& channel) {
  require_qubit(channel, "choi");
  return apply(channel, qstate::bell_state(qstate::Bell::PsiPlus), 1);
}

EntanglementBreaking is_entanglement_breaking(const QuantumChannel& channel) {
  require_qubit(channel, "is_entanglement_breaking");
  const ComplexMatrix pt = qstate::partial_transpose(choi(channel), 1);
  const double witness = qstate::hermitian_eigen(pt).values.minCoeff();
  return {witness >= -1e-12, witness};
}

double locate_eb_threshold(const std::function<QuantumChannel(double)>& family, double lo, double hi, double tol) {
  if (is_entanglement_breaking(family(lo)).breaking || !is_entanglement_breaking(family(hi)).breaking)
    throw InvalidArgument("locate_eb_threshold: bracket does not straddle the EB boundary");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (is_entanglement_breaking(family(mid)).breaking)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

qstate::BellDiagonalState werner_from_channel(double p) {
  return qstate::BellDiagonalState::project(apply(depolarizing(p), qstate::bell_state(qstate::Bell::PsiPlus), 1));
}

void DDConfig::validate() const {
  if (pulse_count < 1) throw InvalidArgument("DD: pulse count must be at least 1");
  if (!(pulse_frequency > 0.0) || !std::isfinite(pulse_frequency))
    throw InvalidArgument("DD: pulse frequency must be positive");
  if (!(noise_spectral_density >= 0.0) || !std::isfinite(noise_spectral_density))
    throw InvalidArgument("DD: noise spectral density must be non-negative");
  if (mode == DDMode::PulseAverage && pulse_set.empty()) throw InvalidArgument("DD: empty pulse set");
}

DDConfig DDConfig::parametric(double pulse_frequency, double noise_spectral_density) {
  DDConfig cfg;
  cfg.mode = DDMode::Parametric;
  cfg.pulse_frequency = pulse_frequency;
  cfg.noise_spectral_density = noise_spectral_density;
  cfg.validate();
  return cfg;
}

DDConfig DDConfig::parametric_with_factor(double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw InvalidArgument("DD: compression factor must lie in (0, 1]");
  return parametric(1.0, -std::log(factor));
}

DDConfig DDConfig::pulse_average(std::size_t pulse_count, std::vector<ComplexMatrix> pulses, bool frame_corrected) {
  DDConfig cfg;
  cfg.mode = DDMode::PulseAverage;
  cfg.pulse_count = pulse_count;
  cfg.pulse_set = std::move(pulses);
  cfg.frame_corrected = frame_corrected;
  cfg.validate();
  return cfg;
}

double compression_factor(const DDConfig& cfg) {
  cfg.validate();
  return std::exp(-cfg.noise_spectral_density / cfg.pulse_frequency);
}

QuantumChannel dd_effective_parametric(const QuantumChannel& channel, const DDConfig& cfg) {
  if (cfg.mode != DDMode::Parametric) throw InvalidArgument("dd_effective_parametric: config is not parametric");
  const double factor = compression_factor(cfg);
  switch (channel.tag().family) {
    case Family::Depolarizing: return depolarizing(channel.tag().parameter * factor);
    case Family::AmplitudeDamping: return amplitude_damping(channel.tag().parameter * factor);
    case Family::Custom: break;
  }
  throw InvalidArgument("dd_effective_parametric: no compression defined for a custom channel");
}

QuantumChannel dd_effective_pulse_average(const QuantumChannel& channel, const DDConfig& cfg) {
  if (cfg.mode != DDMode::PulseAverage) throw InvalidArgument("dd_effective_pulse_average: config is not pulse_average");
  cfg.validate();
  for (const auto& p : cfg.pulse_set)
    if (static_cast<std::size_t>(p.rows()) != channel.dim() || p.cols() != p.rows())
      throw InvalidArgument("dd_effective_pulse_average: pulse dimension does not match channel");

  // Distinct pulses with their multiplicity among P_1..P_M.
  std::vector<std::size_t> multiplicity(cfg.pulse_set.size(), 0);
  for (std::size_t k = 0; k < cfg.pulse_count; ++k) ++multiplicity[k % cfg.pulse_set.size()];

  std::vector<ComplexMatrix> kraus;
  const double m = static_cast<double>(cfg.pulse_count);
  for (std::size_t j = 0; j < cfg.pulse_set.size(); ++j) {
    if (multiplicity[j] == 0) continue;
    const double scale = std::sqrt(static_cast<double>(multiplicity[j]) / m);
    const ComplexMatrix& p = cfg.pulse_set[j];
    for (const auto& k : channel.kraus()) {
      ComplexMatrix op = cfg.frame_corrected ? ComplexMatrix(p.adjoint() * k * p) : ComplexMatrix(k * p);
      op *= scale;
      if (op.norm() >= kKrausPruneNorm) kraus.push_back(std::move(op));
    }
  }
  return QuantumChannel(std::move(kraus));
}

}  // namespace entshape::channels

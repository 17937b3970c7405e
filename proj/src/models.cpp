#include "qthermo/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qthermo {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::TwoQubit: return "two-qubit";
    case ModelKind::CoupledOscillators: return "coupled-oscillators";
    case ModelKind::SpinBoson: return "spin-boson";
  }
  return "unknown";
}

std::string to_string(DriveOperator op) {
  return op == DriveOperator::SumOfPositions ? "sum-of-positions" : "sum-of-numbers";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "two-qubit") return ModelKind::TwoQubit;
  if (text == "coupled-oscillators" || text == "oscillators") return ModelKind::CoupledOscillators;
  if (text == "spin-boson") return ModelKind::SpinBoson;
  throw ConfigError("unknown model kind '" + text + "'");
}

DriveOperator parse_drive_operator(const std::string& text) {
  if (text == "sum-of-positions" || text == "positions") return DriveOperator::SumOfPositions;
  if (text == "sum-of-numbers" || text == "numbers") return DriveOperator::SumOfNumbers;
  throw ConfigError("unknown drive operator '" + text + "'");
}

void ModelSpec::validate() const {
  if (omega_b.empty()) throw ConfigError("model: empty bath");
  if (omega_b.size() != couplings.size()) {
    std::ostringstream os;
    os << "model: " << omega_b.size() << " bath frequencies but " << couplings.size() << " couplings";
    throw ConfigError(os.str());
  }
  if (!(omega_s > 0.0)) throw ConfigError("model: system frequency must be > 0");
  for (double w : omega_b)
    if (!(w > 0.0)) throw ConfigError("model: bath frequencies must be > 0");
  for (double g : couplings)
    if (!std::isfinite(g)) throw ConfigError("model: non-finite coupling");
  if (kind != ModelKind::TwoQubit && fock_dim < 2) throw ConfigError("model: Fock truncation must be >= 2");
  if (drive && !std::isfinite(drive->J)) throw ConfigError("model: non-finite drive J");
  double total = 1.0;
  for (Index d : factor_dims()) total *= double(d);
  if (total > double(kMaxCompositeDim)) {
    std::ostringstream os;
    os << "model: composite dimension " << total << " exceeds cap " << kMaxCompositeDim;
    throw DimensionError(os.str());
  }
}

std::vector<Index> ModelSpec::factor_dims() const {
  std::vector<Index> dims;
  switch (kind) {
    case ModelKind::TwoQubit:
      dims.assign(omega_b.size() + 1, 2);
      break;
    case ModelKind::CoupledOscillators:
      dims.assign(omega_b.size() + 1, fock_dim);
      break;
    case ModelKind::SpinBoson:
      dims.assign(omega_b.size() + 1, fock_dim);
      dims[0] = 2;
      break;
  }
  return dims;
}

ModelSpec ModelSpec::with_coupling_scale(double s) const {
  ModelSpec out = *this;
  for (double& g : out.couplings) g *= s;
  return out;
}

ModelSpec ModelSpec::with_J(double J) const {
  ModelSpec out = *this;
  if (!out.drive) out.drive = Drive{};
  out.drive->J = J;
  return out;
}

HermitianOperator CompositeHamiltonian::total() const {
  HermitianOperator h = h_s + h_i + h_b;
  if (J != 0.0) h += J * a_b;
  return h;
}

HermitianOperator CompositeHamiltonian::free_bath() const {
  HermitianOperator h = h_b_local;
  if (J != 0.0) h += J * a_b_local;
  return h;
}

namespace {

struct Mode {
  Matrix h, x, n;
};

Mode qubit(double omega) {
  Matrix n = Matrix::Zero(2, 2);
  n(0, 0) = 1.0;
  return {0.5 * omega * pauli_z(), pauli_x(), n};
}

Mode oscillator(double omega, Index d) {
  Matrix h = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) h(k, k) = omega * (double(k) + 0.5);
  return {h, position(d), number(d)};
}

}  // namespace

CompositeHamiltonian build(const ModelSpec& spec) {
  spec.validate();
  const std::vector<Index> dims = spec.factor_dims();
  const std::size_t nb = spec.omega_b.size();

  Mode sys = spec.kind == ModelKind::CoupledOscillators ? oscillator(spec.omega_s, spec.fock_dim)
                                                       : qubit(spec.omega_s);
  std::vector<Mode> bath;
  for (double w : spec.omega_b)
    bath.push_back(spec.kind == ModelKind::TwoQubit ? qubit(w) : oscillator(w, spec.fock_dim));

  CompositeHamiltonian out;
  out.split = SubsystemSplit(dims);
  Index db = out.split.total() / dims[0];
  out.bipartite = SubsystemSplit({dims[0], db});
  out.J = spec.J();

  DriveOperator selector = spec.drive ? spec.drive->op : DriveOperator::SumOfPositions;

  // Lift a bath-mode operator to the whole bath space.
  auto bath_lift = [&](const Matrix& op, std::size_t k) {
    Matrix m = Matrix::Identity(1, 1);
    for (std::size_t j = 0; j < nb; ++j) {
      const Matrix& f = j == k ? op : Matrix(Matrix::Identity(dims[j + 1], dims[j + 1]));
      m = kron(m, f);
    }
    return m;
  };

  Matrix hb = Matrix::Zero(db, db), ab = Matrix::Zero(db, db);
  for (std::size_t k = 0; k < nb; ++k) {
    hb += bath_lift(bath[k].h, k);
    ab += bath_lift(selector == DriveOperator::SumOfPositions ? bath[k].x : bath[k].n, k);
  }
  Matrix hi = Matrix::Zero(out.split.total(), out.split.total());
  for (std::size_t k = 0; k < nb; ++k)
    if (spec.couplings[k] != 0.0) hi += spec.couplings[k] * kron(sys.x, bath_lift(bath[k].x, k));

  const Matrix id_s = Matrix::Identity(dims[0], dims[0]);
  const Matrix id_b = Matrix::Identity(db, db);
  out.h_s_local = HermitianOperator(sys.h);
  out.h_b_local = HermitianOperator(hb);
  out.a_b_local = HermitianOperator(ab);
  out.h_s = HermitianOperator(kron(sys.h, id_b));
  out.h_b = HermitianOperator(kron(id_s, hb));
  out.a_b = HermitianOperator(kron(id_s, ab));
  out.h_i = HermitianOperator(hi);
  return out;
}

TruncationResult truncation_check(const ModelSpec& spec, const std::function<double(const ModelSpec&)>& observable,
                                  double tol) {
  if (spec.kind == ModelKind::TwoQubit) throw ConfigError("truncation_check: model has no Fock truncation");
  if (!(tol > 0.0)) throw ConfigError("truncation_check: tolerance must be > 0");
  const Index factors = Index(spec.omega_b.size()) + (spec.kind == ModelKind::CoupledOscillators ? 1 : 0);
  const Index qubit_dim = spec.kind == ModelKind::SpinBoson ? 2 : 1;
  auto fits = [&](Index d) { return std::pow(double(d), double(factors)) * double(qubit_dim) <= double(kMaxCompositeDim); };

  TruncationResult result;
  for (Index d = 2; fits(2 * d); ++d) {
    ModelSpec a = spec, b = spec;
    a.fock_dim = d;
    b.fock_dim = 2 * d;
    double va = observable(a), vb = observable(b);
    double rel = std::abs(vb - va) / std::max(std::abs(vb), std::numeric_limits<double>::min());
    result.trace.emplace_back(d, rel);
    if (rel < tol) {
      result.dim = d;
      return result;
    }
  }
  std::ostringstream os;
  os.precision(3);
  os << "truncation_check: no convergence to " << tol << " below the dimension cap; trace:";
  for (auto [d, rel] : result.trace) os << " d=" << d << ":" << rel;
  throw NumericalError(os.str());
}

}  // namespace qthermo

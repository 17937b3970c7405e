#include "qthermo/gibbs.hpp"

#include <cmath>
#include <stdexcept>

namespace qthermo {

void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("inverse temperature must be finite and > 0, got " + std::to_string(beta));
}

SpectralStats spectral_stats(const RealVector& e, double beta) {
  require_beta(beta);
  if (e.size() == 0) throw DimensionError("spectral_stats: empty spectrum");
  SpectralStats s;
  s.beta = beta;
  const double e0 = e.minCoeff();
  RealVector de = e.array() - e0;
  RealVector w = (-beta * de.array()).exp();
  // w(ground) = 1 for at least one level; the rest sum with log1p for accuracy.
  double tail = w.sum() - 1.0;
  double total = 1.0 + tail;
  s.p = w / total;
  s.log_Z = -beta * e0 + std::log1p(tail);
  double mean_de = s.p.dot(de);
  s.energy = e0 + mean_de;
  RealVector c = de.array() - mean_de;
  s.variance = s.p.dot(c.cwiseAbs2());
  s.entropy = beta * mean_de + std::log1p(tail);
  return s;
}

ThermalEnsemble::ThermalEnsemble(const HermitianOperator& h, double beta)
    : ThermalEnsemble(std::make_shared<const SpectralDecomposition>(eig_hermitian(h)), beta) {}

ThermalEnsemble::ThermalEnsemble(std::shared_ptr<const SpectralDecomposition> spectrum, double beta)
    : spectrum_(std::move(spectrum)), stats_(spectral_stats(spectrum_->eigenvalues, beta)) {}

DensityOperator ThermalEnsemble::state(std::optional<SubsystemSplit> split) const {
  const Matrix& v = spectrum_->eigenvectors;
  Matrix rho = v * stats_.p.cast<Complex>().asDiagonal() * v.adjoint();
  return DensityOperator(HermitianOperator(rho), std::move(split));
}

double ThermalEnsemble::expect(const Matrix& x) const {
  const Matrix& v = spectrum_->eigenvectors;
  Matrix xv = x * v;
  double sum = 0.0;
  for (Index i = 0; i < v.cols(); ++i) sum += stats_.p(i) * v.col(i).dot(xv.col(i)).real();
  return sum;
}

double log_partition(const HermitianOperator& h, double beta) {
  require_beta(beta);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  return spectral_stats(solver.eigenvalues(), beta).log_Z;
}

DensityOperator thermal_state(const HermitianOperator& h, double beta) { return ThermalEnsemble(h, beta).state(); }

DensityOperator reduced_state(const DensityOperator& rho, const SubsystemSplit& split, std::span<const int> keep) {
  return DensityOperator(partial_trace(rho.op(), split, keep));
}

CanonicalReport canonical_report(const HermitianOperator& h_s, double beta) {
  require_beta(beta);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h_s.matrix(), Eigen::EigenvaluesOnly);
  SpectralStats s = spectral_stats(solver.eigenvalues(), beta);
  CanonicalReport r;
  r.beta = beta;
  r.log_Z = s.log_Z;
  r.Z = std::exp(s.log_Z);
  r.F = s.free_energy();
  r.U = s.energy;
  r.S = s.entropy;
  r.C = s.heat_capacity();
  return r;
}

}  // namespace qthermo

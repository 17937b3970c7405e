#pragma once

#include "qthermo/operator_algebra.hpp"

#include <memory>

namespace qthermo {

/// Boltzmann statistics of a spectrum at inverse temperature beta.
/// Weights are normalized probabilities; derivatives are analytic.
struct SpectralStats {
  double beta = 0.0;
  double log_Z = 0.0;
  double energy = 0.0;    // <E>
  double variance = 0.0;  // <E^2> - <E>^2
  double entropy = 0.0;   // beta <E> + ln Z
  RealVector p;

  double free_energy() const { return -log_Z / beta; }
  double heat_capacity() const { return beta * beta * variance; }
};

SpectralStats spectral_stats(const RealVector& eigenvalues, double beta);

void require_beta(double beta);

/// Immutable thermal state of a Hamiltonian: the spectrum is computed once.
class ThermalEnsemble {
 public:
  ThermalEnsemble(const HermitianOperator& h, double beta);
  ThermalEnsemble(std::shared_ptr<const SpectralDecomposition> spectrum, double beta);

  double beta() const { return stats_.beta; }
  double log_partition() const { return stats_.log_Z; }
  const SpectralStats& stats() const { return stats_; }
  const SpectralDecomposition& spectrum() const { return *spectrum_; }
  DensityOperator state(std::optional<SubsystemSplit> split = std::nullopt) const;
  /// Re Tr(rho X) without forming rho.
  double expect(const Matrix& x) const;

 private:
  std::shared_ptr<const SpectralDecomposition> spectrum_;
  SpectralStats stats_;
};

double log_partition(const HermitianOperator& h, double beta);
DensityOperator thermal_state(const HermitianOperator& h, double beta);
DensityOperator reduced_state(const DensityOperator& rho, const SubsystemSplit& split, std::span<const int> keep);

struct CanonicalReport {
  double beta = 0.0;
  double log_Z = 0.0;
  double Z = 0.0;
  double F = 0.0;
  double U = 0.0;
  double S = 0.0;
  double C = 0.0;
};

CanonicalReport canonical_report(const HermitianOperator& h_s, double beta);

}  // namespace qthermo

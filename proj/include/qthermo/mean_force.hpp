#pragma once

#include "qthermo/gibbs.hpp"
#include "qthermo/models.hpp"

#include <memory>

namespace qthermo {

struct MeanForceResult {
  double beta = 0.0;
  HermitianOperator h_star;   // system space
  HermitianOperator delta_s;  // H* - H_s + F_b
  double log_Z_star = 0.0;    // ln Tr exp(-beta H*)
  double F_star = 0.0;
  double F_b = 0.0;
  double log_Z_c = 0.0;
  double log_Z_b = 0.0;
  /// Smallest eigenvalue of Tr_b exp(-beta H_c) / Z_b.
  double m_min_eigenvalue = 0.0;
  /// Directly partial-traced composite state.
  DensityOperator rho_s;
  /// ||rho_s - exp(-beta H*)/Z*||_F
  double residual_state = 0.0;
  /// |Z* Z_b - Z_c| / Z_c
  double residual_partition = 0.0;
  /// ||delta_s - (H* - H_s + F_b)||_F
  double residual_delta = 0.0;
};

/// Expectations of the model blocks in the energy eigenbasis of a spectrum.
struct BlockDiagonals {
  RealVector h_s, h_i, h_b, a_b;
};

/// Caches the composite and free-bath spectra of one model; every beta reuses them.
/// Tr_b exp(-beta (H_c - e0)) = u diag(exp(log_sigma2)) u^dagger.
struct BathTracedSpectrum {
  Matrix u;
  RealVector log_sigma2;
  double e0 = 0.0;
};

class MeanForceSolver {
 public:
  explicit MeanForceSolver(CompositeHamiltonian model);

  const CompositeHamiltonian& model() const { return model_; }
  const SpectralDecomposition& composite_spectrum() const { return *composite_; }
  const SpectralDecomposition& bath_spectrum() const { return *bath_; }
  const BlockDiagonals& composite_diagonals() const { return composite_diag_; }
  /// Only h_b and a_b are populated (local bath operators).
  const BlockDiagonals& bath_diagonals() const { return bath_diag_; }

  SpectralStats composite_stats(double beta) const;
  SpectralStats bath_stats(double beta) const;
  ThermalEnsemble composite(double beta) const { return ThermalEnsemble(composite_, beta); }
  ThermalEnsemble bath(double beta) const { return ThermalEnsemble(bath_, beta); }

  /// H* and F_b only, without the residual diagnostics.
  MeanForceResult solve_fast(double beta) const;
  MeanForceResult solve(double beta) const;
  /// Tr_b of exp(-beta H_c) as exp(log_scale) * op.
  ScaledOperator bath_traced_boltzmann(double beta) const;
  BathTracedSpectrum bath_traced_spectrum(double beta) const;

 private:
  MeanForceResult solve_impl(double beta, bool diagnostics) const;

  CompositeHamiltonian model_;
  std::shared_ptr<const SpectralDecomposition> composite_;
  std::shared_ptr<const SpectralDecomposition> bath_;
  BlockDiagonals composite_diag_;
  BlockDiagonals bath_diag_;
};

MeanForceResult hamiltonian_of_mean_force(const CompositeHamiltonian& model, double beta);
HermitianOperator delta_s(const CompositeHamiltonian& model, double beta);

/// Real diagonal <v_i| X |v_i> of X in the basis given by the columns of v.
RealVector basis_diagonal(const Matrix& v, const Matrix& x);

}  // namespace qthermo

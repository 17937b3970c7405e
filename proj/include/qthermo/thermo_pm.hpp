#pragma once

#include "qthermo/thermo_gt.hpp"

#include <array>

namespace qthermo {

/// With a drive, h_b and h_b_free include J A_b so that total() is the enthalpy.
struct EnergyDecomposition {
  double h_s = 0.0;       // <H_s> in the composite state
  double h_i = 0.0;
  double h_b = 0.0;
  double h_b_free = 0.0;  // <H_b> in the free-bath state

  double total() const { return h_s + h_i + h_b - h_b_free; }
};

struct MutualInformation {
  double value = 0.0;            // S(rho_s) + S(rho_b') - S(rho_c)
  double relative_entropy = 0.0; // S(rho_c || rho_s (x) rho_b')
  int clamped = 0;               // eigenvalues clamped before taking logs
};

MutualInformation mutual_information(const DensityOperator& rho_c, const SubsystemSplit& bipartite);

struct PMReport {
  double beta = 0.0;
  double F_star = 0.0;
  double S_s = 0.0;           // beta^2 d_beta F*
  double S_s_alt = 0.0;       // S_vN + beta^2 <d_beta H*>
  double S_vN = 0.0;
  double entropy_gap = 0.0;   // beta^2 <d_beta H*>
  double U_s_pm = 0.0;        // -d_beta ln Z*
  EnergyDecomposition decomposition;
  std::array<double, 3> C_routes{};  // -beta^2 dU, beta^2 d^2 ln Z*, -beta dS
  double C_s_pm = 0.0;
  double C_spread = 0.0;
  double S_c = 0.0, S_b = 0.0, S_b_prime = 0.0;
  MutualInformation I_sb;
  double mean_h_star = 0.0;
  double corr_symmetrized = 0.0;
  double corr_left = 0.0;
  double corr_imag = 0.0;

  double residual_entropy = 0.0;       // |S_s - S_vN - beta^2 <dH*>|
  double residual_energy = 0.0;        // |U_s_pm - decomposition|
  double residual_free_energy = 0.0;   // |F* - (U_s_pm - S_s/beta)|
  double residual_additivity = 0.0;    // |S_s + S_b - S_c|
  double residual_mi_decomposition = 0.0;
  double residual_mi_routes = 0.0;
  double residual_corr_symmetrized = 0.0;
  double residual_corr_left = 0.0;
  double corr_residual = 0.0;  // smaller of the two orderings

  double fd_error_entropy = 0.0;
  double fd_error_energy = 0.0;
  double fd_error_heat_capacity = 0.0;
  bool flagged = false;
};

inline constexpr double kPMEntropyGate = 1e-6;
inline constexpr double kPMHeatCapacityGate = 1e-5;

PMReport pm_report(const MeanForceSolver& solver, double beta, const DerivativeConfig& cfg = {});

struct EnergyGap {
  double gap = 0.0;           // -beta^2 d_beta(<H_i> + <H_b> - <H_b>_b)
  double c_difference = 0.0;  // C_s_pm - C_s_gt
  double residual = 0.0;
  double fd_error = 0.0;
};

EnergyGap gt_pm_energy_gap(const MeanForceSolver& solver, double beta, const DerivativeConfig& cfg = {});

EnergyDecomposition energy_decomposition(const MeanForceSolver& solver, double beta);

}  // namespace qthermo

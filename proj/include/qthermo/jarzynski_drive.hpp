#pragma once

#include "qthermo/thermo_pm.hpp"

#include <cstdint>
#include <optional>

namespace qthermo {

struct BareReport {
  double beta = 0.0;
  double J = 0.0;
  HermitianOperator A_s_op;  // (H* - H_s)/J
  double U_s = 0.0;          // <H_s>
  double A_s = 0.0;          // <A_s_op>
  double H_s = 0.0;          // U_s + J A_s
  double H_star_mean = 0.0;  // <H*>, equal to H_s
  double G_s = 0.0;
  double S_s = 0.0;          // von Neumann entropy of rho_s
  double residual_enthalpy = 0.0;  // |H_s - <H*>|
  double residual_entropy = 0.0;   // |S_s - beta (H_s - G_s)|
};

/// Throws std::invalid_argument at J = 0.
BareReport jz_bare(const ModelSpec& spec, double beta);

struct LocalOperators {
  Matrix Z_i_op;  // exp(beta H_s) Tr_b exp(-beta H_c), not Hermitian
  HermitianOperator U_i_op, A_i_op;
  HermitianOperator U_s_op, A_s_op, H_frak_s_op;
  double U_i_asymmetry = 0.0;  // Frobenius norm of the removed anti-Hermitian part
  double A_i_asymmetry = 0.0;
  double condition = 0.0;      // of Tr_b exp(-beta H_c)
};

inline constexpr double kMaxLocalCondition = 1e300;

LocalOperators local_operators(const MeanForceSolver& solver, double beta);

/// |Tr rho_s (U + Lambda) - Tr rho_s U|.
double gauge_check(const HermitianOperator& u_s, const DensityOperator& rho_s, const HermitianOperator& lambda);

enum class GaugeKind { Random, Diagonal, OffDiagonal };

/// Seeded Hermitian Lambda with Tr(rho_s Lambda) = 0. Diagonal and
/// off-diagonal kinds are built in the eigenbasis of rho_s.
HermitianOperator zero_mean_operator(const DensityOperator& rho_s, GaugeKind kind, std::uint64_t seed);

struct JZReport {
  double beta = 0.0;
  double J = 0.0;
  std::optional<BareReport> bare;  // present when J != 0
  double A_s_pm = 0.0;             // -beta^{-1} d_J ln Z_s
  double A_c = 0.0, A_b = 0.0;
  double H_c = 0.0, H_b = 0.0, H_s = 0.0;  // enthalpies
  double H_s_fd = 0.0;                      // -d_beta ln Z_s
  double U_c = 0.0, U_b = 0.0, U_s = 0.0;
  double U_s_decomposition = 0.0;  // <H_s> + <H_i> + <H_b> - <H_b>_b
  double G_c = 0.0, G_b = 0.0, G_s = 0.0;
  double S_c = 0.0, S_b = 0.0, S_s = 0.0;  // -Tr rho ln rho route
  double S_c_fd = 0.0, S_b_fd = 0.0;       // beta^2 d_beta G route
  double S_vN = 0.0;

  double residual_gibbs = 0.0;
  double residual_A = 0.0;
  double residual_enthalpy = 0.0;
  double residual_enthalpy_decomposition = 0.0;
  double residual_energy = 0.0;
  double residual_entropy_routes = 0.0;
  double residual_entropy_relation = 0.0;
  double residual_entropy_additivity = 0.0;
  double bare_pm_gap = 0.0;  // |A_s bare - A_s pm|

  // Local-operator contracts.
  double residual_local_U = 0.0;
  double residual_local_A = 0.0;
  double residual_local_H = 0.0;
  double nonsensical_difference = 0.0;
  double U_i_asymmetry = 0.0;
  double A_i_asymmetry = 0.0;

  double fd_error_A = 0.0;
  double fd_error_enthalpy = 0.0;
  double fd_error_entropy = 0.0;
  bool flagged = false;
};

inline constexpr double kJZGate = 1e-6;

JZReport jz_partial_molar(const ModelSpec& spec, double beta, const DerivativeConfig& cfg = {});

}  // namespace qthermo

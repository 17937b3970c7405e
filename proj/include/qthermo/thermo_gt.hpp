#pragma once

#include "qthermo/calculus.hpp"
#include "qthermo/mean_force.hpp"

namespace qthermo {

/// Eigenvalues below this are treated as exact zeros in -sum p ln p.
inline constexpr double kEntropyClamp = 1e-14;

double vn_entropy(const DensityOperator& rho);
double vn_entropy(const RealVector& probabilities);

struct GTReport {
  double beta = 0.0;
  double U_s_gt = 0.0;  // <H_s>
  double S_vN = 0.0;
  double S_vN_star = 0.0;  // same entropy from the spectrum of H*
  double F_c = 0.0;        // composite free energy, not a system quantity
  double F_star = 0.0;
  double F_b = 0.0;
  double S_b = 0.0;
  double S_c = 0.0;
  double mean_delta = 0.0;    // <Delta>
  double mean_ddelta = 0.0;   // <d_beta Delta>, state frozen
  double d_mean_delta = 0.0;  // d_beta <Delta>
  double dF_c = 0.0;          // analytic
  double C_s_gt = 0.0;        // -beta^2 d_beta <H_s>
  double C_s_gt_alt = 0.0;    // -beta d_beta S_vN - beta^2 (<dDelta> - d<Delta>)
  double residual_relation = 0.0;
  double residual_heat_capacity = 0.0;
  double S_nonadditivity = 0.0;
  double fd_error_relation = 0.0;
  double fd_error_heat_capacity = 0.0;
  bool flagged = false;
};

inline constexpr double kGTRelationGate = 1e-5;

GTReport gt_report(const MeanForceSolver& solver, double beta, const DerivativeConfig& cfg = {});

}  // namespace qthermo

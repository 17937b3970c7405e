#pragma once

#include "qthermo/calculus.hpp"
#include "qthermo/models.hpp"

#include <optional>
#include <vector>

namespace qthermo {

/// One system oscillator, N <= 3 bath oscillators and a piston v.
///   H_s = p^2/2 + omega_s^2 q^2/2
///   H_b = sum (p_k^2/2 + omega_k^2 q_k^2/2) + p_v^2/2 + kappa v^2/2 + eta v^4/4
///   H_i = sum g_k q q_k + lambda q v,   V_b = v0 + a v
/// Momenta are integrated analytically; eta != 0 has no closed form.
struct ClassicalParams {
  double omega_s = 1.0;
  std::vector<double> omega_b{1.0};
  std::vector<double> g{0.5};
  double kappa = 1.0;
  double a = 1.0;
  double v0 = 1.0;
  double lambda = 0.4;
  double eta = 0.0;
  int order = 64;  // Gauss-Hermite nodes per coordinate
};

/// Ensemble integrals at one (P, beta). Energies include the kinetic parts.
struct ClassicalThermo {
  double P = 0.0, beta = 0.0;
  double log_Z_c = 0.0, log_Z_b = 0.0, log_Z_s = 0.0;
  double G_c = 0.0, G_b = 0.0, G_s = 0.0;
  double U_c = 0.0, U_b = 0.0;
  double V_c = 0.0, V_b = 0.0;
  double H_c = 0.0, H_b = 0.0;
  double S_c = 0.0, S_b = 0.0;
  double mean_H_s = 0.0;      // <H_s> in rho_s
  double mean_phi = 0.0;      // <phi>
  double mean_dphi_dP = 0.0;  // <d_P phi>
  double S_gibbs = 0.0;       // -int rho_s ln rho_s
};

class ClassicalModel {
 public:
  explicit ClassicalModel(ClassicalParams params);

  const ClassicalParams& params() const { return p_; }
  std::size_t bath_oscillators() const { return p_.omega_b.size(); }
  bool gaussian() const { return p_.eta == 0.0; }

  /// phi(q; P, beta) by quadrature, verified by doubling the order.
  double phi(double q, double P, double beta) const;
  double phi_closed(double q, double P) const;
  double dphi_dP_closed(double q) const;

  ClassicalThermo quadrature(double P, double beta) const;
  ClassicalThermo quadrature(double P, double beta, int order) const;
  ClassicalThermo closed_form(double P, double beta) const;

  /// Relative tolerance of the order-doubling check.
  static constexpr double kQuadratureTol = 1e-10;

 private:
  ClassicalParams p_;
};

struct BareBlock {
  double V = 0.0, U = 0.0, H = 0.0, S = 0.0;
  double residual_enthalpy = 0.0;  // |H - (U + P V)|
  double residual_gibbs = 0.0;     // |G_s - (H - S/beta)|
  double entropy_gap = 0.0;        // |S - beta^2 d_beta G_s|
  double energy_gap = 0.0;         // |U - d_beta(beta G_s)|
};

struct PartialMolarBlock {
  double V = 0.0, U = 0.0, H = 0.0, S = 0.0;
  double V_fd = 0.0;  // d_P G_s
  double H_fd = 0.0;  // -d_beta ln Z_s
  double S_fd = 0.0;  // beta^2 d_beta G_s
  double S_c = 0.0, S_b = 0.0;
  double residual_volume_fd = 0.0;
  double residual_volume_split = 0.0;   // |V - (V_c - V_b)|
  double residual_enthalpy = 0.0;       // |H - (U + P V)|
  double residual_enthalpy_fd = 0.0;
  double residual_entropy_fd = 0.0;
  double residual_entropy_relation = 0.0;  // |S - beta (H - G_s)|
  double residual_additivity = 0.0;        // |S + S_b - S_c|
  double fd_error = 0.0;
};

struct ClassicalReport {
  double P = 0.0, beta = 0.0;
  double G_s = 0.0, G_c = 0.0, G_b = 0.0;
  std::optional<BareBlock> bare;  // requires P > 0
  PartialMolarBlock pm;
  double gap_V = 0.0, gap_U = 0.0, gap_H = 0.0, gap_S = 0.0;
  /// Largest relative quadrature/closed-form difference; absent when eta != 0.
  std::optional<double> closed_form_deviation;
};

/// Throws std::invalid_argument at P <= 0.
BareBlock bare_report(const ClassicalModel& model, double P, double beta, const DerivativeConfig& cfg = {});
PartialMolarBlock pm_report(const ClassicalModel& model, double P, double beta, const DerivativeConfig& cfg = {});
ClassicalReport classical_report(const ClassicalModel& model, double P, double beta, const DerivativeConfig& cfg = {});

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, 1) over every field of ClassicalThermo.
double relative_deviation(const ClassicalThermo& a, const ClassicalThermo& b);

struct GaussHermiteRule {
  std::vector<double> x, w;  // for the weight exp(-x^2)
};

const GaussHermiteRule& gauss_hermite(int order);

}  // namespace qthermo

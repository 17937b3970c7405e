#include "qthermo/thermo_pm.hpp"

#include <algorithm>
#include <cmath>

namespace qthermo {

namespace {

constexpr double kLogFloor = 1e-300;

Matrix clamped_log(const Matrix& rho, int& clamped) {
  SpectralDecomposition s = eig_hermitian(HermitianOperator(rho));
  return hermitian_function(s,
                            [&](double p) {
                              if (p < kLogFloor) {
                                ++clamped;
                                p = kLogFloor;
                              }
                              return std::log(p);
                            })
      .matrix();
}

}  // namespace

MutualInformation mutual_information(const DensityOperator& rho_c, const SubsystemSplit& bipartite) {
  if (bipartite.factors() != 2) throw DimensionError("mutual_information: split must have two factors");
  static constexpr std::array<int, 1> keep_s{0}, keep_b{1};
  DensityOperator rho_s(partial_trace(rho_c.op(), bipartite, keep_s));
  DensityOperator rho_b(partial_trace(rho_c.op(), bipartite, keep_b));
  MutualInformation mi;
  mi.value = vn_entropy(rho_s) + vn_entropy(rho_b) - vn_entropy(rho_c);
  Matrix product = kron(rho_s.matrix(), rho_b.matrix());
  Matrix diff = clamped_log(rho_c.matrix(), mi.clamped) - clamped_log(product, mi.clamped);
  mi.relative_entropy = trace_product(rho_c.matrix(), diff).real();
  return mi;
}

EnergyDecomposition energy_decomposition(const MeanForceSolver& solver, double beta) {
  SpectralStats cs = solver.composite_stats(beta);
  SpectralStats bs = solver.bath_stats(beta);
  const BlockDiagonals& cd = solver.composite_diagonals();
  EnergyDecomposition e;
  e.h_s = cs.p.dot(cd.h_s);
  e.h_i = cs.p.dot(cd.h_i);
  e.h_b = cs.p.dot(cd.h_b);
  e.h_b_free = bs.p.dot(solver.bath_diagonals().h_b);
  // With a drive the free-bath reference carries J A_b inside its Hamiltonian.
  const double J = solver.model().J;
  if (J != 0.0) {
    e.h_b += J * cs.p.dot(cd.a_b);
    e.h_b_free += J * bs.p.dot(solver.bath_diagonals().a_b);
  }
  return e;
}

PMReport pm_report(const MeanForceSolver& solver, double beta, const DerivativeConfig& cfg_in) {
  DerivativeConfig cfg = cfg_in;
  cfg.parameter = Parameter::Beta;
  MeanForceResult mf = solver.solve(beta);
  SpectralStats cs = solver.composite_stats(beta);
  SpectralStats bs = solver.bath_stats(beta);
  const Index ds = mf.rho_s.dim();

  PMReport r;
  r.beta = beta;
  r.F_star = mf.F_star;
  r.S_vN = vn_entropy(mf.rho_s);
  r.S_c = cs.entropy;
  r.S_b = bs.entropy;
  static constexpr std::array<int, 1> keep_b{1};
  ThermalEnsemble comp = solver.composite(beta);
  DensityOperator rho_c = comp.state(solver.model().bipartite);
  r.S_b_prime = vn_entropy(DensityOperator(partial_trace(rho_c.op(), solver.model().bipartite, keep_b)));

  auto f_star_at = [&](double b) { return solver.solve_fast(b).F_star; };
  Derivative<double> dF = param_derivative(f_star_at, beta, cfg);
  r.S_s = beta * beta * dF.value;

  auto h_star_at = [&](double b) { return Matrix(solver.solve_fast(b).h_star.matrix()); };
  Derivative<Matrix> dH = param_derivative(h_star_at, beta, cfg);
  const double mean_dh = mf.rho_s.expect(dH.value);
  r.entropy_gap = beta * beta * mean_dh;
  r.S_s_alt = r.S_vN + r.entropy_gap;
  r.residual_entropy = std::abs(r.S_s - r.S_s_alt);
  r.fd_error_entropy = beta * beta * (dF.error + dH.error * std::sqrt(double(ds)));

  auto log_z_star_at = [&](double b) { return solver.solve_fast(b).log_Z_star; };
  Derivative<double> dLogZ = param_derivative(log_z_star_at, beta, cfg);
  r.U_s_pm = -dLogZ.value;
  r.decomposition = energy_decomposition(solver, beta);
  r.residual_energy = std::abs(r.U_s_pm - r.decomposition.total());
  r.fd_error_energy = dLogZ.error;
  r.residual_free_energy = std::abs(r.F_star - (r.U_s_pm - r.S_s / beta));
  r.residual_additivity = std::abs(r.S_s + r.S_b - r.S_c);

  auto u_at = [&](double b) { return energy_decomposition(solver, b).total(); };
  auto s_at = [&](double b) { return solver.composite_stats(b).entropy - solver.bath_stats(b).entropy; };
  Derivative<double> dU = param_derivative(u_at, beta, cfg);
  Derivative<double> dS = param_derivative(s_at, beta, cfg);
  r.C_routes[0] = -beta * beta * dU.value;
  r.C_routes[1] = beta * beta * (cs.variance - bs.variance);
  r.C_routes[2] = -beta * dS.value;
  r.C_s_pm = r.C_routes[1];
  r.C_spread = std::max({std::abs(r.C_routes[0] - r.C_routes[1]), std::abs(r.C_routes[0] - r.C_routes[2]),
                         std::abs(r.C_routes[1] - r.C_routes[2])});
  r.fd_error_heat_capacity = std::max(beta * beta * dU.error, beta * dS.error);

  r.I_sb = mutual_information(rho_c, solver.model().bipartite);
  r.residual_mi_decomposition = std::abs(r.I_sb.value - ((r.S_b_prime - r.S_b) + (r.S_vN - r.S_s)));
  r.residual_mi_routes = std::abs(r.I_sb.value - r.I_sb.relative_entropy);

  // beta <dH*> = beta d<H*> + beta (<H_c H*> - <H_c><H*>)
  r.mean_h_star = mf.rho_s.expect(mf.h_star);
  auto mean_h_star_at = [&](double b) {
    return spectral_stats(eig_hermitian(solver.solve_fast(b).h_star).eigenvalues, b).energy;
  };
  Derivative<double> dMeanH = param_derivative(mean_h_star_at, beta, cfg);
  const Matrix hc = solver.model().total().matrix();
  const Matrix lifted = kron(mf.h_star.matrix(), Matrix::Identity(solver.model().bath_dim(), solver.model().bath_dim()));
  const Matrix& rc = rho_c.matrix();
  Complex left = trace_product(rc, Matrix(hc * lifted));
  Complex sym = 0.5 * (left + trace_product(rc, Matrix(lifted * hc)));
  r.corr_left = left.real();
  r.corr_symmetrized = sym.real();
  r.corr_imag = std::max(std::abs(left.imag()), std::abs(sym.imag()));
  const double mean_hc = cs.energy;
  const double lhs = beta * mean_dh;
  r.residual_corr_symmetrized =
      std::abs(lhs - beta * dMeanH.value - beta * (r.corr_symmetrized - mean_hc * r.mean_h_star));
  r.residual_corr_left = std::abs(lhs - beta * dMeanH.value - beta * (r.corr_left - mean_hc * r.mean_h_star));
  r.corr_residual = std::min(r.residual_corr_symmetrized, r.residual_corr_left);

  r.flagged = r.fd_error_entropy > kPMEntropyGate || r.fd_error_energy > kPMEntropyGate ||
              r.fd_error_heat_capacity > kPMHeatCapacityGate;
  return r;
}

EnergyGap gt_pm_energy_gap(const MeanForceSolver& solver, double beta, const DerivativeConfig& cfg_in) {
  DerivativeConfig cfg = cfg_in;
  cfg.parameter = Parameter::Beta;
  auto bath_part = [&](double b) {
    EnergyDecomposition e = energy_decomposition(solver, b);
    return e.h_i + e.h_b - e.h_b_free;
  };
  auto u_pm = [&](double b) { return energy_decomposition(solver, b).total(); };
  auto u_gt = [&](double b) { return energy_decomposition(solver, b).h_s; };
  Derivative<double> dGap = param_derivative(bath_part, beta, cfg);
  Derivative<double> dPm = param_derivative(u_pm, beta, cfg);
  Derivative<double> dGt = param_derivative(u_gt, beta, cfg);
  EnergyGap g;
  g.gap = -beta * beta * dGap.value;
  g.c_difference = -beta * beta * dPm.value + beta * beta * dGt.value;
  g.residual = std::abs(g.gap - g.c_difference);
  g.fd_error = beta * beta * (dGap.error + dPm.error + dGt.error);
  return g;
}

}  // namespace qthermo

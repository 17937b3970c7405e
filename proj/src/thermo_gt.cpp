#include "qthermo/thermo_gt.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qthermo {

double vn_entropy(const RealVector& p) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) >= kEntropyClamp) s -= p(i) * std::log(p(i));
  return s;
}

double vn_entropy(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
  return vn_entropy(RealVector(solver.eigenvalues()));
}

GTReport gt_report(const MeanForceSolver& solver, double beta, const DerivativeConfig& cfg_in) {
  DerivativeConfig cfg = cfg_in;
  cfg.parameter = Parameter::Beta;
  MeanForceResult mf = solver.solve(beta);
  SpectralStats cs = solver.composite_stats(beta);
  SpectralStats bs = solver.bath_stats(beta);
  const BlockDiagonals& cd = solver.composite_diagonals();

  GTReport r;
  r.beta = beta;
  r.U_s_gt = cs.p.dot(cd.h_s);
  r.S_vN = vn_entropy(mf.rho_s);
  r.S_vN_star = spectral_stats(eig_hermitian(mf.h_star).eigenvalues, beta).entropy;
  r.F_c = cs.free_energy();
  r.F_star = mf.F_star;
  r.F_b = mf.F_b;
  r.S_b = bs.entropy;
  r.S_c = cs.entropy;
  r.mean_delta = mf.rho_s.expect(mf.delta_s);
  r.dF_c = cs.log_Z / (beta * beta) + cs.energy / beta;

  auto delta_at = [&](double b) { return Matrix(solver.solve_fast(b).delta_s.matrix()); };
  Derivative<Matrix> dDelta = param_derivative(delta_at, beta, cfg);
  r.mean_ddelta = mf.rho_s.expect(dDelta.value);

  auto mean_delta_at = [&](double b) {
    MeanForceResult m = solver.solve_fast(b);
    SpectralDecomposition hs = eig_hermitian(m.h_star);
    RealVector p = spectral_stats(hs.eigenvalues, b).p;
    RealVector d = basis_diagonal(hs.eigenvectors, m.delta_s.matrix());
    return p.dot(d);
  };
  Derivative<double> dMeanDelta = param_derivative(mean_delta_at, beta, cfg);
  r.d_mean_delta = dMeanDelta.value;

  r.residual_relation = std::abs(r.F_c - (r.U_s_gt + r.mean_delta + beta * r.mean_ddelta - beta * r.dF_c));
  r.fd_error_relation = beta * dDelta.error * std::sqrt(double(mf.rho_s.dim()));

  auto u_s_at = [&](double b) { return solver.composite_stats(b).p.dot(cd.h_s); };
  Derivative<double> dU = param_derivative(u_s_at, beta, cfg);
  r.C_s_gt = -beta * beta * dU.value;

  auto s_vn_at = [&](double b) {
    return spectral_stats(eig_hermitian(solver.solve_fast(b).h_star).eigenvalues, b).entropy;
  };
  Derivative<double> dS = param_derivative(s_vn_at, beta, cfg);
  r.C_s_gt_alt = -beta * dS.value - beta * beta * (r.mean_ddelta - r.d_mean_delta);
  r.residual_heat_capacity = std::abs(r.C_s_gt - r.C_s_gt_alt);
  r.fd_error_heat_capacity = beta * beta * dU.error + beta * dS.error +
                             beta * beta * (dDelta.error * std::sqrt(double(mf.rho_s.dim())) + dMeanDelta.error);

  r.S_nonadditivity = std::abs(r.S_vN + r.S_b - r.S_c);
  r.flagged = r.fd_error_relation > kGTRelationGate || r.fd_error_heat_capacity > kGTRelationGate;
  return r;
}

}  // namespace qthermo

#include "qthermo/jarzynski_drive.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qthermo {

BareReport jz_bare(const ModelSpec& spec, double beta) {
  if (spec.J() == 0.0) throw std::invalid_argument("bare A_s undefined at zero drive");
  MeanForceSolver solver(build(spec));
  MeanForceResult mf = solver.solve(beta);
  const CompositeHamiltonian& m = solver.model();
  BareReport r;
  r.beta = beta;
  r.J = m.J;
  r.A_s_op = (1.0 / m.J) * (mf.h_star - m.h_s_local);
  r.U_s = mf.rho_s.expect(m.h_s_local);
  r.A_s = mf.rho_s.expect(r.A_s_op);
  r.H_s = r.U_s + m.J * r.A_s;
  r.H_star_mean = mf.rho_s.expect(mf.h_star);
  r.G_s = mf.F_star;
  r.S_s = vn_entropy(mf.rho_s);
  r.residual_enthalpy = std::abs(r.H_s - r.H_star_mean);
  r.residual_entropy = std::abs(r.S_s - beta * (r.H_s - r.G_s));
  return r;
}

LocalOperators local_operators(const MeanForceSolver& solver, double beta) {
  require_beta(beta);
  const CompositeHamiltonian& m = solver.model();
  const SpectralDecomposition& spec = solver.composite_spectrum();
  BathTracedSpectrum g = solver.bath_traced_spectrum(beta);
  const Index ds = m.system_dim(), db = m.bath_dim();

  LocalOperators ops;
  ops.condition = std::exp(g.log_sigma2.maxCoeff() - g.log_sigma2.minCoeff());
  if (!(ops.condition < kMaxLocalCondition)) {
    std::ostringstream os;
    os.precision(3);
    os << "local_operators: Z_i is numerically singular (condition number " << ops.condition << ")";
    throw NumericalError(os.str());
  }

  // Work in the eigenbasis u of Tr_b exp(-beta H_c), where that operator is
  // diag(sigma^2): rows of the solve become divisions and E0 cancels exactly.
  static constexpr std::array<int, 1> keep_s{0};
  const Matrix rot = kron(g.u, Matrix::Identity(db, db));
  const Matrix q = rot.adjoint() * spec.eigenvectors;
  RealVector w = (-beta * (spec.eigenvalues.array() - g.e0)).exp();
  RealVector we = w.array() * (spec.eigenvalues.array() - g.e0);
  Matrix boltz = q * w.cast<Complex>().asDiagonal() * q.adjoint();
  Matrix n_h = partial_trace(Matrix(q * we.cast<Complex>().asDiagonal() * q.adjoint()), m.bipartite, keep_s);
  Matrix n_a = partial_trace(Matrix(boltz * m.a_b.matrix()), m.bipartite, keep_s);
  RealVector inv_s2 = (-g.log_sigma2.array()).exp();
  Matrix a_u = inv_s2.cast<Complex>().asDiagonal() * n_a;
  Matrix h_u = inv_s2.cast<Complex>().asDiagonal() * n_h;
  h_u.diagonal().array() += g.e0;
  Matrix u_u = h_u - m.J * a_u;  // H_s + H_i + H_b = H_c - J A_b

  Matrix u_i = g.u * u_u * g.u.adjoint();
  Matrix a_i = g.u * a_u * g.u.adjoint();

  // Z_i = exp(beta H_s) Tr_b exp(-beta H_c).
  ScaledOperator eh = exp_scaled(m.h_s_local, beta);
  RealVector s2 = g.log_sigma2.array().exp();
  ops.Z_i_op = std::exp(eh.log_scale - beta * g.e0) * eh.op.matrix() * (g.u * s2.cast<Complex>().asDiagonal() * g.u.adjoint());

  ops.U_i_op = HermitianOperator(u_i);
  ops.A_i_op = HermitianOperator(a_i);
  ops.U_i_asymmetry = ops.U_i_op.asymmetry();
  ops.A_i_asymmetry = ops.A_i_op.asymmetry();

  SpectralStats bs = solver.bath_stats(beta);
  const double u_b = bs.p.dot(solver.bath_diagonals().h_b);
  const double a_b = bs.p.dot(solver.bath_diagonals().a_b);
  ops.U_s_op = ops.U_i_op - u_b * HermitianOperator::identity(ds);
  ops.A_s_op = ops.A_i_op - a_b * HermitianOperator::identity(ds);
  ops.H_frak_s_op = ops.U_s_op + m.J * ops.A_s_op;
  return ops;
}

double gauge_check(const HermitianOperator& u_s, const DensityOperator& rho_s, const HermitianOperator& lambda) {
  return std::abs(rho_s.expect(u_s + lambda) - rho_s.expect(u_s));
}

HermitianOperator zero_mean_operator(const DensityOperator& rho_s, GaugeKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Index n = rho_s.dim();
  if (kind == GaugeKind::Random) {
    Matrix x(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) x(i, j) = Complex(normal(rng), normal(rng));
    HermitianOperator h(x);
    return h - rho_s.expect(h) * HermitianOperator::identity(n);
  }
  SpectralDecomposition s = eig_hermitian(rho_s.op());
  Matrix in_basis = Matrix::Zero(n, n);
  if (kind == GaugeKind::Diagonal) {
    // Diagonal entries orthogonal to the populations p.
    RealVector d(n);
    for (Index i = 0; i < n; ++i) d(i) = normal(rng);
    const RealVector& p = s.eigenvalues;
    d -= (d.dot(p) / p.squaredNorm()) * p;
    in_basis.diagonal() = d.cast<Complex>();
  } else {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < j; ++i) {
        Complex z(normal(rng), normal(rng));
        in_basis(i, j) = z;
        in_basis(j, i) = std::conj(z);
      }
  }
  return HermitianOperator(s.eigenvectors * in_basis * s.eigenvectors.adjoint());
}

JZReport jz_partial_molar(const ModelSpec& spec, double beta, const DerivativeConfig& cfg_in) {
  MeanForceSolver solver(build(spec));
  const CompositeHamiltonian& m = solver.model();
  MeanForceResult mf = solver.solve(beta);
  SpectralStats cs = solver.composite_stats(beta);
  SpectralStats bs = solver.bath_stats(beta);
  const BlockDiagonals& cd = solver.composite_diagonals();
  const BlockDiagonals& bd = solver.bath_diagonals();

  JZReport r;
  r.beta = beta;
  r.J = m.J;
  if (m.J != 0.0) r.bare = jz_bare(spec, beta);

  r.A_c = cs.p.dot(cd.a_b);
  r.A_b = bs.p.dot(bd.a_b);
  DerivativeConfig jcfg = cfg_in;
  jcfg.parameter = Parameter::J;
  jcfg.avoid_zero_crossing = r.bare.has_value();
  auto log_zs_at_j = [&](double J) { return MeanForceSolver(build(spec.with_J(J))).solve_fast(beta).log_Z_star; };
  Derivative<double> dJ = param_derivative(log_zs_at_j, m.J, jcfg);
  r.A_s_pm = -dJ.value / beta;
  r.fd_error_A = dJ.error / beta;
  r.residual_A = std::abs(r.A_s_pm - (r.A_c - r.A_b));

  r.H_c = cs.energy;
  r.H_b = bs.energy;
  r.H_s = r.H_c - r.H_b;
  DerivativeConfig bcfg = cfg_in;
  bcfg.parameter = Parameter::Beta;
  auto log_zs_at_beta = [&](double b) { return solver.solve_fast(b).log_Z_star; };
  Derivative<double> dB = param_derivative(log_zs_at_beta, beta, bcfg);
  r.H_s_fd = -dB.value;
  r.fd_error_enthalpy = dB.error;
  r.residual_enthalpy = std::abs(r.H_s_fd - r.H_s);

  r.U_c = r.H_c - m.J * r.A_c;
  r.U_b = bs.p.dot(bd.h_b);
  r.U_s = r.U_c - r.U_b;
  r.U_s_decomposition = cs.p.dot(cd.h_s) + cs.p.dot(cd.h_i) + cs.p.dot(cd.h_b) - r.U_b;
  r.residual_energy = std::abs(r.U_s - r.U_s_decomposition);
  r.residual_enthalpy_decomposition = std::abs(r.H_s - (r.U_s + m.J * r.A_s_pm));

  r.G_c = cs.free_energy();
  r.G_b = bs.free_energy();
  r.G_s = mf.F_star;
  r.residual_gibbs = std::abs(r.G_c - (r.G_s + r.G_b));

  r.S_c = vn_entropy(solver.composite(beta).state());
  r.S_b = vn_entropy(solver.bath(beta).state());
  r.S_s = r.S_c - r.S_b;
  r.S_vN = vn_entropy(mf.rho_s);
  auto g_c_at = [&](double b) { return solver.composite_stats(b).free_energy(); };
  auto g_b_at = [&](double b) { return solver.bath_stats(b).free_energy(); };
  Derivative<double> dGc = param_derivative(g_c_at, beta, bcfg);
  Derivative<double> dGb = param_derivative(g_b_at, beta, bcfg);
  r.S_c_fd = beta * beta * dGc.value;
  r.S_b_fd = beta * beta * dGb.value;
  r.fd_error_entropy = beta * beta * std::max(dGc.error, dGb.error);
  r.residual_entropy_routes = std::max(std::abs(r.S_c - r.S_c_fd), std::abs(r.S_b - r.S_b_fd));
  r.residual_entropy_relation = std::abs(r.S_s - beta * (r.H_s - r.G_s));
  r.residual_entropy_additivity = std::abs(r.S_s + r.S_b - r.S_c);
  if (r.bare) r.bare_pm_gap = std::abs(r.bare->A_s - r.A_s_pm);

  LocalOperators ops = local_operators(solver, beta);
  r.residual_local_U = std::abs(mf.rho_s.expect(ops.U_s_op) - (r.U_c - r.U_b));
  r.residual_local_A = std::abs(mf.rho_s.expect(ops.A_s_op) - (r.A_c - r.A_b));
  r.residual_local_H = std::abs(mf.rho_s.expect(ops.H_frak_s_op) - (r.U_s + m.J * r.A_s_pm));
  r.U_i_asymmetry = ops.U_i_asymmetry;
  r.A_i_asymmetry = ops.A_i_asymmetry;
  // Tr rho_c (H_c - I (x) (H_b + J A_b)) against H_s: the naive difference.
  const double naive = cs.energy - cs.p.dot(cd.h_b) - m.J * cs.p.dot(cd.a_b);
  r.nonsensical_difference = std::abs(naive - r.H_s);

  r.flagged = r.fd_error_A > kJZGate || r.fd_error_enthalpy > kJZGate || r.fd_error_entropy > kJZGate;
  return r;
}

}  // namespace qthermo

#include "qthermo/mean_force.hpp"

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <sstream>

namespace qthermo {

RealVector basis_diagonal(const Matrix& v, const Matrix& x) {
  Matrix xv = x * v;
  RealVector d(v.cols());
  for (Index i = 0; i < v.cols(); ++i) d(i) = v.col(i).dot(xv.col(i)).real();
  return d;
}

MeanForceSolver::MeanForceSolver(CompositeHamiltonian model) : model_(std::move(model)) {
  composite_ = std::make_shared<const SpectralDecomposition>(eig_hermitian(model_.total()));
  bath_ = std::make_shared<const SpectralDecomposition>(eig_hermitian(model_.free_bath()));
  const Matrix& v = composite_->eigenvectors;
  composite_diag_ = {basis_diagonal(v, model_.h_s.matrix()), basis_diagonal(v, model_.h_i.matrix()),
                     basis_diagonal(v, model_.h_b.matrix()), basis_diagonal(v, model_.a_b.matrix())};
  const Matrix& vb = bath_->eigenvectors;
  bath_diag_.h_b = basis_diagonal(vb, model_.h_b_local.matrix());
  bath_diag_.a_b = basis_diagonal(vb, model_.a_b_local.matrix());
}

SpectralStats MeanForceSolver::composite_stats(double beta) const {
  return spectral_stats(composite_->eigenvalues, beta);
}

SpectralStats MeanForceSolver::bath_stats(double beta) const { return spectral_stats(bath_->eigenvalues, beta); }

namespace {

// Tr_b exp(-beta (H_c - E0)) = B B^dagger with B = [sqrt(w_i) Psi_i], Psi_i the
// i-th eigenvector reshaped to (system x bath). The SVD of B gives the
// eigenvectors of the bath-traced operator and its eigenvalues as sigma^2,
// positive by construction.
BathTracedSpectrum gram_factor(const SpectralDecomposition& spec, Index ds, Index db, double beta) {
  const RealVector& e = spec.eigenvalues;
  const double e0 = e.minCoeff();
  std::vector<Index> kept;
  for (Index i = 0; i < e.size(); ++i)
    if (std::exp(-beta * (e(i) - e0)) > 0.0) kept.push_back(i);
  Matrix b(ds, db * Index(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    Index i = kept[c];
    double sw = std::exp(-0.5 * beta * (e(i) - e0));
    Eigen::Map<const Matrix> psi_t(spec.eigenvectors.col(i).data(), db, ds);
    b.block(0, Index(c) * db, ds, db) = sw * psi_t.transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  if (sv.size() < ds || !(sv.minCoeff() > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "mean force: bath-traced Boltzmann operator is not positive definite (minimum eigenvalue "
       << (sv.size() < ds ? 0.0 : sv.minCoeff() * sv.minCoeff()) << " relative to the ground weight); "
       << "increase the truncation or lower beta";
    throw NumericalError(os.str());
  }
  return {svd.matrixU(), 2.0 * sv.array().log(), e0};
}

}  // namespace

ScaledOperator MeanForceSolver::bath_traced_boltzmann(double beta) const {
  require_beta(beta);
  BathTracedSpectrum g = gram_factor(*composite_, model_.system_dim(), model_.bath_dim(), beta);
  const double top = g.log_sigma2.maxCoeff();
  RealVector rel = (g.log_sigma2.array() - top).exp();
  return {HermitianOperator(g.u * rel.cast<Complex>().asDiagonal() * g.u.adjoint()), top - beta * g.e0};
}

BathTracedSpectrum MeanForceSolver::bath_traced_spectrum(double beta) const {
  require_beta(beta);
  return gram_factor(*composite_, model_.system_dim(), model_.bath_dim(), beta);
}

MeanForceResult MeanForceSolver::solve_fast(double beta) const { return solve_impl(beta, false); }

MeanForceResult MeanForceSolver::solve(double beta) const { return solve_impl(beta, true); }

MeanForceResult MeanForceSolver::solve_impl(double beta, bool diagnostics) const {
  require_beta(beta);
  const Index ds = model_.system_dim(), db = model_.bath_dim();
  MeanForceResult r;
  r.beta = beta;
  SpectralStats cs = composite_stats(beta);
  SpectralStats bs = bath_stats(beta);
  r.log_Z_c = cs.log_Z;
  r.log_Z_b = bs.log_Z;
  r.F_b = -bs.log_Z / beta;

  BathTracedSpectrum g = gram_factor(*composite_, ds, db, beta);
  // -beta^{-1} ln Tr_b exp(-beta H_c) in the Gram eigenbasis.
  RealVector w = -g.log_sigma2 / beta;
  w.array() += g.e0;
  r.delta_s = HermitianOperator(g.u * w.cast<Complex>().asDiagonal() * g.u.adjoint()) - model_.h_s_local;
  RealVector hw = w.array() - r.F_b;
  r.h_star = HermitianOperator(g.u * hw.cast<Complex>().asDiagonal() * g.u.adjoint());
  r.m_min_eigenvalue = std::exp(g.log_sigma2.minCoeff() - beta * g.e0 - r.log_Z_b);

  SpectralDecomposition hs = eig_hermitian(r.h_star);
  SpectralStats star = spectral_stats(hs.eigenvalues, beta);
  r.log_Z_star = star.log_Z;
  r.F_star = -star.log_Z / beta;
  r.residual_partition = std::abs(std::expm1(r.log_Z_star + r.log_Z_b - r.log_Z_c));

  if (!diagnostics) return r;

  ThermalEnsemble composite_state(composite_, beta);
  static constexpr std::array<int, 1> keep_system{0};
  r.rho_s = DensityOperator(partial_trace(composite_state.state().op(), model_.bipartite, keep_system));
  Matrix from_star = hs.eigenvectors * star.p.cast<Complex>().asDiagonal() * hs.eigenvectors.adjoint();
  r.residual_state = (r.rho_s.matrix() - from_star).norm();
  HermitianOperator expected = r.h_star - model_.h_s_local + r.F_b * HermitianOperator::identity(ds);
  r.residual_delta = (r.delta_s.matrix() - expected.matrix()).norm();
  return r;
}

MeanForceResult hamiltonian_of_mean_force(const CompositeHamiltonian& model, double beta) {
  return MeanForceSolver(model).solve(beta);
}

HermitianOperator delta_s(const CompositeHamiltonian& model, double beta) {
  return MeanForceSolver(model).solve_fast(beta).delta_s;
}

}  // namespace qthermo

#include "qthermo/operator_algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qthermo {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite matrix entries");
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": matrix is " << m.rows() << "x" << m.cols() << ", expected square";
    throw DimensionError(os.str());
  }
  if (m.rows() > kMaxCompositeDim) {
    std::ostringstream os;
    os << what << ": dimension " << m.rows() << " exceeds cap " << kMaxCompositeDim;
    throw DimensionError(os.str());
  }
}

}  // namespace

HermitianOperator::HermitianOperator(const Matrix& m) {
  require_square(m, "HermitianOperator");
  Matrix adj = m.adjoint();
  asymmetry_ = 0.5 * (m - adj).norm();
  m_ = 0.5 * (m + adj);
}

HermitianOperator HermitianOperator::identity(Index n) { return HermitianOperator(Matrix::Identity(n, n)); }

HermitianOperator HermitianOperator::zero(Index n) { return HermitianOperator(Matrix::Zero(n, n)); }

HermitianOperator HermitianOperator::diagonal(std::span<const double> entries) {
  Matrix m = Matrix::Zero(Index(entries.size()), Index(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) m(Index(i), Index(i)) = entries[i];
  return HermitianOperator(m);
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw DimensionError("HermitianOperator +: dimension mismatch");
  m_ += other.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw DimensionError("HermitianOperator -: dimension mismatch");
  m_ -= other.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

SubsystemSplit::SubsystemSplit(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("SubsystemSplit: no factors");
  total_ = 1;
  for (Index d : dims_) {
    if (d < 2) throw DimensionError("SubsystemSplit: factor dimension " + std::to_string(d) + " < 2");
    total_ *= d;
    if (total_ > kMaxCompositeDim)
      throw DimensionError("SubsystemSplit: composite dimension exceeds cap " + std::to_string(kMaxCompositeDim));
  }
}

Index SubsystemSplit::dim_of(std::span<const int> factors) const {
  Index n = 1;
  for (int f : factors) n *= dims_.at(std::size_t(f));
  return n;
}

void SubsystemSplit::require_dim(Index n) const {
  if (n != total_) {
    std::ostringstream os;
    os << "split of total dimension " << total_ << " applied to operator of dimension " << n;
    throw DimensionError(os.str());
  }
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

SpectralDecomposition eig_hermitian(const HermitianOperator& h) {
  require_finite(h.matrix(), "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_hermitian: tridiagonal QR did not converge within " << Eigen::SelfAdjointEigenSolver<Matrix>::m_maxIterations * h.dim()
       << " iterations for dimension " << h.dim();
    throw NumericalError(os.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

HermitianOperator hermitian_function(const SpectralDecomposition& spectrum,
                                     const std::function<double(double)>& f) {
  RealVector fv = spectrum.eigenvalues.unaryExpr(f);
  return HermitianOperator(spectrum.eigenvectors * fv.cast<Complex>().asDiagonal() *
                           spectrum.eigenvectors.adjoint());
}

HermitianOperator hermitian_function(const HermitianOperator& h, const std::function<double(double)>& f) {
  return hermitian_function(eig_hermitian(h), f);
}

HermitianOperator ScaledOperator::value() const { return std::exp(log_scale) * op; }

ScaledOperator exp_scaled(const SpectralDecomposition& spectrum, double coefficient) {
  RealVector x = coefficient * spectrum.eigenvalues;
  double shift = x.maxCoeff();
  return {hermitian_function(spectrum, [&](double e) { return std::exp(coefficient * e - shift); }), shift};
}

ScaledOperator exp_scaled(const HermitianOperator& h, double coefficient) {
  return exp_scaled(eig_hermitian(h), coefficient);
}

HermitianOperator log_positive(const SpectralDecomposition& spectrum) {
  double lo = spectrum.eigenvalues.minCoeff();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "log_positive: operator is not positive definite (minimum eigenvalue " << lo << ")";
    throw NumericalError(os.str());
  }
  return hermitian_function(spectrum, [](double e) { return std::log(e); });
}

HermitianOperator log_positive(const HermitianOperator& h) { return log_positive(eig_hermitian(h)); }

Matrix kron(const Matrix& a, const Matrix& b) {
  if (a.rows() * b.rows() > kMaxCompositeDim || a.cols() * b.cols() > kMaxCompositeDim)
    throw DimensionError("kron: product dimension exceeds cap");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kron(a.matrix(), b.matrix()));
}

Matrix partial_trace(const Matrix& m, const SubsystemSplit& split, std::span<const int> keep) {
  require_square(m, "partial_trace");
  split.require_dim(m.rows());
  const std::size_t nf = split.factors();
  std::vector<bool> kept(nf, false);
  for (int f : keep) {
    if (f < 0 || std::size_t(f) >= nf)
      throw DimensionError("partial_trace: factor index " + std::to_string(f) + " out of range");
    if (kept[std::size_t(f)]) throw DimensionError("partial_trace: factor index repeated");
    kept[std::size_t(f)] = true;
  }

  // Split every composite index into (kept multi-index, traced multi-index).
  const Index n = m.rows();
  std::vector<Index> kept_idx(static_cast<std::size_t>(n)), traced_idx(static_cast<std::size_t>(n));
  Index dk = 1;
  for (std::size_t f = 0; f < nf; ++f)
    if (kept[f]) dk *= split.dim(f);
  for (Index i = 0; i < n; ++i) {
    Index rem = i, kstride = 1, tstride = 1, ki = 0, ti = 0;
    for (std::size_t f = nf; f-- > 0;) {
      Index d = split.dim(f);
      Index digit = rem % d;
      rem /= d;
      if (kept[f]) {
        ki += digit * kstride;
        kstride *= d;
      } else {
        ti += digit * tstride;
        tstride *= d;
      }
    }
    kept_idx[std::size_t(i)] = ki;
    traced_idx[std::size_t(i)] = ti;
  }

  Matrix out = Matrix::Zero(dk, dk);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (traced_idx[std::size_t(i)] == traced_idx[std::size_t(j)])
        out(kept_idx[std::size_t(i)], kept_idx[std::size_t(j)]) += m(i, j);
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& m, const SubsystemSplit& split,
                                std::span<const int> keep) {
  return HermitianOperator(partial_trace(m.matrix(), split, keep));
}

HermitianOperator embed(const HermitianOperator& op, std::size_t slot, const SubsystemSplit& split) {
  if (slot >= split.factors())
    throw DimensionError("embed: slot " + std::to_string(slot) + " out of range for " +
                         std::to_string(split.factors()) + " factors");
  if (op.dim() != split.dim(slot))
    throw DimensionError("embed: operator dimension does not match factor " + std::to_string(slot));
  Index before = 1, after = 1;
  for (std::size_t f = 0; f < slot; ++f) before *= split.dim(f);
  for (std::size_t f = slot + 1; f < split.factors(); ++f) after *= split.dim(f);
  Matrix m = op.matrix();
  if (before > 1) m = kron(Matrix::Identity(before, before), m);
  if (after > 1) m = kron(m, Matrix::Identity(after, after));
  return HermitianOperator(m);
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Complex trace_product(const Matrix& rho, const Matrix& x) {
  if (rho.rows() != x.cols() || rho.cols() != x.rows()) throw DimensionError("trace_product: dimension mismatch");
  // Tr(AB) = sum_ij A_ij B_ji
  return (rho.transpose().array() * x.array()).sum();
}

DensityOperator::DensityOperator(HermitianOperator rho, std::optional<SubsystemSplit> split)
    : rho_(std::move(rho)), split_(std::move(split)) {
  if (split_) split_->require_dim(rho_.dim());
  double tr = rho_.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "DensityOperator: trace " << tr << " differs from 1";
    throw NumericalError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_.matrix(), Eigen::EigenvaluesOnly);
  min_eigenvalue_ = solver.eigenvalues().minCoeff();
  if (min_eigenvalue_ < -kPositivityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "DensityOperator: minimum eigenvalue " << min_eigenvalue_ << " is negative";
    throw NumericalError(os.str());
  }
}

DensityOperator DensityOperator::normalized(const HermitianOperator& unnormalized,
                                            std::optional<SubsystemSplit> split) {
  double tr = unnormalized.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw NumericalError("DensityOperator::normalized: trace not positive");
  return DensityOperator((1.0 / tr) * unnormalized, std::move(split));
}

double DensityOperator::expect(const HermitianOperator& x) const { return expect(x.matrix()); }

double DensityOperator::expect(const Matrix& x) const { return trace_product(rho_.matrix(), x).real(); }

double DensityOperator::purity() const { return trace_product(rho_.matrix(), rho_.matrix()).real(); }

Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

Matrix pauli_y() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = Complex(0.0, -1.0);
  m(1, 0) = Complex(0.0, 1.0);
  return m;
}

Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

Matrix annihilation(Index d) {
  if (d < 2) throw DimensionError("annihilation: Fock truncation must be >= 2");
  Matrix a = Matrix::Zero(d, d);
  for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Matrix position(Index d) {
  Matrix a = annihilation(d);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

Matrix number(Index d) {
  Matrix m = Matrix::Zero(d, d);
  for (Index n = 0; n < d; ++n) m(n, n) = double(n);
  return m;
}

}  // namespace qthermo

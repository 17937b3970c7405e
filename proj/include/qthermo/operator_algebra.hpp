#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qthermo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest composite Hilbert-space dimension any routine will accept.
inline constexpr Index kMaxCompositeDim = 4096;

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense Hermitian matrix. The input is symmetrized as (M + M^dagger)/2 on
/// construction; the Frobenius norm of the removed anti-Hermitian part is kept
/// as a diagnostic.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const Matrix& m);

  static HermitianOperator identity(Index n);
  static HermitianOperator zero(Index n);
  static HermitianOperator diagonal(std::span<const double> entries);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double asymmetry() const { return asymmetry_; }
  double trace() const { return m_.trace().real(); }

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

 private:
  Matrix m_;
  double asymmetry_ = 0.0;
};

/// Ordered tensor-factor dimensions of a composite space.
class SubsystemSplit {
 public:
  SubsystemSplit() = default;
  explicit SubsystemSplit(std::vector<Index> dims);

  const std::vector<Index>& dims() const { return dims_; }
  std::size_t factors() const { return dims_.size(); }
  Index total() const { return total_; }
  Index dim(std::size_t factor) const { return dims_.at(factor); }
  /// Product of the dimensions of the listed factors.
  Index dim_of(std::span<const int> factors) const;
  /// Checks that the split matches an operator of dimension n.
  void require_dim(Index n) const;

 private:
  std::vector<Index> dims_;
  Index total_ = 0;
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns

  Index dim() const { return eigenvalues.size(); }
  Matrix reconstruct() const;
};

SpectralDecomposition eig_hermitian(const HermitianOperator& h);

/// f applied to the spectrum of h.
HermitianOperator hermitian_function(const SpectralDecomposition& spectrum,
                                     const std::function<double(double)>& f);
HermitianOperator hermitian_function(const HermitianOperator& h,
                                     const std::function<double(double)>& f);

/// exp(coefficient * H) = op * exp(log_scale). The exponent is shifted by its
/// largest value so op has spectral radius exactly 1.
struct ScaledOperator {
  HermitianOperator op;
  double log_scale = 0.0;

  HermitianOperator value() const;
};

ScaledOperator exp_scaled(const SpectralDecomposition& spectrum, double coefficient);
ScaledOperator exp_scaled(const HermitianOperator& h, double coefficient);

/// Matrix logarithm of a positive-definite operator.
HermitianOperator log_positive(const HermitianOperator& h);
HermitianOperator log_positive(const SpectralDecomposition& spectrum);

Matrix kron(const Matrix& a, const Matrix& b);
HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);

/// Traces out every factor not listed in `keep` (listed in ascending order of
/// factor index in the result). An empty keep-set yields the 1x1 full trace.
Matrix partial_trace(const Matrix& m, const SubsystemSplit& split, std::span<const int> keep);
HermitianOperator partial_trace(const HermitianOperator& m, const SubsystemSplit& split,
                                std::span<const int> keep);

/// Lifts an operator on one factor to the composite space (identity elsewhere).
HermitianOperator embed(const HermitianOperator& op, std::size_t slot, const SubsystemSplit& split);

Matrix commutator(const Matrix& a, const Matrix& b);

/// Tr(rho X), complex in general.
Complex trace_product(const Matrix& rho, const Matrix& x);

/// Unit-trace positive semidefinite operator, optionally tagged with its factor split.
class DensityOperator {
 public:
  DensityOperator() = default;
  explicit DensityOperator(HermitianOperator rho, std::optional<SubsystemSplit> split = std::nullopt);

  /// Divides by the trace before validating.
  static DensityOperator normalized(const HermitianOperator& unnormalized,
                                    std::optional<SubsystemSplit> split = std::nullopt);

  const HermitianOperator& op() const { return rho_; }
  const Matrix& matrix() const { return rho_.matrix(); }
  Index dim() const { return rho_.dim(); }
  const std::optional<SubsystemSplit>& split() const { return split_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// Re Tr(rho X).
  double expect(const HermitianOperator& x) const;
  double expect(const Matrix& x) const;
  double purity() const;

 private:
  HermitianOperator rho_;
  std::optional<SubsystemSplit> split_;
  double min_eigenvalue_ = 0.0;
};

inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-12;

// Elementary operators in the conventions used by the models.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
/// Truncated Fock-space annihilation operator a with a|n> = sqrt(n)|n-1>.
Matrix annihilation(Index d);
/// Dimensionless quadrature (a + a^dagger)/sqrt(2).
Matrix position(Index d);
Matrix number(Index d);

}  // namespace qthermo

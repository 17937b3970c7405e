#include "qthermo/calculus.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qthermo {

std::string to_string(Parameter p) {
  switch (p) {
    case Parameter::Beta: return "beta";
    case Parameter::J: return "J";
    case Parameter::P: return "P";
    case Parameter::G: return "g";
    case Parameter::Chi: return "chi";
  }
  return "?";
}

void DerivativeConfig::validate() const {
  if (!(h_rel >= 1e-8 && h_rel <= 1e-2))
    throw std::invalid_argument("derivative: h_rel " + std::to_string(h_rel) + " outside [1e-8, 1e-2]");
  if (levels < 1 || levels > 5)
    throw std::invalid_argument("derivative: Richardson levels " + std::to_string(levels) + " outside [1, 5]");
}

double DerivativeConfig::step(double x0) const {
  double h = std::max(h_rel * std::abs(x0), 1e-6);
  if (avoid_zero_crossing && x0 != 0.0 && h >= std::abs(x0)) h = 0.5 * std::abs(x0);
  return h;
}

namespace detail {

void throw_non_finite(Parameter p, double x) {
  std::ostringstream os;
  os.precision(17);
  os << "derivative: non-finite value at stencil point " << to_string(p) << " = " << x;
  throw NumericalError(os.str());
}

}  // namespace detail

Matrix symmetrized_product(const std::vector<Matrix>& ops) {
  if (ops.empty()) throw std::invalid_argument("symmetrized_product: no operators");
  if (ops.size() > 8)
    throw std::invalid_argument("symmetrized_product: " + std::to_string(ops.size()) +
                                " operators would need more than 8! = 40320 orderings");
  const Index n = ops[0].rows();
  for (const Matrix& m : ops)
    if (m.rows() != n || m.cols() != n) throw DimensionError("symmetrized_product: operators differ in dimension");
  std::vector<std::size_t> perm(ops.size());
  std::iota(perm.begin(), perm.end(), 0);
  Matrix sum = Matrix::Zero(n, n);
  long count = 0;
  do {
    Matrix prod = ops[perm[0]];
    for (std::size_t j = 1; j < perm.size(); ++j) prod = prod * ops[perm[j]];
    sum += prod;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum / double(count);
}

Matrix symmetrized_power(const Matrix& o, const Matrix& d_o, int k) {
  if (k < 1) throw std::invalid_argument("symmetrized_power: k must be >= 1");
  // S_1 = dO; S_{j+1} = O S_j + dO O^j accumulates every placement of dO.
  Matrix s = d_o;
  Matrix power = Matrix::Identity(o.rows(), o.cols());
  for (int j = 1; j < k; ++j) {
    power = power * o;
    s = o * s + d_o * power;
  }
  return s / double(k);
}

DexpResult dexp_series(const Matrix& o, const Matrix& d_o, int K, double tol) {
  if (K < 1 || K > 20) throw std::invalid_argument("dexp_series: K must lie in [1, 20]");
  DexpResult r;
  r.value = Matrix::Zero(o.rows(), o.cols());
  Matrix s = d_o;
  Matrix power = Matrix::Identity(o.rows(), o.cols());
  double factorial = 1.0;  // (k-1)!
  for (int k = 1; k <= K; ++k) {
    if (k > 1) {
      power = power * o;
      s = o * s + d_o * power;  // k * [dO O^(k-1)]_sym
      factorial *= double(k - 1);
    }
    double sign = (k % 2 == 1) ? 1.0 : -1.0;
    Matrix term = -(sign / factorial) * (s / double(k));
    r.value += term;
    r.term_norms.push_back(term.norm());
  }
  r.tail_norm = r.term_norms.back();
  r.converged = r.tail_norm <= tol * std::max(r.value.norm(), 1.0);
  return r;
}

DexpResult dexp_series(const std::function<Matrix(double)>& o, double chi0, int K, const DerivativeConfig& cfg) {
  Matrix d_o = param_derivative(o, chi0, cfg).value;
  return dexp_series(o(chi0), d_o, K);
}

Matrix exp_neg_hermitian(const Matrix& o) {
  return hermitian_function(HermitianOperator(o), [](double x) { return std::exp(-x); }).matrix();
}

Matrix expm(const Matrix& m) { return m.exp(); }

TraceDerivativeCheck trace_derivative_check(const std::function<Matrix(double)>& o, double chi0,
                                            const DerivativeConfig& cfg) {
  TraceDerivativeCheck c;
  auto tr = [&](double chi) { return exp_neg_hermitian(o(chi)).trace().real(); };
  Derivative<double> lhs = param_derivative(tr, chi0, cfg);
  Matrix d_o = param_derivative(o, chi0, cfg).value;
  c.fd = lhs.value;
  c.fd_error = lhs.error;
  c.formula = -trace_product(d_o, exp_neg_hermitian(o(chi0))).real();
  c.residual = std::abs(c.fd - c.formula);
  return c;
}

double partial_trace_derivative_residual(const std::function<Matrix(double)>& o, double chi0,
                                         const SubsystemSplit& split, std::span<const int> keep,
                                         const DerivativeConfig& cfg) {
  auto reduced = [&](double chi) { return partial_trace(exp_neg_hermitian(o(chi)), split, keep); };
  Matrix lhs = param_derivative(reduced, chi0, cfg).value;
  Matrix d_o = param_derivative(o, chi0, cfg).value;
  Matrix rhs = -partial_trace(Matrix(d_o * exp_neg_hermitian(o(chi0))), split, keep);
  return (lhs - rhs).norm();
}

Matrix bch_truncated(const Matrix& a, const Matrix& b, int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("bch_truncated: order must be 1, 2 or 3");
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("bch_truncated: dimension mismatch");
  Matrix z = a + b;
  if (order == 1) return z;
  Matrix ab = commutator(a, b);
  z += 0.5 * ab;
  if (order == 2) return z;
  z += (commutator(a, ab) + commutator(b, Matrix(-ab))) / 12.0;
  return z;
}

Matrix adjoint_expansion(const Matrix& lambda, const Matrix& mu, int order) {
  if (order < 0) throw std::invalid_argument("adjoint_expansion: order must be >= 0");
  Matrix term = mu;
  Matrix sum = mu;
  for (int n = 1; n <= order; ++n) {
    term = commutator(lambda, term) / double(n);
    sum += term;
  }
  return sum;
}

Matrix conjugate_exact(const Matrix& lambda, const Matrix& mu) {
  return expm(lambda) * mu * expm(Matrix(-lambda));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 paired points");
  double mx = 0, my = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
  return out;
}

}  // namespace qthermo

#pragma once

#include "qthermo/operator_algebra.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace qthermo {

enum class Parameter { Beta, J, P, G, Chi };

std::string to_string(Parameter p);

struct DerivativeConfig {
  double h_rel = 1e-4;
  int levels = 3;
  Parameter parameter = Parameter::Beta;
  /// Shrink the step so the stencil never reaches zero from a nonzero x0.
  bool avoid_zero_crossing = false;

  void validate() const;
  double step(double x0) const;
};

template <class T>
struct Derivative {
  T value;
  double error = 0.0;  // |top Richardson level - previous level|
  double step = 0.0;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Matrix& m) { return m.norm(); }
inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(const Matrix& m) { return m.allFinite(); }

[[noreturn]] void throw_non_finite(Parameter p, double x);

}  // namespace detail

/// Central differences at steps h, h/2, ..., h/2^(levels-1) combined by
/// Richardson extrapolation on the h^2 error series.
template <class F>
auto param_derivative(F&& f, double x0, const DerivativeConfig& cfg = {})
    -> Derivative<std::decay_t<decltype(f(x0))>> {
  using T = std::decay_t<decltype(f(x0))>;
  cfg.validate();
  const double h0 = cfg.step(x0);
  auto eval = [&](double x) {
    T v = f(x);
    if (!detail::finite(v)) detail::throw_non_finite(cfg.parameter, x);
    return v;
  };
  const int rows = std::max(cfg.levels, 2);
  std::vector<std::vector<T>> table(static_cast<std::size_t>(rows));
  double h = h0;
  for (int i = 0; i < rows; ++i, h *= 0.5) {
    T d = (eval(x0 + h) - eval(x0 - h)) / (2.0 * h);
    table[std::size_t(i)].push_back(d);
    if (i >= cfg.levels) continue;
    double factor = 4.0;
    for (int k = 1; k <= i; ++k, factor *= 4.0) {
      const T& a = table[std::size_t(i)][std::size_t(k - 1)];
      const T& b = table[std::size_t(i - 1)][std::size_t(k - 1)];
      table[std::size_t(i)].push_back(a + (a - b) / (factor - 1.0));
    }
  }
  if (cfg.levels == 1) {
    const T& coarse = table[0][0];
    return {coarse, detail::magnitude(T(coarse - table[1][0])), h0};
  }
  const auto& last = table[std::size_t(cfg.levels - 1)];
  T best = last.back();
  return {best, detail::magnitude(T(best - last[last.size() - 2])), h0};
}

/// Average over all k! orderings of the operator product.
Matrix symmetrized_product(const std::vector<Matrix>& ops);

/// [dO O^(k-1)]_sym, the average over the k positions of dO among k-1 copies of O.
Matrix symmetrized_power(const Matrix& o, const Matrix& d_o, int k);

struct DexpResult {
  Matrix value;
  double tail_norm = 0.0;
  bool converged = false;
  std::vector<double> term_norms;
};

/// Partial sum of the derivative series of exp(-O(chi)) up to K terms.
DexpResult dexp_series(const Matrix& o, const Matrix& d_o, int K, double tol = 1e-14);
DexpResult dexp_series(const std::function<Matrix(double)>& o, double chi0, int K,
                       const DerivativeConfig& cfg = {1e-4, 3, Parameter::Chi, false});

/// exp(-O) of a Hermitian O computed spectrally.
Matrix exp_neg_hermitian(const Matrix& o);
/// exp of a general square matrix.
Matrix expm(const Matrix& m);

struct TraceDerivativeCheck {
  double fd = 0.0;        // d/dchi Tr exp(-O)
  double formula = 0.0;   // -Tr(dO exp(-O))
  double residual = 0.0;
  double fd_error = 0.0;
};

TraceDerivativeCheck trace_derivative_check(const std::function<Matrix(double)>& o, double chi0,
                                            const DerivativeConfig& cfg = {1e-4, 3, Parameter::Chi, false});

/// Same comparison after a partial trace instead of the full trace; the
/// cyclic argument does not apply and the residual is generically nonzero.
double partial_trace_derivative_residual(const std::function<Matrix(double)>& o, double chi0,
                                         const SubsystemSplit& split, std::span<const int> keep,
                                         const DerivativeConfig& cfg = {1e-4, 3, Parameter::Chi, false});

/// Exponent of exp(A) exp(B) truncated at order 1, 2 or 3 in (A, B).
Matrix bch_truncated(const Matrix& a, const Matrix& b, int order);

/// Sum of ad_lambda^n(mu)/n! for n = 0..order.
Matrix adjoint_expansion(const Matrix& lambda, const Matrix& mu, int order);
/// exp(lambda) mu exp(-lambda).
Matrix conjugate_exact(const Matrix& lambda, const Matrix& mu);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
std::vector<double> logspace(double lo, double hi, int n);

}  // namespace qthermo

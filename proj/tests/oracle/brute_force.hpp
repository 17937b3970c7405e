#pragma once

// Test-only reference routines. Deliberately naive: no eigensolvers, no
// shared code with the library beyond the Eigen matrix type.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

namespace oracle {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// exp(m) by scaling and squaring of a 30-term Taylor series.
inline Matrix expm_taylor(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const Matrix a = m * scale;
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * a / double(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Tr over the second factor of a (ds*db) x (ds*db) matrix, by explicit loops.
inline Matrix trace_second(const Matrix& m, int ds, int db) {
  Matrix out = Matrix::Zero(ds, ds);
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j)
      for (int b = 0; b < db; ++b) out(i, j) += m(i * db + b, j * db + b);
  return out;
}

inline Matrix trace_first(const Matrix& m, int ds, int db) {
  Matrix out = Matrix::Zero(db, db);
  for (int a = 0; a < db; ++a)
    for (int b = 0; b < db; ++b)
      for (int s = 0; s < ds; ++s) out(a, b) += m(s * db + a, s * db + b);
  return out;
}

/// Eigenvalues of a 2x2 Hermitian matrix, ascending.
inline std::pair<double, double> eig2(const Matrix& m) {
  const double a = m(0, 0).real(), d = m(1, 1).real();
  const double r = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
  return {0.5 * (a + d) - r, 0.5 * (a + d) + r};
}

/// Logarithm of a 2x2 positive-definite Hermitian matrix in closed form:
/// log M = c0 I + c1 M with c0, c1 fixed by the two eigenvalues.
inline Matrix log2x2(const Matrix& m) {
  auto [l1, l2] = eig2(m);
  Matrix id = Matrix::Identity(2, 2);
  if (std::abs(l2 - l1) < 1e-14 * std::abs(l2)) return std::log(l1) * id;
  const double c1 = (std::log(l2) - std::log(l1)) / (l2 - l1);
  const double c0 = std::log(l1) - c1 * l1;
  return c0 * id + c1 * m;
}

inline double entropy2x2(const Matrix& rho) {
  auto [p1, p2] = eig2(rho);
  double s = 0.0;
  for (double p : {p1, p2})
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

/// Plain central difference, no extrapolation.
inline double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline nlohmann::json golden(const std::string& name) {
  std::ifstream in(std::string(QTHERMO_GOLDEN_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing golden file " + name);
  return nlohmann::json::parse(in);
}

}  // namespace oracle

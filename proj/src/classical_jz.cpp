#include "qthermo/classical_jz.hpp"
#include "qthermo/gibbs.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <limits>
#include <stdexcept>

namespace qthermo {

const GaussHermiteRule& gauss_hermite(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  if (n < 2 || n > 512) throw std::invalid_argument("gauss_hermite: order must lie in [2, 512]");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (slot) return *slot;

  // Newton iteration on orthonormal Hermite functions (stable recurrence).
  auto rule = std::make_unique<GaussHermiteRule>();
  rule->x.assign(std::size_t(n), 0.0);
  rule->w.assign(std::size_t(n), 0.0);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(double(2 * n + 1)) - 1.85575 * std::pow(double(2 * n + 1), -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule->x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule->x[1];
    else
      z = 2.0 * z - rule->x[std::size_t(i - 2)];
    double pp = 0.0;
    int it = 0;
    for (; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (it == 100) throw NumericalError("gauss_hermite: Newton iteration did not converge");
    rule->x[std::size_t(i)] = z;
    rule->x[std::size_t(n - 1 - i)] = -z;
    rule->w[std::size_t(i)] = rule->w[std::size_t(n - 1 - i)] = 2.0 / (pp * pp);
  }
  slot = std::move(rule);
  return *slot;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Boltzmann weight exp(-beta U) of a one-dimensional potential, sampled on a
/// Gauss-Hermite rule centred at the minimum and scaled by the curvature.
struct Rule {
  std::vector<double> x, weight;  // weights normalized to 1
  double log_integral = 0.0;
};

template <class U>
Rule boltzmann_rule(const U& potential, double beta, double center, double curvature, int order) {
  if (!(curvature > 0.0)) throw NumericalError("classical quadrature: non-positive curvature at the centre");
  const GaussHermiteRule& gh = gauss_hermite(order);
  const double s = std::sqrt(2.0 / (beta * curvature));
  const double u0 = potential(center);
  Rule r;
  r.x.resize(gh.x.size());
  r.weight.resize(gh.x.size());
  std::vector<double> logw(gh.x.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gh.x.size(); ++i) {
    double t = gh.x[i];
    r.x[i] = center + s * t;
    logw[i] = std::log(gh.w[i]) + t * t - beta * (potential(r.x[i]) - u0);
    top = std::max(top, logw[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < gh.x.size(); ++i) sum += (r.weight[i] = std::exp(logw[i] - top));
  for (double& w : r.weight) w /= sum;
  r.log_integral = std::log(s) - beta * u0 + top + std::log(sum);
  return r;
}

/// Polynomial potential k x^2/2 + e x^4/4 + l x with k > 0, e >= 0.
struct Poly {
  double k = 0.0, e = 0.0, l = 0.0;
  double operator()(double x) const { return 0.5 * k * x * x + 0.25 * e * x * x * x * x + l * x; }
  double minimum() const {
    double x = -l / k;
    if (e == 0.0) return x;
    for (int it = 0; it < 200; ++it) {
      double f = k * x + e * x * x * x + l;
      double df = k + 3.0 * e * x * x;
      double dx = f / df;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
  }
  double curvature(double x) const { return k + 3.0 * e * x * x; }
};

struct BathConditional {
  double log_I = 0.0;   // sum of log integrals over bath coordinates
  double energy = 0.0;  // <H_b + H_i> potential part given q
  double mean_v = 0.0;
};

struct Evaluator {
  const ClassicalParams& p;
  double P, beta;
  int order;

  BathConditional bath(double q, bool coupled) const {
    BathConditional c;
    for (std::size_t k = 0; k < p.omega_b.size(); ++k) {
      double w2 = p.omega_b[k] * p.omega_b[k];
      double gq = coupled ? p.g[k] * q : 0.0;
      Poly u{w2, 0.0, gq};
      double x0 = u.minimum();
      Rule r = boltzmann_rule(u, beta, x0, u.curvature(x0), order);
      c.log_I += r.log_integral;
      for (std::size_t i = 0; i < r.x.size(); ++i) c.energy += r.weight[i] * u(r.x[i]);
    }
    double lq = coupled ? p.lambda * q : 0.0;
    Poly u{p.kappa, p.eta, P * p.a + lq};
    double v0 = u.minimum();
    Rule r = boltzmann_rule(u, beta, v0, u.curvature(v0), order);
    c.log_I += r.log_integral;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      double v = r.x[i];
      c.energy += r.weight[i] * (0.5 * p.kappa * v * v + 0.25 * p.eta * v * v * v * v + lq * v);
      c.mean_v += r.weight[i] * v;
    }
    return c;
  }

  double phi(double q, const BathConditional& free) const {
    return -(bath(q, true).log_I - free.log_I) / beta;
  }

  ClassicalThermo run() const {
    const std::size_t n = p.omega_b.size();
    const double mom = 0.5 * std::log(kTwoPi / beta);  // per momentum
    ClassicalThermo t;
    t.P = P;
    t.beta = beta;

    BathConditional free = bath(0.0, false);
    t.log_Z_b = double(n + 1) * mom + free.log_I - beta * P * p.v0;
    t.U_b = double(n + 1) / (2.0 * beta) + free.energy;
    t.V_b = p.v0 + p.a * free.mean_v;
    t.H_b = t.U_b + P * t.V_b;
    t.G_b = -t.log_Z_b / beta;
    t.S_b = beta * (t.H_b - t.G_b);

    // System coordinate: centre and width from the Gaussian part of H_s + phi.
    double soft = 0.0;
    for (std::size_t k = 0; k < n; ++k) soft += p.g[k] * p.g[k] / (p.omega_b[k] * p.omega_b[k]);
    soft += p.lambda * p.lambda / p.kappa;
    const double omega2 = p.omega_s * p.omega_s - soft;
    const double center = p.lambda * P * p.a / p.kappa / omega2;
    const double ws2 = p.omega_s * p.omega_s;
    auto u_sys = [&](double q) { return 0.5 * ws2 * q * q + phi(q, free); };
    Rule r = boltzmann_rule(u_sys, beta, center, omega2, order);

    double cond_energy = 0.0, cond_v = 0.0, mean_q2 = 0.0, mean_phi = 0.0, mean_u = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      double q = r.x[i], w = r.weight[i];
      BathConditional c = bath(q, true);
      double ph = -(c.log_I - free.log_I) / beta;
      cond_energy += w * c.energy;
      cond_v += w * c.mean_v;
      mean_q2 += w * q * q;
      mean_phi += w * ph;
      mean_u += w * (0.5 * ws2 * q * q + ph);
    }
    t.log_Z_s = mom + r.log_integral;
    t.G_s = -t.log_Z_s / beta;
    t.log_Z_c = t.log_Z_s + t.log_Z_b;
    t.G_c = -t.log_Z_c / beta;
    t.mean_H_s = 0.5 / beta + 0.5 * ws2 * mean_q2;
    t.mean_phi = mean_phi;
    t.mean_dphi_dP = p.a * (cond_v - free.mean_v);
    t.U_c = double(n + 2) / (2.0 * beta) + 0.5 * ws2 * mean_q2 + cond_energy;
    t.V_c = p.v0 + p.a * cond_v;
    t.H_c = t.U_c + P * t.V_c;
    t.S_c = beta * (t.H_c - t.G_c);
    // -int rho_s ln rho_s with ln rho_s = -beta (H_s + phi) - ln Z_s.
    t.S_gibbs = beta * (0.5 / beta + mean_u) + t.log_Z_s;
    return t;
  }
};

}  // namespace

ClassicalModel::ClassicalModel(ClassicalParams params) : p_(std::move(params)) {
  const std::size_t n = p_.omega_b.size();
  if (n == 0 || n > 3) throw ConfigError("classical: bath must have 1 to 3 oscillators");
  if (p_.g.size() != n) throw ConfigError("classical: couplings and bath frequencies differ in length");
  if (!(p_.omega_s > 0.0) || !(p_.kappa > 0.0) || !(p_.a > 0.0))
    throw ConfigError("classical: omega_s, kappa and a must be > 0");
  for (double w : p_.omega_b)
    if (!(w > 0.0)) throw ConfigError("classical: bath frequencies must be > 0");
  if (p_.eta < 0.0) throw ConfigError("classical: quartic coefficient must be >= 0");
  if (p_.order < 8 || p_.order > 256) throw ConfigError("classical: quadrature order must lie in [8, 256]");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(Index(n) + 2, Index(n) + 2);
  K(0, 0) = p_.omega_s * p_.omega_s;
  for (std::size_t k = 0; k < n; ++k) {
    K(Index(k) + 1, Index(k) + 1) = p_.omega_b[k] * p_.omega_b[k];
    K(0, Index(k) + 1) = K(Index(k) + 1, 0) = p_.g[k];
  }
  K(Index(n) + 1, Index(n) + 1) = p_.kappa;
  K(0, Index(n) + 1) = K(Index(n) + 1, 0) = p_.lambda;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    std::ostringstream os;
    os.precision(6);
    os << "classical: quadratic form is not positive definite (smallest eigenvalue " << es.eigenvalues().minCoeff()
       << "); need omega_s^2 > sum g^2/omega^2 + lambda^2/kappa";
    throw ConfigError(os.str());
  }
}

double ClassicalModel::phi(double q, double P, double beta) const {
  require_beta(beta);
  auto at = [&](int order) {
    Evaluator ev{p_, P, beta, order};
    return ev.phi(q, ev.bath(0.0, false));
  };
  double a = at(p_.order), b = at(2 * p_.order);
  if (std::abs(a - b) > kQuadratureTol * std::max(1.0, std::abs(b))) {
    std::ostringstream os;
    os.precision(3);
    os << "classical phi: quadrature did not converge (order " << p_.order << " vs " << 2 * p_.order
       << " differ by " << std::abs(a - b) << ")";
    throw NumericalError(os.str());
  }
  return b;
}

double ClassicalModel::phi_closed(double q, double P) const {
  if (!gaussian()) throw std::logic_error("classical: no closed form with a quartic piston term");
  double soft = 0.0;
  for (std::size_t k = 0; k < p_.omega_b.size(); ++k) soft += p_.g[k] * p_.g[k] / (2.0 * p_.omega_b[k] * p_.omega_b[k]);
  soft += p_.lambda * p_.lambda / (2.0 * p_.kappa);
  return -soft * q * q - p_.lambda * P * p_.a * q / p_.kappa;
}

double ClassicalModel::dphi_dP_closed(double q) const {
  if (!gaussian()) throw std::logic_error("classical: no closed form with a quartic piston term");
  return -p_.lambda * p_.a * q / p_.kappa;
}

ClassicalThermo ClassicalModel::quadrature(double P, double beta, int order) const {
  require_beta(beta);
  if (!std::isfinite(P)) throw std::invalid_argument("classical: pressure must be finite");
  return Evaluator{p_, P, beta, order}.run();
}

ClassicalThermo ClassicalModel::quadrature(double P, double beta) const {
  ClassicalThermo a = quadrature(P, beta, p_.order);
  ClassicalThermo b = quadrature(P, beta, 2 * p_.order);
  double dev = relative_deviation(a, b);
  if (dev > kQuadratureTol) {
    std::ostringstream os;
    os.precision(3);
    os << "classical quadrature: order " << p_.order << " vs " << 2 * p_.order << " differ by " << dev
       << " (relative) at P = " << P << ", beta = " << beta;
    throw NumericalError(os.str());
  }
  return b;
}

ClassicalThermo ClassicalModel::closed_form(double P, double beta) const {
  require_beta(beta);
  if (!gaussian()) throw std::logic_error("classical: no closed form with a quartic piston term");
  const Index n = Index(p_.omega_b.size());
  const double mom = 0.5 * std::log(kTwoPi / beta);

  // Quadratic form over z = (q, q_1..q_N, v) and linear term from P V_b.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 2, n + 2);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n + 2);
  K(0, 0) = p_.omega_s * p_.omega_s;
  for (Index k = 0; k < n; ++k) {
    K(k + 1, k + 1) = p_.omega_b[std::size_t(k)] * p_.omega_b[std::size_t(k)];
    K(0, k + 1) = K(k + 1, 0) = p_.g[std::size_t(k)];
  }
  K(n + 1, n + 1) = p_.kappa;
  K(0, n + 1) = K(n + 1, 0) = p_.lambda;
  l(n + 1) = P * p_.a;

  struct Gauss {
    double log_Z, energy, mean_v;
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;
  };
  auto gauss = [&](const Eigen::MatrixXd& k, const Eigen::VectorXd& lin, Index v_index) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    Eigen::VectorXd mu = -llt.solve(lin);
    Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(k.rows(), k.cols()));
    double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    const double dims = double(k.rows());
    Gauss g;
    g.log_Z = 0.5 * dims * std::log(kTwoPi / beta) - 0.5 * logdet - beta * (0.5 * lin.dot(mu));
    g.cov = kinv / beta;
    g.mu = mu;
    g.energy = 0.5 * dims / beta + 0.5 * mu.dot(k * mu);  // <z^T K z / 2>
    g.mean_v = mu(v_index);
    return g;
  };

  ClassicalThermo t;
  t.P = P;
  t.beta = beta;
  Gauss c = gauss(K, l, n + 1);
  Gauss b = gauss(K.bottomRightCorner(n + 1, n + 1), l.tail(n + 1), n);
  t.log_Z_c = double(n + 2) * mom + c.log_Z - beta * P * p_.v0;
  t.log_Z_b = double(n + 1) * mom + b.log_Z - beta * P * p_.v0;
  t.log_Z_s = t.log_Z_c - t.log_Z_b;
  t.G_c = -t.log_Z_c / beta;
  t.G_b = -t.log_Z_b / beta;
  t.G_s = -t.log_Z_s / beta;
  t.U_c = double(n + 2) / (2.0 * beta) + c.energy;
  t.U_b = double(n + 1) / (2.0 * beta) + b.energy;
  t.V_c = p_.v0 + p_.a * c.mean_v;
  t.V_b = p_.v0 + p_.a * b.mean_v;
  t.H_c = t.U_c + P * t.V_c;
  t.H_b = t.U_b + P * t.V_b;
  t.S_c = beta * (t.H_c - t.G_c);
  t.S_b = beta * (t.H_b - t.G_b);

  // Reduced system state: Gaussian marginal of q.
  const double mq = c.mu(0), vq = c.cov(0, 0);
  const double q2 = vq + mq * mq;
  t.mean_H_s = 0.5 / beta + 0.5 * p_.omega_s * p_.omega_s * q2;
  double soft = 0.0;
  for (std::size_t k = 0; k < p_.omega_b.size(); ++k) soft += p_.g[k] * p_.g[k] / (2.0 * p_.omega_b[k] * p_.omega_b[k]);
  soft += p_.lambda * p_.lambda / (2.0 * p_.kappa);
  t.mean_phi = -soft * q2 - p_.lambda * P * p_.a * mq / p_.kappa;
  t.mean_dphi_dP = -p_.lambda * p_.a * mq / p_.kappa;
  t.S_gibbs = 0.5 * (1.0 + std::log(kTwoPi / beta)) + 0.5 * (1.0 + std::log(kTwoPi * vq));
  return t;
}

double relative_deviation(const ClassicalThermo& a, const ClassicalThermo& b) {
  const double fa[] = {a.log_Z_c, a.log_Z_b, a.log_Z_s, a.G_c, a.G_b, a.G_s, a.U_c, a.U_b, a.V_c, a.V_b,
                       a.H_c, a.H_b, a.S_c, a.S_b, a.mean_H_s, a.mean_phi, a.mean_dphi_dP, a.S_gibbs};
  const double fb[] = {b.log_Z_c, b.log_Z_b, b.log_Z_s, b.G_c, b.G_b, b.G_s, b.U_c, b.U_b, b.V_c, b.V_b,
                       b.H_c, b.H_b, b.S_c, b.S_b, b.mean_H_s, b.mean_phi, b.mean_dphi_dP, b.S_gibbs};
  double worst = 0.0;
  for (std::size_t i = 0; i < std::size(fa); ++i)
    worst = std::max(worst, std::abs(fa[i] - fb[i]) / std::max({std::abs(fa[i]), std::abs(fb[i]), 1.0}));
  return worst;
}

BareBlock bare_report(const ClassicalModel& model, double P, double beta, const DerivativeConfig& cfg_in) {
  if (!(P > 0.0)) throw std::invalid_argument("bare volume phi/P undefined at P = 0");
  ClassicalThermo t = model.quadrature(P, beta);
  BareBlock b;
  b.V = t.mean_phi / P;
  b.U = t.mean_H_s;
  b.H = t.mean_H_s + t.mean_phi;
  b.S = t.S_gibbs;
  b.residual_enthalpy = std::abs(b.H - (b.U + P * b.V));
  b.residual_gibbs = std::abs(t.G_s - (b.H - b.S / beta));
  DerivativeConfig cfg = cfg_in;
  cfg.parameter = Parameter::Beta;
  auto g_s = [&](double bb) { return model.quadrature(P, bb, model.params().order).G_s; };
  auto beta_g_s = [&](double bb) { return bb * model.quadrature(P, bb, model.params().order).G_s; };
  b.entropy_gap = std::abs(b.S - beta * beta * param_derivative(g_s, beta, cfg).value);
  b.energy_gap = std::abs(b.U - param_derivative(beta_g_s, beta, cfg).value);
  return b;
}

PartialMolarBlock pm_report(const ClassicalModel& model, double P, double beta, const DerivativeConfig& cfg_in) {
  ClassicalThermo t = model.quadrature(P, beta);
  const int order = model.params().order;
  PartialMolarBlock m;
  m.V = t.mean_dphi_dP;
  m.U = t.U_c - t.U_b;
  m.H = t.H_c - t.H_b;
  m.S_c = t.S_c;
  m.S_b = t.S_b;
  m.S = t.S_c - t.S_b;

  DerivativeConfig pcfg = cfg_in;
  pcfg.parameter = Parameter::P;
  auto g_of_p = [&](double pp) { return model.quadrature(pp, beta, order).G_s; };
  Derivative<double> dP = param_derivative(g_of_p, P, pcfg);
  m.V_fd = dP.value;

  DerivativeConfig bcfg = cfg_in;
  bcfg.parameter = Parameter::Beta;
  auto g_of_beta = [&](double b) { return model.quadrature(P, b, order).G_s; };
  auto log_z_of_beta = [&](double b) { return model.quadrature(P, b, order).log_Z_s; };
  Derivative<double> dG = param_derivative(g_of_beta, beta, bcfg);
  Derivative<double> dZ = param_derivative(log_z_of_beta, beta, bcfg);
  m.S_fd = beta * beta * dG.value;
  m.H_fd = -dZ.value;
  m.fd_error = std::max({dP.error, beta * beta * dG.error, dZ.error});

  m.residual_volume_fd = std::abs(m.V - m.V_fd);
  m.residual_volume_split = std::abs(m.V - (t.V_c - t.V_b));
  m.residual_enthalpy = std::abs(m.H - (m.U + P * m.V));
  m.residual_enthalpy_fd = std::abs(m.H - m.H_fd);
  m.residual_entropy_fd = std::abs(m.S - m.S_fd);
  m.residual_entropy_relation = std::abs(m.S - beta * (m.H - t.G_s));
  m.residual_additivity = std::abs(m.S + t.S_b - t.S_c);
  return m;
}

ClassicalReport classical_report(const ClassicalModel& model, double P, double beta, const DerivativeConfig& cfg) {
  ClassicalReport r;
  r.P = P;
  r.beta = beta;
  ClassicalThermo t = model.quadrature(P, beta);
  r.G_s = t.G_s;
  r.G_c = t.G_c;
  r.G_b = t.G_b;
  r.pm = pm_report(model, P, beta, cfg);
  if (P > 0.0) {
    r.bare = bare_report(model, P, beta, cfg);
    r.gap_V = std::abs(r.bare->V - r.pm.V);
    r.gap_U = std::abs(r.bare->U - r.pm.U);
    r.gap_H = std::abs(r.bare->H - r.pm.H);
    r.gap_S = std::abs(r.bare->S - r.pm.S);
  }
  if (model.gaussian()) r.closed_form_deviation = relative_deviation(t, model.closed_form(P, beta));
  return r;
}

}  // namespace qthermo

#pragma once

#include "qthermo/models.hpp"

namespace testing_support {

inline qthermo::ModelSpec two_qubit(double g, double J = 0.0) {
  qthermo::ModelSpec s;
  s.kind = qthermo::ModelKind::TwoQubit;
  s.couplings = {g};
  if (J != 0.0) s = s.with_J(J);
  return s;
}

inline qthermo::ModelSpec oscillators(double g, double J = 0.0, qthermo::Index d = 12) {
  qthermo::ModelSpec s;
  s.kind = qthermo::ModelKind::CoupledOscillators;
  s.omega_b = {2.0};
  s.couplings = {g};
  s.fock_dim = d;
  if (J != 0.0) s = s.with_J(J);
  return s;
}

inline qthermo::ModelSpec spin_boson(double g, qthermo::Index d = 12) {
  qthermo::ModelSpec s;
  s.kind = qthermo::ModelKind::SpinBoson;
  s.couplings = {g};
  s.fock_dim = d;
  return s;
}

}  // namespace testing_support

#pragma once

#include "qthermo/operator_algebra.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qthermo {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { TwoQubit, CoupledOscillators, SpinBoson };
enum class DriveOperator { SumOfPositions, SumOfNumbers };

std::string to_string(ModelKind kind);
std::string to_string(DriveOperator op);
ModelKind parse_model_kind(const std::string& text);
DriveOperator parse_drive_operator(const std::string& text);

struct Drive {
  double J = 0.0;
  DriveOperator op = DriveOperator::SumOfPositions;
};

struct ModelSpec {
  ModelKind kind = ModelKind::TwoQubit;
  double omega_s = 1.0;
  std::vector<double> omega_b{1.0};
  std::vector<double> couplings{0.0};
  Index fock_dim = 12;
  std::optional<Drive> drive;

  /// Throws ConfigError when the model description is inconsistent.
  void validate() const;
  std::size_t bath_modes() const { return omega_b.size(); }
  /// Local dimension of the system factor and of each bath factor.
  std::vector<Index> factor_dims() const;
  double J() const { return drive ? drive->J : 0.0; }
  /// Same spec with every coupling multiplied by s.
  ModelSpec with_coupling_scale(double s) const;
  ModelSpec with_J(double J) const;
};

/// H_c = H_s + H_i + H_b + J A_b. Full-space blocks act on the composite,
/// local blocks on the system factor or on the whole bath.
struct CompositeHamiltonian {
  HermitianOperator h_s, h_i, h_b, a_b;
  HermitianOperator h_s_local, h_b_local, a_b_local;
  SubsystemSplit split;      // system factor first, then one factor per bath mode
  SubsystemSplit bipartite;  // {system, whole bath}
  double J = 0.0;

  Index dim() const { return split.total(); }
  Index system_dim() const { return split.dim(0); }
  Index bath_dim() const { return bipartite.dim(1); }
  HermitianOperator total() const;
  /// Bath Hamiltonian that defines the free-bath reference state, H_b + J A_b.
  HermitianOperator free_bath() const;
};

CompositeHamiltonian build(const ModelSpec& spec);

/// Smallest Fock truncation d for which doubling d changes the observable by
/// less than tol (relative).
struct TruncationResult {
  Index dim = 0;
  std::vector<std::pair<Index, double>> trace;  // (d, relative change d -> 2d)
};

TruncationResult truncation_check(const ModelSpec& spec, const std::function<double(const ModelSpec&)>& observable,
                                  double tol);

}  // namespace qthermo

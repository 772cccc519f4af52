#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "envnet/errors.hpp"

namespace envnet {

/// Tolerances used by validation and the environment solver.
inline constexpr double kGeneratorTol = 1e-12;   // row conservativeness
inline constexpr double kStationaryTol = 1e-10;  // ||pi Q||_inf
inline constexpr double kMassTol = 1e-12;        // |sum(pi) - 1|

struct Species {
  int id = 0;  // 0-based index, contiguous
  std::string name;
};

/// One reaction as parsed from a model file, before any structural
/// restriction is imposed: arbitrary integer stoichiometry on both sides
/// plus a per-environment-state rate constant table.
struct RawReaction {
  std::vector<int> reactant;  // length d
  std::vector<int> product;   // length d
  std::vector<double> rates;  // length |env states|
  std::string text;           // original "lhs -> rhs" spelling
};

/// A parsed model file. Structurally well-formed (names resolve, the
/// generator is a conservative irreducible rate matrix, rates are finite and
/// nonnegative) but not yet restricted to the mono-molecular forms; the exact
/// joint simulator accepts these directly.
struct RawModel {
  std::vector<std::string> species_names;
  std::vector<std::string> env_state_names;
  Eigen::MatrixXd generator;
  std::optional<Eigen::VectorXd> pi;
  double mass_coverage = 1.0;  // documentation field for truncated state spaces
  std::vector<RawReaction> reactions;

  int species_count() const { return static_cast<int>(species_names.size()); }
  int env_count() const { return static_cast<int>(env_state_names.size()); }
  int species_index(const std::string& name) const;    // -1 if unknown
  int env_state_index(const std::string& name) const;  // -1 if unknown
};

enum class ReactionKind { Production, Conversion, Degradation };

struct RateMap {
  std::vector<double> values;  // one entry per environment state
  double operator[](int x) const { return values[static_cast<std::size_t>(x)]; }
};

struct Reaction {
  ReactionKind kind;
  int source = -1;  // consumed species (Conversion, Degradation)
  int target = -1;  // produced species (Production, Conversion)
  int burst = 0;    // molecules per production event
  RateMap rate;
};

struct EnvironmentSpec {
  std::vector<std::string> state_names;
  Eigen::MatrixXd generator;
  std::optional<Eigen::VectorXd> pi;
  double mass_coverage = 1.0;

  int size() const { return static_cast<int>(state_names.size()); }
  double exit_rate(int x) const { return -generator(x, x); }
};

/// A validated mono-molecular network: every reaction is a production
/// 0 -> m S_j, a conversion S_i -> S_j, or a degradation S_i -> 0, with rate
/// constants tabulated over the environment states. Immutable after
/// construction and safe to share across workers.
struct ModulatedNetwork {
  std::vector<Species> species;
  std::vector<Reaction> reactions;
  EnvironmentSpec env;

  int species_count() const { return static_cast<int>(species.size()); }
  int env_count() const { return env.size(); }

  /// Rate constant of 0 -> m_j S_j in state x (0 when absent).
  double production_rate(int j, int x) const;
  /// Burst size m_j (0 when there is no production of S_j).
  int burst(int j) const;
  /// Rate constant of S_i -> S_j in state x (0 when absent).
  double conversion_rate(int i, int j, int x) const;
  /// Rate constant of S_i -> 0 in state x (0 when absent).
  double degradation_rate(int i, int x) const;

  /// View of this network in file form (used by serialization and the
  /// joint simulator, which works on the unrestricted representation).
  RawModel raw() const;
};

/// Per-state drift pair: A(x) moves existing molecules (off-diagonal entry
/// (i,j) is the conversion rate j -> i, the diagonal collects every way S_i
/// is consumed) and B(x) is the production intensity vector.
struct Modulation {
  std::vector<Eigen::MatrixXd> A;  // one d x d matrix per environment state
  std::vector<Eigen::VectorXd> B;  // one length-d vector per environment state

  int dim() const { return A.empty() ? 0 : static_cast<int>(A.front().rows()); }
};

// -- model file I/O ---------------------------------------------------------

/// Parses the documented text format. Throws ValidationError on grammar
/// errors, unknown keys, or unresolved names.
RawModel parse_model(const std::string& text);
RawModel load_model(const std::string& path);
std::string serialize_model(const RawModel& model);
inline std::string serialize_model(const ModulatedNetwork& net) { return serialize_model(net.raw()); }

// -- operations -------------------------------------------------------------

/// Full validation; collects every violation before throwing.
ModulatedNetwork validate_network(const RawModel& raw);

/// Structural checks only (environment + rate tables + name resolution);
/// shared by validate_network and the general-kinetics simulator path.
std::vector<std::string> structural_violations(const RawModel& raw);

Modulation build_modulation(const ModulatedNetwork& net);

/// Stationary distribution of the environment chain; solves pi Q = 0 with
/// sum(pi) = 1. Throws NumericError if the linear system is singular beyond
/// the irreducibility already enforced.
Eigen::VectorXd stationary_env(const EnvironmentSpec& env);

/// sum_x ||B(x)||_1 pi(x); finite for every finite environment, reported so
/// truncated models can record the diagnostic.
double mean_production(const ModulatedNetwork& net, const Eigen::VectorXd& pi);

}  // namespace envnet

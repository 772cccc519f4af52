#pragma once

#include <optional>
#include <string>
#include <vector>

#include "envnet/model.hpp"

namespace envnet {

/// Species classification into closed strongly connected components, the
/// properly-produced block, and the transient remainder. Blocks are disjoint
/// and cover every species; closed components are listed in ascending order
/// of their smallest species index.
struct SpeciesPartition {
  std::vector<std::vector<int>> closed_components;
  std::vector<int> produced;
  std::vector<int> transient;
  std::vector<char> properly_produced;  // per species
  std::vector<char> properly_degraded;  // per species

  int component_count() const { return static_cast<int>(closed_components.size()); }
};

struct ErgodicityVerdict {
  bool satisfied = false;
  std::vector<std::pair<int, std::string>> violations;  // (species, reason)
  double mean_production = 0.0;
  SpeciesPartition partition;
};

/// Reflexive-transitive closure of the conversion digraph; entry (i, j) says
/// a molecule of S_i can become one of S_j through conversions alone.
std::vector<std::vector<char>> obtainable(const ModulatedNetwork& net);

SpeciesPartition classify(const ModulatedNetwork& net);

ErgodicityVerdict check_assumption2(const ModulatedNetwork& net, const Eigen::VectorXd& pi);

/// Per-alpha Monte Carlo estimates of the cycle survival criterion:
/// `estimate` is the sample mean of max over properly degraded species of
/// ||Phi(tau_0, tau_alpha) e_i||_1, `ucb99` its one-sided 99% normal upper
/// bound, `min_entry` the mean of the smallest transition probability over
/// obtainable pairs.
struct AlphaRow {
  int alpha = 0;
  double estimate = 0.0;
  double ucb99 = 0.0;
  double min_entry = 0.0;
  bool accepted = false;
};

struct AlphaSearch {
  std::optional<int> alpha;   // smallest accepted alpha, if any
  std::vector<AlphaRow> rows;
  bool vacuous = false;       // no properly degraded species: passes trivially
};

/// Searches alpha = 1..alpha_max for a 99%-confident contraction certificate
/// at the given anchor state. Statistical evidence only, never a proof;
/// absence of an accepted alpha is not a disproof. Throws NumericError once
/// alpha_max is exhausted without acceptance.
AlphaSearch estimate_alpha(const ModulatedNetwork& net, int anchor, int alpha_max, long replicas,
                           std::uint64_t seed, int threads = 1);

}  // namespace envnet

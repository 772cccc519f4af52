#include "envnet/structure.hpp"

#include <algorithm>
#include <cmath>

#include "envnet/errors.hpp"
#include "envnet/parallel.hpp"
#include "envnet/propagator.hpp"
#include "envnet/rng.hpp"

namespace envnet {

namespace {

// A rate table counts as an edge when it is positive in at least one state.
bool somewhere_positive(const RateMap& rate) {
  return std::any_of(rate.values.begin(), rate.values.end(), [](double r) { return r > 0.0; });
}

std::vector<std::vector<char>> conversion_edges(const ModulatedNetwork& net) {
  const int d = net.species_count();
  std::vector<std::vector<char>> edge(static_cast<std::size_t>(d),
                                      std::vector<char>(static_cast<std::size_t>(d), 0));
  for (const auto& r : net.reactions)
    if (r.kind == ReactionKind::Conversion && somewhere_positive(r.rate))
      edge[static_cast<std::size_t>(r.source)][static_cast<std::size_t>(r.target)] = 1;
  return edge;
}

}  // namespace

std::vector<std::vector<char>> obtainable(const ModulatedNetwork& net) {
  const int d = net.species_count();
  auto reach = conversion_edges(net);
  for (int i = 0; i < d; ++i) reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      if (reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)])
        for (int j = 0; j < d; ++j)
          if (reach[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)])
            reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
  return reach;
}

SpeciesPartition classify(const ModulatedNetwork& net) {
  const int d = net.species_count();
  auto reach = obtainable(net);

  std::vector<char> has_degradation(static_cast<std::size_t>(d), 0);
  std::vector<char> produced_directly(static_cast<std::size_t>(d), 0);
  for (const auto& r : net.reactions) {
    if (!somewhere_positive(r.rate)) continue;
    if (r.kind == ReactionKind::Degradation) has_degradation[static_cast<std::size_t>(r.source)] = 1;
    if (r.kind == ReactionKind::Production) produced_directly[static_cast<std::size_t>(r.target)] = 1;
  }

  SpeciesPartition part;
  part.properly_produced.assign(static_cast<std::size_t>(d), 0);
  part.properly_degraded.assign(static_cast<std::size_t>(d), 0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      if (produced_directly[static_cast<std::size_t>(j)] &&
          reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
        part.properly_produced[static_cast<std::size_t>(i)] = 1;
    // Every obtainable species must itself reach a degradation reaction.
    bool degraded = true;
    for (int j = 0; j < d && degraded; ++j) {
      if (!reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
      bool j_can = false;
      for (int k = 0; k < d && !j_can; ++k)
        j_can = reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] &&
                has_degradation[static_cast<std::size_t>(k)];
      degraded = j_can;
    }
    part.properly_degraded[static_cast<std::size_t>(i)] = degraded ? 1 : 0;
  }

  // Strongly connected components of the conversion digraph; a component is
  // closed when nothing leaves it (no outgoing conversion, no degradation).
  std::vector<int> comp(static_cast<std::size_t>(d), -1);
  int comps = 0;
  for (int i = 0; i < d; ++i) {
    if (comp[static_cast<std::size_t>(i)] >= 0) continue;
    for (int j = 0; j < d; ++j)
      if (comp[static_cast<std::size_t>(j)] < 0 &&
          reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
          reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
        comp[static_cast<std::size_t>(j)] = comps;
    ++comps;
  }
  auto edges = conversion_edges(net);
  std::vector<char> comp_closed(static_cast<std::size_t>(comps), 1);
  for (int i = 0; i < d; ++i) {
    if (has_degradation[static_cast<std::size_t>(i)])
      comp_closed[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = 0;
    for (int j = 0; j < d; ++j)
      if (edges[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
          comp[static_cast<std::size_t>(i)] != comp[static_cast<std::size_t>(j)])
        comp_closed[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = 0;
  }

  std::vector<std::vector<int>> closed;
  for (int c = 0; c < comps; ++c) {
    std::vector<int> members;
    bool any_produced = false;
    for (int i = 0; i < d; ++i)
      if (comp[static_cast<std::size_t>(i)] == c) {
        members.push_back(i);
        any_produced = any_produced || part.properly_produced[static_cast<std::size_t>(i)];
      }
    if (comp_closed[static_cast<std::size_t>(c)] && !any_produced) closed.push_back(std::move(members));
  }
  std::sort(closed.begin(), closed.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  part.closed_components = std::move(closed);

  std::vector<char> in_closed(static_cast<std::size_t>(d), 0);
  for (const auto& members : part.closed_components)
    for (int i : members) in_closed[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < d; ++i) {
    if (part.properly_produced[static_cast<std::size_t>(i)])
      part.produced.push_back(i);
    else if (!in_closed[static_cast<std::size_t>(i)])
      part.transient.push_back(i);
  }
  return part;
}

ErgodicityVerdict check_assumption2(const ModulatedNetwork& net, const Eigen::VectorXd& pi) {
  ErgodicityVerdict verdict;
  verdict.partition = classify(net);
  for (int i : verdict.partition.produced)
    if (!verdict.partition.properly_degraded[static_cast<std::size_t>(i)])
      verdict.violations.emplace_back(i, "properly produced, not properly degraded");
  verdict.mean_production = mean_production(net, pi);
  verdict.satisfied = verdict.violations.empty() && std::isfinite(verdict.mean_production);
  return verdict;
}

AlphaSearch estimate_alpha(const ModulatedNetwork& net, int anchor, int alpha_max, long replicas,
                           std::uint64_t seed, int threads) {
  if (anchor < 0 || anchor >= net.env_count())
    throw PreconditionError("estimate_alpha: unknown anchor state");
  if (alpha_max < 1 || replicas < 2) throw PreconditionError("estimate_alpha: bad search budget");

  ModulatedNetwork effective = net.env_count() == 1 ? clone_network(net) : net;
  const Modulation mod = build_modulation(effective);
  const int d = effective.species_count();
  auto reach = obtainable(effective);
  SpeciesPartition part = classify(effective);

  std::vector<int> degraded;
  for (int i = 0; i < d; ++i)
    if (part.properly_degraded[static_cast<std::size_t>(i)]) degraded.push_back(i);

  AlphaSearch search;
  if (degraded.empty()) {
    // Nothing can leave the system; the criterion is an empty maximum.
    search.vacuous = true;
    search.alpha = 1;
    search.rows.push_back({1, 0.0, 0.0, 0.0, true});
    return search;
  }

  for (int alpha = 1; alpha <= alpha_max; ++alpha) {
    std::vector<double> maxima(static_cast<std::size_t>(replicas));
    std::vector<double> minima(static_cast<std::size_t>(replicas));
    for_each_replica(replicas, threads, [&](long r) {
      RngStream rng(seed, (static_cast<std::uint64_t>(alpha) << 32) ^ static_cast<std::uint64_t>(r));
      auto [path, ret] = simulate_env_until_return(effective.env, anchor, alpha, rng);
      PathPropagator pp = propagate(mod, path, 0.0, ret.taus.back());
      double worst = 0.0;
      for (int i : degraded) worst = std::max(worst, pp.phi.col(i).sum());
      double best = 1.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
            best = std::min(best, pp.phi(j, i));
      maxima[static_cast<std::size_t>(r)] = worst;
      minima[static_cast<std::size_t>(r)] = best;
    });

    double mean = 0.0, mean_min = 0.0;
    for (long r = 0; r < replicas; ++r) {
      mean += maxima[static_cast<std::size_t>(r)];
      mean_min += minima[static_cast<std::size_t>(r)];
    }
    mean /= static_cast<double>(replicas);
    mean_min /= static_cast<double>(replicas);
    double var = 0.0;
    for (long r = 0; r < replicas; ++r) {
      double dlt = maxima[static_cast<std::size_t>(r)] - mean;
      var += dlt * dlt;
    }
    var /= static_cast<double>(replicas - 1);
    const double ucb = mean + 2.3263478740408408 * std::sqrt(var / static_cast<double>(replicas));

    // Estimates can sit at 1 - O(roundoff) when the true criterion equals 1
    // exactly; a sub-unit bound only counts when it clears the numerical
    // budget of the propagator products.
    AlphaRow row{alpha, mean, ucb, mean_min, ucb < 1.0 - 1e-9};
    search.rows.push_back(row);
    if (row.accepted) {
      search.alpha = alpha;
      return search;
    }
  }
  // Budget exhausted: report the table with no accepted alpha. Not a disproof.
  return search;
}

}  // namespace envnet

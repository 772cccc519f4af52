// envnet: analyze, simulate, and cross-validate mono-molecular reaction
// networks driven by a stochastic environment. All results go to stdout as
// CSV tables with header rows; diagnostics (including the effective seed of
// every stochastic subcommand) go to stderr.

#include <CLI11.hpp>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "envnet/envnet.hpp"

namespace {

using namespace envnet;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int resolve_state(const EnvironmentSpec& env, const std::string& token) {
  for (int x = 0; x < env.size(); ++x)
    if (env.state_names[static_cast<std::size_t>(x)] == token) return x;
  try {
    std::size_t pos = 0;
    int idx = std::stoi(token, &pos);
    if (pos == token.size() && idx >= 0 && idx < env.size()) return idx;
  } catch (...) {
  }
  throw PreconditionError("unknown environment state '" + token + "'");
}

Counts parse_counts(const std::string& text, int d) {
  Counts z = Counts::Zero(d);
  if (text.empty()) return z;
  std::stringstream ss(text);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',')) {
    if (i >= d) throw PreconditionError("too many entries in count vector '" + text + "'");
    z(i++) = std::stoi(tok);
  }
  if (i != d) throw PreconditionError("expected " + std::to_string(d) + " entries in '" + text + "'");
  return z;
}

std::vector<long> parse_longs(const std::string& text) {
  std::vector<long> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stol(tok));
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (long v : parse_longs(text)) out.push_back(static_cast<int>(v));
  return out;
}

EnvPath read_path_csv(const std::string& file, const EnvironmentSpec& env) {
  std::ifstream in(file);
  if (!in) throw PreconditionError("cannot open path file '" + file + "'");
  EnvPath path;
  std::string line;
  bool header = true;
  double t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string t_tok, s_tok, h_tok;
    std::getline(ss, t_tok, ',');
    std::getline(ss, s_tok, ',');
    std::getline(ss, h_tok, ',');
    double start = std::stod(t_tok);
    double hold = std::stod(h_tok);
    if (path.segments.empty()) {
      path.initial_state = resolve_state(env, s_tok);
      t = start;
    }
    path.jump_times.push_back(start);
    path.segments.push_back({resolve_state(env, s_tok), hold});
    t = start + hold;
  }
  if (path.segments.empty()) throw PreconditionError("path file '" + file + "' holds no segments");
  path.total_time = t;
  return path;
}

void print_path(const EnvPath& path, const EnvironmentSpec& env) {
  std::cout << "t_start,state,holding\n";
  for (int k = 0; k < path.segment_count(); ++k)
    std::cout << fmt(path.segment_start(k)) << ','
              << env.state_names[static_cast<std::size_t>(path.segments[static_cast<std::size_t>(k)].state)]
              << ',' << fmt(path.segments[static_cast<std::size_t>(k)].length) << '\n';
}

void print_histogram(const ModulatedNetwork& net, const std::vector<Counts>& samples) {
  std::map<std::vector<int>, long> hist;
  for (const auto& z : samples) {
    std::vector<int> key(z.data(), z.data() + z.size());
    ++hist[key];
  }
  for (const auto& s : net.species) std::cout << s.name << ',';
  std::cout << "count,frequency\n";
  const double n = static_cast<double>(samples.size());
  for (const auto& [key, count] : hist) {
    for (int v : key) std::cout << v << ',';
    std::cout << count << ',' << fmt(static_cast<double>(count) / n) << '\n';
  }
}

void note_seed(std::uint64_t seed) { std::fprintf(stderr, "seed %" PRIu64 "\n", seed); }

int run(int argc, char** argv) {
  CLI::App app{"mono-molecular reaction networks in a stochastic environment"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads for replica fan-out");

  std::string model_file, anchor_token, x0_token = "", z0_text, path_file, caps_text, components_text;
  std::uint64_t seed = 1;
  double horizon = 10.0, t_query = 1.0, from_u = 0.0, to_t = -1.0, eps = -1.0, quad_tol = 1e-9;
  long samples = 10000, replicas = 10000, cycles = 100000;
  int alpha_max = 8, iterations = -1, q_max = 3;
  long pmf_cap = -1;
  bool do_alpha = false, do_stationary = false, do_certificate = false, use_ssa = false;
  std::string returns_token, fixture_name, out_arg;

  auto* check = app.add_subcommand("check", "validate a model and print its species partition");
  check->add_option("model", model_file)->required();
  check->add_flag("--alpha", do_alpha, "search for the cycle-contraction order");
  check->add_option("--anchor", anchor_token, "anchor environment state (default: first)");
  check->add_option("--alpha-max", alpha_max);
  check->add_option("--replicas", replicas);
  check->add_option("--seed", seed);

  auto* sim = app.add_subcommand("simulate-env", "sample one environment trajectory as CSV");
  sim->add_option("model", model_file)->required();
  sim->add_option("--x0", x0_token, "initial state (default: first)");
  sim->add_option("--horizon", horizon)->required();
  sim->add_option("--seed", seed);
  sim->add_option("--returns", returns_token, "append the return-time table for this anchor");

  auto* phi = app.add_subcommand("phi", "propagator and accumulated production over a path span");
  phi->add_option("model", model_file)->required();
  phi->add_option("--path", path_file, "path CSV as emitted by simulate-env")->required();
  phi->add_option("--from", from_u)->required();
  phi->add_option("--to", to_t)->required();

  auto* ft = app.add_subcommand("finite-time", "conditional law of the counts at time t");
  ft->add_option("model", model_file)->required();
  ft->add_option("--t", t_query)->required();
  ft->add_option("--x0", x0_token, "initial environment state when simulating paths");
  ft->add_option("--z0", z0_text, "initial counts, comma separated (default: zero)");
  ft->add_option("--sample", samples, "emit a histogram of N draws");
  ft->add_option("--pmf", pmf_cap, "emit the exact pmf up to this per-species cap (needs --path)");
  ft->add_option("--path", path_file, "condition on this path instead of fresh ones");
  ft->add_option("--seed", seed);
  ft->add_option("--quad-tol", quad_tol);

  auto* stat = app.add_subcommand("stationary", "sample the conditional stationary law at an anchor");
  stat->add_option("model", model_file)->required();
  stat->add_option("--anchor", anchor_token)->required();
  stat->add_option("--n", iterations, "cycle iterations per sample");
  stat->add_option("--eps", eps, "pick n from the error certificate at this accuracy");
  stat->add_option("--samples", samples);
  stat->add_option("--components", components_text, "conserved totals, one per closed component");
  stat->add_flag("--certificate", do_certificate, "print the convergence certificate table");
  stat->add_option("--seed", seed);

  auto* mom = app.add_subcommand("moments", "stationary factorial moments");
  mom->add_option("model", model_file)->required();
  mom->add_option("--qmax", q_max);
  mom->add_option("--cycles", cycles);
  mom->add_option("--seed", seed);

  auto* orc = app.add_subcommand("oracle", "brute-force master-equation distributions");
  orc->add_option("model", model_file)->required();
  orc->add_option("--t", to_t, "transient pmf at this time");
  orc->add_flag("--stationary", do_stationary);
  orc->add_option("--x0", x0_token);
  orc->add_option("--z0", z0_text);
  orc->add_option("--caps", caps_text, "per-species caps (default: pilot-run sizing)");
  orc->add_option("--seed", seed, "seed for the pilot sizing run");

  auto* cmp = app.add_subcommand("compare", "total variation between sampler and oracle");
  cmp->add_option("model", model_file)->required();
  cmp->add_option("--t", to_t, "compare finite-time laws at this time");
  cmp->add_flag("--stationary", do_stationary);
  cmp->add_flag("--ssa", use_ssa, "use the joint simulator for the finite-time route");
  cmp->add_option("--anchor", anchor_token, "anchor state for the stationary comparison");
  cmp->add_option("--x0", x0_token);
  cmp->add_option("--z0", z0_text);
  cmp->add_option("--n", iterations, "cycle iterations for the stationary sampler");
  cmp->add_option("--samples", samples);
  cmp->add_option("--caps", caps_text);
  cmp->add_option("--seed", seed);

  auto* fx = app.add_subcommand("fixtures", "bundled worked-example models");
  fx->add_option("action", fixture_name, "list | show <name> | write <name>")->required();
  fx->add_option("name", out_arg, "fixture name for show/write");
  std::string out_file;
  fx->add_option("-o,--output", out_file, "output file for write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n\n%s", e.what(), app.help().c_str());
    return 64;
  }

  if (check->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    Eigen::VectorXd pi = net.env.pi ? *net.env.pi : stationary_env(net.env);
    ErgodicityVerdict verdict = check_assumption2(net, pi);
    std::cout << "block,species\n";
    auto names = [&](const std::vector<int>& ids) {
      std::string s;
      for (int i : ids) {
        if (!s.empty()) s += ' ';
        s += net.species[static_cast<std::size_t>(i)].name;
      }
      return s;
    };
    std::cout << "produced," << names(verdict.partition.produced) << '\n';
    std::cout << "transient," << names(verdict.partition.transient) << '\n';
    for (std::size_t c = 0; c < verdict.partition.closed_components.size(); ++c)
      std::cout << "closed_" << c + 1 << ',' << names(verdict.partition.closed_components[c]) << '\n';
    std::cout << "\ncheck,value\n";
    std::cout << "assumption2," << (verdict.satisfied ? "satisfied" : "violated") << '\n';
    for (const auto& [i, reason] : verdict.violations)
      std::cout << "violation," << net.species[static_cast<std::size_t>(i)].name << ": " << reason << '\n';
    std::cout << "mean_production," << fmt(verdict.mean_production) << '\n';
    if (do_alpha) {
      note_seed(seed);
      int anchor = anchor_token.empty() ? 0 : resolve_state(net.env, anchor_token);
      AlphaSearch search = estimate_alpha(net, anchor, alpha_max, replicas, seed, threads);
      std::cout << "\nalpha,estimate,ucb99,min_entry,accepted\n";
      for (const auto& row : search.rows)
        std::cout << row.alpha << ',' << fmt(row.estimate) << ',' << fmt(row.ucb99) << ','
                  << fmt(row.min_entry) << ',' << (row.accepted ? 1 : 0) << '\n';
      if (search.vacuous) std::fprintf(stderr, "alpha search vacuous: no properly degraded species\n");
    }
    return 0;
  }

  if (sim->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    note_seed(seed);
    int x0 = x0_token.empty() ? 0 : resolve_state(net.env, x0_token);
    if (returns_token.empty()) {
      print_path(simulate_env(net.env, x0, horizon, seed), net.env);
    } else {
      int anchor = resolve_state(net.env, returns_token);
      RngStream rng(seed);
      // Anchored run: the path starts at the anchor and the horizon bounds
      // the number of whole cycles kept.
      auto [path, ret] = simulate_env_until_return(net.env, anchor, 1, rng);
      while (path.total_time < horizon) {
        auto more = simulate_env_until_return(net.env, anchor, 1, rng).first;
        for (int k = 0; k < more.segment_count(); ++k) {
          path.jump_times.push_back(path.total_time);
          path.segments.push_back(more.segments[static_cast<std::size_t>(k)]);
          path.total_time += more.segments[static_cast<std::size_t>(k)].length;
        }
        ret.taus.push_back(path.total_time);
      }
      print_path(path, net.env);
      std::cout << "\nk,tau\n";
      for (std::size_t k = 0; k < ret.taus.size(); ++k) std::cout << k << ',' << fmt(ret.taus[k]) << '\n';
    }
    return 0;
  }

  if (phi->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    EnvPath path = read_path_csv(path_file, net.env);
    PathPropagator pp = propagate(build_modulation(net), path, from_u, to_t);
    std::cout << "i,j,phi\n";
    for (int i = 0; i < pp.phi.rows(); ++i)
      for (int j = 0; j < pp.phi.cols(); ++j) std::cout << i + 1 << ',' << j + 1 << ',' << fmt(pp.phi(i, j)) << '\n';
    std::cout << "\ni,w\n";
    for (int i = 0; i < pp.w.size(); ++i) std::cout << i + 1 << ',' << fmt(pp.w(i)) << '\n';
    return 0;
  }

  if (ft->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    const int d = net.species_count();
    Counts z0 = parse_counts(z0_text, d);
    if (pmf_cap >= 0) {
      if (path_file.empty())
        throw PreconditionError("--pmf needs --path (the pmf is conditional on one trajectory)");
      EnvPath path = read_path_csv(path_file, net.env);
      PmfTable table = finite_time_pmf(net, path, t_query, z0,
                                       std::vector<int>(static_cast<std::size_t>(d), static_cast<int>(pmf_cap)),
                                       {quad_tol, 30});
      for (const auto& s : net.species) std::cout << s.name << ',';
      std::cout << "probability\n";
      Counts z = Counts::Zero(d);
      for (double v : table.values) {
        for (int i = 0; i < d; ++i) std::cout << z(i) << ',';
        std::cout << fmt(v) << '\n';
        for (int i = d - 1; i >= 0; --i) {
          if (++z(i) <= table.caps[static_cast<std::size_t>(i)]) break;
          z(i) = 0;
        }
      }
      std::cout << "\ndiagnostic,value\ncovered," << fmt(table.covered) << '\n';
      return 0;
    }
    note_seed(seed);
    std::vector<Counts> out;
    if (!path_file.empty()) {
      EnvPath path = read_path_csv(path_file, net.env);
      out = sample_finite_time(net, path, t_query, z0, seed, samples);
    } else {
      int x0 = x0_token.empty() ? 0 : resolve_state(net.env, x0_token);
      out.reserve(static_cast<std::size_t>(samples));
      for (long r = 0; r < samples; ++r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        EnvPath path = simulate_env(net.env, x0, t_query, rng);
        out.push_back(sample_finite_time(net, path, t_query, z0, rng.next_u64(), 1).front());
      }
    }
    print_histogram(net, out);
    return 0;
  }

  if (stat->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    note_seed(seed);
    int anchor = resolve_state(net.env, anchor_token);
    ErrorCertificate cert;
    if (do_certificate || eps > 0.0) cert = error_certificate(net, anchor, seed ^ 0xcecefefeULL, 20000, threads);
    if (do_certificate) {
      std::cout << "certificate,value\n";
      std::cout << "available," << (cert.available ? 1 : 0) << '\n';
      std::cout << "M_hat," << fmt(cert.M_hat) << "\nr_hat," << fmt(cert.r_hat) << '\n';
      std::cout << "E_C," << fmt(cert.c_mean) << "\nE_C_se," << fmt(cert.c_se) << '\n';
      if (cert.available) {
        std::cout << "\nn,bound\n";
        for (int n : {1, 2, 5, 10, 20, 40, 80})
          std::cout << n << ',' << fmt(cert.bound(n)) << '\n';
      }
      std::cout << '\n';
    }
    int n = iterations;
    if (n < 0) {
      if (eps > 0.0 && cert.available)
        n = cert.iterations_for(eps);
      else if (eps > 0.0)
        throw NumericError("certificate unavailable; pass --n explicitly");
      else
        n = 30;
    }
    std::fprintf(stderr, "iterations n = %d\n", n);
    SpeciesPartition part = classify(net);
    std::vector<long> totals = parse_longs(components_text);
    if (totals.empty()) totals.assign(part.closed_components.size(), 0);
    std::vector<Counts> draws = stationary_sample(net, anchor, totals, n, seed, samples, {threads});
    print_histogram(net, draws);
    std::cout << "\nstatistic,value\n";
    const int d = net.species_count();
    for (int i = 0; i < d; ++i) {
      double mean = 0.0, sq = 0.0;
      for (const auto& z : draws) {
        mean += z(i);
        sq += static_cast<double>(z(i)) * z(i);
      }
      mean /= static_cast<double>(samples);
      std::cout << "mean_" << net.species[static_cast<std::size_t>(i)].name << ',' << fmt(mean) << '\n';
      std::cout << "var_" << net.species[static_cast<std::size_t>(i)].name << ','
                << fmt(sq / static_cast<double>(samples) - mean * mean) << '\n';
    }
    return 0;
  }

  if (mom->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    note_seed(seed);
    Eigen::VectorXd pi = net.env.pi ? *net.env.pi : stationary_env(net.env);
    std::cout << "q,m_q,se\n";
    if (net.species_count() == 1) {
      MomentTable table = factorial_moments(net, pi, q_max, cycles, seed, threads);
      for (std::size_t q = 0; q < table.values.size(); ++q)
        std::cout << q << ',' << fmt(table.values[q]) << ',' << fmt(table.ses[q]) << '\n';
    } else {
      // Diagonal moments per species via the mixing-measure Monte Carlo.
      for (int i = 0; i < net.species_count(); ++i)
        for (int q = 1; q <= q_max; ++q) {
          double value = 0.0, se2 = 0.0;
          for (int x = 0; x < net.env_count(); ++x) {
            auto [v, s] = factorial_moment_mc(net, x, Counts(q * Counts::Unit(net.species_count(), i)),
                                              40, seed, samples, {threads});
            value += pi(x) * v;
            se2 += pi(x) * pi(x) * s * s;
          }
          std::cout << net.species[static_cast<std::size_t>(i)].name << "^" << q << ',' << fmt(value)
                    << ',' << fmt(std::sqrt(se2)) << '\n';
        }
    }
    return 0;
  }

  if (orc->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    const int d = net.species_count();
    Counts z0 = parse_counts(z0_text, d);
    int x0 = x0_token.empty() ? 0 : resolve_state(net.env, x0_token);
    std::vector<int> caps = parse_ints(caps_text);
    if (caps.empty()) {
      double sizing_t = do_stationary ? 50.0 : to_t;
      caps = pilot_caps(net, x0, z0, sizing_t, seed);
      std::fprintf(stderr, "caps");
      for (int c : caps) std::fprintf(stderr, " %d", c);
      std::fprintf(stderr, "\n");
    }
    JointGenerator gen = build_joint_generator(net, caps);
    auto print_pmf = [&](const Eigen::VectorXd& p) {
      std::cout << "x,";
      for (const auto& s : net.species) std::cout << s.name << ',';
      std::cout << "probability\n";
      for (long i = 0; i < p.size(); ++i) {
        auto [x, z] = gen.space.unpack(i);
        std::cout << net.env.state_names[static_cast<std::size_t>(x)] << ',';
        for (int k = 0; k < d; ++k) std::cout << z(k) << ',';
        std::cout << fmt(p(i)) << '\n';
      }
    };
    if (do_stationary) {
      StationaryPmf out = stationary_pmf(gen);
      print_pmf(out.p);
      std::cout << "\ndiagnostic,value\noverflow_flux," << fmt(out.overflow_flux) << "\nresidual,"
                << fmt(out.residual) << '\n';
    } else {
      if (to_t < 0.0) throw PreconditionError("oracle: pass --t or --stationary");
      TransientPmf out = transient_pmf(gen, x0, z0, to_t);
      print_pmf(out.p);
      std::cout << "\ndiagnostic,value\noverflow," << fmt(out.overflow) << '\n';
    }
    return 0;
  }

  if (cmp->parsed()) {
    ModulatedNetwork net = validate_network(load_model(model_file));
    const int d = net.species_count();
    note_seed(seed);
    Counts z0 = parse_counts(z0_text, d);
    std::cout << "metric,value\n";
    if (do_stationary) {
      ModulatedNetwork eff = net.env_count() == 1 ? clone_network(net) : net;
      int anchor = anchor_token.empty() ? 0 : resolve_state(eff.env, anchor_token);
      int n = iterations > 0 ? iterations : 30;
      SpeciesPartition part = classify(eff);
      std::vector<long> totals(part.closed_components.size(), 0);
      std::vector<Counts> draws = stationary_sample(eff, anchor, totals, n, seed, samples, {threads});
      std::vector<int> caps = parse_ints(caps_text);
      if (caps.empty()) caps = pilot_caps(eff, anchor, z0, 50.0, seed ^ 0x9999ULL);
      StationaryPmf oracle = stationary_pmf(build_joint_generator(eff, caps));
      Eigen::VectorXd cond = oracle.conditional(anchor);
      // Empirical law of the draws against the oracle conditional slice.
      std::map<long, double> emp;
      for (const auto& z : draws) {
        bool inside = true;
        for (int i = 0; i < d; ++i)
          if (z(i) > caps[static_cast<std::size_t>(i)]) inside = false;
        long flat = 0;
        if (inside)
          for (int i = 0; i < d; ++i) flat = flat * (caps[static_cast<std::size_t>(i)] + 1) + z(i);
        emp[inside ? flat : -1] += 1.0 / static_cast<double>(samples);
      }
      double tv = 0.0;
      for (long i = 0; i < cond.size(); ++i) {
        auto it = emp.find(i);
        tv += std::abs((it == emp.end() ? 0.0 : it->second) - cond(i));
      }
      if (emp.count(-1)) tv += emp[-1];
      std::cout << "tv," << fmt(0.5 * tv) << '\n';
      std::cout << "samples," << samples << "\nn," << n << '\n';
    } else {
      if (to_t < 0.0) throw PreconditionError("compare: pass --t or --stationary");
      int x0 = x0_token.empty() ? 0 : resolve_state(net.env, x0_token);
      std::vector<Counts> draws;
      if (use_ssa) {
        draws = ssa_endpoints(net.raw(), x0, z0, to_t, seed, samples, 50'000'000, threads);
      } else {
        draws.reserve(static_cast<std::size_t>(samples));
        for (long r = 0; r < samples; ++r) {
          RngStream rng(seed, static_cast<std::uint64_t>(r));
          EnvPath path = simulate_env(net.env, x0, to_t, rng);
          draws.push_back(sample_finite_time(net, path, to_t, z0, rng.next_u64(), 1).front());
        }
      }
      std::vector<int> caps = parse_ints(caps_text);
      if (caps.empty()) caps = pilot_caps(net, x0, z0, to_t, seed ^ 0x9999ULL);
      TransientPmf oracle = transient_pmf(build_joint_generator(net, caps), x0, z0, to_t);
      Eigen::VectorXd marg = oracle.count_marginal();
      std::map<long, double> emp;
      for (const auto& z : draws) {
        bool inside = true;
        long flat = 0;
        for (int i = 0; i < d; ++i) {
          if (z(i) > caps[static_cast<std::size_t>(i)]) inside = false;
          if (inside) flat = flat * (caps[static_cast<std::size_t>(i)] + 1) + z(i);
        }
        emp[inside ? flat : -1] += 1.0 / static_cast<double>(samples);
      }
      double tv = 0.0;
      for (long i = 0; i < marg.size(); ++i) {
        auto it = emp.find(i);
        tv += std::abs((it == emp.end() ? 0.0 : it->second) - marg(i));
      }
      if (emp.count(-1)) tv += emp[-1];
      tv += oracle.overflow;
      std::cout << "tv," << fmt(0.5 * tv) << '\n';
      std::cout << "samples," << samples << "\noverflow," << fmt(oracle.overflow) << '\n';
    }
    return 0;
  }

  if (fx->parsed()) {
    if (fixture_name == "list") {
      std::cout << "name\n";
      for (const auto& f : fixtures()) std::cout << f.name << '\n';
      return 0;
    }
    if (fixture_name == "show" || fixture_name == "write") {
      const Fixture* f = find_fixture(out_arg);
      if (!f) throw PreconditionError("unknown fixture '" + out_arg + "'");
      if (fixture_name == "show") {
        std::cout << f->model_text;
        return 0;
      }
      std::string target = out_file.empty() ? std::string(f->name) + ".model" : out_file;
      std::ofstream out(target);
      out << f->model_text;
      std::fprintf(stderr, "wrote %s\n", target.c_str());
      return 0;
    }
    throw PreconditionError("fixtures: expected list | show <name> | write <name>");
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const envnet::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const envnet::PreconditionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const envnet::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

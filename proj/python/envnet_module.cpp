// Python bindings for the main operations: model I/O and validation,
// structure analysis, environment paths, propagators, the finite-time law,
// the stationary sampler, and the master-equation oracle.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "envnet/envnet.hpp"

namespace py = pybind11;
using namespace envnet;

namespace {

py::dict partition_dict(const ModulatedNetwork& net, const SpeciesPartition& part) {
  auto names = [&](const std::vector<int>& ids) {
    py::list out;
    for (int i : ids) out.append(net.species[static_cast<std::size_t>(i)].name);
    return out;
  };
  py::list closed;
  for (const auto& comp : part.closed_components) closed.append(names(comp));
  py::dict d;
  d["produced"] = names(part.produced);
  d["transient"] = names(part.transient);
  d["closed"] = closed;
  return d;
}

int state_index(const ModulatedNetwork& net, const py::object& state) {
  if (py::isinstance<py::str>(state)) {
    std::string name = state.cast<std::string>();
    for (int x = 0; x < net.env_count(); ++x)
      if (net.env.state_names[static_cast<std::size_t>(x)] == name) return x;
    throw PreconditionError("unknown environment state '" + name + "'");
  }
  return state.cast<int>();
}

Counts as_counts(const ModulatedNetwork& net, const py::object& z) {
  if (z.is_none()) return Counts::Zero(net.species_count());
  Counts out = z.cast<Counts>();
  if (out.size() != net.species_count()) throw PreconditionError("count vector has wrong length");
  return out;
}

Eigen::MatrixXi stack_counts(const std::vector<Counts>& rows) {
  Eigen::MatrixXi out(static_cast<long>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (long r = 0; r < out.rows(); ++r) out.row(r) = rows[static_cast<std::size_t>(r)].transpose();
  return out;
}

}  // namespace

PYBIND11_MODULE(_envnet, m) {
  m.doc() = "Mono-molecular reaction networks in a stochastic environment";

  py::register_exception<ValidationError>(m, "ModelRejected");
  py::register_exception<PreconditionError>(m, "PreconditionFailed");
  py::register_exception<NumericError>(m, "NumericFailure");

  py::class_<ModulatedNetwork>(m, "Model")
      .def_property_readonly("species",
                             [](const ModulatedNetwork& net) {
                               std::vector<std::string> out;
                               for (const auto& s : net.species) out.push_back(s.name);
                               return out;
                             })
      .def_property_readonly("env_states",
                             [](const ModulatedNetwork& net) { return net.env.state_names; })
      .def_property_readonly("generator",
                             [](const ModulatedNetwork& net) { return net.env.generator; })
      .def_property_readonly("mass_coverage",
                             [](const ModulatedNetwork& net) { return net.env.mass_coverage; })
      .def("serialize", [](const ModulatedNetwork& net) { return serialize_model(net); })
      .def("modulation",
           [](const ModulatedNetwork& net) {
             Modulation mod = build_modulation(net);
             return py::make_tuple(mod.A, mod.B);
           })
      .def("__repr__", [](const ModulatedNetwork& net) {
        return "<envnet.Model: " + std::to_string(net.species_count()) + " species, " +
               std::to_string(net.env_count()) + " environment states>";
      });

  py::class_<EnvPath>(m, "Path")
      .def_property_readonly("total_time", [](const EnvPath& p) { return p.total_time; })
      .def_property_readonly("states",
                             [](const EnvPath& p) {
                               std::vector<int> out;
                               for (const auto& s : p.segments) out.push_back(s.state);
                               return out;
                             })
      .def_property_readonly("holdings",
                             [](const EnvPath& p) {
                               std::vector<double> out;
                               for (const auto& s : p.segments) out.push_back(s.length);
                               return out;
                             })
      .def_property_readonly("jump_times", [](const EnvPath& p) { return p.jump_times; })
      .def("state_at", &EnvPath::state_at, py::arg("t"))
      .def("__len__", [](const EnvPath& p) { return p.segments.size(); });

  m.def("parse_model", [](const std::string& text) { return validate_network(parse_model(text)); },
        py::arg("text"), "Parse and validate a model from its text form.");
  m.def("load_model", [](const std::string& path) { return validate_network(load_model(path)); },
        py::arg("path"));

  m.def("stationary_env",
        [](const ModulatedNetwork& net) {
          return net.env.pi ? *net.env.pi : stationary_env(net.env);
        },
        py::arg("model"));
  m.def("mean_production",
        [](const ModulatedNetwork& net) {
          Eigen::VectorXd pi = net.env.pi ? *net.env.pi : stationary_env(net.env);
          return mean_production(net, pi);
        },
        py::arg("model"));

  m.def("classify",
        [](const ModulatedNetwork& net) { return partition_dict(net, classify(net)); },
        py::arg("model"));
  m.def("check_ergodicity",
        [](const ModulatedNetwork& net) {
          Eigen::VectorXd pi = net.env.pi ? *net.env.pi : stationary_env(net.env);
          ErgodicityVerdict v = check_assumption2(net, pi);
          py::dict d = partition_dict(net, v.partition);
          d["satisfied"] = v.satisfied;
          d["mean_production"] = v.mean_production;
          py::list viol;
          for (const auto& [i, reason] : v.violations)
            viol.append(py::make_tuple(net.species[static_cast<std::size_t>(i)].name, reason));
          d["violations"] = viol;
          return d;
        },
        py::arg("model"));

  m.def("estimate_alpha",
        [](const ModulatedNetwork& net, const py::object& anchor, int alpha_max, long replicas,
           std::uint64_t seed, int threads) {
          AlphaSearch s = estimate_alpha(net, state_index(net, anchor), alpha_max, replicas, seed, threads);
          py::dict d;
          d["alpha"] = s.alpha ? py::cast(*s.alpha) : py::none();
          d["vacuous"] = s.vacuous;
          py::list rows;
          for (const auto& r : s.rows) {
            py::dict row;
            row["alpha"] = r.alpha;
            row["estimate"] = r.estimate;
            row["ucb99"] = r.ucb99;
            row["min_entry"] = r.min_entry;
            row["accepted"] = r.accepted;
            rows.append(row);
          }
          d["rows"] = rows;
          return d;
        },
        py::arg("model"), py::arg("anchor") = 0, py::arg("alpha_max") = 8,
        py::arg("replicas") = 10000, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def("simulate_env",
        [](const ModulatedNetwork& net, const py::object& x0, double horizon, std::uint64_t seed) {
          return simulate_env(net.env, state_index(net, x0), horizon, seed);
        },
        py::arg("model"), py::arg("x0") = 0, py::arg("horizon") = 10.0, py::arg("seed") = 1);

  m.def("simulate_env_until_return",
        [](const ModulatedNetwork& net, const py::object& anchor, int k, std::uint64_t seed) {
          auto [path, ret] = simulate_env_until_return(net.env, state_index(net, anchor), k, seed);
          return py::make_tuple(path, ret.taus);
        },
        py::arg("model"), py::arg("anchor") = 0, py::arg("k") = 1, py::arg("seed") = 1);

  m.def("propagate",
        [](const ModulatedNetwork& net, const EnvPath& path, double u, double t) {
          PathPropagator pp = propagate(build_modulation(net), path, u, t);
          return py::make_tuple(pp.phi, pp.w);
        },
        py::arg("model"), py::arg("path"), py::arg("u"), py::arg("t"),
        "Propagator matrix and accumulated production over [u, t].");

  m.def("sample_finite_time",
        [](const ModulatedNetwork& net, const EnvPath& path, double t, const py::object& z0,
           std::uint64_t seed, long replicas) {
          return stack_counts(sample_finite_time(net, path, t, as_counts(net, z0), seed, replicas));
        },
        py::arg("model"), py::arg("path"), py::arg("t"), py::arg("z0") = py::none(),
        py::arg("seed") = 1, py::arg("replicas") = 1);

  m.def("finite_time_pmf",
        [](const ModulatedNetwork& net, const EnvPath& path, double t, const py::object& z0,
           const std::vector<int>& caps, double quad_tol) {
          PmfTable table = finite_time_pmf(net, path, t, as_counts(net, z0), caps, {quad_tol, 30});
          py::dict d;
          d["values"] = table.values;
          d["caps"] = table.caps;
          d["covered"] = table.covered;
          return d;
        },
        py::arg("model"), py::arg("path"), py::arg("t"), py::arg("z0"), py::arg("caps"),
        py::arg("quad_tol") = 1e-9);

  m.def("burst_intensities",
        [](const ModulatedNetwork& net, const EnvPath& path, double t, double quad_tol) {
          BurstLaw law = burst_intensities(net, path, t, {quad_tol, 30});
          py::dict d;
          d["poisson_vector"] = law.poisson_vector;
          if (law.poisson_vector) {
            d["W"] = law.W;
          } else {
            py::list items;
            for (const auto& b : law.intensities)
              items.append(py::make_tuple(b.channel, b.nu, b.intensity));
            d["intensities"] = items;
          }
          return d;
        },
        py::arg("model"), py::arg("path"), py::arg("t"), py::arg("quad_tol") = 1e-9);

  m.def("ssa",
        [](const py::object& model, const py::object& x0, const py::object& z0, double horizon,
           std::uint64_t seed, long max_steps) {
          RawModel raw = py::isinstance<py::str>(model)
                             ? parse_model(model.cast<std::string>())
                             : model.cast<ModulatedNetwork>().raw();
          int x = 0;
          if (py::isinstance<py::str>(x0)) {
            x = raw.env_state_index(x0.cast<std::string>());
            if (x < 0) throw PreconditionError("unknown environment state");
          } else {
            x = x0.cast<int>();
          }
          Counts z = Counts::Zero(raw.species_count());
          if (!z0.is_none()) z = z0.cast<Counts>();
          auto events = ssa_joint(raw, x, z, horizon, seed, max_steps);
          std::vector<double> times;
          std::vector<int> states;
          std::vector<Counts> counts;
          for (const auto& e : events) {
            times.push_back(e.time);
            states.push_back(e.env_state);
            counts.push_back(e.counts);
          }
          py::dict d;
          d["time"] = times;
          d["env_state"] = states;
          d["counts"] = stack_counts(counts);
          return d;
        },
        py::arg("model"), py::arg("x0") = 0, py::arg("z0") = py::none(), py::arg("horizon") = 10.0,
        py::arg("seed") = 1, py::arg("max_steps") = 50'000'000,
        "Exact joint simulation; accepts a Model or raw model text (general mass-action).");

  m.def("sre_atoms",
        [](const ModulatedNetwork& net, const py::object& anchor, int n, std::uint64_t seed,
           long replicas, int threads) {
          auto atoms = sre_sample(net, state_index(net, anchor), n, seed, replicas, {threads});
          py::list us, ws, holds;
          for (const auto& a : atoms) {
            us.append(a.u_matrix);
            ws.append(a.w_vector);
            holds.append(a.U);
          }
          py::dict d;
          d["u_matrix"] = us;
          d["w_vector"] = ws;
          d["holding"] = holds;
          return d;
        },
        py::arg("model"), py::arg("anchor") = 0, py::arg("n") = 30, py::arg("seed") = 1,
        py::arg("replicas") = 1000, py::arg("threads") = 1);

  m.def("stationary_sample",
        [](const ModulatedNetwork& net, const py::object& anchor, const std::vector<long>& totals,
           int n, std::uint64_t seed, long replicas, int threads) {
          return stack_counts(
              stationary_sample(net, state_index(net, anchor), totals, n, seed, replicas, {threads}));
        },
        py::arg("model"), py::arg("anchor") = 0, py::arg("component_totals") = std::vector<long>{},
        py::arg("n") = 30, py::arg("seed") = 1, py::arg("replicas") = 1000, py::arg("threads") = 1);

  m.def("factorial_moments",
        [](const ModulatedNetwork& net, int q_max, long cycles, std::uint64_t seed, int threads) {
          Eigen::VectorXd pi = net.env.pi ? *net.env.pi : stationary_env(net.env);
          MomentTable t = factorial_moments(net, pi, q_max, cycles, seed, threads);
          return py::make_tuple(t.values, t.ses);
        },
        py::arg("model"), py::arg("q_max") = 3, py::arg("cycles") = 100000, py::arg("seed") = 1,
        py::arg("threads") = 1);

  m.def("error_certificate",
        [](const ModulatedNetwork& net, const py::object& anchor, std::uint64_t seed, long replicas,
           int threads) {
          ErrorCertificate c = error_certificate(net, state_index(net, anchor), seed, replicas, threads);
          py::dict d;
          d["available"] = c.available;
          d["M_hat"] = c.M_hat;
          d["r_hat"] = c.r_hat;
          d["E_C"] = c.c_mean;
          d["E_C_se"] = c.c_se;
          return d;
        },
        py::arg("model"), py::arg("anchor") = 0, py::arg("seed") = 1, py::arg("replicas") = 20000,
        py::arg("threads") = 1);

  m.def("certificate_iterations",
        [](const ModulatedNetwork& net, const py::object& anchor, double eps, std::uint64_t seed,
           long replicas) {
          return error_certificate(net, state_index(net, anchor), seed, replicas).iterations_for(eps);
        },
        py::arg("model"), py::arg("anchor") = 0, py::arg("eps") = 1e-3, py::arg("seed") = 1,
        py::arg("replicas") = 20000);

  m.def("pilot_caps",
        [](const ModulatedNetwork& net, const py::object& x0, const py::object& z0, double t,
           std::uint64_t seed) {
          return pilot_caps(net, state_index(net, x0), as_counts(net, z0), t, seed);
        },
        py::arg("model"), py::arg("x0") = 0, py::arg("z0") = py::none(), py::arg("t") = 50.0,
        py::arg("seed") = 1);

  m.def("oracle_transient",
        [](const ModulatedNetwork& net, const std::vector<int>& caps, const py::object& x0,
           const py::object& z0, double t) {
          JointGenerator gen = build_joint_generator(net, caps);
          TransientPmf out = transient_pmf(gen, state_index(net, x0), as_counts(net, z0), t);
          py::dict d;
          d["p"] = out.p;
          d["overflow"] = out.overflow;
          d["count_marginal"] = out.count_marginal();
          d["env_marginal"] = out.env_marginal();
          return d;
        },
        py::arg("model"), py::arg("caps"), py::arg("x0") = 0, py::arg("z0") = py::none(),
        py::arg("t") = 1.0);

  m.def("oracle_stationary",
        [](const ModulatedNetwork& net, const std::vector<int>& caps, double overflow_tol) {
          StationaryPmf out = stationary_pmf(build_joint_generator(net, caps), overflow_tol);
          py::dict d;
          d["p"] = out.p;
          d["overflow_flux"] = out.overflow_flux;
          d["residual"] = out.residual;
          d["count_marginal"] = out.count_marginal();
          d["env_marginal"] = out.env_marginal();
          py::list conds;
          for (int x = 0; x < out.space.env_count; ++x) conds.append(out.conditional(x));
          d["conditional"] = conds;
          return d;
        },
        py::arg("model"), py::arg("caps"), py::arg("overflow_tol") = 1e-6);

  m.def("fixtures", [] {
    py::dict d;
    for (const auto& f : fixtures()) d[py::str(std::string(f.name))] = std::string(f.model_text);
    return d;
  });
}

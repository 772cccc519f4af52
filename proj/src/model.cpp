#include "envnet/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace envnet {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  try {
    std::size_t pos = 0;
    out = std::stoi(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

// One side of a reaction arrow: "0" or coefficient-weighted species terms.
bool parse_side(const std::string& side, const RawModel& model, std::vector<int>& stoich,
                std::string& err) {
  stoich.assign(model.species_names.size(), 0);
  std::string cleaned = trim(side);
  if (cleaned == "0") return true;
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    std::size_t plus = cleaned.find('+', start);
    std::string term = trim(cleaned.substr(start, plus == std::string::npos ? plus : plus - start));
    if (term.empty()) {
      err = "empty term";
      return false;
    }
    auto toks = split_ws(term);
    int coeff = 1;
    std::string name;
    if (toks.size() == 1) {
      name = toks[0];
      // Allow "2S1" style glued coefficients.
      std::size_t digits = 0;
      while (digits < name.size() && std::isdigit(static_cast<unsigned char>(name[digits]))) ++digits;
      if (digits > 0 && digits < name.size()) {
        coeff = std::stoi(name.substr(0, digits));
        name = name.substr(digits);
      }
    } else if (toks.size() == 2) {
      if (!parse_int(toks[0], coeff)) {
        err = "bad coefficient '" + toks[0] + "'";
        return false;
      }
      name = toks[1];
    } else {
      err = "malformed term '" + term + "'";
      return false;
    }
    if (coeff <= 0) {
      err = "coefficient must be positive in '" + term + "'";
      return false;
    }
    int idx = model.species_index(name);
    if (idx < 0) {
      err = "unknown species '" + name + "'";
      return false;
    }
    stoich[static_cast<std::size_t>(idx)] += coeff;
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return true;
}

}  // namespace

int RawModel::species_index(const std::string& name) const {
  auto it = std::find(species_names.begin(), species_names.end(), name);
  return it == species_names.end() ? -1 : static_cast<int>(it - species_names.begin());
}

int RawModel::env_state_index(const std::string& name) const {
  auto it = std::find(env_state_names.begin(), env_state_names.end(), name);
  return it == env_state_names.end() ? -1 : static_cast<int>(it - env_state_names.begin());
}

RawModel parse_model(const std::string& text) {
  RawModel model;
  std::vector<std::string> errors;
  enum class Section { None, Species, Environment, Reactions } section = Section::None;

  std::set<std::string> seen_keys;
  std::map<std::string, std::vector<double>> generator_rows;
  std::vector<std::pair<std::string, std::string>> reaction_lines;  // value, location
  std::vector<double> pi_values;
  bool has_pi = false;

  std::istringstream stream(text);
  std::string raw_line;
  int lineno = 0;
  while (std::getline(stream, raw_line)) {
    ++lineno;
    std::string line = raw_line;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);

    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + ": malformed section header '" + line + "'");
        continue;
      }
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "species")
        section = Section::Species;
      else if (name == "environment")
        section = Section::Environment;
      else if (name == "reactions")
        section = Section::Reactions;
      else
        errors.push_back(where + ": unknown section '" + name + "'");
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + ": expected 'key = value'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    switch (section) {
      case Section::None:
        errors.push_back(where + ": key outside any section");
        break;
      case Section::Species:
        if (key == "names") {
          if (!seen_keys.insert("species.names").second)
            errors.push_back(where + ": duplicate key 'names'");
          model.species_names = split_ws(value);
        } else {
          errors.push_back(where + ": unknown key '" + key + "' in [species]");
        }
        break;
      case Section::Environment:
        if (key == "states") {
          if (!seen_keys.insert("environment.states").second)
            errors.push_back(where + ": duplicate key 'states'");
          model.env_state_names = split_ws(value);
        } else if (key.rfind("row ", 0) == 0) {
          std::string state = trim(key.substr(4));
          if (generator_rows.count(state))
            errors.push_back(where + ": duplicate row for state '" + state + "'");
          std::vector<double> row;
          for (const auto& tok : split_ws(value)) {
            double v;
            if (!parse_double(tok, v)) {
              errors.push_back(where + ": bad number '" + tok + "'");
              v = 0.0;
            }
            row.push_back(v);
          }
          generator_rows[state] = std::move(row);
        } else if (key == "pi") {
          if (!seen_keys.insert("environment.pi").second)
            errors.push_back(where + ": duplicate key 'pi'");
          has_pi = true;
          for (const auto& tok : split_ws(value)) {
            double v;
            if (!parse_double(tok, v)) {
              errors.push_back(where + ": bad number '" + tok + "'");
              v = 0.0;
            }
            pi_values.push_back(v);
          }
        } else if (key == "mass_coverage") {
          if (!seen_keys.insert("environment.mass_coverage").second)
            errors.push_back(where + ": duplicate key 'mass_coverage'");
          if (!parse_double(value, model.mass_coverage))
            errors.push_back(where + ": bad number '" + value + "'");
        } else {
          errors.push_back(where + ": unknown key '" + key + "' in [environment]");
        }
        break;
      case Section::Reactions:
        if (key == "reaction") {
          reaction_lines.emplace_back(value, where);
        } else {
          errors.push_back(where + ": unknown key '" + key + "' in [reactions]");
        }
        break;
    }
  }

  if (model.species_names.empty()) errors.push_back("[species] names missing or empty");
  if (model.env_state_names.empty()) errors.push_back("[environment] states missing or empty");
  if (!errors.empty()) throw ValidationError(std::move(errors));

  const int m = model.env_count();
  model.generator = Eigen::MatrixXd::Zero(m, m);
  for (int x = 0; x < m; ++x) {
    auto it = generator_rows.find(model.env_state_names[static_cast<std::size_t>(x)]);
    if (it == generator_rows.end()) {
      errors.push_back("missing generator row for state '" +
                       model.env_state_names[static_cast<std::size_t>(x)] + "'");
      continue;
    }
    if (static_cast<int>(it->second.size()) != m) {
      errors.push_back("generator row for state '" + it->first + "' has " +
                       std::to_string(it->second.size()) + " entries, expected " +
                       std::to_string(m));
      continue;
    }
    for (int y = 0; y < m; ++y) model.generator(x, y) = it->second[static_cast<std::size_t>(y)];
  }
  for (const auto& [state, row] : generator_rows)
    if (model.env_state_index(state) < 0)
      errors.push_back("generator row for unknown state '" + state + "'");

  if (has_pi) {
    if (static_cast<int>(pi_values.size()) != m) {
      errors.push_back("pi has " + std::to_string(pi_values.size()) + " entries, expected " +
                       std::to_string(m));
    } else {
      model.pi = Eigen::Map<Eigen::VectorXd>(pi_values.data(), m);
    }
  }

  for (const auto& [value, where] : reaction_lines) {
    auto arrow = value.find("->");
    auto colon = value.rfind(':');
    if (arrow == std::string::npos || colon == std::string::npos || colon < arrow) {
      errors.push_back(where + ": reaction must look like 'lhs -> rhs : rates'");
      continue;
    }
    RawReaction rxn;
    rxn.text = trim(value.substr(0, colon));
    std::string err;
    if (!parse_side(value.substr(0, arrow), model, rxn.reactant, err)) {
      errors.push_back(where + ": " + err);
      continue;
    }
    if (!parse_side(value.substr(arrow + 2, colon - arrow - 2), model, rxn.product, err)) {
      errors.push_back(where + ": " + err);
      continue;
    }
    for (const auto& tok : split_ws(value.substr(colon + 1))) {
      double v;
      if (!parse_double(tok, v)) {
        errors.push_back(where + ": bad rate '" + tok + "'");
        v = 0.0;
      }
      rxn.rates.push_back(v);
    }
    if (static_cast<int>(rxn.rates.size()) != m)
      errors.push_back(where + ": " + std::to_string(rxn.rates.size()) + " rates given, expected " +
                       std::to_string(m));
    else
      model.reactions.push_back(std::move(rxn));
  }

  if (!errors.empty()) throw ValidationError(std::move(errors));
  return model;
}

RawModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open model file '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const RawModel& model) {
  std::ostringstream out;
  out << "[species]\nnames =";
  for (const auto& s : model.species_names) out << ' ' << s;
  out << "\n\n[environment]\nstates =";
  for (const auto& s : model.env_state_names) out << ' ' << s;
  out << '\n';
  for (int x = 0; x < model.env_count(); ++x) {
    out << "row " << model.env_state_names[static_cast<std::size_t>(x)] << " =";
    for (int y = 0; y < model.env_count(); ++y) out << ' ' << fmt(model.generator(x, y));
    out << '\n';
  }
  if (model.pi) {
    out << "pi =";
    for (int x = 0; x < model.env_count(); ++x) out << ' ' << fmt((*model.pi)(x));
    out << '\n';
  }
  if (model.mass_coverage != 1.0) out << "mass_coverage = " << fmt(model.mass_coverage) << '\n';
  out << "\n[reactions]\n";
  for (const auto& rxn : model.reactions) {
    auto side = [&](const std::vector<int>& stoich) {
      std::string s;
      for (std::size_t i = 0; i < stoich.size(); ++i) {
        if (stoich[i] == 0) continue;
        if (!s.empty()) s += " + ";
        if (stoich[i] != 1) s += std::to_string(stoich[i]) + ' ';
        s += model.species_names[i];
      }
      return s.empty() ? std::string("0") : s;
    };
    out << "reaction = " << side(rxn.reactant) << " -> " << side(rxn.product) << " :";
    for (double r : rxn.rates) out << ' ' << fmt(r);
    out << '\n';
  }
  return out.str();
}

namespace {

bool strongly_connected(const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(q.rows());
  if (n <= 1) return true;
  auto reach = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        double rate = transpose ? q(v, u) : q(u, v);
        if (u != v && rate > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(false) && reach(true);
}

}  // namespace

std::vector<std::string> structural_violations(const RawModel& raw) {
  std::vector<std::string> v;
  const int d = raw.species_count();
  const int m = raw.env_count();

  if (d < 1) v.push_back("no species declared");
  std::set<std::string> names(raw.species_names.begin(), raw.species_names.end());
  if (static_cast<int>(names.size()) != d) v.push_back("duplicate species names");
  std::set<std::string> states(raw.env_state_names.begin(), raw.env_state_names.end());
  if (static_cast<int>(states.size()) != m) v.push_back("duplicate environment state names");

  for (int x = 0; x < m; ++x) {
    double row_sum = 0.0;
    for (int y = 0; y < m; ++y) {
      row_sum += raw.generator(x, y);
      if (x != y && raw.generator(x, y) < 0.0)
        v.push_back("negative transition rate from '" + raw.env_state_names[static_cast<std::size_t>(x)] +
                    "' to '" + raw.env_state_names[static_cast<std::size_t>(y)] + "'");
    }
    if (std::abs(row_sum) > kGeneratorTol)
      v.push_back("generator row not conservative for state '" +
                  raw.env_state_names[static_cast<std::size_t>(x)] + "' (sum " + fmt(row_sum) + ")");
  }
  if (!strongly_connected(raw.generator)) v.push_back("environment state space is reducible");

  if (raw.pi) {
    const auto& pi = *raw.pi;
    if ((pi.array() < 0.0).any()) v.push_back("pi has negative entries");
    if (std::abs(pi.sum() - 1.0) > kMassTol) v.push_back("pi does not sum to 1");
    double residual = (pi.transpose() * raw.generator).cwiseAbs().maxCoeff();
    if (residual > kStationaryTol)
      v.push_back("pi is not stationary for the generator (residual " + fmt(residual) + ")");
  }
  if (!(raw.mass_coverage > 0.0 && raw.mass_coverage <= 1.0))
    v.push_back("mass_coverage must lie in (0, 1]");

  for (const auto& rxn : raw.reactions) {
    bool all_zero = true;
    for (double r : rxn.rates) {
      if (!std::isfinite(r)) v.push_back("non-finite rate in reaction '" + rxn.text + "'");
      if (r < 0.0) v.push_back("negative rate in reaction '" + rxn.text + "'");
      if (r > 0.0) all_zero = false;
    }
    if (all_zero) v.push_back("rate table identically zero in reaction '" + rxn.text + "'");
    if (rxn.reactant == rxn.product)
      v.push_back("reactant and product identical in reaction '" + rxn.text + "'");
  }
  return v;
}

ModulatedNetwork validate_network(const RawModel& raw) {
  std::vector<std::string> v = structural_violations(raw);
  const int d = raw.species_count();

  ModulatedNetwork net;
  for (int i = 0; i < d; ++i) net.species.push_back({i, raw.species_names[static_cast<std::size_t>(i)]});
  net.env.state_names = raw.env_state_names;
  net.env.generator = raw.generator;
  net.env.pi = raw.pi;
  net.env.mass_coverage = raw.mass_coverage;

  std::set<std::tuple<int, int, int>> channels;  // (kind, source, target)
  std::vector<char> appears(static_cast<std::size_t>(std::max(d, 1)), 0);

  for (const auto& rxn : raw.reactions) {
    int reactant_total = 0, reactant_species = -1, reactant_kinds = 0;
    int product_total = 0, product_species = -1, product_kinds = 0;
    for (int i = 0; i < d; ++i) {
      if (rxn.reactant[static_cast<std::size_t>(i)] > 0) {
        appears[static_cast<std::size_t>(i)] = 1;
        reactant_total += rxn.reactant[static_cast<std::size_t>(i)];
        reactant_species = i;
        ++reactant_kinds;
      }
      if (rxn.product[static_cast<std::size_t>(i)] > 0) {
        appears[static_cast<std::size_t>(i)] = 1;
        product_total += rxn.product[static_cast<std::size_t>(i)];
        product_species = i;
        ++product_kinds;
      }
    }

    Reaction out;
    out.rate.values = rxn.rates;
    if (reactant_total == 0) {
      if (product_total == 0) {
        v.push_back("empty reaction '" + rxn.text + "'");
        continue;
      }
      if (product_kinds != 1) {
        v.push_back("production must create a single species type: '" + rxn.text + "'");
        continue;
      }
      out.kind = ReactionKind::Production;
      out.target = product_species;
      out.burst = product_total;
    } else if (reactant_total == 1) {
      if (product_total == 0) {
        out.kind = ReactionKind::Degradation;
        out.source = reactant_species;
      } else if (product_total == 1 && product_kinds == 1 && product_species != reactant_species) {
        out.kind = ReactionKind::Conversion;
        out.source = reactant_species;
        out.target = product_species;
      } else {
        v.push_back("product side not mono-molecular: '" + rxn.text + "'");
        continue;
      }
    } else {
      v.push_back(std::string(reactant_kinds > 1 ? "bimolecular reactant" : "multi-copy reactant") +
                  ": '" + rxn.text + "'");
      continue;
    }

    auto key = std::make_tuple(static_cast<int>(out.kind), out.source, out.target);
    if (!channels.insert(key).second) {
      v.push_back("duplicate reaction channel: '" + rxn.text + "'");
      continue;
    }
    net.reactions.push_back(std::move(out));
  }

  for (int i = 0; i < d; ++i)
    if (!appears[static_cast<std::size_t>(i)])
      v.push_back("species '" + raw.species_names[static_cast<std::size_t>(i)] +
                  "' appears in no reaction");

  if (!v.empty()) throw ValidationError(std::move(v));
  return net;
}

double ModulatedNetwork::production_rate(int j, int x) const {
  for (const auto& r : reactions)
    if (r.kind == ReactionKind::Production && r.target == j) return r.rate[x];
  return 0.0;
}

int ModulatedNetwork::burst(int j) const {
  for (const auto& r : reactions)
    if (r.kind == ReactionKind::Production && r.target == j) return r.burst;
  return 0;
}

double ModulatedNetwork::conversion_rate(int i, int j, int x) const {
  for (const auto& r : reactions)
    if (r.kind == ReactionKind::Conversion && r.source == i && r.target == j) return r.rate[x];
  return 0.0;
}

double ModulatedNetwork::degradation_rate(int i, int x) const {
  for (const auto& r : reactions)
    if (r.kind == ReactionKind::Degradation && r.source == i) return r.rate[x];
  return 0.0;
}

RawModel ModulatedNetwork::raw() const {
  RawModel out;
  for (const auto& s : species) out.species_names.push_back(s.name);
  out.env_state_names = env.state_names;
  out.generator = env.generator;
  out.pi = env.pi;
  out.mass_coverage = env.mass_coverage;
  const int d = species_count();
  for (const auto& r : reactions) {
    RawReaction rxn;
    rxn.reactant.assign(static_cast<std::size_t>(d), 0);
    rxn.product.assign(static_cast<std::size_t>(d), 0);
    rxn.rates = r.rate.values;
    switch (r.kind) {
      case ReactionKind::Production:
        rxn.product[static_cast<std::size_t>(r.target)] = r.burst;
        rxn.text = (r.burst != 1 ? std::to_string(r.burst) + " " : "") + species[static_cast<std::size_t>(r.target)].name;
        rxn.text = "0 -> " + rxn.text;
        break;
      case ReactionKind::Conversion:
        rxn.reactant[static_cast<std::size_t>(r.source)] = 1;
        rxn.product[static_cast<std::size_t>(r.target)] = 1;
        rxn.text = species[static_cast<std::size_t>(r.source)].name + " -> " +
                   species[static_cast<std::size_t>(r.target)].name;
        break;
      case ReactionKind::Degradation:
        rxn.reactant[static_cast<std::size_t>(r.source)] = 1;
        rxn.text = species[static_cast<std::size_t>(r.source)].name + " -> 0";
        break;
    }
    out.reactions.push_back(std::move(rxn));
  }
  return out;
}

Modulation build_modulation(const ModulatedNetwork& net) {
  const int d = net.species_count();
  const int m = net.env_count();
  Modulation mod;
  mod.A.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(d, d));
  mod.B.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(d));
  for (int x = 0; x < m; ++x) {
    auto& A = mod.A[static_cast<std::size_t>(x)];
    auto& B = mod.B[static_cast<std::size_t>(x)];
    for (const auto& r : net.reactions) {
      switch (r.kind) {
        case ReactionKind::Production:
          B(r.target) += r.rate[x];
          break;
        case ReactionKind::Conversion:
          A(r.target, r.source) += r.rate[x];
          A(r.source, r.source) -= r.rate[x];
          break;
        case ReactionKind::Degradation:
          A(r.source, r.source) -= r.rate[x];
          break;
      }
    }
  }
  return mod;
}

Eigen::VectorXd stationary_env(const EnvironmentSpec& env) {
  const int m = env.size();
  if (m == 1) return Eigen::VectorXd::Ones(1);
  // pi Q = 0 with the normalisation sum(pi) = 1 replacing one equation.
  Eigen::MatrixXd a = env.generator.transpose();
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw NumericError("stationary_env: singular system (reducible environment?)");
  Eigen::VectorXd pi = lu.solve(b);
  double residual = (pi.transpose() * env.generator).cwiseAbs().maxCoeff();
  if (residual > kStationaryTol || std::abs(pi.sum() - 1.0) > kMassTol || (pi.array() < -1e-14).any())
    throw NumericError("stationary_env: solution fails tolerance (residual " + std::to_string(residual) + ")");
  return pi.cwiseMax(0.0);
}

double mean_production(const ModulatedNetwork& net, const Eigen::VectorXd& pi) {
  double total = 0.0;
  for (int x = 0; x < net.env_count(); ++x) {
    double b = 0.0;
    for (const auto& r : net.reactions)
      if (r.kind == ReactionKind::Production) b += r.rate[x];
    total += b * pi(x);
  }
  return total;
}

}  // namespace envnet

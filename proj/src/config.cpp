#include "scatrel/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "scatrel/errors.hpp"

namespace scatrel {

namespace {

using json = nlohmann::ordered_json;

double get_number(const json& j, const std::string& block, const std::string& key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(block + "." + key + ": expected a number");
  return j[key].get<double>();
}

void check_keys(const json& j, const std::string& block,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(block + ": expected an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError(block + ": unknown field '" + item.key() + "'");
}

GridRange parse_range(const json& j, const std::string& block, GridRange fallback) {
  check_keys(j, block, {"lo", "hi", "count"});
  GridRange r = fallback;
  r.lo = get_number(j, block, "lo", r.lo);
  r.hi = get_number(j, block, "hi", r.hi);
  if (j.contains("count")) {
    if (!j["count"].is_number_integer())
      throw ConfigError(block + ".count: expected an integer");
    r.count = j["count"].get<int>();
  }
  if (r.count < 1) throw ConfigError(block + ".count: must be >= 1");
  if (r.count == 1 && r.lo != r.hi)
    throw ConfigError(block + ": a single-point range needs lo == hi");
  if (r.count > 1 && !(r.lo < r.hi))
    throw ConfigError(block + ": needs lo < hi");
  return r;
}

json range_json(const GridRange& r) {
  return json{{"lo", r.lo}, {"hi", r.hi}, {"count", r.count}};
}

} // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  check_keys(j, "config",
             {"potential", "lambda", "dimension", "omega", "z", "theta", "h_values",
              "tolerances", "output_dir", "seed"});

  RunConfig c;
  if (j.contains("potential")) {
    const auto& p = j["potential"];
    check_keys(p, "potential",
               {"kind", "amplitude", "width", "cutoff_radius", "smoothing", "rho",
                "table_path"});
    if (p.contains("kind")) {
      if (!p["kind"].is_string()) throw ConfigError("potential.kind: expected a string");
      c.potential.kind = p["kind"].get<std::string>();
      try {
        potential_kind_from_string(c.potential.kind);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("potential.kind: ") + e.what());
      }
    }
    c.potential.amplitude = get_number(p, "potential", "amplitude", c.potential.amplitude);
    c.potential.width = get_number(p, "potential", "width", c.potential.width);
    c.potential.cutoff_radius =
        get_number(p, "potential", "cutoff_radius", c.potential.cutoff_radius);
    c.potential.smoothing = get_number(p, "potential", "smoothing", c.potential.smoothing);
    c.potential.rho = get_number(p, "potential", "rho", c.potential.rho);
    if (p.contains("table_path")) {
      if (!p["table_path"].is_string())
        throw ConfigError("potential.table_path: expected a string");
      c.potential.table_path = p["table_path"].get<std::string>();
    }
  }

  c.lambda = get_number(j, "config", "lambda", c.lambda);
  if (!(c.lambda > 0.0)) throw ConfigError("lambda: must be > 0");
  if (j.contains("dimension")) {
    if (!j["dimension"].is_number_integer())
      throw ConfigError("dimension: expected an integer");
    c.dimension = j["dimension"].get<int>();
  }
  if (c.dimension != 2 && c.dimension != 3)
    throw ConfigError("dimension: must be 2 or 3");

  if (j.contains("omega")) c.omega = parse_range(j["omega"], "omega", c.omega);
  if (j.contains("z")) c.z = parse_range(j["z"], "z", c.z);
  if (j.contains("theta")) c.theta = parse_range(j["theta"], "theta", c.theta);

  if (j.contains("h_values")) {
    if (!j["h_values"].is_array() || j["h_values"].empty())
      throw ConfigError("h_values: expected a nonempty array");
    c.h_values.clear();
    for (const auto& v : j["h_values"]) {
      if (!v.is_number()) throw ConfigError("h_values: expected numbers");
      c.h_values.push_back(v.get<double>());
    }
  }
  for (size_t i = 0; i < c.h_values.size(); ++i) {
    if (!(c.h_values[i] > 0.0)) throw ConfigError("h_values: must be positive");
    if (i > 0 && !(c.h_values[i] < c.h_values[i - 1]))
      throw ConfigError("h_values: must be strictly decreasing");
  }

  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    check_keys(t, "tolerances", {"rel", "abs", "energy_budget"});
    c.tolerances.rel = get_number(t, "tolerances", "rel", c.tolerances.rel);
    c.tolerances.abs = get_number(t, "tolerances", "abs", c.tolerances.abs);
    c.tolerances.energy_budget =
        get_number(t, "tolerances", "energy_budget", c.tolerances.energy_budget);
    if (!(c.tolerances.rel > 0.0) || !(c.tolerances.abs > 0.0) ||
        !(c.tolerances.energy_budget > 0.0))
      throw ConfigError("tolerances: must be positive");
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir: expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    c.seed = j["seed"].get<unsigned>();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  json p{{"kind", c.potential.kind},
         {"amplitude", c.potential.amplitude},
         {"width", c.potential.width},
         {"cutoff_radius", c.potential.cutoff_radius},
         {"smoothing", c.potential.smoothing},
         {"rho", c.potential.rho}};
  if (!c.potential.table_path.empty()) p["table_path"] = c.potential.table_path;
  json j{{"potential", p},
         {"lambda", c.lambda},
         {"dimension", c.dimension},
         {"omega", range_json(c.omega)},
         {"z", range_json(c.z)},
         {"theta", range_json(c.theta)},
         {"h_values", c.h_values},
         {"tolerances",
          json{{"rel", c.tolerances.rel},
               {"abs", c.tolerances.abs},
               {"energy_budget", c.tolerances.energy_budget}}},
         {"output_dir", c.output_dir},
         {"seed", c.seed}};
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) {
  const std::string text = serialize_config(c);
  unsigned long long hash = 14695981039346656037ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", hash);
  return std::string(buf);
}

PotentialModel make_potential(const PotentialConfig& pc, int dimension) {
  switch (potential_kind_from_string(pc.kind)) {
    case PotentialKind::Zero:
      return PotentialModel::zero(dimension, pc.rho);
    case PotentialKind::Gaussian:
      return PotentialModel::gaussian(pc.amplitude, pc.width, dimension, pc.rho);
    case PotentialKind::CompactBump:
      return PotentialModel::compact_bump(pc.amplitude, pc.cutoff_radius, dimension,
                                          pc.rho);
    case PotentialKind::YukawaSmoothed:
      return PotentialModel::yukawa_smoothed(pc.amplitude, pc.width, pc.smoothing,
                                             dimension, pc.rho);
    case PotentialKind::RadialTabulated: {
      std::ifstream in(pc.table_path);
      if (!in) throw ConfigError("cannot open potential table: " + pc.table_path);
      std::vector<double> radii, values;
      double r, v;
      while (in >> r >> v) {
        radii.push_back(r);
        values.push_back(v);
      }
      return PotentialModel::radial_tabulated(std::move(radii), std::move(values),
                                              dimension, pc.rho);
    }
  }
  throw ConfigError("potential.kind: unknown kind " + pc.kind);
}

std::vector<double> grid_points(const GridRange& range) {
  std::vector<double> pts;
  if (range.count == 1) {
    pts.push_back(range.lo);
    return pts;
  }
  for (int i = 0; i < range.count; ++i)
    pts.push_back(range.lo + (range.hi - range.lo) * i / (range.count - 1));
  return pts;
}

} // namespace scatrel

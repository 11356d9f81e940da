#include "censtl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "censtl/format.hpp"

namespace censtl {

namespace pt = boost::property_tree;

namespace {

const std::vector<ConfigKey> kKeys = {
    {"data.train", "", "training trajectory CSV"},
    {"data.validation", "", "validation trajectory CSV (optional)"},
    {"data.split", "0.7", "training fraction of sessions when no validation file is given"},
    {"data.session_column", "session_id", "session column name"},
    {"data.agent_column", "agent_id", "agent column name"},
    {"data.time_column", "t", "time column name"},
    {"data.value_columns", "", "comma-separated value columns (default: all others)"},
    {"inner.template", "seq(p0,p1)", "task template"},
    {"inner.lambda1", "1", "frequency weight"},
    {"inner.lambda2", "1", "specificity weight"},
    {"inner.tau_limit", "12", "upper limit on the necessary length, seconds"},
    {"inner.halfplanes", "4", "half-planes per learned predicate"},
    {"inner.allow_nesting", "false", "accept nested templates"},
    {"inner.warm_start", "0.1", "fraction of particles starting on the a priori regions"},
    {"inner.bbox", "", "observation bounds xmin,ymin,xmax,ymax"},
    {"partition.relationship", "similarity", "similarity, complementarity or both"},
    {"partition.minsup", "0.2", "support threshold for frequent agents"},
    {"partition.fitness_threshold", "0.2", "minimum subgroup fitness"},
    {"partition.max_edge_size", "4", "largest complementarity hyperedge"},
    {"partition.epsilon", "1e-7", "variance regulariser"},
    {"partition.balance", "0", "fractional part-size slack per bisection"},
    {"outer.templates", "all", "comma-separated outer templates or 'all'"},
    {"outer.lambda1", "1", "cause frequency weight"},
    {"outer.lambda2", "1", "threshold weight"},
    {"outer.pair", "", "cause,effect subgroup numbers (1-based) for similarity"},
    {"pso.particles", "200", "swarm size"},
    {"pso.iterations", "100", "iterations"},
    {"pso.inertia", "0.729", "inertia weight"},
    {"pso.cognitive", "1.49445", "personal-best coefficient"},
    {"pso.social", "1.49445", "global-best coefficient"},
    {"run.seed", "1", "master seed"},
    {"run.output", "out", "output directory"},
    {"run.threads", "0", "worker cap (0: all cores)"},
};

bool is_region_key(const std::string& key) {
  if (key.rfind("regions.p", 0) != 0 || key.size() == 9) return false;
  return std::all_of(key.begin() + 9, key.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool known_key(const std::string& key) {
  if (is_region_key(key)) return true;
  return std::any_of(kKeys.begin(), kKeys.end(), [&](const ConfigKey& k) { return k.name == key; });
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::string str(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) {
      return std::string(trim(*v));
    }
    for (const auto& k : kKeys) {
      if (k.name == key) return k.default_value;
    }
    return {};
  }

  double real(const std::string& key) const {
    double v = 0.0;
    const std::string s = str(key);
    if (!parse_double(s, v)) throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
  }

  std::size_t count(const std::string& key) const {
    const double v = real(key);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ConfigError(key + ": expected a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed(const std::string& key) const {
    const std::string s = str(key);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an unsigned integer, got '" + s + "'");
    }
  }

  bool flag(const std::string& key) const {
    std::string s = str(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected true or false");
  }

 private:
  const pt::ptree& tree_;
};

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : body) {
      (void)value;
      const std::string full = section + "." + key;
      if (!known_key(full)) throw ConfigError("unknown config key '" + full + "'");
    }
  }
}

void check_weight(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a finite value >= 0");
}

PipelineConfig build(pt::ptree tree, const ConfigOverrides& overrides, const std::filesystem::path& base) {
  for (const auto& [key, value] : overrides) {
    if (!known_key(key)) throw ConfigError("unknown config key '" + key + "'");
    tree.put(pt::ptree::path_type(key, '.'), value);
  }
  check_keys(tree);
  const Reader r(tree);
  PipelineConfig c;

  c.train = resolve(r.str("data.train"), base);
  c.validation = resolve(r.str("data.validation"), base);
  c.split = r.real("data.split");
  if (!(c.split > 0.0 && c.split <= 1.0)) throw ConfigError("data.split must lie in (0, 1]");
  c.schema.session_column = r.str("data.session_column");
  c.schema.agent_column = r.str("data.agent_column");
  c.schema.time_column = r.str("data.time_column");
  for (auto part : split(r.str("data.value_columns"), ',')) {
    const auto name = trim(part);
    if (!name.empty()) c.schema.value_columns.emplace_back(name);
  }

  try {
    c.inner_template = inner::parse_template(r.str("inner.template"));
  } catch (const inner::InnerError& e) {
    throw ConfigError(std::string("inner.template: ") + e.what());
  }
  c.inner.lambda1 = r.real("inner.lambda1");
  c.inner.lambda2 = r.real("inner.lambda2");
  check_weight(c.inner.lambda1, "inner.lambda1");
  check_weight(c.inner.lambda2, "inner.lambda2");
  c.inner.tau_limit = r.real("inner.tau_limit");
  if (!(c.inner.tau_limit > 0.0)) throw ConfigError("inner.tau_limit must be positive");
  c.inner.halfplanes = r.count("inner.halfplanes");
  if (c.inner.halfplanes == 0) throw ConfigError("inner.halfplanes must be at least 1");
  c.inner.allow_nesting = r.flag("inner.allow_nesting");
  c.inner.warm_start = r.real("inner.warm_start");
  if (!(c.inner.warm_start >= 0.0 && c.inner.warm_start <= 1.0)) {
    throw ConfigError("inner.warm_start must lie in [0, 1]");
  }
  if (inner::is_nested(c.inner_template) && !c.inner.allow_nesting) {
    throw ConfigError("inner.template is nested; set inner.allow_nesting = true");
  }
  const std::string bbox = r.str("inner.bbox");
  if (!bbox.empty()) c.inner.bbox = parse_box(bbox);

  const std::size_t slots = inner::predicate_slots(c.inner_template);
  for (std::size_t i = 0; i < slots; ++i) {
    const std::string key = "regions.p" + std::to_string(i);
    const std::string text = r.str(key);
    if (text.empty()) continue;
    try {
      c.inner.apriori.push_back(parse_polygon(text));
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (!c.inner.apriori.empty() && c.inner.apriori.size() != slots) {
    throw ConfigError("regions: expected one region per predicate slot (" + std::to_string(slots) + ")");
  }

  const std::string rel = r.str("partition.relationship");
  if (rel == "both") {
    c.relationships = {partition::Relationship::Similarity, partition::Relationship::Complementarity};
  } else {
    c.relationships = {parse_relationship(rel)};
  }
  c.partition.minsup = r.real("partition.minsup");
  if (!(c.partition.minsup > 0.0 && c.partition.minsup < 1.0)) throw ConfigError("partition.minsup must lie in (0, 1)");
  c.partition.fitness_threshold = r.real("partition.fitness_threshold");
  c.partition.max_edge_size = r.count("partition.max_edge_size");
  if (c.partition.max_edge_size < 2) throw ConfigError("partition.max_edge_size must be at least 2");
  c.partition.epsilon = r.real("partition.epsilon");
  if (!(c.partition.epsilon > 0.0)) throw ConfigError("partition.epsilon must be positive");
  c.partition.balance = r.real("partition.balance");
  check_weight(c.partition.balance, "partition.balance");

  const std::string templates = r.str("outer.templates");
  try {
    if (templates == "all") {
      const auto all = outer::all_outer_templates();
      c.outer_templates.assign(all.begin(), all.end());
    } else {
      for (auto part : split(templates, ',')) c.outer_templates.push_back(outer::parse_template_kind(part));
    }
  } catch (const outer::OuterError& e) {
    throw ConfigError(std::string("outer.templates: ") + e.what());
  }
  if (c.outer_templates.empty()) throw ConfigError("outer.templates is empty");
  c.outer.lambda1 = r.real("outer.lambda1");
  c.outer.lambda2 = r.real("outer.lambda2");
  check_weight(c.outer.lambda1, "outer.lambda1");
  check_weight(c.outer.lambda2, "outer.lambda2");
  const std::string pair = r.str("outer.pair");
  if (!pair.empty()) {
    const auto parts = split(pair, ',');
    double a = 0.0;
    double b = 0.0;
    if (parts.size() != 2 || !parse_double(trim(parts[0]), a) || !parse_double(trim(parts[1]), b) || a < 1.0 ||
        b < 1.0 || a != std::floor(a) || b != std::floor(b)) {
      throw ConfigError("outer.pair: expected two subgroup numbers such as 1,2");
    }
    c.outer.pair = std::make_pair(static_cast<std::size_t>(a) - 1, static_cast<std::size_t>(b) - 1);
  }

  c.pso.num_particles = r.count("pso.particles");
  c.pso.num_iterations = r.count("pso.iterations");
  if (c.pso.num_particles == 0) throw ConfigError("pso.particles must be at least 1");
  c.pso.inertia = r.real("pso.inertia");
  c.pso.cognitive = r.real("pso.cognitive");
  c.pso.social = r.real("pso.social");
  check_weight(c.pso.inertia, "pso.inertia");
  check_weight(c.pso.cognitive, "pso.cognitive");
  check_weight(c.pso.social, "pso.social");

  c.seed = r.seed("run.seed");
  c.output = resolve(r.str("run.output"), base);
  c.threads = r.count("run.threads");
  c.pso.seed = c.seed;
  c.inner.pso = c.pso;
  c.outer.pso = c.pso;
  return c;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() { return kKeys; }

PipelineConfig parse_config(std::istream& in, const ConfigOverrides& overrides, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  return build(std::move(tree), overrides, base_dir);
}

PipelineConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, overrides, path.parent_path());
}

PipelineConfig config_from_overrides(const ConfigOverrides& overrides) { return build({}, overrides, {}); }

geometry::Polygon parse_polygon(const std::string& text) {
  std::vector<geometry::Point2> pts;
  for (auto vertex : split(text, ',')) {
    std::istringstream in{std::string(trim(vertex))};
    std::string xs;
    std::string ys;
    std::string extra;
    in >> xs >> ys;
    double x = 0.0;
    double y = 0.0;
    if (!parse_double(xs, x) || !parse_double(ys, y) || (in >> extra)) {
      throw ConfigError("expected vertices as 'x y, x y, ...', got '" + std::string(trim(vertex)) + "'");
    }
    pts.push_back({x, y});
  }
  if (pts.size() < 3) throw ConfigError("a region needs at least three vertices");
  try {
    return geometry::make_convex_polygon(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

geometry::Box parse_box(const std::string& text) {
  const auto parts = split(text, ',');
  double v[4] = {};
  if (parts.size() != 4) throw ConfigError("inner.bbox: expected xmin,ymin,xmax,ymax");
  for (std::size_t i = 0; i < 4; ++i) {
    if (!parse_double(trim(parts[i]), v[i])) throw ConfigError("inner.bbox: bad number '" + std::string(parts[i]) + "'");
  }
  if (!(v[0] < v[2] && v[1] < v[3])) throw ConfigError("inner.bbox: need xmin < xmax and ymin < ymax");
  return {v[0], v[1], v[2], v[3]};
}

partition::Relationship parse_relationship(const std::string& text) {
  if (text == "similarity") return partition::Relationship::Similarity;
  if (text == "complementarity") return partition::Relationship::Complementarity;
  throw ConfigError("relationship must be similarity, complementarity or both, got '" + text + "'");
}

std::string relationship_name(partition::Relationship r) {
  return r == partition::Relationship::Similarity ? "similarity" : "complementarity";
}

}  // namespace censtl

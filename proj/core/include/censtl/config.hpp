#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "censtl/infer_inner.hpp"
#include "censtl/infer_outer.hpp"
#include "censtl/partition.hpp"
#include "censtl/trajdata.hpp"

namespace censtl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PipelineConfig {
  std::filesystem::path train;
  /// Empty: hold out the last sessions of `train` according to `split`.
  std::filesystem::path validation;
  /// Fraction of sessions used for training when no validation file is given.
  double split = 0.7;
  CsvSchema schema;

  inner::TaskTemplate inner_template;
  inner::InnerConfig inner;

  std::vector<partition::Relationship> relationships{partition::Relationship::Similarity};
  partition::PartitionConfig partition;

  std::vector<outer::OuterTemplateKind> outer_templates;
  outer::OuterConfig outer;

  pso::PSOConfig pso;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  std::size_t threads = 0;
};

/// "section.key" -> value.
using ConfigOverrides = std::map<std::string, std::string>;

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every recognised key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// INI text; relative paths resolve against `base_dir`.
PipelineConfig parse_config(std::istream& in, const ConfigOverrides& overrides = {},
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
/// Defaults plus overrides, no file.
PipelineConfig config_from_overrides(const ConfigOverrides& overrides);

/// Parses "x y, x y, ..." into a convex polygon.
geometry::Polygon parse_polygon(const std::string& text);
/// Parses "xmin,ymin,xmax,ymax".
geometry::Box parse_box(const std::string& text);
partition::Relationship parse_relationship(const std::string& text);
std::string relationship_name(partition::Relationship r);

}  // namespace censtl

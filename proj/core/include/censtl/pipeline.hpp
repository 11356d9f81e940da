#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "censtl/census.hpp"
#include "censtl/config.hpp"

namespace censtl {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInfeasible = 4;

/// Maps a pipeline exception to its exit code (1 for anything unexpected).
int exit_code_for(const std::exception& e);

struct DataSplit {
  Dataset train;
  std::optional<Dataset> validation;
};

/// Loads the training file and either the validation file or a session split.
DataSplit load_data(const PipelineConfig& cfg);

inner::InnerResult run_inner_stage(const PipelineConfig& cfg, const Dataset& train);

struct PartitionStage {
  partition::Relationship relationship = partition::Relationship::Similarity;
  partition::Hypergraph graph;
  partition::PartitionResult result;
  /// Subgroup names and sizes, in result order.
  std::vector<outer::Subgroup> subgroups;
  /// Agent ids per subgroup.
  std::vector<std::vector<std::string>> members;
};

PartitionStage run_partition_stage(const PipelineConfig& cfg, const census::SignatureMatrix& sig,
                                   partition::Relationship relationship);

/// Per-session census signals of the stage's subgroups; agents are matched by id.
std::vector<stl::CountSignal> census_signals(const census::SignatureMatrix& sig, const PartitionStage& stage);

struct OuterStage {
  std::vector<outer::Candidate> candidates;
  std::vector<std::optional<outer::Accuracy>> validation;
};

OuterStage run_outer_stage(const PipelineConfig& cfg, const PartitionStage& stage,
                           const std::vector<stl::CountSignal>& train,
                           const std::vector<stl::CountSignal>* validation);

/// Runs every stage and writes the report bundle into cfg.output. Stage
/// wall-times go to `log`; errors propagate.
void run_pipeline_or_throw(const PipelineConfig& cfg, std::ostream& log);

/// As above, reporting errors on `err` and returning the exit code.
int run_pipeline(const PipelineConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace censtl

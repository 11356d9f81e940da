#include "censtl/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "censtl/format.hpp"
#include "censtl/parallel.hpp"

namespace censtl {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string suffix(const PipelineConfig& cfg, partition::Relationship r) {
  return cfg.relationships.size() > 1 ? "_" + relationship_name(r) : std::string();
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fixed(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return format_double(std::round(v * scale) / scale);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const partition::PartitionError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const census::CensusError*>(&e)) return kExitData;
  if (dynamic_cast<const inner::InnerError*>(&e) || dynamic_cast<const outer::OuterError*>(&e)) {
    return kExitInfeasible;
  }
  if (dynamic_cast<const stl::StlError*>(&e)) return kExitConfig;
  return 1;
}

DataSplit load_data(const PipelineConfig& cfg) {
  if (cfg.train.empty()) throw ConfigError("data.train is not set");
  Dataset all = load_dataset(cfg.train, cfg.schema);
  if (!cfg.validation.empty()) {
    return {std::move(all), load_dataset(cfg.validation, cfg.schema)};
  }
  const std::size_t q = all.num_sessions();
  auto n_train = static_cast<std::size_t>(std::lround(cfg.split * static_cast<double>(q)));
  n_train = std::clamp<std::size_t>(n_train, 1, q);
  if (n_train == q) return {std::move(all), std::nullopt};
  std::vector<std::size_t> train(n_train);
  std::vector<std::size_t> valid(q - n_train);
  std::iota(train.begin(), train.end(), 0);
  std::iota(valid.begin(), valid.end(), n_train);
  return {all.select_sessions(train), all.select_sessions(valid)};
}

inner::InnerResult run_inner_stage(const PipelineConfig& cfg, const Dataset& train) {
  const std::size_t slots = inner::predicate_slots(cfg.inner_template);
  if (cfg.inner.apriori.size() != slots) {
    throw ConfigError("inner.template has " + std::to_string(slots) + " predicate slots; set regions.p0..regions.p" +
                      std::to_string(slots - 1));
  }
  if (!(cfg.inner.bbox.xmin < cfg.inner.bbox.xmax && cfg.inner.bbox.ymin < cfg.inner.bbox.ymax)) {
    throw ConfigError("inner.bbox is not set");
  }
  if (train.dimension() != 2) throw ConfigError("learned regions need two value columns");
  inner::InnerConfig ic = cfg.inner;
  ic.pso.seed = derive_seed(cfg.seed, "inner");
  return inner::infer_inner(train, cfg.inner_template, ic);
}

PartitionStage run_partition_stage(const PipelineConfig& cfg, const census::SignatureMatrix& sig,
                                   partition::Relationship relationship) {
  PartitionStage st;
  st.relationship = relationship;
  partition::PartitionConfig pc = cfg.partition;
  pc.relationship = relationship;
  st.graph = partition::build_hypergraph(sig, pc);
  st.result = partition::select_num_subgroups(st.graph, pc);
  for (std::size_t i = 0; i < st.result.subgroups.size(); ++i) {
    const auto& g = st.result.subgroups[i];
    st.subgroups.push_back({"S" + std::to_string(i + 1), static_cast<int>(g.size())});
    std::vector<std::string> ids;
    for (std::size_t a : g) ids.push_back(sig.agents()[a]);
    st.members.push_back(std::move(ids));
  }
  return st;
}

std::vector<stl::CountSignal> census_signals(const census::SignatureMatrix& sig, const PartitionStage& stage) {
  std::vector<std::string> names;
  std::vector<census::CensusTrajectory> censuses;
  for (std::size_t i = 0; i < stage.subgroups.size(); ++i) {
    names.push_back(stage.subgroups[i].name);
    censuses.push_back(census::census(sig, sig.resolve(stage.members[i])));
  }
  std::vector<stl::CountSignal> out;
  for (std::size_t q = 0; q < sig.num_sessions(); ++q) out.push_back(census::count_signal(sig, names, censuses, q));
  return out;
}

OuterStage run_outer_stage(const PipelineConfig& cfg, const PartitionStage& stage,
                           const std::vector<stl::CountSignal>& train,
                           const std::vector<stl::CountSignal>* validation) {
  if (stage.subgroups.empty()) throw outer::OuterError("partitioning produced no subgroups");
  outer::OuterConfig oc = cfg.outer;
  oc.pso.seed = derive_seed(cfg.seed, "outer/" + relationship_name(stage.relationship));
  OuterStage st;
  st.candidates = outer::infer_outer(train, stage.subgroups, stage.relationship, cfg.outer_templates, oc);
  for (const auto& c : st.candidates) {
    if (validation && !validation->empty()) {
      st.validation.push_back(outer::validate(c.instance.cause, c.instance.effect, *validation));
    } else {
      st.validation.push_back(std::nullopt);
    }
  }
  return st;
}

void run_pipeline_or_throw(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.threads > 0) set_max_threads(cfg.threads);
  const DataSplit data = load_data(cfg);
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw DataError("cannot create output directory " + cfg.output.string() + ": " + ec.message());

  Stopwatch inner_clock;
  const inner::InnerResult inner = run_inner_stage(cfg, data.train);
  {
    auto out = open_output(cfg.output / "inner_report.csv");
    inner::write_inner_report(inner, cfg.inner, out);
    auto formula = open_output(cfg.output / "inner_formula.stl");
    formula << stl::format_formula(inner.best.phi) << '\n';
  }
  log << "inner stage: " << fixed(inner_clock.seconds(), 2) << " s\n";

  Stopwatch partition_clock;
  const census::SignatureMatrix sig = census::signatures(inner.best.phi, data.train);
  std::optional<census::SignatureMatrix> vsig;
  if (data.validation) vsig = census::signatures(inner.best.phi, *data.validation);
  {
    auto out = open_output(cfg.output / "signatures.csv");
    census::write_signatures_csv(sig, out);
  }
  std::vector<PartitionStage> stages;
  for (auto rel : cfg.relationships) {
    stages.push_back(run_partition_stage(cfg, sig, rel));
    const auto& st = stages.back();
    const std::string sfx = suffix(cfg, rel);
    auto graph = open_output(cfg.output / ("hypergraph" + sfx + ".txt"));
    partition::write_hypergraph(st.graph, graph);
    auto report = open_output(cfg.output / ("partition_report" + sfx + ".csv"));
    partition::write_partition_report(st.result, sig.agents(), report);
    std::vector<std::string> names;
    std::vector<census::CensusTrajectory> censuses;
    for (std::size_t i = 0; i < st.subgroups.size(); ++i) {
      names.push_back(st.subgroups[i].name);
      censuses.push_back(census::census(sig, st.result.subgroups[i]));
    }
    auto cen = open_output(cfg.output / ("census" + sfx + ".csv"));
    census::write_census_csv(sig, names, censuses, cen);
  }
  log << "partition stage: " << fixed(partition_clock.seconds(), 2) << " s\n";

  Stopwatch outer_clock;
  std::vector<OuterStage> outers;
  for (const auto& st : stages) {
    const auto train = census_signals(sig, st);
    std::vector<stl::CountSignal> valid;
    if (vsig) valid = census_signals(*vsig, st);
    outers.push_back(run_outer_stage(cfg, st, train, vsig ? &valid : nullptr));
    const std::string sfx = suffix(cfg, st.relationship);
    auto report = open_output(cfg.output / ("outer_report" + sfx + ".csv"));
    outer::write_outer_report(outers.back().candidates, outers.back().validation, report);
    auto formulas = open_output(cfg.output / ("outer_formulas" + sfx + ".txt"));
    for (const auto& c : outers.back().candidates) formulas << stl::format_formula(c.instance.gamma) << '\n';
  }
  log << "outer stage: " << fixed(outer_clock.seconds(), 2) << " s\n";

  auto summary = open_output(cfg.output / "summary.txt");
  summary << "training sessions: " << data.train.num_sessions() << '\n';
  summary << "validation sessions: " << (data.validation ? data.validation->num_sessions() : 0) << '\n';
  summary << "inner formula: " << stl::format_formula(inner.best.phi) << '\n';
  summary << "necessary length: " << format_double(inner.best.length) << '\n';
  summary << "inner cost: " << format_double(inner.cost.total) << '\n';
  for (std::size_t i = 0; i < inner.cost.hausdorff.size(); ++i) {
    summary << "hausdorff p" << i << ": " << format_double(inner.cost.hausdorff[i]) << '\n';
  }
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& st = stages[s];
    summary << '\n' << relationship_name(st.relationship) << " partition:\n";
    for (std::size_t i = 0; i < st.subgroups.size(); ++i) {
      summary << "  " << st.subgroups[i].name << " = {";
      for (std::size_t k = 0; k < st.members[i].size(); ++k) summary << (k ? ", " : "") << st.members[i][k];
      summary << "} fitness " << format_double(st.result.fitness[i]) << '\n';
    }
    if (!st.result.excluded.empty()) {
      summary << "  excluded = {";
      for (std::size_t k = 0; k < st.result.excluded.size(); ++k) {
        summary << (k ? ", " : "") << sig.agents()[st.result.excluded[k]];
      }
      summary << "}\n";
    }
    const auto& best = outers[s].candidates.front();
    summary << "  best outer formula: " << stl::format_formula(best.instance.gamma) << '\n';
    summary << "  p = " << format_double(best.acc.p) << " (" << best.acc.m_ce << '/' << best.acc.m_c << ")\n";
    if (const auto& v = outers[s].validation.front()) {
      summary << "  p_v = " << format_double(v->p) << " (" << v->m_ce << '/' << v->m_c << ")\n";
    }
  }
}

int run_pipeline(const PipelineConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    run_pipeline_or_throw(cfg, log);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace censtl

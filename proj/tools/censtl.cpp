#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "censtl/census.hpp"
#include "censtl/config.hpp"
#include "censtl/format.hpp"
#include "censtl/parallel.hpp"
#include "censtl/pipeline.hpp"

namespace fs = std::filesystem;
using namespace censtl;

namespace {

constexpr int kMaxRegionFlags = 8;

struct ConfigFlags {
  std::string path;
  std::map<std::string, std::string> values;
  std::size_t threads = 0;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", path, "INI config file");
    app.add_option("--threads", threads, "cap on worker threads (0: all cores)");
    for (const auto& key : config_keys()) {
      app.add_option("--" + key.name, values[key.name], key.help)->group("Config overrides");
    }
    for (int i = 0; i < kMaxRegionFlags; ++i) {
      const std::string key = "regions.p" + std::to_string(i);
      app.add_option("--" + key, values[key], "a priori region for slot p" + std::to_string(i) + " as 'x y, x y, ...'")
          ->group("Config overrides");
    }
  }

  PipelineConfig load() const {
    ConfigOverrides overrides;
    for (const auto& [k, v] : values) {
      if (!v.empty()) overrides[k] = v;
    }
    PipelineConfig cfg = path.empty() ? config_from_overrides(overrides) : load_config(path, overrides);
    if (threads > 0) cfg.threads = threads;
    if (cfg.threads > 0) set_max_threads(cfg.threads);
    return cfg;
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::string read_text(const std::string& text_or_path) {
  std::error_code ec;
  if (fs::is_regular_file(text_or_path, ec)) {
    std::ifstream in(text_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::string(trim(ss.str()));
  }
  return text_or_path;
}

std::vector<stl::CountSignal> read_census_file(const std::string& path, double step) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open census file " + path);
  return census::read_census_csv(in, step);
}

// Subgroup names and sizes from a partition report.
std::vector<outer::Subgroup> read_subgroups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partition report " + path);
  std::vector<outer::Subgroup> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto fields = split(line, ',');
    if (fields.size() < 3 || trim(fields[0]) == "excluded") continue;
    int size = 0;
    for (auto m : split(trim(fields[1]), ' ')) size += trim(m).empty() ? 0 : 1;
    out.push_back({std::string(trim(fields[0])), size});
  }
  return out;
}

void split_outer(const stl::OuterFormula& gamma, stl::OuterFormula& cause, stl::OuterFormula& effect) {
  const stl::OuterFormula* f = &gamma;
  if (f->op() == stl::Op::Always) f = &f->child(0);
  if (f->op() != stl::Op::Implies) {
    throw ConfigError("expected an outer formula of the form G[0,T)(cause => effect) or cause => effect");
  }
  cause = f->child(0);
  effect = f->child(1);
}

int guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CensusSTL specification inference"};
  app.require_subcommand(1);

  ConfigFlags pipeline_flags;
  auto* pipeline = app.add_subcommand("pipeline", "run inner inference, partitioning and outer inference");
  pipeline_flags.attach(*pipeline);

  ConfigFlags inner_flags;
  auto* infer_inner = app.add_subcommand("infer-inner", "learn the inner task formula");
  inner_flags.attach(*infer_inner);

  ConfigFlags part_flags;
  std::string part_formula;
  auto* part = app.add_subcommand("partition", "signatures, hypergraph and subgroups for an inner formula");
  part_flags.attach(*part);
  part->add_option("--formula", part_formula, "inner formula text or file (default: <output>/inner_formula.stl)");

  ConfigFlags outer_flags;
  std::string outer_census;
  std::string outer_valid;
  std::string outer_partition;
  auto* infer_outer = app.add_subcommand("infer-outer", "learn outer formulas from census trajectories");
  outer_flags.attach(*infer_outer);
  infer_outer->add_option("--census", outer_census, "training census CSV")->required();
  infer_outer->add_option("--validation-census", outer_valid, "validation census CSV");
  infer_outer->add_option("--partition-report", outer_partition, "partition report with subgroup members")
      ->required();

  std::string val_formula;
  std::string val_census;
  double val_step = 1.0;
  auto* validate = app.add_subcommand("validate", "accuracy of an outer formula on census data");
  validate->add_option("--formula", val_formula, "outer formula text or file")->required();
  validate->add_option("--census", val_census, "census CSV")->required();
  validate->add_option("--step", val_step, "sampling step of the census");

  std::string mon_formula;
  std::string mon_data;
  std::string mon_census;
  std::string mon_agent;
  std::string mon_session;
  double mon_step = 1.0;
  auto* monitor = app.add_subcommand("monitor", "robustness series of a formula on one trace");
  monitor->add_option("--formula", mon_formula, "formula text or file")->required();
  auto* mon_data_opt = monitor->add_option("--data", mon_data, "trajectory CSV (inner formula)");
  auto* mon_census_opt = monitor->add_option("--census", mon_census, "census CSV (outer formula)");
  mon_data_opt->excludes(mon_census_opt);
  monitor->add_option("--agent", mon_agent, "agent id (trajectory data)");
  monitor->add_option("--session", mon_session, "session id (default: first)");
  monitor->add_option("--step", mon_step, "census sampling step");

  FurnitureOptions gen;
  gen.num_sessions = 10;
  std::size_t gen_block = 40;
  std::size_t gen_offset = 20;
  std::string gen_out;
  auto* gen_data = app.add_subcommand("gen-data", "generate furniture-moving trajectories");
  gen_data->add_option("--agents", gen.num_agents, "number of agents (at most 8 with the built-in schedule)");
  gen_data->add_option("--points", gen.num_points, "samples per session");
  gen_data->add_option("--sessions", gen.num_sessions, "number of sessions");
  gen_data->add_option("--step", gen.step, "sampling step");
  gen_data->add_option("--noise", gen.noise, "position noise standard deviation");
  gen_data->add_option("--seed", gen.seed, "noise seed");
  gen_data->add_option("--block", gen_block, "schedule block length, samples");
  gen_data->add_option("--offset", gen_offset, "first block start, samples");
  gen_data->add_option("-o,--out", gen_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  if (*pipeline) {
    return guarded([&] {
      const auto cfg = pipeline_flags.load();
      run_pipeline_or_throw(cfg, std::cout);
      std::cout << "reports written to " << cfg.output.string() << '\n';
    });
  }

  if (*infer_inner) {
    return guarded([&] {
      const auto cfg = inner_flags.load();
      const auto data = load_data(cfg);
      const auto result = run_inner_stage(cfg, data.train);
      fs::create_directories(cfg.output);
      auto report = open_out(cfg.output / "inner_report.csv");
      inner::write_inner_report(result, cfg.inner, report);
      auto formula = open_out(cfg.output / "inner_formula.stl");
      formula << stl::format_formula(result.best.phi) << '\n';
      std::cout << stl::format_formula(result.best.phi) << '\n';
    });
  }

  if (*part) {
    return guarded([&] {
      const auto cfg = part_flags.load();
      const auto data = load_data(cfg);
      const std::string text =
          read_text(part_formula.empty() ? (cfg.output / "inner_formula.stl").string() : part_formula);
      stl::ParseOptions po;
      po.dimension = data.train.dimension();
      const auto phi = stl::parse_inner(text, {}, po);
      const auto sig = census::signatures(phi, data.train);
      fs::create_directories(cfg.output);
      auto sig_out = open_out(cfg.output / "signatures.csv");
      census::write_signatures_csv(sig, sig_out);
      for (auto rel : cfg.relationships) {
        const auto st = run_partition_stage(cfg, sig, rel);
        const std::string sfx = cfg.relationships.size() > 1 ? "_" + relationship_name(rel) : "";
        auto graph = open_out(cfg.output / ("hypergraph" + sfx + ".txt"));
        partition::write_hypergraph(st.graph, graph);
        auto report = open_out(cfg.output / ("partition_report" + sfx + ".csv"));
        partition::write_partition_report(st.result, sig.agents(), report);
        std::vector<std::string> names;
        std::vector<census::CensusTrajectory> censuses;
        for (std::size_t i = 0; i < st.subgroups.size(); ++i) {
          names.push_back(st.subgroups[i].name);
          censuses.push_back(census::census(sig, st.result.subgroups[i]));
        }
        auto cen = open_out(cfg.output / ("census" + sfx + ".csv"));
        census::write_census_csv(sig, names, censuses, cen);
        partition::write_partition_report(st.result, sig.agents(), std::cout);
      }
    });
  }

  if (*infer_outer) {
    return guarded([&] {
      const auto cfg = outer_flags.load();
      if (cfg.relationships.size() != 1) throw ConfigError("infer-outer needs a single partition.relationship");
      auto train = read_census_file(outer_census, 1.0);
      if (train.empty()) throw DataError("census file " + outer_census + " has no rows");
      PartitionStage stage;
      stage.relationship = cfg.relationships.front();
      stage.subgroups = read_subgroups(outer_partition);
      std::vector<stl::CountSignal> valid;
      if (!outer_valid.empty()) valid = read_census_file(outer_valid, 1.0);
      const auto st = run_outer_stage(cfg, stage, train, outer_valid.empty() ? nullptr : &valid);
      fs::create_directories(cfg.output);
      auto report = open_out(cfg.output / "outer_report.csv");
      outer::write_outer_report(st.candidates, st.validation, report);
      auto formulas = open_out(cfg.output / "outer_formulas.txt");
      for (const auto& c : st.candidates) formulas << stl::format_formula(c.instance.gamma) << '\n';
      outer::write_outer_report(st.candidates, st.validation, std::cout);
    });
  }

  if (*validate) {
    return guarded([&] {
      const auto gamma = stl::parse_outer(read_text(val_formula));
      stl::OuterFormula cause;
      stl::OuterFormula effect;
      split_outer(gamma, cause, effect);
      const auto census = read_census_file(val_census, val_step);
      const auto acc = outer::validate(cause, effect, census);
      std::cout << "p_v,mv_ce,mv_c\n" << format_double(acc.p) << ',' << acc.m_ce << ',' << acc.m_c << '\n';
    });
  }

  if (*monitor) {
    return guarded([&] {
      const std::string text = read_text(mon_formula);
      auto emit = [](const std::vector<double>& rob, const stl::TimeDomain& dom, const TimeGrid& grid) {
        if (dom.empty()) {
          std::cerr << "warning: formula window exceeds the trace; no evaluable points\n";
          return;
        }
        std::cout << "t,robustness,satisfied\n";
        for (std::size_t i = 0; i < rob.size(); ++i) {
          const auto idx = static_cast<std::size_t>(dom.first) + i;
          std::cout << format_double(grid.point(idx)) << ',' << format_double(rob[i]) << ',' << (rob[i] > 0 ? 1 : 0)
                    << '\n';
        }
      };
      if (!mon_census.empty()) {
        const auto phi = stl::parse_outer(text);
        const auto census = read_census_file(mon_census, mon_step);
        if (census.empty()) throw DataError("census file " + mon_census + " has no rows");
        std::size_t q = 0;
        if (!mon_session.empty()) {
          std::ifstream in(mon_census);
          std::string line;
          std::vector<std::string> ids;
          std::getline(in, line);
          while (std::getline(in, line)) {
            const std::string id(trim(split(line, ',').front()));
            if (!id.empty() && (ids.empty() || ids.back() != id)) ids.push_back(id);
          }
          const auto it = std::find(ids.begin(), ids.end(), mon_session);
          if (it == ids.end()) throw DataError("unknown session " + mon_session);
          q = static_cast<std::size_t>(it - ids.begin());
        }
        const auto dom = stl::time_domain(phi, census[q].grid);
        emit(dom.empty() ? std::vector<double>{} : stl::robustness_series(phi, census[q]), dom, census[q].grid);
        return;
      }
      if (mon_data.empty()) throw ConfigError("monitor needs --data or --census");
      const Dataset data = load_dataset(mon_data);
      stl::ParseOptions po;
      po.dimension = data.dimension();
      const auto phi = stl::parse_inner(text, {}, po);
      const auto agent = mon_agent.empty() ? std::optional<std::size_t>(0) : data.agent_index(mon_agent);
      if (!agent) throw DataError("unknown agent " + mon_agent);
      const auto session = mon_session.empty() ? std::optional<std::size_t>(0) : data.session_index(mon_session);
      if (!session) throw DataError("unknown session " + mon_session);
      const auto& x = data.trajectory(*agent, *session);
      const auto dom = stl::time_domain(phi, x.grid());
      emit(dom.empty() ? std::vector<double>{} : stl::robustness_series(phi, x), dom, x.grid());
    });
  }

  if (*gen_data) {
    return guarded([&] {
      auto pattern = two_crew_pattern();
      if (gen.num_agents > pattern.size()) {
        throw ConfigError("the built-in schedule covers at most " + std::to_string(pattern.size()) + " agents");
      }
      if (gen_block == 0 || gen_offset >= gen.num_points) throw ConfigError("block must be positive and offset inside the trace");
      pattern.resize(gen.num_agents);
      const std::size_t blocks = (gen.num_points - gen_offset) / gen_block;
      gen.schedule = block_schedule(pattern, gen_block, gen_offset, blocks);
      const auto scenario = generate_furniture_dataset(gen);
      auto out = open_out(gen_out);
      save_dataset(scenario.dataset, out);
      std::cout << "wrote " << gen.num_sessions << " sessions of " << gen.num_agents << " agents to " << gen_out
                << '\n';
    });
  }
  return 0;
}

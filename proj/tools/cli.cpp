#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "pidlab/config.hpp"
#include "pidlab/evalkit.hpp"
#include "pidlab/kernels.hpp"
#include "pidlab/mtl.hpp"
#include "pidlab/parallel.hpp"
#include "pidlab/plot.hpp"
#include "pidlab/search.hpp"
#include "pidlab/stability.hpp"
#include "pidlab/validator.hpp"

#ifndef PIDLAB_VERSION
#define PIDLAB_VERSION "0.0.0"
#endif

namespace pidlab::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Flags that override config keys. Unset flags leave the file's values alone.
struct Overrides {
  std::optional<std::string> oracle;
  std::optional<std::size_t> window;
  std::optional<int> repeats;
  std::optional<std::uint64_t> oracle_seed;
  std::optional<std::string> algorithm;
  std::optional<std::uint64_t> budget;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << data;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

fs::path metadata_path(const fs::path& out) {
  fs::path meta = out;
  meta.replace_extension(".json");
  if (meta == out) meta += ".meta.json";
  return meta;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Json space_json(const ParamSpace& s) {
  const auto axis = [](const GridAxis& a) {
    return Json{{"min", a.min}, {"max", a.max}, {"step", a.step}, {"size", a.size()}};
  };
  return Json{{"p", axis(s.p)}, {"i", axis(s.i)}, {"d", axis(s.d)}};
}

Json run_metadata(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["tool"] = "pidlab";
  j["version"] = PIDLAB_VERSION;
  j["command"] = command;
  j["config_hash"] = config_hash(cfg);
  j["seeds"] = Json{{"oracle", cfg.oracle.base_seed},
                    {"search", cfg.search.seed},
                    {"noise", cfg.plant.noise.seed}};
  j["mission"] = std::string(to_string(cfg.mission.mode));
  j["oracle"] = Json{{"kind", std::string(to_string(cfg.oracle.kind))},
                     {"window", cfg.oracle.window},
                     {"repeats", cfg.oracle.repeats}};
  j["space"] = space_json(cfg.space);
  return j;
}

void stamp(Json& j, Clock::time_point start) {
  j["wall_time_s"] = seconds_since(start);
  j["timestamp"] = utc_now();
}

RunConfig load_with(const std::string& path, const Overrides& o) {
  RunConfig cfg = load_config(path);
  if (o.oracle) {
    auto kind = parse_oracle_kind(*o.oracle);
    if (!kind) throw ConfigError("--oracle must be offline or online");
    cfg.oracle.kind = *kind;
  }
  if (o.window) cfg.oracle.window = *o.window;
  if (o.repeats) cfg.oracle.repeats = *o.repeats;
  if (o.oracle_seed) cfg.oracle.base_seed = *o.oracle_seed;
  if (o.algorithm) cfg.search.algorithm = *o.algorithm;
  if (o.budget) cfg.search.budget = *o.budget;
  if (o.seed) cfg.search.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  cfg.oracle.check();
  return cfg;
}

std::size_t workers_for(const RunConfig& cfg) { return resolve_workers(cfg.workers); }

int cmd_ground_truth(const std::string& config, const fs::path& out_path, const Overrides& o,
                     std::ostream& out) {
  const auto start = Clock::now();
  const RunConfig cfg = load_with(config, o);
  SimulationValidator validator(cfg.plant, cfg.mission, cfg.oracle);
  const ClassifiedGrid grid = ground_truth(cfg.space, validator, cfg.coverage, workers_for(cfg));

  std::ostringstream csv;
  write_grid_csv(csv, grid);
  write_file(out_path, csv.str());

  Json meta = run_metadata("ground-truth", cfg);
  meta["coverage"] = {cfg.coverage.p, cfg.coverage.i, cfg.coverage.d};
  meta["labeled"] = grid.covered_count();
  meta["invalid"] = grid.invalid_points().size();
  meta["queries"] = validator.queries();
  stamp(meta, start);
  write_file(metadata_path(out_path), meta.dump(2) + "\n");
  out << "labeled " << grid.covered_count() << " configurations, "
      << grid.invalid_points().size() << " invalid\n";
  return kExitOk;
}

int cmd_search(const std::string& config, const fs::path& out_path, const Overrides& o,
               std::ostream& out) {
  const auto start = Clock::now();
  const RunConfig cfg = load_with(config, o);
  const std::string& algo = cfg.search.algorithm;
  const bool routh = algo == "routh" || algo == "routh-dsoff";
  if (!routh && algo != "random" && algo != "hc" && algo != "ga") {
    throw ConfigError("unknown algorithm '" + algo + "' (routh, routh-dsoff, random, hc, ga)");
  }
  if (!routh && !cfg.search.budget) throw ConfigError("algorithm '" + algo + "' needs --budget");
  if (!routh && *cfg.search.budget == 0) throw ConfigError("--budget must be >= 1");

  SimulationValidator validator(cfg.plant, cfg.mission, cfg.oracle);
  Json meta = run_metadata("search", cfg);
  meta["algorithm"] = algo;
  std::ostringstream csv;
  if (routh) {
    const BoundaryLine bl = identify_boundary(cfg.space, validator,
                                              {algo == "routh", workers_for(cfg)});
    write_boundary_csv(csv, bl);
    meta["columns"] = bl.entries.size();
    meta["queries"] = bl.queries;
    out << "traced " << bl.entries.size() << " columns with " << bl.queries << " queries\n";
  } else {
    const std::uint64_t budget = *cfg.search.budget;
    SearchResult r;
    if (algo == "random") r = random_fuzz(cfg.space, validator, budget, cfg.search.seed);
    if (algo == "hc") r = hill_climb(cfg.space, validator, budget, cfg.search.seed);
    if (algo == "ga") r = genetic_search(cfg.space, validator, budget, cfg.search.seed, cfg.search.baseline);
    write_invalid_set_csv(csv, cfg.space, r.invalid);
    meta["budget"] = budget;
    meta["invalid"] = r.invalid.size();
    meta["queries"] = r.queries;
    out << "found " << r.invalid.size() << " invalid configurations with " << r.queries
        << " queries\n";
  }
  write_file(out_path, csv.str());
  stamp(meta, start);
  write_file(metadata_path(out_path), meta.dump(2) + "\n");
  return kExitOk;
}

std::optional<std::uint64_t> sidecar_queries(const fs::path& data) {
  const fs::path meta = metadata_path(data);
  std::error_code ec;
  if (!fs::exists(meta, ec)) return std::nullopt;
  try {
    const Json j = Json::parse(read_file(meta));
    if (j.contains("queries")) return j["queries"].get<std::uint64_t>();
  } catch (const Json::exception&) {
  }
  return std::nullopt;
}

// An input is a boundary line or an invalid set, told apart by its header.
std::vector<GridIndex> load_region(const std::string& text, ParamSpace& space) {
  std::istringstream in(text);
  if (text.find("\np,d,status,i_save") != std::string::npos ||
      text.rfind("p,d,status,i_save", 0) == 0) {
    const BoundaryLine bl = read_boundary_csv(in);
    space = bl.space;
    return region_from_boundary(bl);
  }
  const ClassifiedGrid set = read_grid_csv(in);
  space = set.space();
  return set.invalid_points();
}

std::string percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * v << '%';
  return s.str();
}

int cmd_eval(const fs::path& gt_path, const fs::path& rs_path, const fs::path& out_path,
             std::ostream& out) {
  const auto start = Clock::now();
  std::istringstream gt_in(read_file(gt_path));
  const ClassifiedGrid gt = read_grid_csv(gt_in);
  ParamSpace rs_space;
  const std::vector<GridIndex> rs = load_region(read_file(rs_path), rs_space);
  if (!(rs_space == gt.space())) {
    throw ConfigError("parameter spaces of '" + gt_path.string() + "' and '" + rs_path.string() +
                      "' differ");
  }
  const Metrics m = evaluate(gt, rs);

  Json j;
  j["gt_size"] = m.gt_size;
  j["rs_size"] = m.rs_size;
  j["intersection"] = m.intersection;
  j["mr"] = m.mr;
  j["hr"] = m.hr;
  j["flags"] = m.flags;
  const auto q = [](std::optional<std::uint64_t> v) { return v ? Json(*v) : Json(nullptr); };
  j["queries"] = Json{{"ground_truth", q(sidecar_queries(gt_path))},
                      {"search", q(sidecar_queries(rs_path))}};
  j["tool"] = "pidlab";
  j["version"] = PIDLAB_VERSION;
  stamp(j, start);
  write_file(out_path, j.dump(2) + "\n");

  out << std::left << std::setw(8) << "Total" << std::setw(12) << "Identified" << std::setw(10)
      << "Accurate" << std::setw(8) << "MR" << "HR\n";
  out << std::setw(8) << m.gt_size << std::setw(12) << m.rs_size << std::setw(10)
      << m.intersection << std::setw(8) << percent(m.mr) << percent(m.hr);
  for (const std::string& f : m.flags) out << "  [" << f << ']';
  out << '\n';
  return kExitOk;
}

int cmd_plot(const std::optional<std::string>& grid_path,
             const std::optional<std::string>& boundary_path, std::optional<double> p_value,
             std::optional<double> a1, std::optional<double> a2,
             const std::optional<std::string>& config, const fs::path& out_path) {
  if (!grid_path && !boundary_path) throw ConfigError("plot needs --grid and/or --boundary");
  std::optional<ClassifiedGrid> grid;
  std::optional<BoundaryLine> bl;
  if (grid_path) {
    std::istringstream in(read_file(*grid_path));
    grid = read_grid_csv(in);
    bool any = false;
    for (const GridIndex& g : grid->covered_points()) any = any || grid->label(g) != Label::Uncovered;
    if (!any) throw ConfigError("grid file '" + *grid_path + "' has no rows");
  }
  if (boundary_path) {
    std::istringstream in(read_file(*boundary_path));
    bl = read_boundary_csv(in);
    if (bl->entries.empty()) throw ConfigError("boundary file '" + *boundary_path + "' has no rows");
  }
  const ParamSpace& space = grid ? grid->space() : bl->space;

  std::size_t p = 0;
  if (p_value) {
    auto k = axis_index(space.p, *p_value);
    if (!k) throw ConfigError("--p is not on the p grid");
    p = *k;
  } else if (space.n_p() > 1) {
    throw ConfigError("inputs cover several p values; select one with --p");
  }

  PlotInput input;
  input.grid = grid ? &*grid : nullptr;
  input.boundary = bl ? &*bl : nullptr;
  input.p = p;
  if (config) {
    const RunConfig cfg = load_config(*config);
    input.plant = PlaneCoeffs{cfg.plant.a1, cfg.plant.a2};
  }
  if (a1 || a2) {
    if (!(a1 && a2)) throw ConfigError("--a1 and --a2 go together");
    input.plant = PlaneCoeffs{*a1, *a2};
  }
  std::ostringstream title;
  title << "kp = " << space.p.value(p);
  input.title = title.str();
  write_file(out_path, render_plane_svg(input));
  return kExitOk;
}

int cmd_simulate(const std::string& config, double kp, double ki, double kd,
                 std::optional<std::uint64_t> seed, const fs::path& out_path, std::ostream& out) {
  RunConfig cfg = load_config(config);
  if (seed) cfg.plant.noise.seed = *seed;
  const Trajectory t = simulate(cfg.plant, {kp, ki, kd}, cfg.mission);
  std::ostringstream csv;
  write_trajectory_csv(csv, t);
  write_file(out_path, csv.str());
  const std::string violated = mtl::first_violation(mtl::mode_spec(cfg.mission), t);
  out << t.size() << " samples; routh " << (routh_stable({kp, ki, kd}, cfg.plant.a1, cfg.plant.a2) ? "stable" : "unstable")
      << "; spec " << (violated.empty() ? "satisfied" : "violated (" + violated + ")") << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& config, const fs::path& out_path, const Overrides& o,
                std::ostream& out) {
  const auto start = Clock::now();
  const RunConfig cfg = load_with(config, o);
  if (cfg.oracle.window < 2) throw ConfigError("compare-oracles needs --window >= 2");
  ClassifiedGrid sample(cfg.space, cfg.coverage);
  std::vector<PidConfig> configs;
  for (const GridIndex& g : sample.covered_points()) configs.push_back(cfg.space.at(g));
  const OracleComparison cmp = compare_oracles(configs, cfg.mission, cfg.plant, cfg.oracle.window,
                                               cfg.oracle.base_seed, workers_for(cfg));
  std::ostringstream csv;
  csv << "kp,ki,kd,offline,online,reference\n";
  for (const auto& row : cmp.rows) {
    csv << row.pid.kp << ',' << row.pid.ki << ',' << row.pid.kd << ',' << row.offline << ','
        << row.online << ',' << row.reference << '\n';
  }
  write_file(out_path, csv.str());
  Json meta = run_metadata("compare-oracles", cfg);
  meta["configs"] = configs.size();
  meta["offline_agreement"] = cmp.offline_agreement;
  meta["online_agreement"] = cmp.online_agreement;
  stamp(meta, start);
  write_file(metadata_path(out_path), meta.dump(2) + "\n");
  out << "offline agreement " << percent(cmp.offline_agreement) << ", online agreement "
      << percent(cmp.online_agreement) << " over " << configs.size() << " configurations\n";
  return kExitOk;
}

int cmd_mtl(const std::string& formula, const std::string& trajectory, std::size_t window,
            std::ostream& out) {
  const mtl::Formula phi = mtl::parse(formula);
  std::istringstream in(read_file(trajectory));
  const Trajectory t = read_trajectory_csv(in);
  if (t.empty()) throw ConfigError("trajectory '" + trajectory + "' has no samples");
  const std::string violated = mtl::first_violation(phi, t, window);
  out << mtl::to_string(phi) << '\n'
      << (violated.empty() ? "satisfied" : "violated: " + violated) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"PID parameter region inference: ground truth, boundary search, evaluation"};
  app.name("pidlab");
  app.set_version_flag("--version", PIDLAB_VERSION);
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  std::string out_path;
  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run configuration file")->required();
  };
  const auto add_out = [&](CLI::App* sub, const char* what) {
    sub->add_option("--out", out_path, what)->required();
  };
  const auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", o.workers, "Worker threads (default: PIDLAB_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
  };
  const auto add_oracle = [&](CLI::App* sub) {
    sub->add_option("--oracle", o.oracle, "offline or online")
        ->check(CLI::IsMember({"offline", "online"}));
    sub->add_option("--window", o.window, "Online window in samples");
    sub->add_option("--repeats", o.repeats, "Simulations per query (odd, majority vote)");
  };

  auto* gt = app.add_subcommand("ground-truth", "Label every covered grid configuration");
  add_config(gt);
  add_out(gt, "ClassifiedGrid CSV; metadata goes next to it as .json");
  add_oracle(gt);
  gt->add_option("--seed", o.oracle_seed, "Oracle noise seed");
  add_workers(gt);

  auto* search = app.add_subcommand("search", "Trace the boundary or run a baseline searcher");
  add_config(search);
  add_out(search, "BoundaryLine or invalid-set CSV; metadata as .json");
  search->add_option("--algorithm", o.algorithm, "routh, routh-dsoff, random, hc or ga");
  search->add_option("--budget", o.budget, "Query budget for the baselines");
  search->add_option("--seed", o.seed, "Baseline RNG seed");
  search->add_option("--oracle-seed", o.oracle_seed, "Oracle noise seed");
  add_oracle(search);
  add_workers(search);

  std::string gt_file, rs_file;
  auto* eval = app.add_subcommand("eval", "Miss and hit rate of a region against ground truth");
  eval->add_option("gt", gt_file, "Ground-truth grid CSV")->required();
  eval->add_option("region", rs_file, "BoundaryLine CSV or invalid-set CSV")->required();
  add_out(eval, "Metrics JSON");

  std::optional<std::string> grid_file, boundary_file, plot_config;
  std::optional<double> p_value, a1, a2;
  auto* plot = app.add_subcommand("plot", "Render one (i, d) plane as SVG");
  plot->add_option("--grid", grid_file, "Ground-truth grid CSV");
  plot->add_option("--boundary", boundary_file, "BoundaryLine CSV");
  plot->add_option("--p", p_value, "kp of the plane to draw");
  plot->add_option("--config", plot_config, "Take plant coefficients for the dashed line from here");
  plot->add_option("--a1", a1, "Plant a1 for the dashed line");
  plot->add_option("--a2", a2, "Plant a2 for the dashed line");
  add_out(plot, "SVG file");

  double kp = 0, ki = 0, kd = 0;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Simulate one configuration, write its trajectory");
  add_config(sim);
  sim->add_option("--kp", kp)->required();
  sim->add_option("--ki", ki)->required();
  sim->add_option("--kd", kd)->required();
  sim->add_option("--seed", sim_seed, "Sensor noise seed");
  add_out(sim, "Trajectory CSV");

  auto* compare = app.add_subcommand("compare-oracles",
                                     "Offline vs online oracle against a long-horizon reference");
  add_config(compare);
  add_out(compare, "Per-configuration CSV; summary as .json");
  compare->add_option("--window", o.window, "Online window in samples");
  compare->add_option("--seed", o.oracle_seed, "Oracle noise seed");
  add_workers(compare);

  std::string formula, trajectory;
  std::size_t window = 0;
  auto* check = app.add_subcommand("mtl", "Check a formula against a trajectory CSV");
  check->add_option("--formula", formula, "Prefix-syntax formula")->required();
  check->add_option("--trajectory", trajectory, "Trajectory CSV")->required();
  check->add_option("--window", window, "Online window in samples; 0 = offline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << PIDLAB_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pidlab: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (gt->parsed()) return cmd_ground_truth(config, out_path, o, out);
    if (search->parsed()) return cmd_search(config, out_path, o, out);
    if (eval->parsed()) return cmd_eval(gt_file, rs_file, out_path, out);
    if (plot->parsed()) {
      return cmd_plot(grid_file, boundary_file, p_value, a1, a2, plot_config, out_path);
    }
    if (sim->parsed()) return cmd_simulate(config, kp, ki, kd, sim_seed, out_path, out);
    if (compare->parsed()) return cmd_compare(config, out_path, o, out);
    if (check->parsed()) {
      if (window == 1) throw ConfigError("--window must be 0 (offline) or >= 2");
      return cmd_mtl(formula, trajectory, window, out);
    }
  } catch (const IoError& e) {
    err << "pidlab: " << e.what() << '\n';
    return kExitIo;
  } catch (const mtl::ParseError& e) {
    err << "pidlab: formula: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "pidlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "pidlab: internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}

}  // namespace pidlab::cli

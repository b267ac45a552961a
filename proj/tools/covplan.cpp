// covplan: run missions, compare policies, sweep planner parameters and
// verify core properties.
//
//   covplan run <cfg> [--out DIR] [--seeds 0,1,2] [--dump-debug-images] [--trace-planner]
//   covplan compare <cfg> --policies magician,greedy,random [--out DIR] [--seeds ...]
//   covplan ablate <cfg> --axis n_beams --values 1,3,10 [--out DIR] [--seeds ...]
//   covplan verify
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime
// failure, 3 verification failure. COVPLAN_WORKERS sets the worker count.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covplan/config.hpp"
#include "covplan/mission.hpp"
#include "covplan/verify.hpp"

namespace fs = std::filesystem;
using namespace covplan;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

struct CommonOptions {
  std::string config;
  std::string out;
  std::string seeds;
  bool debug_images = false;
  bool trace = false;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) throw ConfigError("--seeds", "empty entry");
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      throw ConfigError("--seeds", "not an unsigned integer: \"" + tok + "\"");
    }
    if (pos != tok.size()) throw ConfigError("--seeds", "not an unsigned integer: \"" + tok + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--seeds", "no seeds given");
  return out;
}

std::vector<double> parse_value_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw ConfigError("--values", "not a number: \"" + tok + "\"");
    }
    if (pos != tok.size()) throw ConfigError("--values", "not a number: \"" + tok + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values", "no values given");
  return out;
}

RunConfig load_with_overrides(const CommonOptions& o) {
  RunConfig c = load_config(o.config);
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.seeds.empty()) c.seeds = parse_seed_list(o.seeds);
  validate_config(c);
  return c;
}

std::string seed_stem(const std::string& hash, std::uint64_t seed) { return hash + "-s" + std::to_string(seed); }

struct SeedResult {
  std::uint64_t seed = 0;
  MissionLog log;
  CoverageReport report;
};

// Runs one mission and writes its artifacts.
SeedResult run_seed(const RunConfig& c, const PreparedScene& ps, std::uint64_t seed, const CommonOptions& o) {
  const std::string hash = config_hash(c);
  const fs::path dir(c.output_dir);
  const std::string stem = seed_stem(hash, seed);
  MissionConfig mc = c.mission;
  mc.seed = seed;

  MissionHooks hooks;
  std::ostringstream trace;
  if (o.trace) {
    hooks.trace = [&](int cycle, const PlanTraceRecord& r) {
      trace << "{\"cycle\":" << cycle << ",\"iteration\":" << r.iteration << ",\"beam\":" << r.beam
            << ",\"parent\":" << r.parent << ",\"action\":\"" << action_name(ps.actions.kind, r.action)
            << "\",\"gain\":" << fmt_double(r.gain) << ",\"score\":" << fmt_double(r.score) << "}\n";
    };
  }
  const fs::path debug_dir = dir / (stem + "-debug");
  if (o.debug_images) {
    hooks.on_step = [&](const StepRecord& rec, const GaussianProxySet& set, const NoveltyOverlay& overlay) {
      if (set.size() == 0) return;
      const NoveltyRender r = render_novelty(set, overlay, rec.pose, ps.render);
      char name[64];
      std::snprintf(name, sizeof name, "step%04d", rec.step);
      atomic_write(debug_dir / (std::string(name) + "-novelty.pgm"), pgm_image(r.novelty, r.width, r.height, 1.0));
      atomic_write(debug_dir / (std::string(name) + "-depth.pgm"),
                   pgm_image(r.depth, r.width, r.height, ps.render.cam.far));
      std::ostringstream g;
      write_gaussian_dump(g, set, &overlay);
      atomic_write(debug_dir / (std::string(name) + "-gaussians.txt"), g.str());
    };
    hooks.on_finish = [&](const OccupancyField& f) { atomic_write(dir / (stem + ".field.bin"), field_dump(f)); };
  }

  SeedResult res;
  res.seed = seed;
  res.log = run_mission(ps.setup(c), mc, hooks);
  res.report = make_report(res.log.curve());

  atomic_write(dir / (stem + ".mission.jsonl"), mission_log_jsonl(res.log, ps.actions));
  atomic_write(dir / (stem + ".coverage.csv"), coverage_csv(res.log));
  atomic_write(dir / (stem + ".timings.jsonl"), timings_jsonl(res.log));
  nlohmann::json summary = {{"config_hash", hash},
                            {"seed", seed},
                            {"policy", to_string(mc.policy)},
                            {"steps", res.log.steps.size()},
                            {"trapped", res.log.trapped},
                            {"initial_coverage", res.log.initial_coverage},
                            {"final_coverage", res.report.final_coverage},
                            {"auc", res.report.auc},
                            {"novelty_violations", res.log.novelty_violations},
                            {"plan_calls", res.log.plan_calls},
                            {"renders", res.log.renders}};
  atomic_write(dir / (stem + ".report.json"), summary.dump(2) + "\n");
  if (o.trace) atomic_write(dir / (stem + ".trace.jsonl"), trace.str());
  return res;
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

// Mean and sample standard deviation.
Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double q = 0.0;
    for (double x : v) q += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(q / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct Row {
  std::string label;
  Stats final_coverage;
  Stats auc;
  std::vector<std::string> hashes;
};

Row summarize(const std::string& label, const std::vector<SeedResult>& results, const std::string& hash) {
  std::vector<double> f, a;
  for (const auto& r : results) {
    f.push_back(r.report.final_coverage);
    a.push_back(r.report.auc);
  }
  return {label, stats(f), stats(a), {hash}};
}

std::string table_text(const std::string& head, const std::vector<Row>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s\n", head.c_str(), "final_mean", "final_std", "auc_mean",
                "auc_std");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %10.4f %10.4f %10.4f %10.4f\n", r.label.c_str(), r.final_coverage.mean,
                  r.final_coverage.std, r.auc.mean, r.auc.std);
    out << buf;
  }
  return out.str();
}

nlohmann::json table_json(const std::string& head, const std::vector<Row>& rows,
                          const std::vector<std::uint64_t>& seeds) {
  nlohmann::json j;
  j["seeds"] = seeds;
  for (const auto& r : rows)
    j["rows"].push_back({{head, r.label},
                         {"config_hash", r.hashes.front()},
                         {"final_coverage_mean", r.final_coverage.mean},
                         {"final_coverage_std", r.final_coverage.std},
                         {"auc_mean", r.auc.mean},
                         {"auc_std", r.auc.std}});
  return j;
}

std::vector<SeedResult> run_all(const RunConfig& c, const PreparedScene& ps, const CommonOptions& o) {
  std::vector<SeedResult> out;
  for (auto seed : c.seeds) {
    out.push_back(run_seed(c, ps, seed, o));
    const auto& r = out.back();
    std::printf("[%s] seed %llu: final %.4f auc %.4f%s\n", to_string(c.mission.policy),
                static_cast<unsigned long long>(seed), r.report.final_coverage, r.report.auc,
                r.log.trapped ? " (trapped)" : "");
    std::fflush(stdout);
  }
  return out;
}

int cmd_run(const CommonOptions& o) {
  const RunConfig c = load_with_overrides(o);
  const PreparedScene ps = prepare_scene(c);
  const std::string hash = config_hash(c);
  const fs::path dir(c.output_dir);
  atomic_write(dir / (hash + ".config.json"), to_json(c).dump(2) + "\n");
  run_all(c, ps, o);
  if (o.debug_images) {
    std::ostringstream g;
    g << "# covplan-gt-cloud v1 count=" << ps.gt.points.size() << "\n# x y z radius opacity novelty\n";
    char buf[160];
    for (const auto& p : ps.gt.points) {
      std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %.6f %.6f %d\n", p.x(), p.y(), p.z(), ps.gt.merge_radius, 1.0, 1);
      g << buf;
    }
    atomic_write(dir / (hash + ".gt-cloud.txt"), g.str());
  }
  std::printf("artifacts in %s (config %s)\n", c.output_dir.c_str(), hash.c_str());
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::string& policies) {
  RunConfig base = load_with_overrides(o);
  std::vector<Policy> list;
  std::stringstream in(policies);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto p = parse_policy(tok);
    if (!p) throw ConfigError("--policies", "unknown policy \"" + tok + "\"");
    list.push_back(*p);
  }
  if (list.empty()) throw ConfigError("--policies", "no policies given");
  const PreparedScene ps = prepare_scene(base);
  std::vector<Row> rows;
  for (Policy p : list) {
    RunConfig c = base;
    c.mission.policy = p;
    rows.push_back(summarize(to_string(p), run_all(c, ps, o), config_hash(c)));
  }
  const std::string text = table_text("policy", rows);
  const std::string stem = config_hash(base) + ".compare";
  atomic_write(fs::path(base.output_dir) / (stem + ".json"), table_json("policy", rows, base.seeds).dump(2) + "\n");
  atomic_write(fs::path(base.output_dir) / (stem + ".txt"), text);
  std::cout << text;
  return 0;
}

int cmd_ablate(const CommonOptions& o, const std::string& axis, const std::string& values) {
  RunConfig base = load_with_overrides(o);
  const auto vals = parse_value_list(values);
  const bool integral = axis != "proxy_density";
  if (axis != "n_beams" && axis != "horizon" && axis != "replan" && axis != "proxy_density")
    throw ConfigError("--axis", "expected n_beams, horizon, replan or proxy_density");
  const PreparedScene ps = prepare_scene(base);
  std::vector<Row> rows;
  for (double v : vals) {
    if (integral && (v < 1.0 || v != std::floor(v)))
      throw ConfigError("--values", "axis " + axis + " needs integers >= 1");
    RunConfig c = base;
    c.mission.policy = Policy::Magician;
    const int iv = static_cast<int>(v);
    if (axis == "n_beams") c.planner.n_beams = iv;
    if (axis == "horizon") {
      c.planner.horizon = iv;
      c.planner.execute = std::min(c.planner.execute, iv);
    }
    if (axis == "replan") {
      c.planner.execute = iv;
      c.planner.horizon = std::max(c.planner.horizon, iv);
    }
    if (axis == "proxy_density") c.proxies.density = v;
    validate_config(c);
    std::ostringstream label;
    label << v;
    rows.push_back(summarize(label.str(), run_all(c, ps, o), config_hash(c)));
  }
  const std::string text = table_text(axis, rows);
  const std::string stem = config_hash(base) + ".ablate-" + axis;
  atomic_write(fs::path(base.output_dir) / (stem + ".json"), table_json(axis, rows, base.seeds).dump(2) + "\n");
  atomic_write(fs::path(base.output_dir) / (stem + ".txt"), text);
  std::cout << text;
  return 0;
}

int cmd_verify() {
  bool ok = true;
  for (const auto& r : verify_all()) {
    std::printf("%-26s %s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covplan: coverage planning with imagined Gaussians"};
  app.require_subcommand(1);
  CommonOptions opt;
  std::string policies = "magician,greedy,random", axis, values;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", opt.config, "JSON configuration file")->required();
    sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
    sub->add_option("--seeds", opt.seeds, "comma-separated seed list (overrides mission.seeds)");
    sub->add_flag("--dump-debug-images", opt.debug_images, "write per-step novelty/depth images and dumps");
    sub->add_flag("--trace-planner", opt.trace, "write every beam expansion as JSON lines");
  };
  auto* run = app.add_subcommand("run", "run one mission per seed");
  add_common(run);
  auto* compare = app.add_subcommand("compare", "compare policies on paired seeds");
  add_common(compare);
  compare->add_option("--policies", policies, "subset of magician,greedy,random");
  auto* ablate = app.add_subcommand("ablate", "sweep one planner parameter");
  add_common(ablate);
  ablate->add_option("--axis", axis, "n_beams, horizon, replan or proxy_density")->required();
  ablate->add_option("--values", values, "comma-separated values")->required();
  auto* verify = app.add_subcommand("verify", "run the fast property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*verify) return cmd_verify();
    if (*run) return cmd_run(opt);
    if (*compare) return cmd_compare(opt, policies);
    if (*ablate) return cmd_ablate(opt, axis, values);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

// blockcast: simulate -> build-dict -> preprocess -> windows -> fit -> predict -> eval
#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blockcast/baselines.hpp"
#include "blockcast/config.hpp"
#include "blockcast/error.hpp"
#include "blockcast/evaluation.hpp"
#include "blockcast/format.hpp"
#include "blockcast/io.hpp"
#include "blockcast/lidar_prep.hpp"
#include "blockcast/simulator.hpp"
#include "blockcast/windowing.hpp"

namespace bc = blockcast;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> problem;
  std::vector<int> horizons;
  std::string scr = "on";
  bool balance = false;
  std::string traj, dict, prep, windows, preds, params;
};

struct Context {
  bc::RunConfig cfg;
  fs::path out;

  fs::path or_default(const std::string& given, const char* name) const {
    return given.empty() ? out / name : fs::path(given);
  }
};

Context load_context(const Options& o) {
  Context ctx;
  ctx.cfg = o.config.empty() ? bc::RunConfig{} : bc::load_run_config(o.config);
  if (o.seed) {
    ctx.cfg.seed = *o.seed;
    ctx.cfg.scenario.seed = *o.seed;
    ctx.cfg.window.balance_seed = *o.seed;
  }
  if (o.balance) ctx.cfg.window.balance = true;
  ctx.cfg.validate();
  ctx.out = o.out.empty() ? fs::path(ctx.cfg.output_dir) : fs::path(o.out);
  return ctx;
}

std::vector<int> problems_of(const Options& o) {
  if (o.problem) return {*o.problem};
  return {1, 2, 3, 4};
}

void cmd_simulate(const Options& o) {
  const auto ctx = load_context(o);
  const auto traj = bc::simulate(ctx.cfg.scenario);
  std::size_t blocked = 0;
  for (const auto x : traj.link_status) blocked += x;
  spdlog::info("simulated {} instances, {} objects, {} blocked", traj.size(), traj.objects.size(),
               blocked);
  bc::write_trajectory(ctx.or_default(o.traj, "trajectory"), traj, ctx.cfg.scenario);
}

void cmd_build_dict(const Options& o) {
  const auto ctx = load_context(o);
  const auto loaded = bc::read_trajectory(ctx.or_default(o.traj, "trajectory"));
  const auto free = bc::object_free_instances(loaded.trajectory);
  std::vector<bc::LidarScan> frames;
  for (const auto t : free) {
    if (static_cast<int>(frames.size()) >= ctx.cfg.scr.dictionary_frames) break;
    frames.push_back(loaded.trajectory.scans[t]);
  }
  if (frames.empty()) throw bc::InputError("trajectory has no object-free instances");
  const auto dict = bc::build_dictionary(frames, ctx.cfg.scr);
  spdlog::info("dictionary: {} entries from {} frames", dict.size(), frames.size());
  bc::write_dictionary(ctx.or_default(o.dict, "dict.csv"), dict);
}

void cmd_preprocess(const Options& o) {
  const auto ctx = load_context(o);
  const auto loaded = bc::read_trajectory(ctx.or_default(o.traj, "trajectory"));
  const auto dict = bc::read_dictionary(ctx.or_default(o.dict, "dict.csv"), ctx.cfg.scr);
  const auto result = bc::preprocess_trajectory(loaded.trajectory.scans, dict, ctx.cfg.scr);
  std::int64_t after = 0;
  for (const auto& s : result.scans) after += static_cast<std::int64_t>(s.entries.size());
  const auto before = bc::count_returns(loaded.trajectory.scans);
  if (before > 0) spdlog::info("SCR rate {}", bc::fmt9(bc::scr_rate(before, after)));
  bc::write_preprocessed(ctx.or_default(o.prep, "preprocessed.csv"), result.scans);
}

void cmd_windows(const Options& o) {
  const auto ctx = load_context(o);
  const auto loaded = bc::read_trajectory(ctx.or_default(o.traj, "trajectory"));
  const bool scr = o.scr == "on";
  std::vector<bc::QuantizedScan> prep;
  if (scr) {
    prep = bc::read_preprocessed(ctx.or_default(o.prep, "preprocessed.csv"),
                                 loaded.trajectory.size(), ctx.cfg.scr);
  }
  const auto horizons = o.horizons.empty() ? std::vector<int>{ctx.cfg.window.horizon} : o.horizons;
  std::vector<bc::ObservationWindow> all;
  for (const int h : horizons) {
    auto wc = ctx.cfg.window;
    wc.horizon = h;
    auto ws = bc::slide_windows(loaded.trajectory, loaded.config, scr ? &prep : nullptr,
                                ctx.cfg.scr, wc);
    spdlog::info("horizon {}: {} windows", h, ws.size());
    all.insert(all.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
  }
  const fs::path path = ctx.or_default(o.windows, "windows.jsonl");
  bc::write_windows(path, all);
  auto manifest = bc::make_manifest(all, ctx.cfg, scr);
  manifest["horizons"] = horizons;
  bc::write_text(path.parent_path() / "manifest.json", manifest.dump(2) + "\n");
}

std::map<int, std::vector<std::size_t>> by_horizon(const std::vector<bc::ObservationWindow>& ws) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < ws.size(); ++i) out[ws[i].horizon].push_back(i);
  return out;
}

void cmd_fit(const Options& o) {
  const auto ctx = load_context(o);
  const auto windows = bc::read_windows(ctx.or_default(o.windows, "windows.jsonl"));
  if (windows.empty()) throw bc::InputError("no windows to fit on");
  const fs::path path = ctx.or_default(o.params, "baseline_params.json");
  bc::BaselineParams params = fs::exists(path) ? bc::read_params(path) : bc::BaselineParams{};
  params.dbscan = ctx.cfg.dbscan;

  for (const auto& [h, ids] : by_horizon(windows)) {
    for (const int problem : problems_of(o)) {
      if (problem == 1) {
        std::vector<int> counts, labels;
        for (const auto i : ids) {
          counts.push_back(bc::count_points(windows[i]));
          labels.push_back(windows[i].labels.occurrence);
        }
        const bool both = std::set<int>(labels.begin(), labels.end()).size() == 2;
        int theta;
        if (both) {
          theta = bc::fit_threshold(counts, labels);
        } else {
          // Constant predictor matching the only class present.
          theta = labels.front() == 0 ? *std::max_element(counts.begin(), counts.end()) : -1;
          spdlog::warn("horizon {}: single-class training set, constant threshold {}", h, theta);
        }
        params.occurrence_thresholds[h] = theta;
        spdlog::info("horizon {}: occurrence threshold {}", h, theta);
      } else if (problem == 3) {
        std::vector<int> counts, labels;
        for (const auto i : ids) {
          if (!windows[i].labels.severity) continue;
          counts.push_back(bc::count_points(windows[i]));
          labels.push_back(*windows[i].labels.severity);
        }
        if (counts.empty()) {
          spdlog::warn("horizon {}: no positive windows, severity not fitted", h);
          continue;
        }
        params.severity[h] = bc::fit_severity_thresholds(counts, labels);
      }
    }
  }
  bc::write_params(path, params);
}

void cmd_predict(const Options& o) {
  const auto ctx = load_context(o);
  const auto windows = bc::read_windows(ctx.or_default(o.windows, "windows.jsonl"));
  const auto params = bc::read_params(ctx.or_default(o.params, "baseline_params.json"));
  const auto problems = problems_of(o);
  std::vector<bc::PredictionRow> rows;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    for (const int problem : problems) {
      // Problems 2-4 are posed only for windows that precede a blockage.
      if (problem != 1 && w.labels.occurrence != 1) continue;
      bc::PredictionRow row{i, problem, std::nullopt};
      switch (problem) {
        case 1: {
          const auto it = params.occurrence_thresholds.find(w.horizon);
          if (it == params.occurrence_thresholds.end()) {
            throw bc::InputError("no occurrence threshold for horizon " +
                                 std::to_string(w.horizon));
          }
          row.value = bc::predict_occurrence(bc::count_points(w), it->second);
          break;
        }
        case 2:
          if (const auto est = bc::estimate_blockage_time(w, params.dbscan,
                                                         ctx.cfg.baseline.track_point)) {
            row.value = est->predicted_instance;
          }
          break;
        case 3: {
          const auto it = params.severity.find(w.horizon);
          if (it == params.severity.end()) {
            throw bc::InputError("no severity model for horizon " + std::to_string(w.horizon));
          }
          row.value = it->second.predict(bc::count_points(w));
          break;
        }
        case 4:
          row.value = bc::predict_window_direction(w, params.dbscan,
                                                   ctx.cfg.baseline.direction_uses_target);
          break;
      }
      rows.push_back(row);
    }
  }
  bc::write_preds(ctx.or_default(o.preds, "preds.csv"), rows);
}

void cmd_eval(const Options& o) {
  const auto ctx = load_context(o);
  const fs::path windows_path = ctx.or_default(o.windows, "windows.jsonl");
  const auto windows = bc::read_windows(windows_path);
  const auto preds = bc::read_preds(ctx.or_default(o.preds, "preds.csv"));

  struct Group {
    std::vector<int> pred_class, true_class;
    std::vector<std::optional<double>> pred_value;
    std::vector<double> true_value;
  };
  std::map<std::pair<int, int>, Group> groups;
  const std::set<int> wanted = [&] {
    const auto p = problems_of(o);
    return std::set<int>(p.begin(), p.end());
  }();
  for (const auto& r : preds) {
    if (!wanted.count(r.problem)) continue;
    if (r.window_id >= windows.size()) {
      throw bc::InputError("prediction refers to window " + std::to_string(r.window_id) +
                           " but only " + std::to_string(windows.size()) + " exist");
    }
    const auto& w = windows[r.window_id];
    auto& g = groups[{r.problem, w.horizon}];
    const auto need = [&](const std::optional<int>& label) {
      if (!label) {
        throw bc::InputError("window " + std::to_string(r.window_id) + " has no label for problem " +
                             std::to_string(r.problem));
      }
      return *label;
    };
    if (r.problem == 2) {
      g.pred_value.push_back(r.value);
      g.true_value.push_back(need(w.labels.instance));
      continue;
    }
    if (!r.value) throw bc::InputError("missing class prediction for window " +
                                       std::to_string(r.window_id));
    g.pred_class.push_back(static_cast<int>(*r.value));
    g.true_class.push_back(r.problem == 1   ? w.labels.occurrence
                           : r.problem == 3 ? need(w.labels.severity)
                                            : need(w.labels.direction));
  }

  std::vector<int> severity_classes;
  for (int l = 1; l <= ctx.cfg.window.severity.levels(); ++l) severity_classes.push_back(l);
  const std::vector<int> binary{0, 1};

  std::vector<bc::ProblemResult> results;
  for (const auto& [key, g] : groups) {
    const auto [problem, h] = key;
    if (problem == 2) {
      results.push_back(bc::evaluate_regression(h, g.pred_value, g.true_value));
    } else {
      results.push_back(bc::evaluate_classification(problem, h, g.pred_class, g.true_class,
                                                    problem == 3 ? severity_classes : binary));
    }
  }
  if (results.empty()) throw bc::InputError("no predictions to evaluate");

  const fs::path manifest_path = windows_path.parent_path() / "manifest.json";
  const std::string manifest = fs::exists(manifest_path) ? bc::read_text(manifest_path) : "";
  const auto report = bc::emit_report(std::move(results), manifest, bc::kVersion);
  bc::write_text(ctx.out / "report.json", report.json);
  bc::write_text(ctx.out / "report.txt", report.text);
  bc::write_text(ctx.out / "curves.csv", report.curves_csv);
  std::cout << report.text;
}

std::string json_escape(const std::string& s) { return bc::Json(s).dump(); }

int fail(int code, const std::string& kind, const std::string& message,
         const std::string& field = "") {
  std::cerr << "{\"error\":" << json_escape(kind);
  if (!field.empty()) std::cerr << ",\"field\":" << json_escape(field);
  std::cerr << ",\"message\":" << json_escape(message) << ",\"exit\":" << code << "}\n";
  return code;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("blockcast");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("BLOCKCAST_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Blockage prediction pipeline: simulate, preprocess, window, fit and evaluate"};
  app.set_version_flag("--version", std::string(bc::kVersion));
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Overrides the configured seed");
  };
  const auto traj = [&](CLI::App* sub) {
    sub->add_option("--traj", o.traj, "Trajectory directory [<out>/trajectory]");
  };
  const auto problem = [&](CLI::App* sub) {
    sub->add_option("--problem", o.problem, "Problem 1-4 [all]")->check(CLI::Range(1, 4));
  };
  const auto windows = [&](CLI::App* sub) {
    sub->add_option("--windows", o.windows, "Windows file [<out>/windows.jsonl]");
  };
  const auto params = [&](CLI::App* sub) {
    sub->add_option("--params", o.params, "Baseline parameters [<out>/baseline_params.json]");
  };
  const auto preds = [&](CLI::App* sub) {
    sub->add_option("--preds", o.preds, "Predictions [<out>/preds.csv]");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate a trajectory");
  common(simulate);
  traj(simulate);
  simulate->callback([&] { cmd_simulate(o); });

  auto* build_dict = app.add_subcommand("build-dict", "Build the static dictionary");
  common(build_dict);
  traj(build_dict);
  build_dict->add_option("--dict", o.dict, "Dictionary output [<out>/dict.csv]");
  build_dict->callback([&] { cmd_build_dict(o); });

  auto* preprocess = app.add_subcommand("preprocess", "Remove static clusters from every scan");
  common(preprocess);
  traj(preprocess);
  preprocess->add_option("--dict", o.dict, "Dictionary [<out>/dict.csv]");
  preprocess->add_option("--prep", o.prep, "Output [<out>/preprocessed.csv]");
  preprocess->callback([&] { cmd_preprocess(o); });

  auto* win = app.add_subcommand("windows", "Slice a trajectory into labeled windows");
  common(win);
  traj(win);
  windows(win);
  win->add_option("--prep", o.prep, "Preprocessed scans [<out>/preprocessed.csv]");
  win->add_option("--horizon", o.horizons, "Prediction horizon, repeatable [config]")
      ->check(CLI::Range(1, 10));
  win->add_option("--scr", o.scr, "Use preprocessed scans")
      ->check(CLI::IsMember({"on", "off"}));
  win->add_flag("--balance", o.balance, "Subsample the majority class");
  win->callback([&] { cmd_windows(o); });

  auto* fit = app.add_subcommand("fit", "Fit baseline thresholds");
  common(fit);
  windows(fit);
  params(fit);
  problem(fit);
  fit->callback([&] { cmd_fit(o); });

  auto* predict = app.add_subcommand("predict", "Run the baselines over windows");
  common(predict);
  windows(predict);
  params(predict);
  preds(predict);
  problem(predict);
  predict->callback([&] { cmd_predict(o); });

  auto* eval = app.add_subcommand("eval", "Score predictions against window labels");
  common(eval);
  windows(eval);
  preds(eval);
  problem(eval);
  eval->callback([&] { cmd_eval(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  } catch (const bc::ConfigError& e) {
    return fail(2, "config", e.what(), e.field());
  } catch (const bc::InputError& e) {
    return fail(2, "input", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(2, "input", e.what());
  } catch (const bc::DomainError& e) {
    return fail(1, "invariant", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
  return 0;
}

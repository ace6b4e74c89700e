#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cobay/cobay.hpp"

namespace {

using cobay::json;

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  std::string events_path;
  std::string labels_path;
  std::string out_path;
  std::string report_path;

  std::string segments;
  std::string stress;
  std::string weights;

  double time_scale = 1.0;
  std::optional<double> jitter_ties;
  bool omit_runtime = false;

  std::optional<std::size_t> tol;
  int seeds = 0;

  std::string axis;
  std::string grid;
};

cobay::RunConfig effective_config(const CliOptions& opt) {
  cobay::RunConfig cfg;
  if (!opt.config_path.empty()) cfg = cobay::load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw cobay::config_error(what + ": empty entry");
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw cobay::config_error(what + ": not a number: '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<cobay::SegmentSpec> parse_segments(const std::string& text,
                                               const Eigen::VectorXd& weights) {
  std::vector<cobay::SegmentSpec> segs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const std::size_t colon = tok.find(':');
    if (colon == std::string::npos) {
      throw cobay::config_error("--segments entries must look like lambda:duration");
    }
    const auto lam = parse_double_list(tok.substr(0, colon), "--segments");
    const auto dur = parse_double_list(tok.substr(colon + 1), "--segments");
    if (lam.size() != 1 || dur.size() != 1) {
      throw cobay::config_error("--segments entries must look like lambda:duration");
    }
    segs.push_back(cobay::SegmentSpec{lam[0], weights, std::nullopt, dur[0]});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (segs.empty()) throw cobay::config_error("--segments: no segments given");
  return segs;
}

std::vector<cobay::SegmentSpec> choose_segments(const CliOptions& opt,
                                                const cobay::RunConfig& cfg) {
  if (!opt.segments.empty() && !opt.stress.empty()) {
    throw cobay::config_error("--segments and --stress are mutually exclusive");
  }
  Eigen::VectorXd weights = cobay::detail::preset_weights();
  if (!opt.weights.empty()) {
    const auto vals = parse_double_list(opt.weights, "--weights");
    weights = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                static_cast<Eigen::Index>(vals.size()));
  }
  if (static_cast<int>(weights.size()) != cfg.n_bases + 1) {
    throw cobay::config_error("--weights must have n_bases + 1 entries");
  }

  std::vector<cobay::SegmentSpec> segs;
  if (!opt.stress.empty()) {
    const std::size_t colon = opt.stress.find(':');
    if (colon == std::string::npos) {
      throw cobay::config_error("--stress must look like kind:level");
    }
    const auto kind = cobay::parse_stress_kind(opt.stress.substr(0, colon));
    const auto level = parse_double_list(opt.stress.substr(colon + 1), "--stress");
    if (level.size() != 1) throw cobay::config_error("--stress must look like kind:level");
    segs = cobay::stress_configs(kind, level[0]);
    for (auto& s : segs) s.weights = weights;
  } else if (!opt.segments.empty()) {
    segs = parse_segments(opt.segments, weights);
  } else {
    segs = cobay::default_segments();
    for (auto& s : segs) s.weights = weights;
  }
  return segs;
}

std::string default_labels_path(const std::string& events_path) {
  std::filesystem::path p(events_path);
  p.replace_extension();
  return p.string() + "_labels.csv";
}

std::string format_pm(double mean, double sd, int decimals) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.*f \xc2\xb1 %.*f", decimals, mean, decimals, sd);
  return std::string(buf);
}

void print_metrics_table(const cobay::AggregateMetrics& agg) {
  std::cout << "runs " << agg.n_runs << " | FNR " << format_pm(agg.fnr.mean, agg.fnr.stddev, 2)
            << " | FPR(%) " << format_pm(agg.fpr.mean * 100.0, agg.fpr.stddev * 100.0, 2)
            << " | MSE " << format_pm(agg.mse.mean, agg.mse.stddev, 3) << " | RT(min) "
            << format_pm(agg.runtime_minutes.mean, agg.runtime_minutes.stddev, 2) << '\n';
}

json metrics_to_json(const cobay::AggregateMetrics& agg) {
  const auto entry = [](const cobay::AggregateEntry& e) {
    return json{{"mean", e.mean}, {"std", e.stddev}};
  };
  json doc;
  doc["n_runs"] = agg.n_runs;
  doc["fnr"] = entry(agg.fnr);
  doc["fpr_percent"] = entry({agg.fpr.mean * 100.0, agg.fpr.stddev * 100.0});
  doc["mse"] = entry(agg.mse);
  doc["rt_minutes"] = entry(agg.runtime_minutes);
  return doc;
}

cobay::RunMetrics evaluate_run(const cobay::DetectionResult& result,
                               const std::vector<std::size_t>& truth, std::size_t tol) {
  std::size_t tested = 0;
  for (const auto& rec : result.records) tested += rec.tested ? 1 : 0;
  const auto match =
      cobay::match_changepoints(truth, result.change_indices, tol, tested);
  return cobay::make_metrics(match, cobay::compute_mse(result.records),
                             result.runtime_seconds);
}

int cmd_simulate(const CliOptions& opt) {
  const cobay::RunConfig cfg = effective_config(opt);
  const auto segments = choose_segments(opt, cfg);
  const cobay::LabeledDataset data =
      cobay::generate_piecewise(segments, cfg.make_basis(), cfg.seed);

  cobay::write_events_csv(opt.out_path, data.events);
  const std::string labels =
      opt.labels_path.empty() ? default_labels_path(opt.out_path) : opt.labels_path;
  cobay::write_labels_csv(labels, data.change_indices);
  cobay::log_message(cobay::LogLevel::info,
                     "simulated " + std::to_string(data.events.size()) + " events, " +
                         std::to_string(data.change_indices.size()) + " changes");
  return 0;
}

int cmd_detect(const CliOptions& opt) {
  const cobay::RunConfig cfg = effective_config(opt);
  const cobay::EventSequence events =
      cobay::load_events_csv(opt.events_path, opt.time_scale, opt.jitter_ties);
  const cobay::DetectionResult result =
      cobay::run(events, cfg.make_detector(), cfg.seed);

  const json doc = cobay::report_to_json(result, cobay::config_to_json(cfg), opt.omit_runtime);
  cobay::write_text_atomic(opt.out_path, doc.dump(2) + "\n");
  cobay::log_message(cobay::LogLevel::info,
                     "detected " + std::to_string(result.change_indices.size()) + " changes");
  return 0;
}

int cmd_eval(const CliOptions& opt) {
  const cobay::RunConfig cfg = effective_config(opt);
  const std::size_t tol = opt.tol.value_or(cfg.match_tol);

  std::vector<cobay::RunMetrics> runs;
  if (opt.seeds <= 0) {
    if (opt.report_path.empty() || opt.labels_path.empty()) {
      throw cobay::config_error("eval needs --report and --labels unless --seeds is given");
    }
    const cobay::ReportData rep = cobay::load_report(opt.report_path);
    const std::vector<std::size_t> truth = cobay::load_labels_csv(opt.labels_path);
    const auto match =
        cobay::match_changepoints(truth, rep.change_indices, tol, rep.tested_steps());
    runs.push_back(cobay::make_metrics(match, rep.mse(), rep.runtime_seconds));
  } else {
    if (!opt.events_path.empty() && opt.labels_path.empty()) {
      throw cobay::config_error("eval --seeds with --events also needs --labels");
    }
    const cobay::DetectorConfig detector = cfg.make_detector();
    cobay::EventSequence fixed_events;
    std::vector<std::size_t> fixed_truth;
    if (!opt.events_path.empty()) {
      fixed_events = cobay::load_events_csv(opt.events_path, opt.time_scale, opt.jitter_ties);
      fixed_truth = cobay::load_labels_csv(opt.labels_path);
    }
    for (int i = 0; i < opt.seeds; ++i) {
      const std::uint64_t seed = cobay::derive_seed(cfg.seed, 0x5eedULL, i);
      cobay::EventSequence events;
      std::vector<std::size_t> truth;
      if (!opt.events_path.empty()) {
        // Fixed dataset, varied detector stream.
        events = fixed_events;
        truth = fixed_truth;
      } else {
        const auto segments = choose_segments(opt, cfg);
        cobay::LabeledDataset data =
            cobay::generate_piecewise(segments, cfg.make_basis(), seed);
        events = std::move(data.events);
        truth = std::move(data.change_indices);
      }
      const cobay::DetectionResult result = cobay::run(events, detector, seed);
      runs.push_back(evaluate_run(result, truth, tol));
    }
  }

  const cobay::AggregateMetrics agg = cobay::aggregate(runs);
  print_metrics_table(agg);
  if (!opt.out_path.empty()) {
    cobay::write_text_atomic(opt.out_path, metrics_to_json(agg).dump(2) + "\n");
  }
  return 0;
}

int cmd_ablate(const CliOptions& opt) {
  const cobay::RunConfig base = effective_config(opt);
  std::vector<double> grid;
  if (!opt.grid.empty()) {
    grid = parse_double_list(opt.grid, "--grid");
  } else if (opt.axis == "bases") {
    grid = {1.0, 2.0, 3.0};
  } else if (opt.axis == "ci") {
    grid = {0.95, 0.90, 0.85};
  } else if (opt.axis == "sigma2") {
    grid = {0.01, 0.5, 10.0};
  } else {
    throw cobay::config_error("--axis must be one of bases|ci|sigma2");
  }
  const int seeds = opt.seeds > 0 ? opt.seeds : 5;

  std::string csv =
      "axis_value,fnr_mean,fnr_std,fpr_mean,fpr_std,mse_mean,mse_std,rt_mean\n";
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    cobay::RunConfig cfg = base;
    if (opt.axis == "bases") {
      cfg.n_bases = static_cast<int>(grid[gi]);
    } else if (opt.axis == "ci") {
      cfg.confidence_level = grid[gi];
    } else {
      cfg.prior_variance = grid[gi];
    }
    const cobay::DetectorConfig detector = cfg.make_detector();

    std::vector<cobay::RunMetrics> runs;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t seed = cobay::derive_seed(base.seed, 0xab1a7eULL + gi, s);
      // Ground truth always comes from the full default generator; only the
      // detection model changes along the axis.
      const cobay::LabeledDataset data =
          cobay::generate_piecewise(cobay::default_segments(), cobay::default_basis(), seed);
      const cobay::DetectionResult result = cobay::run(data.events, detector, seed);
      runs.push_back(evaluate_run(result, data.change_indices, cfg.match_tol));
    }
    const cobay::AggregateMetrics agg = cobay::aggregate(runs);
    csv += cobay::format_double(grid[gi]) + "," + cobay::format_double(agg.fnr.mean) + "," +
           cobay::format_double(agg.fnr.stddev) + "," + cobay::format_double(agg.fpr.mean) +
           "," + cobay::format_double(agg.fpr.stddev) + "," +
           cobay::format_double(agg.mse.mean) + "," + cobay::format_double(agg.mse.stddev) +
           "," + cobay::format_double(agg.runtime_minutes.mean) + "\n";
    std::cout << opt.axis << "=" << cobay::format_double(grid[gi]) << "  ";
    print_metrics_table(agg);
  }
  cobay::write_text_atomic(opt.out_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online Bayesian change-point detection for sigmoid-link Hawkes streams"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--seed", opt.seed, "Override the config seed");

  CLI::App* sim = app.add_subcommand("simulate", "Generate a labeled piecewise stream");
  sim->add_option("--config", opt.config_path, "JSON config file");
  sim->add_option("--out", opt.out_path, "Output events CSV")->required();
  sim->add_option("--labels", opt.labels_path, "Output labels CSV");
  sim->add_option("--segments", opt.segments, "Segments as lambda:duration[,lambda:duration...]");
  sim->add_option("--stress", opt.stress, "Stress preset kind:level");
  sim->add_option("--weights", opt.weights, "Ground-truth weights mu,w1,...,wB");

  CLI::App* det = app.add_subcommand("detect", "Run the online detector over an event CSV");
  det->add_option("--config", opt.config_path, "JSON config file");
  det->add_option("--events", opt.events_path, "Input events CSV")->required();
  det->add_option("--out", opt.out_path, "Output report JSON")->required();
  det->add_option("--time-scale", opt.time_scale, "Divide timestamps by this factor");
  det->add_option("--jitter-ties", opt.jitter_ties,
                  "Bump non-increasing timestamps epsilon past their predecessor");
  det->add_flag("--omit-runtime", opt.omit_runtime,
                "Write runtime_seconds as 0.0 for byte-stable output");

  CLI::App* ev = app.add_subcommand("eval", "Score a detection report against labels");
  ev->add_option("--config", opt.config_path, "JSON config file");
  ev->add_option("--report", opt.report_path, "Detection report JSON");
  ev->add_option("--labels", opt.labels_path, "Truth labels CSV");
  ev->add_option("--tol", opt.tol, "Match tolerance in event indices");
  ev->add_option("--out", opt.out_path, "Optional metrics JSON output");
  ev->add_option("--seeds", opt.seeds,
                 "Aggregate over this many seeded detect+eval reruns");
  ev->add_option("--events", opt.events_path, "Events CSV (fixed data for --seeds)");
  ev->add_option("--stress", opt.stress, "Stress preset kind:level for --seeds");
  ev->add_option("--segments", opt.segments, "Segment spec for --seeds");

  CLI::App* ab = app.add_subcommand("ablate", "Sweep one hyperparameter axis");
  ab->add_option("--config", opt.config_path, "JSON config file");
  ab->add_option("--axis", opt.axis, "bases|ci|sigma2")->required();
  ab->add_option("--grid", opt.grid, "Override grid values, comma separated");
  ab->add_option("--seeds", opt.seeds, "Seeds per grid point (default 5)");
  ab->add_option("--out", opt.out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(opt);
    if (det->parsed()) return cmd_detect(opt);
    if (ev->parsed()) return cmd_eval(opt);
    return cmd_ablate(opt);
  } catch (const cobay::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const cobay::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const cobay::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "cobay/common.hpp"
#include "cobay/datagen.hpp"
#include "cobay/detector.hpp"
#include "cobay/eval.hpp"
#include "cobay/events.hpp"

namespace cobay {

using json = nlohmann::ordered_json;

// Shortest round-trip decimal form, locale independent.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[nodiscard]] inline double parse_double_strict(const std::string& text, std::size_t row) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw data_error("row " + std::to_string(row) + ": not a number: '" + text + "'");
  }
  return value;
}

// All file outputs go through a temp-file rename so failed runs never leave
// partial files behind.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw data_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

inline void write_events_csv(const std::filesystem::path& path, const EventSequence& events) {
  std::string out = "timestamp\n";
  for (double t : events.timestamps) {
    out += format_double(t);
    out += '\n';
  }
  write_text_atomic(path, out);
}

// Loads a raw event CSV.  `time_scale` divides timestamps after shifting the
// first one to zero; `tie_jitter` resolves non-increasing rows by bumping
// them epsilon past their predecessor.
[[nodiscard]] inline EventSequence load_events_csv(const std::filesystem::path& path,
                                                   double time_scale = 1.0,
                                                   std::optional<double> tie_jitter = {}) {
  if (!(time_scale > 0.0)) throw config_error("time scale must be positive");
  if (tie_jitter && !(*tie_jitter > 0.0)) throw config_error("tie jitter must be positive");

  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines.front() != "timestamp") {
    throw data_error(path.string() + ": expected header 'timestamp'");
  }
  EventSequence seq;
  seq.timestamps.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    seq.timestamps.push_back(parse_double_strict(lines[i], i + 1));
  }
  if (time_scale != 1.0 && !seq.timestamps.empty()) {
    const double origin = seq.timestamps.front();
    for (double& t : seq.timestamps) t = (t - origin) / time_scale;
  }
  if (tie_jitter) {
    for (std::size_t i = 1; i < seq.timestamps.size(); ++i) {
      if (seq.timestamps[i] <= seq.timestamps[i - 1]) {
        seq.timestamps[i] = seq.timestamps[i - 1] + *tie_jitter;
      }
    }
  }
  try {
    seq.validate();
  } catch (const std::invalid_argument& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  return seq;
}

inline void write_labels_csv(const std::filesystem::path& path,
                             std::span<const std::size_t> change_indices) {
  std::string out = "change_index\n";
  for (std::size_t idx : change_indices) {
    out += std::to_string(idx);
    out += '\n';
  }
  write_text_atomic(path, out);
}

[[nodiscard]] inline std::vector<std::size_t> load_labels_csv(
    const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines.front() != "change_index") {
    throw data_error(path.string() + ": expected header 'change_index'");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const double v = parse_double_strict(lines[i], i + 1);
    if (v < 1.0 || v != std::floor(v)) {
      throw data_error("row " + std::to_string(i + 1) + ": change_index must be a positive integer");
    }
    if (!out.empty() && static_cast<std::size_t>(v) <= out.back()) {
      throw data_error("row " + std::to_string(i + 1) + ": change_index must be strictly increasing");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Flat run configuration backing the CLI; the JSON form groups these fields
// into model / prior / gibbs / detector / eval sections.
struct RunConfig {
  int n_bases = 4;
  double alpha = 50.0;
  double beta = 50.0;
  double scale = 6.0;
  std::vector<double> shifts = {-2.0, -1.0, 0.0, 1.0};
  double support_bound = 6.0;
  double prior_variance = 0.5;
  GibbsConfig gibbs{};
  double confidence_level = 0.90;
  int min_window = 10;
  int max_window = 200;
  int n_predictive = 0;
  int threads = 1;
  std::size_t match_tol = 3;
  std::uint64_t seed = 1;

  [[nodiscard]] BasisSet make_basis() const {
    if (n_bases < 1) throw config_error("model.n_bases must be >= 1");
    if (shifts.size() < static_cast<std::size_t>(n_bases)) {
      throw config_error("model.shifts must provide at least n_bases entries");
    }
    std::vector<BetaBasis> bases;
    for (int b = 0; b < n_bases; ++b) {
      bases.push_back(BetaBasis{alpha, beta, scale, shifts[static_cast<std::size_t>(b)]});
    }
    try {
      return BasisSet{std::move(bases), support_bound};
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("model: ") + e.what());
    }
  }

  [[nodiscard]] DetectorConfig make_detector() const {
    DetectorConfig cfg{make_basis()};
    cfg.gibbs = gibbs;
    cfg.gibbs.prior_variance = prior_variance;
    cfg.confidence_level = confidence_level;
    cfg.n_predictive = n_predictive;
    cfg.min_window = min_window;
    cfg.max_window = max_window;
    cfg.predictive_threads = threads;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    return cfg;
  }

  void validate() const {
    static_cast<void>(make_detector());
    if (match_tol > 1000000) throw config_error("eval.match_tol out of range");
  }
};

namespace detail {

template <typename T>
T get_field(const json& obj, const std::string& section, const std::string& key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error("config: bad value for " + section + "." + key);
  }
}

inline void reject_unknown(const json& obj, const std::string& section,
                           std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    bool found = false;
    for (const char* k : known) {
      if (item.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw config_error("config: unknown key '" + section + (section.empty() ? "" : ".") +
                         item.key() + "'");
    }
  }
}

}  // namespace detail

[[nodiscard]] inline RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw config_error("config: top level must be an object");
  detail::reject_unknown(doc, "", {"model", "prior", "gibbs", "detector", "eval", "seed"});

  RunConfig cfg;
  using detail::get_field;
  if (doc.contains("seed")) cfg.seed = get_field<std::uint64_t>(doc, "", "seed");
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    detail::reject_unknown(m, "model",
                           {"n_bases", "alpha", "beta", "scale", "shifts", "support_bound"});
    if (m.contains("n_bases")) cfg.n_bases = get_field<int>(m, "model", "n_bases");
    if (m.contains("alpha")) cfg.alpha = get_field<double>(m, "model", "alpha");
    if (m.contains("beta")) cfg.beta = get_field<double>(m, "model", "beta");
    if (m.contains("scale")) cfg.scale = get_field<double>(m, "model", "scale");
    if (m.contains("shifts")) cfg.shifts = get_field<std::vector<double>>(m, "model", "shifts");
    if (m.contains("support_bound")) {
      cfg.support_bound = get_field<double>(m, "model", "support_bound");
    }
  }
  if (doc.contains("prior")) {
    const json& p = doc.at("prior");
    detail::reject_unknown(p, "prior", {"sigma2"});
    if (p.contains("sigma2")) cfg.prior_variance = get_field<double>(p, "prior", "sigma2");
  }
  if (doc.contains("gibbs")) {
    const json& g = doc.at("gibbs");
    detail::reject_unknown(g, "gibbs", {"iterations", "burn_in"});
    if (g.contains("iterations")) cfg.gibbs.iterations = get_field<int>(g, "gibbs", "iterations");
    if (g.contains("burn_in")) cfg.gibbs.burn_in = get_field<int>(g, "gibbs", "burn_in");
  }
  if (doc.contains("detector")) {
    const json& d = doc.at("detector");
    detail::reject_unknown(d, "detector",
                           {"confidence_level", "min_window", "max_window", "n_predictive",
                            "threads"});
    if (d.contains("confidence_level")) {
      cfg.confidence_level = get_field<double>(d, "detector", "confidence_level");
    }
    if (d.contains("min_window")) cfg.min_window = get_field<int>(d, "detector", "min_window");
    if (d.contains("max_window")) cfg.max_window = get_field<int>(d, "detector", "max_window");
    if (d.contains("n_predictive")) {
      cfg.n_predictive = get_field<int>(d, "detector", "n_predictive");
    }
    if (d.contains("threads")) cfg.threads = get_field<int>(d, "detector", "threads");
  }
  if (doc.contains("eval")) {
    const json& e = doc.at("eval");
    detail::reject_unknown(e, "eval", {"match_tol"});
    if (e.contains("match_tol")) {
      cfg.match_tol = get_field<std::size_t>(e, "eval", "match_tol");
    }
  }
  cfg.validate();
  return cfg;
}

[[nodiscard]] inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw config_error("config parse error: " + std::string(e.what()));
  }
  return config_from_json(doc);
}

[[nodiscard]] inline json config_to_json(const RunConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["model"] = {{"n_bases", cfg.n_bases}, {"alpha", cfg.alpha},   {"beta", cfg.beta},
                  {"scale", cfg.scale},     {"shifts", cfg.shifts}, {"support_bound", cfg.support_bound}};
  doc["prior"] = {{"sigma2", cfg.prior_variance}};
  doc["gibbs"] = {{"iterations", cfg.gibbs.iterations}, {"burn_in", cfg.gibbs.burn_in}};
  doc["detector"] = {{"confidence_level", cfg.confidence_level},
                     {"min_window", cfg.min_window},
                     {"max_window", cfg.max_window},
                     {"n_predictive", cfg.n_predictive},
                     {"threads", cfg.threads}};
  doc["eval"] = {{"match_tol", cfg.match_tol}};
  return doc;
}

[[nodiscard]] inline json report_to_json(const DetectionResult& result,
                                         const json& config_echo, bool omit_runtime) {
  json doc;
  doc["change_indices"] = result.change_indices;
  json steps = json::array();
  for (const auto& rec : result.records) {
    json row;
    row["index"] = rec.index;
    row["lo"] = rec.interval.lo;
    row["hi"] = rec.interval.hi;
    row["observed"] = rec.observed;
    row["is_change"] = rec.is_change;
    row["tested"] = rec.tested;
    if (rec.tested) {
      double mean = 0.0;
      for (double d : rec.predictive_draws) mean += d;
      row["pred_mean"] = mean / static_cast<double>(rec.predictive_draws.size());
    } else {
      row["pred_mean"] = nullptr;
    }
    steps.push_back(std::move(row));
  }
  doc["steps"] = std::move(steps);
  doc["runtime_seconds"] = omit_runtime ? 0.0 : result.runtime_seconds;
  doc["config_echo"] = config_echo;
  return doc;
}

// Parsed-back detection report, as much of it as evaluation needs.
struct ReportData {
  struct Step {
    std::size_t index = 0;
    double observed = 0.0;
    std::optional<double> pred_mean;
    bool tested = false;
    bool is_change = false;
  };
  std::vector<std::size_t> change_indices;
  std::vector<Step> steps;
  double runtime_seconds = 0.0;

  [[nodiscard]] std::size_t tested_steps() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.tested ? 1 : 0;
    return n;
  }

  [[nodiscard]] double mse() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : steps) {
      if (!s.tested || !s.pred_mean) continue;
      const double err = *s.pred_mean - s.observed;
      sum += err * err;
      ++n;
    }
    if (n == 0) throw data_error("report: no tested steps with predictions");
    return sum / static_cast<double>(n);
  }
};

[[nodiscard]] inline ReportData load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open report: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw data_error("report parse error: " + std::string(e.what()));
  }
  ReportData rep;
  try {
    rep.change_indices = doc.at("change_indices").get<std::vector<std::size_t>>();
    rep.runtime_seconds = doc.at("runtime_seconds").get<double>();
    for (const auto& row : doc.at("steps")) {
      ReportData::Step s;
      s.index = row.at("index").get<std::size_t>();
      s.observed = row.at("observed").get<double>();
      s.tested = row.at("tested").get<bool>();
      s.is_change = row.at("is_change").get<bool>();
      if (!row.at("pred_mean").is_null()) s.pred_mean = row.at("pred_mean").get<double>();
      rep.steps.push_back(s);
    }
  } catch (const json::exception& e) {
    throw data_error("report schema error: " + std::string(e.what()));
  }
  return rep;
}

}  // namespace cobay

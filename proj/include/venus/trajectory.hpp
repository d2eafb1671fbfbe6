/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_TRAJECTORY_HPP_
#define VENUS_TRAJECTORY_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"

namespace venus {

inline constexpr std::string_view kTraceSchema = "venus/1";
inline constexpr std::string_view kManifestSchema = "venus-manifest/1";

enum class Language : std::uint8_t { kEn, kZh, kOther };

constexpr std::string_view to_string(Language l) {
  switch (l) {
    case Language::kEn: return "en";
    case Language::kZh: return "zh";
    case Language::kOther: return "other";
  }
  return "other";
}

inline std::optional<Language> parse_language(std::string_view s) {
  if (s == "en") return Language::kEn;
  if (s == "zh") return Language::kZh;
  if (s == "other") return Language::kOther;
  return std::nullopt;
}

// Pipeline stage a trajectory has reached. Statuses only move forward, except
// that an annotator fix turns a reviewed trace into an accepted one.
enum class TraceStatus : std::uint8_t {
  kRaw,
  kFiltered,
  kReconstructed,
  kAligned,
  kAccepted,
  kRejected,
};

inline constexpr std::array<TraceStatus, 6> kAllTraceStatuses = {
    TraceStatus::kRaw,     TraceStatus::kFiltered, TraceStatus::kReconstructed,
    TraceStatus::kAligned, TraceStatus::kAccepted, TraceStatus::kRejected};

constexpr std::string_view to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::kRaw: return "raw";
    case TraceStatus::kFiltered: return "filtered";
    case TraceStatus::kReconstructed: return "reconstructed";
    case TraceStatus::kAligned: return "aligned";
    case TraceStatus::kAccepted: return "accepted";
    case TraceStatus::kRejected: return "rejected";
  }
  return "raw";
}

inline std::optional<TraceStatus> parse_trace_status(std::string_view s) {
  for (TraceStatus st : kAllTraceStatuses) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct Step {
  int index = 1;  // 1-based
  std::string screenshot_ref;
  ScreenSize screen;
  std::string thought;
  Action action;
  std::string raw_action;

  bool operator==(const Step&) const = default;
};

// Where an augmented sample came from.
struct Provenance {
  std::string trace_id;
  int step = 0;
  int variant = 0;
  bool operator==(const Provenance&) const = default;
};

struct Trajectory {
  std::string trace_id;
  std::string task;
  Language language = Language::kOther;
  std::string source;
  std::string category;
  TraceStatus status = TraceStatus::kRaw;
  bool qa = false;  // source marks the episode as a question-answering task
  bool augmented = false;
  bool fixed_by_annotator = false;
  std::optional<Provenance> provenance;
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
  bool operator==(const Trajectory&) const = default;
};

// Renumbers steps 1..N in order.
inline void renumber_steps(Trajectory& t) {
  for (std::size_t i = 0; i < t.steps.size(); ++i) t.steps[i].index = static_cast<int>(i + 1);
}

inline Step make_step(int index, std::string screenshot_ref, ScreenSize screen,
                      std::string thought, const Action& action) {
  return Step{index, std::move(screenshot_ref), screen, std::move(thought), action,
              serialize_action(action)};
}

// ---------------------------------------------------------------------------
// JSON Lines form

inline nlohmann::ordered_json to_ordered_json(const Step& s) {
  return {{"index", s.index},
          {"screenshot_ref", s.screenshot_ref},
          {"screen", {{"width", s.screen.width}, {"height", s.screen.height}}},
          {"thought", s.thought},
          {"action", serialize_action(s.action)},
          {"raw_action", s.raw_action}};
}

// Metadata first, then steps; optional flags appear only when set.
inline nlohmann::ordered_json to_ordered_json(const Trajectory& t) {
  nlohmann::ordered_json j;
  j["schema"] = kTraceSchema;
  j["trace_id"] = t.trace_id;
  j["task"] = t.task;
  j["language"] = to_string(t.language);
  j["source"] = t.source;
  j["category"] = t.category;
  j["status"] = to_string(t.status);
  if (t.qa) j["qa"] = true;
  if (t.augmented) j["augmented"] = true;
  if (t.fixed_by_annotator) j["fixed_by_annotator"] = true;
  if (t.provenance) {
    j["provenance"] = {{"trace_id", t.provenance->trace_id},
                       {"step", t.provenance->step},
                       {"variant", t.provenance->variant}};
  }
  auto steps = nlohmann::ordered_json::array();
  for (const Step& s : t.steps) steps.push_back(to_ordered_json(s));
  j["steps"] = std::move(steps);
  return j;
}

inline std::string to_jsonl_line(const Trajectory& t) { return to_ordered_json(t).dump(); }

inline void write_jsonl(std::ostream& out, const std::vector<Trajectory>& ts) {
  for (const auto& t : ts) out << to_jsonl_line(t) << '\n';
}

inline std::string to_jsonl(const std::vector<Trajectory>& ts) {
  std::ostringstream out;
  write_jsonl(out, ts);
  return out.str();
}

// Writes through a temporary file and renames it into place.
inline void save_dataset(const std::string& path, const std::vector<Trajectory>& ts) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write '" + tmp + "'");
    write_jsonl(out, ts);
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot rename to '" + path + "': " + ec.message());
}

struct ValidationIssue {
  std::size_t line = 0;  // 1-based line in the source file
  std::string trace_id;
  std::string field;
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;    // rejected records
  std::vector<ValidationIssue> warnings;  // accepted records with caveats

  bool ok() const { return errors.empty(); }
};

inline nlohmann::ordered_json to_ordered_json(const ValidationReport& r) {
  auto issues = [](const std::vector<ValidationIssue>& v) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& i : v) {
      a.push_back({{"line", i.line},
                   {"trace_id", i.trace_id},
                   {"field", i.field},
                   {"code", i.code},
                   {"message", i.message}});
    }
    return a;
  };
  return {{"errors", issues(r.errors)}, {"warnings", issues(r.warnings)}};
}

struct LoadOptions {
  // When set, screenshot_ref values that are relative paths are resolved
  // against this directory and missing files are reported as warnings.
  std::optional<std::filesystem::path> screenshot_root;
};

struct LoadResult {
  std::vector<Trajectory> trajectories;
  ValidationReport report;
};

namespace detail {

struct RecordError {
  std::string field;
  std::string code;
  std::string message;
};

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     nlohmann::json::value_t type, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordError{where + key, "schema_violation", std::string("missing field '") + key + "'"};
  const bool ok = it->type() == type ||
                  (type == nlohmann::json::value_t::number_integer && it->is_number_integer());
  if (!ok) throw RecordError{where + key, "schema_violation", std::string("wrong type for '") + key + "'"};
  return *it;
}

inline std::string optional_string(const nlohmann::json& j, const char* key,
                                   const std::string& where, std::string fallback = {}) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) throw RecordError{where + key, "schema_violation", std::string("'") + key + "' must be a string"};
  return it->get<std::string>();
}

inline bool optional_bool(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return false;
  if (!it->is_boolean()) throw RecordError{key, "schema_violation", std::string("'") + key + "' must be a boolean"};
  return it->get<bool>();
}

inline Action parse_or_throw(const std::string& raw, const std::string& field) {
  auto parsed = parse_action(raw);
  if (!parsed) {
    throw RecordError{field, std::string(to_string(parsed.error().kind)), parsed.error().message};
  }
  return *parsed;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  using vt = nlohmann::json::value_t;
  if (!j.is_object()) throw RecordError{"", "schema_violation", "record is not a JSON object"};
  if (auto it = j.find("schema"); it != j.end() && *it != kTraceSchema) {
    throw RecordError{"schema", "schema_violation", "unsupported schema " + it->dump()};
  }
  Trajectory t;
  t.trace_id = require(j, "trace_id", vt::string, "").get<std::string>();
  if (t.trace_id.empty()) throw RecordError{"trace_id", "schema_violation", "empty trace_id"};
  t.task = require(j, "task", vt::string, "").get<std::string>();
  const std::string lang = optional_string(j, "language", "", "other");
  auto language = parse_language(lang);
  if (!language) throw RecordError{"language", "schema_violation", "unknown language '" + lang + "'"};
  t.language = *language;
  t.source = optional_string(j, "source", "");
  t.category = optional_string(j, "category", "");
  const std::string status = optional_string(j, "status", "", "raw");
  auto st = parse_trace_status(status);
  if (!st) throw RecordError{"status", "schema_violation", "unknown status '" + status + "'"};
  t.status = *st;
  t.qa = optional_bool(j, "qa");
  t.augmented = optional_bool(j, "augmented");
  t.fixed_by_annotator = optional_bool(j, "fixed_by_annotator");
  if (auto it = j.find("provenance"); it != j.end()) {
    const auto& p = *it;
    if (!p.is_object()) throw RecordError{"provenance", "schema_violation", "provenance must be an object"};
    t.provenance = Provenance{require(p, "trace_id", vt::string, "provenance.").get<std::string>(),
                              require(p, "step", vt::number_integer, "provenance.").get<int>(),
                              require(p, "variant", vt::number_integer, "provenance.").get<int>()};
  }

  const auto& steps = require(j, "steps", vt::array, "");
  if (steps.empty()) throw RecordError{"steps", "schema_violation", "trajectory has no steps"};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& sj = steps[i];
    const std::string where = "steps[" + std::to_string(i + 1) + "].";
    if (!sj.is_object()) throw RecordError{where, "schema_violation", "step is not an object"};
    Step s;
    s.index = require(sj, "index", vt::number_integer, where).get<int>();
    if (s.index != static_cast<int>(i + 1)) {
      throw RecordError{where + "index", "schema_violation",
                        "step indices must be contiguous from 1; got " + std::to_string(s.index)};
    }
    s.screenshot_ref = require(sj, "screenshot_ref", vt::string, where).get<std::string>();
    const auto& screen = require(sj, "screen", vt::object, where);
    s.screen.width = require(screen, "width", vt::number_integer, where + "screen.").get<int>();
    s.screen.height = require(screen, "height", vt::number_integer, where + "screen.").get<int>();
    if (!s.screen.valid()) throw RecordError{where + "screen", "schema_violation", "screen size must be positive"};
    s.thought = optional_string(sj, "thought", where);
    s.raw_action = require(sj, "raw_action", vt::string, where).get<std::string>();
    const Action from_raw = parse_or_throw(s.raw_action, where + "raw_action");
    // `action` holds the canonical (possibly standardized) action; it falls
    // back to the raw string when absent.
    if (auto it = sj.find("action"); it != sj.end()) {
      if (!it->is_string()) throw RecordError{where + "action", "schema_violation", "'action' must be a string"};
      s.action = parse_or_throw(it->get<std::string>(), where + "action");
    } else {
      s.action = from_raw;
    }
    t.steps.push_back(std::move(s));
  }
  return t;
}

}  // namespace detail

// Parses one canonical record; throws kSchemaViolation on any defect.
inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  try {
    return detail::trajectory_from_json(j);
  } catch (const detail::RecordError& e) {
    throw Error(ErrorCode::kSchemaViolation, e.field + ": " + e.message);
  }
}

// Reads every line; invalid records go to the report with their line number
// and are never silently dropped.
inline LoadResult parse_dataset(std::istream& in, const LoadOptions& options = {}) {
  LoadResult result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::string trace_id;
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw detail::RecordError{"", "schema_violation", std::string("invalid JSON: ") + e.what()};
      }
      if (j.is_object() && j.contains("trace_id") && j["trace_id"].is_string()) {
        trace_id = j["trace_id"].get<std::string>();
      }
      Trajectory t = detail::trajectory_from_json(j);
      if (!seen.insert(t.trace_id).second) {
        throw detail::RecordError{"trace_id", "schema_violation", "duplicate trace_id '" + t.trace_id + "'"};
      }
      for (const Step& s : t.steps) {
        if (auto problem = validate_action(s.action, s.screen)) {
          result.report.warnings.push_back({line_no, t.trace_id,
                                            "steps[" + std::to_string(s.index) + "].action",
                                            "off_screen", *problem});
        }
        if (options.screenshot_root && !s.screenshot_ref.empty() &&
            s.screenshot_ref.find("://") == std::string::npos) {
          const std::filesystem::path p = *options.screenshot_root / s.screenshot_ref;
          if (!std::filesystem::exists(p)) {
            result.report.warnings.push_back({line_no, t.trace_id,
                                              "steps[" + std::to_string(s.index) + "].screenshot_ref",
                                              "missing_screenshot", "not found: " + p.string()});
          }
        }
      }
      result.trajectories.push_back(std::move(t));
    } catch (const detail::RecordError& e) {
      result.report.errors.push_back({line_no, trace_id, e.field, e.code, e.message});
    }
  }
  return result;
}

inline LoadResult load_dataset(const std::string& path, const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open dataset '" + path + "'");
  return parse_dataset(in, options);
}

// Loads a dataset and fails on the first invalid record; for tools that must
// not continue with a partial dataset.
inline std::vector<Trajectory> load_dataset_strict(const std::string& path,
                                                   const LoadOptions& options = {}) {
  LoadResult r = load_dataset(path, options);
  if (!r.report.ok()) {
    const auto& e = r.report.errors.front();
    throw Error(ErrorCode::kSchemaViolation, path + ":" + std::to_string(e.line) + ": " +
                                                 e.field + ": " + e.message);
  }
  return std::move(r.trajectories);
}

// ---------------------------------------------------------------------------
// History context

struct HistoryContext {
  std::vector<std::pair<std::string, Action>> pairs;  // (thought, action), in step order

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  bool operator==(const HistoryContext&) const = default;
};

// Thought/action pairs of steps 1..n-1 for step n (1-based).
inline HistoryContext history_context(const Trajectory& t, int n) {
  if (n < 1 || n > static_cast<int>(t.steps.size())) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "step " + std::to_string(n) + " out of range for trace '" + t.trace_id +
                    "' with " + std::to_string(t.steps.size()) + " steps");
  }
  HistoryContext h;
  h.pairs.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) h.pairs.emplace_back(t.steps[i].thought, t.steps[i].action);
  return h;
}

// One "Step k: <thought> → <action>" line per pair; "None" when empty.
inline std::string render_history(const HistoryContext& h) {
  if (h.empty()) return "None";
  std::string out;
  for (std::size_t i = 0; i < h.pairs.size(); ++i) {
    if (i > 0) out.push_back('\n');
    std::string thought = h.pairs[i].first;
    for (char& c : thought) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    out += "Step " + std::to_string(i + 1) + ": " + thought + " \xE2\x86\x92 " +
           serialize_action(h.pairs[i].second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Action statistics

struct ActionStats {
  std::array<std::size_t, kNumActionKinds> counts{};

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
  bool empty() const { return total() == 0; }
  std::size_t count(ActionKind k) const { return counts[static_cast<std::size_t>(k)]; }
  // Zero for every kind when there are no actions at all.
  double frequency(ActionKind k) const {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(count(k)) / static_cast<double>(n);
  }
  void add(ActionKind k, std::size_t n = 1) { counts[static_cast<std::size_t>(k)] += n; }

  ActionStats& operator+=(const ActionStats& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
  }
  friend ActionStats operator+(ActionStats a, const ActionStats& b) { return a += b; }
  bool operator==(const ActionStats&) const = default;
};

inline ActionStats action_distribution(const std::vector<Trajectory>& ts) {
  ActionStats stats;
  for (const auto& t : ts) {
    for (const auto& s : t.steps) stats.add(s.action.kind);
  }
  return stats;
}

inline nlohmann::ordered_json to_ordered_json(const ActionStats& s) {
  nlohmann::ordered_json counts, freqs;
  for (ActionKind k : kAllActionKinds) {
    counts[std::string(to_string(k))] = s.count(k);
    freqs[std::string(to_string(k))] = s.frequency(k);
  }
  return {{"total", s.total()}, {"empty", s.empty()}, {"counts", counts}, {"frequencies", freqs}};
}

// ---------------------------------------------------------------------------
// Manifest

struct ShardInfo {
  std::string path;
  std::size_t count = 0;
  std::map<std::string, std::size_t> status_tally;
  bool operator==(const ShardInfo&) const = default;
};

// Dataset shards plus the sources whose scroll directions follow the
// content-motion convention and must be inverted on ingest.
struct Manifest {
  std::vector<ShardInfo> shards;
  std::set<std::string> content_motion_sources;
  bool operator==(const Manifest&) const = default;
};

inline ShardInfo describe_shard(const std::string& path, const std::vector<Trajectory>& ts) {
  ShardInfo info{path, ts.size(), {}};
  for (const auto& t : ts) ++info.status_tally[std::string(to_string(t.status))];
  return info;
}

inline nlohmann::ordered_json to_ordered_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["schema"] = kManifestSchema;
  auto shards = nlohmann::ordered_json::array();
  for (const auto& s : m.shards) {
    nlohmann::ordered_json tally = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.status_tally) tally[k] = v;
    shards.push_back({{"path", s.path}, {"count", s.count}, {"status_tally", tally}});
  }
  j["shards"] = std::move(shards);
  j["content_motion_sources"] = std::vector<std::string>(m.content_motion_sources.begin(),
                                                         m.content_motion_sources.end());
  return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", std::string(kManifestSchema)) != kManifestSchema) {
      throw Error(ErrorCode::kSchemaViolation, "unsupported manifest schema");
    }
    Manifest m;
    for (const auto& s : j.value("shards", nlohmann::json::array())) {
      ShardInfo info;
      info.path = s.at("path").get<std::string>();
      info.count = s.at("count").get<std::size_t>();
      const nlohmann::json tally = s.value("status_tally", nlohmann::json::object());
      for (const auto& [k, v] : tally.items()) {
        info.status_tally[k] = v.get<std::size_t>();
      }
      m.shards.push_back(std::move(info));
    }
    for (const auto& src : j.value("content_motion_sources", nlohmann::json::array())) {
      m.content_motion_sources.insert(src.get<std::string>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad manifest: ") + e.what());
  }
}

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, "manifest '" + path + "': " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace venus

#endif  // VENUS_TRAJECTORY_HPP_

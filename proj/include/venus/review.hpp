/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_REVIEW_HPP_
#define VENUS_REVIEW_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"
#include "venus/trajectory.hpp"

namespace venus::review {

enum class Verdict : std::uint8_t { kAccept, kReject, kFix };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kAccept: return "accept";
    case Verdict::kReject: return "reject";
    case Verdict::kFix: return "fix";
  }
  return "";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "accept") return Verdict::kAccept;
  if (s == "reject") return Verdict::kReject;
  if (s == "fix") return Verdict::kFix;
  return std::nullopt;
}

struct StepFix {
  int step = 0;        // 1-based
  std::string action;  // corrected action in the surface syntax
  bool operator==(const StepFix&) const = default;
};

struct ReviewDecision {
  std::string trace_id;
  Verdict verdict = Verdict::kAccept;
  std::vector<StepFix> fixes;
  std::string note;
  std::string reviewer;
  std::int64_t timestamp_ms = 0;  // 0 = assign on record
  bool operator==(const ReviewDecision&) const = default;
};

inline nlohmann::ordered_json to_ordered_json(const ReviewDecision& d) {
  auto fixes = nlohmann::ordered_json::array();
  for (const auto& f : d.fixes) fixes.push_back({{"step", f.step}, {"action", f.action}});
  return {{"trace_id", d.trace_id}, {"verdict", to_string(d.verdict)}, {"fixes", std::move(fixes)},
          {"note", d.note},         {"reviewer", d.reviewer},          {"timestamp", d.timestamp_ms}};
}

// Body of a decision; `trace_id` may come from the URL instead.
inline ReviewDecision decision_from_json(const nlohmann::json& j, std::string trace_id = {}) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidDecision, "decision must be a JSON object");
  ReviewDecision d;
  try {
    d.trace_id = trace_id.empty() ? j.at("trace_id").get<std::string>() : std::move(trace_id);
    const std::string verdict = j.at("verdict").get<std::string>();
    auto v = parse_verdict(verdict);
    if (!v) throw Error(ErrorCode::kInvalidDecision, "unknown verdict '" + verdict + "'");
    d.verdict = *v;
    for (const auto& f : j.value("fixes", nlohmann::json::array())) {
      d.fixes.push_back({f.at("step").get<int>(), f.at("action").get<std::string>()});
    }
    d.note = j.value("note", "");
    d.reviewer = j.value("reviewer", "");
    d.timestamp_ms = j.value("timestamp", std::int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidDecision, std::string("malformed decision: ") + e.what());
  }
  return d;
}

enum class ReviewStatus : std::uint8_t { kPending, kAccepted, kRejected, kFixed };

constexpr std::string_view to_string(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kAccepted: return "accepted";
    case ReviewStatus::kRejected: return "rejected";
    case ReviewStatus::kFixed: return "fixed";
  }
  return "";
}

inline std::optional<ReviewStatus> parse_review_status(std::string_view s) {
  for (auto st : {ReviewStatus::kPending, ReviewStatus::kAccepted, ReviewStatus::kRejected,
                  ReviewStatus::kFixed}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct IndexEntry {
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<ReviewDecision> latest;
  std::size_t decisions = 0;
  bool operator==(const IndexEntry&) const = default;
};

using StatusIndex = std::map<std::string, IndexEntry>;

// Applies annotator fixes: each fixed step gets the corrected action and
// every step after the last fixed one is dropped.
inline Trajectory apply_fixes(const Trajectory& t, const std::vector<StepFix>& fixes) {
  Trajectory out = t;
  int last = 0;
  for (const StepFix& f : fixes) {
    if (f.step < 1 || f.step > static_cast<int>(t.steps.size())) {
      throw Error(ErrorCode::kInvalidFix, "fix targets step " + std::to_string(f.step) + " of a " +
                                              std::to_string(t.steps.size()) + "-step trace");
    }
    const std::string raw(text::trim(f.action));
    auto parsed = parse_action(raw);
    if (!parsed) {
      throw Error(ErrorCode::kInvalidFix, "step " + std::to_string(f.step) + ": " + parsed.error().message);
    }
    Step& s = out.steps[static_cast<std::size_t>(f.step - 1)];
    s.action = *parsed;
    s.raw_action = raw;
    last = std::max(last, f.step);
  }
  out.steps.resize(static_cast<std::size_t>(last));
  out.fixed_by_annotator = true;
  return out;
}

// Append-only decision log over a fixed review queue, with a status index
// that always equals a replay of the log. Writes are serialized; readers get
// immutable snapshots.
class ReviewStore {
 public:
  ReviewStore(std::vector<Trajectory> queue, std::filesystem::path store_dir)
      : queue_(std::move(queue)), log_path_(std::move(store_dir) / "decisions.jsonl") {
    for (std::size_t i = 0; i < queue_.size(); ++i) position_[queue_[i].trace_id] = i;
    std::error_code ec;
    std::filesystem::create_directories(log_path_.parent_path(), ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot create store directory: " + ec.message());
    index_ = std::make_shared<const StatusIndex>(replay());
  }

  const std::vector<Trajectory>& queue() const { return queue_; }
  const std::filesystem::path& log_path() const { return log_path_; }

  const Trajectory* find(const std::string& trace_id) const {
    auto it = position_.find(trace_id);
    return it == position_.end() ? nullptr : &queue_[it->second];
  }

  std::shared_ptr<const StatusIndex> snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return index_;
  }

  // Rebuilds the index from the log on disk.
  StatusIndex replay() const {
    StatusIndex index = empty_index();
    std::ifstream in(log_path_, std::ios::binary);
    if (!in) return index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      try {
        ReviewDecision d = decision_from_json(nlohmann::json::parse(line));
        if (!index.count(d.trace_id)) {
          throw Error(ErrorCode::kUnknownTrace, "unknown trace '" + d.trace_id + "'");
        }
        apply(index, d);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kSchemaViolation,
                    log_path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return index;
  }

  // Validates, appends to the log, then publishes a new index snapshot.
  ReviewDecision record(ReviewDecision d) {
    const Trajectory* trace = find(d.trace_id);
    if (!trace) throw Error(ErrorCode::kUnknownTrace, "unknown trace '" + d.trace_id + "'");
    if (d.verdict == Verdict::kFix && d.fixes.empty()) {
      throw Error(ErrorCode::kInvalidFix, "a fix decision needs at least one step fix");
    }
    if (d.verdict != Verdict::kFix && !d.fixes.empty()) {
      throw Error(ErrorCode::kInvalidDecision, "only fix decisions may carry step fixes");
    }
    if (d.verdict == Verdict::kFix) apply_fixes(*trace, d.fixes);  // throws kInvalidFix

    std::lock_guard<std::mutex> lock(mu_);
    const auto& entry = index_->at(d.trace_id);
    const std::int64_t last = entry.latest ? entry.latest->timestamp_ms : 0;
    if (d.timestamp_ms == 0) {
      d.timestamp_ms = std::max(now_ms(), last + 1);
    } else if (d.timestamp_ms < last) {
      throw Error(ErrorCode::kInvalidDecision, "timestamp precedes the trace's latest decision");
    }
    {
      std::ofstream out(log_path_, std::ios::binary | std::ios::app);
      if (!out) throw Error(ErrorCode::kIoFailure, "cannot append to " + log_path_.string());
      out << to_ordered_json(d).dump() << '\n';
      out.flush();
      if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + log_path_.string());
    }
    auto next = std::make_shared<StatusIndex>(*index_);
    apply(*next, d);
    index_ = std::move(next);
    return d;
  }

  // Accepted traces as-is and fixed traces with their fixes applied, in
  // queue order, all marked accepted.
  std::vector<Trajectory> accepted() const {
    const auto index = snapshot();
    std::vector<Trajectory> out;
    for (const Trajectory& t : queue_) {
      const IndexEntry& e = index->at(t.trace_id);
      if (e.status == ReviewStatus::kAccepted) {
        Trajectory a = t;
        a.status = TraceStatus::kAccepted;
        out.push_back(std::move(a));
      } else if (e.status == ReviewStatus::kFixed) {
        Trajectory a = apply_fixes(t, e.latest->fixes);
        a.status = TraceStatus::kAccepted;
        out.push_back(std::move(a));
      }
    }
    return out;
  }

  std::string export_jsonl() const { return to_jsonl(accepted()); }

  void export_accepted(const std::string& path) const { save_dataset(path, accepted()); }

 private:
  static std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  StatusIndex empty_index() const {
    StatusIndex index;
    for (const auto& t : queue_) index[t.trace_id] = {};
    return index;
  }

  // Latest decision wins.
  static void apply(StatusIndex& index, const ReviewDecision& d) {
    IndexEntry& e = index[d.trace_id];
    switch (d.verdict) {
      case Verdict::kAccept: e.status = ReviewStatus::kAccepted; break;
      case Verdict::kReject: e.status = ReviewStatus::kRejected; break;
      case Verdict::kFix: e.status = ReviewStatus::kFixed; break;
    }
    e.latest = d;
    ++e.decisions;
  }

  std::vector<Trajectory> queue_;
  std::map<std::string, std::size_t> position_;
  std::filesystem::path log_path_;
  mutable std::mutex mu_;
  std::shared_ptr<const StatusIndex> index_;
};

}  // namespace venus::review

#endif  // VENUS_REVIEW_HPP_

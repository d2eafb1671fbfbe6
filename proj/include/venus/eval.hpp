/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_EVAL_HPP_
#define VENUS_EVAL_HPP_

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"
#include "venus/reward.hpp"
#include "venus/text.hpp"

namespace venus::eval {

inline constexpr std::string_view kReportSchema = "venus-eval/1";

struct Prediction {
  std::string sample_id;
  std::string response;
};

struct GroundingSample {
  std::string sample_id;
  std::string instruction;
  std::string screenshot_ref;
  Box gt_box;
  std::string platform = "mobile";  // mobile | desktop | web
  std::string element = "text";     // text | icon
};

struct NavStepSample {
  std::string sample_id;
  std::string task;
  std::string history;
  std::string screenshot_ref;
  Action gt_action;
  ScreenSize screen;
  std::optional<Box> gt_box;  // element box for click-like actions
};

struct Tally {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

// Evaluation output. `report` is the serialized form, built with a fixed key
// order so identical inputs give identical bytes.
struct EvalReport {
  Tally overall;
  std::map<std::string, std::map<std::string, Tally>> breakdowns;  // axis -> tag -> tally
  std::vector<std::string> missing;
  std::vector<std::string> unparseable;
  nlohmann::ordered_json report;

  std::string dump() const { return report.dump(2) + "\n"; }
};

namespace detail {

template <typename Sample>
std::unordered_map<std::string, const Prediction*> index_predictions(
    const std::vector<Prediction>& preds, const std::vector<Sample>& samples) {
  std::set<std::string> known;
  for (const auto& s : samples) known.insert(s.sample_id);
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!known.count(p.sample_id)) {
      throw Error(ErrorCode::kUnknownSampleId, "prediction for unknown sample '" + p.sample_id + "'");
    }
    if (!by_id.emplace(p.sample_id, &p).second) {
      throw Error(ErrorCode::kDuplicatePrediction, "duplicate prediction for '" + p.sample_id + "'");
    }
  }
  return by_id;
}

inline nlohmann::ordered_json tally_json(const Tally& t) {
  return {{"total", t.total}, {"correct", t.correct}, {"accuracy", t.accuracy()}};
}

inline nlohmann::ordered_json breakdown_json(
    const std::map<std::string, std::map<std::string, Tally>>& breakdowns) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [axis, tags] : breakdowns) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::object();
    for (const auto& [tag, tally] : tags) rows[tag] = tally_json(tally);
    out[axis] = std::move(rows);
  }
  return out;
}

}  // namespace detail

// A sample is correct when the center of the predicted box lies inside the
// ground-truth box (edges included). Unparseable and missing predictions are
// incorrect and listed in the report.
inline EvalReport eval_grounding(const std::vector<Prediction>& preds,
                                 const std::vector<GroundingSample>& samples) {
  const auto by_id = detail::index_predictions(preds, samples);
  EvalReport r;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& s : samples) {
    bool correct = false;
    nlohmann::ordered_json row = {{"sample_id", s.sample_id}};
    auto it = by_id.find(s.sample_id);
    if (it == by_id.end()) {
      r.missing.push_back(s.sample_id);
      row["status"] = "missing";
    } else if (auto box = parse_box(it->second->response)) {
      correct = center_in_box(*box, s.gt_box);
      row["status"] = "scored";
      row["center"] = {box->center_x(), box->center_y()};
    } else {
      r.unparseable.push_back(s.sample_id);
      row["status"] = "unparseable";
    }
    row["correct"] = correct;
    rows.push_back(std::move(row));

    auto bump = [&](Tally& t) {
      ++t.total;
      if (correct) ++t.correct;
    };
    bump(r.overall);
    bump(r.breakdowns["platform"][s.platform]);
    bump(r.breakdowns["element"][s.element]);
    bump(r.breakdowns["platform_element"][s.platform + "/" + s.element]);
  }
  r.report = {{"schema", kReportSchema},
              {"kind", "grounding"},
              {"overall", detail::tally_json(r.overall)},
              {"breakdowns", detail::breakdown_json(r.breakdowns)},
              {"missing", r.missing},
              {"unparseable", r.unparseable},
              {"rules", "correct iff the center of the predicted [x1,y1,x2,y2] box lies in the "
                        "ground-truth box, edges inclusive; unparseable or missing => incorrect"},
              {"samples", std::move(rows)}};
  return r;
}

// Parameter check behind Step SR, assuming the kinds already match.
inline bool step_parameters_correct(const Action& pred, const NavStepSample& s,
                                    const RewardConfig& base) {
  const RewardConfig cfg = base.scaled_for(s.screen);
  const Action& gt = s.gt_action;
  switch (gt.kind) {
    case ActionKind::kClick:
    case ActionKind::kLongPress:
      if (s.gt_box) return point_in_box(pred.point.x, pred.point.y, *s.gt_box);
      return distance(pred.point, gt.point) <= cfg.delta1;
    case ActionKind::kScroll:
      return pred.direction == gt.direction;
    case ActionKind::kDrag:
      return distance(pred.start, gt.start) <= cfg.delta1 && distance(pred.end, gt.end) <= cfg.delta1;
    case ActionKind::kType:
    case ActionKind::kFinished:
    case ActionKind::kCallUser:
      return text::token_f1(pred.text, gt.text) >= cfg.f1_threshold;
    case ActionKind::kLaunch:
      return text::equivalent(pred.text, gt.text);
    default:
      return true;
  }
}

// Accepts a tagged model reply or a bare action string.
inline ActionResult parse_prediction(const std::string& response) {
  ModelOutput out = parse_model_output(response);
  if (out.action.has_value() || response.find("<action>") != std::string::npos) return out.action;
  return parse_action(response);
}

inline std::string nav_rules(const RewardConfig& cfg) {
  return "type_correct iff kinds match; step_correct iff type_correct and: Click/LongPress inside "
         "the gt element box when given, else within delta1=" + nlohmann::json(cfg.delta1).dump() +
         " px (scaled by screen width / " + nlohmann::json(cfg.reference_width).dump() +
         "); Drag both endpoints within delta1; Type/Finished/CallUser token F1 >= " +
         nlohmann::json(cfg.f1_threshold).dump() +
         "; Launch case-folded app name equality; Scroll direction match; other kinds need "
         "only the kind; missing or unparseable predictions are incorrect";
}

inline EvalReport eval_nav_steps(const std::vector<Prediction>& preds,
                                 const std::vector<NavStepSample>& samples, const RewardConfig& cfg) {
  const auto by_id = detail::index_predictions(preds, samples);
  EvalReport r;
  Tally type_tally;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& s : samples) {
    bool type_ok = false;
    bool step_ok = false;
    nlohmann::ordered_json row = {{"sample_id", s.sample_id}};
    auto it = by_id.find(s.sample_id);
    if (it == by_id.end()) {
      r.missing.push_back(s.sample_id);
      row["status"] = "missing";
    } else {
      const ActionResult pred = parse_prediction(it->second->response);
      if (!pred) {
        r.unparseable.push_back(s.sample_id);
        row["status"] = "unparseable";
      } else {
        row["status"] = "scored";
        row["predicted"] = serialize_action(*pred);
        type_ok = pred->kind == s.gt_action.kind;
        step_ok = type_ok && step_parameters_correct(*pred, s, cfg);
      }
    }
    row["type_correct"] = type_ok;
    row["step_correct"] = step_ok;
    rows.push_back(std::move(row));

    ++type_tally.total;
    if (type_ok) ++type_tally.correct;
    ++r.overall.total;
    if (step_ok) ++r.overall.correct;
    Tally& kind_row = r.breakdowns["gt_kind"][std::string(to_string(s.gt_action.kind))];
    ++kind_row.total;
    if (step_ok) ++kind_row.correct;
  }
  r.report = {{"schema", kReportSchema},
              {"kind", "nav"},
              {"type_accuracy", type_tally.accuracy()},
              {"step_success_rate", r.overall.accuracy()},
              {"overall", detail::tally_json(r.overall)},
              {"type", detail::tally_json(type_tally)},
              {"breakdowns", detail::breakdown_json(r.breakdowns)},
              {"missing", r.missing},
              {"unparseable", r.unparseable},
              {"rules", nav_rules(cfg)},
              {"config", reward_config_to_json(cfg)},
              {"samples", std::move(rows)}};
  return r;
}

inline double type_accuracy(const EvalReport& r) { return r.report.at("type_accuracy").get<double>(); }
inline double step_success_rate(const EvalReport& r) {
  return r.report.at("step_success_rate").get<double>();
}

// ---------------------------------------------------------------------------
// JSON Lines readers

namespace detail {

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation, path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline Box box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::kSchemaViolation, "box must be [x1,y1,x2,y2]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.well_formed()) throw Error(ErrorCode::kSchemaViolation, "box must have x1<=x2 and y1<=y2");
  return b;
}

}  // namespace detail

inline Prediction prediction_from_json(const nlohmann::json& j) {
  return {j.at("sample_id").get<std::string>(), j.at("response").get<std::string>()};
}

inline GroundingSample grounding_sample_from_json(const nlohmann::json& j) {
  GroundingSample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.instruction = j.value("instruction", "");
  s.screenshot_ref = j.value("screenshot_ref", "");
  s.gt_box = detail::box_from_json(j.at("gt_box"));
  s.platform = j.value("platform", "mobile");
  s.element = j.value("element", "text");
  return s;
}

inline NavStepSample nav_sample_from_json(const nlohmann::json& j) {
  NavStepSample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.task = j.value("task", "");
  s.history = j.value("history", "");
  s.screenshot_ref = j.value("screenshot_ref", "");
  auto gt = parse_action(j.at("gt_action").get<std::string>());
  if (!gt) throw Error(ErrorCode::kSchemaViolation, "gt_action: " + gt.error().message);
  s.gt_action = *gt;
  const auto& screen = j.at("screen");
  s.screen = {screen.at("width").get<int>(), screen.at("height").get<int>()};
  if (!s.screen.valid()) throw Error(ErrorCode::kSchemaViolation, "screen size must be positive");
  if (j.contains("gt_box") && !j["gt_box"].is_null()) s.gt_box = detail::box_from_json(j["gt_box"]);
  return s;
}

inline std::vector<Prediction> load_predictions(const std::string& path) {
  std::vector<Prediction> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j) { out.push_back(prediction_from_json(j)); });
  return out;
}

inline std::vector<GroundingSample> load_grounding_samples(const std::string& path) {
  std::vector<GroundingSample> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j) { out.push_back(grounding_sample_from_json(j)); });
  return out;
}

inline std::vector<NavStepSample> load_nav_samples(const std::string& path) {
  std::vector<NavStepSample> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j) { out.push_back(nav_sample_from_json(j)); });
  return out;
}

}  // namespace venus::eval

#endif  // VENUS_EVAL_HPP_

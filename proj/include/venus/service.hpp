/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_SERVICE_HPP_
#define VENUS_SERVICE_HPP_

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"
#include "venus/review.hpp"
#include "venus/reward.hpp"
#include "venus/trajectory.hpp"

namespace venus::service {

// Error surfaced to HTTP clients as {code, message, detail}.
struct ApiError {
  int status = 400;
  std::string code;
  std::string message;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();

  nlohmann::ordered_json body() const {
    return {{"code", code}, {"message", message}, {"detail", detail}};
  }
};

inline ApiError to_api_error(const Error& e) {
  int status = 400;
  switch (e.code()) {
    case ErrorCode::kUnknownTrace: status = 404; break;
    case ErrorCode::kInvalidFix:
    case ErrorCode::kInvalidDecision: status = 422; break;
    case ErrorCode::kIoFailure: status = 500; break;
    default: break;
  }
  return {status, std::string(to_string(e.code())), e.what(), nlohmann::ordered_json::object()};
}

inline ApiError bad_request(const std::string& message) {
  return {400, "bad_request", message, nlohmann::ordered_json::object()};
}

// ---------------------------------------------------------------------------
// Reward endpoints as plain functions of the request body.

namespace detail {

inline RewardConfig request_config(const nlohmann::json& body, const RewardConfig& base) {
  auto it = body.find("config");
  if (it == body.end() || it->is_null()) return base;
  try {
    return reward_config_from_json(*it, base);
  } catch (const Error& e) {
    throw ApiError{400, std::string(to_string(e.code())), e.what(), nlohmann::ordered_json::object()};
  }
}

inline const nlohmann::json& field(const nlohmann::json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end()) throw bad_request(std::string("missing field '") + key + "'");
  return *it;
}

inline std::string string_field(const nlohmann::json& body, const char* key) {
  const auto& v = field(body, key);
  if (!v.is_string()) throw bad_request(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// {response, gt_box: [x1, y1, x2, y2], config?} -> breakdown
inline nlohmann::ordered_json grounding_endpoint(const nlohmann::json& body, const RewardConfig& base) {
  if (!body.is_object()) throw bad_request("body must be a JSON object");
  const RewardConfig cfg = detail::request_config(body, base);
  const std::string response = detail::string_field(body, "response");
  const auto& box = detail::field(body, "gt_box");
  if (!box.is_array() || box.size() != 4 ||
      !std::all_of(box.begin(), box.end(), [](const auto& v) { return v.is_number(); })) {
    throw bad_request("'gt_box' must be [x1, y1, x2, y2]");
  }
  const Box gt{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
  if (!gt.well_formed()) throw bad_request("'gt_box' must satisfy x1 <= x2 and y1 <= y2");
  return to_ordered_json(grounding_reward(response, gt, cfg));
}

// {response, gt_action, screen: {width, height}, config?} -> breakdown
inline nlohmann::ordered_json navigation_endpoint(const nlohmann::json& body, const RewardConfig& base) {
  if (!body.is_object()) throw bad_request("body must be a JSON object");
  const RewardConfig cfg = detail::request_config(body, base);
  const std::string response = detail::string_field(body, "response");
  const std::string gt_text = detail::string_field(body, "gt_action");
  auto gt = parse_action(gt_text);
  if (!gt) throw bad_request("'gt_action' does not parse: " + gt.error().message);
  const auto& screen = detail::field(body, "screen");
  if (!screen.is_object() || !screen.contains("width") || !screen.contains("height") ||
      !screen["width"].is_number_integer() || !screen["height"].is_number_integer()) {
    throw bad_request("'screen' must be {width, height}");
  }
  const ScreenSize size{screen["width"].get<int>(), screen["height"].get<int>()};
  if (!size.valid()) throw bad_request("'screen' must be positive");
  return to_ordered_json(navigation_reward(response, NavigationTarget{*gt, size}, cfg));
}

// Array of grounding or navigation requests. The optional "kind" field picks
// the endpoint; otherwise gt_box means grounding and gt_action navigation.
// A failing element yields {"error": {...}} in its slot.
inline nlohmann::ordered_json batch_endpoint(const nlohmann::json& body, const RewardConfig& base) {
  if (!body.is_array()) throw bad_request("batch body must be a JSON array");
  auto out = nlohmann::ordered_json::array();
  for (const auto& item : body) {
    try {
      std::string kind = item.is_object() ? item.value("kind", "") : "";
      if (kind.empty() && item.is_object()) kind = item.contains("gt_box") ? "grounding" : "navigation";
      if (kind == "grounding") {
        out.push_back(grounding_endpoint(item, base));
      } else if (kind == "navigation") {
        out.push_back(navigation_endpoint(item, base));
      } else {
        throw bad_request("unknown kind '" + kind + "'");
      }
    } catch (const ApiError& e) {
      out.push_back({{"error", e.body()}});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Review endpoints

inline nlohmann::ordered_json trace_summary(const Trajectory& t, const review::IndexEntry& e) {
  return {{"trace_id", t.trace_id}, {"task", t.task},         {"length", t.steps.size()},
          {"source", t.source},     {"category", t.category}, {"status", review::to_string(e.status)}};
}

inline std::string screenshot_url(const std::string& trace_id, int step) {
  return "/v1/review/traces/" + httplib::detail::encode_url(trace_id) + "/steps/" +
         std::to_string(step) + "/screenshot";
}

inline nlohmann::ordered_json trace_detail(const Trajectory& t, const review::IndexEntry& e) {
  nlohmann::ordered_json j = to_ordered_json(t);
  auto urls = nlohmann::ordered_json::array();
  for (const auto& s : t.steps) urls.push_back(screenshot_url(t.trace_id, s.index));
  j["screenshot_urls"] = std::move(urls);
  j["review"] = {{"status", review::to_string(e.status)},
                 {"decisions", e.decisions},
                 {"latest", e.latest ? to_ordered_json(*e.latest) : nlohmann::ordered_json(nullptr)}};
  return j;
}

inline nlohmann::ordered_json list_traces(const review::ReviewStore& store, const std::string& status) {
  std::optional<review::ReviewStatus> filter;
  if (!status.empty() && status != "all") {
    filter = review::parse_review_status(status);
    if (!filter) throw bad_request("unknown status filter '" + status + "'");
  }
  const auto index = store.snapshot();
  auto out = nlohmann::ordered_json::array();
  for (const auto& t : store.queue()) {
    const auto& e = index->at(t.trace_id);
    if (!filter || e.status == *filter) out.push_back(trace_summary(t, e));
  }
  return out;
}

inline std::string content_type_for(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "application/octet-stream";
}

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string review_dataset;
  std::string store_dir = "review-store";
  RewardConfig reward;
  std::optional<std::filesystem::path> screenshot_root;  // defaults to the dataset's directory
  std::optional<std::filesystem::path> ui_dir;           // static bundle mounted at /ui/
};

// HTTP front end for the reward functions and the review workflow.
class Service {
 public:
  Service(ServiceConfig cfg, std::vector<Trajectory> queue)
      : cfg_(std::move(cfg)), store_(std::move(queue), cfg_.store_dir) {
    cfg_.reward.validate();
    if (!cfg_.screenshot_root) {
      cfg_.screenshot_root = cfg_.review_dataset.empty()
                                 ? std::filesystem::current_path()
                                 : std::filesystem::absolute(cfg_.review_dataset).parent_path();
    }
    // SO_REUSEADDR only: a second server must not share a bound port.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    routes();
  }

  // Loads the review queue from cfg.review_dataset (strictly).
  static std::unique_ptr<Service> from_config(ServiceConfig cfg) {
    std::vector<Trajectory> queue;
    if (!cfg.review_dataset.empty()) queue = load_dataset_strict(cfg.review_dataset);
    return std::make_unique<Service>(std::move(cfg), std::move(queue));
  }

  review::ReviewStore& store() { return store_; }
  const RewardConfig& reward_config() const { return cfg_.reward; }

  // Binds to cfg.port (0 picks a free port) and returns the bound port.
  int bind() {
    int port = cfg_.port;
    if (port == 0) {
      port = server_.bind_to_any_port(cfg_.host);
    } else if (!server_.bind_to_port(cfg_.host, port)) {
      port = -1;
    }
    if (port < 0) {
      throw Error(ErrorCode::kBindFailure,
                  "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    }
    return port;
  }

  // Blocks until stop().
  void run() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  using Req = httplib::Request;
  using Res = httplib::Response;

  static void send_json(Res& res, const nlohmann::ordered_json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  template <typename Fn>
  static void guarded(Res& res, Fn&& fn) {
    try {
      fn();
    } catch (const ApiError& e) {
      send_json(res, e.body(), e.status);
    } catch (const Error& e) {
      const ApiError api = to_api_error(e);
      send_json(res, api.body(), api.status);
    } catch (const std::exception& e) {
      send_json(res, ApiError{500, "internal", e.what(), nlohmann::ordered_json::object()}.body(), 500);
    }
  }

  static nlohmann::json parse_body(const Req& req) {
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw bad_request(std::string("body is not valid JSON: ") + e.what());
    }
  }

  const Trajectory& require_trace(const std::string& id) const {
    const Trajectory* t = store_.find(id);
    if (!t) throw ApiError{404, "unknown_trace", "unknown trace '" + id + "'", nlohmann::ordered_json::object()};
    return *t;
  }

  void routes() {
    server_.Get("/v1/health", [](const Req&, Res& res) { send_json(res, {{"status", "ok"}}); });

    server_.Post("/v1/reward/grounding", [this](const Req& req, Res& res) {
      guarded(res, [&] { send_json(res, grounding_endpoint(parse_body(req), cfg_.reward)); });
    });
    server_.Post("/v1/reward/navigation", [this](const Req& req, Res& res) {
      guarded(res, [&] { send_json(res, navigation_endpoint(parse_body(req), cfg_.reward)); });
    });
    server_.Post("/v1/reward/batch", [this](const Req& req, Res& res) {
      guarded(res, [&] { send_json(res, batch_endpoint(parse_body(req), cfg_.reward)); });
    });

    server_.Get("/v1/review/traces", [this](const Req& req, Res& res) {
      guarded(res, [&] {
        const std::string status = req.has_param("status") ? req.get_param_value("status") : "";
        send_json(res, list_traces(store_, status));
      });
    });
    server_.Get(R"(/v1/review/traces/(.+)/steps/(\d+)/screenshot)", [this](const Req& req, Res& res) {
      guarded(res, [&] { serve_screenshot(req.matches[1], std::stoi(req.matches[2]), res); });
    });
    server_.Post(R"(/v1/review/traces/(.+)/decision)", [this](const Req& req, Res& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        require_trace(id);
        const review::ReviewDecision d = store_.record(review::decision_from_json(parse_body(req), id));
        const auto& entry = store_.snapshot()->at(id);
        nlohmann::ordered_json out = {{"trace_id", id},
                                      {"status", review::to_string(entry.status)},
                                      {"decision", to_ordered_json(d)}};
        if (d.verdict == review::Verdict::kFix) {
          out["fixed_trace"] = to_ordered_json(review::apply_fixes(*store_.find(id), d.fixes));
        }
        send_json(res, out);
      });
    });
    server_.Get(R"(/v1/review/traces/(.+))", [this](const Req& req, Res& res) {
      guarded(res, [&] {
        const Trajectory& t = require_trace(req.matches[1]);
        send_json(res, trace_detail(t, store_.snapshot()->at(t.trace_id)));
      });
    });
    server_.Get("/v1/review/export", [this](const Req&, Res& res) {
      guarded(res, [&] { res.set_content(store_.export_jsonl(), "application/x-ndjson"); });
    });

    if (cfg_.ui_dir && std::filesystem::is_directory(*cfg_.ui_dir)) {
      server_.set_mount_point("/ui", cfg_.ui_dir->string());
    }
  }

  // Read-only: local files are streamed, remote references redirect.
  void serve_screenshot(const std::string& id, int step, Res& res) const {
    const Trajectory& t = require_trace(id);
    if (step < 1 || step > static_cast<int>(t.steps.size())) {
      throw ApiError{404, "index_out_of_range", "no step " + std::to_string(step), nlohmann::ordered_json::object()};
    }
    const std::string& ref = t.steps[static_cast<std::size_t>(step - 1)].screenshot_ref;
    if (ref.find("://") != std::string::npos) {
      res.set_redirect(ref);
      return;
    }
    std::filesystem::path p(ref);
    if (p.is_relative()) p = *cfg_.screenshot_root / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) {
      throw ApiError{404, "missing_screenshot", "screenshot not found", {{"path", p.string()}}};
    }
    std::ostringstream bytes;
    bytes << in.rdbuf();
    res.set_content(bytes.str(), content_type_for(p));
  }

  ServiceConfig cfg_;
  review::ReviewStore store_;
  httplib::Server server_;
};

}  // namespace venus::service

#endif  // VENUS_SERVICE_HPP_

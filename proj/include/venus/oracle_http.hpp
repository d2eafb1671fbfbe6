/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_ORACLE_HTTP_HPP_
#define VENUS_ORACLE_HTTP_HPP_

#include <chrono>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "venus/action.hpp"
#include "venus/alignment.hpp"
#include "venus/error.hpp"
#include "venus/pipeline.hpp"
#include "venus/prompts.hpp"
#include "venus/trajectory.hpp"

// Clients for externally hosted oracles. The wire contract is in
// docs/oracle-protocol.md: JSON over POST, one endpoint per operation.

namespace venus::oracle_http {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
  int timeout_s = 60;
  int retries = 2;
};

inline Endpoint parse_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
    throw Error(ErrorCode::kConfigError, "oracle url must start with http://: '" + url + "'");
  }
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  if (slash != std::string::npos) {
    e.prefix = url.substr(slash);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  }
  return e;
}

// POSTs `body` to prefix + path and returns the parsed reply. Transport
// errors and 5xx are retried; anything else fails with kOracleFailure.
inline nlohmann::json post_json(const Endpoint& ep, const std::string& path, const nlohmann::json& body) {
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= ep.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    httplib::Client cli(ep.origin);  // one client per call; calls come from worker threads
    cli.set_connection_timeout(ep.timeout_s, 0);
    cli.set_read_timeout(ep.timeout_s, 0);
    cli.set_write_timeout(ep.timeout_s, 0);
    auto res = cli.Post(ep.prefix + path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kOracleFailure,
                  path + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kOracleFailure, path + ": reply is not JSON: " + e.what());
    }
  }
  throw Error(ErrorCode::kOracleFailure, path + ": " + last_error);
}

namespace detail {

template <typename T>
T reply_field(const nlohmann::json& reply, const char* key, const std::string& path) {
  try {
    return reply.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kOracleFailure, path + ": reply lacks a valid '" + key + "'");
  }
}

inline double unit_score(const nlohmann::json& reply, const std::string& path) {
  const double s = reply_field<double>(reply, "score", path);
  if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::kOracleFailure, path + ": score outside [0, 1]");
  return s;
}

inline nlohmann::ordered_json history_json(const HistoryContext& h) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& [thought, action] : h.pairs) {
    out.push_back({{"thought", thought}, {"action", serialize_action(action)}});
  }
  return out;
}

}  // namespace detail

class HttpSummarizer final : public pipeline::SummarizerOracle {
 public:
  explicit HttpSummarizer(Endpoint ep) : ep_(std::move(ep)) {}

  std::string summarize(const Trajectory& trace, const Step& step) const override {
    const auto reply = post_json(ep_, "/summarize", {{"trace", to_ordered_json(trace)}, {"step", step.index}});
    return detail::reply_field<std::string>(reply, "text", "/summarize");
  }
  double compare(const std::string& summary, const std::string& task) const override {
    return detail::unit_score(post_json(ep_, "/compare", {{"summary", summary}, {"task", task}}), "/compare");
  }
  std::string answer(const Trajectory& trace) const override {
    const auto reply = post_json(ep_, "/answer", {{"trace", to_ordered_json(trace)}});
    return detail::reply_field<std::string>(reply, "text", "/answer");
  }

 private:
  Endpoint ep_;
};

class HttpOrm final : public pipeline::OrmOracle {
 public:
  explicit HttpOrm(Endpoint ep) : ep_(std::move(ep)) {}
  double score(const Trajectory& trace) const override {
    return detail::unit_score(post_json(ep_, "/score", {{"trace", to_ordered_json(trace)}}), "/score");
  }

 private:
  Endpoint ep_;
};

// Each returned rollout is either {"response": "<think>..</think><action>..</action>"}
// or {"thought": .., "action": ..}.
class HttpRolloutOracle final : public alignment::RolloutOracle {
 public:
  explicit HttpRolloutOracle(Endpoint ep) : ep_(std::move(ep)) {}

  std::vector<alignment::Rollout> rollout(const std::string& task, const std::string& shot,
                                          const HistoryContext& history, std::size_t r) const override {
    const std::string rendered = render_history(history);
    const nlohmann::ordered_json body = {{"task", task},
                                         {"screenshot_ref", shot},
                                         {"history", rendered},
                                         {"history_steps", detail::history_json(history)},
                                         {"prompt", prompts::render_navigation(task, rendered)},
                                         {"r", r}};
    const auto reply = post_json(ep_, "/rollout", body);
    const auto it = reply.find("rollouts");
    if (it == reply.end() || !it->is_array()) {
      throw Error(ErrorCode::kOracleFailure, "/rollout: reply lacks a 'rollouts' array");
    }
    std::vector<alignment::Rollout> out;
    out.reserve(it->size());
    for (const auto& item : *it) {
      if (item.contains("response")) {
        ModelOutput m = parse_model_output(detail::reply_field<std::string>(item, "response", "/rollout"));
        out.push_back({std::move(m.think), std::move(m.action)});
      } else {
        out.push_back({detail::reply_field<std::string>(item, "thought", "/rollout"),
                       parse_action(detail::reply_field<std::string>(item, "action", "/rollout"))});
      }
    }
    return out;
  }

 private:
  Endpoint ep_;
};

}  // namespace venus::oracle_http

#endif  // VENUS_ORACLE_HTTP_HPP_

/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <pthread.h>

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "venus/alignment.hpp"
#include "venus/eval.hpp"
#include "venus/oracle_http.hpp"
#include "venus/pipeline.hpp"
#include "venus/prompts.hpp"
#include "venus/reward.hpp"
#include "venus/service.hpp"
#include "venus/trajectory.hpp"

namespace {

using namespace venus;

constexpr int kExitInvalid = 1;  // input failed validation
constexpr int kExitError = 3;    // runtime failure

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, path + ": " + e.what());
  }
}

RewardConfig reward_config_or_default(const std::string& path) {
  return path.empty() ? RewardConfig{} : load_reward_config(path);
}

std::set<ActionKind> parse_kinds(const std::string& list) {
  std::set<ActionKind> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    const std::string name(text::trim(item));
    auto k = action_kind_from_string(name);
    if (!k) throw Error(ErrorCode::kConfigError, "unknown action kind '" + name + "'");
    out.insert(*k);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct PipelineArgs {
  std::string stage, in, out, report, oracle_url, manifest;
  std::uint64_t seed = 0;
  double threshold = -1.0;
  std::size_t min_len = 0;
  std::size_t cap = 1000;
  std::size_t workers = 4;
  bool auto_accept = false;
};

int run_pipeline(const PipelineArgs& a) {
  const auto ts = load_dataset_strict(a.in);
  std::unique_ptr<pipeline::SummarizerOracle> summarizer;
  std::unique_ptr<pipeline::OrmOracle> orm;
  if (a.oracle_url.empty()) {
    summarizer = std::make_unique<pipeline::HashSummarizer>(a.seed);
    orm = std::make_unique<pipeline::HashOrm>(a.seed);
  } else {
    const auto ep = oracle_http::parse_endpoint(a.oracle_url);
    summarizer = std::make_unique<oracle_http::HttpSummarizer>(ep);
    orm = std::make_unique<oracle_http::HttpOrm>(ep);
  }

  pipeline::FilterReport report;
  std::vector<Trajectory> out;
  if (a.stage == "filter") {
    pipeline::FilterConfig cfg;
    if (a.threshold >= 0) cfg.consistency_threshold = a.threshold;
    if (a.min_len > 0) cfg.min_len = a.min_len;
    cfg.max_in_flight = a.workers;
    if (!a.manifest.empty()) cfg.content_motion_sources = load_manifest(a.manifest).content_motion_sources;
    auto r = pipeline::filter_traces(ts, *summarizer, cfg);
    out = std::move(r.kept);
    report = std::move(r.report);
  } else if (a.stage == "resample") {
    pipeline::ResampleConfig cfg;
    cfg.default_cap = a.cap;
    cfg.seed = a.seed;
    auto r = pipeline::resample_by_category(ts, cfg);
    out = std::move(r.kept);
    report = std::move(r.report);
  } else if (a.stage == "reconstruct") {
    auto r = pipeline::reconstruct_all(ts, *summarizer);
    out = std::move(r.kept);
    report = std::move(r.report);
  } else {
    pipeline::QcConfig cfg;
    if (a.threshold >= 0) cfg.orm_threshold = a.threshold;
    if (a.min_len > 0) cfg.min_len = a.min_len;
    cfg.auto_accept = a.auto_accept;
    cfg.max_in_flight = a.workers;
    auto r = pipeline::qc_generated(ts, *orm, cfg);
    out = std::move(r.accepted);
    out.insert(out.end(), r.needs_review.begin(), r.needs_review.end());
    report = std::move(r.report);
  }
  save_dataset(a.out, out);
  write_json(a.report, pipeline::to_ordered_json(report));
  std::cerr << a.stage << ": " << report.input << " in, " << report.kept << " kept\n";
  return 0;
}

struct AlignArgs {
  std::string in, out, oracle_url, pools_out;
  bool mock = false;
  double match_rate = 1.0;
  std::size_t rollouts = 8;
  double tol = 14.0;
  std::size_t target_len = 200;
  std::uint64_t seed = 0;
  bool random_ties = false;
  std::size_t workers = 4;
};

int run_align(const AlignArgs& a) {
  const auto ts = load_dataset_strict(a.in);
  std::unique_ptr<alignment::RolloutOracle> oracle;
  if (!a.oracle_url.empty()) {
    oracle = std::make_unique<oracle_http::HttpRolloutOracle>(oracle_http::parse_endpoint(a.oracle_url));
  } else {
    alignment::MockRolloutOracle::Options opts;
    opts.match_rate = a.match_rate;
    opts.seed = a.seed;
    oracle = std::make_unique<alignment::MockRolloutOracle>(ts, opts);
  }
  alignment::AlignConfig cfg;
  cfg.rollouts = a.rollouts;
  cfg.tol = a.tol;
  cfg.policy.target_length = a.target_len;
  cfg.policy.seed = a.seed;
  cfg.policy.tie_break = a.random_ties ? alignment::TieBreak::kSeededRandom : alignment::TieBreak::kFirst;
  cfg.max_in_flight = a.workers;
  const auto result = alignment::align_epoch(ts, *oracle, cfg);
  save_dataset(a.out, result.trajectories);
  if (!a.pools_out.empty()) write_json(a.pools_out, alignment::pools_to_json(ts, result.pools));
  for (const auto& f : result.failures) {
    std::cerr << "warning: " << f.trace_id << " step " << f.step << ": " << f.message << "\n";
  }
  std::cerr << "align: " << result.trajectories.size() << " traces, " << result.failures.size()
            << " rollout failures\n";
  return 0;
}

struct EnhanceArgs {
  std::string in, pools, out, sparse = "auto";
  std::size_t max_variants = 4;
  double tau = 0.02;
  std::uint64_t seed = 0;
  bool append = false;
};

int run_enhance(const EnhanceArgs& a) {
  const auto ts = load_dataset_strict(a.in);
  const auto pools = alignment::pools_from_json(read_json(a.pools));
  alignment::EnhancementConfig cfg;
  cfg.tau = a.tau;
  cfg.max_variants = a.max_variants;
  cfg.seed = a.seed;
  if (a.sparse != "auto") cfg.sparse_kinds = parse_kinds(a.sparse);
  const auto sparse = cfg.sparse_kinds ? *cfg.sparse_kinds
                                       : alignment::identify_sparse_actions(action_distribution(ts), cfg);
  auto variants = alignment::enhance_dataset(ts, pools, sparse, cfg);
  std::vector<Trajectory> out;
  if (a.append) out = ts;
  out.insert(out.end(), variants.begin(), variants.end());
  save_dataset(a.out, out);
  std::cerr << "enhance: sparse {";
  const char* sep = "";
  for (ActionKind k : sparse) {
    std::cerr << sep << to_string(k);
    sep = ", ";
  }
  std::cerr << "}, " << variants.size() << " variants\n";
  return 0;
}

struct EvalArgs {
  std::string task, preds, samples, reward_config, report;
};

int run_eval(const EvalArgs& a) {
  const auto preds = eval::load_predictions(a.preds);
  eval::EvalReport r;
  if (a.task == "grounding") {
    r = eval::eval_grounding(preds, eval::load_grounding_samples(a.samples));
  } else {
    r = eval::eval_nav_steps(preds, eval::load_nav_samples(a.samples), reward_config_or_default(a.reward_config));
  }
  write_text(a.report, r.dump());
  std::cerr << a.task << ": " << r.overall.correct << "/" << r.overall.total << " correct\n";
  return 0;
}

struct RewardArgs {
  std::string task, response, gt_box, gt_action, reward_config, batch;
  int width = 0, height = 0;
};

int run_reward(const RewardArgs& a) {
  const RewardConfig cfg = reward_config_or_default(a.reward_config);
  if (a.task == "batch") {
    std::cout << service::batch_endpoint(read_json(a.batch), cfg).dump() << "\n";
    return 0;
  }
  if (a.task == "grounding") {
    auto box = parse_box(a.gt_box);
    if (!box) throw Error(ErrorCode::kConfigError, "--gt-box must look like [x1,y1,x2,y2]");
    std::cout << to_ordered_json(grounding_reward(a.response, *box, cfg)).dump() << "\n";
    return 0;
  }
  auto gt = parse_action(a.gt_action);
  if (!gt) throw Error(ErrorCode::kConfigError, "--gt-action: " + gt.error().message);
  const ScreenSize screen{a.width, a.height};
  if (!screen.valid()) throw Error(ErrorCode::kConfigError, "--width and --height must be positive");
  std::cout << to_ordered_json(navigation_reward(a.response, NavigationTarget{*gt, screen}, cfg)).dump() << "\n";
  return 0;
}

int run_validate(const std::string& in, const std::string& screenshot_root, const std::string& report) {
  LoadOptions opts;
  if (!screenshot_root.empty()) opts.screenshot_root = screenshot_root;
  const auto r = load_dataset(in, opts);
  write_json(report, to_ordered_json(r.report));
  std::cerr << in << ": " << r.trajectories.size() << " valid, " << r.report.errors.size() << " errors, "
            << r.report.warnings.size() << " warnings\n";
  return r.report.ok() ? 0 : kExitInvalid;
}

int run_stats(const std::vector<std::string>& inputs) {
  ActionStats total;
  for (const auto& in : inputs) total += action_distribution(load_dataset_strict(in));
  std::cout << to_ordered_json(total).dump(2) << "\n";
  return 0;
}

int run_manifest(const std::vector<std::string>& shards, const std::string& content_motion, const std::string& out) {
  Manifest m;
  for (const auto& s : shards) m.shards.push_back(describe_shard(s, load_dataset_strict(s)));
  if (!content_motion.empty()) {
    std::stringstream ss(content_motion);
    for (std::string src; std::getline(ss, src, ',');) m.content_motion_sources.insert(std::string(text::trim(src)));
  }
  write_json(out, to_ordered_json(m));
  return 0;
}

int run_prompt(const std::string& in, const std::string& trace_id, int step, const std::string& instruction) {
  if (in.empty()) {
    std::cout << prompts::render_grounding(instruction) << "\n";
    return 0;
  }
  for (const auto& t : load_dataset_strict(in)) {
    if (t.trace_id == trace_id) {
      std::cout << prompts::render_navigation(t, step) << "\n";
      return 0;
    }
  }
  throw Error(ErrorCode::kUnknownTrace, "no trace '" + trace_id + "' in " + in);
}

// SIGINT/SIGTERM are blocked in every thread and collected by a sigwait
// thread, which stops the server outside signal context.
int run_serve(service::ServiceConfig cfg) {
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  auto svc = service::Service::from_config(std::move(cfg));
  const int port = svc->bind();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    svc->stop();
  });
  std::cerr << "listening on port " << port << "\n";
  svc->run();
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"venus: GUI-agent training data and reward toolkit"};
  app.require_subcommand(1);
  int rc = 0;
  std::function<int()> action;

  // pipeline
  PipelineArgs pa;
  auto* pipe = app.add_subcommand("pipeline", "Run one data pipeline stage");
  pipe->add_option("stage", pa.stage, "filter | resample | reconstruct | qc")
      ->required()
      ->check(CLI::IsMember({"filter", "resample", "reconstruct", "qc"}));
  pipe->add_option("--in", pa.in)->required();
  pipe->add_option("--out", pa.out)->required();
  pipe->add_option("--report", pa.report)->required();
  pipe->add_option("--seed", pa.seed);
  pipe->add_option("--oracle-url", pa.oracle_url, "Summarizer/ORM base URL; mock oracles when absent");
  pipe->add_option("--manifest", pa.manifest, "Manifest naming content-motion sources (filter)");
  pipe->add_option("--threshold", pa.threshold, "Consistency (filter) or ORM (qc) threshold");
  pipe->add_option("--min-len", pa.min_len);
  pipe->add_option("--cap", pa.cap, "Per-category cap (resample)");
  pipe->add_option("--workers", pa.workers, "Max in-flight oracle calls")->check(CLI::PositiveNumber);
  pipe->add_flag("--auto-accept", pa.auto_accept, "Skip annotator review (qc)");
  pipe->callback([&] { action = [&] { return run_pipeline(pa); }; });

  // align
  AlignArgs aa;
  auto* align = app.add_subcommand("align", "One epoch of history alignment");
  align->add_option("--in", aa.in)->required();
  align->add_option("--out", aa.out)->required();
  auto* url = align->add_option("--oracle-url", aa.oracle_url, "Rollout oracle base URL");
  auto* mock = align->add_flag("--mock", aa.mock, "Use the offline mock oracle");
  url->excludes(mock);
  align->add_option("--match-rate", aa.match_rate, "Mock oracle match probability")->check(CLI::Range(0.0, 1.0));
  align->add_option("--rollouts", aa.rollouts)->check(CLI::PositiveNumber);
  align->add_option("--tol", aa.tol, "Match tolerance in pixels");
  align->add_option("--target-len", aa.target_len, "Preferred thought length");
  align->add_option("--seed", aa.seed);
  align->add_flag("--random-ties", aa.random_ties, "Seeded random tie-breaking");
  align->add_option("--pools-out", aa.pools_out, "Write the thought pools here");
  align->add_option("--workers", aa.workers)->check(CLI::PositiveNumber);
  align->callback([&] {
    if (aa.oracle_url.empty() && !aa.mock) throw CLI::ValidationError("align", "need --oracle-url or --mock");
    action = [&] { return run_align(aa); };
  });

  // enhance
  EnhanceArgs ea;
  auto* enhance = app.add_subcommand("enhance", "Sparse-action enhancement from thought pools");
  enhance->add_option("--in", ea.in)->required();
  enhance->add_option("--pools", ea.pools)->required();
  enhance->add_option("--out", ea.out)->required();
  enhance->add_option("--sparse", ea.sparse, "auto or a comma-separated kind list");
  enhance->add_option("--max-variants", ea.max_variants)->check(CLI::NonNegativeNumber);
  enhance->add_option("--tau", ea.tau, "Frequency threshold for --sparse auto");
  enhance->add_option("--seed", ea.seed);
  enhance->add_flag("--append", ea.append, "Write the input traces before the variants");
  enhance->callback([&] { action = [&] { return run_enhance(ea); }; });

  // eval
  EvalArgs va;
  auto* ev = app.add_subcommand("eval", "Score predictions against a benchmark");
  ev->add_option("task", va.task, "grounding | nav")->required()->check(CLI::IsMember({"grounding", "nav"}));
  ev->add_option("--preds", va.preds)->required();
  ev->add_option("--samples", va.samples)->required();
  ev->add_option("--reward-config", va.reward_config);
  ev->add_option("--report", va.report, "Report path (stdout when absent)");
  ev->callback([&] { action = [&] { return run_eval(va); }; });

  // reward
  RewardArgs ra;
  auto* rw = app.add_subcommand("reward", "Score a single response");
  rw->add_option("task", ra.task, "grounding | navigation | batch")
      ->required()
      ->check(CLI::IsMember({"grounding", "navigation", "batch"}));
  rw->add_option("--response", ra.response);
  rw->add_option("--gt-box", ra.gt_box);
  rw->add_option("--gt-action", ra.gt_action);
  rw->add_option("--width", ra.width);
  rw->add_option("--height", ra.height);
  rw->add_option("--batch", ra.batch, "JSON array of service-style requests");
  rw->add_option("--reward-config", ra.reward_config);
  rw->callback([&] { action = [&] { return run_reward(ra); }; });

  // serve
  service::ServiceConfig sc;
  std::string reward_config_path, screenshot_root, ui_dir;
  auto* serve = app.add_subcommand("serve", "Run the reward and review service");
  serve->add_option("--port", sc.port, "0 picks a free port");
  serve->add_option("--host", sc.host);
  serve->add_option("--review-dataset", sc.review_dataset);
  serve->add_option("--reward-config", reward_config_path);
  serve->add_option("--store", sc.store_dir);
  serve->add_option("--screenshot-root", screenshot_root);
  serve->add_option("--ui", ui_dir, "Static UI bundle served at /ui");
  serve->callback([&] {
    action = [&] {
      sc.reward = reward_config_or_default(reward_config_path);
      if (!screenshot_root.empty()) sc.screenshot_root = screenshot_root;
      if (!ui_dir.empty()) sc.ui_dir = ui_dir;
      return run_serve(sc);
    };
  });

  // validate / stats / manifest / prompt
  std::string v_in, v_root, v_report;
  auto* validate = app.add_subcommand("validate", "Check a trace file against the schema");
  validate->add_option("--in", v_in)->required();
  validate->add_option("--screenshot-root", v_root);
  validate->add_option("--report", v_report);
  validate->callback([&] { action = [&] { return run_validate(v_in, v_root, v_report); }; });

  std::vector<std::string> s_in;
  auto* stats = app.add_subcommand("stats", "Action-type distribution");
  stats->add_option("--in", s_in)->required();
  stats->callback([&] { action = [&] { return run_stats(s_in); }; });

  std::vector<std::string> m_shards;
  std::string m_motion, m_out;
  auto* manifest = app.add_subcommand("manifest", "Describe dataset shards");
  manifest->add_option("--shard", m_shards)->required();
  manifest->add_option("--content-motion", m_motion, "Comma-separated content-motion sources");
  manifest->add_option("--out", m_out);
  manifest->callback([&] { action = [&] { return run_manifest(m_shards, m_motion, m_out); }; });

  std::string p_in, p_trace, p_instruction;
  int p_step = 1;
  auto* prompt = app.add_subcommand("prompt", "Render a grounding or navigation prompt");
  prompt->add_option("--in", p_in, "Trace file (navigation)");
  prompt->add_option("--trace", p_trace);
  prompt->add_option("--step", p_step);
  prompt->add_option("--instruction", p_instruction, "Grounding instruction");
  prompt->callback([&] { action = [&] { return run_prompt(p_in, p_trace, p_step, p_instruction); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    rc = action();
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::kSchemaViolation ? kExitInvalid : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return rc;
}

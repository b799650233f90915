//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/moia.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "molr/canonical.h"
#include "molr/completion.h"
#include "molr/prompts.h"

namespace molr {
namespace {

std::filesystem::path state_path(const std::filesystem::path &dir, int t) {
  return dir / ("state_" + std::to_string(t) + ".json");
}

std::filesystem::path r_path(const std::filesystem::path &dir, int t) {
  return dir / ("R_" + std::to_string(t) + ".jsonl");
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_records(const std::filesystem::path &path,
                   std::span<const TraceRecord> records) {
  std::string content;
  for (const TraceRecord &r: records) {
    content += to_json_line(r);
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::string replace_all(std::string text, std::string_view key,
                        const std::string &value) {
  for (std::size_t p = text.find(key); p != std::string::npos;
       p = text.find(key, p + value.size())) {
    text.replace(p, key.size(), value);
  }
  return text;
}

}  // namespace

void ResampleConfig::validate() const {
  if (k_attempts < 1)
    throw std::invalid_argument("resample.k_attempts must be at least 1");
  if (parallelism == 0)
    throw std::invalid_argument("resample.parallelism must be positive");
  rollout_request.validate();
}

GenerationRequest resample_request(const RawPair &pair,
                                   const ResampleConfig &cfg, int t) {
  GenerationRequest request = cfg.rollout_request;
  if (request.system_prompt.empty())
    request.system_prompt = std::string(trim(system_prompt_template()));
  request.user_prompt = render_policy_prompt(pair.caption);
  request.n_samples = cfg.k_attempts;
  request.seed = cfg.rollout_request.seed.value_or(0)
                 + static_cast<std::uint64_t>(t)
                       * static_cast<std::uint64_t>(cfg.k_attempts);
  return request;
}

std::optional<std::string>
first_matching_trace(std::span<const std::string> completions,
                     const RawPair &pair) {
  for (const std::string &c: completions) {
    CompletionSpan span = parse_completion(c);
    if (!span.well_formed || trim(span.think).empty())
      continue;
    if (smiles_equal(trim(span.answer), pair.smiles))
      return span.think;
  }
  return std::nullopt;
}

std::vector<TraceRecord> resample_iteration(std::span<const RawPair> pairs,
                                            Backend &policy,
                                            const ResampleConfig &cfg,
                                            std::span<const TraceRecord> prior,
                                            int t, ResampleStats *stats) {
  cfg.validate();
  std::unordered_map<std::string, const TraceRecord *> prior_by_id;
  for (const TraceRecord &r: prior)
    prior_by_id.emplace(r.id, &r);

  struct Slot {
    std::optional<std::string> trace;
    bool error = false;
    bool sampled = false;
  };
  std::vector<Slot> slots(pairs.size());

  auto needs_sampling = [&](const RawPair &p) {
    return cfg.keep_rule == KeepRule::kReplaceLatest
           || prior_by_id.count(p.id) == 0;
  };

  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      if (!needs_sampling(pairs[i]))
        continue;
      slots[i].sampled = true;
      try {
        GenerationResult result =
            policy.generate(resample_request(pairs[i], cfg, t));
        slots[i].trace = first_matching_trace(result.completions, pairs[i]);
      } catch (const GatewayError &) {
        slots[i].error = true;
      }
    }
  };
  std::size_t n_threads = std::min(cfg.parallelism, pairs.size());
  std::vector<std::thread> threads;
  for (std::size_t k = 1; k < n_threads; ++k)
    threads.emplace_back(worker);
  worker();
  for (std::thread &th: threads)
    th.join();

  ResampleStats local;
  std::vector<TraceRecord> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const RawPair &p = pairs[i];
    auto it = prior_by_id.find(p.id);
    const Slot &slot = slots[i];
    local.backend_errors += slot.error;
    if (slot.trace) {
      TraceRecord record;
      record.id = p.id;
      record.caption = p.caption;
      record.smiles = p.smiles;
      record.trace = *slot.trace;
      record.iteration = t + 1;
      record.provenance = Provenance::kResampled;
      out.push_back(std::move(record));
      if (it != prior_by_id.end())
        ++local.replaced;
      else
        ++local.new_matches;
    } else if (it != prior_by_id.end()) {
      out.push_back(*it->second);
      ++local.retained;
    } else {
      ++local.unmatched;
    }
  }
  if (stats)
    *stats = local;
  return out;
}

std::string_view to_string(MoiaStatus status) {
  switch (status) {
  case MoiaStatus::kRunning:
    return "running";
  case MoiaStatus::kConverged:
    return "converged";
  case MoiaStatus::kFullyAnnotated:
    return "fully_annotated";
  case MoiaStatus::kMaxItersReached:
    return "max_iters_reached";
  }
  return "running";
}

std::optional<MoiaStatus> moia_status_from_string(std::string_view s) {
  for (MoiaStatus st: { MoiaStatus::kRunning, MoiaStatus::kConverged,
                        MoiaStatus::kFullyAnnotated,
                        MoiaStatus::kMaxItersReached }) {
    if (to_string(st) == s)
      return st;
  }
  return std::nullopt;
}

std::string IterationState::to_json() const {
  nlohmann::ordered_json obj;
  obj["t"] = t;
  obj["r_size"] = r_size;
  obj["d_size"] = d_size;
  if (em)
    obj["em"] = *em;
  else
    obj["em"] = nullptr;
  obj["em_history"] = em_history;
  obj["status"] = std::string(to_string(status));
  return obj.dump();
}

IterationState IterationState::from_json(std::string_view text) {
  nlohmann::json obj = nlohmann::json::parse(text);
  IterationState s;
  s.t = obj.at("t").get<int>();
  s.r_size = obj.at("r_size").get<std::size_t>();
  s.d_size = obj.at("d_size").get<std::size_t>();
  if (!obj.at("em").is_null())
    s.em = obj.at("em").get<double>();
  if (obj.contains("em_history"))
    s.em_history = obj.at("em_history").get<std::vector<double>>();
  auto status = moia_status_from_string(obj.at("status").get<std::string>());
  if (!status)
    throw std::invalid_argument("unknown status in state file");
  s.status = *status;
  return s;
}

void MoiaConfig::validate() const {
  if (max_iters < 1)
    throw std::invalid_argument("moia.max_iters must be at least 1");
  if (!(convergence_delta >= 0.0))
    throw std::invalid_argument("moia.convergence_delta must be >= 0");
  resample.validate();
}

std::vector<IterationState> run_moia(std::span<const RawPair> pairs,
                                     std::span<const TraceRecord> r0,
                                     const MoiaHooks &hooks,
                                     const MoiaConfig &cfg) {
  cfg.validate();
  if (!hooks.sft || !hooks.rpo || !hooks.eval || !hooks.policy_backend)
    throw std::invalid_argument("MoIA needs sft, rpo, eval and backend hooks");

  const std::size_t d_size = pairs.size();
  std::vector<IterationState> states;
  std::vector<TraceRecord> current;

  auto persist = [&](const IterationState &state) {
    if (!cfg.state_dir)
      return;
    write_records(r_path(*cfg.state_dir, state.t), current);
    if (hooks.save)
      hooks.save(*cfg.state_dir, state.t);
    // The state file goes last: its presence marks the iteration complete.
    write_file_atomic(state_path(*cfg.state_dir, state.t),
                      state.to_json() + "\n");
  };

  if (cfg.state_dir) {
    std::filesystem::create_directories(*cfg.state_dir);
    for (int t = 0; std::filesystem::exists(state_path(*cfg.state_dir, t))
                    && std::filesystem::exists(r_path(*cfg.state_dir, t));
         ++t) {
      IterationState s =
          IterationState::from_json(read_text(state_path(*cfg.state_dir, t)));
      // Older state files carry no history; rebuild it from the chain.
      if (s.em_history.empty()) {
        if (!states.empty())
          s.em_history = states.back().em_history;
        if (s.em)
          s.em_history.push_back(*s.em);
      }
      states.push_back(std::move(s));
    }
    if (!states.empty()) {
      current = TraceStore::load(r_path(*cfg.state_dir, states.back().t))
                    .records();
      if (hooks.load)
        hooks.load(*cfg.state_dir, states.back().t);
    }
  }

  if (states.empty()) {
    current.assign(r0.begin(), r0.end());
    IterationState s0;
    s0.t = 0;
    s0.r_size = current.size();
    s0.d_size = d_size;
    s0.em = hooks.eval(0);
    s0.em_history.push_back(*s0.em);
    s0.status = s0.r_size == d_size ? MoiaStatus::kFullyAnnotated
                                    : MoiaStatus::kRunning;
    persist(s0);
    states.push_back(std::move(s0));
  }

  while (states.back().status == MoiaStatus::kRunning) {
    const IterationState &prev = states.back();
    int t = prev.t;
    std::filesystem::path current_path =
        cfg.state_dir ? r_path(*cfg.state_dir, t) : std::filesystem::path();

    hooks.sft(current, t, current_path);
    hooks.rpo(pairs, t);
    double em = hooks.eval(t + 1);
    std::shared_ptr<Backend> backend = hooks.policy_backend(t + 1);
    if (!backend)
      throw MoiaError("policy backend hook returned no backend");
    std::vector<TraceRecord> next =
        resample_iteration(pairs, *backend, cfg.resample, current, t);

    IterationState s;
    s.t = t + 1;
    s.r_size = next.size();
    s.d_size = d_size;
    s.em = em;
    s.em_history = prev.em_history;
    s.em_history.push_back(em);
    if (s.r_size == d_size)
      s.status = MoiaStatus::kFullyAnnotated;
    else if (prev.em && std::abs(em - *prev.em) < cfg.convergence_delta)
      s.status = MoiaStatus::kConverged;
    else if (s.t >= cfg.max_iters)
      s.status = MoiaStatus::kMaxItersReached;
    else
      s.status = MoiaStatus::kRunning;

    current = std::move(next);
    persist(s);
    states.push_back(std::move(s));
  }
  return states;
}

MoiaHooks scripted_hooks(std::vector<double> em_schedule,
                         std::shared_ptr<Backend> backend) {
  if (em_schedule.empty())
    throw std::invalid_argument("EM schedule must not be empty");
  MoiaHooks hooks;
  hooks.sft = [](std::span<const TraceRecord>, int,
                 const std::filesystem::path &) { };
  hooks.rpo = [](std::span<const RawPair>, int) { };
  hooks.eval = [schedule = std::move(em_schedule)](int t) {
    std::size_t i = std::min(static_cast<std::size_t>(t), schedule.size() - 1);
    return schedule[i];
  };
  hooks.policy_backend = [backend = std::move(backend)](int) {
    return backend;
  };
  return hooks;
}

MoiaHooks toy_hooks(std::shared_ptr<ToyPolicy> policy, ToyHookConfig cfg,
                    std::vector<RawPair> eval_pairs) {
  auto prompt = [](const TraceRecord &r) {
    return render_policy_prompt(r.caption);
  };
  auto pairs_as_records = [](std::span<const RawPair> pairs) {
    std::vector<TraceRecord> records;
    for (const RawPair &p: pairs) {
      TraceRecord r;
      r.id = p.id;
      r.caption = p.caption;
      r.smiles = p.smiles;
      records.push_back(std::move(r));
    }
    return records;
  };
  auto eval_records = std::make_shared<const std::vector<TraceRecord>>(
      pairs_as_records(eval_pairs));

  MoiaHooks hooks;
  hooks.sft = [policy, cfg, prompt](std::span<const TraceRecord> records, int,
                                    const std::filesystem::path &) {
    std::vector<double> grad(policy->num_params());
    for (int epoch = 0; epoch < cfg.sft_epochs; ++epoch) {
      for (const TraceRecord &r: records) {
        std::fill(grad.begin(), grad.end(), 0.0);
        add_sft_grad(*policy, prompt(r), r, 1.0, grad);
        std::span<double> theta = policy->params();
        for (std::size_t j = 0; j < theta.size(); ++j)
          theta[j] -= cfg.sft_learning_rate * grad[j];
      }
    }
  };
  hooks.rpo = [policy, cfg, prompt, pairs_as_records](
                  std::span<const RawPair> pairs, int t) {
    std::vector<TraceRecord> records = pairs_as_records(pairs);
    ToyTrainConfig train;
    train.sft_epochs = 0;
    train.grpo_steps = cfg.grpo_steps;
    train.max_completion_len = cfg.max_completion_len;
    train.seed = cfg.seed + static_cast<std::uint64_t>(t);
    train_toy(*policy, records, cfg.grpo, cfg.reward, train, prompt);
  };
  hooks.eval = [policy, cfg, prompt, eval_records](int) {
    return greedy_em(*policy, *eval_records, cfg.max_completion_len, prompt);
  };
  hooks.policy_backend = [policy, cfg](int) -> std::shared_ptr<Backend> {
    return std::make_shared<ToyPolicyBackend>(
        std::make_shared<const ToyPolicy>(*policy), cfg.max_completion_len);
  };
  hooks.save = [policy](const std::filesystem::path &dir, int t) {
    write_file_atomic(dir / ("policy_" + std::to_string(t) + ".json"),
                      policy->to_json());
  };
  hooks.load = [policy](const std::filesystem::path &dir, int t) {
    *policy = ToyPolicy::from_json(
        read_text(dir / ("policy_" + std::to_string(t) + ".json")));
  };
  return hooks;
}

namespace {

std::string run_command(const std::string &command) {
  FILE *pipe = popen(command.c_str(), "r");
  if (!pipe)
    throw MoiaError("cannot start: " + command);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
    out.append(buf, n);
  int status = pclose(pipe);
  if (status != 0)
    throw MoiaError("command failed with status " + std::to_string(status)
                    + ": " + command);
  return out;
}

}  // namespace

MoiaHooks subprocess_hooks(SubprocessHookConfig cfg,
                           std::shared_ptr<Backend> backend) {
  auto expand = [cfg](const std::string &tmpl, int t,
                      const std::filesystem::path &r) {
    std::string s = replace_all(tmpl, "{t}", std::to_string(t));
    s = replace_all(s, "{r_path}", r.string());
    s = replace_all(s, "{d_path}", cfg.d_path.string());
    return replace_all(s, "{state_dir}", cfg.state_dir.string());
  };
  MoiaHooks hooks;
  hooks.sft = [cfg, expand](std::span<const TraceRecord>, int t,
                            const std::filesystem::path &r) {
    if (r.empty())
      throw MoiaError("subprocess hooks need a persisted run (state_dir)");
    run_command(expand(cfg.sft_command, t, r));
  };
  hooks.rpo = [cfg, expand](std::span<const RawPair>, int t) {
    run_command(expand(cfg.rpo_command, t, {}));
  };
  hooks.eval = [cfg, expand](int t) {
    std::string out = run_command(expand(cfg.eval_command, t, {}));
    char *end = nullptr;
    double em = std::strtod(out.c_str(), &end);
    if (end == out.c_str() || !std::isfinite(em))
      throw MoiaError("eval command did not print a number");
    return em;
  };
  hooks.policy_backend = [backend](int) { return backend; };
  return hooks;
}

}  // namespace molr

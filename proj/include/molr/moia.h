//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_MOIA_H_
#define MOLR_MOIA_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molr/dataset.h"
#include "molr/gateway.h"
#include "molr/grpo.h"

namespace molr {

enum class KeepRule {
  // A pair already in the prior set keeps its record.
  kRetainPrior,
  // A new match replaces the prior record.
  kReplaceLatest,
};

struct ResampleConfig {
  int k_attempts = 5;
  // Sampling settings for the policy; prompts are filled in per pair. The
  // request for iteration t uses seed + t * k_attempts.
  GenerationRequest rollout_request = [] {
    GenerationRequest r;
    r.temperature = 1.0;
    return r;
  }();
  KeepRule keep_rule = KeepRule::kRetainPrior;
  std::size_t parallelism = 4;

  void validate() const;
};

struct ResampleStats {
  std::size_t new_matches = 0;
  std::size_t retained = 0;
  std::size_t replaced = 0;
  std::size_t unmatched = 0;
  std::size_t backend_errors = 0;
};

// Policy prompt for a pair: the caption only.
GenerationRequest resample_request(const RawPair &pair,
                                   const ResampleConfig &cfg, int t);

// A completion qualifies when it is well-formed, its think block is not
// blank, and its answer is canonically equal to the pair's SMILES. Returns
// the trace of the first qualifying completion.
std::optional<std::string>
first_matching_trace(std::span<const std::string> completions,
                     const RawPair &pair);

// Draws k_attempts completions per pair and returns the union of the prior
// records and the new matches, in the order of `pairs`. New records carry
// iteration t + 1 and provenance "resampled".
std::vector<TraceRecord> resample_iteration(std::span<const RawPair> pairs,
                                            Backend &policy,
                                            const ResampleConfig &cfg,
                                            std::span<const TraceRecord> prior,
                                            int t,
                                            ResampleStats *stats = nullptr);

enum class MoiaStatus {
  kRunning,
  kConverged,
  kFullyAnnotated,
  kMaxItersReached,
};

std::string_view to_string(MoiaStatus status);
std::optional<MoiaStatus> moia_status_from_string(std::string_view s);

struct IterationState {
  int t = 0;
  std::size_t r_size = 0;
  std::size_t d_size = 0;
  // Validation EM of the policy that produced R^t; at t = 0 the initial
  // policy.
  std::optional<double> em;
  std::vector<double> em_history;
  MoiaStatus status = MoiaStatus::kRunning;

  // {"t","r_size","d_size","em","em_history","status"} on one line.
  std::string to_json() const;
  static IterationState from_json(std::string_view text);
};

// Training and evaluation callbacks. sft receives R^t and, when the run is
// persisted, the path of its store file.
struct MoiaHooks {
  std::function<void(std::span<const TraceRecord>, int t,
                     const std::filesystem::path &r_path)>
      sft;
  std::function<void(std::span<const RawPair>, int t)> rpo;
  std::function<double(int t)> eval;
  std::function<std::shared_ptr<Backend>(int t)> policy_backend;
  // Optional persistence of hook state after each completed iteration.
  std::function<void(const std::filesystem::path &dir, int t)> save;
  std::function<void(const std::filesystem::path &dir, int t)> load;
};

struct MoiaConfig {
  int max_iters = 10;
  double convergence_delta = 0.005;
  ResampleConfig resample;
  // When set, state_<t>.json and R_<t>.jsonl are written here after every
  // iteration and an interrupted run resumes from the last complete one.
  std::optional<std::filesystem::path> state_dir;

  void validate() const;
};

class MoiaError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Runs SFT, RPO, evaluation and re-sampling until every pair has a trace,
// the EM change falls below convergence_delta, or max_iters iterations have
// run. Returns every state from t = 0 on. Hook exceptions propagate after
// the last completed iteration has been persisted.
std::vector<IterationState> run_moia(std::span<const RawPair> pairs,
                                     std::span<const TraceRecord> r0,
                                     const MoiaHooks &hooks,
                                     const MoiaConfig &cfg);

// Hooks that do no training: EM follows a fixed schedule indexed by t (the
// last value repeats) and re-sampling uses the given backend.
MoiaHooks scripted_hooks(std::vector<double> em_schedule,
                         std::shared_ptr<Backend> backend);

struct ToyHookConfig {
  int sft_epochs = 5;
  double sft_learning_rate = 0.3;
  GrpoConfig grpo;
  RewardConfig reward;
  int grpo_steps = 50;
  std::size_t max_completion_len = 32;
  std::uint64_t seed = 0;
};

// Trains a toy policy in process. Prompts are render_policy_prompt(caption)
// throughout so that training and re-sampling see the same conditioning.
// Evaluation is greedy EM over eval_pairs.
MoiaHooks toy_hooks(std::shared_ptr<ToyPolicy> policy, ToyHookConfig cfg,
                    std::vector<RawPair> eval_pairs);

struct SubprocessHookConfig {
  // Shell commands; {t}, {r_path}, {d_path} and {state_dir} are replaced.
  // The eval command prints the EM as a number on standard output.
  std::string sft_command;
  std::string rpo_command;
  std::string eval_command;
  std::filesystem::path d_path;
  std::filesystem::path state_dir;
};

// External trainers driven through shell commands; re-sampling uses the
// given backend (for example an HTTP endpoint served by the trainer).
MoiaHooks subprocess_hooks(SubprocessHookConfig cfg,
                           std::shared_ptr<Backend> backend);

}  // namespace molr

#endif  // MOLR_MOIA_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_GRPO_H_
#define MOLR_GRPO_H_

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molr/dataset.h"
#include "molr/rewards.h"
#include "molr/toy_policy.h"

namespace molr {

enum class GrpoErrorKind {
  kGroupTooSmall,
  kNonFiniteLogprob,
  kShapeMismatch,
  kInvalidConfig,
};

class GrpoError: public std::invalid_argument {
public:
  GrpoError(GrpoErrorKind kind, const std::string &message)
      : std::invalid_argument(message), kind_(kind) { }
  GrpoErrorKind kind() const { return kind_; }

private:
  GrpoErrorKind kind_;
};

struct GrpoConfig {
  int group_size = 5;
  double clip_eps = 0.2;
  double kl_coef = 0.01;
  double learning_rate = 1e-6;
  double std_epsilon = 1e-8;

  // Throws GrpoError(kInvalidConfig).
  void validate() const;
};

// A_k = (r_k - mean) / (population std + std_epsilon). A group whose rewards
// are all equal gets zero advantages.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_epsilon = 1e-8);

// u - log(u) - 1 with u = exp(logprob_ref - logprob_theta), evaluated as
// expm1(d) - d for accuracy near zero. Saturates at the largest finite double
// when exp(d) overflows.
double kl_estimate(double logprob_theta, double logprob_ref);

struct GroupSample {
  std::string prompt;
  std::vector<std::vector<int>> completions;
  std::vector<double> logprobs_new;
  std::vector<double> logprobs_old;
  std::vector<double> logprobs_ref;
  std::vector<double> rewards;
  std::vector<double> advantages;

  std::size_t size() const { return rewards.size(); }
  // Throws GrpoError for unequal lengths, fewer than two members, or
  // non-finite log-probabilities.
  void validate() const;
};

struct SampleTerm {
  double ratio = 1.0;
  // True when the clipped branch is strictly the smaller one, so that the
  // term carries no gradient through the ratio.
  bool clipped = false;
  double kl = 0.0;
  double objective = 0.0;
};

struct GrpoLoss {
  // Objective to maximize: mean over the group of
  // min(ratio A, clip(ratio, 1-eps, 1+eps) A) - beta KL.
  double loss = 0.0;
  std::vector<SampleTerm> terms;
};

GrpoLoss grpo_loss(const GroupSample &group, const GrpoConfig &cfg);

// Gradient of the objective with respect to every policy parameter, with
// logprobs_new recomputed from the policy. The old and ref log-probabilities
// are taken from the group.
std::vector<double> grpo_grad(const GroupSample &group, const ToyPolicy &policy,
                              const GrpoConfig &cfg);
// Same, accumulated into grad with a scale factor.
void add_grpo_grad(const GroupSample &group, const ToyPolicy &policy,
                   const GrpoConfig &cfg, double scale, std::span<double> grad);

// Negative log-likelihood of the trace tokens (with the <sep> that ends
// them) and of the answer tokens (with <eos>), each conditioned on the prompt
// and everything before it.
struct SftLoss {
  double trace = 0.0;
  double answer = 0.0;
  double total() const { return trace + answer; }
};

SftLoss sft_loss(const ToyPolicy &policy, std::string_view prompt,
                 const TraceRecord &record);
// Uses the caption as prompt.
SftLoss sft_loss(const ToyPolicy &policy, const TraceRecord &record);
// grad += scale * d total / d params.
void add_sft_grad(const ToyPolicy &policy, std::string_view prompt,
                  const TraceRecord &record, double scale,
                  std::span<double> grad);

struct ToyTrainConfig {
  int sft_epochs = 0;
  double sft_learning_rate = 0.1;
  int grpo_steps = 0;
  // Gradient steps per rollout batch; ratios move away from 1 after the
  // first.
  int inner_updates = 1;
  std::size_t max_completion_len = 32;
  std::uint64_t seed = 0;
};

struct TrainingStep {
  int step = 0;
  double mean_reward = 0.0;
  double em_rate = 0.0;
  double loss = 0.0;
  double clipped_fraction = 0.0;

  bool operator==(const TrainingStep &) const = default;
};

struct TrainingLog {
  std::vector<TrainingStep> steps;
  // Greedy-decoding exact match over the dataset.
  double post_sft_em = 0.0;
  double final_em = 0.0;

  // One JSON object per step and line.
  std::string to_jsonl() const;
};

using PromptFn = std::function<std::string(const TraceRecord &)>;

// Greedy-decoding exact-match rate of the policy over the records.
double greedy_em(const ToyPolicy &policy, std::span<const TraceRecord> records,
                 std::size_t max_len, const PromptFn &prompt = {});

// SFT epochs over the records, a snapshot of the result as reference policy,
// then GRPO steps. Each step samples group_size completions per record from
// the current policy, scores them, standardizes within the group, and takes
// inner_updates plain gradient-ascent steps on the summed objective. Step
// statistics describe the rollouts of that step, before its update.
TrainingLog train_toy(ToyPolicy &policy, std::span<const TraceRecord> dataset,
                      const GrpoConfig &cfg, const RewardConfig &reward_cfg,
                      const ToyTrainConfig &train_cfg,
                      const PromptFn &prompt = {});

}  // namespace molr

#endif  // MOLR_GRPO_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/grpo.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace molr {
namespace {

std::string prompt_for(const PromptFn &fn, const TraceRecord &r) {
  return fn ? fn(r) : r.caption;
}

}  // namespace

void GrpoConfig::validate() const {
  auto fail = [](const char *what) {
    throw GrpoError(GrpoErrorKind::kInvalidConfig, what);
  };
  if (group_size < 2)
    fail("group_size must be at least 2");
  if (!(clip_eps > 0.0 && clip_eps < 1.0))
    fail("clip_eps must lie in (0, 1)");
  if (!(kl_coef >= 0.0) || !std::isfinite(kl_coef))
    fail("kl_coef must be non-negative");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail("learning_rate must be positive");
  if (!(std_epsilon >= 0.0) || !std::isfinite(std_epsilon))
    fail("std_epsilon must be non-negative");
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_epsilon) {
  if (rewards.size() < 2)
    throw GrpoError(GrpoErrorKind::kGroupTooSmall,
                    "a group needs at least two rewards");
  std::vector<double> out(rewards.size(), 0.0);
  bool degenerate = std::all_of(rewards.begin(), rewards.end(),
                                [&](double r) { return r == rewards[0]; });
  if (degenerate)
    return out;

  // Work with e_k = n r_k - sum instead of r_k - mean. Then
  // (r_k - mean) / std = e_k / sqrt(sum e^2 / n), which avoids rounding the
  // mean and is exact for small integer rewards.
  double n = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (double r: rewards)
    sum += r;
  double sq = 0.0;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    out[k] = n * rewards[k] - sum;
    sq += out[k] * out[k];
  }
  double denom = std::sqrt(sq / n) + n * std_epsilon;
  for (double &e: out)
    e /= denom;
  return out;
}

double kl_estimate(double logprob_theta, double logprob_ref) {
  double d = logprob_ref - logprob_theta;
  double v = std::expm1(d) - d;
  if (!std::isfinite(v))
    return std::numeric_limits<double>::max();
  return std::max(v, 0.0);
}

void GroupSample::validate() const {
  std::size_t g = rewards.size();
  if (g < 2)
    throw GrpoError(GrpoErrorKind::kGroupTooSmall,
                    "a group needs at least two members");
  if (completions.size() != g || logprobs_new.size() != g
      || logprobs_old.size() != g || logprobs_ref.size() != g
      || advantages.size() != g) {
    throw GrpoError(GrpoErrorKind::kShapeMismatch,
                    "group fields have different lengths");
  }
  for (const auto *v: { &logprobs_new, &logprobs_old, &logprobs_ref }) {
    for (double x: *v) {
      if (!std::isfinite(x))
        throw GrpoError(GrpoErrorKind::kNonFiniteLogprob,
                        "non-finite log-probability in group");
    }
  }
}

namespace {

SampleTerm term_for(double lp_new, double lp_old, double lp_ref, double adv,
                    const GrpoConfig &cfg) {
  SampleTerm t;
  t.ratio = std::exp(lp_new - lp_old);
  double clipped_ratio =
      std::clamp(t.ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
  double unclipped = t.ratio * adv;
  double clipped = clipped_ratio * adv;
  t.clipped = clipped < unclipped;
  t.kl = kl_estimate(lp_new, lp_ref);
  t.objective = std::min(unclipped, clipped) - cfg.kl_coef * t.kl;
  return t;
}

}  // namespace

GrpoLoss grpo_loss(const GroupSample &group, const GrpoConfig &cfg) {
  group.validate();
  GrpoLoss out;
  double sum = 0.0;
  for (std::size_t k = 0; k < group.size(); ++k) {
    SampleTerm t = term_for(group.logprobs_new[k], group.logprobs_old[k],
                            group.logprobs_ref[k], group.advantages[k], cfg);
    sum += t.objective;
    out.terms.push_back(t);
  }
  out.loss = sum / static_cast<double>(group.size());
  return out;
}

void add_grpo_grad(const GroupSample &group, const ToyPolicy &policy,
                   const GrpoConfig &cfg, double scale,
                   std::span<double> grad) {
  group.validate();
  if (grad.size() != policy.num_params())
    throw GrpoError(GrpoErrorKind::kShapeMismatch,
                    "gradient buffer does not match the policy");
  double inv_g = 1.0 / static_cast<double>(group.size());
  for (std::size_t k = 0; k < group.size(); ++k) {
    double lp_new = policy.log_prob(group.prompt, group.completions[k]);
    if (!std::isfinite(lp_new))
      throw GrpoError(GrpoErrorKind::kNonFiniteLogprob,
                      "non-finite log-probability under the policy");
    SampleTerm t = term_for(lp_new, group.logprobs_old[k],
                            group.logprobs_ref[k], group.advantages[k], cfg);
    // d/d lp_new of the surrogate is ratio * A on the active unclipped
    // branch; of -beta KL it is -beta (1 - u) with u = exp(lp_ref - lp_new).
    double d_surrogate = t.clipped ? 0.0 : t.ratio * group.advantages[k];
    double u = std::exp(group.logprobs_ref[k] - lp_new);
    double d_kl = -cfg.kl_coef * (1.0 - u);
    double coeff = scale * inv_g * (d_surrogate + d_kl);
    if (coeff != 0.0)
      policy.add_log_prob_grad(group.prompt, group.completions[k], coeff, grad);
  }
}

std::vector<double> grpo_grad(const GroupSample &group, const ToyPolicy &policy,
                              const GrpoConfig &cfg) {
  std::vector<double> grad(policy.num_params(), 0.0);
  add_grpo_grad(group, policy, cfg, 1.0, grad);
  return grad;
}

SftLoss sft_loss(const ToyPolicy &policy, std::string_view prompt,
                 const TraceRecord &record) {
  const ToyVocab &vocab = policy.vocab();
  std::vector<int> target = vocab.encode_target(record.trace, record.smiles);
  std::size_t trace_len = vocab.tokenize_words(record.trace).size();
  std::size_t split = trace_len == 0 ? 0 : trace_len + 1;

  SftLoss loss;
  std::span<const int> all(target);
  // log_prob of a prefix is the sum of its per-token terms, so the answer
  // part is the difference of two prefix sums.
  double lp_trace = policy.log_prob(prompt, all.first(split));
  double lp_all = policy.log_prob(prompt, all);
  loss.trace = -lp_trace;
  loss.answer = -(lp_all - lp_trace);
  return loss;
}

SftLoss sft_loss(const ToyPolicy &policy, const TraceRecord &record) {
  return sft_loss(policy, record.caption, record);
}

void add_sft_grad(const ToyPolicy &policy, std::string_view prompt,
                  const TraceRecord &record, double scale,
                  std::span<double> grad) {
  std::vector<int> target =
      policy.vocab().encode_target(record.trace, record.smiles);
  policy.add_log_prob_grad(prompt, target, -scale, grad);
}

std::string TrainingLog::to_jsonl() const {
  std::string out;
  for (const TrainingStep &s: steps) {
    nlohmann::ordered_json obj;
    obj["step"] = s.step;
    obj["mean_reward"] = s.mean_reward;
    obj["em_rate"] = s.em_rate;
    obj["loss"] = s.loss;
    obj["clipped_fraction"] = s.clipped_fraction;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

double greedy_em(const ToyPolicy &policy, std::span<const TraceRecord> records,
                 std::size_t max_len, const PromptFn &prompt) {
  if (records.empty())
    return 0.0;
  std::size_t hits = 0;
  for (const TraceRecord &r: records) {
    std::vector<int> tokens = policy.greedy(prompt_for(prompt, r), max_len);
    hits += exact_reward(policy.vocab().decode_completion(tokens), r.smiles)
            > 0.0;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

TrainingLog train_toy(ToyPolicy &policy, std::span<const TraceRecord> dataset,
                      const GrpoConfig &cfg, const RewardConfig &reward_cfg,
                      const ToyTrainConfig &train_cfg, const PromptFn &prompt) {
  cfg.validate();
  reward_cfg.validate();
  if (dataset.empty())
    throw std::invalid_argument("training dataset is empty");

  std::vector<std::string> prompts;
  std::vector<RewardTarget> targets;
  for (const TraceRecord &r: dataset) {
    prompts.push_back(prompt_for(prompt, r));
    targets.emplace_back(r.smiles, reward_cfg.similarity_kind);
    policy.vocab().encode_target(r.trace, r.smiles);
  }

  std::vector<double> grad(policy.num_params());
  for (int epoch = 0; epoch < train_cfg.sft_epochs; ++epoch) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      std::fill(grad.begin(), grad.end(), 0.0);
      add_sft_grad(policy, prompts[i], dataset[i], 1.0, grad);
      std::span<double> theta = policy.params();
      for (std::size_t j = 0; j < theta.size(); ++j)
        theta[j] -= train_cfg.sft_learning_rate * grad[j];
    }
  }

  TrainingLog log;
  log.post_sft_em =
      greedy_em(policy, dataset, train_cfg.max_completion_len, prompt);
  const ToyPolicy reference = policy;

  Rng rng(train_cfg.seed);
  std::size_t g = static_cast<std::size_t>(cfg.group_size);
  for (int step = 0; step < train_cfg.grpo_steps; ++step) {
    TrainingStep stats;
    stats.step = step;

    std::vector<GroupSample> groups(dataset.size());
    double reward_sum = 0.0;
    double exact_sum = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      GroupSample &group = groups[i];
      group.prompt = prompts[i];
      for (std::size_t k = 0; k < g; ++k) {
        std::vector<int> tokens =
            policy.sample(group.prompt, rng, train_cfg.max_completion_len);
        RewardBreakdown b = combined_reward(
            policy.vocab().decode_completion(tokens), targets[i], reward_cfg);
        reward_sum += b.total;
        exact_sum += b.exact;
        double lp = policy.log_prob(group.prompt, tokens);
        group.logprobs_old.push_back(lp);
        group.logprobs_new.push_back(lp);
        group.logprobs_ref.push_back(reference.log_prob(group.prompt, tokens));
        group.rewards.push_back(b.total);
        group.completions.push_back(std::move(tokens));
      }
      group.advantages = group_advantages(group.rewards, cfg.std_epsilon);
    }
    double samples = static_cast<double>(dataset.size() * g);
    stats.mean_reward = reward_sum / samples;
    stats.em_rate = exact_sum / samples;

    for (int inner = 0; inner < std::max(1, train_cfg.inner_updates); ++inner) {
      double loss_sum = 0.0;
      std::size_t clipped = 0;
      for (GroupSample &group: groups) {
        for (std::size_t k = 0; k < g; ++k)
          group.logprobs_new[k] =
              policy.log_prob(group.prompt, group.completions[k]);
        GrpoLoss loss = grpo_loss(group, cfg);
        loss_sum += loss.loss;
        for (const SampleTerm &t: loss.terms)
          clipped += t.clipped;
      }
      if (inner == 0)
        stats.loss = loss_sum / static_cast<double>(groups.size());
      stats.clipped_fraction = static_cast<double>(clipped) / samples;

      std::fill(grad.begin(), grad.end(), 0.0);
      for (const GroupSample &group: groups)
        add_grpo_grad(group, policy, cfg, 1.0, grad);
      std::span<double> theta = policy.params();
      for (std::size_t j = 0; j < theta.size(); ++j)
        theta[j] += cfg.learning_rate * grad[j];
    }
    log.steps.push_back(stats);
  }

  log.final_em = greedy_em(policy, dataset, train_cfg.max_completion_len, prompt);
  return log;
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "molr/grpo.h"
#include "molr/random.h"
#include "molr/toy_policy.h"

namespace molr {
namespace {

std::vector<TraceRecord> toy_records() {
  auto rec = [](std::string id, std::string caption, std::string smiles,
                std::string trace) {
    TraceRecord r;
    r.id = std::move(id);
    r.caption = std::move(caption);
    r.smiles = std::move(smiles);
    r.trace = std::move(trace);
    return r;
  };
  return { rec("a", "ethanol", "CCO", "alcohol"),
           rec("b", "ethylamine", "CCN", "amine"),
           rec("c", "acetic acid", "CC(=O)O", "acid") };
}

ToyVocab toy_vocab() {
  return ToyVocab({ "C", "O", "N", "=", "(", ")", "alcohol", "amine", "acid" });
}

TEST(Advantages, HandExample) {
  std::vector<double> r { 1, 0, 0, 0, 0 };
  std::vector<double> a = group_advantages(r, 0.0);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a[0], 2.0);
  for (int k = 1; k < 5; ++k)
    EXPECT_EQ(a[k], -0.5);
}

TEST(Advantages, StandardizedOnRandomGroups) {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t g = 2 + rng.uniform_index(15);
    std::vector<double> r(g);
    for (double &x: r)
      x = rng.uniform01();
    std::vector<double> a = group_advantages(r, 0.0);
    double mean = std::accumulate(a.begin(), a.end(), 0.0) / g;
    double var = 0.0;
    for (double x: a)
      var += (x - mean) * (x - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(std::sqrt(var / g), 1.0, 1e-6);
  }
}

TEST(Advantages, DegenerateGroupIsZero) {
  std::vector<double> r(6, 0.7);
  for (double a: group_advantages(r))
    EXPECT_EQ(a, 0.0);
  std::vector<double> one { 1.0 };
  EXPECT_THROW(group_advantages(one), GrpoError);
}

TEST(Kl, ClosedForm) {
  // u = 2: 2 - ln 2 - 1.
  EXPECT_NEAR(kl_estimate(0.0, std::log(2.0)), 1.0 - std::log(2.0), 1e-15);
  EXPECT_NEAR(kl_estimate(0.0, std::log(2.0)), 0.30685281944005469, 1e-15);
  EXPECT_EQ(kl_estimate(-3.2, -3.2), 0.0);
  EXPECT_EQ(kl_estimate(0.0, 1000.0), DBL_MAX);
  Rng rng(2);
  for (int k = 0; k < 10000; ++k) {
    double a = (rng.uniform01() - 0.5) * 40, b = (rng.uniform01() - 0.5) * 40;
    EXPECT_GE(kl_estimate(a, b), 0.0);
  }
  // Accurate for tiny differences: u - ln u - 1 ~ d^2 / 2.
  EXPECT_NEAR(kl_estimate(0.0, 1e-8), 0.5e-16, 1e-24);
}

GroupSample hand_group(std::vector<double> lp_new, std::vector<double> lp_old,
                       std::vector<double> adv) {
  GroupSample g;
  g.prompt = "p";
  g.completions.assign(lp_new.size(), std::vector<int> { 1 });
  g.logprobs_new = lp_new;
  g.logprobs_old = lp_old;
  g.logprobs_ref = lp_old;
  g.rewards.assign(lp_new.size(), 0.0);
  g.advantages = std::move(adv);
  return g;
}

TEST(Loss, ClippingBranches) {
  GrpoConfig cfg;
  cfg.kl_coef = 0.0;
  double up = std::log(1.5);
  GroupSample g = hand_group({ up, up, 0.0 }, { 0.0, 0.0, 0.0 }, { 1.0, -1.0, 0.5 });
  GrpoLoss loss = grpo_loss(g, cfg);
  EXPECT_NEAR(loss.terms[0].ratio, 1.5, 1e-12);
  EXPECT_TRUE(loss.terms[0].clipped);
  EXPECT_NEAR(loss.terms[0].objective, 1.2, 1e-12);
  EXPECT_FALSE(loss.terms[1].clipped);
  EXPECT_NEAR(loss.terms[1].objective, -1.5, 1e-12);
  EXPECT_FALSE(loss.terms[2].clipped);
  EXPECT_NEAR(loss.terms[2].objective, 0.5, 1e-12);
  EXPECT_NEAR(loss.loss, (1.2 - 1.5 + 0.5) / 3.0, 1e-12);
}

TEST(Loss, KlPenalty) {
  GrpoConfig cfg;
  cfg.kl_coef = 0.1;
  GroupSample g = hand_group({ 0.0, 0.0 }, { 0.0, 0.0 }, { 0.0, 0.0 });
  g.logprobs_ref = { std::log(2.0), 0.0 };
  GrpoLoss loss = grpo_loss(g, cfg);
  EXPECT_NEAR(loss.terms[0].kl, 1.0 - std::log(2.0), 1e-15);
  EXPECT_NEAR(loss.loss, -0.1 * (1.0 - std::log(2.0)) / 2.0, 1e-15);
}

TEST(Loss, ValidatesGroups) {
  GrpoConfig cfg;
  GroupSample g = hand_group({ 0.0 }, { 0.0 }, { 0.0 });
  try {
    grpo_loss(g, cfg);
    FAIL();
  } catch (const GrpoError &e) {
    EXPECT_EQ(e.kind(), GrpoErrorKind::kGroupTooSmall);
  }
  g = hand_group({ 0.0, NAN }, { 0.0, 0.0 }, { 0.0, 0.0 });
  try {
    grpo_loss(g, cfg);
    FAIL();
  } catch (const GrpoError &e) {
    EXPECT_EQ(e.kind(), GrpoErrorKind::kNonFiniteLogprob);
  }
  g = hand_group({ 0.0, 0.0 }, { 0.0, 0.0 }, { 0.0 });
  try {
    grpo_loss(g, cfg);
    FAIL();
  } catch (const GrpoError &e) {
    EXPECT_EQ(e.kind(), GrpoErrorKind::kShapeMismatch);
  }
  cfg.clip_eps = -1;
  EXPECT_THROW(cfg.validate(), GrpoError);
}

// Central differences of the objective against the analytic gradient.
double max_relative_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  ToyPolicy policy(ToyVocab({ "A", "B", "C" }), 24, 2, 0.8);  // 144 parameters
  for (double &p: policy.params())
    p = rng.uniform01() * 2 - 1;
  ToyPolicy old = policy, ref = policy;
  for (double &p: ref.params())
    p += (rng.uniform01() - 0.5) * 0.3;

  GrpoConfig cfg;
  cfg.kl_coef = 0.05 + rng.uniform01() * 0.2;
  GroupSample g;
  g.prompt = "q" + std::to_string(seed);
  for (int k = 0; k < 5; ++k) {
    std::vector<int> t = old.sample(g.prompt, rng, 6);
    g.completions.push_back(t);
    g.logprobs_old.push_back(old.log_prob(g.prompt, t));
    g.logprobs_ref.push_back(ref.log_prob(g.prompt, t));
    g.rewards.push_back(rng.uniform01());
  }
  g.advantages = group_advantages(g.rewards);
  for (double &p: policy.params())
    p += (rng.uniform01() - 0.5) * 0.1;

  auto objective = [&] {
    g.logprobs_new.clear();
    for (const auto &c: g.completions)
      g.logprobs_new.push_back(policy.log_prob(g.prompt, c));
    return grpo_loss(g, cfg).loss;
  };
  objective();
  std::vector<double> grad = grpo_grad(g, policy, cfg);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < policy.num_params(); ++i) {
    double saved = policy.params()[i];
    policy.params()[i] = saved + h;
    double plus = objective();
    policy.params()[i] = saved - h;
    double minus = objective();
    policy.params()[i] = saved;
    double fd = (plus - minus) / (2 * h);
    double scale = std::max({ std::abs(fd), std::abs(grad[i]), 1e-6 });
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
  }
  return worst;
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    EXPECT_LT(max_relative_gradient_error(seed), 1e-4) << "seed " << seed;
}

TEST(Sft, UniformPolicyClosedForm) {
  // Zero parameters give a uniform next-token distribution over the whole
  // vocabulary, so each target token costs ln V.
  struct Case {
    int user_symbols;
    std::string smiles;
    int target_len;
  };
  for (const Case &c: { Case { 1, "CC", 3 }, Case { 5, "CCCC", 5 },
                        Case { 13, "C", 2 } }) {
    std::vector<std::string> symbols { "C" };
    for (int i = 1; i < c.user_symbols; ++i)
      symbols.push_back("s" + std::to_string(i));
    ToyPolicy policy(ToyVocab(symbols), 16, 2, 1.0);
    std::size_t v = policy.vocab().size();
    TraceRecord r;
    r.id = "x";
    r.caption = "cap";
    r.smiles = c.smiles;
    r.trace = "";
    EXPECT_EQ(policy.vocab().encode_target(r.trace, r.smiles).size(),
              static_cast<std::size_t>(c.target_len));
    EXPECT_NEAR(sft_loss(policy, r).total(), c.target_len * std::log(double(v)), 1e-9)
        << "V=" << v;
  }
}

TEST(Sft, SplitsTraceAndAnswer) {
  ToyPolicy policy(toy_vocab(), 64, 2, 1.0);
  TraceRecord r = toy_records()[0];
  SftLoss loss = sft_loss(policy, r);
  double lnv = std::log(double(policy.vocab().size()));
  EXPECT_NEAR(loss.trace, 2 * lnv, 1e-12);   // "alcohol" <sep>
  EXPECT_NEAR(loss.answer, 4 * lnv, 1e-12);  // C C O <eos>
}

TEST(Sft, GradientDescentReducesLoss) {
  ToyPolicy policy(toy_vocab(), 256, 3, 1.0);
  auto records = toy_records();
  auto total = [&] {
    double s = 0.0;
    for (const auto &r: records)
      s += sft_loss(policy, r).total();
    return s;
  };
  double before = total();
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::vector<double> grad(policy.num_params(), 0.0);
    for (const auto &r: records)
      add_sft_grad(policy, r.caption, r, 1.0, grad);
    for (std::size_t i = 0; i < grad.size(); ++i)
      policy.params()[i] -= 0.3 * grad[i];
  }
  EXPECT_LT(total(), before);
}

TEST(ToyVocab, EncodeDecode) {
  ToyVocab v = toy_vocab();
  EXPECT_EQ(v.size(), 12u);
  EXPECT_EQ(v.symbol(v.bos()), "<bos>");
  std::vector<int> t = v.encode_target("acid", "CC(=O)O");
  EXPECT_EQ(t.front(), *v.find("acid"));
  EXPECT_EQ(t[1], v.sep());
  EXPECT_EQ(t.back(), v.eos());
  EXPECT_EQ(v.decode_completion(t), "<think>acid</think><answer>CC(=O)O</answer>");
  std::vector<int> no_sep { *v.find("C"), *v.find("O"), v.eos(), *v.find("N") };
  EXPECT_EQ(v.decode_completion(no_sep), "<think></think><answer>CO</answer>");
  EXPECT_THROW(v.tokenize_smiles("CCS"), TokenOutOfVocabError);
  EXPECT_THROW(v.tokenize_words("acid base"), TokenOutOfVocabError);
  EXPECT_THROW(ToyVocab({ "C", "C" }), std::invalid_argument);
  std::vector<std::string> many;
  for (int i = 0; i < 62; ++i)
    many.push_back("s" + std::to_string(i));
  EXPECT_THROW(ToyVocab { many }, std::invalid_argument);
}

TEST(ToyPolicyModel, ProbabilitiesAndSampling) {
  ToyPolicy policy(toy_vocab(), 128, 3, 0.7);
  Rng init(4);
  for (double &p: policy.params())
    p = init.uniform01() - 0.5;
  std::vector<int> prefix { 3, 4 };
  std::vector<double> p = policy.probabilities("ethanol", prefix);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);

  Rng a(9), b(9);
  std::vector<int> s1 = policy.sample("ethanol", a, 10);
  std::vector<int> s2 = policy.sample("ethanol", b, 10);
  EXPECT_EQ(s1, s2);
  EXPECT_LE(s1.size(), 10u);

  double lp = 0.0;
  for (std::size_t k = 0; k < s1.size(); ++k) {
    std::vector<int> pre(s1.begin(), s1.begin() + k);
    lp += std::log(policy.probabilities("ethanol", pre)[s1[k]]);
  }
  EXPECT_NEAR(policy.log_prob("ethanol", s1), lp, 1e-12);

  ToyPolicy back = ToyPolicy::from_json(policy.to_json());
  EXPECT_EQ(back.to_json(), policy.to_json());
  EXPECT_EQ(back.greedy("ethanol", 8), policy.greedy("ethanol", 8));
}

TEST(Training, DeterministicUnderFixedSeed) {
  auto records = toy_records();
  GrpoConfig cfg;
  cfg.learning_rate = 0.5;
  RewardConfig reward = RewardConfig::preset("paper-tradeoff-8");
  reward.length_threshold = 1;
  ToyTrainConfig train;
  train.sft_epochs = 2;
  train.sft_learning_rate = 0.3;
  train.grpo_steps = 10;
  train.max_completion_len = 12;
  train.seed = 77;
  ToyPolicy p1(toy_vocab(), 512, 3), p2(toy_vocab(), 512, 3);
  TrainingLog l1 = train_toy(p1, records, cfg, reward, train);
  TrainingLog l2 = train_toy(p2, records, cfg, reward, train);
  EXPECT_EQ(l1.steps, l2.steps);
  EXPECT_EQ(l1.to_jsonl(), l2.to_jsonl());
  EXPECT_EQ(p1.to_json(), p2.to_json());
  ASSERT_EQ(l1.steps.size(), 10u);
  for (const TrainingStep &s: l1.steps) {
    EXPECT_GE(s.em_rate, 0.0);
    EXPECT_LE(s.em_rate, 1.0);
    EXPECT_GE(s.clipped_fraction, 0.0);
  }
  std::string first_line = l1.to_jsonl().substr(0, l1.to_jsonl().find('\n'));
  auto obj = nlohmann::json::parse(first_line);
  EXPECT_EQ(obj.at("step"), 0);
  EXPECT_TRUE(obj.contains("em_rate"));
}

TEST(Training, GrpoRaisesRewardAfterWarmStart) {
  auto records = toy_records();
  GrpoConfig cfg;
  cfg.learning_rate = 1.0;
  RewardConfig reward = RewardConfig::preset("paper-tradeoff-8");
  reward.length_threshold = 1;
  ToyTrainConfig train;
  train.sft_epochs = 12;
  train.sft_learning_rate = 0.3;
  train.grpo_steps = 200;
  train.max_completion_len = 16;
  train.seed = 3;
  ToyPolicy policy(toy_vocab(), 4096, 3);
  TrainingLog log = train_toy(policy, records, cfg, reward, train);
  double early = 0.0, late = 0.0;
  for (int k = 0; k < 10; ++k) {
    early += log.steps[k].mean_reward / 10;
    late += log.steps[log.steps.size() - 1 - k].mean_reward / 10;
  }
  EXPECT_GT(late, early);
  EXPECT_EQ(log.final_em, 1.0);
}

}  // namespace
}  // namespace molr

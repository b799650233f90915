//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/rewards.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "molr/canonical.h"
#include "molr/completion.h"

namespace molr {
namespace {

std::size_t whitespace_tokens(std::string_view text) {
  std::istringstream in{ std::string(text) };
  std::size_t n = 0;
  std::string word;
  while (in >> word)
    ++n;
  return n;
}

FingerprintBits bits_for(const MoleculeGraph &mol, FingerprintKind kind) {
  return fingerprint(mol, kind);
}

struct Scored {
  double exact = 0.0;
  double similarity = 0.0;
};

Scored score_answer(std::string_view completion, const RewardTarget &target,
                    bool fallback) {
  Scored s;
  auto answer = extract_answer(completion, fallback);
  if (!answer)
    return s;
  auto mol = parse_valid(*answer);
  if (!mol)
    return s;
  if (canonicalize(*mol) == target.canonical()) {
    s.exact = 1.0;
    s.similarity = 1.0;
    return s;
  }
  s.similarity = tanimoto(bits_for(*mol, target.kind()), target.bits());
  return s;
}

}  // namespace

void RewardConfig::validate() const {
  for (double w: { w_exact, w_similarity, w_format, w_length }) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0)
      throw RewardConfigError("reward weights must lie in [0, 1]");
  }
  double sum = w_exact + w_similarity + w_format + w_length;
  if (std::abs(sum - 1.0) > 1e-9)
    throw RewardConfigError("reward weights must sum to 1");
  if (length_threshold <= 0)
    throw RewardConfigError("length_threshold must be positive");
}

RewardConfig RewardConfig::preset(std::string_view name) {
  RewardConfig cfg;
  if (name == "exact-only")
    return cfg;
  constexpr std::string_view prefix = "paper-tradeoff-";
  if (name.size() == prefix.size() + 1 && name.substr(0, prefix.size()) == prefix
      && name.back() >= '0' && name.back() <= '8') {
    int k = name.back() - '0';
    cfg.w_exact = k / 10.0;
    cfg.w_similarity = (8 - k) / 10.0;
    cfg.w_length = 0.2;
    cfg.w_format = 0.0;
    return cfg;
  }
  throw RewardConfigError("unknown reward preset '" + std::string(name) + "'");
}

std::optional<std::string> extract_answer(std::string_view completion,
                                          bool fallback) {
  CompletionSpan span = parse_completion(completion);
  if (span.well_formed)
    return std::string(trim(span.answer));
  if (fallback)
    return last_smiles_token(completion);
  return std::nullopt;
}

double format_reward(std::string_view completion) {
  return parse_completion(completion).well_formed ? 1.0 : 0.0;
}

double length_reward(std::string_view completion, int threshold) {
  if (threshold <= 0)
    throw RewardConfigError("length threshold must be positive");
  auto think = find_think_span(completion);
  if (!think)
    return 0.0;
  std::size_t tokens = whitespace_tokens(*think);
  std::size_t cap = static_cast<std::size_t>(threshold);
  return static_cast<double>(std::min(tokens, cap))
         / static_cast<double>(cap);
}

double exact_reward(std::string_view completion, std::string_view reference,
                    bool fallback) {
  auto answer = extract_answer(completion, fallback);
  return answer && smiles_equal(*answer, reference) ? 1.0 : 0.0;
}

double similarity_reward(std::string_view completion,
                         std::string_view reference, FingerprintKind kind,
                         bool fallback) {
  return score_answer(completion, RewardTarget(reference, kind), fallback)
      .similarity;
}

namespace {

MoleculeGraph require_valid(std::string_view reference) {
  auto mol = parse_valid(reference);
  if (!mol)
    throw std::invalid_argument("reference is not valid SMILES: "
                                + std::string(reference));
  return std::move(*mol);
}

}  // namespace

RewardTarget::RewardTarget(std::string_view reference, FingerprintKind kind)
    : RewardTarget(require_valid(reference), kind) { }

RewardTarget::RewardTarget(const MoleculeGraph &mol, FingerprintKind kind)
    : canonical_(canonicalize(mol)), kind_(kind), bits_(bits_for(mol, kind)) { }

RewardBreakdown combined_reward(std::string_view completion,
                                const RewardTarget &target,
                                const RewardConfig &cfg) {
  RewardBreakdown b;
  Scored s = score_answer(completion, target, cfg.fallback_extraction);
  b.exact = s.exact;
  b.similarity = s.similarity;
  b.format = format_reward(completion);
  b.length = length_reward(completion, cfg.length_threshold);
  b.total = cfg.w_exact * b.exact + cfg.w_similarity * b.similarity
            + cfg.w_format * b.format + cfg.w_length * b.length;
  return b;
}

RewardBreakdown combined_reward(std::string_view completion,
                                std::string_view reference,
                                const RewardConfig &cfg) {
  return combined_reward(completion,
                         RewardTarget(reference, cfg.similarity_kind), cfg);
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_REWARDS_H_
#define MOLR_REWARDS_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "molr/fingerprint.h"

namespace molr {

class RewardConfigError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RewardConfig {
  double w_exact = 1.0;
  double w_similarity = 0.0;
  double w_format = 0.0;
  double w_length = 0.0;
  int length_threshold = 1024;
  FingerprintKind similarity_kind = FingerprintKind::kCircular;
  // Take the last valid SMILES token when the completion is malformed.
  bool fallback_extraction = false;

  // Throws RewardConfigError when a weight is negative or not finite, the
  // weights do not sum to 1 within 1e-9, or the threshold is not positive.
  void validate() const;

  // "exact-only", or "paper-tradeoff-<k>" for k in 0..8: exact weight k/10,
  // similarity weight (8-k)/10, length weight 0.2, format weight 0.
  static RewardConfig preset(std::string_view name);
};

struct RewardBreakdown {
  double exact = 0.0;
  double similarity = 0.0;
  double format = 0.0;
  double length = 0.0;
  double total = 0.0;
};

// Trimmed content of the answer block of a well-formed completion. With
// fallback enabled, a malformed completion yields its last valid SMILES token.
std::optional<std::string> extract_answer(std::string_view completion,
                                          bool fallback = false);

double format_reward(std::string_view completion);
double length_reward(std::string_view completion, int threshold = 1024);
double exact_reward(std::string_view completion, std::string_view reference,
                    bool fallback = false);
double similarity_reward(std::string_view completion,
                         std::string_view reference,
                         FingerprintKind kind = FingerprintKind::kCircular,
                         bool fallback = false);

// Reference prepared once for scoring many completions.
class RewardTarget {
public:
  // Throws std::invalid_argument when the reference is not valid SMILES.
  RewardTarget(std::string_view reference, FingerprintKind kind);
  RewardTarget(const MoleculeGraph &mol, FingerprintKind kind);

  const std::string &canonical() const { return canonical_; }
  FingerprintKind kind() const { return kind_; }
  const FingerprintBits &bits() const { return bits_; }

private:
  std::string canonical_;
  FingerprintKind kind_;
  FingerprintBits bits_;
};

RewardBreakdown combined_reward(std::string_view completion,
                                const RewardTarget &target,
                                const RewardConfig &cfg);
RewardBreakdown combined_reward(std::string_view completion,
                                std::string_view reference,
                                const RewardConfig &cfg);

}  // namespace molr

#endif  // MOLR_REWARDS_H_

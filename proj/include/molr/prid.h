//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_PRID_H_
#define MOLR_PRID_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molr/completion.h"
#include "molr/dataset.h"
#include "molr/gateway.h"

namespace molr {

struct PridConfig {
  std::string expert_example;
  std::size_t subset_size = 1053;
  double score_threshold = 7.0;
  int max_retries = 3;
  // Template for distillation requests; the prompts are filled in per pair.
  // Attempt a (0-based) uses seed + a.
  GenerationRequest distill_request;
  GenerationRequest score_request;
  // Show the ground-truth SMILES to the score validator.
  bool score_with_reference = false;
  std::size_t parallelism = 4;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class PridFailure {
  kFormat,
  kAnswerMismatch,
  kScore,
  kBackend,
  kExhausted,
};

std::string_view to_string(PridFailure failure);

struct FormatCheck {
  bool pass = false;
  std::optional<PridFailure> reason;
  CompletionSpan span;
};

struct ScoreCheck {
  std::optional<double> score;
  bool pass = false;
  // True when the reply could not be turned into a score or the backend
  // failed, so that asking again may help.
  bool retry_eligible = false;
};

struct PridOutcome {
  std::optional<TraceRecord> record;
  int attempts = 0;
  // kExhausted whenever no record was produced.
  std::optional<PridFailure> failure_reason;
  // Reason the final attempt was rejected.
  std::optional<PridFailure> last_reason;
};

struct PridSummary {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  // Failed pairs keyed by the reason their last attempt was rejected.
  std::map<std::string, std::size_t> failed_by_reason;
  std::size_t total_attempts = 0;

  std::string to_json() const;
};

std::string build_distill_prompt(const RawPair &pair, const PridConfig &cfg);
std::string build_score_prompt(const RawPair &pair, std::string_view trace,
                               const PridConfig &cfg);

FormatCheck validate_format(std::string_view completion, const RawPair &pair);

// First number in the reply, if it lies in [0, 10].
std::optional<double> parse_score(std::string_view reply);

ScoreCheck validate_score(std::string_view completion, const RawPair &pair,
                          Backend &judge, const PridConfig &cfg);

PridOutcome distill_pair(const RawPair &pair, Backend &distiller,
                         Backend &judge, const PridConfig &cfg);

struct PridRun {
  std::vector<PridOutcome> outcomes;
  PridSummary summary;
};

// Samples cfg.subset_size pairs with the given seed, distills them with at
// most cfg.parallelism pairs in flight, and appends accepted records to the
// store at out_path in sample order.
PridRun run_prid(const RawStore &raw, const std::filesystem::path &out_path,
                 Backend &distiller, Backend &judge, const PridConfig &cfg,
                 std::uint64_t seed);

// Same on an explicit list of pairs.
PridRun run_prid_pairs(const std::vector<RawPair> &pairs,
                       const std::filesystem::path &out_path,
                       Backend &distiller, Backend &judge,
                       const PridConfig &cfg);

}  // namespace molr

#endif  // MOLR_PRID_H_

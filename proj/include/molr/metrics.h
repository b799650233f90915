//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_METRICS_H_
#define MOLR_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace molr {

class EmptyCorpusError: public std::invalid_argument {
public:
  EmptyCorpusError(): std::invalid_argument("EmptyCorpus") { }
};

struct EvalPair {
  std::string prediction;
  std::string reference;
  std::optional<std::string> extracted_answer;
};

// The answer scored for a pair: extracted_answer when set, else the trimmed
// answer block of a well-formed completion, else the trimmed prediction.
std::string answer_of(const EvalPair &pair);

// Splits UTF-8 into Unicode scalar values. A byte that does not start a valid
// sequence is kept as its own unit (mapped above U+10FFFF), so the result is
// defined for any input.
std::vector<std::uint32_t> code_points(std::string_view text);

std::size_t levenshtein(std::string_view a, std::string_view b);

inline constexpr int kBleuMaxOrder = 4;
inline constexpr double kBleuSmoothing = 0.1;

// Corpus BLEU over characters. See docs/metrics.md for the exact algorithm.
// Throws EmptyCorpusError when candidates is empty, std::invalid_argument
// when the sizes differ or max_n is outside 1..4.
double corpus_bleu(std::span<const std::string> candidates,
                   std::span<const std::string> references,
                   int max_n = kBleuMaxOrder);

// Corpus BLEU of answer_of(pair) against reference.
double bleu(std::span<const EvalPair> pairs, int max_n = kBleuMaxOrder);

double exact_match_rate(std::span<const EvalPair> pairs);
double validity_rate(std::span<const EvalPair> pairs);
double levenshtein_mean(std::span<const EvalPair> pairs);

enum class InvalidFts {
  kContributeZero,
  kExclude,
};

struct FtsMeans {
  double keys = 0.0;
  double path = 0.0;
  double circular = 0.0;
};

// Mean Tanimoto per fingerprint kind. Under kExclude, a corpus without any
// valid prediction yields zeros.
FtsMeans fts_means(std::span<const EvalPair> pairs,
                   InvalidFts invalid = InvalidFts::kContributeZero);

struct ConsistencyRecord {
  bool judge_prediction = false;
  bool actual_correct = false;
};

enum class ConsistencyF1 {
  // F1 of the judge as a classifier of correctness (positive = correct).
  kJudgeClassifier,
  // Mean of the per-class F1 scores for "correct" and "incorrect".
  kMacro,
};

double consistent_f1(std::span<const ConsistencyRecord> records,
                     ConsistencyF1 mode = ConsistencyF1::kJudgeClassifier);

struct EvalOptions {
  int bleu_max_n = kBleuMaxOrder;
  InvalidFts invalid_fts = InvalidFts::kContributeZero;
};

struct EvalReport {
  double bleu = 0.0;
  double exact_match = 0.0;
  double levenshtein_mean = 0.0;
  double keys_fts = 0.0;
  double path_fts = 0.0;
  double circular_fts = 0.0;
  double validity = 0.0;
  std::size_t n_pairs = 0;
};

EvalReport evaluate(std::span<const EvalPair> pairs,
                    const EvalOptions &options = {});

// Single-line JSON object with the fields of EvalReport in declaration order.
std::string to_json(const EvalReport &report);

}  // namespace molr

#endif  // MOLR_METRICS_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "molr/canonical.h"
#include "molr/completion.h"
#include "molr/fingerprint.h"

namespace molr {
namespace {

void require_nonempty(std::size_t n) {
  if (n == 0)
    throw EmptyCorpusError();
}

using Ngram = std::vector<std::uint32_t>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::uint32_t> &s,
                                          int n) {
  std::map<Ngram, std::size_t> counts;
  if (s.size() < static_cast<std::size_t>(n))
    return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i)
    ++counts[Ngram(s.begin() + i, s.begin() + i + n)];
  return counts;
}

}  // namespace

std::string answer_of(const EvalPair &pair) {
  if (pair.extracted_answer)
    return *pair.extracted_answer;
  CompletionSpan span = parse_completion(pair.prediction);
  if (span.well_formed)
    return std::string(trim(span.answer));
  return std::string(trim(pair.prediction));
}

std::vector<std::uint32_t> code_points(std::string_view text) {
  std::vector<std::uint32_t> out;
  out.reserve(text.size());
  const auto *s = reinterpret_cast<const unsigned char *>(text.data());
  std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = s[i];
    int len = 0;
    std::uint32_t cp = 0;
    std::uint32_t min = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
      min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
      min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
      min = 0x10000;
    }
    bool ok = len > 0 && i + len <= n;
    for (int k = 1; ok && k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80)
        ok = false;
      else
        cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    if (ok && len > 1
        && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)))
      ok = false;
    if (!ok) {
      out.push_back(0x110000u + c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::uint32_t> x = code_points(a);
  std::vector<std::uint32_t> y = code_points(b);
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j)
    row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      std::size_t up = row[j];
      std::size_t cost = x[i - 1] == y[j - 1] ? 0 : 1;
      row[j] = std::min({ row[j] + 1, row[j - 1] + 1, diag + cost });
      diag = up;
    }
  }
  return row[y.size()];
}

double corpus_bleu(std::span<const std::string> candidates,
                   std::span<const std::string> references, int max_n) {
  require_nonempty(candidates.size());
  if (candidates.size() != references.size())
    throw std::invalid_argument("candidate and reference counts differ");
  if (max_n < 1 || max_n > kBleuMaxOrder)
    throw std::invalid_argument("max_n must be in 1..4");

  std::vector<std::size_t> matches(max_n, 0);
  std::vector<std::size_t> totals(max_n, 0);
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::vector<std::uint32_t> c = code_points(candidates[i]);
    std::vector<std::uint32_t> r = code_points(references[i]);
    cand_len += c.size();
    ref_len += r.size();
    for (int n = 1; n <= max_n; ++n) {
      auto cc = ngram_counts(c, n);
      auto rc = ngram_counts(r, n);
      for (const auto &[gram, count]: cc) {
        totals[n - 1] += count;
        auto it = rc.find(gram);
        if (it != rc.end())
          matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (cand_len == 0)
    return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_n; ++n) {
    if (totals[n] == 0)
      continue;
    double numerator = matches[n] == 0 ? kBleuSmoothing
                                       : static_cast<double>(matches[n]);
    log_sum += std::log(numerator / static_cast<double>(totals[n]));
    ++orders;
  }
  double precision = std::exp(log_sum / orders);
  double bp = cand_len > ref_len
                  ? 1.0
                  : std::exp(1.0
                             - static_cast<double>(ref_len)
                                   / static_cast<double>(cand_len));
  return std::clamp(bp * precision, 0.0, 1.0);
}

double bleu(std::span<const EvalPair> pairs, int max_n) {
  require_nonempty(pairs.size());
  std::vector<std::string> cands;
  std::vector<std::string> refs;
  for (const EvalPair &p: pairs) {
    cands.push_back(answer_of(p));
    refs.push_back(p.reference);
  }
  return corpus_bleu(cands, refs, max_n);
}

double exact_match_rate(std::span<const EvalPair> pairs) {
  require_nonempty(pairs.size());
  std::size_t hits = 0;
  for (const EvalPair &p: pairs) {
    if (smiles_equal(answer_of(p), p.reference))
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double validity_rate(std::span<const EvalPair> pairs) {
  require_nonempty(pairs.size());
  std::size_t valid = 0;
  for (const EvalPair &p: pairs) {
    if (is_valid_smiles(answer_of(p)))
      ++valid;
  }
  return static_cast<double>(valid) / static_cast<double>(pairs.size());
}

double levenshtein_mean(std::span<const EvalPair> pairs) {
  require_nonempty(pairs.size());
  double sum = 0.0;
  for (const EvalPair &p: pairs)
    sum += static_cast<double>(levenshtein(answer_of(p), p.reference));
  return sum / static_cast<double>(pairs.size());
}

FtsMeans fts_means(std::span<const EvalPair> pairs, InvalidFts invalid) {
  require_nonempty(pairs.size());
  FtsMeans sum;
  std::size_t counted = 0;
  for (const EvalPair &p: pairs) {
    auto pred = parse_valid(answer_of(p));
    auto ref = parse_valid(p.reference);
    if (!pred || !ref) {
      if (invalid == InvalidFts::kContributeZero)
        ++counted;
      continue;
    }
    ++counted;
    sum.keys += tanimoto(structural_keys(*pred), structural_keys(*ref));
    sum.path += tanimoto(path_fingerprint(*pred), path_fingerprint(*ref));
    sum.circular +=
        tanimoto(circular_fingerprint(*pred), circular_fingerprint(*ref));
  }
  if (counted == 0)
    return {};
  double n = static_cast<double>(counted);
  return { sum.keys / n, sum.path / n, sum.circular / n };
}

namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0)
    return 0.0;
  double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double consistent_f1(std::span<const ConsistencyRecord> records,
                     ConsistencyF1 mode) {
  require_nonempty(records.size());
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const ConsistencyRecord &r: records) {
    if (r.judge_prediction && r.actual_correct)
      ++tp;
    else if (r.judge_prediction)
      ++fp;
    else if (r.actual_correct)
      ++fn;
    else
      ++tn;
  }
  if (mode == ConsistencyF1::kJudgeClassifier)
    return f1(tp, fp, fn);
  return 0.5 * (f1(tp, fp, fn) + f1(tn, fn, fp));
}

EvalReport evaluate(std::span<const EvalPair> pairs,
                    const EvalOptions &options) {
  require_nonempty(pairs.size());
  EvalReport report;
  report.bleu = bleu(pairs, options.bleu_max_n);
  report.exact_match = exact_match_rate(pairs);
  report.levenshtein_mean = levenshtein_mean(pairs);
  FtsMeans fts = fts_means(pairs, options.invalid_fts);
  report.keys_fts = fts.keys;
  report.path_fts = fts.path;
  report.circular_fts = fts.circular;
  report.validity = validity_rate(pairs);
  report.n_pairs = pairs.size();
  return report;
}

std::string to_json(const EvalReport &report) {
  nlohmann::ordered_json obj;
  obj["bleu"] = report.bleu;
  obj["exact_match"] = report.exact_match;
  obj["levenshtein_mean"] = report.levenshtein_mean;
  obj["keys_fts"] = report.keys_fts;
  obj["path_fts"] = report.path_fts;
  obj["circular_fts"] = report.circular_fts;
  obj["validity"] = report.validity;
  obj["n_pairs"] = report.n_pairs;
  return obj.dump();
}

}  // namespace molr

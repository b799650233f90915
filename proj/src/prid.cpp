//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/prid.h"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "molr/canonical.h"
#include "molr/completion.h"
#include "molr/prompts.h"

namespace molr {

void PridConfig::validate() const {
  if (trim(expert_example).empty())
    throw std::invalid_argument("prid.expert_example must not be empty");
  if (subset_size == 0)
    throw std::invalid_argument("prid.subset_size must be positive");
  if (!(score_threshold >= 0.0 && score_threshold <= 10.0))
    throw std::invalid_argument("prid.score_threshold must lie in [0, 10]");
  if (max_retries < 1)
    throw std::invalid_argument("prid.max_retries must be at least 1");
  if (parallelism == 0)
    throw std::invalid_argument("prid.parallelism must be positive");
  distill_request.validate();
  score_request.validate();
}

std::string_view to_string(PridFailure failure) {
  switch (failure) {
  case PridFailure::kFormat:
    return "format";
  case PridFailure::kAnswerMismatch:
    return "answer_mismatch";
  case PridFailure::kScore:
    return "score";
  case PridFailure::kBackend:
    return "backend";
  case PridFailure::kExhausted:
    return "exhausted";
  }
  return "format";
}

std::string PridSummary::to_json() const {
  nlohmann::ordered_json obj;
  obj["requested"] = requested;
  obj["accepted"] = accepted;
  obj["failed_by_reason"] = failed_by_reason;
  obj["total_attempts"] = total_attempts;
  return obj.dump();
}

std::string build_distill_prompt(const RawPair &pair, const PridConfig &cfg) {
  return render_template(distill_prompt_template(),
                         { { "expert_example", cfg.expert_example },
                           { "caption", pair.caption },
                           { "smiles", pair.smiles } });
}

std::string build_score_prompt(const RawPair &pair, std::string_view trace,
                               const PridConfig &cfg) {
  std::string reference;
  if (cfg.score_with_reference)
    reference = "Reference SMILES: " + pair.smiles + "\n";
  return render_template(score_prompt_template(),
                         { { "caption", pair.caption },
                           { "reference_block", reference },
                           { "trace", std::string(trace) } });
}

FormatCheck validate_format(std::string_view completion, const RawPair &pair) {
  FormatCheck check;
  check.span = parse_completion(completion);
  if (!check.span.well_formed || trim(check.span.think).empty()) {
    check.reason = PridFailure::kFormat;
    return check;
  }
  if (!smiles_equal(trim(check.span.answer), pair.smiles)) {
    check.reason = PridFailure::kAnswerMismatch;
    return check;
  }
  check.pass = true;
  return check;
}

std::optional<double> parse_score(std::string_view reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i])))
      continue;
    std::size_t end = i;
    while (end < reply.size()
           && std::isdigit(static_cast<unsigned char>(reply[end])))
      ++end;
    if (end + 1 < reply.size() && reply[end] == '.'
        && std::isdigit(static_cast<unsigned char>(reply[end + 1]))) {
      ++end;
      while (end < reply.size()
             && std::isdigit(static_cast<unsigned char>(reply[end])))
        ++end;
    }
    double value = std::strtod(std::string(reply.substr(i, end - i)).c_str(),
                               nullptr);
    if (value >= 0.0 && value <= 10.0)
      return value;
    return std::nullopt;
  }
  return std::nullopt;
}

ScoreCheck validate_score(std::string_view completion, const RawPair &pair,
                          Backend &judge, const PridConfig &cfg) {
  ScoreCheck check;
  CompletionSpan span = parse_completion(completion);
  GenerationRequest request = cfg.score_request;
  request.n_samples = 1;
  request.user_prompt = build_score_prompt(pair, span.think, cfg);
  GenerationResult result;
  try {
    result = judge.generate(request);
  } catch (const GatewayError &) {
    check.retry_eligible = true;
    return check;
  }
  if (result.completions.empty()) {
    check.retry_eligible = true;
    return check;
  }
  check.score = parse_score(result.completions.front());
  if (!check.score) {
    check.retry_eligible = true;
    return check;
  }
  check.pass = *check.score >= cfg.score_threshold;
  return check;
}

PridOutcome distill_pair(const RawPair &pair, Backend &distiller,
                         Backend &judge, const PridConfig &cfg) {
  PridOutcome outcome;
  GenerationRequest request = cfg.distill_request;
  request.n_samples = 1;
  request.user_prompt = build_distill_prompt(pair, cfg);
  if (request.system_prompt.empty())
    request.system_prompt = std::string(trim(system_prompt_template()));
  std::uint64_t base_seed = cfg.distill_request.seed.value_or(0);

  for (int a = 0; a < cfg.max_retries; ++a) {
    ++outcome.attempts;
    request.seed = base_seed + static_cast<std::uint64_t>(a);
    std::string completion;
    try {
      GenerationResult result = distiller.generate(request);
      if (result.completions.empty())
        throw GatewayError(GatewayErrorKind::kResponseMalformed,
                           "no completion");
      completion = result.completions.front();
    } catch (const GatewayError &) {
      outcome.last_reason = PridFailure::kBackend;
      continue;
    }

    FormatCheck format = validate_format(completion, pair);
    if (!format.pass) {
      outcome.last_reason = format.reason;
      continue;
    }
    ScoreCheck score = validate_score(completion, pair, judge, cfg);
    if (!score.pass) {
      outcome.last_reason = PridFailure::kScore;
      continue;
    }

    TraceRecord record;
    record.id = pair.id;
    record.caption = pair.caption;
    record.smiles = pair.smiles;
    record.trace = format.span.think;
    record.iteration = 0;
    record.provenance = Provenance::kPrid;
    record.judge_score = score.score;
    outcome.record = std::move(record);
    outcome.last_reason.reset();
    return outcome;
  }
  outcome.failure_reason = PridFailure::kExhausted;
  return outcome;
}

PridRun run_prid_pairs(const std::vector<RawPair> &pairs,
                       const std::filesystem::path &out_path,
                       Backend &distiller, Backend &judge,
                       const PridConfig &cfg) {
  cfg.validate();
  PridRun run;
  run.outcomes.resize(pairs.size());

  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++)
      run.outcomes[i] = distill_pair(pairs[i], distiller, judge, cfg);
  };
  std::size_t n_threads = std::min(cfg.parallelism, pairs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t)
    threads.emplace_back(worker);
  worker();
  for (std::thread &t: threads)
    t.join();

  std::vector<TraceRecord> accepted;
  run.summary.requested = pairs.size();
  for (const PridOutcome &o: run.outcomes) {
    run.summary.total_attempts += static_cast<std::size_t>(o.attempts);
    if (o.record) {
      accepted.push_back(*o.record);
    } else {
      PridFailure reason = o.last_reason.value_or(PridFailure::kExhausted);
      ++run.summary.failed_by_reason[std::string(to_string(reason))];
    }
  }
  run.summary.accepted = accepted.size();

  TraceStore store = TraceStore::open_or_create(out_path);
  store.append(accepted);
  return run;
}

PridRun run_prid(const RawStore &raw, const std::filesystem::path &out_path,
                 Backend &distiller, Backend &judge, const PridConfig &cfg,
                 std::uint64_t seed) {
  cfg.validate();
  return run_prid_pairs(sample_subset(raw, cfg.subset_size, seed), out_path,
                        distiller, judge, cfg);
}

}  // namespace molr

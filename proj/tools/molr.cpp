//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Command-line entry point. Machine-readable results go to standard output
// as JSON; progress and diagnostics go to standard error.
//
// Exit codes: 0 success, 1 input or config error, 2 backend failure,
// 3 validation failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "molr/canonical.h"
#include "molr/config.h"
#include "molr/dataset.h"
#include "molr/gateway.h"
#include "molr/grpo.h"
#include "molr/metrics.h"
#include "molr/moia.h"
#include "molr/prid.h"
#include "molr/prompts.h"
#include "molr/rewards.h"
#include "molr/smiles.h"

namespace fs = std::filesystem;

namespace {

enum ExitCode {
  kOk = 0,
  kInputError = 1,
  kBackendError = 2,
  kValidationError = 3,
};

class InputError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const fs::path &path) {
  std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos)
      end = content.size();
    std::string line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

bool is_jsonl(const fs::path &path) { return path.extension() == ".jsonl"; }

std::string describe_smiles_error(std::string_view smiles) {
  try {
    molr::canonical_smiles(smiles);
    return {};
  } catch (const molr::SmilesError &e) {
    return std::string(molr::to_string(e.kind())) + " at offset "
           + std::to_string(e.offset());
  } catch (const molr::ValenceError &e) {
    return std::string("ValenceError: ") + e.what();
  }
}

// canon -------------------------------------------------------------------

int cmd_canon(const std::vector<std::string> &inputs) {
  int status = kOk;
  for (const std::string &s: inputs) {
    try {
      std::cout << molr::canonical_smiles(s) << '\n';
    } catch (const std::exception &) {
      spdlog::error("{}: {}", s, describe_smiles_error(s));
      status = kInputError;
    }
  }
  return status;
}

// validate ----------------------------------------------------------------

int cmd_validate(const fs::path &path) {
  std::vector<std::string> lines = read_lines(path);
  std::size_t bad = 0;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string &line = lines[i];
    if (line.empty())
      continue;
    ++checked;
    nlohmann::ordered_json row;
    row["line"] = i + 1;
    std::string smiles;
    if (is_jsonl(path)) {
      try {
        nlohmann::json obj = nlohmann::json::parse(line);
        row["id"] = obj.value("id", std::string());
        smiles = obj.at("smiles").get<std::string>();
      } catch (const nlohmann::json::exception &e) {
        row["valid"] = false;
        row["error"] = std::string("MalformedLine: ") + e.what();
        std::cout << row.dump() << '\n';
        ++bad;
        continue;
      }
    } else {
      std::istringstream in(line);
      in >> smiles;
    }
    std::string error = describe_smiles_error(smiles);
    row["valid"] = error.empty();
    if (!error.empty()) {
      row["error"] = error;
      ++bad;
    }
    std::cout << row.dump() << '\n';
  }
  spdlog::info("{} of {} entries valid", checked - bad, checked);
  return bad == 0 ? kOk : kInputError;
}

// eval --------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string ref;
  std::optional<std::string> report;
  bool exclude_invalid = false;
  int bleu_max_n = molr::kBleuMaxOrder;
};

int cmd_eval(const EvalArgs &args) {
  std::vector<std::string> preds = read_lines(args.pred);
  std::vector<std::string> refs = read_lines(args.ref);
  if (preds.size() != refs.size())
    throw InputError("LineCountMismatch: " + std::to_string(preds.size())
                     + " predictions vs " + std::to_string(refs.size())
                     + " references");

  std::vector<molr::EvalPair> pairs;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    molr::EvalPair pair;
    if (is_jsonl(args.pred)) {
      nlohmann::json obj = nlohmann::json::parse(preds[i]);
      pair.prediction = obj.value("prediction", std::string());
      if (obj.contains("extracted_answer") && !obj["extracted_answer"].is_null())
        pair.extracted_answer = obj["extracted_answer"].get<std::string>();
    } else {
      pair.prediction = preds[i];
    }
    if (is_jsonl(args.ref))
      pair.reference =
          nlohmann::json::parse(refs[i]).at("smiles").get<std::string>();
    else
      pair.reference = std::string(molr::trim(refs[i]));
    if (!molr::is_valid_smiles(pair.reference))
      throw molr::DatasetError(molr::DatasetErrorKind::kValidationFailure,
                               "reference on line " + std::to_string(i + 1)
                                   + " is not valid SMILES",
                               i + 1);
    pairs.push_back(std::move(pair));
  }

  molr::EvalOptions options;
  options.bleu_max_n = args.bleu_max_n;
  options.invalid_fts = args.exclude_invalid ? molr::InvalidFts::kExclude
                                             : molr::InvalidFts::kContributeZero;
  molr::EvalReport report = molr::evaluate(pairs, options);
  std::string json = molr::to_json(report) + "\n";
  if (args.report)
    molr::write_file_atomic(*args.report, json);
  std::cout << json;
  return kOk;
}

// distill -----------------------------------------------------------------

struct StageArgs {
  std::string config;
  bool mock = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

molr::PipelineConfig load_config(const StageArgs &args) {
  molr::PipelineConfig cfg = molr::PipelineConfig::load(args.config);
  if (args.seed) {
    cfg.seed = *args.seed;
    if (cfg.toy)
      cfg.toy->train.seed = molr::derive_seed(cfg.seed, "toy.train");
    cfg.moia.toy.seed = molr::derive_seed(cfg.seed, "moia.toy");
  }
  return cfg;
}

fs::path require_path(const std::optional<fs::path> &p, const char *field) {
  if (!p)
    throw molr::ConfigError(field, "required for this command");
  return *p;
}

int cmd_distill(const StageArgs &args, bool dry_run) {
  molr::PipelineConfig cfg = load_config(args);
  cfg.prid.validate();
  molr::RawStore raw = molr::RawStore::load(require_path(cfg.raw_path, "paths.raw"));
  std::vector<molr::RawPair> pairs = molr::sample_subset(
      raw, cfg.prid.subset_size, molr::derive_seed(cfg.seed, "prid.subset"));

  if (dry_run) {
    for (const molr::RawPair &p: pairs) {
      nlohmann::ordered_json row;
      row["id"] = p.id;
      row["prompt"] = molr::build_distill_prompt(p, cfg.prid);
      std::cout << row.dump() << '\n';
    }
    spdlog::info("assembled {} prompts without calling a backend", pairs.size());
    return kOk;
  }

  fs::path out = args.out ? fs::path(*args.out)
                          : require_path(cfg.work_dir, "paths.work_dir")
                                / "R_0.jsonl";
  auto distiller = cfg.make_backend("distill", args.mock);
  auto judge = cfg.make_backend("judge", args.mock);
  spdlog::info("distilling {} pairs with {}", pairs.size(), distiller->id());
  molr::PridRun run =
      molr::run_prid_pairs(pairs, out, *distiller, *judge, cfg.prid);
  std::cout << run.summary.to_json() << '\n';
  spdlog::info("accepted {} of {} pairs into {}", run.summary.accepted,
               run.summary.requested, out.string());
  return kOk;
}

// resample ----------------------------------------------------------------

int cmd_resample(const StageArgs &args, const std::optional<std::string> &prior,
                 int iteration) {
  molr::PipelineConfig cfg = load_config(args);
  if (!args.out)
    throw InputError("--out is required");
  molr::RawStore raw = molr::RawStore::load(require_path(cfg.raw_path, "paths.raw"));
  std::vector<molr::TraceRecord> prior_records;
  if (prior)
    prior_records = molr::TraceStore::load(*prior).records();
  else if (cfg.r0_path)
    prior_records = molr::TraceStore::load(*cfg.r0_path).records();

  auto backend = cfg.make_backend("resample", args.mock);
  std::vector<molr::RawPair> pairs = raw.records();
  molr::ResampleStats stats;
  std::vector<molr::TraceRecord> next = molr::resample_iteration(
      pairs, *backend, cfg.resample, prior_records, iteration, &stats);

  std::string content;
  for (const molr::TraceRecord &r: next)
    content += molr::to_json_line(r) + "\n";
  molr::write_file_atomic(*args.out, content);

  nlohmann::ordered_json summary;
  summary["iteration"] = iteration + 1;
  summary["r_size"] = next.size();
  summary["new_matches"] = stats.new_matches;
  summary["retained"] = stats.retained;
  summary["replaced"] = stats.replaced;
  summary["unmatched"] = stats.unmatched;
  summary["backend_errors"] = stats.backend_errors;
  std::cout << summary.dump() << '\n';
  return kOk;
}

// moia --------------------------------------------------------------------

int cmd_moia(const StageArgs &args, const std::optional<std::string> &state_dir) {
  molr::PipelineConfig cfg = load_config(args);
  molr::RawStore raw = molr::RawStore::load(require_path(cfg.raw_path, "paths.raw"));
  std::vector<molr::RawPair> pairs = raw.records();
  std::vector<molr::TraceRecord> r0;
  if (cfg.r0_path)
    r0 = molr::TraceStore::load(*cfg.r0_path).records();

  molr::MoiaConfig moia = cfg.moia.moia;
  if (state_dir)
    moia.state_dir = fs::path(*state_dir);
  else if (cfg.work_dir)
    moia.state_dir = *cfg.work_dir;

  molr::MoiaHooks hooks;
  switch (cfg.moia.hooks) {
  case molr::HookKind::kScripted:
    hooks = molr::scripted_hooks(cfg.moia.em_schedule,
                                 cfg.make_backend("resample", args.mock));
    break;
  case molr::HookKind::kToy: {
    auto policy = std::make_shared<molr::ToyPolicy>(cfg.make_toy_policy());
    hooks = molr::toy_hooks(policy, cfg.moia.toy, pairs);
    break;
  }
  case molr::HookKind::kSubprocess: {
    molr::SubprocessHookConfig sub = cfg.moia.subprocess;
    sub.d_path = require_path(cfg.raw_path, "paths.raw");
    sub.state_dir = require_path(moia.state_dir, "paths.work_dir");
    hooks = molr::subprocess_hooks(sub, cfg.make_backend("resample", args.mock));
    break;
  }
  }

  std::vector<molr::IterationState> states =
      molr::run_moia(pairs, r0, hooks, moia);
  for (const molr::IterationState &s: states) {
    std::cout << s.to_json() << '\n';
    spdlog::info("t={} |R|={} of {} em={} status={}", s.t, s.r_size, s.d_size,
                 s.em ? *s.em : -1.0, molr::to_string(s.status));
  }
  return kOk;
}

// grpo-train --------------------------------------------------------------

int cmd_grpo_train(const StageArgs &args, std::optional<int> steps,
                   const std::optional<std::string> &log_path) {
  molr::PipelineConfig cfg = load_config(args);
  if (!cfg.toy)
    throw molr::ConfigError("toy", "grpo-train needs a toy section");
  if (cfg.toy->records.empty())
    throw molr::ConfigError("toy.records", "no training records");
  molr::ToyTrainConfig train = cfg.toy->train;
  if (steps)
    train.grpo_steps = *steps;

  molr::ToyPolicy policy = cfg.make_toy_policy();
  spdlog::info("training on {} records: {} SFT epochs, {} GRPO steps",
               cfg.toy->records.size(), train.sft_epochs, train.grpo_steps);
  molr::TrainingLog log = molr::train_toy(policy, cfg.toy->records, cfg.grpo,
                                          cfg.reward, train);
  std::string jsonl = log.to_jsonl();
  if (log_path)
    molr::write_file_atomic(*log_path, jsonl);
  std::cout << jsonl;
  if (!log.steps.empty()) {
    spdlog::info("step 0 em_rate {:.3f}, last step em_rate {:.3f}",
                 log.steps.front().em_rate, log.steps.back().em_rate);
  }
  spdlog::info("greedy EM after SFT {:.3f}, after GRPO {:.3f}", log.post_sft_em,
               log.final_em);
  return kOk;
}

// judge -------------------------------------------------------------------

int cmd_judge(const StageArgs &args, const std::string &input, bool macro,
              const std::optional<std::string> &details) {
  molr::PipelineConfig cfg = load_config(args);
  auto backend = cfg.make_backend("judge", args.mock);

  std::vector<molr::ConsistencyRecord> records;
  std::size_t unparseable = 0;
  std::string detail_lines;
  std::vector<std::string> lines = read_lines(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty())
      continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception &e) {
      throw molr::DatasetError(molr::DatasetErrorKind::kMalformedLine, e.what(),
                               i + 1);
    }
    std::string id = obj.value("id", std::string());
    std::string caption = obj.at("caption").get<std::string>();
    std::string smiles = obj.at("smiles").get<std::string>();
    std::string completion = obj.at("completion").get<std::string>();

    molr::ConsistencyRecord rec;
    rec.actual_correct = molr::exact_reward(completion, smiles) > 0.0;
    molr::CompletionSpan span = molr::parse_completion(completion);
    std::string trace = span.well_formed ? span.think : completion;
    std::string answer = span.well_formed ? std::string(molr::trim(span.answer))
                                          : std::string();
    try {
      molr::JudgeVerdict v =
          molr::judge_trace(*backend, trace, caption, cfg.judge_request, answer);
      rec.judge_prediction = v.prediction;
    } catch (const molr::GatewayError &e) {
      if (e.kind() != molr::GatewayErrorKind::kVerdictUnparseable)
        throw;
      spdlog::warn("line {}: judge verdict unparseable, record excluded", i + 1);
      ++unparseable;
      continue;
    }
    records.push_back(rec);
    nlohmann::ordered_json row;
    row["id"] = id;
    row["prediction"] = rec.judge_prediction;
    row["actual_correct"] = rec.actual_correct;
    detail_lines += row.dump() + "\n";
  }
  if (details)
    molr::write_file_atomic(*details, detail_lines);

  nlohmann::ordered_json summary;
  summary["consistent_f1"] = molr::consistent_f1(
      records, macro ? molr::ConsistencyF1::kMacro
                     : molr::ConsistencyF1::kJudgeClassifier);
  summary["mode"] = macro ? "macro" : "judge_classifier";
  summary["n_judged"] = records.size();
  summary["n_unparseable"] = unparseable;
  std::cout << summary.dump() << '\n';
  return kOk;
}

template <class F>
int guarded(F &&f) {
  try {
    return f();
  } catch (const molr::ConfigError &e) {
    spdlog::error("config error: {}", e.what());
    return kInputError;
  } catch (const molr::GatewayError &e) {
    spdlog::error("backend failure: {}", e.what());
    return kBackendError;
  } catch (const molr::DatasetError &e) {
    spdlog::error("{}", e.what());
    return e.kind() == molr::DatasetErrorKind::kValidationFailure
                   || e.kind() == molr::DatasetErrorKind::kDuplicateId
               ? kValidationError
               : kInputError;
  } catch (const molr::EmptyCorpusError &e) {
    spdlog::error("EmptyCorpus: no pairs to evaluate");
    return kInputError;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kInputError;
  }
}

void add_stage_options(CLI::App *cmd, StageArgs &args) {
  cmd->add_option("--config", args.config, "Pipeline config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--backend", [&args](const CLI::results_t &r) {
       args.mock = r.front() == "mock";
       return r.front() == "mock" || r.front() == "config";
     }, "Backend override: 'mock' uses each stage's scripted fixture, "
        "'config' (default) uses the configured backends")
      ->type_name("mock|config");
  cmd->add_option("--seed", args.seed,
                  "Top-level seed; overrides the config value");
}

}  // namespace

int main(int argc, char **argv) {
  auto logger = spdlog::stderr_color_st("molr");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{ "molr: molecule reasoning data pipeline and evaluation tools" };
  app.require_subcommand(1);
  app.set_version_flag("--version", "molr 0.1.0");

  // The SMILES arguments are taken verbatim from the unparsed remainder: a
  // vector option would read "[NH4+]" as a bracketed list and strip it.
  auto *canon = app.add_subcommand("canon", "Print canonical SMILES");
  canon->prefix_command();
  canon->usage("molr canon SMILES...");

  std::string validate_path;
  auto *validate = app.add_subcommand(
      "validate", "Check every SMILES of a .jsonl store or .smi list");
  validate->add_option("file", validate_path, "Input file")
      ->required()
      ->check(CLI::ExistingFile);

  EvalArgs eval_args;
  auto *eval = app.add_subcommand("eval", "Score predictions against references");
  eval->add_option("--pred", eval_args.pred,
                   "Predictions: one per line, or .jsonl with 'prediction' "
                   "and optional 'extracted_answer'")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--ref", eval_args.ref,
                   "References: one SMILES per line, or .jsonl with 'smiles'")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--report", eval_args.report, "Also write the report here");
  eval->add_flag("--exclude-invalid", eval_args.exclude_invalid,
                 "Leave invalid predictions out of the FTS means instead of "
                 "counting them as 0");
  eval->add_option("--bleu-max-n", eval_args.bleu_max_n, "Highest BLEU order")
      ->check(CLI::Range(1, 4));

  StageArgs distill_args;
  bool dry_run = false;
  auto *distill = app.add_subcommand(
      "distill", "Build the cold-start trace set from the expert example");
  add_stage_options(distill, distill_args);
  distill->add_flag("--dry-run", dry_run,
                    "Print the assembled prompts without calling a backend");
  distill->add_option("--out", distill_args.out, "Output trace store");

  StageArgs resample_args;
  std::optional<std::string> prior;
  int iteration = 0;
  auto *resample = app.add_subcommand(
      "resample", "One rejection re-sampling pass over the raw pairs");
  add_stage_options(resample, resample_args);
  resample->add_option("--prior", prior, "Prior trace store (default paths.r0)");
  resample->add_option("--iteration", iteration, "Index t of the prior set")
      ->check(CLI::NonNegativeNumber);
  resample->add_option("--out", resample_args.out, "Output trace store")
      ->required();

  StageArgs moia_args;
  std::optional<std::string> state_dir;
  auto *moia = app.add_subcommand("moia", "Run the iterative adaptation loop");
  add_stage_options(moia, moia_args);
  moia->add_option("--state-dir", state_dir,
                   "Persist and resume iteration state here");

  StageArgs grpo_args;
  std::optional<int> steps;
  std::optional<std::string> log_path;
  auto *grpo = app.add_subcommand("grpo-train",
                                  "Train the toy policy with SFT then GRPO");
  add_stage_options(grpo, grpo_args);
  grpo->add_option("--steps", steps, "Number of GRPO steps")
      ->check(CLI::NonNegativeNumber);
  grpo->add_option("--log", log_path, "Also write the training log here");

  StageArgs judge_args;
  std::string judge_input;
  bool macro = false;
  std::optional<std::string> details;
  auto *judge = app.add_subcommand(
      "judge", "Judge reasoning traces and report Consistent-F1");
  add_stage_options(judge, judge_args);
  judge->add_option("--input", judge_input,
                    ".jsonl with id, caption, smiles and completion")
      ->required()
      ->check(CLI::ExistingFile);
  judge->add_flag("--macro", macro,
                  "Macro F1 over the correct and incorrect classes");
  judge->add_option("--details", details, "Per-record verdicts (.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  if (*canon) {
    std::vector<std::string> inputs = canon->remaining();
    for (const std::string &arg: inputs) {
      if (arg.size() > 1 && arg[0] == '-') {
        spdlog::error("canon: unknown option {}", arg);
        return kInputError;
      }
    }
    if (inputs.empty()) {
      spdlog::error("canon: at least one SMILES is required");
      return kInputError;
    }
    return guarded([&] { return cmd_canon(inputs); });
  }
  if (*validate)
    return guarded([&] { return cmd_validate(validate_path); });
  if (*eval)
    return guarded([&] { return cmd_eval(eval_args); });
  if (*distill)
    return guarded([&] { return cmd_distill(distill_args, dry_run); });
  if (*resample)
    return guarded([&] { return cmd_resample(resample_args, prior, iteration); });
  if (*moia)
    return guarded([&] { return cmd_moia(moia_args, state_dir); });
  if (*grpo)
    return guarded([&] { return cmd_grpo_train(grpo_args, steps, log_path); });
  if (*judge)
    return guarded([&] { return cmd_judge(judge_args, judge_input, macro, details); });
  return kInputError;
}

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace molr {
namespace {

using json = nlohmann::json;

std::string read_text(const std::filesystem::path &path,
                      const std::string &field) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(field, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Object reader that remembers which keys were consumed, so that leftovers
// can be reported as unknown.
class Section {
public:
  Section(const json &obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object())
      throw ConfigError(path_.empty() ? "(root)" : path_,
                        "expected an object");
  }

  const std::string &path() const { return path_; }

  std::string field(const std::string &key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string &key) {
    used_.insert(key);
    return obj_.contains(key);
  }

  const json &at(const std::string &key) {
    used_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end())
      throw ConfigError(field(key), "required field is missing");
    return *it;
  }

  template <class T>
  T get(const std::string &key) {
    try {
      return at(key).get<T>();
    } catch (const json::exception &e) {
      throw ConfigError(field(key), std::string("wrong type: ") + e.what());
    }
  }

  template <class T>
  void read(const std::string &key, T &out) {
    if (has(key))
      out = get<T>(key);
  }

  Section sub(const std::string &key) { return Section(at(key), field(key)); }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (used_.count(it.key()) == 0)
        throw ConfigError(field(it.key()), "unknown field");
    }
  }

private:
  const json &obj_;
  std::string path_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path &base,
                              const std::string &p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void read_request(Section s, GenerationRequest &r) {
  s.read("system_prompt", r.system_prompt);
  s.read("temperature", r.temperature);
  s.read("top_p", r.top_p);
  s.read("max_tokens", r.max_tokens);
  if (s.has("seed"))
    r.seed = s.get<std::uint64_t>("seed");
  s.finish();
  try {
    r.validate();
  } catch (const GatewayError &e) {
    throw ConfigError(s.path(), e.what());
  }
}

BackendConfig read_backend(Section s, const std::filesystem::path &base) {
  BackendConfig b;
  std::string kind = s.get<std::string>("kind");
  if (kind == "mock")
    b.kind = BackendKind::kMock;
  else if (kind == "http")
    b.kind = BackendKind::kHttp;
  else if (kind == "toy")
    b.kind = BackendKind::kToy;
  else
    throw ConfigError(s.field("kind"), "expected mock, http or toy");
  if (s.has("mock_fixture"))
    b.mock_fixture = resolve(base, s.get<std::string>("mock_fixture"));
  s.read("base_url", b.http.base_url);
  s.read("model", b.http.model);
  s.read("api_key_env", b.http.api_key_env);
  if (s.has("timeout_ms"))
    b.http.timeout = std::chrono::milliseconds(s.get<long>("timeout_ms"));
  s.read("max_attempts", b.http.max_attempts);
  s.read("max_concurrency", b.http.max_concurrency);
  s.finish();
  if (b.kind == BackendKind::kMock && !b.mock_fixture)
    throw ConfigError(s.field("mock_fixture"),
                      "a mock backend needs a fixture");
  if (b.kind == BackendKind::kHttp && b.http.base_url.empty())
    throw ConfigError(s.field("base_url"), "an http backend needs a URL");
  return b;
}

RewardConfig read_reward(Section s) {
  RewardConfig r;
  if (s.has("preset")) {
    try {
      r = RewardConfig::preset(s.get<std::string>("preset"));
    } catch (const RewardConfigError &e) {
      throw ConfigError(s.field("preset"), e.what());
    }
  }
  s.read("w_exact", r.w_exact);
  s.read("w_similarity", r.w_similarity);
  s.read("w_format", r.w_format);
  s.read("w_length", r.w_length);
  s.read("length_threshold", r.length_threshold);
  if (s.has("similarity_kind")) {
    try {
      r.similarity_kind =
          fingerprint_kind_from_string(s.get<std::string>("similarity_kind"));
    } catch (const std::exception &e) {
      throw ConfigError(s.field("similarity_kind"), e.what());
    }
  }
  s.read("fallback_extraction", r.fallback_extraction);
  s.finish();
  try {
    r.validate();
  } catch (const RewardConfigError &e) {
    throw ConfigError(s.path(), e.what());
  }
  return r;
}

GrpoConfig read_grpo(Section s) {
  GrpoConfig g;
  s.read("group_size", g.group_size);
  s.read("clip_eps", g.clip_eps);
  s.read("kl_coef", g.kl_coef);
  s.read("learning_rate", g.learning_rate);
  s.read("std_epsilon", g.std_epsilon);
  s.finish();
  try {
    g.validate();
  } catch (const GrpoError &e) {
    throw ConfigError("grpo", e.what());
  }
  return g;
}

std::vector<TraceRecord> read_inline_records(const json &arr,
                                             const std::string &field) {
  if (!arr.is_array())
    throw ConfigError(field, "expected an array");
  std::vector<TraceRecord> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section r(arr[i], field + "[" + std::to_string(i) + "]");
    TraceRecord rec;
    rec.id = r.get<std::string>("id");
    rec.caption = r.get<std::string>("caption");
    rec.smiles = r.get<std::string>("smiles");
    r.read("trace", rec.trace);
    r.finish();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path &path) {
  PipelineConfig cfg = parse(read_text(path, "(config)"),
                             path.has_parent_path() ? path.parent_path()
                                                    : std::filesystem::path("."));
  cfg.source = path;
  return cfg;
}

PipelineConfig PipelineConfig::parse(std::string_view text,
                                     const std::filesystem::path &base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
  }
  Section root(doc, "");
  std::string schema = root.get<std::string>("schema");
  if (schema != kConfigSchema)
    throw ConfigError("schema", "expected \"" + std::string(kConfigSchema)
                                    + "\", got \"" + schema + "\"");

  PipelineConfig cfg;
  root.read("seed", cfg.seed);

  if (root.has("paths")) {
    Section p = root.sub("paths");
    if (p.has("raw"))
      cfg.raw_path = resolve(base, p.get<std::string>("raw"));
    if (p.has("r0"))
      cfg.r0_path = resolve(base, p.get<std::string>("r0"));
    if (p.has("work_dir"))
      cfg.work_dir = resolve(base, p.get<std::string>("work_dir"));
    p.finish();
  }

  if (root.has("backends")) {
    const json &b = root.at("backends");
    if (!b.is_object())
      throw ConfigError("backends", "expected an object");
    for (auto it = b.begin(); it != b.end(); ++it) {
      const std::string &stage = it.key();
      if (stage != "distill" && stage != "judge" && stage != "resample")
        throw ConfigError("backends." + stage, "unknown stage");
      cfg.backends[stage] = read_backend(Section(*it, "backends." + stage), base);
    }
  }

  cfg.resample.rollout_request.temperature = 1.0;
  cfg.prid.distill_request.temperature = 0.6;
  cfg.judge_request.temperature = 0.0;
  cfg.prid.score_request.temperature = 0.0;
  if (root.has("sampling")) {
    Section s = root.sub("sampling");
    if (s.has("distill"))
      read_request(s.sub("distill"), cfg.prid.distill_request);
    if (s.has("score"))
      read_request(s.sub("score"), cfg.prid.score_request);
    if (s.has("judge"))
      read_request(s.sub("judge"), cfg.judge_request);
    if (s.has("rollout"))
      read_request(s.sub("rollout"), cfg.resample.rollout_request);
    s.finish();
  }

  if (root.has("reward"))
    cfg.reward = read_reward(root.sub("reward"));
  if (root.has("grpo"))
    cfg.grpo = read_grpo(root.sub("grpo"));

  if (root.has("prid")) {
    Section p = root.sub("prid");
    if (p.has("expert_example_path")) {
      std::filesystem::path path =
          resolve(base, p.get<std::string>("expert_example_path"));
      cfg.prid.expert_example =
          read_text(path, p.field("expert_example_path"));
    }
    p.read("expert_example", cfg.prid.expert_example);
    p.read("subset_size", cfg.prid.subset_size);
    p.read("score_threshold", cfg.prid.score_threshold);
    p.read("max_retries", cfg.prid.max_retries);
    p.read("parallelism", cfg.prid.parallelism);
    p.read("score_with_reference", cfg.prid.score_with_reference);
    p.finish();
    try {
      cfg.prid.validate();
    } catch (const std::exception &e) {
      throw ConfigError("prid", e.what());
    }
  }

  if (root.has("resample")) {
    Section r = root.sub("resample");
    r.read("k_attempts", cfg.resample.k_attempts);
    r.read("parallelism", cfg.resample.parallelism);
    if (r.has("keep_rule")) {
      std::string rule = r.get<std::string>("keep_rule");
      if (rule == "retain_prior")
        cfg.resample.keep_rule = KeepRule::kRetainPrior;
      else if (rule == "replace_latest")
        cfg.resample.keep_rule = KeepRule::kReplaceLatest;
      else
        throw ConfigError(r.field("keep_rule"),
                          "expected retain_prior or replace_latest");
    }
    r.finish();
  }
  try {
    cfg.resample.validate();
  } catch (const std::exception &e) {
    throw ConfigError("resample", e.what());
  }
  cfg.moia.moia.resample = cfg.resample;

  if (root.has("toy")) {
    Section t = root.sub("toy");
    ToySection toy;
    toy.vocab = t.get<std::vector<std::string>>("vocab");
    t.read("n_rows", toy.n_rows);
    t.read("n_ctx", toy.n_ctx);
    t.read("temperature", toy.temperature);
    if (t.has("records"))
      toy.records = read_inline_records(t.at("records"), t.field("records"));
    t.read("sft_epochs", toy.train.sft_epochs);
    t.read("sft_learning_rate", toy.train.sft_learning_rate);
    t.read("steps", toy.train.grpo_steps);
    t.read("inner_updates", toy.train.inner_updates);
    t.read("max_completion_len", toy.train.max_completion_len);
    t.finish();
    toy.train.seed = derive_seed(cfg.seed, "toy.train");
    cfg.toy = std::move(toy);
  }

  if (root.has("moia")) {
    Section m = root.sub("moia");
    m.read("max_iters", cfg.moia.moia.max_iters);
    m.read("convergence_delta", cfg.moia.moia.convergence_delta);
    if (m.has("hooks")) {
      std::string kind = m.get<std::string>("hooks");
      if (kind == "scripted")
        cfg.moia.hooks = HookKind::kScripted;
      else if (kind == "toy")
        cfg.moia.hooks = HookKind::kToy;
      else if (kind == "subprocess")
        cfg.moia.hooks = HookKind::kSubprocess;
      else
        throw ConfigError(m.field("hooks"),
                          "expected scripted, toy or subprocess");
    }
    m.read("em_schedule", cfg.moia.em_schedule);
    m.read("sft_command", cfg.moia.subprocess.sft_command);
    m.read("rpo_command", cfg.moia.subprocess.rpo_command);
    m.read("eval_command", cfg.moia.subprocess.eval_command);
    m.read("toy_sft_epochs", cfg.moia.toy.sft_epochs);
    m.read("toy_sft_learning_rate", cfg.moia.toy.sft_learning_rate);
    m.read("toy_grpo_steps", cfg.moia.toy.grpo_steps);
    m.finish();
    if (cfg.moia.em_schedule.empty())
      throw ConfigError("moia.em_schedule", "must not be empty");
    try {
      cfg.moia.moia.validate();
    } catch (const std::exception &e) {
      throw ConfigError("moia", e.what());
    }
  }
  cfg.moia.toy.grpo = cfg.grpo;
  cfg.moia.toy.reward = cfg.reward;
  cfg.moia.toy.seed = derive_seed(cfg.seed, "moia.toy");
  if (cfg.toy)
    cfg.moia.toy.max_completion_len = cfg.toy->train.max_completion_len;

  root.finish();
  return cfg;
}

std::shared_ptr<Backend> PipelineConfig::make_backend(const std::string &stage,
                                                      bool force_mock) const {
  auto it = backends.find(stage);
  if (it == backends.end())
    throw ConfigError("backends." + stage, "no backend configured");
  const BackendConfig &b = it->second;
  if (force_mock || b.kind == BackendKind::kMock) {
    if (!b.mock_fixture)
      throw ConfigError("backends." + stage + ".mock_fixture",
                        "no mock fixture configured");
    try {
      return std::make_shared<MockBackend>(MockBackend::from_file(*b.mock_fixture));
    } catch (const std::exception &e) {
      throw ConfigError("backends." + stage + ".mock_fixture", e.what());
    }
  }
  if (b.kind == BackendKind::kHttp)
    return std::make_shared<HttpBackend>(b.http);
  auto policy = std::make_shared<const ToyPolicy>(make_toy_policy());
  return std::make_shared<ToyPolicyBackend>(
      policy, toy ? toy->train.max_completion_len : 32);
}

ToyPolicy PipelineConfig::make_toy_policy() const {
  if (!toy)
    throw ConfigError("toy", "no toy section in config");
  try {
    return ToyPolicy(ToyVocab(toy->vocab), toy->n_rows, toy->n_ctx,
                     toy->temperature);
  } catch (const std::invalid_argument &e) {
    throw ConfigError("toy", e.what());
  }
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_GATEWAY_H_
#define MOLR_GATEWAY_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molr/toy_policy.h"

namespace molr {

struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 10000;
  int n_samples = 1;
  std::optional<std::uint64_t> seed;

  // Throws GatewayError(kInvalidRequest).
  void validate() const;
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct GenerationResult {
  std::vector<std::string> completions;
  Usage usage;
  std::string backend_id;
};

enum class GatewayErrorKind {
  kBackendUnavailable,
  kRateLimited,
  kResponseMalformed,
  kTimeout,
  kVerdictUnparseable,
  kInvalidRequest,
};

std::string_view to_string(GatewayErrorKind kind);

class GatewayError: public std::runtime_error {
public:
  GatewayError(GatewayErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) { }
  GatewayErrorKind kind() const { return kind_; }

private:
  GatewayErrorKind kind_;
};

// Text-generation backend. Implementations are safe for concurrent calls.
class Backend {
public:
  virtual ~Backend() = default;
  virtual GenerationResult generate(const GenerationRequest &request) = 0;
  virtual std::string id() const = 0;
};

// Scripted backend. The first rule whose `match` occurs in the user prompt
// supplies the response list, otherwise the default list does; sample i of a
// request with seed s is responses[(s + i) % size]. A response of the form
// "!error:<kind>" raises the corresponding GatewayError instead, with kind
// one of unavailable, rate_limited, malformed, timeout.
class MockBackend: public Backend {
public:
  struct Rule {
    std::string match;
    std::vector<std::string> responses;
  };

  MockBackend(std::string backend_id, std::vector<Rule> rules,
              std::vector<std::string> fallback = {});

  // Fixture: {"backend_id": ..., "rules": [{"match", "responses"}],
  // "default": [...]}.
  static MockBackend from_json(std::string_view text);
  static MockBackend from_file(const std::filesystem::path &path);

  GenerationResult generate(const GenerationRequest &request) override;
  std::string id() const override { return backend_id_; }

private:
  std::string backend_id_;
  std::vector<Rule> rules_;
  std::vector<std::string> fallback_;
};

// Caps the number of holders across every backend sharing it.
class ConcurrencyLimiter {
public:
  explicit ConcurrencyLimiter(std::size_t limit);

  void acquire();
  void release();
  std::size_t limit() const { return limit_; }

  // Process-wide limiter used when an HTTP backend is not given its own.
  static std::shared_ptr<ConcurrencyLimiter> global(std::size_t limit = 8);

private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t in_use_ = 0;
};

struct HttpBackendConfig {
  // For example "https://api.example.com/v1"; requests go to
  // <base_url>/chat/completions.
  std::string base_url;
  std::string model;
  std::string api_key_env = "MOLR_API_KEY";
  std::chrono::milliseconds timeout{ 120000 };
  int max_attempts = 5;
  std::chrono::milliseconds backoff_initial{ 500 };
  std::chrono::milliseconds backoff_max{ 8000 };
  std::size_t max_concurrency = 8;
};

// Chat-completions client. Retries connection failures, timeouts, 429 and
// 5xx responses with capped exponential backoff; other errors surface at
// once. When fewer choices than requested come back, further requests are
// made for the remainder.
class HttpBackend: public Backend {
public:
  explicit HttpBackend(HttpBackendConfig config,
                       std::shared_ptr<ConcurrencyLimiter> limiter = nullptr);

  GenerationResult generate(const GenerationRequest &request) override;
  std::string id() const override { return "http:" + config_.model; }

  // Request body for the given request and sample count.
  std::string request_body(const GenerationRequest &request, int n) const;

private:
  GenerationResult post_once(const GenerationRequest &request, int n);

  HttpBackendConfig config_;
  std::string host_;
  std::string path_prefix_;
  std::shared_ptr<ConcurrencyLimiter> limiter_;
};

// Samples completions from a toy policy conditioned on the user prompt.
// Sample i uses an Rng seeded with seed + i; the request temperature is
// ignored in favor of the policy's own.
class ToyPolicyBackend: public Backend {
public:
  ToyPolicyBackend(std::shared_ptr<const ToyPolicy> policy,
                   std::size_t max_len);

  GenerationResult generate(const GenerationRequest &request) override;
  std::string id() const override { return "toy-policy"; }

private:
  std::shared_ptr<const ToyPolicy> policy_;
  std::size_t max_len_;
};

// Replaces every <answer>...</answer> block, and every occurrence of the
// answer text itself, with [REDACTED].
std::string redact_answer(std::string_view text, std::string_view answer);

struct JudgeVerdict {
  bool prediction = false;
  std::string raw;
};

// First standalone yes/no word, case-insensitive. Throws
// GatewayError(kVerdictUnparseable).
bool parse_verdict(std::string_view response);

// Builds the judge prompt from the redacted trace and caption and parses the
// verdict. The answer to hide is the trace's own answer block content when
// `answer` is empty.
JudgeVerdict judge_trace(Backend &backend, std::string_view trace,
                         std::string_view caption,
                         const GenerationRequest &request_template,
                         std::string_view answer = {});

}  // namespace molr

#endif  // MOLR_GATEWAY_H_

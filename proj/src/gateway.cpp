//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/gateway.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "molr/completion.h"
#include "molr/prompts.h"

namespace molr {
namespace {

std::size_t count_words(std::string_view text) {
  std::istringstream in{ std::string(text) };
  std::size_t n = 0;
  std::string w;
  while (in >> w)
    ++n;
  return n;
}

class LimiterGuard {
public:
  explicit LimiterGuard(ConcurrencyLimiter &limiter): limiter_(limiter) {
    limiter_.acquire();
  }
  ~LimiterGuard() { limiter_.release(); }
  LimiterGuard(const LimiterGuard &) = delete;
  LimiterGuard &operator=(const LimiterGuard &) = delete;

private:
  ConcurrencyLimiter &limiter_;
};

// Failure of one HTTP attempt, with whether a retry may help.
struct AttemptFailure {
  GatewayErrorKind kind;
  std::string message;
  bool retryable;
};

}  // namespace

std::string_view to_string(GatewayErrorKind kind) {
  switch (kind) {
  case GatewayErrorKind::kBackendUnavailable:
    return "BackendUnavailable";
  case GatewayErrorKind::kRateLimited:
    return "RateLimited";
  case GatewayErrorKind::kResponseMalformed:
    return "ResponseMalformed";
  case GatewayErrorKind::kTimeout:
    return "Timeout";
  case GatewayErrorKind::kVerdictUnparseable:
    return "VerdictUnparseable";
  case GatewayErrorKind::kInvalidRequest:
    return "InvalidRequest";
  }
  return "BackendUnavailable";
}

void GenerationRequest::validate() const {
  auto fail = [](const char *what) {
    throw GatewayError(GatewayErrorKind::kInvalidRequest, what);
  };
  if (!(temperature >= 0.0 && temperature <= 2.0))
    fail("temperature must lie in [0, 2]");
  if (!(top_p > 0.0 && top_p <= 1.0))
    fail("top_p must lie in (0, 1]");
  if (max_tokens < 1)
    fail("max_tokens must be at least 1");
  if (n_samples < 1)
    fail("n_samples must be at least 1");
}

MockBackend::MockBackend(std::string backend_id, std::vector<Rule> rules,
                         std::vector<std::string> fallback)
    : backend_id_(std::move(backend_id)), rules_(std::move(rules)),
      fallback_(std::move(fallback)) {
  for (const Rule &r: rules_) {
    if (r.responses.empty())
      throw std::invalid_argument("mock rule '" + r.match
                                  + "' has no responses");
  }
}

MockBackend MockBackend::from_json(std::string_view text) {
  nlohmann::json obj = nlohmann::json::parse(text);
  std::vector<Rule> rules;
  if (obj.contains("rules")) {
    for (const auto &r: obj.at("rules")) {
      rules.push_back({ r.at("match").get<std::string>(),
                        r.at("responses").get<std::vector<std::string>>() });
    }
  }
  std::vector<std::string> fallback;
  if (obj.contains("default"))
    fallback = obj.at("default").get<std::vector<std::string>>();
  return MockBackend(obj.value("backend_id", std::string("mock")),
                     std::move(rules), std::move(fallback));
}

MockBackend MockBackend::from_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open mock fixture " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

GenerationResult MockBackend::generate(const GenerationRequest &request) {
  request.validate();
  const std::vector<std::string> *responses = &fallback_;
  for (const Rule &r: rules_) {
    if (request.user_prompt.find(r.match) != std::string::npos) {
      responses = &r.responses;
      break;
    }
  }
  if (responses->empty())
    throw GatewayError(GatewayErrorKind::kBackendUnavailable,
                       "mock backend has no response for the prompt");

  GenerationResult result;
  result.backend_id = backend_id_;
  result.usage.prompt_tokens =
      count_words(request.system_prompt) + count_words(request.user_prompt);
  std::uint64_t seed = request.seed.value_or(0);
  for (int i = 0; i < request.n_samples; ++i) {
    const std::string &text =
        (*responses)[(seed + static_cast<std::uint64_t>(i))
                     % responses->size()];
    constexpr std::string_view kError = "!error:";
    if (text.rfind(kError, 0) == 0) {
      std::string_view kind = std::string_view(text).substr(kError.size());
      GatewayErrorKind k = GatewayErrorKind::kBackendUnavailable;
      if (kind == "rate_limited")
        k = GatewayErrorKind::kRateLimited;
      else if (kind == "malformed")
        k = GatewayErrorKind::kResponseMalformed;
      else if (kind == "timeout")
        k = GatewayErrorKind::kTimeout;
      throw GatewayError(k, "scripted failure");
    }
    result.usage.completion_tokens += count_words(text);
    result.completions.push_back(text);
  }
  return result;
}

ConcurrencyLimiter::ConcurrencyLimiter(std::size_t limit)
    : limit_(std::max<std::size_t>(limit, 1)) { }

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_use_ < limit_; });
  ++in_use_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --in_use_;
  }
  cv_.notify_one();
}

std::shared_ptr<ConcurrencyLimiter> ConcurrencyLimiter::global(
    std::size_t limit) {
  static std::shared_ptr<ConcurrencyLimiter> instance =
      std::make_shared<ConcurrencyLimiter>(limit);
  return instance;
}

HttpBackend::HttpBackend(HttpBackendConfig config,
                         std::shared_ptr<ConcurrencyLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  if (!limiter_)
    limiter_ = ConcurrencyLimiter::global(config_.max_concurrency);
  if (config_.max_attempts < 1)
    throw std::invalid_argument("max_attempts must be at least 1");

  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/')
    url.pop_back();
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw std::invalid_argument("base_url needs a scheme: " + url);
  std::size_t path = url.find('/', scheme + 3);
  host_ = url.substr(0, path);
  path_prefix_ = path == std::string::npos ? "" : url.substr(path);
}

std::string HttpBackend::request_body(const GenerationRequest &request,
                                      int n) const {
  nlohmann::ordered_json body;
  body["model"] = config_.model;
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  if (!request.system_prompt.empty())
    messages.push_back({ { "role", "system" },
                         { "content", request.system_prompt } });
  messages.push_back({ { "role", "user" }, { "content", request.user_prompt } });
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["top_p"] = request.top_p;
  body["max_tokens"] = request.max_tokens;
  body["n"] = n;
  if (request.seed)
    body["seed"] = *request.seed;
  return body.dump();
}

GenerationResult HttpBackend::post_once(const GenerationRequest &request,
                                        int n) {
  httplib::Client client(host_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (const char *key = std::getenv(config_.api_key_env.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  std::string body = request_body(request, n);
  auto response = client.Post(path_prefix_ + "/chat/completions", headers,
                              body, "application/json");
  if (!response) {
    httplib::Error err = response.error();
    bool timeout = err == httplib::Error::Read || err == httplib::Error::Write
                   || err == httplib::Error::ConnectionTimeout;
    throw AttemptFailure{ timeout ? GatewayErrorKind::kTimeout
                                  : GatewayErrorKind::kBackendUnavailable,
                          httplib::to_string(err), true };
  }
  int status = response->status;
  if (status == 429)
    throw AttemptFailure{ GatewayErrorKind::kRateLimited, "HTTP 429", true };
  if (status >= 500)
    throw AttemptFailure{ GatewayErrorKind::kBackendUnavailable,
                          "HTTP " + std::to_string(status), true };
  if (status != 200)
    throw AttemptFailure{ GatewayErrorKind::kBackendUnavailable,
                          "HTTP " + std::to_string(status), false };

  GenerationResult result;
  result.backend_id = id();
  try {
    nlohmann::json obj = nlohmann::json::parse(response->body);
    for (const auto &choice: obj.at("choices"))
      result.completions.push_back(
          choice.at("message").at("content").get<std::string>());
    if (obj.contains("usage")) {
      const auto &usage = obj.at("usage");
      result.usage.prompt_tokens = usage.value("prompt_tokens", 0);
      result.usage.completion_tokens = usage.value("completion_tokens", 0);
    }
  } catch (const nlohmann::json::exception &e) {
    throw AttemptFailure{ GatewayErrorKind::kResponseMalformed, e.what(),
                          false };
  }
  return result;
}

GenerationResult HttpBackend::generate(const GenerationRequest &request) {
  request.validate();
  GenerationResult total;
  total.backend_id = id();
  while (static_cast<int>(total.completions.size()) < request.n_samples) {
    int want = request.n_samples - static_cast<int>(total.completions.size());
    GenerationRequest part = request;
    if (part.seed && !total.completions.empty())
      part.seed = *part.seed + total.completions.size();

    std::optional<GenerationResult> got;
    auto delay = config_.backoff_initial;
    for (int attempt = 1; !got; ++attempt) {
      try {
        LimiterGuard guard(*limiter_);
        got = post_once(part, want);
      } catch (const AttemptFailure &f) {
        if (!f.retryable || attempt >= config_.max_attempts)
          throw GatewayError(f.kind, f.message + " after "
                                         + std::to_string(attempt)
                                         + " attempt(s)");
        std::this_thread::sleep_for(delay);
        delay = std::min(delay * 2, config_.backoff_max);
      }
    }
    if (got->completions.empty())
      throw GatewayError(GatewayErrorKind::kResponseMalformed,
                         "response has no choices");
    for (std::string &c: got->completions) {
      if (static_cast<int>(total.completions.size()) < request.n_samples)
        total.completions.push_back(std::move(c));
    }
    total.usage.prompt_tokens += got->usage.prompt_tokens;
    total.usage.completion_tokens += got->usage.completion_tokens;
  }
  return total;
}

ToyPolicyBackend::ToyPolicyBackend(std::shared_ptr<const ToyPolicy> policy,
                                   std::size_t max_len)
    : policy_(std::move(policy)), max_len_(max_len) { }

GenerationResult ToyPolicyBackend::generate(const GenerationRequest &request) {
  request.validate();
  GenerationResult result;
  result.backend_id = id();
  std::size_t max_len =
      std::min(max_len_, static_cast<std::size_t>(request.max_tokens));
  std::uint64_t seed = request.seed.value_or(0);
  for (int i = 0; i < request.n_samples; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    std::vector<int> tokens = policy_->sample(request.user_prompt, rng, max_len);
    result.usage.completion_tokens += tokens.size();
    result.completions.push_back(policy_->vocab().decode_completion(tokens));
  }
  return result;
}

std::string redact_answer(std::string_view text, std::string_view answer) {
  constexpr std::string_view kMark = "[REDACTED]";
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find(kAnswerOpen, pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    out.append(kMark);
    std::size_t close = text.find(kAnswerClose, open + kAnswerOpen.size());
    pos = close == std::string_view::npos ? text.size()
                                          : close + kAnswerClose.size();
  }
  // Stray closing tags carry no answer but are removed for tidiness.
  for (std::size_t p = out.find(kAnswerClose); p != std::string::npos;
       p = out.find(kAnswerClose, p)) {
    out.replace(p, kAnswerClose.size(), kMark);
  }

  std::string_view needle = trim(answer);
  if (!needle.empty()) {
    for (std::size_t p = out.find(needle); p != std::string::npos;
         p = out.find(needle, p + kMark.size())) {
      out.replace(p, needle.size(), kMark);
    }
  }
  return out;
}

bool parse_verdict(std::string_view response) {
  std::size_t i = 0;
  while (i < response.size()) {
    while (i < response.size()
           && !std::isalnum(static_cast<unsigned char>(response[i])))
      ++i;
    std::size_t start = i;
    while (i < response.size()
           && std::isalnum(static_cast<unsigned char>(response[i])))
      ++i;
    std::string word(response.substr(start, i - start));
    for (char &c: word)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (word == "yes")
      return true;
    if (word == "no")
      return false;
  }
  throw GatewayError(GatewayErrorKind::kVerdictUnparseable,
                     "no yes/no verdict in judge response");
}

JudgeVerdict judge_trace(Backend &backend, std::string_view trace,
                         std::string_view caption,
                         const GenerationRequest &request_template,
                         std::string_view answer) {
  if (trim(trace).empty())
    throw GatewayError(GatewayErrorKind::kInvalidRequest, "empty trace");

  std::string hidden(answer);
  if (hidden.empty()) {
    std::size_t open = trace.find(kAnswerOpen);
    if (open != std::string_view::npos) {
      std::size_t begin = open + kAnswerOpen.size();
      std::size_t close = trace.find(kAnswerClose, begin);
      if (close != std::string_view::npos)
        hidden = std::string(trace.substr(begin, close - begin));
    }
  }

  GenerationRequest request = request_template;
  request.n_samples = 1;
  request.user_prompt = render_template(
      judge_prompt_template(), { { "caption", redact_answer(caption, hidden) },
                                 { "trace", redact_answer(trace, hidden) } });
  GenerationResult result = backend.generate(request);
  if (result.completions.empty())
    throw GatewayError(GatewayErrorKind::kResponseMalformed,
                       "judge returned no completion");
  JudgeVerdict verdict;
  verdict.raw = result.completions.front();
  verdict.prediction = parse_verdict(verdict.raw);
  return verdict;
}

}  // namespace molr

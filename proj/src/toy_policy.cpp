//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/toy_policy.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "molr/completion.h"
#include "molr/hash.h"

namespace molr {

ToyVocab::ToyVocab(std::vector<std::string> symbols) {
  symbols_ = { std::string(kBosSymbol), std::string(kEosSymbol),
               std::string(kSepSymbol) };
  for (std::string &s: symbols)
    symbols_.push_back(std::move(s));
  if (symbols_.size() > kMaxVocab)
    throw std::invalid_argument("vocabulary exceeds 64 symbols");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const std::string &s = symbols_[i];
    if (s.empty())
      throw std::invalid_argument("empty vocabulary symbol");
    if (!index_.emplace(s, static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate vocabulary symbol '" + s + "'");
    if (i >= 3)
      max_symbol_len_ = std::max(max_symbol_len_, s.size());
  }
}

std::optional<int> ToyVocab::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

std::vector<std::string> ToyVocab::user_symbols() const {
  return { symbols_.begin() + 3, symbols_.end() };
}

std::vector<int> ToyVocab::tokenize_smiles(std::string_view smiles) const {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < smiles.size()) {
    std::size_t len = std::min(max_symbol_len_, smiles.size() - pos);
    std::optional<int> id;
    for (; len > 0; --len) {
      id = find(smiles.substr(pos, len));
      if (id && *id >= 3)
        break;
      id.reset();
    }
    if (!id)
      throw TokenOutOfVocabError("no vocabulary symbol at offset "
                                 + std::to_string(pos) + " of '"
                                 + std::string(smiles) + "'");
    out.push_back(*id);
    pos += len;
  }
  return out;
}

std::vector<int> ToyVocab::tokenize_words(std::string_view text) const {
  std::vector<int> out;
  std::istringstream in{ std::string(text) };
  std::string word;
  while (in >> word) {
    auto id = find(word);
    if (!id || *id < 3)
      throw TokenOutOfVocabError("word '" + word + "' is not in the vocabulary");
    out.push_back(*id);
  }
  return out;
}

std::vector<int> ToyVocab::encode_target(std::string_view trace,
                                         std::string_view smiles) const {
  std::vector<int> out = tokenize_words(trace);
  if (!out.empty())
    out.push_back(sep());
  for (int id: tokenize_smiles(smiles))
    out.push_back(id);
  out.push_back(eos());
  return out;
}

std::string ToyVocab::decode_completion(std::span<const int> tokens) const {
  auto end = std::find(tokens.begin(), tokens.end(), eos());
  auto sep_it = std::find(tokens.begin(), end, sep());
  std::string think;
  std::string answer;
  auto answer_begin = tokens.begin();
  if (sep_it != end) {
    for (auto it = tokens.begin(); it != sep_it; ++it) {
      if (*it == bos())
        continue;
      if (!think.empty())
        think += ' ';
      think += symbols_.at(*it);
    }
    answer_begin = sep_it + 1;
  }
  for (auto it = answer_begin; it != end; ++it) {
    if (*it >= 3)
      answer += symbols_.at(*it);
  }
  return render_completion(think, answer);
}

ToyPolicy::ToyPolicy(ToyVocab vocab, std::size_t n_rows, int n_ctx,
                     double temperature)
    : vocab_(std::move(vocab)), n_rows_(n_rows), n_ctx_(n_ctx),
      temperature_(temperature) {
  if (n_rows_ == 0)
    throw std::invalid_argument("toy policy needs at least one row");
  if (n_ctx_ < 0 || n_ctx_ > 4)
    throw std::invalid_argument("n_ctx must be in 0..4");
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_))
    throw std::invalid_argument("temperature must be positive");
  params_.assign(n_rows_ * vocab_.size(), 0.0);
}

std::size_t ToyPolicy::row_index(std::uint64_t prompt_hash,
                                 std::span<const int> prefix) const {
  std::uint64_t words[6] = { prompt_hash, prefix.size(), 0, 0, 0, 0 };
  for (int k = 0; k < n_ctx_; ++k) {
    std::ptrdiff_t at = static_cast<std::ptrdiff_t>(prefix.size()) - 1 - k;
    words[2 + k] = static_cast<std::uint64_t>(
        at >= 0 ? prefix[static_cast<std::size_t>(at)] : vocab_.bos());
  }
  return hash_words(std::span<const std::uint64_t>(words, 2 + n_ctx_))
         % n_rows_;
}

void ToyPolicy::softmax_row(std::size_t row, std::vector<double> &out) const {
  std::size_t v = vocab_.size();
  const double *logits = params_.data() + row * v;
  out.resize(v);
  double max = logits[0];
  for (std::size_t i = 1; i < v; ++i)
    max = std::max(max, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    out[i] = std::exp((logits[i] - max) / temperature_);
    sum += out[i];
  }
  for (double &p: out)
    p /= sum;
}

std::vector<double> ToyPolicy::probabilities(std::string_view prompt,
                                             std::span<const int> prefix) const {
  std::vector<double> p;
  softmax_row(row_index(hash_string(prompt), prefix), p);
  return p;
}

double ToyPolicy::log_prob(std::string_view prompt,
                           std::span<const int> completion) const {
  std::uint64_t h = hash_string(prompt);
  std::size_t v = vocab_.size();
  double total = 0.0;
  for (std::size_t t = 0; t < completion.size(); ++t) {
    std::size_t row = row_index(h, completion.first(t));
    const double *logits = params_.data() + row * v;
    double max = logits[0];
    for (std::size_t i = 1; i < v; ++i)
      max = std::max(max, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < v; ++i)
      sum += std::exp((logits[i] - max) / temperature_);
    total += (logits[completion[t]] - max) / temperature_ - std::log(sum);
  }
  return total;
}

void ToyPolicy::add_log_prob_grad(std::string_view prompt,
                                  std::span<const int> completion,
                                  double scale, std::span<double> grad) const {
  std::uint64_t h = hash_string(prompt);
  std::size_t v = vocab_.size();
  std::vector<double> p;
  for (std::size_t t = 0; t < completion.size(); ++t) {
    std::size_t row = row_index(h, completion.first(t));
    softmax_row(row, p);
    double *g = grad.data() + row * v;
    for (std::size_t i = 0; i < v; ++i)
      g[i] -= scale * p[i] / temperature_;
    g[completion[t]] += scale / temperature_;
  }
}

std::vector<int> ToyPolicy::sample(std::string_view prompt, Rng &rng,
                                   std::size_t max_len) const {
  std::uint64_t h = hash_string(prompt);
  std::vector<int> out;
  std::vector<double> p;
  while (out.size() < max_len) {
    softmax_row(row_index(h, out), p);
    double u = rng.uniform01();
    int pick = static_cast<int>(p.size()) - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) {
        pick = static_cast<int>(i);
        break;
      }
    }
    out.push_back(pick);
    if (pick == vocab_.eos())
      break;
  }
  return out;
}

std::vector<int> ToyPolicy::greedy(std::string_view prompt,
                                   std::size_t max_len) const {
  std::uint64_t h = hash_string(prompt);
  std::size_t v = vocab_.size();
  std::vector<int> out;
  while (out.size() < max_len) {
    const double *logits = params_.data() + row_index(h, out) * v;
    int pick = static_cast<int>(std::max_element(logits, logits + v) - logits);
    out.push_back(pick);
    if (pick == vocab_.eos())
      break;
  }
  return out;
}

std::string ToyPolicy::to_json() const {
  nlohmann::ordered_json obj;
  obj["vocab"] = vocab_.user_symbols();
  obj["n_rows"] = n_rows_;
  obj["n_ctx"] = n_ctx_;
  obj["temperature"] = temperature_;
  obj["params"] = params_;
  return obj.dump();
}

ToyPolicy ToyPolicy::from_json(std::string_view text) {
  nlohmann::json obj = nlohmann::json::parse(text);
  ToyPolicy policy(ToyVocab(obj.at("vocab").get<std::vector<std::string>>()),
                   obj.at("n_rows").get<std::size_t>(),
                   obj.at("n_ctx").get<int>(),
                   obj.at("temperature").get<double>());
  auto params = obj.at("params").get<std::vector<double>>();
  if (params.size() != policy.params_.size())
    throw std::invalid_argument("parameter count does not match shape");
  policy.params_ = std::move(params);
  return policy;
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_TOY_POLICY_H_
#define MOLR_TOY_POLICY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "molr/random.h"

namespace molr {

class TokenOutOfVocabError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::string_view kBosSymbol = "<bos>";
inline constexpr std::string_view kEosSymbol = "<eos>";
inline constexpr std::string_view kSepSymbol = "<sep>";
inline constexpr std::size_t kMaxVocab = 64;

// Ordered symbol list. Ids 0, 1 and 2 are always <bos>, <eos> and <sep>; the
// user symbols follow in the given order.
class ToyVocab {
public:
  // Throws std::invalid_argument on duplicates, empty symbols, or more than
  // kMaxVocab symbols in total.
  explicit ToyVocab(std::vector<std::string> symbols);

  std::size_t size() const { return symbols_.size(); }
  int bos() const { return 0; }
  int eos() const { return 1; }
  int sep() const { return 2; }
  const std::string &symbol(int id) const { return symbols_.at(id); }
  std::optional<int> find(std::string_view symbol) const;
  // User symbols only, in order.
  std::vector<std::string> user_symbols() const;

  // Greedy longest-match split of SMILES text into symbols.
  std::vector<int> tokenize_smiles(std::string_view smiles) const;
  // Whitespace-separated words, each of which must be a symbol.
  std::vector<int> tokenize_words(std::string_view text) const;

  // Trace words, then <sep> when the trace is non-empty, then the SMILES
  // symbols and <eos>.
  std::vector<int> encode_target(std::string_view trace,
                                 std::string_view smiles) const;
  // Renders completion tokens (up to the first <eos>) as
  // <think>words</think><answer>smiles</answer>. Without a <sep> the think
  // block is empty and every token belongs to the answer.
  std::string decode_completion(std::span<const int> tokens) const;

private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  std::size_t max_symbol_len_ = 0;
};

// Autoregressive policy whose next-token logits come from a dense table. The
// row used at each step is a hash of the prompt, the last n_ctx generated
// tokens (padded with <bos>) and the position, folded modulo the row count.
class ToyPolicy {
public:
  ToyPolicy(ToyVocab vocab, std::size_t n_rows, int n_ctx = 3,
            double temperature = 1.0);

  const ToyVocab &vocab() const { return vocab_; }
  std::size_t n_rows() const { return n_rows_; }
  int n_ctx() const { return n_ctx_; }
  double temperature() const { return temperature_; }

  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::size_t row_index(std::uint64_t prompt_hash,
                        std::span<const int> prefix) const;
  // softmax(logits / temperature) at the state after `prefix`.
  std::vector<double> probabilities(std::string_view prompt,
                                    std::span<const int> prefix) const;

  // Summed log-probability of the completion tokens.
  double log_prob(std::string_view prompt,
                  std::span<const int> completion) const;
  // grad += scale * d log_prob / d params.
  void add_log_prob_grad(std::string_view prompt,
                         std::span<const int> completion, double scale,
                         std::span<double> grad) const;

  // Samples until <eos> (included) or max_len tokens.
  std::vector<int> sample(std::string_view prompt, Rng &rng,
                          std::size_t max_len) const;
  // Argmax decoding, lowest id on ties.
  std::vector<int> greedy(std::string_view prompt, std::size_t max_len) const;

  // Full state including parameters, for exact resume.
  std::string to_json() const;
  static ToyPolicy from_json(std::string_view text);

private:
  void softmax_row(std::size_t row, std::vector<double> &out) const;

  ToyVocab vocab_;
  std::size_t n_rows_;
  int n_ctx_;
  double temperature_;
  std::vector<double> params_;
};

}  // namespace molr

#endif  // MOLR_TOY_POLICY_H_

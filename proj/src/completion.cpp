//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/completion.h"

#include <array>
#include <string>
#include <vector>

#include "molr/canonical.h"

namespace molr {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'
         || c == '\v';
}

bool all_space(std::string_view s) {
  for (char c: s) {
    if (!is_space(c))
      return false;
  }
  return true;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return s;
}

CompletionSpan parse_completion(std::string_view text) {
  CompletionSpan span;
  for (std::string_view tag: { kThinkOpen, kThinkClose, kAnswerOpen,
                               kAnswerClose }) {
    if (count_occurrences(text, tag) != 1)
      return span;
  }

  std::size_t t_open = text.find(kThinkOpen);
  std::size_t t_close = text.find(kThinkClose);
  std::size_t a_open = text.find(kAnswerOpen);
  std::size_t a_close = text.find(kAnswerClose);
  if (!(t_open < t_close && t_close < a_open && a_open < a_close))
    return span;

  std::size_t think_begin = t_open + kThinkOpen.size();
  std::size_t answer_begin = a_open + kAnswerOpen.size();
  std::size_t after_think = t_close + kThinkClose.size();
  std::size_t after_answer = a_close + kAnswerClose.size();
  if (!all_space(text.substr(0, t_open))
      || !all_space(text.substr(after_think, a_open - after_think))
      || !all_space(text.substr(after_answer))) {
    return span;
  }

  span.think = std::string(text.substr(think_begin, t_close - think_begin));
  span.answer = std::string(text.substr(answer_begin, a_close - answer_begin));
  span.well_formed = true;
  return span;
}

std::optional<std::string> find_think_span(std::string_view text) {
  std::size_t open = text.find(kThinkOpen);
  if (open == std::string_view::npos)
    return std::nullopt;
  std::size_t begin = open + kThinkOpen.size();
  std::size_t close = text.find(kThinkClose, begin);
  if (close == std::string_view::npos)
    return std::nullopt;
  return std::string(text.substr(begin, close - begin));
}

std::optional<std::string> last_smiles_token(std::string_view text) {
  std::string cleaned(text);
  for (std::string_view tag: { kThinkOpen, kThinkClose, kAnswerOpen,
                               kAnswerClose }) {
    for (std::size_t pos = cleaned.find(tag); pos != std::string::npos;
         pos = cleaned.find(tag, pos)) {
      cleaned.replace(pos, tag.size(), " ");
    }
  }

  std::vector<std::string_view> tokens;
  std::string_view rest = cleaned;
  while (!rest.empty()) {
    std::size_t b = 0;
    while (b < rest.size() && is_space(rest[b]))
      ++b;
    std::size_t e = b;
    while (e < rest.size() && !is_space(rest[e]))
      ++e;
    if (e > b)
      tokens.push_back(rest.substr(b, e - b));
    rest.remove_prefix(e);
  }
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (is_valid_smiles(*it))
      return std::string(*it);
  }
  return std::nullopt;
}

std::string render_completion(std::string_view think, std::string_view answer) {
  std::string out;
  out.reserve(think.size() + answer.size() + 34);
  out += kThinkOpen;
  out += think;
  out += kThinkClose;
  out += kAnswerOpen;
  out += answer;
  out += kAnswerClose;
  return out;
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_COMPLETION_H_
#define MOLR_COMPLETION_H_

#include <optional>
#include <string>
#include <string_view>

namespace molr {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

struct CompletionSpan {
  std::string think;
  std::string answer;
  bool well_formed = false;
};

// Well-formed means: optional whitespace, exactly one <think>...</think>,
// optional whitespace, exactly one <answer>...</answer>, optional whitespace,
// and no tag of either kind anywhere else. Spans are returned verbatim; both
// are empty when the text is not well-formed.
CompletionSpan parse_completion(std::string_view text);

// Content of the first <think>...</think> pair, regardless of the rest of the
// text.
std::optional<std::string> find_think_span(std::string_view text);

// Last whitespace-separated token of the text (tags stripped) that parses and
// validates as SMILES.
std::optional<std::string> last_smiles_token(std::string_view text);

// Removes leading and trailing ASCII whitespace.
std::string_view trim(std::string_view s);

std::string render_completion(std::string_view think, std::string_view answer);

}  // namespace molr

#endif  // MOLR_COMPLETION_H_

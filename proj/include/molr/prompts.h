//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_PROMPTS_H_
#define MOLR_PROMPTS_H_

#include <map>
#include <string>
#include <string_view>

namespace molr {

// Template texts from the prompts/ directory, compiled into the library.
std::string_view system_prompt_template();
std::string_view distill_prompt_template();
std::string_view score_prompt_template();
std::string_view judge_prompt_template();
std::string_view policy_prompt_template();

// Replaces each {name} with its value in a single left-to-right pass, so
// values are inserted verbatim even when they contain braces. Throws
// std::invalid_argument for a placeholder without a value.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string> &values);

// Prompt for the policy: only the caption, never the answer.
std::string render_policy_prompt(std::string_view caption);

}  // namespace molr

#endif  // MOLR_PROMPTS_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/prompts.h"

#include <stdexcept>

#include "molr/prompt_data.h"

namespace molr {

std::string_view system_prompt_template() { return prompt_data::k_system; }
std::string_view distill_prompt_template() { return prompt_data::k_distill; }
std::string_view score_prompt_template() { return prompt_data::k_score; }
std::string_view judge_prompt_template() { return prompt_data::k_judge; }
std::string_view policy_prompt_template() { return prompt_data::k_policy; }

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string> &values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    std::size_t close = tmpl.find('}', open + 1);
    std::string_view name = close == std::string_view::npos
                                ? std::string_view()
                                : tmpl.substr(open + 1, close - open - 1);
    bool is_name = !name.empty();
    for (char c: name) {
      if (!(c == '_' || (c >= 'a' && c <= 'z')))
        is_name = false;
    }
    out.append(tmpl.substr(pos, open - pos));
    if (!is_name) {
      out += '{';
      pos = open + 1;
      continue;
    }
    auto it = values.find(std::string(name));
    if (it == values.end())
      throw std::invalid_argument("no value for placeholder {"
                                  + std::string(name) + "}");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

std::string render_policy_prompt(std::string_view caption) {
  return render_template(policy_prompt_template(),
                         { { "caption", std::string(caption) } });
}

}  // namespace molr

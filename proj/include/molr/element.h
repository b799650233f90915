//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_ELEMENT_H_
#define MOLR_ELEMENT_H_

#include <span>
#include <string_view>

namespace molr {

struct Element {
  int atomic_number;
  std::string_view symbol;
  // Normal valences in ascending order. Empty for elements without a
  // valence model; those atoms are never rejected by the valence check.
  std::span<const int> valences;
  bool aromatic_capable;
  bool organic_subset;
};

// Returns nullptr when the symbol is not a known element. Symbols are
// case-sensitive ("Cl", not "CL").
const Element *find_element(std::string_view symbol);

// Valid for 1 <= atomic_number <= 118.
const Element &element_of(int atomic_number);

int max_valence(const Element &elem);

}  // namespace molr

#endif  // MOLR_ELEMENT_H_

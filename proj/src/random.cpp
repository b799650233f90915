//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/random.h"

#include "molr/hash.h"

namespace molr {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  return mix64(seed ^ hash_string(name, 0));
}

}  // namespace molr

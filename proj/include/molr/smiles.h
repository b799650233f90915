//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_SMILES_H_
#define MOLR_SMILES_H_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "molr/molecule.h"

namespace molr {

enum class SmilesErrorKind {
  kEmptyInput,
  kUnbalancedParenthesis,
  kUnmatchedRingClosure,
  kUnknownElement,
  kMalformedBracketAtom,
  kUnexpectedCharacter,
  kInvalidBond,
};

std::string_view to_string(SmilesErrorKind kind);

class SmilesError: public std::runtime_error {
public:
  SmilesError(SmilesErrorKind kind, std::size_t offset, const std::string &msg);

  SmilesErrorKind kind() const { return kind_; }
  // Byte offset into the input where the fault was detected.
  std::size_t offset() const { return offset_; }

private:
  SmilesErrorKind kind_;
  std::size_t offset_;
};

// Parses a single SMILES string. Stereo marks (@, /, \) are accepted and
// discarded; MoleculeGraph::stereo_dropped() reports whether any were seen.
MoleculeGraph parse_smiles(std::string_view text);

// Writes mol as SMILES, visiting atoms in ascending `priority` order: the
// lowest-priority unvisited atom roots each component, and neighbors are
// explored in priority order. `priority` must hold one distinct value per
// atom.
std::string write_smiles(const MoleculeGraph &mol,
                         std::span<const int> priority);

}  // namespace molr

#endif  // MOLR_SMILES_H_

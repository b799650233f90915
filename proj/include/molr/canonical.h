//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_CANONICAL_H_
#define MOLR_CANONICAL_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molr/molecule.h"

namespace molr {

class ValenceError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Iterative Morgan-style refinement of atom invariants (element, isotope,
// charge, aromaticity, hydrogen count, degree), extended by neighbor ranks and
// bond orders until the partition is stable. Equal ranks mean the atoms could
// not be distinguished.
std::vector<int> refined_ranks(const MoleculeGraph &mol);

// Deterministic SMILES for the labeled graph. Ties left after refinement are
// broken by individualizing each candidate of the first tied class and keeping
// the lexicographically smallest output; candidates that are twins of an
// already explored atom are skipped since swapping them is an automorphism.
// Throws ValenceError when check_valence fails.
std::string canonicalize(const MoleculeGraph &mol);

// parse + validate + canonicalize. Throws SmilesError or ValenceError.
std::string canonical_smiles(std::string_view smiles);

// True iff both strings parse, pass the valence check and canonicalize to the
// same string. Never throws.
bool smiles_equal(std::string_view a, std::string_view b);

// Parses and validates; returns false instead of throwing.
bool is_valid_smiles(std::string_view smiles);

// Parsed graph when the string parses and passes the valence check.
std::optional<MoleculeGraph> parse_valid(std::string_view smiles);

}  // namespace molr

#endif  // MOLR_CANONICAL_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <set>
#include <string>

#include <gtest/gtest.h>

#include "molr/canonical.h"
#include "molr/molecule.h"
#include "molr/random.h"
#include "molr/smiles.h"
#include "support/test_support.h"

namespace molr {
namespace {

using testing::fixture_molecules;
using testing::isomorphic;
using testing::random_rendering;

SmilesErrorKind parse_error_kind(std::string_view text) {
  try {
    parse_smiles(text);
  } catch (const SmilesError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a parse error for " << text;
  return SmilesErrorKind::kEmptyInput;
}

TEST(SmilesParser, BuildsAtomsAndBonds) {
  MoleculeGraph m = parse_smiles("CC(=O)O");
  ASSERT_EQ(m.num_atoms(), 4);
  ASSERT_EQ(m.num_bonds(), 3);
  EXPECT_EQ(m.bond(m.find_bond(1, 2)).order, BondOrder::kDouble);
  EXPECT_EQ(m.hydrogen_count(0), 3);
  EXPECT_EQ(m.hydrogen_count(1), 0);
  EXPECT_EQ(m.hydrogen_count(3), 1);
}

TEST(SmilesParser, RingClosuresAndAromaticity) {
  MoleculeGraph m = parse_smiles("c1ccccc1");
  EXPECT_EQ(m.num_atoms(), 6);
  EXPECT_EQ(m.num_bonds(), 6);
  for (const Atom &a: m.atoms())
    EXPECT_TRUE(a.aromatic);
  for (const Bond &b: m.bonds())
    EXPECT_EQ(b.order, BondOrder::kAromatic);
  for (int i = 0; i < 6; ++i)
    EXPECT_EQ(m.hydrogen_count(i), 1);
}

TEST(SmilesParser, BracketAtoms) {
  MoleculeGraph m = parse_smiles("[13CH3][NH3+]");
  EXPECT_EQ(m.atom(0).isotope, 13);
  EXPECT_EQ(m.atom(0).explicit_h, 3);
  EXPECT_EQ(m.atom(1).charge, 1);
  EXPECT_EQ(m.hydrogen_count(1), 3);
  EXPECT_EQ(parse_smiles("[O-2]").atom(0).charge, -2);
  EXPECT_EQ(parse_smiles("[Fe+++]").atom(0).charge, 3);
}

TEST(SmilesParser, StereoMarksAreDroppedButReported) {
  MoleculeGraph m = parse_smiles("C/C=C/C");
  EXPECT_TRUE(m.stereo_dropped());
  EXPECT_EQ(m.num_atoms(), 4);
  EXPECT_FALSE(parse_smiles("CC=CC").stereo_dropped());
  EXPECT_TRUE(parse_smiles("N[C@@H](C)C(=O)O").stereo_dropped());
}

TEST(SmilesParser, DisconnectedComponents) {
  MoleculeGraph m = parse_smiles("[Na+].[Cl-]");
  EXPECT_EQ(m.num_atoms(), 2);
  EXPECT_EQ(m.num_bonds(), 0);
  EXPECT_EQ(m.components().size(), 2u);
}

TEST(SmilesParser, ErrorKinds) {
  EXPECT_EQ(parse_error_kind(""), SmilesErrorKind::kEmptyInput);
  EXPECT_EQ(parse_error_kind("C("), SmilesErrorKind::kUnbalancedParenthesis);
  EXPECT_EQ(parse_error_kind("C)C"), SmilesErrorKind::kUnbalancedParenthesis);
  EXPECT_EQ(parse_error_kind("C1CC"), SmilesErrorKind::kUnmatchedRingClosure);
  EXPECT_EQ(parse_error_kind("[Xx]"), SmilesErrorKind::kUnknownElement);
  EXPECT_EQ(parse_error_kind("[CH3"), SmilesErrorKind::kMalformedBracketAtom);
  EXPECT_EQ(parse_error_kind("C?C"), SmilesErrorKind::kUnexpectedCharacter);
  EXPECT_EQ(parse_error_kind("CC."), SmilesErrorKind::kUnexpectedCharacter);
  EXPECT_EQ(parse_error_kind(".C"), SmilesErrorKind::kUnexpectedCharacter);
  EXPECT_EQ(parse_error_kind("Xe"), SmilesErrorKind::kUnknownElement);
  EXPECT_EQ(parse_error_kind("C==C"), SmilesErrorKind::kUnexpectedCharacter);
  EXPECT_EQ(parse_error_kind("C=1CC#1"), SmilesErrorKind::kInvalidBond);
  EXPECT_EQ(parse_error_kind("C11"), SmilesErrorKind::kInvalidBond);
  EXPECT_EQ(parse_error_kind("C1C1"), SmilesErrorKind::kInvalidBond);
}

TEST(SmilesParser, ErrorOffsetPointsAtFault) {
  try {
    parse_smiles("CC?C");
    FAIL();
  } catch (const SmilesError &e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Valence, BenzoicAcidHandAudit) {
  // Aromatic carbons: two aromatic bonds count 1 each plus one pi unit, plus
  // one hydrogen or one substituent bond, for 4. The carboxyl carbon has one
  // double and two single bonds, also 4.
  MoleculeGraph m = parse_smiles("O=C(O)c1ccccc1");
  ValidityReport r = check_valence(m);
  EXPECT_TRUE(r.valid);
  for (const AtomVerdict &v: r.atoms) {
    if (m.atom(v.atom).element == 6)
      EXPECT_EQ(v.valence, 4) << "atom " << v.atom;
  }
  EXPECT_EQ(m.hydrogen_count(3), 0);  // ipso carbon
}

TEST(Valence, RejectsOvervalentAtoms) {
  EXPECT_FALSE(is_valid_smiles("C(C)(C)(C)(C)C"));
  EXPECT_FALSE(is_valid_smiles("O(C)(C)C"));
  EXPECT_FALSE(is_valid_smiles("[CH5]"));
  EXPECT_TRUE(is_valid_smiles("[NH4+]"));
  EXPECT_TRUE(is_valid_smiles("C[N+](C)(C)C"));
  EXPECT_TRUE(is_valid_smiles("CS(=O)(=O)O"));
}

TEST(Valence, AromaticLonePairDonors) {
  EXPECT_TRUE(is_valid_smiles("c1ccoc1"));
  EXPECT_TRUE(is_valid_smiles("c1cc[nH]c1"));
  EXPECT_TRUE(is_valid_smiles("c1ccsc1"));
  EXPECT_TRUE(is_valid_smiles("c1ccncc1"));
  EXPECT_TRUE(is_valid_smiles("Cn1cnc2c1c(=O)n(C)c(=O)n2C"));
}

TEST(Canonical, KnownForms) {
  EXPECT_EQ(canonical_smiles("OCC"), canonical_smiles("CCO"));
  EXPECT_EQ(canonical_smiles("OC(C)=O"), canonical_smiles("CC(=O)O"));
  EXPECT_NE(canonical_smiles("c1ccccc1"), canonical_smiles("C1=CC=CC=C1"));
  EXPECT_EQ(canonical_smiles("C/C=C/C"), canonical_smiles("CC=CC"));
}

TEST(Canonical, Idempotent) {
  for (const auto &[smiles, name]: fixture_molecules()) {
    std::string once = canonical_smiles(smiles);
    EXPECT_EQ(canonical_smiles(once), once) << name;
  }
}

TEST(Canonical, ThrowsOnInvalidInput) {
  EXPECT_THROW(canonical_smiles("C("), SmilesError);
  EXPECT_THROW(canonical_smiles("C(C)(C)(C)(C)C"), ValenceError);
  EXPECT_FALSE(smiles_equal("C(", "C("));
}

TEST(Canonical, InvariantUnderRenumbering) {
  Rng rng(17);
  for (const auto &[smiles, name]: fixture_molecules()) {
    MoleculeGraph mol = parse_smiles(smiles);
    std::string expected = canonicalize(mol);
    for (int k = 0; k < 5; ++k) {
      std::string rendering = random_rendering(mol, rng);
      EXPECT_EQ(canonical_smiles(rendering), expected)
          << name << " via " << rendering;
    }
  }
}

TEST(Canonical, RoundTripIsIsomorphic) {
  for (const auto &[smiles, name]: fixture_molecules()) {
    MoleculeGraph mol = parse_smiles(smiles);
    if (mol.num_atoms() > 12)
      continue;
    MoleculeGraph back = parse_smiles(canonicalize(mol));
    EXPECT_TRUE(isomorphic(mol, back)) << name;
  }
}

TEST(Canonical, DistinguishesNonIsomorphicMolecules) {
  std::set<std::string> seen;
  std::size_t count = 0;
  for (const auto &[smiles, name]: fixture_molecules()) {
    seen.insert(canonical_smiles(smiles));
    ++count;
  }
  EXPECT_EQ(seen.size(), count);
}

TEST(Canonical, SmilesEqualIsAnEquivalence) {
  auto mols = fixture_molecules();
  Rng rng(5);
  for (std::size_t i = 0; i < 40; ++i) {
    const std::string &a = mols[i].first;
    MoleculeGraph g = parse_smiles(a);
    std::string b = random_rendering(g, rng);
    std::string c = random_rendering(g, rng);
    EXPECT_TRUE(smiles_equal(a, a));
    EXPECT_TRUE(smiles_equal(a, b));
    EXPECT_TRUE(smiles_equal(b, a));
    EXPECT_TRUE(smiles_equal(b, c));
    EXPECT_TRUE(smiles_equal(a, c));
    const std::string &other = mols[(i + 1) % mols.size()].first;
    EXPECT_EQ(smiles_equal(a, other), smiles_equal(other, a));
  }
}

TEST(Canonical, OracleAgreesWithCanonicalEquality) {
  // Two molecules canonicalize equally exactly when the brute-force oracle
  // finds them isomorphic.
  auto mols = fixture_molecules();
  for (std::size_t i = 0; i + 1 < mols.size(); i += 7) {
    MoleculeGraph a = parse_smiles(mols[i].first);
    MoleculeGraph b = parse_smiles(mols[i + 1].first);
    if (a.num_atoms() > 10 || b.num_atoms() > 10)
      continue;
    EXPECT_EQ(canonicalize(a) == canonicalize(b), isomorphic(a, b));
  }
}

}  // namespace
}  // namespace molr

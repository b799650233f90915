//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "molr/fingerprint.h"
#include "molr/hash.h"
#include "molr/random.h"
#include "molr/smiles.h"
#include "support/test_support.h"

namespace molr {
namespace {

using testing::fixture_molecules;
using testing::permuted_graph;
using testing::random_permutation;

// A bond lies on a ring iff its endpoints stay connected without it.
bool bond_in_ring(const MoleculeGraph &m, int bond) {
  const Bond &skip = m.bond(bond);
  std::vector<bool> seen(m.num_atoms(), false);
  std::queue<int> q;
  q.push(skip.begin);
  seen[skip.begin] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int bi: m.bonds_of(u)) {
      if (bi == bond)
        continue;
      int v = m.bond(bi).other(u);
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  return seen[skip.end];
}

bool atom_in_ring(const MoleculeGraph &m, int atom) {
  for (int bi: m.bonds_of(atom)) {
    if (bond_in_ring(m, bi))
      return true;
  }
  return false;
}

// Environment identifier of `atom` at `radius`, by direct recursion on the
// definition rather than round-by-round iteration.
std::uint64_t circular_id(const MoleculeGraph &m, int atom, int radius) {
  if (radius == 0) {
    const Atom &a = m.atom(atom);
    std::vector<std::uint64_t> w {
      static_cast<std::uint64_t>(a.element),
      static_cast<std::uint64_t>(m.degree(atom)),
      static_cast<std::uint64_t>(m.hydrogen_count(atom)),
      static_cast<std::uint64_t>(a.charge + 128),
      static_cast<std::uint64_t>(a.isotope.value_or(0)),
      a.aromatic ? 1U : 0U,
      atom_in_ring(m, atom) ? 1U : 0U,
    };
    return hash_words(w);
  }
  std::multiset<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int bi: m.bonds_of(atom)) {
    const Bond &b = m.bond(bi);
    env.emplace(static_cast<std::uint64_t>(b.order),
                circular_id(m, b.other(atom), radius - 1));
  }
  std::vector<std::uint64_t> w { static_cast<std::uint64_t>(radius),
                                 circular_id(m, atom, radius - 1) };
  for (const auto &[order, id]: env) {
    w.push_back(order);
    w.push_back(id);
  }
  return hash_words(w);
}

std::set<std::size_t> circular_oracle(const MoleculeGraph &m, int radius,
                                      std::size_t nbits) {
  std::set<std::size_t> bits;
  for (int r = 0; r <= radius; ++r) {
    for (int i = 0; i < m.num_atoms(); ++i)
      bits.insert(circular_id(m, i, r) % nbits);
  }
  return bits;
}

// Every simple path, found by growing explicit atom lists breadth first.
std::set<std::size_t> path_oracle(const MoleculeGraph &m, int max_len,
                                  std::size_t nbits) {
  auto label = [&](int i) {
    return static_cast<std::uint64_t>(m.atom(i).element) * 2
           + (m.atom(i).aromatic ? 1 : 0);
  };
  std::set<std::size_t> bits;
  std::vector<std::vector<int>> frontier;
  for (int i = 0; i < m.num_atoms(); ++i)
    frontier.push_back({ i });
  for (int len = 0; len <= max_len && !frontier.empty(); ++len) {
    std::vector<std::vector<int>> next;
    for (const std::vector<int> &path: frontier) {
      std::vector<std::uint64_t> fwd { label(path[0]) };
      for (std::size_t k = 1; k < path.size(); ++k) {
        int b = m.find_bond(path[k - 1], path[k]);
        fwd.push_back(static_cast<std::uint64_t>(m.bond(b).order));
        fwd.push_back(label(path[k]));
      }
      std::vector<std::uint64_t> rev(fwd.rbegin(), fwd.rend());
      std::vector<std::uint64_t> w { std::min(fwd, rev).size() };
      for (std::uint64_t x: std::min(fwd, rev))
        w.push_back(x);
      bits.insert(hash_words(w) % nbits);

      for (int bi: m.bonds_of(path.back())) {
        int v = m.bond(bi).other(path.back());
        if (std::find(path.begin(), path.end(), v) != path.end())
          continue;
        std::vector<int> longer = path;
        longer.push_back(v);
        next.push_back(std::move(longer));
      }
    }
    frontier = std::move(next);
  }
  return bits;
}

std::set<std::size_t> as_set(const FingerprintBits &fp) {
  auto v = fp.on_bits();
  return { v.begin(), v.end() };
}

std::set<std::string> key_names(const FingerprintBits &fp) {
  std::set<std::string> names;
  for (std::size_t bit: fp.on_bits())
    names.insert(std::string(structural_key_names()[bit]));
  return names;
}

TEST(CircularFingerprint, MatchesRecursiveOracle) {
  auto mols = fixture_molecules();
  for (std::size_t i = 0; i < mols.size(); i += 3) {
    MoleculeGraph m = parse_smiles(mols[i].first);
    for (int radius: { 0, 1, 2, 3 }) {
      EXPECT_EQ(as_set(circular_fingerprint(m, radius, 1024)),
                circular_oracle(m, radius, 1024))
          << mols[i].second << " radius " << radius;
    }
  }
}

TEST(CircularFingerprint, RadiusContainment) {
  for (const auto &[smiles, name]: fixture_molecules()) {
    MoleculeGraph m = parse_smiles(smiles);
    for (int r = 0; r < 4; ++r) {
      auto lo = as_set(circular_fingerprint(m, r));
      auto hi = as_set(circular_fingerprint(m, r + 1));
      EXPECT_TRUE(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()))
          << name << " radius " << r;
    }
  }
}

TEST(CircularFingerprint, RejectsBadParameters) {
  MoleculeGraph m = parse_smiles("CCO");
  try {
    circular_fingerprint(m, 7);
    FAIL();
  } catch (const FingerprintError &e) {
    EXPECT_EQ(e.kind(), FingerprintError::Kind::kInvalidRadius);
  }
  try {
    circular_fingerprint(m, 2, 1000);
    FAIL();
  } catch (const FingerprintError &e) {
    EXPECT_EQ(e.kind(), FingerprintError::Kind::kInvalidWidth);
  }
  EXPECT_THROW(circular_fingerprint(m, -1), FingerprintError);
  EXPECT_THROW(path_fingerprint(m, 7, 0), FingerprintError);
}

TEST(PathFingerprint, MatchesEnumerationOracle) {
  auto mols = fixture_molecules();
  for (std::size_t i = 0; i < mols.size(); i += 4) {
    MoleculeGraph m = parse_smiles(mols[i].first);
    for (int len: { 0, 2, 5 }) {
      EXPECT_EQ(as_set(path_fingerprint(m, len, 2048)),
                path_oracle(m, len, 2048))
          << mols[i].second << " length " << len;
    }
  }
}

TEST(PathFingerprint, LongerPathsOnlyAddBits) {
  MoleculeGraph m = parse_smiles("CC(=O)Oc1ccccc1C(=O)O");
  auto short_bits = as_set(path_fingerprint(m, 3));
  auto long_bits = as_set(path_fingerprint(m, 7));
  EXPECT_TRUE(std::includes(long_bits.begin(), long_bits.end(),
                            short_bits.begin(), short_bits.end()));
}

TEST(StructuralKeys, NamesAreUniqueAndIndexed) {
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < kNumStructuralKeys; ++i) {
    std::string_view name = structural_key_names()[i];
    EXPECT_TRUE(seen.insert(name).second) << name;
    EXPECT_EQ(structural_key_index(name), i);
  }
  EXPECT_THROW(structural_key_index("no_such_key"), std::out_of_range);
}

TEST(StructuralKeys, BenzoicAcidAudit) {
  FingerprintBits fp = structural_keys(parse_smiles("O=C(O)c1ccccc1"));
  std::set<std::string> expected {
    "has_carbon",      "has_oxygen",      "heavy_atoms_ge_8",
    "carbon_count_ge_6", "oxygen_count_ge_2", "aromatic_atom",
    "ring_present",    "ring_size_6",     "double_bond",
    "carbonyl",        "hydroxyl",        "carboxylic_acid",
  };
  EXPECT_EQ(key_names(fp), expected);
}

TEST(StructuralKeys, FunctionalGroups) {
  auto has = [](std::string_view smiles, std::string_view key) {
    return structural_keys(parse_smiles(smiles)).test(structural_key_index(key));
  };
  EXPECT_TRUE(has("CC(C)=O", "ketone"));
  EXPECT_FALSE(has("CC(C)=O", "aldehyde"));
  EXPECT_TRUE(has("CC=O", "aldehyde"));
  EXPECT_FALSE(has("CC(=O)O", "aldehyde"));
  EXPECT_TRUE(has("CCOC(C)=O", "ester"));
  EXPECT_FALSE(has("CCOC(C)=O", "ether"));
  EXPECT_TRUE(has("CCOCC", "ether"));
  EXPECT_TRUE(has("CC(N)=O", "amide"));
  EXPECT_FALSE(has("CC(N)=O", "primary_amine"));
  EXPECT_TRUE(has("CCN", "primary_amine"));
  EXPECT_TRUE(has("CNC", "secondary_amine"));
  EXPECT_TRUE(has("CN(C)C", "tertiary_amine"));
  EXPECT_TRUE(has("C[N+](=O)[O-]", "nitro"));
  EXPECT_TRUE(has("CC#N", "nitrile"));
  EXPECT_TRUE(has("CS", "thiol"));
  EXPECT_TRUE(has("CSC", "thioether"));
  EXPECT_TRUE(has("NS(=O)(=O)c1ccccc1", "sulfonamide"));
  EXPECT_TRUE(has("Oc1ccccc1", "phenol"));
  EXPECT_TRUE(has("Clc1ccccc1", "aromatic_halide"));
  EXPECT_TRUE(has("c1ccncc1", "aromatic_nitrogen"));
  EXPECT_TRUE(has("c1ccncc1", "heteroatom_in_ring"));
  EXPECT_TRUE(has("c1ccoc1", "aromatic_oxygen_or_sulfur"));
  EXPECT_TRUE(has("c1ccoc1", "ring_size_5"));
  EXPECT_TRUE(has("c1ccc2ccccc2c1", "fused_ring_atom"));
  EXPECT_TRUE(has("c1ccc2ccccc2c1", "ring_count_ge_2"));
  EXPECT_TRUE(has("C1CC1", "ring_size_3"));
  EXPECT_TRUE(has("CC(C)(C)C", "quaternary_carbon"));
  EXPECT_TRUE(has("CC(=O)[O-]", "carboxylate"));
  EXPECT_TRUE(has("[Na+].[Cl-]", "positive_charge"));
  EXPECT_TRUE(has("[Na+].[Cl-]", "has_other_element"));
  EXPECT_TRUE(has("[13CH4]", "has_isotope"));
}

TEST(Tanimoto, HandComputed) {
  FingerprintBits a(FingerprintKind::kPath, 64), b(FingerprintKind::kPath, 64);
  for (int i: { 1, 2, 3, 4 })
    a.set(i);
  for (int i: { 3, 4, 5 })
    b.set(i);
  EXPECT_DOUBLE_EQ(tanimoto(a, b), 2.0 / 5.0);
  FingerprintBits empty(FingerprintKind::kPath, 64);
  EXPECT_EQ(tanimoto(empty, empty), 1.0);
  EXPECT_EQ(tanimoto(empty, empty, EmptyTanimoto::kZero), 0.0);
  EXPECT_EQ(tanimoto(a, empty), 0.0);
}

TEST(Tanimoto, RejectsMismatchedOperands) {
  FingerprintBits a(FingerprintKind::kPath, 64);
  FingerprintBits b(FingerprintKind::kCircular, 64);
  FingerprintBits c(FingerprintKind::kPath, 128);
  try {
    tanimoto(a, b);
    FAIL();
  } catch (const FingerprintError &e) {
    EXPECT_EQ(e.kind(), FingerprintError::Kind::kKindMismatch);
  }
  try {
    tanimoto(a, c);
    FAIL();
  } catch (const FingerprintError &e) {
    EXPECT_EQ(e.kind(), FingerprintError::Kind::kLengthMismatch);
  }
}

TEST(Tanimoto, PropertiesOnRandomPairs) {
  auto mols = fixture_molecules();
  Rng rng(99);
  for (int k = 0; k < 300; ++k) {
    MoleculeGraph a = parse_smiles(mols[rng.uniform_index(mols.size())].first);
    MoleculeGraph b = parse_smiles(mols[rng.uniform_index(mols.size())].first);
    for (FingerprintKind kind: { FingerprintKind::kCircular, FingerprintKind::kPath,
                                 FingerprintKind::kStructuralKeys }) {
      FingerprintBits fa = fingerprint(a, kind), fb = fingerprint(b, kind);
      double ab = tanimoto(fa, fb);
      EXPECT_EQ(ab, tanimoto(fb, fa));
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 1.0);
      EXPECT_EQ(tanimoto(fa, fa), 1.0);
    }
  }
}

TEST(Fingerprints, InvariantUnderRenumbering) {
  Rng rng(3);
  for (const auto &[smiles, name]: fixture_molecules()) {
    MoleculeGraph m = parse_smiles(smiles);
    MoleculeGraph p = permuted_graph(m, random_permutation(m.num_atoms(), rng), rng);
    for (FingerprintKind kind: { FingerprintKind::kCircular, FingerprintKind::kPath,
                                 FingerprintKind::kStructuralKeys })
      EXPECT_EQ(fingerprint(m, kind), fingerprint(p, kind)) << name;
  }
}

TEST(Fingerprints, KindNames) {
  for (FingerprintKind k: { FingerprintKind::kCircular, FingerprintKind::kPath,
                            FingerprintKind::kStructuralKeys })
    EXPECT_EQ(fingerprint_kind_from_string(to_string(k)), k);
  EXPECT_THROW(fingerprint_kind_from_string("maccs"), std::invalid_argument);
}

}  // namespace
}  // namespace molr

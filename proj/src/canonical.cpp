//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/canonical.h"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "molr/smiles.h"

namespace molr {
namespace {

// Leaves explored before tie-breaking falls back to lowest atom index.
constexpr int kLeafBudget = 4096;

using Key = std::pair<int, std::vector<std::pair<int, int>>>;

// Reassign ranks as dense indices of the sorted distinct keys.
template <class K>
std::vector<int> ranks_from_keys(const std::vector<K> &keys) {
  std::vector<K> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> ranks(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ranks[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i])
        - sorted.begin());
  }
  return ranks;
}

int count_classes(const std::vector<int> &ranks) {
  std::vector<int> r = ranks;
  std::sort(r.begin(), r.end());
  return static_cast<int>(std::unique(r.begin(), r.end()) - r.begin());
}

std::vector<int> refine(const MoleculeGraph &mol, std::vector<int> ranks) {
  int classes = count_classes(ranks);
  while (true) {
    std::vector<Key> keys(mol.num_atoms());
    for (int i = 0; i < mol.num_atoms(); ++i) {
      keys[i].first = ranks[i];
      for (int bi: mol.bonds_of(i)) {
        const Bond &b = mol.bond(bi);
        keys[i].second.emplace_back(ranks[b.other(i)],
                                    static_cast<int>(b.order));
      }
      std::sort(keys[i].second.begin(), keys[i].second.end());
    }
    std::vector<int> next = ranks_from_keys(keys);
    int next_classes = count_classes(next);
    if (next_classes == classes)
      return next;
    ranks = std::move(next);
    classes = next_classes;
  }
}

std::vector<int> initial_ranks(const MoleculeGraph &mol) {
  using Inv = std::tuple<int, int, int, int, int, int>;
  std::vector<Inv> inv(mol.num_atoms());
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &a = mol.atom(i);
    inv[i] = { mol.degree(i),         a.element,
               a.isotope.value_or(0), a.charge,
               mol.hydrogen_count(i), a.aromatic ? 1 : 0 };
  }
  return ranks_from_keys(inv);
}

// Neighbor multiset of a with b removed, as (neighbor, order) pairs.
std::vector<std::pair<int, int>> open_neighborhood(const MoleculeGraph &mol,
                                                   int a, int b) {
  std::vector<std::pair<int, int>> out;
  for (int bi: mol.bonds_of(a)) {
    int v = mol.bond(bi).other(a);
    if (v != b)
      out.emplace_back(v, static_cast<int>(mol.bond(bi).order));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool are_twins(const MoleculeGraph &mol, int a, int b) {
  int ab = mol.find_bond(a, b);
  if (ab >= 0 && mol.degree(a) != mol.degree(b))
    return false;
  return open_neighborhood(mol, a, b) == open_neighborhood(mol, b, a);
}

class CanonicalSearch {
public:
  explicit CanonicalSearch(const MoleculeGraph &mol): mol_(mol) { }

  std::string run() {
    search(refine(mol_, initial_ranks(mol_)));
    return *best_;
  }

private:
  void search(const std::vector<int> &ranks) {
    const int n = mol_.num_atoms();
    if (count_classes(ranks) == n) {
      ++leaves_;
      std::string s = write_smiles(mol_, ranks);
      if (!best_ || s < *best_)
        best_ = std::move(s);
      return;
    }

    // First tied class by rank value.
    std::map<int, std::vector<int>> classes;
    for (int i = 0; i < n; ++i)
      classes[ranks[i]].push_back(i);
    int target = -1;
    for (const auto &[r, members]: classes) {
      if (members.size() > 1) {
        target = r;
        break;
      }
    }
    const std::vector<int> &cell = classes[target];

    std::vector<int> tried;
    for (int cand: cell) {
      if (leaves_ >= kLeafBudget && !tried.empty())
        break;
      bool twin = std::any_of(tried.begin(), tried.end(),
                              [&](int t) { return are_twins(mol_, t, cand); });
      if (twin)
        continue;
      tried.push_back(cand);

      std::vector<int> next(n);
      for (int i = 0; i < n; ++i)
        next[i] = 2 * ranks[i] + 1;
      next[cand] -= 1;
      search(refine(mol_, std::move(next)));
    }
  }

  const MoleculeGraph &mol_;
  std::optional<std::string> best_;
  int leaves_ = 0;
};

}  // namespace

std::vector<int> refined_ranks(const MoleculeGraph &mol) {
  return refine(mol, initial_ranks(mol));
}

std::string canonicalize(const MoleculeGraph &mol) {
  if (!check_valence(mol).valid)
    throw ValenceError("valence check failed for '" + mol.source_text() + "'");
  if (mol.num_atoms() == 0)
    return "";
  return CanonicalSearch(mol).run();
}

std::string canonical_smiles(std::string_view smiles) {
  return canonicalize(parse_smiles(smiles));
}

bool smiles_equal(std::string_view a, std::string_view b) {
  try {
    return canonical_smiles(a) == canonical_smiles(b);
  } catch (const SmilesError &) {
    return false;
  } catch (const ValenceError &) {
    return false;
  }
}

bool is_valid_smiles(std::string_view smiles) {
  try {
    return check_valence(parse_smiles(smiles)).valid;
  } catch (const SmilesError &) {
    return false;
  }
}

std::optional<MoleculeGraph> parse_valid(std::string_view smiles) {
  try {
    MoleculeGraph mol = parse_smiles(smiles);
    if (!check_valence(mol).valid)
      return std::nullopt;
    return mol;
  } catch (const SmilesError &) {
    return std::nullopt;
  }
}

}  // namespace molr

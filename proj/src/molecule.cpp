//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/molecule.h"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

namespace molr {

int MoleculeGraph::add_atom(Atom atom) {
  if (atom.aromatic && !atom.elem().aromatic_capable) {
    throw GraphError("element " + std::string(atom.elem().symbol)
                     + " cannot be aromatic");
  }
  atom.index = num_atoms();
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return atoms_.back().index;
}

int MoleculeGraph::add_bond(int a, int b, BondOrder order) {
  if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
    throw GraphError("bond endpoint out of range");
  if (a == b)
    throw GraphError("self-loop on atom " + std::to_string(a));
  if (find_bond(a, b) >= 0) {
    throw GraphError("duplicate bond between atoms " + std::to_string(a)
                     + " and " + std::to_string(b));
  }
  bonds_.push_back({ a, b, order });
  int idx = num_bonds() - 1;
  adjacency_[a].push_back(idx);
  adjacency_[b].push_back(idx);
  return idx;
}

int MoleculeGraph::find_bond(int a, int b) const {
  for (int bi: adjacency_[a]) {
    if (bonds_[bi].other(a) == b)
      return bi;
  }
  return -1;
}

int MoleculeGraph::hydrogen_count(int i) const {
  const Atom &a = atoms_[i];
  if (a.explicit_h)
    return *a.explicit_h;
  return implicit_hydrogens(*this, i);
}

std::vector<std::vector<int>> MoleculeGraph::components() const {
  std::vector<int> comp(num_atoms(), -1);
  std::vector<std::vector<int>> result;
  for (int root = 0; root < num_atoms(); ++root) {
    if (comp[root] >= 0)
      continue;
    int id = static_cast<int>(result.size());
    result.emplace_back();
    std::vector<int> stack { root };
    comp[root] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      result[id].push_back(u);
      for (int bi: adjacency_[u]) {
        int v = bonds_[bi].other(u);
        if (comp[v] < 0) {
          comp[v] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(result[id].begin(), result[id].end());
  }
  return result;
}

namespace {

bool has_pi_unit(const MoleculeGraph &mol, int atom) {
  if (!mol.atom(atom).aromatic)
    return false;
  bool has_aromatic_bond = false;
  for (int bi: mol.bonds_of(atom)) {
    BondOrder o = mol.bond(bi).order;
    if (o == BondOrder::kDouble || o == BondOrder::kTriple)
      return false;
    has_aromatic_bond = has_aromatic_bond || o == BondOrder::kAromatic;
  }
  return has_aromatic_bond;
}

}  // namespace

int bond_valence(const MoleculeGraph &mol, int atom) {
  int sum = 0;
  bool has_aromatic_bond = false, has_multiple = false;
  for (int bi: mol.bonds_of(atom)) {
    switch (mol.bond(bi).order) {
    case BondOrder::kSingle:
      sum += 1;
      break;
    case BondOrder::kDouble:
      sum += 2;
      has_multiple = true;
      break;
    case BondOrder::kTriple:
      sum += 3;
      has_multiple = true;
      break;
    case BondOrder::kAromatic:
      sum += 1;
      has_aromatic_bond = true;
      break;
    }
  }
  if (mol.atom(atom).aromatic && has_aromatic_bond && !has_multiple)
    sum += 1;
  return sum;
}

int implicit_hydrogens(const MoleculeGraph &mol, int atom) {
  const Element &elem = mol.atom(atom).elem();
  if (!elem.organic_subset)
    return 0;
  int used = bond_valence(mol, atom);
  for (int v: elem.valences) {
    if (v >= used)
      return v - used;
  }
  return 0;
}

int allowed_valence(const Element &elem, int charge) {
  int base = max_valence(elem);
  if (base < 0)
    return -1;

  int adjusted;
  switch (elem.atomic_number) {
  case 1:  // H
  case 6:  // C
    adjusted = base - std::abs(charge);
    break;
  case 5:  // B
    adjusted = base - charge;
    break;
  default:  // N, O, P, S, halogens
    adjusted = base + charge;
    break;
  }
  return std::max(adjusted, 0);
}

ValidityReport check_valence(const MoleculeGraph &mol) {
  ValidityReport report;
  report.atoms.reserve(mol.num_atoms());
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &a = mol.atom(i);
    AtomVerdict v;
    v.atom = i;
    v.valence = bond_valence(mol, i) + mol.hydrogen_count(i);
    v.max_allowed = allowed_valence(a.elem(), a.charge);
    v.ok = v.max_allowed < 0 || v.valence <= v.max_allowed;
    // Aromatic lone-pair donors (furan O, pyrrole N) take no pi unit.
    if (!v.ok && has_pi_unit(mol, i) && v.valence - 1 <= v.max_allowed) {
      v.valence -= 1;
      v.ok = true;
    }
    report.valid = report.valid && v.ok;
    report.atoms.push_back(v);
  }
  return report;
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "molr/smiles.h"

namespace molr {
namespace {

std::string atom_symbol(const MoleculeGraph &mol, int i) {
  const Atom &a = mol.atom(i);
  const Element &e = a.elem();
  int hcount = mol.hydrogen_count(i);

  std::string sym(e.symbol);
  if (a.aromatic)
    sym[0] = static_cast<char>(sym[0] - 'A' + 'a');

  bool organic = e.organic_subset && a.charge == 0 && !a.isotope
                 && hcount == implicit_hydrogens(mol, i);
  if (organic)
    return sym;

  std::string out = "[";
  if (a.isotope)
    out += std::to_string(*a.isotope);
  out += sym;
  if (hcount > 0) {
    out += 'H';
    if (hcount > 1)
      out += std::to_string(hcount);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    int mag = a.charge > 0 ? a.charge : -a.charge;
    if (mag > 1)
      out += std::to_string(mag);
  }
  out += ']';
  return out;
}

std::string bond_symbol(const MoleculeGraph &mol, const Bond &b) {
  bool both_aromatic = mol.atom(b.begin).aromatic && mol.atom(b.end).aromatic;
  switch (b.order) {
  case BondOrder::kSingle:
    return both_aromatic ? "-" : "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kAromatic:
    return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int num) {
  if (num < 10)
    return std::to_string(num);
  return "%" + std::to_string(num);
}

class Writer {
public:
  Writer(const MoleculeGraph &mol, std::span<const int> priority)
      : mol_(mol), priority_(priority.begin(), priority.end()),
        visited_(mol.num_atoms(), false), emitted_(mol.num_atoms(), false),
        tree_bond_(mol.num_bonds(), false), children_(mol.num_atoms()),
        ring_bonds_(mol.num_atoms()), ring_digit_(mol.num_bonds(), 0) {
    if (static_cast<int>(priority_.size()) != mol.num_atoms())
      throw std::invalid_argument("priority size does not match atom count");
  }

  std::string run() {
    std::vector<int> order(mol_.num_atoms());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return priority_[a] < priority_[b]; });

    std::string out;
    for (int root: order) {
      if (visited_[root])
        continue;
      build_tree(root);
      if (!out.empty())
        out += '.';
      emit(root, -1, out);
    }
    return out;
  }

private:
  std::vector<int> sorted_neighbors(int u) const {
    std::vector<int> bonds = mol_.bonds_of(u);
    std::sort(bonds.begin(), bonds.end(), [&](int x, int y) {
      return priority_[mol_.bond(x).other(u)]
             < priority_[mol_.bond(y).other(u)];
    });
    return bonds;
  }

  // Iterative DFS fixing tree edges and ring-closure bonds.
  void build_tree(int root) {
    struct Frame {
      int atom;
      std::vector<int> bonds;
      std::size_t next = 0;
    };
    std::vector<Frame> stack;
    visited_[root] = true;
    stack.push_back({ root, sorted_neighbors(root) });
    std::vector<bool> seen_bond(mol_.num_bonds(), false);

    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.next == f.bonds.size()) {
        stack.pop_back();
        continue;
      }
      int bi = f.bonds[f.next++];
      if (seen_bond[bi])
        continue;
      seen_bond[bi] = true;
      int u = f.atom;
      int v = mol_.bond(bi).other(u);
      if (visited_[v]) {
        ring_bonds_[u].push_back(bi);
        ring_bonds_[v].push_back(bi);
      } else {
        visited_[v] = true;
        tree_bond_[bi] = true;
        children_[u].push_back(bi);
        stack.push_back({ v, sorted_neighbors(v) });
      }
    }
  }

  int take_digit() {
    for (int d = 1; d < 100; ++d) {
      if (std::find(in_use_.begin(), in_use_.end(), d) == in_use_.end()) {
        in_use_.push_back(d);
        return d;
      }
    }
    throw std::runtime_error("too many open ring closures");
  }

  void release_digit(int d) {
    in_use_.erase(std::find(in_use_.begin(), in_use_.end(), d));
  }

  void emit(int u, int via_bond, std::string &out) {
    if (via_bond >= 0)
      out += bond_symbol(mol_, mol_.bond(via_bond));
    out += atom_symbol(mol_, u);
    emitted_[u] = true;

    std::vector<int> rings = ring_bonds_[u];
    std::sort(rings.begin(), rings.end(), [&](int x, int y) {
      return priority_[mol_.bond(x).other(u)]
             < priority_[mol_.bond(y).other(u)];
    });
    // Closures first so their digits can be reused by openings.
    for (int bi: rings) {
      if (emitted_[mol_.bond(bi).other(u)]) {
        out += ring_label(ring_digit_[bi]);
        release_digit(ring_digit_[bi]);
      }
    }
    for (int bi: rings) {
      if (!emitted_[mol_.bond(bi).other(u)]) {
        int d = take_digit();
        ring_digit_[bi] = d;
        out += bond_symbol(mol_, mol_.bond(bi));
        out += ring_label(d);
      }
    }

    const auto &kids = children_[u];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int v = mol_.bond(kids[k]).other(u);
      if (k + 1 < kids.size()) {
        out += '(';
        emit(v, kids[k], out);
        out += ')';
      } else {
        emit(v, kids[k], out);
      }
    }
  }

  const MoleculeGraph &mol_;
  std::vector<int> priority_;
  std::vector<bool> visited_;
  std::vector<bool> emitted_;
  std::vector<bool> tree_bond_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> ring_bonds_;
  std::vector<int> ring_digit_;
  std::vector<int> in_use_;
};

}  // namespace

std::string write_smiles(const MoleculeGraph &mol,
                         std::span<const int> priority) {
  return Writer(mol, priority).run();
}

}  // namespace molr

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_MOLECULE_H_
#define MOLR_MOLECULE_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "molr/element.h"

namespace molr {

enum class BondOrder : int {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  int element = 6;  // atomic number
  int charge = 0;
  std::optional<int> isotope;
  // Set for bracket atoms (0 when no H is written); unset for organic-subset
  // atoms whose hydrogens are implicit.
  std::optional<int> explicit_h;
  bool aromatic = false;
  int index = 0;

  const Element &elem() const { return element_of(element); }
};

struct Bond {
  int begin;
  int end;
  BondOrder order;

  int other(int atom) const { return atom == begin ? end : begin; }
};

class GraphError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Simple undirected labeled graph. Hydrogens are not materialized as atoms
// unless written as bracket atoms.
class MoleculeGraph {
public:
  MoleculeGraph() = default;
  explicit MoleculeGraph(std::string source): source_text_(std::move(source)) {
  }

  // Throws GraphError if the element cannot be aromatic.
  int add_atom(Atom atom);
  // Throws GraphError on self-loops, out-of-range endpoints, or duplicates.
  int add_bond(int a, int b, BondOrder order);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }

  const Atom &atom(int i) const { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }

  // Indices of bonds incident to atom i.
  const std::vector<int> &bonds_of(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
  // Bond index connecting a and b, or -1.
  int find_bond(int a, int b) const;

  const std::string &source_text() const { return source_text_; }
  bool stereo_dropped() const { return stereo_dropped_; }
  void set_stereo_dropped(bool v) { stereo_dropped_ = v; }

  // Number of hydrogens not present as atoms: explicit_h for bracket atoms,
  // otherwise filled to the lowest consistent normal valence.
  int hydrogen_count(int i) const;

  // Connected components as lists of atom indices, each sorted ascending.
  std::vector<std::vector<int>> components() const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
  std::string source_text_;
  bool stereo_dropped_ = false;
};

// Valence used for hydrogen filling and validity: non-aromatic bonds count
// their order, aromatic bonds count 1, and an aromatic atom without an
// exocyclic multiple bond contributes one extra unit for its pi bond. The
// valence check drops that unit again when keeping it would exceed the
// element's limit (lone-pair donors such as furan oxygen).
int bond_valence(const MoleculeGraph &mol, int atom);

// Hydrogens an organic-subset atom receives when written without brackets.
int implicit_hydrogens(const MoleculeGraph &mol, int atom);

// Largest valence allowed after the formal-charge adjustment, or -1 when the
// element has no valence model.
int allowed_valence(const Element &elem, int charge);

struct AtomVerdict {
  int atom;
  int valence;      // bond_valence + hydrogens
  int max_allowed;  // -1: unconstrained
  bool ok;
};

struct ValidityReport {
  std::vector<AtomVerdict> atoms;
  bool valid = true;
};

ValidityReport check_valence(const MoleculeGraph &mol);

}  // namespace molr

#endif  // MOLR_MOLECULE_H_

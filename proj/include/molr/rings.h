//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_RINGS_H_
#define MOLR_RINGS_H_

#include <vector>

#include "molr/molecule.h"

namespace molr {

struct RingInfo {
  // Per bond: size of the smallest ring through it, 0 if acyclic.
  std::vector<int> bond_ring_size;
  // Per atom: number of incident ring bonds.
  std::vector<int> atom_ring_bonds;
  // Cyclomatic number |E| - |V| + #components.
  int ring_count = 0;

  bool atom_in_ring(int i) const { return atom_ring_bonds[i] > 0; }
};

RingInfo find_rings(const MoleculeGraph &mol);

}  // namespace molr

#endif  // MOLR_RINGS_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/rings.h"

#include <deque>
#include <vector>

namespace molr {
namespace {

// Bond count of the shortest path from `from` to `to` avoiding bond `skip`,
// or -1 if none.
int shortest_path_without(const MoleculeGraph &mol, int from, int to,
                          int skip) {
  std::vector<int> dist(mol.num_atoms(), -1);
  std::deque<int> queue { from };
  dist[from] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (u == to)
      return dist[u];
    for (int bi: mol.bonds_of(u)) {
      if (bi == skip)
        continue;
      int v = mol.bond(bi).other(u);
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return -1;
}

}  // namespace

RingInfo find_rings(const MoleculeGraph &mol) {
  RingInfo info;
  info.bond_ring_size.assign(mol.num_bonds(), 0);
  info.atom_ring_bonds.assign(mol.num_atoms(), 0);
  for (int bi = 0; bi < mol.num_bonds(); ++bi) {
    const Bond &b = mol.bond(bi);
    int d = shortest_path_without(mol, b.begin, b.end, bi);
    if (d > 0) {
      info.bond_ring_size[bi] = d + 1;
      ++info.atom_ring_bonds[b.begin];
      ++info.atom_ring_bonds[b.end];
    }
  }
  info.ring_count = mol.num_bonds() - mol.num_atoms()
                    + static_cast<int>(mol.components().size());
  return info;
}

}  // namespace molr

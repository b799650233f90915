//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/fingerprint.h"

#include <algorithm>
#include <bit>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "molr/hash.h"
#include "molr/rings.h"

namespace molr {

std::string_view to_string(FingerprintKind kind) {
  switch (kind) {
  case FingerprintKind::kCircular:
    return "circular";
  case FingerprintKind::kPath:
    return "path";
  case FingerprintKind::kStructuralKeys:
    return "keys";
  }
  return "unknown";
}

FingerprintKind fingerprint_kind_from_string(std::string_view name) {
  if (name == "circular")
    return FingerprintKind::kCircular;
  if (name == "path")
    return FingerprintKind::kPath;
  if (name == "keys")
    return FingerprintKind::kStructuralKeys;
  throw std::invalid_argument("unknown fingerprint kind '" + std::string(name)
                              + "'");
}

FingerprintBits::FingerprintBits(FingerprintKind kind, std::size_t length)
    : kind_(kind), length_(length), words_((length + 63) / 64, 0) { }

std::size_t FingerprintBits::popcount() const {
  std::size_t n = 0;
  for (std::uint64_t w: words_)
    n += std::popcount(w);
  return n;
}

std::vector<std::size_t> FingerprintBits::on_bits() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < length_; ++i) {
    if (test(i))
      out.push_back(i);
  }
  return out;
}

namespace {

void check_width(std::size_t nbits) {
  if (nbits == 0 || !std::has_single_bit(nbits)) {
    throw FingerprintError(FingerprintError::Kind::kInvalidWidth,
                           "fingerprint width must be a power of two, got "
                               + std::to_string(nbits));
  }
}

}  // namespace

std::vector<std::vector<std::uint64_t>>
circular_atom_ids(const MoleculeGraph &mol, int radius) {
  const int n = mol.num_atoms();
  RingInfo rings = find_rings(mol);

  std::vector<std::vector<std::uint64_t>> ids(radius + 1,
                                              std::vector<std::uint64_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom &a = mol.atom(i);
    const std::uint64_t words[] = {
      static_cast<std::uint64_t>(a.element),
      static_cast<std::uint64_t>(mol.degree(i)),
      static_cast<std::uint64_t>(mol.hydrogen_count(i)),
      static_cast<std::uint64_t>(a.charge + 128),
      static_cast<std::uint64_t>(a.isotope.value_or(0)),
      a.aromatic ? 1U : 0U,
      rings.atom_in_ring(i) ? 1U : 0U,
    };
    ids[0][i] = hash_words(words);
  }

  for (int r = 1; r <= radius; ++r) {
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
      for (int bi: mol.bonds_of(i)) {
        const Bond &b = mol.bond(bi);
        env.emplace_back(static_cast<std::uint64_t>(b.order),
                         ids[r - 1][b.other(i)]);
      }
      std::sort(env.begin(), env.end());

      std::vector<std::uint64_t> words { static_cast<std::uint64_t>(r),
                                         ids[r - 1][i] };
      for (const auto &[order, id]: env) {
        words.push_back(order);
        words.push_back(id);
      }
      ids[r][i] = hash_words(words);
    }
  }
  return ids;
}

FingerprintBits circular_fingerprint(const MoleculeGraph &mol, int radius,
                                     std::size_t nbits) {
  if (radius < 0 || radius > 6) {
    throw FingerprintError(FingerprintError::Kind::kInvalidRadius,
                           "radius must be in 0..=6, got "
                               + std::to_string(radius));
  }
  check_width(nbits);

  FingerprintBits fp(FingerprintKind::kCircular, nbits);
  for (const auto &round: circular_atom_ids(mol, radius)) {
    for (std::uint64_t id: round)
      fp.set(id % nbits);
  }
  return fp;
}

namespace {

class PathEnumerator {
public:
  PathEnumerator(const MoleculeGraph &mol, int max_len, FingerprintBits &fp)
      : mol_(mol), max_len_(max_len), fp_(fp), on_path_(mol.num_atoms(), 0) { }

  void run() {
    for (int start = 0; start < mol_.num_atoms(); ++start) {
      labels_.assign(1, atom_label(start));
      on_path_[start] = 1;
      extend(start, 0);
      on_path_[start] = 0;
    }
  }

private:
  std::uint64_t atom_label(int i) const {
    const Atom &a = mol_.atom(i);
    return static_cast<std::uint64_t>(a.element) * 2 + (a.aromatic ? 1 : 0);
  }

  void record() {
    std::vector<std::uint64_t> rev(labels_.rbegin(), labels_.rend());
    const auto &seq = std::min(labels_, rev);
    std::vector<std::uint64_t> words { seq.size() };
    words.insert(words.end(), seq.begin(), seq.end());
    fp_.set(hash_words(words) % fp_.length());
  }

  void extend(int u, int bonds) {
    record();
    if (bonds == max_len_)
      return;
    for (int bi: mol_.bonds_of(u)) {
      int v = mol_.bond(bi).other(u);
      if (on_path_[v])
        continue;
      labels_.push_back(static_cast<std::uint64_t>(mol_.bond(bi).order));
      labels_.push_back(atom_label(v));
      on_path_[v] = 1;
      extend(v, bonds + 1);
      on_path_[v] = 0;
      labels_.resize(labels_.size() - 2);
    }
  }

  const MoleculeGraph &mol_;
  int max_len_;
  FingerprintBits &fp_;
  std::vector<char> on_path_;
  std::vector<std::uint64_t> labels_;
};

}  // namespace

FingerprintBits path_fingerprint(const MoleculeGraph &mol, int max_len,
                                 std::size_t nbits) {
  check_width(nbits);
  if (max_len < 0 || max_len > 7)
    throw std::invalid_argument("path length must be in 0..=7");
  FingerprintBits fp(FingerprintKind::kPath, nbits);
  PathEnumerator(mol, max_len, fp).run();
  return fp;
}

namespace {

constexpr int kH = 1, kB = 5, kC = 6, kN = 7, kO = 8, kF = 9, kP = 15,
              kS = 16, kCl = 17, kBr = 35, kI = 53;

bool is_halogen(int z) {
  return z == kF || z == kCl || z == kBr || z == kI;
}

struct KeyContext {
  const MoleculeGraph &mol;
  RingInfo rings;

  int z(int i) const { return mol.atom(i).element; }
  int h(int i) const { return mol.hydrogen_count(i); }

  int count_if(const std::function<bool(int)> &pred) const {
    int n = 0;
    for (int i = 0; i < mol.num_atoms(); ++i)
      n += pred(i) ? 1 : 0;
    return n;
  }

  bool any_atom(const std::function<bool(int)> &pred) const {
    return count_if(pred) > 0;
  }

  bool any_bond(const std::function<bool(const Bond &)> &pred) const {
    return std::any_of(mol.bonds().begin(), mol.bonds().end(), pred);
  }

  int count_element(int e) const {
    return count_if([&](int i) { return z(i) == e; });
  }

  // Neighbors of i reached through bonds of the given order.
  int count_neighbors(int i, int element, BondOrder order) const {
    int n = 0;
    for (int bi: mol.bonds_of(i)) {
      const Bond &b = mol.bond(bi);
      if (b.order == order && z(b.other(i)) == element)
        ++n;
    }
    return n;
  }

  int heavy_degree(int i) const {
    int n = 0;
    for (int bi: mol.bonds_of(i))
      n += z(mol.bond(bi).other(i)) != kH ? 1 : 0;
    return n;
  }

  bool is_carbonyl_carbon(int i) const {
    return z(i) == kC && count_neighbors(i, kO, BondOrder::kDouble) > 0;
  }

  template <class F>
  bool any_neighbor(int i, F pred) const {
    for (int bi: mol.bonds_of(i)) {
      if (pred(mol.bond(bi).other(i), mol.bond(bi)))
        return true;
    }
    return false;
  }

  // Single-bonded O attached to a carbonyl carbon.
  bool is_acyl_oxygen(int i) const {
    return z(i) == kO && any_neighbor(i, [&](int v, const Bond &b) {
             return b.order == BondOrder::kSingle && is_carbonyl_carbon(v);
           });
  }

  bool is_amide_nitrogen(int i) const {
    return z(i) == kN && any_neighbor(i, [&](int v, const Bond &b) {
             return b.order == BondOrder::kSingle && is_carbonyl_carbon(v);
           });
  }

  bool is_amine(int i, int carbons) const {
    if (z(i) != kN || mol.atom(i).aromatic || mol.atom(i).charge != 0
        || is_amide_nitrogen(i))
      return false;
    for (int bi: mol.bonds_of(i)) {
      const Bond &b = mol.bond(bi);
      if (b.order != BondOrder::kSingle || z(b.other(i)) != kC)
        return false;
    }
    return mol.degree(i) == carbons;
  }

  bool has_ring_size(int lo, int hi) const {
    return std::any_of(
        rings.bond_ring_size.begin(), rings.bond_ring_size.end(),
        [&](int s) { return s >= lo && s <= hi; });
  }

  bool bond_between(int e1, int e2, BondOrder order) const {
    return any_bond([&](const Bond &b) {
      int a = z(b.begin), c = z(b.end);
      return b.order == order && ((a == e1 && c == e2) || (a == e2 && c == e1));
    });
  }
};

using KeyPredicate = bool (*)(const KeyContext &);

struct KeyDef {
  std::string_view name;
  KeyPredicate pred;
};

bool is_other_element(int z) {
  switch (z) {
  case kH:
  case kB:
  case kC:
  case kN:
  case kO:
  case kF:
  case kP:
  case kS:
  case kCl:
  case kBr:
  case kI:
    return false;
  default:
    return true;
  }
}

// Keep in sync with docs/structural_keys.md.
const std::array<KeyDef, kNumStructuralKeys> kKeys = { {
    { "has_carbon", [](const KeyContext &c) { return c.count_element(kC) > 0; } },
    { "has_nitrogen", [](const KeyContext &c) { return c.count_element(kN) > 0; } },
    { "has_oxygen", [](const KeyContext &c) { return c.count_element(kO) > 0; } },
    { "has_sulfur", [](const KeyContext &c) { return c.count_element(kS) > 0; } },
    { "has_phosphorus", [](const KeyContext &c) { return c.count_element(kP) > 0; } },
    { "has_fluorine", [](const KeyContext &c) { return c.count_element(kF) > 0; } },
    { "has_chlorine", [](const KeyContext &c) { return c.count_element(kCl) > 0; } },
    { "has_bromine", [](const KeyContext &c) { return c.count_element(kBr) > 0; } },
    { "has_iodine", [](const KeyContext &c) { return c.count_element(kI) > 0; } },
    { "has_boron", [](const KeyContext &c) { return c.count_element(kB) > 0; } },
    { "has_other_element",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return is_other_element(c.z(i)); });
      } },
    { "has_halogen",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return is_halogen(c.z(i)); });
      } },
    { "positive_charge",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.mol.atom(i).charge > 0; });
      } },
    { "negative_charge",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.mol.atom(i).charge < 0; });
      } },
    { "has_isotope",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.mol.atom(i).isotope.has_value(); });
      } },
    { "heavy_atoms_ge_8",
      [](const KeyContext &c) {
        return c.count_if([&](int i) { return c.z(i) != kH; }) >= 8;
      } },
    { "heavy_atoms_ge_16",
      [](const KeyContext &c) {
        return c.count_if([&](int i) { return c.z(i) != kH; }) >= 16;
      } },
    { "carbon_count_ge_6", [](const KeyContext &c) { return c.count_element(kC) >= 6; } },
    { "nitrogen_count_ge_2", [](const KeyContext &c) { return c.count_element(kN) >= 2; } },
    { "oxygen_count_ge_2", [](const KeyContext &c) { return c.count_element(kO) >= 2; } },
    { "oxygen_count_ge_4", [](const KeyContext &c) { return c.count_element(kO) >= 4; } },
    { "halogen_count_ge_2",
      [](const KeyContext &c) {
        return c.count_if([&](int i) { return is_halogen(c.z(i)); }) >= 2;
      } },
    { "aromatic_atom",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.mol.atom(i).aromatic; });
      } },
    { "aromatic_nitrogen",
      [](const KeyContext &c) {
        return c.any_atom(
            [&](int i) { return c.mol.atom(i).aromatic && c.z(i) == kN; });
      } },
    { "aromatic_oxygen_or_sulfur",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.mol.atom(i).aromatic && (c.z(i) == kO || c.z(i) == kS);
        });
      } },
    { "ring_present", [](const KeyContext &c) { return c.rings.ring_count >= 1; } },
    { "ring_count_ge_2", [](const KeyContext &c) { return c.rings.ring_count >= 2; } },
    { "ring_count_ge_3", [](const KeyContext &c) { return c.rings.ring_count >= 3; } },
    { "ring_size_3", [](const KeyContext &c) { return c.has_ring_size(3, 3); } },
    { "ring_size_4", [](const KeyContext &c) { return c.has_ring_size(4, 4); } },
    { "ring_size_5", [](const KeyContext &c) { return c.has_ring_size(5, 5); } },
    { "ring_size_6", [](const KeyContext &c) { return c.has_ring_size(6, 6); } },
    { "ring_size_ge_7", [](const KeyContext &c) { return c.has_ring_size(7, 1 << 20); } },
    { "fused_ring_atom",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.rings.atom_ring_bonds[i] >= 3; });
      } },
    { "heteroatom_in_ring",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.rings.atom_in_ring(i) && c.z(i) != kC;
        });
      } },
    { "double_bond",
      [](const KeyContext &c) {
        return c.any_bond([](const Bond &b) { return b.order == BondOrder::kDouble; });
      } },
    { "triple_bond",
      [](const KeyContext &c) {
        return c.any_bond([](const Bond &b) { return b.order == BondOrder::kTriple; });
      } },
    { "carbon_carbon_double",
      [](const KeyContext &c) { return c.bond_between(kC, kC, BondOrder::kDouble); } },
    { "carbon_carbon_triple",
      [](const KeyContext &c) { return c.bond_between(kC, kC, BondOrder::kTriple); } },
    { "nitrile",
      [](const KeyContext &c) { return c.bond_between(kC, kN, BondOrder::kTriple); } },
    { "carbonyl",
      [](const KeyContext &c) { return c.bond_between(kC, kO, BondOrder::kDouble); } },
    { "imine",
      [](const KeyContext &c) { return c.bond_between(kC, kN, BondOrder::kDouble); } },
    { "azo",
      [](const KeyContext &c) { return c.bond_between(kN, kN, BondOrder::kDouble); } },
    { "sulfur_oxygen_double",
      [](const KeyContext &c) { return c.bond_between(kS, kO, BondOrder::kDouble); } },
    { "phosphoryl",
      [](const KeyContext &c) { return c.bond_between(kP, kO, BondOrder::kDouble); } },
    { "hydroxyl",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kO && c.h(i) == 1 && c.mol.degree(i) == 1
                 && c.count_neighbors(i, kC, BondOrder::kSingle) == 1;
        });
      } },
    { "carboxylic_acid",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.is_acyl_oxygen(i) && c.h(i) == 1 && c.mol.degree(i) == 1;
        });
      } },
    { "carboxylate",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.is_acyl_oxygen(i) && c.mol.atom(i).charge == -1
                 && c.mol.degree(i) == 1;
        });
      } },
    { "ester",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.is_acyl_oxygen(i) && c.mol.degree(i) == 2
                 && c.count_neighbors(i, kC, BondOrder::kSingle) == 2;
        });
      } },
    { "amide",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.is_amide_nitrogen(i); });
      } },
    { "aldehyde",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.is_carbonyl_carbon(i) && c.h(i) >= 1 && c.mol.degree(i) <= 2
                 && !c.any_neighbor(i, [&](int v, const Bond &) {
                      return c.z(v) == kN
                             || (c.z(v) == kO && c.mol.degree(v) == 1
                                 && c.mol.atom(v).charge == 0 && c.h(v) == 1);
                    });
        });
      } },
    { "ketone",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.is_carbonyl_carbon(i) && c.mol.degree(i) == 3
                 && c.count_neighbors(i, kC, BondOrder::kSingle)
                            + c.count_neighbors(i, kC, BondOrder::kAromatic)
                        == 2;
        });
      } },
    { "ether",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kO && !c.mol.atom(i).aromatic && c.mol.degree(i) == 2
                 && c.count_neighbors(i, kC, BondOrder::kSingle) == 2
                 && !c.is_acyl_oxygen(i);
        });
      } },
    { "primary_amine", [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.is_amine(i, 1); }); } },
    { "secondary_amine", [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.is_amine(i, 2); }); } },
    { "tertiary_amine", [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.is_amine(i, 3); }); } },
    { "nitro",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kN
                 && c.count_neighbors(i, kO, BondOrder::kDouble) >= 1
                 && c.count_neighbors(i, kO, BondOrder::kDouble)
                            + c.count_neighbors(i, kO, BondOrder::kSingle)
                        == 2;
        });
      } },
    { "thiol",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) { return c.z(i) == kS && c.h(i) >= 1; });
      } },
    { "thioether",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kS && !c.mol.atom(i).aromatic && c.mol.degree(i) == 2
                 && c.count_neighbors(i, kC, BondOrder::kSingle) == 2;
        });
      } },
    { "sulfonamide",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kS && c.count_neighbors(i, kO, BondOrder::kDouble) == 2
                 && c.count_neighbors(i, kN, BondOrder::kSingle) >= 1;
        });
      } },
    { "phenol",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kO && c.h(i) == 1 && c.mol.degree(i) == 1
                 && c.any_neighbor(i, [&](int v, const Bond &) {
                      return c.mol.atom(v).aromatic;
                    });
        });
      } },
    { "aromatic_halide",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return is_halogen(c.z(i)) && c.any_neighbor(i, [&](int v, const Bond &) {
                   return c.mol.atom(v).aromatic;
                 });
        });
      } },
    { "methyl",
      [](const KeyContext &c) {
        return c.any_atom([&](int i) {
          return c.z(i) == kC && c.h(i) == 3 && c.heavy_degree(i) == 1;
        });
      } },
    { "quaternary_carbon",
      [](const KeyContext &c) {
        return c.any_atom(
            [&](int i) { return c.z(i) == kC && c.heavy_degree(i) == 4; });
      } },
} };

}  // namespace

const std::array<std::string_view, kNumStructuralKeys> &structural_key_names() {
  static const std::array<std::string_view, kNumStructuralKeys> kNames = [] {
    std::array<std::string_view, kNumStructuralKeys> names;
    for (std::size_t i = 0; i < kNumStructuralKeys; ++i)
      names[i] = kKeys[i].name;
    return names;
  }();
  return kNames;
}

std::size_t structural_key_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumStructuralKeys; ++i) {
    if (kKeys[i].name == name)
      return i;
  }
  throw std::out_of_range("unknown structural key '" + std::string(name) + "'");
}

FingerprintBits structural_keys(const MoleculeGraph &mol) {
  KeyContext ctx { mol, find_rings(mol) };
  FingerprintBits fp(FingerprintKind::kStructuralKeys, kNumStructuralKeys);
  for (std::size_t i = 0; i < kNumStructuralKeys; ++i) {
    if (kKeys[i].pred(ctx))
      fp.set(i);
  }
  return fp;
}

double tanimoto(const FingerprintBits &a, const FingerprintBits &b,
                EmptyTanimoto empty) {
  if (a.kind() != b.kind()) {
    throw FingerprintError(FingerprintError::Kind::kKindMismatch,
                           "cannot compare " + std::string(to_string(a.kind()))
                               + " with " + std::string(to_string(b.kind())));
  }
  if (a.length() != b.length()) {
    throw FingerprintError(FingerprintError::Kind::kLengthMismatch,
                           "fingerprint lengths differ");
  }
  std::size_t both = 0, either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += std::popcount(a.words()[w] & b.words()[w]);
    either += std::popcount(a.words()[w] | b.words()[w]);
  }
  if (either == 0)
    return empty == EmptyTanimoto::kOne ? 1.0 : 0.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

FingerprintBits fingerprint(const MoleculeGraph &mol, FingerprintKind kind) {
  switch (kind) {
  case FingerprintKind::kCircular:
    return circular_fingerprint(mol);
  case FingerprintKind::kPath:
    return path_fingerprint(mol);
  case FingerprintKind::kStructuralKeys:
    return structural_keys(mol);
  }
  throw std::invalid_argument("unknown fingerprint kind");
}

}  // namespace molr

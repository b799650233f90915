//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/element.h"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace molr {
namespace {

constexpr std::array<std::string_view, 119> kSymbols = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

constexpr int kValH[] = {1};
constexpr int kValB[] = {3};
constexpr int kValC[] = {4};
constexpr int kValN[] = {3, 5};
constexpr int kValO[] = {2};
constexpr int kValP[] = {3, 5};
constexpr int kValS[] = {2, 4, 6};
constexpr int kValHalogen[] = {1};

std::array<Element, 119> make_table() {
  std::array<Element, 119> table {};
  for (int z = 0; z < 119; ++z) {
    table[z] = Element { z, kSymbols[z], {}, false, false };
  }

  auto set = [&](int z, std::span<const int> val, bool aromatic,
                 bool organic) {
    table[z].valences = val;
    table[z].aromatic_capable = aromatic;
    table[z].organic_subset = organic;
  };
  set(1, kValH, false, false);
  set(5, kValB, true, true);
  set(6, kValC, true, true);
  set(7, kValN, true, true);
  set(8, kValO, true, true);
  set(9, kValHalogen, false, true);
  set(15, kValP, true, true);
  set(16, kValS, true, true);
  set(17, kValHalogen, false, true);
  set(35, kValHalogen, false, true);
  set(53, kValHalogen, false, true);
  return table;
}

const std::array<Element, 119> &table() {
  static const std::array<Element, 119> kTable = make_table();
  return kTable;
}

}  // namespace

const Element *find_element(std::string_view symbol) {
  const auto &t = table();
  auto it = std::find_if(t.begin() + 1, t.end(), [&](const Element &e) {
    return e.symbol == symbol;
  });
  return it == t.end() ? nullptr : &*it;
}

const Element &element_of(int atomic_number) {
  if (atomic_number < 1 || atomic_number > 118)
    throw std::out_of_range("atomic number out of range");
  return table()[atomic_number];
}

int max_valence(const Element &elem) {
  return elem.valences.empty() ? -1 : elem.valences.back();
}

}  // namespace molr

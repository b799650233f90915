//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Helpers shared by the test binaries. Everything here is written from first
// principles and does not call into the code under test except to build
// inputs, so it can serve as an independent reference.

#ifndef MOLR_TESTS_SUPPORT_H_
#define MOLR_TESTS_SUPPORT_H_

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unistd.h>
#include <utility>
#include <vector>

#include "molr/molecule.h"
#include "molr/random.h"
#include "molr/smiles.h"

namespace molr::testing {

inline std::filesystem::path fixture(std::string_view name) {
  return std::filesystem::path(MOLR_FIXTURE_DIR) / std::string(name);
}

inline std::string slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Corpus entries of fixtures/molecules.smi: (smiles, name).
inline std::vector<std::pair<std::string, std::string>> fixture_molecules() {
  std::vector<std::pair<std::string, std::string>> out;
  std::ifstream in(fixture("molecules.smi"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream fields(line);
    std::string smiles, name;
    fields >> smiles;
    std::getline(fields, name);
    out.emplace_back(smiles, name);
  }
  return out;
}

// Fresh scratch directory, removed on destruction.
class TempDir {
public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "molr_test_XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const {
    return path_ / std::string(name);
  }

private:
  std::filesystem::path path_;
};

struct ProcessResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command and captures standard output. Standard error is left
// alone unless the command redirects it.
inline ProcessResult run_command(const std::string &command) {
  ProcessResult result;
  FILE *pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr)
    return result;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    result.out.append(buf.data(), n);
  int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c: s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

// Same molecule with atoms renumbered by `perm` (old index -> new index) and
// bonds listed in a shuffled order.
inline MoleculeGraph permuted_graph(const MoleculeGraph &mol,
                                    const std::vector<int> &perm, Rng &rng) {
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    inverse[perm[i]] = static_cast<int>(i);
  MoleculeGraph out;
  for (int fresh = 0; fresh < mol.num_atoms(); ++fresh) {
    Atom a = mol.atom(inverse[fresh]);
    a.index = fresh;
    out.add_atom(a);
  }
  std::vector<Bond> bonds = mol.bonds();
  rng.shuffle(std::span<Bond>(bonds));
  for (const Bond &b: bonds) {
    if (rng.uniform_index(2) == 0)
      out.add_bond(perm[b.begin], perm[b.end], b.order);
    else
      out.add_bond(perm[b.end], perm[b.begin], b.order);
  }
  return out;
}

inline std::vector<int> random_permutation(int n, Rng &rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  return perm;
}

// A random but valid SMILES rendering: a shuffled graph written with a random
// visiting priority.
inline std::string random_rendering(const MoleculeGraph &mol, Rng &rng) {
  MoleculeGraph shuffled =
      permuted_graph(mol, random_permutation(mol.num_atoms(), rng), rng);
  std::vector<int> priority = random_permutation(mol.num_atoms(), rng);
  return write_smiles(shuffled, priority);
}

inline auto atom_label(const MoleculeGraph &m, int i) {
  const Atom &a = m.atom(i);
  return std::make_tuple(a.element, a.charge, a.isotope.value_or(0),
                         a.aromatic, m.hydrogen_count(i), m.degree(i));
}

// Brute-force labeled graph isomorphism by backtracking over atom
// assignments. Meant for small molecules only.
inline bool isomorphic(const MoleculeGraph &a, const MoleculeGraph &b) {
  const int n = a.num_atoms();
  if (n != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  std::vector<int> map(n, -1);
  std::vector<bool> used(n, false);
  std::function<bool(int)> extend = [&](int i) {
    if (i == n)
      return true;
    for (int j = 0; j < n; ++j) {
      if (used[j] || atom_label(a, i) != atom_label(b, j))
        continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) {
        int ab = a.find_bond(i, k);
        int bb = b.find_bond(j, map[k]);
        if ((ab < 0) != (bb < 0))
          ok = false;
        else if (ab >= 0 && a.bond(ab).order != b.bond(bb).order)
          ok = false;
      }
      if (!ok)
        continue;
      map[i] = j;
      used[j] = true;
      if (extend(i + 1))
        return true;
      used[j] = false;
      map[i] = -1;
    }
    return false;
  };
  return extend(0);
}

// Edit distance by the textbook recursion, memoised over suffix positions.
inline int levenshtein_recursive(std::string_view a, std::string_view b) {
  std::vector<std::vector<int>> memo(a.size() + 1,
                                     std::vector<int>(b.size() + 1, -1));
  std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i,
                                                        std::size_t j) {
    if (i == a.size())
      return static_cast<int>(b.size() - j);
    if (j == b.size())
      return static_cast<int>(a.size() - i);
    int &m = memo[i][j];
    if (m >= 0)
      return m;
    m = std::min({ go(i + 1, j) + 1, go(i, j + 1) + 1,
                   go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1) });
    return m;
  };
  return go(0, 0);
}

}  // namespace molr::testing

#endif  // MOLR_TESTS_SUPPORT_H_

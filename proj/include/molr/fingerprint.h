//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_FINGERPRINT_H_
#define MOLR_FINGERPRINT_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molr/molecule.h"

namespace molr {

enum class FingerprintKind {
  kCircular,
  kPath,
  kStructuralKeys,
};

std::string_view to_string(FingerprintKind kind);
// Accepts "circular", "path", "keys". Throws std::invalid_argument.
FingerprintKind fingerprint_kind_from_string(std::string_view name);

class FingerprintError: public std::invalid_argument {
public:
  enum class Kind {
    kInvalidRadius,
    kInvalidWidth,
    kKindMismatch,
    kLengthMismatch,
  };

  FingerprintError(Kind kind, const std::string &msg)
      : std::invalid_argument(msg), kind_(kind) { }

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class FingerprintBits {
public:
  FingerprintBits(FingerprintKind kind, std::size_t length);

  FingerprintKind kind() const { return kind_; }
  std::size_t length() const { return length_; }

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t { 1 } << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  std::size_t popcount() const;
  const std::vector<std::uint64_t> &words() const { return words_; }

  // Set-bit indices in ascending order.
  std::vector<std::size_t> on_bits() const;

  bool operator==(const FingerprintBits &other) const = default;

private:
  FingerprintKind kind_;
  std::size_t length_;
  std::vector<std::uint64_t> words_;
};

inline constexpr int kDefaultRadius = 2;
inline constexpr std::size_t kDefaultWidth = 2048;
inline constexpr int kDefaultMaxPathLength = 7;

// Per-atom circular identifiers; result[r][atom] for r in 0..=radius. Round 0
// hashes (atomic number, degree, hydrogens, charge, isotope, aromatic, in
// ring); round r hashes (r, previous id, sorted (bond order, neighbor previous
// id) pairs).
std::vector<std::vector<std::uint64_t>>
circular_atom_ids(const MoleculeGraph &mol, int radius);

// Throws InvalidRadius for radius outside 0..=6 and InvalidWidth unless nbits
// is a power of two.
FingerprintBits circular_fingerprint(const MoleculeGraph &mol,
                                     int radius = kDefaultRadius,
                                     std::size_t nbits = kDefaultWidth);

// Hash of every simple path with 0..=max_len bonds, each path read in the
// direction with the lexicographically smaller (atom, bond, atom, ...) label
// sequence. Throws InvalidWidth; max_len must lie in 0..=7.
FingerprintBits path_fingerprint(const MoleculeGraph &mol,
                                 int max_len = kDefaultMaxPathLength,
                                 std::size_t nbits = kDefaultWidth);

inline constexpr std::size_t kNumStructuralKeys = 64;

// Names of the structural keys, indexed by bit. See docs/structural_keys.md.
const std::array<std::string_view, kNumStructuralKeys> &structural_key_names();

// Returns the bit index of a key name, or throws std::out_of_range.
std::size_t structural_key_index(std::string_view name);

FingerprintBits structural_keys(const MoleculeGraph &mol);

// Value returned when both fingerprints have no bits set.
enum class EmptyTanimoto {
  kOne,
  kZero,
};

// |a & b| / |a | b|. Throws KindMismatch or LengthMismatch.
double tanimoto(const FingerprintBits &a, const FingerprintBits &b,
                EmptyTanimoto empty = EmptyTanimoto::kOne);

FingerprintBits fingerprint(const MoleculeGraph &mol, FingerprintKind kind);

}  // namespace molr

#endif  // MOLR_FINGERPRINT_H_

//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molr/smiles.h"

namespace molr {

std::string_view to_string(SmilesErrorKind kind) {
  switch (kind) {
  case SmilesErrorKind::kEmptyInput:
    return "EmptyInput";
  case SmilesErrorKind::kUnbalancedParenthesis:
    return "UnbalancedParenthesis";
  case SmilesErrorKind::kUnmatchedRingClosure:
    return "UnmatchedRingClosure";
  case SmilesErrorKind::kUnknownElement:
    return "UnknownElement";
  case SmilesErrorKind::kMalformedBracketAtom:
    return "MalformedBracketAtom";
  case SmilesErrorKind::kUnexpectedCharacter:
    return "UnexpectedCharacter";
  case SmilesErrorKind::kInvalidBond:
    return "InvalidBond";
  }
  return "Unknown";
}

SmilesError::SmilesError(SmilesErrorKind kind, std::size_t offset,
                         const std::string &msg)
    : std::runtime_error(std::string(to_string(kind)) + " at offset "
                         + std::to_string(offset) + ": " + msg),
      kind_(kind), offset_(offset) { }

namespace {

bool is_lower(char c) {
  return c >= 'a' && c <= 'z';
}

bool is_upper(char c) {
  return c >= 'A' && c <= 'Z';
}

bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

struct PendingBond {
  BondOrder order;
  std::size_t offset;
};

struct RingOpening {
  int atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

class Parser {
public:
  explicit Parser(std::string_view text): text_(text), mol_(std::string(text)) {
  }

  MoleculeGraph run() {
    if (text_.empty())
      fail(SmilesErrorKind::kEmptyInput, 0, "empty SMILES");

    while (pos_ < text_.size()) {
      char c = text_[pos_];
      switch (c) {
      case '(':
        open_branch();
        break;
      case ')':
        close_branch();
        break;
      case '-':
      case '=':
      case '#':
      case ':':
      case '/':
      case '\\':
        read_bond();
        break;
      case '.':
        read_dot();
        break;
      case '[':
        read_bracket_atom();
        break;
      case '%':
        read_ring_number();
        break;
      default:
        if (is_digit(c)) {
          ring_bond(c - '0', pos_);
          ++pos_;
        } else {
          read_organic_atom();
        }
        break;
      }
    }

    if (pending_) {
      fail(SmilesErrorKind::kUnexpectedCharacter, pending_->offset,
           "bond without a following atom");
    }
    if (prev_ < 0) {
      fail(SmilesErrorKind::kUnexpectedCharacter, text_.size() - 1,
           "'.' without a following atom");
    }
    if (!rings_.empty()) {
      const auto &[num, open] = *rings_.begin();
      fail(SmilesErrorKind::kUnmatchedRingClosure, open.offset,
           "ring closure " + std::to_string(num) + " is never closed");
    }
    if (!branches_.empty()) {
      fail(SmilesErrorKind::kUnbalancedParenthesis, text_.size(),
           "unclosed branch");
    }

    mol_.set_stereo_dropped(stereo_);
    return std::move(mol_);
  }

private:
  [[noreturn]] void fail(SmilesErrorKind kind, std::size_t offset,
                         const std::string &msg) const {
    throw SmilesError(kind, offset, msg);
  }

  void open_branch() {
    if (prev_ < 0)
      fail(SmilesErrorKind::kUnexpectedCharacter, pos_, "branch without atom");
    if (pending_) {
      fail(SmilesErrorKind::kUnexpectedCharacter, pos_,
           "bond before branch opening");
    }
    branches_.push_back({ prev_, pos_ });
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty()) {
      fail(SmilesErrorKind::kUnbalancedParenthesis, pos_,
           "unmatched closing parenthesis");
    }
    if (pending_) {
      fail(SmilesErrorKind::kUnexpectedCharacter, pending_->offset,
           "bond before branch closing");
    }
    if (branches_.back().first_atom < 0)
      fail(SmilesErrorKind::kUnexpectedCharacter, pos_, "empty branch");
    prev_ = branches_.back().atom;
    branches_.pop_back();
    ++pos_;
  }

  struct Branch {
    int atom;
    std::size_t offset;
    int first_atom = -1;
  };

  void read_bond() {
    if (pending_)
      fail(SmilesErrorKind::kUnexpectedCharacter, pos_, "consecutive bonds");
    if (prev_ < 0)
      fail(SmilesErrorKind::kUnexpectedCharacter, pos_, "bond without atom");

    BondOrder order = BondOrder::kSingle;
    switch (text_[pos_]) {
    case '=':
      order = BondOrder::kDouble;
      break;
    case '#':
      order = BondOrder::kTriple;
      break;
    case ':':
      order = BondOrder::kAromatic;
      break;
    case '/':
    case '\\':
      stereo_ = true;
      break;
    default:
      break;
    }
    pending_ = PendingBond { order, pos_ };
    ++pos_;
  }

  void read_dot() {
    if (prev_ < 0 || pending_)
      fail(SmilesErrorKind::kUnexpectedCharacter, pos_, "misplaced '.'");
    prev_ = -1;
    ++pos_;
  }

  void read_ring_number() {
    std::size_t start = pos_;
    if (pos_ + 2 >= text_.size() || !is_digit(text_[pos_ + 1])
        || !is_digit(text_[pos_ + 2])) {
      fail(SmilesErrorKind::kUnexpectedCharacter, start,
           "'%' must be followed by two digits");
    }
    int num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    pos_ += 3;
    ring_bond(num, start);
  }

  void ring_bond(int num, std::size_t offset) {
    if (prev_ < 0) {
      fail(SmilesErrorKind::kUnexpectedCharacter, offset,
           "ring closure without atom");
    }

    std::optional<BondOrder> order;
    if (pending_)
      order = pending_->order;
    pending_.reset();

    auto it = rings_.find(num);
    if (it == rings_.end()) {
      rings_.emplace(num, RingOpening { prev_, order, offset });
      return;
    }

    RingOpening open = it->second;
    rings_.erase(it);
    if (open.order && order && *open.order != *order) {
      fail(SmilesErrorKind::kInvalidBond, offset,
           "conflicting bond orders on ring closure " + std::to_string(num));
    }
    if (!order)
      order = open.order;
    connect(open.atom, prev_, order, offset);
  }

  void connect(int a, int b, std::optional<BondOrder> order,
               std::size_t offset) {
    BondOrder o;
    if (order) {
      o = *order;
    } else {
      o = mol_.atom(a).aromatic && mol_.atom(b).aromatic ? BondOrder::kAromatic
                                                         : BondOrder::kSingle;
    }
    try {
      mol_.add_bond(a, b, o);
    } catch (const GraphError &e) {
      fail(SmilesErrorKind::kInvalidBond, offset, e.what());
    }
  }

  void attach(Atom atom, std::size_t offset) {
    int idx;
    try {
      idx = mol_.add_atom(std::move(atom));
    } catch (const GraphError &e) {
      fail(SmilesErrorKind::kUnknownElement, offset, e.what());
    }

    if (!branches_.empty() && branches_.back().first_atom < 0)
      branches_.back().first_atom = idx;

    if (prev_ >= 0) {
      std::optional<BondOrder> order;
      if (pending_)
        order = pending_->order;
      connect(prev_, idx, order, offset);
    } else if (pending_) {
      fail(SmilesErrorKind::kUnexpectedCharacter, pending_->offset,
           "bond without preceding atom");
    }
    pending_.reset();
    prev_ = idx;
  }

  void read_organic_atom() {
    std::size_t start = pos_;
    char c = text_[pos_];
    Atom atom;
    std::string_view sym;

    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      sym = "Cl";
    } else if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      sym = "Br";
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      sym = text_.substr(pos_, 1);
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      atom.aromatic = true;
      sym = text_.substr(pos_, 1);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
      fail(SmilesErrorKind::kUnknownElement, start,
           std::string("unknown organic-subset element '") + c + "'");
    } else {
      fail(SmilesErrorKind::kUnexpectedCharacter, start,
           std::string("unexpected character '") + c + "'");
    }

    std::string upper(sym);
    upper[0] = static_cast<char>(std::toupper(upper[0]));
    atom.element = find_element(upper)->atomic_number;
    pos_ += sym.size();
    attach(std::move(atom), start);
  }

  void read_bracket_atom() {
    std::size_t start = pos_;
    std::size_t close = text_.find(']', pos_);
    if (close == std::string_view::npos) {
      fail(SmilesErrorKind::kMalformedBracketAtom, start,
           "unterminated bracket atom");
    }
    ++pos_;

    Atom atom;
    atom.explicit_h = 0;

    // isotope
    if (pos_ < close && is_digit(text_[pos_])) {
      int iso = 0;
      while (pos_ < close && is_digit(text_[pos_])) {
        iso = iso * 10 + (text_[pos_] - '0');
        if (iso > 999) {
          fail(SmilesErrorKind::kMalformedBracketAtom, pos_,
               "isotope out of range");
        }
        ++pos_;
      }
      if (iso == 0) {
        fail(SmilesErrorKind::kMalformedBracketAtom, start + 1,
             "isotope must be positive");
      }
      atom.isotope = iso;
    }

    // element symbol
    if (pos_ >= close) {
      fail(SmilesErrorKind::kMalformedBracketAtom, pos_,
           "missing element symbol");
    }
    std::size_t sym_start = pos_;
    const Element *elem = nullptr;
    if (is_upper(text_[pos_])) {
      if (pos_ + 1 < close && is_lower(text_[pos_ + 1]))
        elem = find_element(text_.substr(pos_, 2));
      if (elem != nullptr) {
        pos_ += 2;
      } else {
        elem = find_element(text_.substr(pos_, 1));
        ++pos_;
      }
    } else if (is_lower(text_[pos_])
               && std::string_view("bcnops").find(text_[pos_])
                      != std::string_view::npos) {
      std::string upper(1, static_cast<char>(std::toupper(text_[pos_])));
      elem = find_element(upper);
      atom.aromatic = true;
      ++pos_;
    } else if (text_[pos_] == '*') {
      fail(SmilesErrorKind::kUnknownElement, pos_,
           "wildcard atoms are not supported");
    }
    if (elem == nullptr) {
      fail(SmilesErrorKind::kUnknownElement, sym_start,
           "unknown element symbol");
    }
    atom.element = elem->atomic_number;

    // chirality
    if (pos_ < close && text_[pos_] == '@') {
      stereo_ = true;
      ++pos_;
      if (pos_ < close && text_[pos_] == '@') {
        ++pos_;
      } else if (pos_ + 1 < close && is_upper(text_[pos_])
                 && is_upper(text_[pos_ + 1])) {
        pos_ += 2;
        while (pos_ < close && is_digit(text_[pos_]))
          ++pos_;
      }
    }

    // hydrogen count
    if (pos_ < close && text_[pos_] == 'H') {
      ++pos_;
      int h = 1;
      if (pos_ < close && is_digit(text_[pos_])) {
        h = text_[pos_] - '0';
        ++pos_;
      }
      atom.explicit_h = h;
    }

    // charge
    if (pos_ < close && (text_[pos_] == '+' || text_[pos_] == '-')) {
      char sign = text_[pos_];
      int mag = 1;
      ++pos_;
      if (pos_ < close && is_digit(text_[pos_])) {
        mag = 0;
        while (pos_ < close && is_digit(text_[pos_])) {
          mag = mag * 10 + (text_[pos_] - '0');
          ++pos_;
        }
      } else {
        while (pos_ < close && text_[pos_] == sign) {
          ++mag;
          ++pos_;
        }
      }
      if (mag > 15) {
        fail(SmilesErrorKind::kMalformedBracketAtom, pos_,
             "charge out of range");
      }
      atom.charge = sign == '+' ? mag : -mag;
    }

    // atom class, ignored
    if (pos_ < close && text_[pos_] == ':') {
      ++pos_;
      if (pos_ >= close || !is_digit(text_[pos_])) {
        fail(SmilesErrorKind::kMalformedBracketAtom, pos_,
             "atom class requires digits");
      }
      while (pos_ < close && is_digit(text_[pos_]))
        ++pos_;
    }

    if (pos_ != close) {
      fail(SmilesErrorKind::kMalformedBracketAtom, pos_,
           "unexpected content in bracket atom");
    }
    pos_ = close + 1;
    if (atom.aromatic && !elem->aromatic_capable) {
      fail(SmilesErrorKind::kMalformedBracketAtom, sym_start,
           "element cannot be aromatic");
    }
    attach(std::move(atom), start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MoleculeGraph mol_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<Branch> branches_;
  std::map<int, RingOpening> rings_;
  bool stereo_ = false;
};

}  // namespace

MoleculeGraph parse_smiles(std::string_view text) {
  return Parser(text).run();
}

}  // namespace molr

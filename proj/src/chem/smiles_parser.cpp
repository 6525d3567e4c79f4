#include <cctype>
#include <map>
#include <optional>

#include "molex/chem/elements.hpp"
#include "molex/chem/smiles.hpp"

namespace molex::chem {
namespace {

struct PendingBond {
  std::optional<BondOrder> order;
  BondStereo stereo = BondStereo::None;
  int offset = -1;
  bool set() const { return offset >= 0; }
};

struct RingOpen {
  int atom;
  PendingBond bond;
  int offset;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  MolGraph run() {
    skip_trailing();
    if (end_ == 0) throw SmilesError("empty SMILES", 0);
    int prev = -1;
    PendingBond pending;
    std::vector<std::pair<int, int>> branches;  // (atom, offset of '(')
    while (pos_ < end_) {
      const char c = s_[pos_];
      const int here = static_cast<int>(pos_);
      if (c == '(') {
        if (prev < 0) throw SmilesError("branch without a preceding atom", here);
        if (pending.set()) throw SmilesError("bond symbol before branch", pending.offset);
        branches.emplace_back(prev, here);
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) throw SmilesError("unbalanced parentheses", here);
        if (pending.set()) throw SmilesError("dangling bond symbol", pending.offset);
        prev = branches.back().first;
        branches.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\' || c == '$') {
        if (pending.set()) throw SmilesError("two consecutive bond symbols", here);
        if (prev < 0) throw SmilesError("bond symbol without a preceding atom", here);
        pending = bond_symbol(c, here);
        ++pos_;
      } else if (c == '.') {
        if (pending.set()) throw SmilesError("bond symbol before '.'", pending.offset);
        prev = -1;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (prev < 0) throw SmilesError("ring-closure digit without a preceding atom", here);
        int number = ring_number();
        auto it = open_rings_.find(number);
        if (it == open_rings_.end()) {
          open_rings_.emplace(number, RingOpen{prev, pending, here});
        } else {
          RingOpen open = it->second;
          open_rings_.erase(it);
          if (open.atom == prev) throw SmilesError("ring closure to the same atom", here);
          PendingBond use = pending.set() ? pending : open.bond;
          if (pending.set() && open.bond.set() && pending.order != open.bond.order)
            throw SmilesError("conflicting ring-closure bond symbols", here);
          add_bond(open.atom, prev, use, here);
        }
        pending = {};
      } else if (c == '[' || std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
        const int atom = c == '[' ? bracket_atom() : organic_atom();
        if (prev >= 0) add_bond(prev, atom, pending, here);
        else if (pending.set()) throw SmilesError("bond symbol without a preceding atom", pending.offset);
        pending = {};
        prev = atom;
      } else {
        throw SmilesError(std::string("unexpected character '") + c + "'", here);
      }
    }
    if (pending.set()) throw SmilesError("dangling bond symbol", pending.offset);
    if (!branches.empty()) throw SmilesError("unbalanced parentheses", branches.back().second);
    if (!open_rings_.empty()) {
      const auto& [number, open] = *open_rings_.begin();
      int first_offset = open.offset;
      int first_number = number;
      for (const auto& [n, o] : open_rings_) {
        if (o.offset < first_offset) {
          first_offset = o.offset;
          first_number = n;
        }
      }
      throw SmilesError("unmatched ring-closure digit " + std::to_string(first_number), first_offset);
    }
    return MolGraph::build(std::move(atoms_), std::move(bonds_), std::string(s_), offsets_);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<int> offsets_;
  std::map<int, RingOpen> open_rings_;

  void skip_trailing() {
    std::size_t start = 0;
    while (start < s_.size() && std::isspace(static_cast<unsigned char>(s_[start]))) ++start;
    if (start > 0) throw SmilesError(start == s_.size() ? "empty SMILES" : "leading whitespace", 0);
    end_ = s_.size();
    while (end_ > 0 && std::isspace(static_cast<unsigned char>(s_[end_ - 1]))) --end_;
    for (std::size_t i = 0; i < end_; ++i) {
      if (std::isspace(static_cast<unsigned char>(s_[i])))
        throw SmilesError("whitespace inside SMILES", static_cast<int>(i));
    }
  }

  PendingBond bond_symbol(char c, int offset) {
    PendingBond b;
    b.offset = offset;
    switch (c) {
      case '-': b.order = BondOrder::Single; break;
      case '=': b.order = BondOrder::Double; break;
      case '#': b.order = BondOrder::Triple; break;
      case ':': b.order = BondOrder::Aromatic; break;
      // Directional bonds keep the implicit order (aromatic between aromatic atoms).
      case '/': b.stereo = BondStereo::Up; break;
      case '\\': b.stereo = BondStereo::Down; break;
      default: throw SmilesError("quadruple bonds are not supported", offset);
    }
    return b;
  }

  int ring_number() {
    if (s_[pos_] == '%') {
      if (pos_ + 2 >= end_ || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2])))
        throw SmilesError("malformed %nn ring closure", static_cast<int>(pos_));
      int n = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
      pos_ += 3;
      return n;
    }
    return s_[pos_++] - '0';
  }

  void add_bond(int a, int b, const PendingBond& pending, int offset) {
    for (const auto& existing : bonds_) {
      if ((existing.a == a && existing.b == b) || (existing.a == b && existing.b == a))
        throw SmilesError("duplicate bond between atoms", offset);
    }
    Bond bond{a, b, BondOrder::Single, pending.stereo};
    if (pending.order) bond.order = *pending.order;
    else if (atoms_[a].aromatic && atoms_[b].aromatic) bond.order = BondOrder::Aromatic;
    bonds_.push_back(bond);
  }

  int push_atom(Atom atom, int offset) {
    atoms_.push_back(atom);
    offsets_.push_back(offset);
    return static_cast<int>(atoms_.size()) - 1;
  }

  int organic_atom() {
    const int here = static_cast<int>(pos_);
    Atom atom;
    const char c = s_[pos_];
    auto next_is = [&](char n) { return pos_ + 1 < end_ && s_[pos_ + 1] == n; };
    if (c == 'C' && next_is('l')) {
      atom.element = kChlorine;
      pos_ += 2;
    } else if (c == 'B' && next_is('r')) {
      atom.element = kBromine;
      pos_ += 2;
    } else {
      switch (c) {
        case '*': atom.element = 0; break;
        case 'B': atom.element = kBoron; break;
        case 'C': atom.element = kCarbon; break;
        case 'N': atom.element = kNitrogen; break;
        case 'O': atom.element = kOxygen; break;
        case 'P': atom.element = kPhosphorus; break;
        case 'S': atom.element = kSulfur; break;
        case 'F': atom.element = kFluorine; break;
        case 'I': atom.element = kIodine; break;
        case 'b': atom.element = kBoron; atom.aromatic = true; break;
        case 'c': atom.element = kCarbon; atom.aromatic = true; break;
        case 'n': atom.element = kNitrogen; atom.aromatic = true; break;
        case 'o': atom.element = kOxygen; atom.aromatic = true; break;
        case 'p': atom.element = kPhosphorus; atom.aromatic = true; break;
        case 's': atom.element = kSulfur; atom.aromatic = true; break;
        default: throw SmilesError(std::string("unknown element symbol '") + c + "'", here);
      }
      ++pos_;
    }
    return push_atom(atom, here);
  }

  int read_int() {
    int v = 0;
    bool any = false;
    while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      any = true;
      if (v > 100000) throw SmilesError("number too large", static_cast<int>(pos_));
    }
    return any ? v : -1;
  }

  int bracket_atom() {
    const int open = static_cast<int>(pos_);
    ++pos_;
    auto expect_more = [&]() {
      if (pos_ >= end_) throw SmilesError("unterminated bracket atom", open);
    };
    Atom atom;
    atom.bracket = true;
    atom.explicit_h = 0;
    expect_more();
    if (int iso = read_int(); iso >= 0) atom.isotope = iso;
    expect_more();
    const int sym_at = static_cast<int>(pos_);
    if (s_[pos_] == '*') {
      atom.element = 0;
      ++pos_;
    } else if (std::islower(static_cast<unsigned char>(s_[pos_]))) {
      // aromatic symbols: b c n o p s se as te
      std::string two(s_.substr(pos_, std::min<std::size_t>(2, end_ - pos_)));
      if (two == "se" || two == "as" || two == "te") {
        two[0] = static_cast<char>(std::toupper(two[0]));
        atom.element = atomic_number(two);
        pos_ += 2;
      } else {
        std::string one(1, static_cast<char>(std::toupper(s_[pos_])));
        atom.element = atomic_number(one);
        if (atom.element < 0 || !aromatic_symbol_allowed(atom.element))
          throw SmilesError("unknown element symbol '" + std::string(1, s_[pos_]) + "'", sym_at);
        ++pos_;
      }
      atom.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(s_[pos_]))) {
      int z = -1;
      if (pos_ + 1 < end_ && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        z = atomic_number(s_.substr(pos_, 2));
        if (z >= 0) pos_ += 2;
      }
      if (z < 0) {
        z = atomic_number(s_.substr(pos_, 1));
        if (z < 0) throw SmilesError("unknown element symbol '" + std::string(s_.substr(pos_, 2)) + "'", sym_at);
        ++pos_;
      }
      atom.element = z;
    } else {
      throw SmilesError("missing element symbol in bracket atom", sym_at);
    }
    expect_more();
    if (s_[pos_] == '@') {
      ++pos_;
      atom.chirality = Chirality::CounterClockwise;
      if (pos_ < end_ && s_[pos_] == '@') {
        ++pos_;
        atom.chirality = Chirality::Clockwise;
      } else if (pos_ + 1 < end_ && std::isupper(static_cast<unsigned char>(s_[pos_])) &&
                 std::isupper(static_cast<unsigned char>(s_[pos_ + 1]))) {
        // @TH1, @AL2, @SP3, ... : class and number are accepted and dropped.
        pos_ += 2;
        read_int();
      }
    }
    expect_more();
    if (s_[pos_] == 'H') {
      ++pos_;
      int h = read_int();
      atom.explicit_h = h < 0 ? 1 : h;
    }
    expect_more();
    if (s_[pos_] == '+' || s_[pos_] == '-') {
      const char sign = s_[pos_];
      const int mult = sign == '+' ? 1 : -1;
      ++pos_;
      int n = read_int();
      if (n >= 0) {
        atom.charge = mult * n;
      } else {
        int count = 1;
        while (pos_ < end_ && s_[pos_] == sign) {
          ++count;
          ++pos_;
        }
        atom.charge = mult * count;
      }
    }
    expect_more();
    if (s_[pos_] == ':') {
      ++pos_;
      if (read_int() < 0) throw SmilesError("missing atom class number", static_cast<int>(pos_));
    }
    expect_more();
    if (s_[pos_] != ']') throw SmilesError("unexpected character in bracket atom", static_cast<int>(pos_));
    ++pos_;
    if (atom.element == kHydrogen && atom.explicit_h.value_or(0) > 0 && atom.isotope)
      throw SmilesError("hydrogen with hydrogen count", sym_at);
    return push_atom(atom, open);
  }
};

}  // namespace

MolGraph parse_smiles(std::string_view text) { return Parser(text).run(); }

std::vector<SmilesLine> read_smiles_lines(std::string_view text) {
  std::vector<SmilesLine> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    std::size_t a = 0;
    while (a < line.size() && std::isspace(static_cast<unsigned char>(line[a]))) ++a;
    line.remove_prefix(a);
    std::size_t b = 0;
    while (b < line.size() && !std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    line = line.substr(0, b);
    if (!line.empty() && line.front() != '#') out.push_back({line_no, std::string(line)});
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace molex::chem

#include "molex/chem/query.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "molex/chem/elements.hpp"

namespace molex::chem {

MatchTarget::MatchTarget(const MolGraph& mol, bool expand_hydrogens) {
  const int n = mol.atom_count();
  std::vector<int> h_atoms(n, 0);  // hydrogen atoms already in the graph
  for (int i = 0; i < n; ++i)
    for (const auto& nb : mol.neighbors(i))
      if (mol.atom(nb.atom).element == kHydrogen) ++h_atoms[i];
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    AtomView v{};
    v.element = a.element;
    v.charge = a.charge;
    v.isotope = a.isotope.value_or(0);
    v.aromatic = a.aromatic;
    v.total_h = a.total_h() + h_atoms[i];
    v.degree = a.degree + (expand_hydrogens ? a.total_h() : 0);
    v.connectivity = a.degree + a.total_h();
    v.valence = mol.valence(i);
    v.ring_count = mol.ring_count(i);
    v.smallest_ring = mol.smallest_ring(i);
    v.source = i;
    atoms_.push_back(v);
  }
  for (const auto& b : mol.bonds()) {
    const int idx = static_cast<int>(bonds_.size());
    bonds_.push_back({b.a, b.b, b.order, mol.bond_in_ring(idx)});
  }
  if (expand_hydrogens) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < mol.atom(i).total_h(); ++k) {
        AtomView h{};
        h.element = kHydrogen;
        h.degree = 1;
        h.connectivity = 1;
        h.valence = 1;
        h.source = i;
        const int hi = static_cast<int>(atoms_.size());
        atoms_.push_back(h);
        bonds_.push_back({i, hi, BondOrder::Single, false});
      }
    }
  }
  const int total = atom_count();
  start_.assign(total + 1, 0);
  for (const auto& b : bonds_) {
    ++start_[b.a + 1];
    ++start_[b.b + 1];
  }
  for (int i = 0; i < total; ++i) start_[i + 1] += start_[i];
  adjacency_.resize(bonds_.size() * 2);
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (int bi = 0; bi < static_cast<int>(bonds_.size()); ++bi) {
    adjacency_[fill[bonds_[bi].a]++] = {bonds_[bi].b, bi};
    adjacency_[fill[bonds_[bi].b]++] = {bonds_[bi].a, bi};
  }
}

int MatchTarget::bond_between(int a, int b) const {
  for (const auto& nb : neighbors(a))
    if (nb.atom == b) return nb.bond;
  return -1;
}

namespace {

AtomExpr leaf(AtomPrimitive::Kind kind, int value = 0, int flag = 0) {
  AtomExpr e;
  e.leaf = {kind, value, flag};
  return e;
}

AtomExpr combine(AtomExpr::Op op, AtomExpr l, AtomExpr r) {
  if (l.op == op) {
    l.kids.push_back(std::move(r));
    return l;
  }
  AtomExpr e;
  e.op = op;
  e.kids.push_back(std::move(l));
  e.kids.push_back(std::move(r));
  return e;
}

BondExpr bond_leaf(BondExpr::Prim p) {
  BondExpr e;
  e.leaf = p;
  return e;
}

BondExpr bond_combine(BondExpr::Op op, BondExpr l, BondExpr r) {
  if (l.op == op) {
    l.kids.push_back(std::move(r));
    return l;
  }
  BondExpr e;
  e.op = op;
  e.kids.push_back(std::move(l));
  e.kids.push_back(std::move(r));
  return e;
}

bool is_bond_char(char c) {
  return c == '-' || c == '=' || c == '#' || c == ':' || c == '~' || c == '@' || c == '/' || c == '\\' || c == '!' ||
         c == '&' || c == ',' || c == ';';
}

}  // namespace

class SmartsParser {
 public:
  SmartsParser(std::string_view s, int base) : s_(s), base_(base) {}

  Pattern run() {
    if (s_.empty()) throw SmilesError("empty pattern", base_);
    Pattern p;
    p.text_ = std::string(s_);
    pat_ = &p;
    int prev = -1;
    std::optional<BondExpr> pending;
    std::vector<int> stack;
    std::map<int, std::pair<int, std::optional<BondExpr>>> rings;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') {
        if (prev < 0) fail("branch without a preceding atom");
        stack.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (stack.empty()) fail("unbalanced parentheses");
        prev = stack.back();
        stack.pop_back();
        ++pos_;
      } else if (c == '.') {
        prev = -1;
        ++pos_;
      } else if (is_bond_char(c)) {
        pending = parse_bond();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (prev < 0) fail("ring closure without a preceding atom");
        int num;
        if (c == '%') {
          if (pos_ + 2 >= s_.size()) fail("malformed ring closure");
          num = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
          pos_ += 3;
        } else {
          num = c - '0';
          ++pos_;
        }
        auto it = rings.find(num);
        if (it == rings.end()) {
          rings[num] = {prev, pending};
        } else {
          BondExpr e = pending ? *pending : it->second.second ? *it->second.second : bond_leaf(BondExpr::Prim::SingleOrAromatic);
          p.bonds.push_back({it->second.first, prev, std::move(e)});
          rings.erase(it);
        }
        pending.reset();
      } else {
        const int atom = parse_atom();
        if (prev >= 0) p.bonds.push_back({prev, atom, pending ? *pending : bond_leaf(BondExpr::Prim::SingleOrAromatic)});
        pending.reset();
        prev = atom;
      }
    }
    if (!stack.empty()) fail("unbalanced parentheses");
    if (!rings.empty()) fail("unmatched ring closure");
    if (pending) fail("dangling bond");
    p.finalize();
    return p;
  }

 private:
  std::string_view s_;
  int base_;
  std::size_t pos_ = 0;
  Pattern* pat_ = nullptr;

  [[noreturn]] void fail(const std::string& what) const {
    throw SmilesError("pattern: " + what, base_ + static_cast<int>(pos_));
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  int read_number(int fallback) {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) return fallback;
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (s_[pos_++] - '0');
    return v;
  }

  int add_atom(AtomExpr e) {
    pat_->atoms.push_back(std::move(e));
    return pat_->atom_count() - 1;
  }

  int parse_atom() {
    const char c = s_[pos_];
    if (c == '[') {
      ++pos_;
      AtomExpr e = parse_low();
      if (peek() != ']') fail("expected ']'");
      ++pos_;
      return add_atom(std::move(e));
    }
    using K = AtomPrimitive::Kind;
    auto two = s_.substr(pos_, 2);
    if (two == "Cl" || two == "Br") {
      pos_ += 2;
      return add_atom(leaf(K::Element, two == "Cl" ? kChlorine : kBromine, 0));
    }
    ++pos_;
    switch (c) {
      case '*': return add_atom(leaf(K::Any));
      case 'A': return add_atom(leaf(K::Aliphatic));
      case 'a': return add_atom(leaf(K::Aromatic));
      case 'B': return add_atom(leaf(K::Element, kBoron, 0));
      case 'C': return add_atom(leaf(K::Element, kCarbon, 0));
      case 'N': return add_atom(leaf(K::Element, kNitrogen, 0));
      case 'O': return add_atom(leaf(K::Element, kOxygen, 0));
      case 'P': return add_atom(leaf(K::Element, kPhosphorus, 0));
      case 'S': return add_atom(leaf(K::Element, kSulfur, 0));
      case 'F': return add_atom(leaf(K::Element, kFluorine, 0));
      case 'I': return add_atom(leaf(K::Element, kIodine, 0));
      case 'b': return add_atom(leaf(K::Element, kBoron, 1));
      case 'c': return add_atom(leaf(K::Element, kCarbon, 1));
      case 'n': return add_atom(leaf(K::Element, kNitrogen, 1));
      case 'o': return add_atom(leaf(K::Element, kOxygen, 1));
      case 'p': return add_atom(leaf(K::Element, kPhosphorus, 1));
      case 's': return add_atom(leaf(K::Element, kSulfur, 1));
      default: --pos_; fail(std::string("unexpected character '") + c + "'");
    }
  }

  AtomExpr parse_low() {
    AtomExpr e = parse_or();
    while (peek() == ';') {
      ++pos_;
      e = combine(AtomExpr::Op::And, std::move(e), parse_or());
    }
    return e;
  }

  AtomExpr parse_or() {
    AtomExpr e = parse_and();
    while (peek() == ',') {
      ++pos_;
      e = combine(AtomExpr::Op::Or, std::move(e), parse_and());
    }
    return e;
  }

  AtomExpr parse_and() {
    AtomExpr e = parse_not(true);
    while (true) {
      char c = peek();
      if (c == '&') {
        ++pos_;
      } else if (c == ',' || c == ';' || c == ']' || c == '\0') {
        break;
      }
      e = combine(AtomExpr::Op::And, std::move(e), parse_not(false));
    }
    return e;
  }

  AtomExpr parse_not(bool first) {
    if (peek() == '!') {
      ++pos_;
      AtomExpr e;
      e.op = AtomExpr::Op::Not;
      e.kids.push_back(parse_not(false));
      return e;
    }
    return parse_primitive(first);
  }

  AtomExpr parse_primitive(bool first) {
    using K = AtomPrimitive::Kind;
    const char c = peek();
    if (c == '\0') fail("unterminated atom expression");
    if (std::isdigit(static_cast<unsigned char>(c))) return leaf(K::Isotope, read_number(0));
    if (c == '#') {
      ++pos_;
      int z = read_number(-1);
      if (z < 0) fail("expected atomic number after '#'");
      return leaf(K::Element, z, 2);
    }
    if (c == '$') {
      ++pos_;
      if (peek() != '(') fail("expected '(' after '$'");
      const std::size_t open = pos_;
      int depth = 0;
      do {
        if (pos_ >= s_.size()) fail("unterminated recursive pattern");
        if (s_[pos_] == '(') ++depth;
        if (s_[pos_] == ')') --depth;
        ++pos_;
      } while (depth > 0);
      auto inner = s_.substr(open + 1, pos_ - open - 2);
      auto sub = std::make_shared<Pattern>(SmartsParser(inner, base_ + static_cast<int>(open) + 1).run());
      pat_->recursive.push_back(std::move(sub));
      return leaf(K::Recursive, static_cast<int>(pat_->recursive.size()) - 1);
    }
    if (c == '*') {
      ++pos_;
      return leaf(K::Any);
    }
    if (c == '+' || c == '-') {
      ++pos_;
      const int sign = c == '+' ? 1 : -1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) return leaf(K::Charge, sign * read_number(0));
      int count = 1;
      while (peek() == c) {
        ++pos_;
        ++count;
      }
      return leaf(K::Charge, sign * count);
    }
    if (c == '@') {
      ++pos_;
      if (peek() == '@') ++pos_;
      return leaf(K::Any);  // chirality is not matched
    }
    // Element symbols, two letters first.
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        int z = atomic_number(s_.substr(pos_, 2));
        if (z > 0) {
          pos_ += 2;
          return leaf(K::Element, z, 0);
        }
      }
      if (c == 'H') {
        // [H], [2H], [H+] name hydrogen; elsewhere H is a hydrogen count.
        const char next = pos_ + 1 < s_.size() ? s_[pos_ + 1] : '\0';
        const bool after_isotope = pos_ > 0 && std::isdigit(static_cast<unsigned char>(s_[pos_ - 1]));
        if ((first || after_isotope) && (next == ']' || next == '+' || next == '-')) {
          ++pos_;
          return leaf(K::Element, kHydrogen, 2);
        }
        ++pos_;
        return leaf(K::HCount, read_number(1));
      }
      switch (c) {
        case 'A': ++pos_; return leaf(K::Aliphatic);
        case 'D': ++pos_; return leaf(K::Degree, read_number(1));
        case 'X': ++pos_; return leaf(K::Connectivity, read_number(1));
        case 'R': ++pos_; return leaf(K::RingCount, read_number(-1));
        default: break;
      }
      int z = atomic_number(s_.substr(pos_, 1));
      if (z > 0) {
        ++pos_;
        return leaf(K::Element, z, 0);
      }
      fail("unknown element symbol");
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      auto two = s_.substr(pos_, 2);
      if (two == "se" || two == "as" || two == "te") {
        std::string sym(two);
        sym[0] = static_cast<char>(std::toupper(sym[0]));
        pos_ += 2;
        return leaf(K::Element, atomic_number(sym), 1);
      }
      switch (c) {
        case 'a': ++pos_; return leaf(K::Aromatic);
        case 'v': ++pos_; return leaf(K::Valence, read_number(1));
        case 'r': ++pos_; return leaf(K::RingSize, read_number(-1));
        case 'b': ++pos_; return leaf(K::Element, kBoron, 1);
        case 'c': ++pos_; return leaf(K::Element, kCarbon, 1);
        case 'n': ++pos_; return leaf(K::Element, kNitrogen, 1);
        case 'o': ++pos_; return leaf(K::Element, kOxygen, 1);
        case 'p': ++pos_; return leaf(K::Element, kPhosphorus, 1);
        case 's': ++pos_; return leaf(K::Element, kSulfur, 1);
        default: break;
      }
    }
    fail(std::string("unsupported primitive '") + c + "'");
  }

  BondExpr parse_bond() {
    BondExpr e = parse_bond_or();
    while (peek() == ';') {
      ++pos_;
      e = bond_combine(BondExpr::Op::And, std::move(e), parse_bond_or());
    }
    return e;
  }

  BondExpr parse_bond_or() {
    BondExpr e = parse_bond_and();
    while (peek() == ',') {
      ++pos_;
      e = bond_combine(BondExpr::Op::Or, std::move(e), parse_bond_and());
    }
    return e;
  }

  BondExpr parse_bond_and() {
    BondExpr e = parse_bond_not();
    while (true) {
      char c = peek();
      if (c == '&') {
        ++pos_;
      } else if (!is_bond_char(c) || c == ',' || c == ';') {
        break;
      }
      e = bond_combine(BondExpr::Op::And, std::move(e), parse_bond_not());
    }
    return e;
  }

  BondExpr parse_bond_not() {
    if (peek() == '!') {
      ++pos_;
      BondExpr e;
      e.op = BondExpr::Op::Not;
      e.kids.push_back(parse_bond_not());
      return e;
    }
    using P = BondExpr::Prim;
    const char c = peek();
    ++pos_;
    switch (c) {
      case '-': case '/': case '\\': return bond_leaf(P::Single);
      case '=': return bond_leaf(P::Double);
      case '#': return bond_leaf(P::Triple);
      case ':': return bond_leaf(P::Aromatic);
      case '~': return bond_leaf(P::Any);
      case '@': return bond_leaf(P::Ring);
      default: --pos_; fail("expected bond primitive");
    }
  }
};

Pattern Pattern::parse(std::string_view smarts) { return SmartsParser(smarts, 0).run(); }

Pattern Pattern::from_molecule(const MolGraph& mol) {
  Pattern p;
  p.text_ = mol.source();
  for (const auto& a : mol.atoms()) p.atoms.push_back(leaf(AtomPrimitive::Kind::Element, a.element, a.aromatic ? 1 : 0));
  for (const auto& b : mol.bonds()) {
    BondExpr::Prim prim = BondExpr::Prim::Single;
    switch (b.order) {
      case BondOrder::Single: prim = BondExpr::Prim::Single; break;
      case BondOrder::Double: prim = BondExpr::Prim::Double; break;
      case BondOrder::Triple: prim = BondExpr::Prim::Triple; break;
      case BondOrder::Aromatic: prim = BondExpr::Prim::Aromatic; break;
    }
    p.bonds.push_back({b.a, b.b, bond_leaf(prim)});
  }
  p.finalize();
  return p;
}

void Pattern::finalize() {
  const int n = atom_count();
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int bi = 0; bi < static_cast<int>(bonds.size()); ++bi) {
    adj[bonds[bi].a].push_back({bonds[bi].b, bi});
    adj[bonds[bi].b].push_back({bonds[bi].a, bi});
  }
  plan.clear();
  std::vector<int> placed(n, -1);
  for (int root = 0; root < n; ++root) {
    if (placed[root] >= 0) continue;
    // Breadth-first order within the component keeps every step anchored.
    std::vector<std::pair<int, int>> queue{{root, -1}};
    placed[root] = -2;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      auto [v, via] = queue[qi];
      placed[v] = static_cast<int>(plan.size());
      Step step{v, via, {}};
      for (auto [u, bi] : adj[v]) {
        if (bi == via) continue;
        if (placed[u] >= 0) step.closure_bonds.push_back(bi);
        else if (placed[u] == -1) {
          placed[u] = -2;
          queue.push_back({u, bi});
        }
      }
      plan.push_back(std::move(step));
    }
  }
}

}  // namespace molex::chem

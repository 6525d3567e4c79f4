#include "molex/chem/depict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numbers>

#include "molex/chem/elements.hpp"

namespace molex::chem {
namespace {

constexpr double kPi = std::numbers::pi;

double angle_of(Point2 from, Point2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

Point2 step(Point2 from, double angle) { return {from.x + std::cos(angle), from.y + std::sin(angle)}; }

double norm_angle(double a) {
  while (a < 0) a += 2 * kPi;
  while (a >= 2 * kPi) a -= 2 * kPi;
  return a;
}

class Layout {
 public:
  explicit Layout(const MolGraph& mol) : mol_(mol) {
    const int n = mol.atom_count();
    pos_.resize(n);
    placed_.assign(n, false);
    turn_.assign(n, 1);
    const auto& rings = mol.rings();
    ring_placed_.assign(rings.size(), false);
    rings_of_.resize(n);
    for (std::size_t r = 0; r < rings.size(); ++r)
      for (int a : rings[r]) rings_of_[a].push_back(static_cast<int>(r));
  }

  std::vector<Point2> run() {
    const int n = mol_.atom_count();
    double x_offset = 0;
    for (int start = 0; start < n; ++start) {
      if (placed_[start]) continue;
      std::vector<int> members = collect(start);
      layout_component(members);
      double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
      for (int a : members) {
        min_x = std::min(min_x, pos_[a].x);
        max_x = std::max(max_x, pos_[a].x);
        min_y = std::min(min_y, pos_[a].y);
        max_y = std::max(max_y, pos_[a].y);
      }
      const double cy = (min_y + max_y) / 2;
      for (int a : members) {
        pos_[a].x += x_offset - min_x;
        pos_[a].y -= cy;
      }
      x_offset += (max_x - min_x) + 2.0;
    }
    return pos_;
  }

 private:
  const MolGraph& mol_;
  std::vector<Point2> pos_;
  std::vector<bool> placed_;
  std::vector<int> turn_;
  std::vector<bool> ring_placed_;
  std::vector<std::vector<int>> rings_of_;
  std::deque<int> queue_;

  std::vector<int> collect(int start) const {
    std::vector<int> out{start};
    std::vector<bool> seen(mol_.atom_count(), false);
    seen[start] = true;
    for (std::size_t i = 0; i < out.size(); ++i)
      for (const auto& nb : mol_.neighbors(out[i]))
        if (!seen[nb.atom]) {
          seen[nb.atom] = true;
          out.push_back(nb.atom);
        }
    std::sort(out.begin(), out.end());
    return out;
  }

  void put(int atom, Point2 p) {
    pos_[atom] = p;
    placed_[atom] = true;
    queue_.push_back(atom);
  }

  void layout_component(const std::vector<int>& members) {
    int first_ring = -1;
    for (int a : members)
      for (int r : rings_of_[a])
        if (first_ring < 0 || mol_.rings()[r].size() > mol_.rings()[first_ring].size()) first_ring = r;
    if (first_ring >= 0) {
      place_free_ring(first_ring);
      grow_rings();
    } else {
      put(members.front(), {0, 0});
    }
    while (!queue_.empty()) {
      int v = queue_.front();
      queue_.pop_front();
      place_neighbors(v);
    }
  }

  void place_free_ring(int r) {
    const auto& ring = mol_.rings()[r];
    const int n = static_cast<int>(ring.size());
    const double radius = 0.5 / std::sin(kPi / n);
    for (int k = 0; k < n; ++k) {
      const double a = kPi / 2 + 2 * kPi * k / n;
      put(ring[k], {radius * std::cos(a), radius * std::sin(a)});
    }
    ring_placed_[r] = true;
  }

  Point2 placed_centroid() const {
    Point2 c;
    int count = 0;
    for (std::size_t i = 0; i < placed_.size(); ++i)
      if (placed_[i]) {
        c.x += pos_[i].x;
        c.y += pos_[i].y;
        ++count;
      }
    if (count) {
      c.x /= count;
      c.y /= count;
    }
    return c;
  }

  // Places rings that share an edge or an atom with placed atoms, until no
  // further ring can be anchored.
  void grow_rings() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t r = 0; r < mol_.rings().size(); ++r) {
        if (ring_placed_[r]) continue;
        if (anchor_ring(static_cast<int>(r))) progress = true;
      }
    }
  }

  bool anchor_ring(int r) {
    const auto& ring = mol_.rings()[r];
    const int n = static_cast<int>(ring.size());
    int edge = -1, lone = -1;
    for (int k = 0; k < n; ++k) {
      if (!placed_[ring[k]]) continue;
      if (lone < 0) lone = k;
      if (placed_[ring[(k + 1) % n]]) {
        edge = k;
        break;
      }
    }
    if (lone < 0) return false;
    const double radius = 0.5 / std::sin(kPi / n);
    if (edge >= 0) {
      const Point2 u = pos_[ring[edge]], v = pos_[ring[(edge + 1) % n]];
      const Point2 mid{(u.x + v.x) / 2, (u.y + v.y) / 2};
      double nx = -(v.y - u.y), ny = v.x - u.x;
      const double len = std::hypot(nx, ny);
      if (len < 1e-9) return false;
      nx /= len;
      ny /= len;
      // The new ring goes on the side away from its placed neighbours.
      Point2 away = placed_centroid();
      Point2 ref = side_reference(ring, edge);
      if (ref.x != 0 || ref.y != 0) away = ref;
      if ((away.x - mid.x) * nx + (away.y - mid.y) * ny > 0) {
        nx = -nx;
        ny = -ny;
      }
      const double apothem = 0.5 / std::tan(kPi / n);
      const Point2 center{mid.x + nx * apothem, mid.y + ny * apothem};
      // Walk from u away from v.
      const double au = angle_of(center, u), av = angle_of(center, v);
      const double delta = norm_angle(av - au);
      const int sense = delta < kPi ? 1 : -1;  // v sits counter-clockwise of u
      place_ring_walk(r, center, edge, -1, -sense, radius);
      return true;
    }
    // Spiro: one shared atom, ring centre pointing away from its neighbours.
    const int atom = ring[lone];
    const double out = free_direction(atom);
    const Point2 center = {pos_[atom].x + radius * std::cos(out), pos_[atom].y + radius * std::sin(out)};
    place_ring_walk(r, center, lone, 1, 1, radius);
    return true;
  }

  // Centroid of placed atoms bonded to the edge atoms, excluding the edge.
  Point2 side_reference(const std::vector<int>& ring, int edge) const {
    const int n = static_cast<int>(ring.size());
    const int u = ring[edge], v = ring[(edge + 1) % n];
    Point2 c;
    int count = 0;
    for (int x : {u, v})
      for (const auto& nb : mol_.neighbors(x)) {
        if (nb.atom == u || nb.atom == v || !placed_[nb.atom]) continue;
        c.x += pos_[nb.atom].x;
        c.y += pos_[nb.atom].y;
        ++count;
      }
    if (count == 0) return {};
    return {c.x / count, c.y / count};
  }

  // Places ring atoms walking index direction `dir` from `from`, turning by
  // `sense` around the centre.
  void place_ring_walk(int r, Point2 center, int from, int dir, int sense, double radius) {
    const auto& ring = mol_.rings()[r];
    const int n = static_cast<int>(ring.size());
    const double a0 = angle_of(center, pos_[ring[from]]);
    for (int k = 1; k < n; ++k) {
      const int atom = ring[((from + dir * k) % n + n) % n];
      if (placed_[atom]) continue;
      const double a = a0 + sense * 2 * kPi * k / n;
      put(atom, {center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    }
    ring_placed_[r] = true;
  }

  // Middle of the widest angular gap between placed neighbours.
  double free_direction(int v) const {
    std::vector<double> angles;
    for (const auto& nb : mol_.neighbors(v))
      if (placed_[nb.atom]) angles.push_back(norm_angle(angle_of(pos_[v], pos_[nb.atom])));
    if (angles.empty()) return 0;
    std::sort(angles.begin(), angles.end());
    double best_gap = -1, best_mid = 0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
      const double a = angles[i];
      const double b = i + 1 < angles.size() ? angles[i + 1] : angles[0] + 2 * kPi;
      if (b - a > best_gap + 1e-9) {
        best_gap = b - a;
        best_mid = a + (b - a) / 2;
      }
    }
    return best_mid;
  }

  bool linear(int v) const {
    int doubles = 0;
    for (const auto& nb : mol_.neighbors(v)) {
      const auto order = mol_.bond(nb.bond).order;
      if (order == BondOrder::Triple) return true;
      if (order == BondOrder::Double) ++doubles;
    }
    return doubles >= 2;
  }

  void place_neighbors(int v) {
    std::vector<int> todo;
    int placed_nb = -1, placed_count = 0;
    for (const auto& nb : mol_.neighbors(v)) {
      if (placed_[nb.atom]) {
        placed_nb = nb.atom;
        ++placed_count;
      } else {
        todo.push_back(nb.atom);
      }
    }
    if (todo.empty()) return;
    std::vector<double> angles;
    if (placed_count == 0) {
      // Chain start.
      for (std::size_t k = 0; k < todo.size(); ++k) angles.push_back(-kPi / 6 + 2 * kPi * k / todo.size());
    } else if (placed_count == 1 && todo.size() == 1) {
      const double back = angle_of(pos_[v], pos_[placed_nb]);
      if (linear(v)) {
        angles.push_back(back + kPi);
      } else {
        angles.push_back(back + kPi + turn_[v] * kPi / 3);
      }
      turn_[todo[0]] = -turn_[v];
    } else {
      // Spread evenly over the widest free gap.
      std::vector<double> placed_angles;
      for (const auto& nb : mol_.neighbors(v))
        if (placed_[nb.atom]) placed_angles.push_back(norm_angle(angle_of(pos_[v], pos_[nb.atom])));
      std::sort(placed_angles.begin(), placed_angles.end());
      double gap_start = 0, gap = -1;
      for (std::size_t i = 0; i < placed_angles.size(); ++i) {
        const double a = placed_angles[i];
        const double b = i + 1 < placed_angles.size() ? placed_angles[i + 1] : placed_angles[0] + 2 * kPi;
        if (b - a > gap + 1e-9) {
          gap = b - a;
          gap_start = a;
        }
      }
      const double slot = gap / (todo.size() + 1);
      for (std::size_t k = 0; k < todo.size(); ++k) angles.push_back(gap_start + slot * (k + 1));
    }
    for (std::size_t k = 0; k < todo.size(); ++k) {
      const int u = todo[k];
      if (placed_[u]) continue;  // placed meanwhile as part of a ring
      put(u, step(pos_[v], angles[k]));
      if (!rings_of_[u].empty()) place_rings_from(u, angles[k]);
    }
  }

  // A chain reached ring atom u along `direction`: lay out u's ring with its
  // centre further along the bond, then the rest of the ring system.
  void place_rings_from(int u, double direction) {
    int r = -1;
    for (int cand : rings_of_[u])
      if (!ring_placed_[cand] && (r < 0 || mol_.rings()[cand].size() > mol_.rings()[r].size())) r = cand;
    if (r < 0) return;
    const auto& ring = mol_.rings()[r];
    const int n = static_cast<int>(ring.size());
    const double radius = 0.5 / std::sin(kPi / n);
    const Point2 center{pos_[u].x + radius * std::cos(direction), pos_[u].y + radius * std::sin(direction)};
    const int from = static_cast<int>(std::find(ring.begin(), ring.end(), u) - ring.begin());
    place_ring_walk(r, center, from, 1, 1, radius);
    grow_rings();
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string atom_label(const Atom& a) {
  if (a.element == kCarbon && a.charge == 0 && !a.isotope) return "";
  std::string s;
  if (a.isotope) s += std::to_string(*a.isotope);
  s += std::string(element_symbol(a.element));
  const int h = a.total_h();
  if (h > 0 && a.element != kCarbon) s += h == 1 ? "H" : "H" + std::to_string(h);
  if (a.charge) {
    const int q = std::abs(a.charge);
    s += (q > 1 ? std::to_string(q) : "") + (a.charge > 0 ? "+" : "-");
  }
  return s;
}

}  // namespace

std::vector<Point2> depict_coordinates(const MolGraph& mol) {
  if (mol.atom_count() == 0) return {};
  return Layout(mol).run();
}

std::string depict_svg(const MolGraph& mol, std::span<const int> highlight) {
  const auto coords = depict_coordinates(mol);
  const int n = mol.atom_count();
  std::vector<bool> hl(n, false);
  for (int a : highlight)
    if (a >= 0 && a < n) hl[a] = true;
  constexpr double kScale = 40.0, kMargin = 30.0;
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (int i = 0; i < n; ++i) {
    if (i == 0 || coords[i].x < min_x) min_x = coords[i].x;
    if (i == 0 || coords[i].x > max_x) max_x = coords[i].x;
    if (i == 0 || coords[i].y < min_y) min_y = coords[i].y;
    if (i == 0 || coords[i].y > max_y) max_y = coords[i].y;
  }
  const double width = (max_x - min_x) * kScale + 2 * kMargin;
  const double height = (max_y - min_y) * kScale + 2 * kMargin;
  auto sx = [&](int i) { return (coords[i].x - min_x) * kScale + kMargin; };
  auto sy = [&](int i) { return (max_y - coords[i].y) * kScale + kMargin; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
  svg += "<style>.bond{stroke:#222;stroke-width:2}.bond.highlight{stroke:#d62728;stroke-width:4}"
         ".aromatic{stroke-dasharray:4 3}.atom{fill:#222}.atom.highlight{fill:#d62728}"
         ".label{font:14px sans-serif;text-anchor:middle;dominant-baseline:central}</style>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& b : mol.bonds()) {
    const bool h = hl[b.a] && hl[b.b];
    const std::string cls = h ? "bond highlight" : "bond";
    const double x1 = sx(b.a), y1 = sy(b.a), x2 = sx(b.b), y2 = sy(b.b);
    const double len = std::hypot(x2 - x1, y2 - y1);
    const double ox = len > 0 ? -(y2 - y1) / len * 4 : 0, oy = len > 0 ? (x2 - x1) / len * 4 : 0;
    auto line = [&](double dx, double dy, const std::string& c) {
      svg += "<line class=\"" + c + "\" x1=\"" + fmt(x1 + dx) + "\" y1=\"" + fmt(y1 + dy) + "\" x2=\"" + fmt(x2 + dx) +
             "\" y2=\"" + fmt(y2 + dy) + "\"/>\n";
    };
    switch (b.order) {
      case BondOrder::Single: line(0, 0, cls); break;
      case BondOrder::Double: line(ox / 2, oy / 2, cls); line(-ox / 2, -oy / 2, cls); break;
      case BondOrder::Triple: line(0, 0, cls); line(ox, oy, cls); line(-ox, -oy, cls); break;
      case BondOrder::Aromatic: line(0, 0, cls); line(ox, oy, cls + " aromatic"); break;
    }
  }
  for (int i = 0; i < n; ++i) {
    svg += "<circle class=\"" + std::string(hl[i] ? "atom highlight" : "atom") + "\" data-atom=\"" + std::to_string(i) +
           "\" cx=\"" + fmt(sx(i)) + "\" cy=\"" + fmt(sy(i)) + "\" r=\"3\"/>\n";
    const std::string label = atom_label(mol.atom(i));
    if (!label.empty()) {
      svg += "<text class=\"label\" x=\"" + fmt(sx(i)) + "\" y=\"" + fmt(sy(i) - 10) + "\">" + escape(label) +
             "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace molex::chem

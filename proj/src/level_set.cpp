#include "dendroflow/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dendroflow {

namespace {

// Extremal profile of a series: boundary entries plus the alternating
// internal extrema, with original sample positions.
struct Profile {
  std::vector<std::size_t> idx;
  std::vector<double> val;
  std::size_t n_internal = 0;  // entries excluding the two boundaries
};

Profile make_profile(const Series& s) {
  Profile p;
  auto ext = local_extrema(s);
  const auto& x = s.values;
  std::size_t last_start = 0;  // leftmost sample of the final plateau
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] != x[i - 1]) last_start = i;
  p.idx.push_back(0);
  p.val.push_back(x[0]);
  for (const auto& e : ext) {
    p.idx.push_back(e.index);
    p.val.push_back(e.value);
  }
  p.n_internal = ext.size();
  if (x.size() > 1) {
    p.idx.push_back(last_start);
    p.val.push_back(x[last_start]);
  }
  return p;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
    return a;
  }
};

}  // namespace

IndexedTree level_set_tree_indexed(const Series& s) {
  s.validate();
  if (s.size() == 1) {
    // a single sample is its own (trivial) peak
    IndexedTree out;
    out.tree = Tree::single_node(1.0);
    out.source = {0};
    return out;
  }

  Profile p = make_profile(s);
  // peaks and valleys of the profile; boundaries count as peaks when the
  // series descends away from them
  std::vector<std::size_t> peaks;    // profile entry indexes
  std::vector<std::size_t> valleys;  // profile entry indexes (internal minima)
  const std::size_t m = p.val.size();
  for (std::size_t i = 0; i < m; ++i) {
    bool up_left = (i == 0) || p.val[i] > p.val[i - 1];
    bool up_right = (i + 1 == m) || p.val[i] > p.val[i + 1];
    if (up_left && up_right)
      peaks.push_back(i);
    else if (i > 0 && i + 1 < m && p.val[i] < p.val[i - 1] && p.val[i] < p.val[i + 1])
      valleys.push_back(i);
  }
  // valleys interleave peaks, so an empty valley list means at most one peak;
  // that is a tree only when the peak is a genuine internal maximum
  if (peaks.empty() || (valleys.empty() && p.n_internal == 0))
    throw std::invalid_argument("degenerate series: no internal extrema");

  IndexedTree out;
  auto& arena = out.tree.mutable_nodes();
  std::vector<double> node_value;

  // one leaf per peak
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    arena.emplace_back();
    node_value.push_back(p.val[peaks[k]]);
    out.source.push_back(p.idx[peaks[k]]);
  }

  double boundary_min = std::min(s.front(), s.back());

  if (valleys.empty()) {
    // single-peak series: one vertex, parental edge down to the lower boundary
    double peak = node_value[0];
    double ghost = (boundary_min < peak) ? peak - boundary_min : 1.0;
    out.tree.set_root(0);
    out.tree.set_ghost(ghost);
    out.tree.validate();
    return out;
  }

  // merge order: descending valley value, leftmost first among ties
  std::vector<std::size_t> order(valleys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (p.val[valleys[a]] != p.val[valleys[b]]) return p.val[valleys[a]] > p.val[valleys[b]];
    return valleys[a] < valleys[b];
  });

  DisjointSet dsu(peaks.size());
  std::vector<NodeId> comp_node(peaks.size());
  for (std::size_t k = 0; k < peaks.size(); ++k) comp_node[k] = static_cast<NodeId>(k);
  std::vector<char> dead(arena.size(), 0);

  auto attach = [&](NodeId child, NodeId parent_id) {
    arena[static_cast<std::size_t>(child)].parent = parent_id;
    arena[static_cast<std::size_t>(child)].parent_edge_length =
        node_value[static_cast<std::size_t>(child)] - node_value[static_cast<std::size_t>(parent_id)];
  };

  for (std::size_t t = 0; t < order.size(); ++t) {
    std::size_t vslot = order[t];  // valley between peak vslot and peak vslot+1
    double mval = p.val[valleys[vslot]];
    std::size_t r1 = dsu.find(vslot);
    std::size_t r2 = dsu.find(vslot + 1);
    NodeId a = comp_node[r1];
    NodeId b = comp_node[r2];
    bool a_at = !arena[static_cast<std::size_t>(a)].children.empty() &&
                node_value[static_cast<std::size_t>(a)] == mval;
    bool b_at = !arena[static_cast<std::size_t>(b)].children.empty() &&
                node_value[static_cast<std::size_t>(b)] == mval;
    NodeId merged;
    if (a_at && b_at) {
      // two equal-valued minima collapse into one vertex
      auto& bn = arena[static_cast<std::size_t>(b)];
      for (NodeId c : bn.children) {
        arena[static_cast<std::size_t>(c)].parent = a;
        arena[static_cast<std::size_t>(a)].children.push_back(c);
      }
      bn.children.clear();
      dead[static_cast<std::size_t>(b)] = 1;
      merged = a;
    } else if (a_at) {
      attach(b, a);
      arena[static_cast<std::size_t>(a)].children.push_back(b);
      merged = a;
    } else if (b_at) {
      attach(a, b);
      auto& bc = arena[static_cast<std::size_t>(b)].children;
      bc.insert(bc.begin(), a);
      merged = b;
    } else {
      NodeId u = static_cast<NodeId>(arena.size());
      arena.emplace_back();
      dead.push_back(0);
      node_value.push_back(mval);
      out.source.push_back(p.idx[valleys[vslot]]);
      attach(a, u);
      attach(b, u);
      arena[static_cast<std::size_t>(u)].children = {a, b};
      merged = u;
    }
    std::size_t r = dsu.unite(r1, r2);
    comp_node[r] = merged;
  }

  NodeId root = comp_node[dsu.find(0)];
  double root_val = node_value[static_cast<std::size_t>(root)];
  double ghost = (boundary_min < root_val) ? root_val - boundary_min : 1.0;

  // compact out vertices absorbed by equal-value collapses
  std::vector<NodeId> remap(arena.size(), kNoNode);
  std::vector<Node> packed;
  std::vector<std::size_t> packed_source;
  packed.reserve(arena.size());
  for (std::size_t i = 0; i < arena.size(); ++i) {
    if (dead[i]) continue;
    remap[i] = static_cast<NodeId>(packed.size());
    packed.push_back(arena[i]);
    packed_source.push_back(out.source[i]);
  }
  for (Node& nd : packed) {
    if (nd.parent != kNoNode) nd.parent = remap[static_cast<std::size_t>(nd.parent)];
    for (NodeId& c : nd.children) c = remap[static_cast<std::size_t>(c)];
  }
  out.tree.mutable_nodes() = std::move(packed);
  out.source = std::move(packed_source);
  out.tree.set_root(remap[static_cast<std::size_t>(root)]);
  out.tree.set_ghost(ghost);
  out.tree.validate();
  return out;
}

Tree level_set_tree(const Series& s) { return level_set_tree_indexed(s).tree; }

ExtremeFunction extreme_function(const Series& s) {
  s.validate();
  Profile p = make_profile(s);
  if (p.n_internal == 0) throw std::invalid_argument("degenerate series: no internal extrema");

  // lowest internal minimum (the root value); for a single-peak series the
  // peak itself plays that role, making s0 consistent with the Harris path
  double root_val = 0.0;
  bool found = false;
  for (std::size_t i = 1; i + 1 < p.val.size(); ++i) {
    if (p.val[i] < p.val[i - 1] && p.val[i] < p.val[i + 1]) {
      root_val = found ? std::min(root_val, p.val[i]) : p.val[i];
      found = true;
    }
  }
  if (!found) {
    for (std::size_t i = 1; i + 1 < p.val.size(); ++i)
      if (p.val[i] > p.val[i - 1] && p.val[i] > p.val[i + 1]) root_val = p.val[i];
  }
  double boundary_min = std::min(s.front(), s.back());
  double ghost = (boundary_min < root_val) ? root_val - boundary_min : 1.0;

  ExtremeFunction f;
  f.start_abscissa = ghost + s.front() - root_val;
  double x = f.start_abscissa;
  f.breakpoints.emplace_back(x, p.val[0]);
  for (std::size_t i = 1; i < p.val.size(); ++i) {
    x += std::abs(p.val[i] - p.val[i - 1]);
    f.breakpoints.emplace_back(x, p.val[i]);
  }
  return f;
}

double ExtremeFunction::eval(double x) const {
  if (breakpoints.empty()) throw std::invalid_argument("extreme function: empty");
  if (x < domain_begin() || x > domain_end())
    throw std::invalid_argument("extreme function: abscissa out of domain");
  auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x,
                             [](const auto& bp, double v) { return bp.first < v; });
  if (it == breakpoints.begin()) return it->second;
  if (it == breakpoints.end() || it->first != x) {
    auto prev = std::prev(it);
    if (it == breakpoints.end()) return prev->second;
    double t = (x - prev->first) / (it->first - prev->first);
    return prev->second + t * (it->second - prev->second);
  }
  return it->second;
}

double pseudo_distance(const ExtremeFunction& f, double a, double b) {
  double xa = f.eval(a);
  double xb = f.eval(b);
  double lo = std::min(a, b), hi = std::max(a, b);
  double inf = std::min(xa, xb);
  for (const auto& [x, h] : f.breakpoints)
    if (x > lo && x < hi) inf = std::min(inf, h);
  return (xa - inf) + (xb - inf);
}

Series prune_series(const Series& s) {
  Series out;
  for (const auto& e : local_extrema(s))
    if (e.kind == ExtremumKind::kMin) out.values.push_back(e.value);
  return out;
}

std::vector<std::size_t> internal_minima_positions(const Series& s) {
  std::vector<std::size_t> out;
  for (const auto& e : local_extrema(s))
    if (e.kind == ExtremumKind::kMin) out.push_back(e.index);
  return out;
}

std::vector<std::vector<std::size_t>> iterated_minima_positions(const Series& s) {
  std::vector<std::vector<std::size_t>> levels;
  std::vector<std::size_t> pos(s.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  Series cur = s;
  while (cur.size() >= 3) {
    std::vector<std::size_t> local = internal_minima_positions(cur);
    if (local.empty()) break;
    std::vector<std::size_t> mapped(local.size());
    std::vector<double> vals(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
      mapped[i] = pos[local[i]];
      vals[i] = cur.values[local[i]];
    }
    levels.push_back(mapped);
    pos = std::move(mapped);
    cur = Series(std::move(vals));
  }
  return levels;
}

LadderDecomposition descending_ladder(const Series& s) {
  s.validate();
  LadderDecomposition out;
  const auto& x = s.values;
  double level = x[0];
  double pending_fall = 0.0;
  double pending_fall_level = level;
  bool have_fall = false;
  std::vector<double> exc;  // current excursion, shifted
  auto flush_fall = [&]() {
    if (have_fall) {
      out.falls.push_back(pending_fall);
      out.fall_levels.push_back(pending_fall_level);
      have_fall = false;
      pending_fall = 0.0;
    }
  };
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!exc.empty()) {
      if (x[k] > level) {
        exc.push_back(x[k] - level);
      } else {
        exc.push_back(0.0);  // interpolated return to the excursion level
        out.excursions.push_back(Series(std::move(exc)));
        out.excursion_levels.push_back(level);
        exc.clear();
        if (x[k] < level) {
          if (!have_fall) {
            have_fall = true;
            pending_fall_level = level;
          }
          pending_fall += level - x[k];
          level = x[k];
        }
      }
    } else {
      if (x[k] > level) {
        flush_fall();
        exc = {0.0, x[k] - level};
      } else if (x[k] < level) {
        if (!have_fall) {
          have_fall = true;
          pending_fall_level = level;
        }
        pending_fall += level - x[k];
        level = x[k];
      }
    }
  }
  if (!exc.empty()) {
    out.trailing = Series(std::move(exc));
    out.trailing_level = level;
  } else {
    flush_fall();
  }
  return out;
}

BasinDecomposition basin_decomposition(const Series& s, int order) {
  if (order < 1) throw std::invalid_argument("basin_decomposition: order must be >= 1");
  auto t_lists = iterated_minima_positions(s);
  BasinDecomposition out;
  out.order = order;
  if (static_cast<std::size_t>(order) > t_lists.size() || t_lists[order - 1].empty()) {
    out.incomplete_left = {std::size_t{0}, s.size() - 1};
    return out;
  }
  const auto& tr = t_lists[order - 1];
  // points of the (order-1)-times pruned series, used for apexes
  const std::vector<std::size_t>* level_pts = nullptr;
  std::vector<std::size_t> base;
  if (order == 1) {
    base.resize(s.size());
    std::iota(base.begin(), base.end(), std::size_t{0});
    level_pts = &base;
  } else {
    level_pts = &t_lists[order - 2];
  }
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    std::size_t l = tr[i], r = tr[i + 1];
    auto lo = std::upper_bound(level_pts->begin(), level_pts->end(), l);
    auto hi = std::lower_bound(level_pts->begin(), level_pts->end(), r);
    std::size_t apex = l;
    double best = -std::numeric_limits<double>::infinity();
    for (auto it = lo; it != hi; ++it) {
      if (s.values[*it] > best) {
        best = s.values[*it];
        apex = *it;
      }
    }
    out.basins.push_back({l, apex, r});
  }
  if (tr.front() > 0) out.incomplete_left = {std::size_t{0}, tr.front()};
  if (tr.back() + 1 < s.size()) out.incomplete_right = {tr.back(), s.size() - 1};
  return out;
}

std::vector<SideBranchRecord> classify_side_branches(const Series& s) {
  auto t_lists = iterated_minima_positions(s);
  std::vector<SideBranchRecord> out;
  if (t_lists.empty()) return out;

  // order of every minimum = deepest list containing it
  std::vector<int> order_of(s.size(), 0);
  for (std::size_t j = 0; j < t_lists.size(); ++j)
    for (std::size_t pos : t_lists[j]) order_of[pos] = static_cast<int>(j + 1);

  // maxima (with boundary maxima) of each pruned level, marking principal
  // merge points S_{i+1}; X^{(0)} is the series itself
  std::vector<std::vector<std::size_t>> level_points(t_lists.size() + 1);
  level_points[0].resize(s.size());
  std::iota(level_points[0].begin(), level_points[0].end(), std::size_t{0});
  for (std::size_t j = 0; j < t_lists.size(); ++j) level_points[j + 1] = t_lists[j];

  auto is_max_of_level = [&](std::size_t pos, int level) {
    const auto& pts = level_points[static_cast<std::size_t>(level)];
    auto it = std::lower_bound(pts.begin(), pts.end(), pos);
    if (it == pts.end() || *it != pos) return false;
    double v = s.values[pos];
    bool lf = (it == pts.begin()) || s.values[*std::prev(it)] < v;
    bool rf = (std::next(it) == pts.end()) || s.values[*std::next(it)] < v;
    return lf && rf;
  };

  for (std::size_t pos : t_lists[0]) {
    int i = order_of[pos];
    if (is_max_of_level(pos, i)) continue;  // principal merge (terminal vertex)
    SideBranchRecord rec{pos, i, 0, false};
    for (std::size_t j = static_cast<std::size_t>(i) + 1;; ++j) {
      if (j > t_lists.size()) break;  // no order-j minima at all: boundary basin
      const auto& tj = t_lists[j - 1];
      auto it = std::lower_bound(tj.begin(), tj.end(), pos);
      if (it == tj.begin() || it == tj.end()) break;  // incomplete basin
      std::size_t r = *it, l = *std::prev(it);
      // apex: highest order-(j-1) point inside (l, r)
      const auto& pts = level_points[j - 1];
      auto lo = std::upper_bound(pts.begin(), pts.end(), l);
      auto hi = std::lower_bound(pts.begin(), pts.end(), r);
      std::size_t apex = l;
      double best = -std::numeric_limits<double>::infinity();
      for (auto p = lo; p != hi; ++p)
        if (s.values[*p] > best) {
          best = s.values[*p];
          apex = *p;
        }
      std::size_t opposite = (pos < apex) ? r : l;
      if (s.values[pos] >= s.values[opposite]) {
        rec.host_order = static_cast<int>(j);
        rec.host_complete = true;
        break;
      }
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace dendroflow

#include "dendroflow/horton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dendroflow {

OrderedTree assign_orders(Tree t) {
  OrderedTree ot;
  ot.order.assign(t.size(), 0);
  if (t.empty()) {
    ot.tree = std::move(t);
    return ot;
  }
  for (NodeId id : t.post_order()) {
    const Node& nd = t.node(id);
    if (nd.is_leaf()) {
      ot.order[static_cast<std::size_t>(id)] = 1;
      continue;
    }
    int best = 0, ties = 0;
    for (NodeId c : nd.children) {
      int oc = ot.order[static_cast<std::size_t>(c)];
      if (oc > best) {
        best = oc;
        ties = 1;
      } else if (oc == best) {
        ++ties;
      }
    }
    ot.order[static_cast<std::size_t>(id)] = best + (ties >= 2 ? 1 : 0);
  }
  ot.omega = ot.order[static_cast<std::size_t>(t.root())];
  ot.tree = std::move(t);
  return ot;
}

namespace {

// removed(v) <=> v is a leaf or a single-child vertex whose subtree is a
// chain ending in a leaf
std::vector<char> removal_flags(const Tree& t) {
  std::vector<char> removed(t.size(), 0);
  for (NodeId id : t.post_order()) {
    const Node& nd = t.node(id);
    if (nd.is_leaf())
      removed[static_cast<std::size_t>(id)] = 1;
    else if (nd.children.size() == 1 && removed[static_cast<std::size_t>(nd.children[0])])
      removed[static_cast<std::size_t>(id)] = 1;
  }
  return removed;
}

Tree compact(const Tree& t, const std::vector<char>& removed, std::vector<NodeId>* old_of_new) {
  Tree out;
  if (old_of_new) old_of_new->clear();
  if (t.empty() || removed[static_cast<std::size_t>(t.root())]) return out;
  auto& arena = out.mutable_nodes();
  std::vector<NodeId> remap(t.size(), kNoNode);
  for (NodeId id : t.pre_order()) {
    if (removed[static_cast<std::size_t>(id)]) continue;
    NodeId fresh = static_cast<NodeId>(arena.size());
    remap[static_cast<std::size_t>(id)] = fresh;
    arena.emplace_back();
    const Node& src = t.node(id);
    Node& dst = arena.back();
    dst.parent_edge_length = src.parent_edge_length;
    if (src.parent != kNoNode) {
      // survivors form an upward-closed set, so the parent is already mapped
      NodeId np = remap[static_cast<std::size_t>(src.parent)];
      dst.parent = np;
      arena[static_cast<std::size_t>(np)].children.push_back(fresh);
    }
    if (old_of_new) old_of_new->push_back(id);
  }
  out.set_root(0);
  out.set_ghost(t.ghost_edge_length());
  out.validate();
  return out;
}

}  // namespace

Tree prune(const Tree& t) {
  if (t.empty()) return t;
  return compact(t, removal_flags(t), nullptr);
}

PruningOrders pruning_orders(const Tree& t) {
  PruningOrders po;
  po.removal_round.assign(t.size(), 0);
  Tree cur = t;
  std::vector<NodeId> orig(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) orig[i] = static_cast<NodeId>(i);
  int round = 0;
  while (!cur.empty()) {
    ++round;
    auto removed = removal_flags(cur);
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (removed[i]) po.removal_round[static_cast<std::size_t>(orig[i])] = round;
    std::vector<NodeId> old_of_new;
    Tree next = compact(cur, removed, &old_of_new);
    std::vector<NodeId> next_orig(old_of_new.size());
    for (std::size_t i = 0; i < old_of_new.size(); ++i)
      next_orig[i] = orig[static_cast<std::size_t>(old_of_new[i])];
    cur = std::move(next);
    orig = std::move(next_orig);
  }
  po.omega = round;
  return po;
}

BranchSet branch_decomposition(const OrderedTree& ot) {
  const Tree& t = ot.tree;
  BranchSet bs;
  bs.omega = ot.omega;
  bs.branch_of_node.assign(t.size(), -1);
  if (t.empty()) {
    bs.count_by_order.assign(1, 0);
    bs.mean_magnitude.assign(1, 0.0);
    return bs;
  }
  std::vector<long> leaves = t.subtree_leaf_counts();
  for (NodeId id : t.pre_order()) {
    const Node& nd = t.node(id);
    int ord = ot.order[static_cast<std::size_t>(id)];
    if (nd.parent != kNoNode && ot.order[static_cast<std::size_t>(nd.parent)] == ord) {
      int b = bs.branch_of_node[static_cast<std::size_t>(nd.parent)];
      bs.branch_of_node[static_cast<std::size_t>(id)] = b;
      bs.branches[static_cast<std::size_t>(b)].vertices.push_back(id);
    } else {
      Branch br;
      br.order = ord;
      br.vertices.push_back(id);
      br.magnitude = leaves[static_cast<std::size_t>(id)];
      bs.branch_of_node[static_cast<std::size_t>(id)] = static_cast<int>(bs.branches.size());
      bs.branches.push_back(std::move(br));
    }
  }
  // a branch is a path, so pre-order appends its vertices initial-to-terminal
  bs.count_by_order.assign(static_cast<std::size_t>(bs.omega) + 1, 0);
  std::vector<double> mag_sum(static_cast<std::size_t>(bs.omega) + 1, 0.0);
  for (const Branch& b : bs.branches) {
    bs.count_by_order[static_cast<std::size_t>(b.order)] += 1;
    mag_sum[static_cast<std::size_t>(b.order)] += static_cast<double>(b.magnitude);
  }
  bs.mean_magnitude.assign(static_cast<std::size_t>(bs.omega) + 1, 0.0);
  for (int r = 1; r <= bs.omega; ++r)
    if (bs.count_by_order[static_cast<std::size_t>(r)] > 0)
      bs.mean_magnitude[static_cast<std::size_t>(r)] =
          mag_sum[static_cast<std::size_t>(r)] / static_cast<double>(bs.count_by_order[static_cast<std::size_t>(r)]);
  return bs;
}

void mark_completeness(BranchSet& bs, const OrderedTree& ot,
                       const std::vector<std::size_t>& source,
                       const std::vector<std::vector<std::size_t>>& t_lists) {
  (void)ot;
  for (Branch& b : bs.branches) {
    std::size_t r = static_cast<std::size_t>(b.order);
    if (r > t_lists.size() || t_lists[r - 1].empty()) {
      b.complete = false;
      continue;
    }
    const auto& tr = t_lists[r - 1];
    std::size_t apex = source[static_cast<std::size_t>(b.terminal())];
    // the apex is never itself an order-r minimum, so lower_bound splits
    // the list into strictly-left and strictly-right parts
    auto it = std::lower_bound(tr.begin(), tr.end(), apex);
    b.complete = (it != tr.begin()) && (it != tr.end());
  }
}

TokunagaMatrix tokunaga_matrix(const OrderedTree& ot, const BranchSet& bs, bool complete_only,
                               bool allow_general) {
  const Tree& t = ot.tree;
  if (!allow_general) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Node& nd = t.node(static_cast<NodeId>(i));
      if (!nd.is_leaf() && nd.children.size() != 2)
        throw std::invalid_argument("tokunaga_matrix: tree is not binary (node " + std::to_string(i) +
                                    " has " + std::to_string(nd.children.size()) + " children)");
    }
  }
  TokunagaMatrix tm;
  tm.omega = bs.omega;
  tm.complete_only = complete_only;
  std::size_t w = static_cast<std::size_t>(bs.omega) + 1;
  tm.side_counts.assign(w, std::vector<long>(w, 0));
  tm.principal_counts.assign(w, 0);
  tm.branches_used.assign(w, 0);
  tm.tau.assign(bs.branches.size(), {});
  tm.ratios.assign(w, std::vector<double>(w, 0.0));

  for (const Branch& b : bs.branches) {
    if (!complete_only || b.complete)
      tm.branches_used[static_cast<std::size_t>(b.order)] += 1;
    NodeId head = b.initial();
    NodeId up = t.node(head).parent;
    if (up == kNoNode) continue;
    int i = b.order;
    int j = ot.order[static_cast<std::size_t>(up)];
    int host = bs.branch_of_node[static_cast<std::size_t>(up)];
    // principal children are the maximal-order children of a terminal vertex
    bool principal = (j == i + 1);
    if (principal) {
      for (NodeId c : t.node(up).children)
        if (c != head && ot.order[static_cast<std::size_t>(c)] > i) principal = false;
    }
    if (principal) {
      tm.principal_counts[static_cast<std::size_t>(i)] += 1;
    } else {
      auto& tau_b = tm.tau[static_cast<std::size_t>(host)];
      if (tau_b.size() <= static_cast<std::size_t>(i)) tau_b.resize(static_cast<std::size_t>(i) + 1, 0);
      tau_b[static_cast<std::size_t>(i)] += 1;
      if (!complete_only || bs.branches[static_cast<std::size_t>(host)].complete)
        tm.side_counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += 1;
    }
  }
  for (int i = 1; i <= bs.omega; ++i) {
    for (int j = i + 1; j <= bs.omega; ++j) {
      long denom = tm.branches_used[static_cast<std::size_t>(j)];
      tm.ratios[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          denom > 0 ? static_cast<double>(tm.side_counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
                          static_cast<double>(denom)
                    : std::numeric_limits<double>::quiet_NaN();
    }
    tm.ratios[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 2.0;
  }
  return tm;
}

HortonStats horton_stats(const BranchSet& bs) {
  HortonStats hs;
  hs.omega = bs.omega;
  hs.branch_counts = bs.count_by_order;
  hs.magnitudes = bs.mean_magnitude;
  std::size_t w = static_cast<std::size_t>(bs.omega) + 1;
  hs.eta.assign(w, std::numeric_limits<double>::quiet_NaN());
  hs.magnitude_ratio.assign(w, std::numeric_limits<double>::quiet_NaN());
  for (int r = 1; r < bs.omega; ++r) {
    long a = bs.count_by_order[static_cast<std::size_t>(r)];
    long b = bs.count_by_order[static_cast<std::size_t>(r) + 1];
    if (b > 0) hs.eta[static_cast<std::size_t>(r)] = static_cast<double>(a) / static_cast<double>(b);
    if (bs.mean_magnitude[static_cast<std::size_t>(r)] > 0)
      hs.magnitude_ratio[static_cast<std::size_t>(r)] =
          bs.mean_magnitude[static_cast<std::size_t>(r) + 1] / bs.mean_magnitude[static_cast<std::size_t>(r)];
  }
  // least squares of log N_r (and log M_r) against r over r in [1, omega-2]
  int hi = bs.omega - 2;
  if (hi >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, my = 0, myy = 0, mxy = 0;
    int n = 0;
    for (int r = 1; r <= hi; ++r) {
      long c = bs.count_by_order[static_cast<std::size_t>(r)];
      double m = bs.mean_magnitude[static_cast<std::size_t>(r)];
      if (c <= 0 || m <= 0) continue;
      double xr = r;
      sx += xr;
      sxx += xr * xr;
      sy += std::log(static_cast<double>(c));
      sxy += xr * std::log(static_cast<double>(c));
      my += std::log(m);
      mxy += xr * std::log(m);
      myy += 1;
      ++n;
    }
    (void)myy;
    if (n >= 2) {
      double denom = n * sxx - sx * sx;
      double slope_n = (n * sxy - sx * sy) / denom;
      double slope_m = (n * mxy - sx * my) / denom;
      hs.r_b = std::exp(-slope_n);
      hs.r_m = std::exp(slope_m);
      if (hs.r_m && *hs.r_m > 0 && std::log(*hs.r_m) != 0.0)
        hs.alpha = std::log(*hs.r_b) / std::log(*hs.r_m);
    }
  }
  return hs;
}

double predicted_rb(double a, double c) {
  double s = 2.0 + c + a;
  return (s + std::sqrt(s * s - 8.0 * c)) / 2.0;
}

}  // namespace dendroflow

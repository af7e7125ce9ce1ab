#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dendroflow/tree.hpp"

namespace dendroflow {

/// Tree with Horton-Strahler orders. Leaves have order 1; a parent whose
/// highest-order children tie takes that order plus one, otherwise the
/// maximum. omega is the root (= maximal) order.
struct OrderedTree {
  Tree tree;
  std::vector<int> order;  // parallel to the arena
  int omega = 0;
};

OrderedTree assign_orders(Tree t);

/// One pruning: removes the leaves together with every vertex whose entire
/// subtree is a single-child chain ending in a leaf. Removed slots are
/// tombstoned and the survivors compacted into a fresh arena. prune(empty)
/// is empty.
Tree prune(const Tree& t);

/// Oracle companion to assign_orders: simulates iterated pruning and reports
/// the round at which each node is removed plus the number of rounds to
/// reach the empty tree.
struct PruningOrders {
  std::vector<int> removal_round;  // parallel to the arena
  int omega = 0;
};
PruningOrders pruning_orders(const Tree& t);

/// Maximal chains of equal-order vertices. The initial vertex is nearest the
/// root; magnitude counts the leaves under it. The complete flag defaults to
/// true and is meaningful for series-derived trees, where boundary-touching
/// basins mark their branches incomplete (see mark_completeness).
struct Branch {
  int order = 0;
  std::vector<NodeId> vertices;  // initial first
  long magnitude = 0;
  bool complete = true;

  NodeId initial() const { return vertices.front(); }
  NodeId terminal() const { return vertices.back(); }
};

struct BranchSet {
  int omega = 0;
  std::vector<Branch> branches;
  std::vector<int> branch_of_node;      // arena index -> branch index
  std::vector<long> count_by_order;     // N_r, index r (0 unused)
  std::vector<double> mean_magnitude;   // M_r, index r (0 unused)

  long count(int r) const { return count_by_order[static_cast<std::size_t>(r)]; }
};

BranchSet branch_decomposition(const OrderedTree& ot);

/// Marks a branch complete exactly when its terminal vertex (the apex) has
/// order-r minima on both sides in the source series: `source` maps nodes to
/// sample positions and `t_lists` holds the order-j minima positions
/// (iterated_minima_positions of the series the tree was built from).
void mark_completeness(BranchSet& bs, const OrderedTree& ot,
                       const std::vector<std::size_t>& source,
                       const std::vector<std::vector<std::size_t>>& t_lists);

/// Side-branch bookkeeping over a binary ordered tree. side_counts[i][j]
/// counts order-i branches joining non-terminal vertices of order-j
/// branches; joins at a terminal vertex are the two principal order-(j-1)
/// children and feed the diagonal N_ii = 2 N_{i+1} instead. When
/// complete_only is set, only complete order-j host branches contribute to
/// both N_ij and the denominator of T_ij.
///
/// Trees with multi-child vertices (collapsed tied minima, e.g. lattice
/// walks) are rejected unless allow_general is set; then every max-order
/// child of a terminal vertex is principal and all lower-order children
/// anywhere count as side branches, which reduces to the usual rule on
/// binary trees.
struct TokunagaMatrix {
  int omega = 0;
  bool complete_only = false;
  std::vector<std::vector<long>> side_counts;      // N_ij for i<j (filtered per flag)
  std::vector<std::vector<long>> tau;              // tau[b][i]: raw per-branch counts
  std::vector<long> principal_counts;              // N_ii
  std::vector<long> branches_used;                 // denominator per order j
  std::vector<std::vector<double>> ratios;         // T_ij; T_ii = 2

  long n_side(int i, int j) const { return side_counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  double t(int i, int j) const { return ratios[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
};

TokunagaMatrix tokunaga_matrix(const OrderedTree& ot, const BranchSet& bs, bool complete_only,
                               bool allow_general = false);

/// Branch-count and magnitude statistics with least-squares Horton ratio
/// fits on log N_r and log M_r over r in [1, omega-2]. Fits are withheld
/// (nullopt) when fewer than two orders qualify.
struct HortonStats {
  int omega = 0;
  std::vector<long> branch_counts;      // N_r
  std::vector<double> magnitudes;       // M_r
  std::vector<double> eta;              // eta_r = N_r / N_{r+1}, index r
  std::vector<double> magnitude_ratio;  // M_{r+1} / M_r, index r
  std::optional<double> r_b;
  std::optional<double> r_m;
  std::optional<double> alpha;          // log R_B / log R_M
};

HortonStats horton_stats(const BranchSet& bs);

/// Closed-form branching ratio of a Tokunaga tree with parameters (a, c):
/// (2 + c + a + sqrt((2 + c + a)^2 - 8c)) / 2.
double predicted_rb(double a, double c);

}  // namespace dendroflow

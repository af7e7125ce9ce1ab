#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "dendroflow/series.hpp"
#include "dendroflow/tree.hpp"

namespace dendroflow {

/// Piecewise-linear function with slopes exactly +-1 through the local
/// extrema and boundary values of a series. The domain starts at
/// start_abscissa = w(ghost) + X(L) - min over internal minima, which makes
/// it coincide with the Harris path of the level-set tree on its domain.
struct ExtremeFunction {
  double start_abscissa = 0.0;
  std::vector<std::pair<double, double>> breakpoints;  // (abscissa, height)

  double domain_begin() const { return breakpoints.front().first; }
  double domain_end() const { return breakpoints.back().first; }
  /// Linear interpolation; throws std::invalid_argument outside the domain.
  double eval(double x) const;
};

/// Level-set tree plus the sample index each node came from (leaves map to
/// local maxima, internal vertices to internal local minima).
struct IndexedTree {
  Tree tree;
  std::vector<std::size_t> source;  // parallel to tree arena
};

/// Tree of the merge structure of the upper level sets {t : X_t >= alpha}.
/// Leaves <-> local maxima (boundary maxima included), internal vertices <->
/// internal local minima, edge length = |value difference|. Ghost edge: if
/// the global minimum sits on the boundary, its drop from the lowest internal
/// minimum; if the global minimum is interior, 1 by convention.
/// Throws std::invalid_argument("degenerate series...") when the series has
/// no internal extremum and is not a single sample.
Tree level_set_tree(const Series& s);
IndexedTree level_set_tree_indexed(const Series& s);

ExtremeFunction extreme_function(const Series& s);

/// d_X(a,b) = (X(a) - inf) + (X(b) - inf) with the infimum over [a^b, avb],
/// evaluated on the piecewise-linear extreme function.
double pseudo_distance(const ExtremeFunction& f, double a, double b);

/// The ordered values of the internal local minima (one series pruning).
Series prune_series(const Series& s);

/// Sample positions of the internal local minima.
std::vector<std::size_t> internal_minima_positions(const Series& s);

/// T_j lists: positions (in the original series) of the order-j local
/// minima, i.e. the points surviving j prunings as internal minima.
/// Index 0 holds T_1. Iterates until the pruned series has no minima.
std::vector<std::vector<std::size_t>> iterated_minima_positions(const Series& s);

/// Decomposition along the descending ladder (the set where the path equals
/// its running minimum): vertically shifted positive excursions, monotone
/// fall amounts between them, and an optional trailing segment that never
/// returned to the running minimum. Excursion end points falling between
/// samples are linearly interpolated.
struct LadderDecomposition {
  std::vector<Series> excursions;        // each shifted to start and end at 0
  std::vector<double> excursion_levels;  // absolute level each excursion sits on
  std::vector<double> falls;             // positive drop per maximal ladder interval
  std::vector<double> fall_levels;       // level at the start of each fall
  std::optional<Series> trailing;        // shifted to start at 0
  std::optional<double> trailing_level;
};
LadderDecomposition descending_ladder(const Series& s);

/// Basins of a given order: segments between consecutive order-r minima,
/// each holding exactly one apex (the highest order-(r-1) point inside).
struct BasinDecomposition {
  int order = 0;
  struct Basin {
    std::size_t left, apex, right;  // sample positions in the original series
  };
  std::vector<Basin> basins;
  // Boundary segments not enclosed by order-r minima; when the series has no
  // order-r minima at all the two merge and only incomplete_left is set.
  std::optional<std::pair<std::size_t, std::size_t>> incomplete_left;
  std::optional<std::pair<std::size_t, std::size_t>> incomplete_right;
};
BasinDecomposition basin_decomposition(const Series& s, int order);

/// A local minimum of order i that joins a higher-order branch: its branch
/// index {i j} is the smallest j with X_k >= the opposite order-j minimum.
/// Only minima whose enclosing order-j basin is complete are resolved.
struct SideBranchRecord {
  std::size_t position;
  int branch_order;   // i
  int host_order;     // j > i; 0 when unresolved (boundary basin)
  bool host_complete;
};
std::vector<SideBranchRecord> classify_side_branches(const Series& s);

}  // namespace dendroflow

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dendroflow {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct Node {
  NodeId parent = kNoNode;
  std::vector<NodeId> children;  // planar order, left to right
  // Length of the edge to the parent; for the root this is the ghost edge
  // and mirrors Tree::ghost_edge_length.
  double parent_edge_length = 1.0;

  bool is_leaf() const { return children.empty(); }
};

/// Rooted planar tree with positive edge lengths in an index arena.
/// Every vertex has exactly one parental edge; the root's is the "ghost"
/// edge hanging above it. The empty tree (no nodes) is representable.
/// Trees are treated as immutable after construction: structural edits
/// (pruning, contraction) produce new trees.
class Tree {
 public:
  Tree() = default;

  /// Builds a validated tree. `edges[i]` is (parent index, edge length) for
  /// node i; the unique root has parent -1 and its length entry is ignored
  /// in favor of `ghost_length`. Child order under a parent follows input
  /// order. Throws std::invalid_argument on cycles, nonpositive lengths,
  /// multiple/missing roots, or unreachable nodes, naming the offending node.
  static Tree build(const std::vector<std::pair<NodeId, double>>& edges, double ghost_length);

  static Tree empty_tree() { return Tree(); }
  static Tree single_node(double ghost_length);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return root_; }
  double ghost_edge_length() const { return ghost_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Sum of all edge lengths including the ghost edge.
  double length() const;
  std::size_t leaf_count() const;

  /// Distance of every node from the ghost edge origin (root depth equals
  /// the ghost edge length).
  std::vector<double> depths() const;

  /// Children-before-parent order; iterative, safe for deep trees.
  std::vector<NodeId> post_order() const;
  /// Parent-before-children order.
  std::vector<NodeId> pre_order() const;

  /// Leaf count of every subtree.
  std::vector<long> subtree_leaf_counts() const;

  /// Structural audit; throws std::logic_error when an invariant is broken.
  void validate() const;

  // Arena access for construction by library internals. Use build() for
  // anything user-facing.
  std::vector<Node>& mutable_nodes() { return nodes_; }
  void set_root(NodeId r) { root_ = r; }
  void set_ghost(double g);

 private:
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
  double ghost_ = 1.0;
};

/// Piecewise-linear excursion with slopes exactly +-1, stored as the ordered
/// breakpoints (abscissa, height) of its direction changes.
struct HarrisPath {
  std::vector<std::pair<double, double>> breakpoints;

  double span() const {
    return breakpoints.empty() ? 0.0 : breakpoints.back().first - breakpoints.front().first;
  }
};

/// Depth-first contour of the tree (each edge traveled twice, ghost edge
/// included), as a +-1-slope excursion starting at abscissa 0.
HarrisPath harris_path(const Tree& t);

/// Same combinatorial structure with every edge length (ghost included)
/// replaced by 1.
Tree shape(const Tree& t);

/// Planar structural equality; edge lengths ignored.
bool same_shape(const Tree& a, const Tree& b);

/// Full equality: structure plus exact edge and ghost lengths.
bool same_tree(const Tree& a, const Tree& b);

/// Removes every single-child vertex, merging the lengths of the contracted
/// edges (a single-child root is absorbed into the ghost edge). Level-set
/// trees of series never contain such vertices; pruning creates them.
Tree contract_single_child(const Tree& t);

/// Number of distinct planar binary trees with n leaves: the (n-1)-th
/// Catalan number. Throws std::domain_error for n = 0 and
/// std::overflow_error once the count exceeds 64 bits (n > 33).
std::uint64_t catalan_count(std::uint64_t n_leaves);

/// All planar binary tree shapes with exactly n leaves, unit lengths.
std::vector<Tree> enumerate_binary_shapes(std::size_t n_leaves);

/// Canonical parenthesis string of the planar shape, e.g. "(()())".
std::string shape_signature(const Tree& t);

/// Path length between two nodes measured along the tree.
double tree_distance(const Tree& t, NodeId a, NodeId b);

/// Text format: header "ghost <len>", then one line per node
/// "id parent_id edge_length child_rank". Lengths keep 12 significant
/// digits and round-trip bit-exactly through parse_tree.
std::string serialize_tree(const Tree& t);
Tree parse_tree(std::istream& in);
Tree parse_tree(const std::string& text);

/// printf "%.12g" formatting used for all numeric text output.
std::string format_double(double x);

}  // namespace dendroflow

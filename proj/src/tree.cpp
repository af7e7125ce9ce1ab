#include "dendroflow/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dendroflow {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void Tree::set_ghost(double g) {
  ghost_ = g;
  if (root_ != kNoNode) nodes_[static_cast<std::size_t>(root_)].parent_edge_length = g;
}

Tree Tree::single_node(double ghost_length) {
  if (!(ghost_length > 0.0)) throw std::invalid_argument("single_node: ghost length must be positive");
  Tree t;
  t.nodes_.resize(1);
  t.root_ = 0;
  t.set_ghost(ghost_length);
  return t;
}

Tree Tree::build(const std::vector<std::pair<NodeId, double>>& edges, double ghost_length) {
  const std::size_t n = edges.size();
  if (!(ghost_length > 0.0)) throw std::invalid_argument("build_tree: ghost length must be positive");
  if (n == 0) return Tree();

  Tree t;
  t.nodes_.resize(n);
  NodeId root = kNoNode;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [parent, len] = edges[i];
    if (parent == kNoNode) {
      if (root != kNoNode)
        throw std::invalid_argument("build_tree: multiple roots (nodes " + std::to_string(root) +
                                    " and " + std::to_string(i) + ")");
      root = static_cast<NodeId>(i);
      continue;
    }
    if (parent < 0 || static_cast<std::size_t>(parent) >= n)
      throw std::invalid_argument("build_tree: node " + std::to_string(i) + " has out-of-range parent");
    if (static_cast<std::size_t>(parent) == i)
      throw std::invalid_argument("build_tree: cycle at node " + std::to_string(i) + " (self parent)");
    if (!(len > 0.0))
      throw std::invalid_argument("build_tree: nonpositive edge length at node " + std::to_string(i));
    t.nodes_[i].parent = parent;
    t.nodes_[i].parent_edge_length = len;
    t.nodes_[static_cast<std::size_t>(parent)].children.push_back(static_cast<NodeId>(i));
  }
  if (root == kNoNode)
    throw std::invalid_argument("build_tree: no root; parent links contain a cycle (node 0)");
  t.root_ = root;
  t.set_ghost(ghost_length);
  t.validate();
  return t;
}

void Tree::validate() const {
  if (empty()) return;
  if (root_ < 0 || static_cast<std::size_t>(root_) >= nodes_.size())
    throw std::logic_error("tree: root out of range");
  if (node(root_).parent != kNoNode) throw std::logic_error("tree: root has a parent");
  if (!(ghost_ > 0.0)) throw std::logic_error("tree: nonpositive ghost edge");

  std::size_t seen = 0;
  std::vector<char> visited(nodes_.size(), 0);
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (visited[static_cast<std::size_t>(id)])
      throw std::logic_error("tree: node " + std::to_string(id) + " reached twice (cycle)");
    visited[static_cast<std::size_t>(id)] = 1;
    ++seen;
    const Node& nd = node(id);
    if (id != root_ && !(nd.parent_edge_length > 0.0))
      throw std::logic_error("tree: nonpositive edge length at node " + std::to_string(id));
    for (NodeId c : nd.children) {
      if (c < 0 || static_cast<std::size_t>(c) >= nodes_.size())
        throw std::logic_error("tree: child index out of range at node " + std::to_string(id));
      if (node(c).parent != id)
        throw std::logic_error("tree: parent/child mismatch at node " + std::to_string(c));
      stack.push_back(c);
    }
  }
  if (seen != nodes_.size()) {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (!visited[i])
        throw std::logic_error("tree: node " + std::to_string(i) + " unreachable from root");
  }
}

double Tree::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) total += nodes_[i].parent_edge_length;
  return total;
}

std::size_t Tree::leaf_count() const {
  std::size_t k = 0;
  for (const Node& nd : nodes_)
    if (nd.is_leaf()) ++k;
  return k;
}

std::vector<double> Tree::depths() const {
  std::vector<double> d(nodes_.size(), 0.0);
  for (NodeId id : pre_order()) {
    const Node& nd = node(id);
    d[static_cast<std::size_t>(id)] =
        (nd.parent == kNoNode ? ghost_ : d[static_cast<std::size_t>(nd.parent)] + nd.parent_edge_length);
  }
  return d;
}

std::vector<NodeId> Tree::pre_order() const {
  std::vector<NodeId> out;
  if (empty()) return out;
  out.reserve(nodes_.size());
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const auto& ch = node(id).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> Tree::post_order() const {
  std::vector<NodeId> out = pre_order();
  std::reverse(out.begin(), out.end());
  // reversed pre-order with children pushed left-to-right visits parents
  // before children right-to-left; reversing gives a valid post-order
  return out;
}

std::vector<long> Tree::subtree_leaf_counts() const {
  std::vector<long> counts(nodes_.size(), 0);
  for (NodeId id : post_order()) {
    const Node& nd = node(id);
    if (nd.is_leaf()) {
      counts[static_cast<std::size_t>(id)] = 1;
    } else {
      long s = 0;
      for (NodeId c : nd.children) s += counts[static_cast<std::size_t>(c)];
      counts[static_cast<std::size_t>(id)] = s;
    }
  }
  return counts;
}

HarrisPath harris_path(const Tree& t) {
  if (t.empty()) throw std::invalid_argument("harris_path: empty tree");
  std::vector<double> depth = t.depths();

  // Euler contour heights: 0, then each vertex depth on the way down and
  // again after each child, then 0. Monotone runs collapse to breakpoints.
  std::vector<double> heights;
  heights.reserve(2 * t.size() + 2);
  heights.push_back(0.0);
  // (node, next child slot)
  std::vector<std::pair<NodeId, std::size_t>> stack{{t.root(), 0}};
  heights.push_back(depth[static_cast<std::size_t>(t.root())]);
  while (!stack.empty()) {
    auto& [id, slot] = stack.back();
    const Node& nd = t.node(id);
    if (slot < nd.children.size()) {
      NodeId c = nd.children[slot];
      ++slot;
      stack.push_back({c, 0});
      heights.push_back(depth[static_cast<std::size_t>(c)]);
    } else {
      stack.pop_back();
      if (!stack.empty()) heights.push_back(depth[static_cast<std::size_t>(stack.back().first)]);
    }
  }
  heights.push_back(0.0);

  HarrisPath path;
  path.breakpoints.emplace_back(0.0, heights.front());
  double x = 0.0;
  for (std::size_t i = 1; i < heights.size(); ++i) {
    x += std::abs(heights[i] - heights[i - 1]);
    bool turning = (i + 1 == heights.size());
    if (!turning) {
      double d1 = heights[i] - heights[i - 1];
      double d2 = heights[i + 1] - heights[i];
      turning = (d1 > 0) != (d2 > 0);
    }
    if (turning) path.breakpoints.emplace_back(x, heights[i]);
  }
  return path;
}

Tree shape(const Tree& t) {
  Tree s = t;
  for (Node& nd : s.mutable_nodes()) nd.parent_edge_length = 1.0;
  if (!s.empty()) s.set_ghost(1.0);
  return s;
}

namespace {

bool equal_impl(const Tree& a, const Tree& b, bool with_lengths) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  if (with_lengths && a.ghost_edge_length() != b.ghost_edge_length()) return false;
  std::vector<std::pair<NodeId, NodeId>> stack{{a.root(), b.root()}};
  while (!stack.empty()) {
    auto [na, nb] = stack.back();
    stack.pop_back();
    const Node& xa = a.node(na);
    const Node& xb = b.node(nb);
    if (xa.children.size() != xb.children.size()) return false;
    if (with_lengths && na != a.root() && xa.parent_edge_length != xb.parent_edge_length) return false;
    for (std::size_t i = 0; i < xa.children.size(); ++i)
      stack.push_back({xa.children[i], xb.children[i]});
  }
  return true;
}

}  // namespace

bool same_shape(const Tree& a, const Tree& b) { return equal_impl(a, b, false); }
bool same_tree(const Tree& a, const Tree& b) { return equal_impl(a, b, true); }

Tree contract_single_child(const Tree& t) {
  if (t.empty()) return t;

  // Walk down from the root through any unary chain, absorbing it into the
  // ghost edge.
  NodeId eff_root = t.root();
  double ghost = t.ghost_edge_length();
  while (t.node(eff_root).children.size() == 1) {
    NodeId c = t.node(eff_root).children[0];
    ghost += t.node(c).parent_edge_length;
    eff_root = c;
  }

  Tree out;
  auto& arena = out.mutable_nodes();
  arena.emplace_back();
  std::vector<std::pair<NodeId, NodeId>> stack{{eff_root, 0}};  // (old id, new id)
  while (!stack.empty()) {
    auto [old_id, new_id] = stack.back();
    stack.pop_back();
    std::vector<std::pair<NodeId, NodeId>> batch;
    for (NodeId c0 : t.node(old_id).children) {
      NodeId c = c0;
      double len = t.node(c).parent_edge_length;
      while (t.node(c).children.size() == 1) {
        NodeId g = t.node(c).children[0];
        len += t.node(g).parent_edge_length;
        c = g;
      }
      NodeId fresh = static_cast<NodeId>(arena.size());
      arena.emplace_back();
      arena[static_cast<std::size_t>(fresh)].parent = new_id;
      arena[static_cast<std::size_t>(fresh)].parent_edge_length = len;
      arena[static_cast<std::size_t>(new_id)].children.push_back(fresh);
      batch.push_back({c, fresh});
    }
    for (auto it = batch.rbegin(); it != batch.rend(); ++it) stack.push_back(*it);
  }
  out.set_root(0);
  out.set_ghost(ghost);
  out.validate();
  return out;
}

std::uint64_t catalan_count(std::uint64_t n_leaves) {
  if (n_leaves == 0) throw std::domain_error("catalan_count: n must be >= 1");
  if (n_leaves > 33) throw std::overflow_error("catalan_count: exceeds 64 bits for n > 33");
  // C_0 = 1, C_{k+1} = C_k * 2(2k+1)/(k+2)
  std::uint64_t c = 1;
  for (std::uint64_t k = 0; k + 1 < n_leaves; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
  return c;
}

namespace {

void append_shape(Tree& t, NodeId parent, const std::string& sig, std::size_t& pos);

// Parses "(" children... ")" where a leaf is "()".
void append_shape(Tree& t, NodeId parent, const std::string& sig, std::size_t& pos) {
  auto& arena = t.mutable_nodes();
  NodeId id = static_cast<NodeId>(arena.size());
  arena.emplace_back();
  arena[static_cast<std::size_t>(id)].parent = parent;
  if (parent != kNoNode) arena[static_cast<std::size_t>(parent)].children.push_back(id);
  ++pos;  // consume '('
  while (pos < sig.size() && sig[pos] == '(') append_shape(t, id, sig, pos);
  ++pos;  // consume ')'
}

}  // namespace

std::vector<Tree> enumerate_binary_shapes(std::size_t n_leaves) {
  if (n_leaves == 0) return {};
  // signatures by leaf count, built recursively
  std::vector<std::vector<std::string>> sigs(n_leaves + 1);
  sigs[1] = {"()"};
  for (std::size_t n = 2; n <= n_leaves; ++n)
    for (std::size_t l = 1; l < n; ++l)
      for (const auto& a : sigs[l])
        for (const auto& b : sigs[n - l]) sigs[n].push_back("(" + a + b + ")");
  std::vector<Tree> out;
  out.reserve(sigs[n_leaves].size());
  for (const auto& s : sigs[n_leaves]) {
    Tree t;
    std::size_t pos = 0;
    append_shape(t, kNoNode, s, pos);
    t.set_root(0);
    t.set_ghost(1.0);
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

std::string shape_signature(const Tree& t) {
  if (t.empty()) return "";
  std::string sig;
  sig.reserve(2 * t.size());
  // iterative pre-order with close markers
  std::vector<std::pair<NodeId, bool>> stack{{t.root(), false}};
  while (!stack.empty()) {
    auto [id, closing] = stack.back();
    stack.pop_back();
    if (closing) {
      sig.push_back(')');
      continue;
    }
    sig.push_back('(');
    stack.push_back({id, true});
    const auto& ch = t.node(id).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back({*it, false});
  }
  return sig;
}

double tree_distance(const Tree& t, NodeId a, NodeId b) {
  if (a == b) return 0.0;
  std::vector<int> hops(t.size(), -1);
  int h = 0;
  for (NodeId v = a; v != kNoNode; v = t.node(v).parent) hops[static_cast<std::size_t>(v)] = h++;
  // climb from b until a marked ancestor
  double dist_b = 0.0;
  NodeId v = b;
  while (hops[static_cast<std::size_t>(v)] < 0) {
    dist_b += t.node(v).parent_edge_length;
    v = t.node(v).parent;
    if (v == kNoNode) throw std::invalid_argument("tree_distance: nodes in different trees");
  }
  double dist_a = 0.0;
  NodeId u = a;
  while (u != v) {
    dist_a += t.node(u).parent_edge_length;
    u = t.node(u).parent;
  }
  return dist_a + dist_b;
}

std::string serialize_tree(const Tree& t) {
  std::ostringstream os;
  os << "ghost " << format_double(t.ghost_edge_length()) << "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Node& nd = t.node(static_cast<NodeId>(i));
    int rank = 1;
    if (nd.parent != kNoNode) {
      const auto& sibs = t.node(nd.parent).children;
      rank = static_cast<int>(std::find(sibs.begin(), sibs.end(), static_cast<NodeId>(i)) -
                              sibs.begin()) + 1;
    }
    os << i << ' ' << nd.parent << ' ' << format_double(nd.parent_edge_length) << ' ' << rank
       << "\n";
  }
  return os.str();
}

Tree parse_tree(std::istream& in) {
  std::string word;
  if (!(in >> word) || word != "ghost") throw std::runtime_error("parse_tree: missing ghost header");
  double ghost = 0.0;
  if (!(in >> ghost) || !(ghost > 0.0)) throw std::runtime_error("parse_tree: bad ghost length");

  struct Row {
    long id, parent;
    double length;
    int rank;
  };
  std::vector<Row> rows;
  long id;
  while (in >> id) {
    Row r{};
    r.id = id;
    if (!(in >> r.parent >> r.length >> r.rank)) throw std::runtime_error("parse_tree: truncated row");
    rows.push_back(r);
  }
  if (rows.empty()) return Tree();

  // arena slots follow file row order, so serialize(parse(text)) == text
  std::map<long, std::size_t> index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!index.emplace(rows[i].id, i).second)
      throw std::runtime_error("parse_tree: duplicate node id " + std::to_string(rows[i].id));
  }
  Tree t;
  auto& arena = t.mutable_nodes();
  arena.resize(rows.size());
  std::map<std::size_t, std::vector<std::pair<int, NodeId>>> kids;
  NodeId root = kNoNode;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].parent < 0) {
      if (root != kNoNode) throw std::runtime_error("parse_tree: multiple roots");
      root = static_cast<NodeId>(i);
      continue;
    }
    auto it = index.find(rows[i].parent);
    if (it == index.end())
      throw std::runtime_error("parse_tree: unknown parent for node " + std::to_string(rows[i].id));
    if (!(rows[i].length > 0.0))
      throw std::runtime_error("parse_tree: nonpositive length for node " + std::to_string(rows[i].id));
    arena[i].parent = static_cast<NodeId>(it->second);
    arena[i].parent_edge_length = rows[i].length;
    kids[it->second].push_back({rows[i].rank, static_cast<NodeId>(i)});
  }
  if (root == kNoNode) throw std::runtime_error("parse_tree: no root row");
  for (auto& [p, v] : kids) {
    std::sort(v.begin(), v.end());
    for (std::size_t r = 0; r < v.size(); ++r) {
      if (v[r].first != static_cast<int>(r + 1))
        throw std::runtime_error("parse_tree: child ranks not contiguous under node " +
                                 std::to_string(rows[p].id));
      arena[p].children.push_back(v[r].second);
    }
  }
  t.set_root(root);
  t.set_ghost(ghost);
  t.validate();
  return t;
}

Tree parse_tree(const std::string& text) {
  std::istringstream is(text);
  return parse_tree(is);
}

}  // namespace dendroflow

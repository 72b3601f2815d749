#pragma once
// Dimension partition trees over D = {1,...,d} with a distinguished set of
// active nodes. The tree fixes which groups of variables get their own
// low-rank subspace; the active set marks the nodes where a rank is actually
// maintained (inactive leaves keep their full approximation space).

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace treepca {

// A node is the sorted list of the dimensions (1-based) it covers.
using Node = std::vector<int>;

std::string node_to_string(const Node& node);

enum class TreeKind { Tucker, TT, TTT, Balanced, Custom };

TreeKind tree_kind_from_string(const std::string& s);
std::string to_string(TreeKind kind);

struct DimensionTree {
  int d = 0;
  // Nodes in canonical order: root first, then breadth-first by level, ties
  // broken by smallest covered dimension. Index 0 is always the root.
  std::vector<Node> nodes;
  std::vector<std::vector<int>> sons;  // per node, son indices ordered by min element
  std::vector<int> parent;             // -1 for the root
  std::vector<int> level;              // root has level 0

  int index_of(const Node& node) const;            // throws if absent
  std::optional<int> find(const Node& node) const;
  bool is_leaf(int i) const { return sons[i].empty(); }
  int root() const { return 0; }
  int node_count() const { return static_cast<int>(nodes.size()); }
};

struct ActiveSet {
  std::vector<char> active;  // indexed like DimensionTree::nodes; root never active

  bool is_active(int i) const { return active[i] != 0; }
  int count() const;
};

// Rank per active node (r_D = 1 is implicit and not stored).
struct RankTuple {
  std::map<Node, int> r;

  int at(const Node& node) const;
  static RankTuple uniform(const DimensionTree& tree, const ActiveSet& active, int rank);
};

// Dimension of the (full) approximation space attached to each leaf.
struct LeafDims {
  std::map<Node, int> n;

  int at(const Node& node) const;
  static LeafDims uniform(const DimensionTree& tree, int dim);
};

// Builds the tree and the standard active set of a named format:
//   tucker   - root with d leaf sons, all leaves active
//   tt       - linear tree; active nodes are {1},{1,2},...,{1..d-1} (the final
//              leaf {d} stays inactive, which spans the same set of tensors)
//   ttt      - linear tree with every non-root node active
//   balanced - full binary tree (split halves), every non-root node active
// `custom_spec` (required for Custom) lists the nodes; sons and levels are
// recovered from set inclusion, and `custom_active` flags each listed node.
std::pair<DimensionTree, ActiveSet> build_tree(TreeKind kind, int d,
                                               const std::vector<Node>* custom_spec = nullptr,
                                               const std::vector<char>* custom_active = nullptr);

// Active nodes in processing order: active tree leaves first (by smallest
// dimension), then interior active nodes from the deepest level up. Every
// node appears after all of its active descendants; the root is excluded.
std::vector<int> nodes_bottom_up(const DimensionTree& tree, const ActiveSet& active);

// Number of stored coefficients of a representation with the given ranks:
// interior nodes (and the root) contribute r_alpha times the product of their
// sons' sizes (rank if the son is active, leaf dimension otherwise); active
// leaves contribute r_alpha * n_alpha.
std::int64_t storage_complexity(const DimensionTree& tree, const ActiveSet& active,
                                const RankTuple& ranks, const LeafDims& leaf_dims);

// Text form used in configs and reports: one line per node in canonical
// order, "{dims} [*] parent_index", '*' marking active nodes, -1 for the
// root's parent. parse_tree_text accepts the same format.
std::string tree_to_text(const DimensionTree& tree, const ActiveSet& active);
std::pair<DimensionTree, ActiveSet> parse_tree_text(const std::string& text);

}  // namespace treepca

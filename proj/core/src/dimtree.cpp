#include "treepca/dimtree.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace treepca {

std::string node_to_string(const Node& node) {
  std::string s = "{";
  for (size_t i = 0; i < node.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(node[i]);
  }
  s += '}';
  return s;
}

TreeKind tree_kind_from_string(const std::string& s) {
  if (s == "tucker") return TreeKind::Tucker;
  if (s == "tt") return TreeKind::TT;
  if (s == "ttt") return TreeKind::TTT;
  if (s == "balanced") return TreeKind::Balanced;
  if (s == "custom") return TreeKind::Custom;
  throw std::invalid_argument("unknown tree kind: " + s);
}

std::string to_string(TreeKind kind) {
  switch (kind) {
    case TreeKind::Tucker: return "tucker";
    case TreeKind::TT: return "tt";
    case TreeKind::TTT: return "ttt";
    case TreeKind::Balanced: return "balanced";
    case TreeKind::Custom: return "custom";
  }
  return "?";
}

int DimensionTree::index_of(const Node& node) const {
  auto idx = find(node);
  if (!idx) throw std::invalid_argument("node not in tree: " + node_to_string(node));
  return *idx;
}

std::optional<int> DimensionTree::find(const Node& node) const {
  for (int i = 0; i < node_count(); ++i)
    if (nodes[i] == node) return i;
  return std::nullopt;
}

int ActiveSet::count() const {
  int c = 0;
  for (char a : active) c += (a != 0);
  return c;
}

int RankTuple::at(const Node& node) const {
  auto it = r.find(node);
  if (it == r.end()) throw std::invalid_argument("missing rank for node " + node_to_string(node));
  return it->second;
}

RankTuple RankTuple::uniform(const DimensionTree& tree, const ActiveSet& active, int rank) {
  RankTuple t;
  for (int i = 0; i < tree.node_count(); ++i)
    if (active.is_active(i)) t.r[tree.nodes[i]] = rank;
  return t;
}

int LeafDims::at(const Node& node) const {
  auto it = n.find(node);
  if (it == n.end())
    throw std::invalid_argument("missing leaf dimension for node " + node_to_string(node));
  return it->second;
}

LeafDims LeafDims::uniform(const DimensionTree& tree, int dim) {
  LeafDims l;
  for (int i = 0; i < tree.node_count(); ++i)
    if (tree.is_leaf(i)) l.n[tree.nodes[i]] = dim;
  return l;
}

namespace {

// Assembles parent/sons/levels from a bare node list and validates the
// partition structure. Nodes are re-sorted into canonical order first.
DimensionTree assemble(int d, std::vector<Node> node_list, std::vector<char>* active_flags) {
  for (auto& n : node_list) {
    if (n.empty()) throw std::invalid_argument("empty node in tree spec");
    std::sort(n.begin(), n.end());
    if (std::adjacent_find(n.begin(), n.end()) != n.end())
      throw std::invalid_argument("node with repeated dimension: " + node_to_string(n));
    if (n.front() < 1 || n.back() > d)
      throw std::invalid_argument("node outside 1.." + std::to_string(d) + ": " + node_to_string(n));
  }

  Node root_node(d);
  std::iota(root_node.begin(), root_node.end(), 1);
  if (std::find(node_list.begin(), node_list.end(), root_node) == node_list.end())
    throw std::invalid_argument("tree spec is missing the root node " + node_to_string(root_node));

  // The parent of a node is its smallest strict superset in the list.
  auto is_subset = [](const Node& a, const Node& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };

  const int count = static_cast<int>(node_list.size());
  std::vector<int> par(count, -1);
  for (int i = 0; i < count; ++i) {
    if (node_list[i] == root_node) continue;
    int best = -1;
    for (int j = 0; j < count; ++j) {
      if (j == i || node_list[j].size() <= node_list[i].size()) continue;
      if (!is_subset(node_list[i], node_list[j])) continue;
      if (best < 0 || node_list[j].size() < node_list[best].size()) best = j;
    }
    if (best < 0)
      throw std::invalid_argument("orphan node (no superset in tree): " + node_to_string(node_list[i]));
    par[i] = best;
  }

  // Levels from parent chains; also detects duplicated nodes.
  std::vector<int> lev(count, -1);
  for (int i = 0; i < count; ++i) {
    int steps = 0, j = i;
    while (par[j] >= 0) {
      j = par[j];
      if (++steps > count) throw std::invalid_argument("cycle in tree spec");
    }
    if (node_list[j] != root_node) throw std::invalid_argument("multiple roots in tree spec");
  }
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j)
      if (node_list[i] == node_list[j])
        throw std::invalid_argument("duplicate node: " + node_to_string(node_list[i]));

  // Canonical order: by level (root first), then by smallest element.
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> lev0(count, 0);
  for (int i = 0; i < count; ++i) {
    int l = 0;
    for (int j = i; par[j] >= 0; j = par[j]) ++l;
    lev0[i] = l;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lev0[a] != lev0[b]) return lev0[a] < lev0[b];
    return node_list[a].front() < node_list[b].front();
  });

  DimensionTree tree;
  tree.d = d;
  tree.nodes.resize(count);
  tree.parent.assign(count, -1);
  tree.level.assign(count, 0);
  tree.sons.assign(count, {});
  std::vector<int> pos(count);
  for (int k = 0; k < count; ++k) pos[order[k]] = k;
  for (int k = 0; k < count; ++k) {
    tree.nodes[k] = node_list[order[k]];
    tree.parent[k] = par[order[k]] < 0 ? -1 : pos[par[order[k]]];
    tree.level[k] = lev0[order[k]];
  }
  for (int k = 1; k < count; ++k) tree.sons[tree.parent[k]].push_back(k);
  for (auto& s : tree.sons)
    std::sort(s.begin(), s.end(),
              [&](int a, int b) { return tree.nodes[a].front() < tree.nodes[b].front(); });

  // Sons of every non-leaf node must partition it.
  for (int k = 0; k < count; ++k) {
    if (tree.sons[k].empty()) continue;
    Node merged;
    for (int s : tree.sons[k]) merged.insert(merged.end(), tree.nodes[s].begin(), tree.nodes[s].end());
    std::sort(merged.begin(), merged.end());
    if (std::adjacent_find(merged.begin(), merged.end()) != merged.end())
      throw std::invalid_argument("overlapping sons under node " + node_to_string(tree.nodes[k]));
    if (merged != tree.nodes[k])
      throw std::invalid_argument("sons do not cover node " + node_to_string(tree.nodes[k]));
  }

  if (active_flags) {
    std::vector<char> reordered(count, 0);
    for (int k = 0; k < count; ++k) reordered[k] = (*active_flags)[order[k]];
    *active_flags = std::move(reordered);
  }
  return tree;
}

void validate_active(const DimensionTree& tree, const ActiveSet& active) {
  if (static_cast<int>(active.active.size()) != tree.node_count())
    throw std::invalid_argument("active set size does not match tree");
  if (active.is_active(tree.root()))
    throw std::invalid_argument("root cannot be active");
  for (int i = 1; i < tree.node_count(); ++i) {
    if (!active.is_active(i) && !tree.is_leaf(i))
      throw std::invalid_argument("inactive interior node " + node_to_string(tree.nodes[i]) +
                                  " (only leaves may be inactive)");
    if (active.is_active(i)) {
      int p = tree.parent[i];
      if (p != tree.root() && !active.is_active(p))
        throw std::invalid_argument("active node " + node_to_string(tree.nodes[i]) +
                                    " has an inactive parent");
    }
  }
}

}  // namespace

std::pair<DimensionTree, ActiveSet> build_tree(TreeKind kind, int d,
                                               const std::vector<Node>* custom_spec,
                                               const std::vector<char>* custom_active) {
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");

  std::vector<Node> list;
  std::vector<char> flags;
  auto add = [&](Node n, bool a) {
    list.push_back(std::move(n));
    flags.push_back(a ? 1 : 0);
  };
  Node full(d);
  std::iota(full.begin(), full.end(), 1);

  switch (kind) {
    case TreeKind::Tucker: {
      add(full, false);
      for (int v = 1; v <= d; ++v) add({v}, true);
      break;
    }
    case TreeKind::TT:
    case TreeKind::TTT: {
      const bool leaves_active = (kind == TreeKind::TTT);
      add(full, false);
      for (int k = d - 1; k >= 2; --k) {
        Node n(k);
        std::iota(n.begin(), n.end(), 1);
        add(std::move(n), true);
      }
      add({1}, true);
      for (int v = 2; v <= d; ++v) add({v}, leaves_active);
      break;
    }
    case TreeKind::Balanced: {
      // Recursive halving; every non-root node is active.
      std::vector<std::pair<int, int>> stack{{1, d}};  // inclusive ranges
      bool root_added = false;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        Node n(b - a + 1);
        std::iota(n.begin(), n.end(), a);
        add(std::move(n), root_added);
        root_added = true;
        if (b > a) {
          int mid = a + (b - a + 1) / 2 - 1;  // left half gets the extra element
          stack.push_back({mid + 1, b});
          stack.push_back({a, mid});
        }
      }
      break;
    }
    case TreeKind::Custom: {
      if (!custom_spec) throw std::invalid_argument("custom tree requires a node list");
      list = *custom_spec;
      if (custom_active) {
        if (custom_active->size() != list.size())
          throw std::invalid_argument("custom active flags must match the node list");
        flags = *custom_active;
      } else {
        // Default: every non-root node active.
        flags.assign(list.size(), 1);
        for (size_t i = 0; i < list.size(); ++i) {
          Node s = list[i];
          std::sort(s.begin(), s.end());
          if (s == full) flags[i] = 0;
        }
      }
      break;
    }
  }

  DimensionTree tree = assemble(d, std::move(list), &flags);
  ActiveSet active{std::move(flags)};
  validate_active(tree, active);
  return {std::move(tree), std::move(active)};
}

std::vector<int> nodes_bottom_up(const DimensionTree& tree, const ActiveSet& active) {
  validate_active(tree, active);
  std::vector<int> leaves, interior;
  for (int i = 1; i < tree.node_count(); ++i) {
    if (!active.is_active(i)) continue;
    (tree.is_leaf(i) ? leaves : interior).push_back(i);
  }
  std::sort(leaves.begin(), leaves.end(),
            [&](int a, int b) { return tree.nodes[a].front() < tree.nodes[b].front(); });
  std::sort(interior.begin(), interior.end(), [&](int a, int b) {
    if (tree.level[a] != tree.level[b]) return tree.level[a] > tree.level[b];
    return tree.nodes[a].front() < tree.nodes[b].front();
  });
  leaves.insert(leaves.end(), interior.begin(), interior.end());
  return leaves;
}

std::int64_t storage_complexity(const DimensionTree& tree, const ActiveSet& active,
                                const RankTuple& ranks, const LeafDims& leaf_dims) {
  validate_active(tree, active);
  std::int64_t total = 0;
  for (int i = 0; i < tree.node_count(); ++i) {
    const bool is_root = (i == tree.root());
    if (!is_root && !active.is_active(i)) continue;
    const std::int64_t r = is_root ? 1 : ranks.at(tree.nodes[i]);
    std::int64_t block = r;
    if (tree.is_leaf(i)) {
      block *= leaf_dims.at(tree.nodes[i]);
    } else {
      for (int s : tree.sons[i])
        block *= active.is_active(s) ? ranks.at(tree.nodes[s]) : leaf_dims.at(tree.nodes[s]);
    }
    total += block;
  }
  return total;
}

std::string tree_to_text(const DimensionTree& tree, const ActiveSet& active) {
  std::ostringstream out;
  for (int i = 0; i < tree.node_count(); ++i) {
    out << node_to_string(tree.nodes[i]);
    if (active.is_active(i)) out << " *";
    out << ' ' << tree.parent[i] << '\n';
  }
  return out.str();
}

std::pair<DimensionTree, ActiveSet> parse_tree_text(const std::string& text) {
  std::vector<Node> list;
  std::vector<char> flags;
  int d = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto open = line.find('{');
    auto close = line.find('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw std::invalid_argument("malformed tree line: " + line);
    Node n;
    std::string dims = line.substr(open + 1, close - open - 1);
    std::istringstream ds(dims);
    std::string tok;
    while (std::getline(ds, tok, ','))
      if (!tok.empty()) n.push_back(std::stoi(tok));
    std::string rest = line.substr(close + 1);
    flags.push_back(rest.find('*') != std::string::npos ? 1 : 0);
    for (int v : n) d = std::max(d, v);
    list.push_back(std::move(n));
    // The parent index column is implied by the node sets; it is accepted and
    // ignored so that hand-edited files need not keep it consistent.
  }
  if (list.empty()) throw std::invalid_argument("empty tree text");
  return build_tree(TreeKind::Custom, d, &list, &flags);
}

}  // namespace treepca

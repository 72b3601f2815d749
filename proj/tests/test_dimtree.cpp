// Dimension tree construction, canonical ordering, storage accounting and the
// text round trip.
#include <doctest.h>

#include <set>

#include "treepca/dimtree.hpp"

using namespace treepca;

TEST_CASE("node_to_string formats sorted dimension sets") {
  CHECK(node_to_string({1}) == "{1}");
  CHECK(node_to_string({1, 2, 3}) == "{1,2,3}");
  CHECK(node_to_string({}) == "{}");
}

TEST_CASE("tree kind names round trip") {
  for (auto kind : {TreeKind::Tucker, TreeKind::TT, TreeKind::TTT, TreeKind::Balanced})
    CHECK(tree_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(tree_kind_from_string("nonsense"), std::invalid_argument);
}

TEST_CASE("tt tree d=4: canonical order, sons, levels, active set") {
  auto [tree, active] = build_tree(TreeKind::TT, 4);
  REQUIRE(tree.d == 4);
  REQUIRE(tree.node_count() == 7);

  // Root first, then breadth-first by level with ties by smallest dimension.
  const std::vector<Node> expected = {{1, 2, 3, 4}, {1, 2, 3}, {4}, {1, 2}, {3}, {1}, {2}};
  CHECK(tree.nodes == expected);
  CHECK(tree.root() == 0);
  CHECK(tree.parent[0] == -1);
  CHECK(tree.level == std::vector<int>({0, 1, 1, 2, 2, 3, 3}));
  CHECK(tree.sons[0] == std::vector<int>({1, 2}));  // {1,2,3} before {4}
  CHECK(tree.sons[1] == std::vector<int>({3, 4}));
  CHECK(tree.is_leaf(2));
  CHECK(tree.is_leaf(5));
  CHECK_FALSE(tree.is_leaf(1));

  // Active: {1},{1,2},{1,2,3}; all other leaves and the root inactive.
  CHECK(active.count() == 3);
  CHECK(active.is_active(tree.index_of({1})));
  CHECK(active.is_active(tree.index_of({1, 2})));
  CHECK(active.is_active(tree.index_of({1, 2, 3})));
  CHECK_FALSE(active.is_active(tree.index_of({2})));
  CHECK_FALSE(active.is_active(tree.index_of({4})));
  CHECK_FALSE(active.is_active(0));

  CHECK(tree.index_of({1, 2}) == 3);
  CHECK_FALSE(tree.find({2, 3}).has_value());
  CHECK_THROWS_AS(tree.index_of({2, 3}), std::invalid_argument);
}

TEST_CASE("ttt activates every non-root node") {
  auto [tree, active] = build_tree(TreeKind::TTT, 4);
  CHECK(active.count() == tree.node_count() - 1);
  CHECK_FALSE(active.is_active(0));
}

TEST_CASE("tucker tree is a root with active leaf sons") {
  auto [tree, active] = build_tree(TreeKind::Tucker, 3);
  REQUIRE(tree.node_count() == 4);
  CHECK(tree.nodes[0] == Node({1, 2, 3}));
  CHECK(tree.sons[0] == std::vector<int>({1, 2, 3}));
  for (int i = 1; i < 4; ++i) {
    CHECK(tree.is_leaf(i));
    CHECK(active.is_active(i));
  }
}

TEST_CASE("balanced tree d=4 splits halves") {
  auto [tree, active] = build_tree(TreeKind::Balanced, 4);
  const std::vector<Node> expected = {{1, 2, 3, 4}, {1, 2}, {3, 4}, {1}, {2}, {3}, {4}};
  CHECK(tree.nodes == expected);
  CHECK(active.count() == 6);
}

TEST_CASE("bottom-up order: active leaves first, then interiors deepest-up") {
  auto [tree, active] = build_tree(TreeKind::TT, 4);
  CHECK(nodes_bottom_up(tree, active) ==
        std::vector<int>({tree.index_of({1}), tree.index_of({1, 2}), tree.index_of({1, 2, 3})}));

  auto [tree3, active3] = build_tree(TreeKind::TTT, 4);
  const std::vector<int> order = nodes_bottom_up(tree3, active3);
  REQUIRE(order.size() == 6);
  // Leaves by smallest dimension, then {1,2} (level 2) before {1,2,3}.
  CHECK(order == std::vector<int>({tree3.index_of({1}), tree3.index_of({2}), tree3.index_of({3}),
                                   tree3.index_of({4}), tree3.index_of({1, 2}),
                                   tree3.index_of({1, 2, 3})}));
  // Every node after all of its sons.
  std::set<int> seen;
  for (int idx : order) {
    for (int s : tree3.sons[idx])
      if (active3.is_active(s)) CHECK(seen.count(s) == 1);
    seen.insert(idx);
  }
}

TEST_CASE("storage closed form: tt with uniform rank and leaf dimension") {
  // 2rn for the two chain ends plus (d-2) interior blocks of r^2 n.
  const int r = 3, n = 5;
  const std::vector<int> dims = {5, 10, 20, 50, 100};
  const std::vector<std::int64_t> expected = {165, 390, 840, 2190, 4440};
  for (size_t k = 0; k < dims.size(); ++k) {
    auto [tree, active] = build_tree(TreeKind::TT, dims[k]);
    const auto ranks = RankTuple::uniform(tree, active, r);
    const auto leaf = LeafDims::uniform(tree, n);
    CHECK(storage_complexity(tree, active, ranks, leaf) == expected[k]);
  }
}

TEST_CASE("storage closed forms for the other kinds") {
  {
    // ttt: d leaf blocks rn, (d-2) interior r^3, root r^2.
    auto [tree, active] = build_tree(TreeKind::TTT, 4);
    CHECK(storage_complexity(tree, active, RankTuple::uniform(tree, active, 2),
                             LeafDims::uniform(tree, 3)) == 4 * 2 * 3 + 2 * 8 + 4);
  }
  {
    // tucker: d leaf blocks rn plus the root block r^d.
    auto [tree, active] = build_tree(TreeKind::Tucker, 3);
    CHECK(storage_complexity(tree, active, RankTuple::uniform(tree, active, 2),
                             LeafDims::uniform(tree, 4)) == 3 * 2 * 4 + 8);
  }
  {
    // balanced d=4: 4 leaves rn, two interior r*r^2, root r*r.
    auto [tree, active] = build_tree(TreeKind::Balanced, 4);
    CHECK(storage_complexity(tree, active, RankTuple::uniform(tree, active, 2),
                             LeafDims::uniform(tree, 3)) == 4 * 2 * 3 + 2 * 8 + 4);
  }
}

TEST_CASE("storage with non-uniform ranks") {
  auto [tree, active] = build_tree(TreeKind::TT, 3);
  RankTuple ranks;
  ranks.r[{1}] = 2;
  ranks.r[{1, 2}] = 3;
  const auto leaf = LeafDims::uniform(tree, 4);
  // leaf {1}: 2*4; node {1,2}: 3*(2*4); root: 1*(3*4).
  CHECK(storage_complexity(tree, active, ranks, leaf) == 8 + 24 + 12);
  CHECK_THROWS_AS(ranks.at({2}), std::invalid_argument);
  CHECK(leaf.at({2}) == 4);
}

TEST_CASE("tree text round trips for every kind") {
  for (auto kind : {TreeKind::Tucker, TreeKind::TT, TreeKind::TTT, TreeKind::Balanced}) {
    auto [tree, active] = build_tree(kind, 5);
    const std::string text = tree_to_text(tree, active);
    auto [tree2, active2] = parse_tree_text(text);
    CHECK(tree2.nodes == tree.nodes);
    CHECK(tree2.sons == tree.sons);
    CHECK(tree2.parent == tree.parent);
    CHECK(tree2.level == tree.level);
    CHECK(active2.active == active.active);
    CHECK(tree_to_text(tree2, active2) == text);
  }
  CHECK_THROWS_AS(parse_tree_text(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_tree_text("garbage\n"), std::invalid_argument);
}

TEST_CASE("custom trees are validated") {
  CHECK_THROWS_AS(build_tree(TreeKind::TT, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_tree(TreeKind::Custom, 3), std::invalid_argument);  // no spec

  // A hand-written spec equal to the tt tree.
  const std::vector<Node> spec = {{1, 2, 3}, {1, 2}, {3}, {1}, {2}};
  const std::vector<char> flags = {0, 1, 0, 1, 0};
  auto [tree, active] = build_tree(TreeKind::Custom, 3, &spec, &flags);
  auto [tt, tt_active] = build_tree(TreeKind::TT, 3);
  CHECK(tree.nodes == tt.nodes);
  CHECK(active.active == tt_active.active);

  // Missing root.
  const std::vector<Node> no_root = {{1, 2}, {1}, {2}, {3}};
  const std::vector<char> f4 = {1, 1, 1, 1};
  CHECK_THROWS_AS(build_tree(TreeKind::Custom, 3, &no_root, &f4), std::invalid_argument);

  // A leaf {3} is missing: sons do not cover the root.
  const std::vector<Node> gap = {{1, 2, 3}, {1, 2}, {1}, {2}};
  const std::vector<char> f3 = {0, 1, 1, 1};
  CHECK_THROWS_AS(build_tree(TreeKind::Custom, 3, &gap, &f3), std::invalid_argument);

  // Inactive interior node is rejected.
  const std::vector<char> bad_flags = {0, 0, 0, 1, 0};
  CHECK_THROWS_AS(build_tree(TreeKind::Custom, 3, &spec, &bad_flags), std::invalid_argument);

  // Duplicate node.
  const std::vector<Node> dup = {{1, 2, 3}, {1, 2}, {1, 2}, {3}, {1}, {2}};
  const std::vector<char> f6 = {0, 1, 1, 0, 1, 0};
  CHECK_THROWS_AS(build_tree(TreeKind::Custom, 3, &dup, &f6), std::invalid_argument);
}

TEST_CASE("rank and leaf tuples: uniform constructors cover the right nodes") {
  auto [tree, active] = build_tree(TreeKind::TT, 5);
  const auto ranks = RankTuple::uniform(tree, active, 3);
  CHECK(static_cast<int>(ranks.r.size()) == active.count());
  for (const auto& [node, r] : ranks.r) {
    CHECK(r == 3);
    CHECK(active.is_active(tree.index_of(node)));
  }
  const auto leaf = LeafDims::uniform(tree, 7);
  CHECK(static_cast<int>(leaf.n.size()) == 5);
  CHECK(leaf.at({3}) == 7);
}

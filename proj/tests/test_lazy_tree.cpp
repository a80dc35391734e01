#include <doctest.h>

#include <optional>

#include "oracles.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/lazy_tree.hpp"
#include "treeconv/random.hpp"

using namespace treeconv;

namespace {

std::vector<std::string> trunc(const LazyTree& t, int depth) { return t.truncate(depth).vertex_strings(); }

}  // namespace

TEST_CASE("builtin truncations") {
  CHECK(trunc(LazyTree::free(3), 0) == std::vector<std::string>{""});
  CHECK(trunc(LazyTree::free(3), 1) == std::vector<std::string>{"", "1", "2", "3"});
  CHECK(LazyTree::free(3).truncate(3).size() == 1 + 3 + 6 + 12);
  CHECK(trunc(LazyTree::subordination(), 2) == std::vector<std::string>{"", "1", "21"});
  CHECK(trunc(LazyTree::subordination_dagger(), 3) == std::vector<std::string>{"", "2", "12", "212"});
  CHECK(LazyTree::monotone(4).truncate(10) == FiniteTree::monotone(4));
  CHECK(LazyTree::monotone_dagger(4).truncate(10) == FiniteTree::monotone_dagger(4));
  CHECK(LazyTree::boolean(3).truncate(5) == FiniteTree::boolean(3));
}

TEST_CASE("lazy branches") {
  auto b = LazyTree::subordination().branch(1);
  REQUIRE(b);
  CHECK(b->truncate(7) == LazyTree::subordination_dagger().truncate(7));
  CHECK_FALSE(LazyTree::subordination().branch(2));
  auto f = LazyTree::free(3).branch(2);
  REQUIRE(f);
  CHECK(trunc(*f, 1) == std::vector<std::string>{"", "1", "3"});
}

TEST_CASE("free composed with free") {
  const auto ff = LazyTree::compose_same(LazyTree::free(2), LazyTree::free(2));
  CHECK(ff.truncate(4) == LazyTree::free(4).truncate(4));
  CHECK(simplify(ff).key() == LazyTree::free(4).key());
}

TEST_CASE("hash consing") {
  const auto a = LazyTree::compose_same(LazyTree::free(2), LazyTree::subordination());
  const auto b = LazyTree::compose_same(LazyTree::free(2), LazyTree::subordination());
  CHECK(a.key() == b.key());
  CHECK(a.id() == b.id());
}

TEST_CASE("lazy compose of finite trees agrees with finite compose") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = rng.integer(1, 3);
    const FiniteTree outer = random_tree(rng, k, 3, 0.6);
    std::vector<FiniteTree> parts;
    std::vector<LazyTree> lazy_parts;
    for (int j = 0; j < k; ++j) {
      parts.push_back(random_tree(rng, rng.integer(1, 3), 3, 0.6));
      lazy_parts.push_back(LazyTree::finite(parts.back()));
    }
    const FiniteTree c = compose(outer, parts);
    const LazyTree lc = LazyTree::compose(LazyTree::finite(outer), lazy_parts);
    CHECK(lc.truncate(12) == c);
    for (int j = 1; j <= c.alphabet(); ++j) {
      auto fb = c.branch(j);
      auto lb = lc.branch(j);
      REQUIRE(fb.has_value() == lb.has_value());
      if (fb) CHECK(lb->truncate(12) == *fb);
    }
  }
}

TEST_CASE("lazy permute and relabel") {
  const auto mono = LazyTree::permute(LazyTree::monotone(3), Permutation::reversal(3));
  CHECK(mono.truncate(5) == FiniteTree::monotone_dagger(3));
  const auto rel = LazyTree::relabel(LazyTree::subordination(), {1, 2}, 3, 8);
  CHECK(rel.alphabet() == 3);
  CHECK(trunc(rel, 3) == trunc(LazyTree::subordination(), 3));
}

TEST_CASE("lazy n, m and metric") {
  CHECK(m_of(LazyTree::free(3)) == 2);
  CHECK(m_of(LazyTree::subordination()) == 1);
  CHECK(m_of(LazyTree::self_compose(LazyTree::finite(FiniteTree::from_strings(3, {"", "1", "2", "3", "21", "31", "12", "13"})), 2)) == 8);
  CHECK(tree_metric(LazyTree::free(2), LazyTree::free(2), 10) == 0.0);
  CHECK(agreement_depth(LazyTree::subordination(), LazyTree::free(2), 10) == 0);
  CHECK(m_of(LazyTree::monotone(4)) == 3);
  CHECK(m_of(LazyTree::free(1)) == 0);
}

TEST_CASE("lazy m matches the materialized tree") {
  Rng rng(19);
  for (int t = 0; t < 60; ++t) {
    const int k = rng.integer(1, 3);
    const FiniteTree outer = random_tree(rng, k, 3, 0.6);
    std::vector<FiniteTree> parts;
    std::vector<LazyTree> lazy_parts;
    for (int j = 0; j < k; ++j) {
      parts.push_back(random_tree(rng, rng.integer(1, 3), 3, 0.6));
      lazy_parts.push_back(LazyTree::compose(LazyTree::finite(FiniteTree::identity()), {LazyTree::finite(parts.back())}));
    }
    const FiniteTree c = compose(outer, parts);
    CHECK(m_of(LazyTree::compose(LazyTree::finite(outer), lazy_parts)) == c.m());
  }
  int compared = 0;
  for (int t = 0; t < 60; ++t) {
    const FiniteTree a = random_tree(rng, rng.integer(1, 3), 2, 0.6);
    const FiniteTree a2 = compose(a, std::vector<FiniteTree>(static_cast<std::size_t>(a.alphabet()), a));
    std::optional<FiniteTree> a3;
    try {
      a3 = compose(a, std::vector<FiniteTree>(static_cast<std::size_t>(a.alphabet()), a2));
    } catch (const Error&) {
      continue;
    }
    ++compared;
    CHECK(m_of(LazyTree::self_compose(LazyTree::finite(a), 3)) == a3->m());
  }
  CHECK(compared >= 30);
}

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/random.hpp"
#include "treeconv/trees.hpp"

using namespace treeconv;

namespace {

const std::vector<std::string> kFig = {"", "1", "2", "3", "21", "31", "12", "13"};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidSpec;
}

}  // namespace

TEST_CASE("words") {
  CHECK(is_alternating({1, 2, 1}));
  CHECK_FALSE(is_alternating({1, 1}));
  CHECK(format_word({2, 1}, 3) == "21");
  CHECK(format_word({12, 3}, 12) == "12.3");
  CHECK(parse_word("12.3", 12) == Word{12, 3});
  CHECK(parse_word("21", 3) == Word{2, 1});
  CHECK(parse_word("", 3).empty());
}

TEST_CASE("validate") {
  CHECK(FiniteTree::from_strings(3, {"", "1", "2", "21", "31", "32"}).size() == 6);
  CHECK(FiniteTree::from_strings(2, {""}).size() == 1);
  CHECK(kind_of([] { FiniteTree::from_strings(2, {"", "11"}); }) == ErrorKind::NotAlternating);
  CHECK(kind_of([] { FiniteTree::from_strings(2, {"", "3"}); }) == ErrorKind::LetterOutOfRange);
  CHECK(kind_of([] { FiniteTree::from_strings(3, {"", "21"}); }) == ErrorKind::NotParentClosed);
  CHECK(kind_of([] { FiniteTree::from_strings(3, {"1"}); }) == ErrorKind::MissingRoot);
  try {
    FiniteTree::from_strings(3, {"", "1", "121", "21", "33"});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("33") != std::string::npos);
  }
}

TEST_CASE("branch") {
  const auto t = FiniteTree::from_strings(3, {"", "1", "2", "21", "31", "32"});
  auto b = t.branch(1);
  REQUIRE(b);
  CHECK(b->vertex_strings() == std::vector<std::string>{"", "2", "3"});
  CHECK_FALSE(FiniteTree::from_strings(2, {"", "1"}).branch(2));
}

TEST_CASE("truncate and metric") {
  const auto t = FiniteTree::from_strings(3, {"", "1", "2", "21", "31", "32"});
  CHECK(t.truncate(0).vertex_strings() == std::vector<std::string>{""});
  CHECK(t.truncate(1).vertex_strings() == std::vector<std::string>{"", "1", "2"});
  CHECK(tree_metric(t, t, 8) == 0.0);
  CHECK(tree_metric(t, FiniteTree::from_strings(3, {"", "1", "2"}), 8) == doctest::Approx(std::exp(-1.0)));
  CHECK(tree_metric(FiniteTree::from_strings(2, {""}), FiniteTree::from_strings(2, {"", "1"}), 8) == 1.0);
}

TEST_CASE("n and m") {
  const auto t = FiniteTree::from_strings(3, kFig);
  CHECK(t.n() == 3);
  CHECK(t.m() == 2);
  const auto t2 = self_compose(t, 2);
  CHECK(t2.n() == 9);
  CHECK(t2.m() == 8);
  CHECK(FiniteTree::root_only(2).n() == 0);
  CHECK(FiniteTree::root_only(2).m() == 0);
}

TEST_CASE("compose examples") {
  const auto b2 = FiniteTree::boolean(2);
  CHECK(compose(b2, {FiniteTree::identity(), b2}) == FiniteTree::boolean(3));
  const auto m2 = FiniteTree::monotone(2);
  CHECK(compose(m2, {m2, FiniteTree::identity()}) == FiniteTree::monotone(3));
  const auto t = FiniteTree::from_strings(3, kFig);
  const auto r = FiniteTree::root_only(2);
  CHECK(compose(t, {r, r, r}) == FiniteTree::root_only(6));
  CHECK(self_compose(t, 1) == t);
  CHECK(self_compose(t, 0) == FiniteTree::identity());
  CHECK(kind_of([&] { compose(t, {r, r}); }) == ErrorKind::ArityMismatch);
}

TEST_CASE("compose matches the word-level definition") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = rng.integer(1, 3);
    const FiniteTree outer = random_tree(rng, k, 3, 0.6);
    std::vector<FiniteTree> parts;
    std::vector<oracle::WordSet> part_words;
    std::vector<int> sizes;
    for (int j = 0; j < k; ++j) {
      parts.push_back(random_tree(rng, rng.integer(1, 3), 3, 0.6));
      part_words.push_back(oracle::words(parts.back()));
      sizes.push_back(parts.back().alphabet());
    }
    const FiniteTree c = compose(outer, parts);
    CHECK(oracle::words(c) == oracle::compose(oracle::words(outer), part_words, sizes));
  }
}

TEST_CASE("relabel and permute") {
  const auto orth = FiniteTree::orthogonal();
  CHECK(relabel(orth, {1, 2}, 2) == orth);
  CHECK(relabel(orth, {1, 2}, 3).vertex_strings() == std::vector<std::string>{"", "1", "21"});
  CHECK(relabel(orth, {1, 2}, 3).alphabet() == 3);
  CHECK(kind_of([&] { relabel(orth, {1, 1}, 1); }) == ErrorKind::ImageNotAlternating);
  CHECK(permute(orth, Permutation::identity(2)) == orth);
  CHECK(permute(orth, Permutation({2, 1})).vertex_strings() == std::vector<std::string>{"", "2", "12"});
  CHECK(permute(FiniteTree::monotone(4), Permutation::reversal(4)) == FiniteTree::monotone_dagger(4));
}

TEST_CASE("canonical form") {
  CHECK(is_isomorphic(FiniteTree::from_strings(2, {"", "1"}), FiniteTree::from_strings(2, {"", "2"})));
  CHECK_FALSE(is_isomorphic(FiniteTree::from_strings(2, {"", "1", "2"}), FiniteTree::from_strings(2, {"", "1", "21"})));
  const auto t = FiniteTree::from_strings(3, kFig);
  CHECK(canonical_form(t).minimal_alphabet == 3);
  CHECK(is_isomorphic(t, permute(t, Permutation({3, 1, 2}))));
  CHECK(t.iso_hash() == permute(t, Permutation({3, 1, 2})).iso_hash());
}

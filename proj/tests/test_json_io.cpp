#include <doctest.h>

#include "treeconv/errors.hpp"
#include "treeconv/json_io.hpp"

using namespace treeconv;
using nlohmann::json;

TEST_CASE("tree specs") {
  const json fig = json::parse(R"({"n":3,"vertices":["","1","2","3","21","31","12","13"]})");
  const FiniteTree t = parse_finite_tree(fig);
  CHECK(t.size() == 8);
  CHECK(tree_to_json(t) == json::parse(R"({"n":3,"vertices":["","1","2","3","12","13","21","31"]})"));
  CHECK(parse_tree(json::parse(R"({"builtin":"free","n":3})")).truncate(2) == LazyTree::free(3).truncate(2));
  CHECK(parse_tree(json::parse(R"({"builtin":"sub"})")).truncate(4) == LazyTree::subordination().truncate(4));
  const LazyTree b = parse_tree(json::parse(R"({"branch":{"tree":{"n":3,"vertices":["","1","2","21","31","32"]},"j":1}})"));
  CHECK(b.truncate(3).vertex_strings() == std::vector<std::string>{"", "2", "3"});
  const LazyTree s = parse_tree(json{{"selfCompose", {{"tree", fig}, {"k", 2}}}});
  CHECK(s.n() == 9);
  const LazyTree p = parse_tree(json::parse(R"({"permute":{"tree":{"n":2,"vertices":["","1","21"]},"images":[2,1]}})"));
  CHECK(p.truncate(3).vertex_strings() == std::vector<std::string>{"", "2", "12"});
  const LazyTree c = parse_tree(json::parse(
      R"({"compose":{"outer":{"builtin":"bool","n":2},"parts":[{"builtin":"id"},{"builtin":"bool","n":2}]}})"));
  CHECK(c.truncate(3) == FiniteTree::boolean(3));
}

TEST_CASE("tree spec errors") {
  CHECK_THROWS_AS(parse_tree(json::parse(R"({"n":2,"vertices":["","11"]})")), Error);
  CHECK_THROWS_AS(parse_tree(json::parse(R"({"builtin":"nope"})")), Error);
  CHECK_THROWS_AS(parse_tree(json::parse(R"([1,2])")), Error);
  try {
    parse_tree(json::parse(R"({"n":"x"})"));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidSpec);
  }
}

TEST_CASE("measure specs") {
  const Complex z(0.1, 1.2);
  CHECK(std::abs(k_transform(*parse_measure(json::parse(R"({"type":"bernoulliSym"})")), z) - 1.0 / z) < 1e-15);
  const auto st = parse_measure(json::parse(R"({"type":"stable","alpha":{"pow":[2,-1]},"theta":0.4})"));
  CHECK(std::abs(k_transform(*st, z) - stable_K(0.5, 0.4, z)) < 1e-15);
  const auto bp = parse_measure(json::parse(R"({"type":"booleanPower","c":0.5,"of":{"type":"bernoulliSym"}})"));
  CHECK(std::abs(k_transform(*bp, z) - 0.5 / z) < 1e-15);
  const auto at = parse_measure(json::parse(R"({"type":"atomic","weights":[0.5,0.5],"atoms":[-1,1]})"));
  CHECK(std::abs(k_transform(*at, z) - 1.0 / z) < 1e-14);
  const auto tc = parse_measure(json::parse(
      R"({"type":"treeConvolution","tree":{"builtin":"bool","n":2},"measure":{"type":"bernoulliSym"}})"));
  CHECK(std::abs(k_transform(*tc, z) - 2.0 / z) < 1e-14);
  CHECK_THROWS_AS(parse_measure(json::parse(R"({"type":"stable","alpha":3,"theta":0})")), Error);
  CHECK_THROWS_AS(parse_measure(json::parse(R"({"type":"unknown"})")), Error);
}

TEST_CASE("complex numbers") {
  CHECK(complex_to_json(Complex(1.5, -2)) == json::array({1.5, -2.0}));
  CHECK(complex_from_json(json::array({0, 1})) == Complex(0, 1));
  CHECK_THROWS_AS(complex_from_json(json::array({0})), Error);
}

#include "treeconv/json_io.hpp"

#include <cmath>

#include "treeconv/errors.hpp"

namespace treeconv {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); }

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) invalid(std::string("missing field \"") + name + "\"");
  return j.at(name);
}

double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_object() && j.contains("pow")) {
    const json& p = j.at("pow");
    if (!p.is_array() || p.size() != 2) invalid("\"pow\" needs [base, exponent]");
    return std::pow(number(p[0]), number(p[1]));
  }
  invalid("expected a number, got " + j.dump());
}

double number_or(const json& j, const char* name, double fallback) {
  return j.contains(name) ? number(j.at(name)) : fallback;
}

int integer(const json& j) {
  if (!j.is_number_integer()) invalid("expected an integer, got " + j.dump());
  return j.get<int>();
}

Word word_from_json(const json& v, int alphabet) {
  if (v.is_string()) return parse_word(v.get<std::string>(), alphabet);
  if (v.is_array()) {
    Word w;
    for (const auto& l : v) w.push_back(integer(l));
    return w;
  }
  invalid("vertex must be a string or an array of letters");
}

LazyTree builtin(const std::string& name, const json& j) {
  auto n = [&] { return integer(field(j, "n")); };
  if (name == "free") return LazyTree::free(n());
  if (name == "bool" || name == "boolean") return LazyTree::boolean(n());
  if (name == "mono" || name == "monotone") return LazyTree::monotone(n());
  if (name == "monoDagger") return LazyTree::monotone_dagger(n());
  if (name == "sub") return LazyTree::subordination();
  if (name == "subDagger") return LazyTree::subordination_dagger();
  if (name == "orth" || name == "orthogonal") return LazyTree::finite(FiniteTree::orthogonal());
  if (name == "id" || name == "identity") return LazyTree::finite(FiniteTree::identity());
  invalid("unknown builtin tree \"" + name + "\"");
}

LazyTree parse_tree_impl(const json& j) {
  if (!j.is_object()) invalid("tree spec must be an object");
  if (j.contains("vertices")) return LazyTree::finite(parse_finite_tree(j));
  if (j.contains("builtin")) return builtin(field(j, "builtin").get<std::string>(), j);
  if (j.contains("compose")) {
    const json& c = j.at("compose");
    std::vector<LazyTree> parts;
    for (const auto& p : field(c, "parts")) parts.push_back(parse_tree_impl(p));
    return LazyTree::compose(parse_tree_impl(field(c, "outer")), parts);
  }
  if (j.contains("composeSame")) {
    const json& c = j.at("composeSame");
    if (!c.is_array() || c.size() != 2) invalid("\"composeSame\" needs two trees");
    return LazyTree::compose_same(parse_tree_impl(c[0]), parse_tree_impl(c[1]));
  }
  if (j.contains("selfCompose")) {
    const json& c = j.at("selfCompose");
    return LazyTree::self_compose(parse_tree_impl(field(c, "tree")), integer(field(c, "k")));
  }
  if (j.contains("branch")) {
    const json& c = j.at("branch");
    const int letter = integer(field(c, "j"));
    auto b = parse_tree_impl(field(c, "tree")).branch(letter);
    if (!b) invalid("branch " + std::to_string(letter) + " is empty");
    return *b;
  }
  if (j.contains("permute")) {
    const json& c = j.at("permute");
    return LazyTree::permute(parse_tree_impl(field(c, "tree")),
                             Permutation(field(c, "images").get<std::vector<int>>()));
  }
  if (j.contains("relabel")) {
    const json& c = j.at("relabel");
    return LazyTree::relabel(parse_tree_impl(field(c, "tree")), field(c, "map").get<std::vector<int>>(),
                             integer(field(c, "n")), c.contains("checkDepth") ? integer(c.at("checkDepth")) : 8);
  }
  invalid("unrecognised tree spec " + j.dump());
}

MeasureSpecPtr parse_measure_impl(const json& j) {
  if (!j.is_object()) invalid("measure spec must be an object");
  const std::string type = field(j, "type").get<std::string>();
  if (type == "atomic") {
    std::vector<double> weights;
    std::vector<double> atoms;
    for (const auto& v : field(j, "weights")) weights.push_back(number(v));
    for (const auto& v : field(j, "atoms")) atoms.push_back(number(v));
    return MeasureSpec::atomic(std::move(weights), std::move(atoms));
  }
  if (type == "semicircle") return MeasureSpec::semicircle(number_or(j, "mean", 0.0), number_or(j, "variance", 1.0));
  if (type == "arcsine") return MeasureSpec::arcsine(number_or(j, "center", 0.0), number_or(j, "radius", 2.0));
  if (type == "cauchy") return MeasureSpec::cauchy(number_or(j, "location", 0.0), number_or(j, "scale", 1.0));
  if (type == "bernoulliSym") return MeasureSpec::bernoulli_sym();
  if (type == "pointMass") return MeasureSpec::point_mass(number_or(j, "a", 0.0));
  if (type == "stable") return MeasureSpec::stable(number(field(j, "alpha")), number_or(j, "theta", 0.0));
  if (type == "booleanPower") return MeasureSpec::boolean_power(number(field(j, "c")), parse_measure_impl(field(j, "of")));
  if (type == "dilate") return MeasureSpec::dilate(number(field(j, "c")), parse_measure_impl(field(j, "of")));
  if (type == "booleanShift") return MeasureSpec::boolean_shift(number(field(j, "a")), parse_measure_impl(field(j, "of")));
  if (type == "treeConvolution") {
    LazyTree tree = parse_tree_impl(field(j, "tree"));
    std::vector<MeasureSpecPtr> measures;
    if (j.contains("measure")) {
      measures.assign(static_cast<std::size_t>(tree.alphabet()), parse_measure_impl(j.at("measure")));
    } else {
      for (const auto& m : field(j, "measures")) measures.push_back(parse_measure_impl(m));
    }
    return MeasureSpec::tree_convolution(std::move(tree), std::move(measures));
  }
  invalid("unknown measure type \"" + type + "\"");
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    invalid(e.what());
  }
}

}  // namespace

LazyTree parse_tree(const json& j) {
  return guarded([&] { return parse_tree_impl(j); });
}

FiniteTree parse_finite_tree(const json& j) {
  return guarded([&] {
    if (!j.is_object() || !j.contains("vertices")) invalid("finite tree needs \"n\" and \"vertices\"");
    const int n = integer(field(j, "n"));
    std::vector<Word> words;
    for (const auto& v : field(j, "vertices")) words.push_back(word_from_json(v, n));
    return FiniteTree::validate(n, words);
  });
}

json tree_to_json(const FiniteTree& t) {
  return json{{"n", t.alphabet()}, {"vertices", t.vertex_strings()}};
}

MeasureSpecPtr parse_measure(const json& j) {
  return guarded([&] { return parse_measure_impl(j); });
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  return guarded([&] {
    if (j.is_array() && j.size() == 2) return Complex(number(j[0]), number(j[1]));
    if (j.is_number()) return Complex(number(j), 0.0);
    invalid("complex numbers are [re, im] arrays");
  });
}

}  // namespace treeconv

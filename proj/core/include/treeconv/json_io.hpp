#pragma once

#include <nlohmann/json.hpp>

#include "treeconv/complex.hpp"
#include "treeconv/lazy_tree.hpp"
#include "treeconv/transforms.hpp"
#include "treeconv/trees.hpp"

namespace treeconv {

// Trees: {"n":3,"vertices":["","1","21"]} (arrays of letters also accepted),
// {"builtin":"free","n":3} for free|bool|mono|monoDagger|sub|subDagger|orth|id,
// {"compose":{"outer":T,"parts":[...]}}, {"composeSame":[T1,T2]},
// {"selfCompose":{"tree":T,"k":2}}, {"branch":{"tree":T,"j":1}},
// {"permute":{"tree":T,"images":[2,1]}},
// {"relabel":{"tree":T,"map":[1,1],"n":1,"checkDepth":8}}.
// Malformed input throws InvalidSpec; tree errors keep their own kind.
LazyTree parse_tree(const nlohmann::json& j);
FiniteTree parse_finite_tree(const nlohmann::json& j);
nlohmann::json tree_to_json(const FiniteTree& t);

// Measures: {"type":"stable","alpha":1.2,"theta":0.4},
// {"type":"booleanPower","c":0.5,"of":{...}}, {"type":"treeConvolution",
// "tree":T,"measure":{...}} (or "measures":[...] with one entry per letter).
// Any number may be written {"pow":[base,exponent]}.
MeasureSpecPtr parse_measure(const nlohmann::json& j);

nlohmann::json complex_to_json(Complex z);
Complex complex_from_json(const nlohmann::json& j);

}  // namespace treeconv

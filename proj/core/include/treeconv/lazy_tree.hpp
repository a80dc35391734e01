#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treeconv/trees.hpp"

namespace treeconv {

namespace detail {
struct LazyNode;
}

// Rule-defined, possibly infinite tree. Nodes are hash-consed: structurally
// identical constructions share one node and one identity key.
class LazyTree {
 public:
  enum class Kind { Finite, Free, Monotone, MonotoneDagger, Path, Compose, Concat, Permute, Relabel };

  static LazyTree finite(const FiniteTree& t);
  static LazyTree free(int n);
  static LazyTree boolean(int n);
  static LazyTree monotone(int n);
  static LazyTree monotone_dagger(int n);
  static LazyTree subordination();         // {∅,1,21,121,...}
  static LazyTree subordination_dagger();  // {∅,2,12,212,...}
  static LazyTree compose(const LazyTree& outer, const std::vector<LazyTree>& parts);
  static LazyTree compose_same(const LazyTree& a, const LazyTree& b);
  static LazyTree self_compose(const LazyTree& t, int k);
  static LazyTree permute(const LazyTree& t, const Permutation& sigma);
  // Checks the image on the depth-check_depth truncation; psi must be
  // injective on the children of every vertex it checks.
  static LazyTree relabel(const LazyTree& t, const std::vector<int>& psi, int target_alphabet,
                          int check_depth);

  Kind kind() const;
  int alphabet() const;
  const std::vector<int>& root_letters() const;
  int n() const { return static_cast<int>(root_letters().size()); }
  bool has_letter(int j) const;

  std::optional<LazyTree> branch(int j) const;
  FiniteTree truncate(int depth) const;

  // Upper bound on the height when the tree is known to be finite.
  std::optional<int> height_bound() const;
  std::optional<FiniteTree> as_finite() const;

  std::uint64_t id() const;
  // Equal keys imply equal trees.
  const std::string& key() const;
  // Equal iso keys imply isomorphic trees.
  const std::string& iso_key() const;
  std::string describe() const;

  // Compose: outer tree then parts. Concat: head then tail. Permute and
  // relabel: the source tree. Empty otherwise.
  const std::vector<LazyTree>& operands() const;
  // Permute: the permutation images. Relabel: the letter map. Empty otherwise.
  const std::vector<int>& letter_map() const;

 private:
  explicit LazyTree(std::shared_ptr<const detail::LazyNode> node) : node_(std::move(node)) {}
  friend LazyTree make_lazy(std::shared_ptr<const detail::LazyNode>);

  std::shared_ptr<const detail::LazyNode> node_;
};

// Applies free(a)∘free(b) = free(ab)-style identities for the free, monotone
// and boolean families plus the identity-tree unit laws.
LazyTree simplify(const LazyTree& t);

// Max child count over the non-root vertices, computed on the branch closure.
int m_of(const LazyTree& t, std::size_t max_nodes = 2'000'000);
inline int n_of(const LazyTree& t) { return t.n(); }

int agreement_depth(const LazyTree& a, const LazyTree& b, int max_depth);
double tree_metric(const LazyTree& a, const LazyTree& b, int max_depth);

}  // namespace treeconv

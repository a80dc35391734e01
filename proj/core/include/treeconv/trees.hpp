#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treeconv {

// Letters are 1-based. A child prepends a letter, so the parent of a word
// drops its first letter and the root child of a word is its last letter.
using Word = std::vector<int>;

bool is_alternating(const Word& w);

// Digits for alphabets up to 9, dot-separated letters otherwise.
std::string format_word(const Word& w, int alphabet);
Word parse_word(std::string_view text, int alphabet);

struct Hash128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend bool operator==(const Hash128&, const Hash128&) = default;
  friend auto operator<=>(const Hash128&, const Hash128&) = default;
  std::string hex() const;
};

class Permutation {
 public:
  explicit Permutation(std::vector<int> images);
  static Permutation identity(int n);
  static Permutation reversal(int n);

  int size() const { return static_cast<int>(images_.size()); }
  int operator()(int j) const { return images_[j - 1]; }
  int inverse(int j) const { return inverse_[j - 1]; }
  const std::vector<int>& images() const { return images_; }

  // (this * other)(j) = this(other(j))
  Permutation after(const Permutation& other) const;

 private:
  std::vector<int> images_;
  std::vector<int> inverse_;
};

namespace detail {
struct Trie;
}

class FiniteTree {
 public:
  // Validates and builds; throws NotAlternating, LetterOutOfRange,
  // NotParentClosed or MissingRoot naming the offending string.
  static FiniteTree validate(int alphabet, const std::vector<Word>& vertices);
  static FiniteTree from_strings(int alphabet, const std::vector<std::string>& vertices);
  static FiniteTree root_only(int alphabet);
  static FiniteTree identity();  // {∅,1} over [1]
  static FiniteTree boolean(int n);
  static FiniteTree orthogonal();  // {∅,1,21}
  static FiniteTree monotone(int n);
  static FiniteTree monotone_dagger(int n);
  // No validation: the caller guarantees a parent-closed set of alternating
  // words over [alphabet] containing the root.
  static FiniteTree unchecked(int alphabet, std::vector<Word> vertices) {
    return build_trusted(alphabet, std::move(vertices));
  }

  int alphabet() const { return alphabet_; }
  std::size_t size() const;
  int height() const;
  int n() const;  // children of the root
  int m() const;  // max child count over non-root vertices, 0 when none
  std::vector<int> root_letters() const;

  // Sorted by length, then lexicographically.
  std::vector<Word> vertices() const;
  std::vector<std::string> vertex_strings() const;
  bool contains(const Word& w) const;

  std::optional<FiniteTree> branch(int j) const;
  FiniteTree truncate(int depth) const;

  // Structural hashes: labeled identity and unlabeled (isomorphism class).
  Hash128 labeled_hash() const;
  Hash128 iso_hash() const;

  friend bool operator==(const FiniteTree& a, const FiniteTree& b);

 private:
  FiniteTree(int alphabet, std::shared_ptr<const detail::Trie> trie, int node)
      : alphabet_(alphabet), trie_(std::move(trie)), node_(node) {}
  static FiniteTree build_trusted(int alphabet, std::vector<Word> vertices);

  friend FiniteTree compose(const FiniteTree&, const std::vector<FiniteTree>&, std::size_t);
  friend FiniteTree relabel(const FiniteTree&, const std::vector<int>&, int);
  friend FiniteTree permute(const FiniteTree&, const Permutation&);
  friend struct CanonicalForm canonical_form(const FiniteTree&);

  int alphabet_;
  std::shared_ptr<const detail::Trie> trie_;
  int node_;
};

// Operad composition T(T_1,...,T_k) over [n_1+...+n_k]. Throws ArityMismatch,
// and CapacityExceeded when the result would exceed max_vertices.
FiniteTree compose(const FiniteTree& outer, const std::vector<FiniteTree>& parts,
                   std::size_t max_vertices = 5'000'000);
FiniteTree compose_same(const FiniteTree& a, const FiniteTree& b);
FiniteTree self_compose(const FiniteTree& t, int k);

// psi has one image per letter of [N]; images in [1, target_alphabet].
FiniteTree relabel(const FiniteTree& t, const std::vector<int>& psi, int target_alphabet);
FiniteTree permute(const FiniteTree& t, const Permutation& sigma);

struct CanonicalForm {
  std::string encoding;
  int minimal_alphabet = 1;
};
CanonicalForm canonical_form(const FiniteTree& t);
bool is_isomorphic(const FiniteTree& a, const FiniteTree& b);

// Largest depth <= max_depth at which the truncations agree.
int agreement_depth(const FiniteTree& a, const FiniteTree& b, int max_depth);
// exp(-agreement depth); 0 when the trees agree up to max_depth.
double tree_metric(const FiniteTree& a, const FiniteTree& b, int max_depth);

inline int n_of(const FiniteTree& t) { return t.n(); }
inline int m_of(const FiniteTree& t) { return t.m(); }

}  // namespace treeconv

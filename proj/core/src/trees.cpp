#include "treeconv/trees.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "treeconv/errors.hpp"
#include "trees_detail.hpp"

namespace treeconv {

using detail::Trie;
using detail::TrieNode;

namespace {

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

int find_child(const TrieNode& node, int letter) {
  for (const auto& [l, c] : node.children) {
    if (l == letter) return c;
  }
  return -1;
}

void finalize(Trie& trie) {
  for (auto& node : trie.nodes) {
    std::sort(node.children.begin(), node.children.end());
  }
  // Children are always created after their parent.
  for (int i = static_cast<int>(trie.nodes.size()) - 1; i >= 0; --i) {
    TrieNode& node = trie.nodes[i];
    node.height = 0;
    node.size = 1;
    node.sub_m = 0;
    node.labeled = Hash128{0x51ed2701a3c4e5f1ULL, 0x7b3a91c0de4f2a61ULL};
    std::vector<Hash128> child_iso;
    child_iso.reserve(node.children.size());
    for (const auto& [letter, c] : node.children) {
      const TrieNode& child = trie.nodes[c];
      node.height = std::max(node.height, child.height + 1);
      node.size += child.size;
      node.sub_m = std::max({node.sub_m, child.sub_m, static_cast<int>(child.children.size())});
      detail::hash_combine(node.labeled, static_cast<std::uint64_t>(letter));
      detail::hash_combine(node.labeled, child.labeled);
      child_iso.push_back(child.iso);
    }
    std::sort(child_iso.begin(), child_iso.end());
    node.iso = Hash128{0x2545f4914f6cdd1dULL, static_cast<std::uint64_t>(child_iso.size())};
    for (const auto& h : child_iso) detail::hash_combine(node.iso, h);
  }
}

// Vertices of the subtrie rooted at `root`, unsorted.
void collect(const Trie& trie, int root, int max_depth, std::vector<Word>& out) {
  struct Item {
    int node;
    Word word;
  };
  std::vector<Item> stack;
  stack.push_back({root, {}});
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    const TrieNode& node = trie.nodes[item.node];
    if (static_cast<int>(item.word.size()) < max_depth) {
      for (const auto& [letter, c] : node.children) {
        Word w;
        w.reserve(item.word.size() + 1);
        w.push_back(letter);
        w.insert(w.end(), item.word.begin(), item.word.end());
        stack.push_back({c, std::move(w)});
      }
    }
    out.push_back(std::move(item.word));
  }
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAlternating: return "NotAlternating";
    case ErrorKind::LetterOutOfRange: return "LetterOutOfRange";
    case ErrorKind::NotParentClosed: return "NotParentClosed";
    case ErrorKind::MissingRoot: return "MissingRoot";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorKind::ImageNotAlternating: return "ImageNotAlternating";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DepthCapReached: return "DepthCapReached";
    case ErrorKind::RootDegreeTooSmall: return "RootDegreeTooSmall";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

bool is_alternating(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == w[i - 1]) return false;
  }
  return true;
}

std::string format_word(const Word& w, int alphabet) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (alphabet > 9 && i > 0) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

Word parse_word(std::string_view text, int alphabet) {
  Word w;
  if (text.empty()) return w;
  const bool separated = text.find_first_of(".,") != std::string_view::npos;
  if (!separated && alphabet <= 9) {
    for (char ch : text) {
      if (ch < '0' || ch > '9') {
        throw Error(ErrorKind::InvalidSpec, "bad letter in \"" + std::string(text) + "\"");
      }
      w.push_back(ch - '0');
    }
    return w;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find_first_of(".,", pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view piece = text.substr(pos, end - pos);
    if (piece.empty() || piece.find_first_not_of("0123456789") != std::string_view::npos) {
      throw Error(ErrorKind::InvalidSpec, "bad letter in \"" + std::string(text) + "\"");
    }
    w.push_back(std::stoi(std::string(piece)));
    pos = end + 1;
  }
  return w;
}

std::string Hash128::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

// ---------------------------------------------------------------------------
// Permutation

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int n = static_cast<int>(images_.size());
  inverse_.assign(n, 0);
  for (int j = 1; j <= n; ++j) {
    const int img = images_[j - 1];
    if (img < 1 || img > n || inverse_[img - 1] != 0) {
      throw Error(ErrorKind::InvalidSpec, "permutation images are not a bijection on [" +
                                              std::to_string(n) + "]");
    }
    inverse_[img - 1] = j;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> images(n);
  for (int j = 0; j < n; ++j) images[j] = j + 1;
  return Permutation(std::move(images));
}

Permutation Permutation::reversal(int n) {
  std::vector<int> images(n);
  for (int j = 0; j < n; ++j) images[j] = n - j;
  return Permutation(std::move(images));
}

Permutation Permutation::after(const Permutation& other) const {
  if (other.size() != size()) throw Error(ErrorKind::AlphabetMismatch, "permutation sizes differ");
  std::vector<int> images(size());
  for (int j = 1; j <= size(); ++j) images[j - 1] = (*this)(other(j));
  return Permutation(std::move(images));
}

// ---------------------------------------------------------------------------
// FiniteTree

FiniteTree FiniteTree::build_trusted(int alphabet, std::vector<Word> vertices) {
  std::sort(vertices.begin(), vertices.end(), shortlex_less);
  auto trie = std::make_shared<Trie>();
  trie->nodes.emplace_back();
  for (const Word& w : vertices) {
    int node = 0;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      int next = find_child(trie->nodes[node], *it);
      if (next < 0) {
        next = static_cast<int>(trie->nodes.size());
        trie->nodes[node].children.emplace_back(*it, next);
        trie->nodes.emplace_back();
      }
      node = next;
    }
  }
  finalize(*trie);
  return FiniteTree(alphabet, std::move(trie), 0);
}

FiniteTree FiniteTree::validate(int alphabet, const std::vector<Word>& vertices) {
  if (alphabet < 1) throw Error(ErrorKind::InvalidSpec, "alphabet size must be positive");
  std::set<Word> set;
  for (const Word& w : vertices) {
    for (int letter : w) {
      if (letter < 1 || letter > alphabet) {
        throw Error(ErrorKind::LetterOutOfRange,
                    "\"" + format_word(w, alphabet) + "\" has a letter outside [1," +
                        std::to_string(alphabet) + "]");
      }
    }
    if (!is_alternating(w)) {
      throw Error(ErrorKind::NotAlternating, "\"" + format_word(w, alphabet) + "\"");
    }
    set.insert(w);
  }
  if (!set.contains(Word{})) throw Error(ErrorKind::MissingRoot, "the empty string is absent");
  for (const Word& w : set) {
    if (w.empty()) continue;
    Word parent(w.begin() + 1, w.end());
    if (!set.contains(parent)) {
      throw Error(ErrorKind::NotParentClosed, "\"" + format_word(w, alphabet) + "\" lacks parent \"" +
                                                   format_word(parent, alphabet) + "\"");
    }
  }
  return build_trusted(alphabet, std::vector<Word>(set.begin(), set.end()));
}

FiniteTree FiniteTree::from_strings(int alphabet, const std::vector<std::string>& vertices) {
  std::vector<Word> words;
  words.reserve(vertices.size());
  for (const auto& s : vertices) words.push_back(parse_word(s, alphabet));
  return validate(alphabet, words);
}

FiniteTree FiniteTree::root_only(int alphabet) { return build_trusted(alphabet, {Word{}}); }

FiniteTree FiniteTree::identity() { return build_trusted(1, {Word{}, Word{1}}); }

FiniteTree FiniteTree::boolean(int n) {
  std::vector<Word> v{Word{}};
  for (int j = 1; j <= n; ++j) v.push_back(Word{j});
  return build_trusted(n, std::move(v));
}

FiniteTree FiniteTree::orthogonal() { return build_trusted(2, {Word{}, Word{1}, Word{2, 1}}); }

FiniteTree FiniteTree::monotone(int n) {
  if (n > 20) throw Error(ErrorKind::CapacityExceeded, "finite monotone tree beyond 20 letters");
  std::vector<Word> v;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Word w;
    for (int j = n; j >= 1; --j) {
      if (mask & (1u << (j - 1))) w.push_back(j);
    }
    v.push_back(std::move(w));
  }
  return build_trusted(n, std::move(v));
}

FiniteTree FiniteTree::monotone_dagger(int n) { return permute(monotone(n), Permutation::reversal(n)); }

std::size_t FiniteTree::size() const { return trie_->nodes[node_].size; }
int FiniteTree::height() const { return trie_->nodes[node_].height; }
int FiniteTree::n() const { return static_cast<int>(trie_->nodes[node_].children.size()); }
int FiniteTree::m() const { return trie_->nodes[node_].sub_m; }

std::vector<int> FiniteTree::root_letters() const {
  std::vector<int> out;
  for (const auto& [letter, c] : trie_->nodes[node_].children) out.push_back(letter);
  return out;
}

std::vector<Word> FiniteTree::vertices() const {
  std::vector<Word> out;
  out.reserve(size());
  collect(*trie_, node_, height(), out);
  std::sort(out.begin(), out.end(), shortlex_less);
  return out;
}

std::vector<std::string> FiniteTree::vertex_strings() const {
  std::vector<std::string> out;
  for (const Word& w : vertices()) out.push_back(format_word(w, alphabet_));
  return out;
}

bool FiniteTree::contains(const Word& w) const {
  int node = node_;
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    node = find_child(trie_->nodes[node], *it);
    if (node < 0) return false;
  }
  return true;
}

std::optional<FiniteTree> FiniteTree::branch(int j) const {
  const int c = find_child(trie_->nodes[node_], j);
  if (c < 0) return std::nullopt;
  return FiniteTree(alphabet_, trie_, c);
}

FiniteTree FiniteTree::truncate(int depth) const {
  if (depth < 0) throw Error(ErrorKind::InvalidSpec, "negative truncation depth");
  if (depth >= height()) return *this;
  std::vector<Word> out;
  collect(*trie_, node_, depth, out);
  return build_trusted(alphabet_, std::move(out));
}

Hash128 FiniteTree::labeled_hash() const { return trie_->nodes[node_].labeled; }
Hash128 FiniteTree::iso_hash() const { return trie_->nodes[node_].iso; }

bool operator==(const FiniteTree& a, const FiniteTree& b) {
  if (a.alphabet_ != b.alphabet_ || a.size() != b.size()) return false;
  if (a.trie_ == b.trie_ && a.node_ == b.node_) return true;
  if (a.labeled_hash() != b.labeled_hash()) return false;
  return a.vertices() == b.vertices();
}

// ---------------------------------------------------------------------------
// Operad structure

FiniteTree compose(const FiniteTree& outer, const std::vector<FiniteTree>& parts,
                   std::size_t max_vertices) {
  const int k = outer.alphabet();
  if (static_cast<int>(parts.size()) != k) {
    throw Error(ErrorKind::ArityMismatch, "outer tree has alphabet " + std::to_string(k) + " but " +
                                              std::to_string(parts.size()) + " parts were given");
  }
  std::vector<int> offset(k + 1, 0);
  for (int j = 0; j < k; ++j) offset[j + 1] = offset[j] + parts[j].alphabet();

  // Nonempty vertices of each part, already shifted into the joint alphabet.
  std::vector<std::vector<Word>> pieces(k);
  for (int j = 0; j < k; ++j) {
    for (Word w : parts[j].vertices()) {
      if (w.empty()) continue;
      for (int& letter : w) letter += offset[j];
      pieces[j].push_back(std::move(w));
    }
  }

  const std::vector<Word> outer_vertices = outer.vertices();
  double projected = 0;
  for (const Word& t : outer_vertices) {
    double count = 1;
    for (int letter : t) count *= static_cast<double>(pieces[letter - 1].size());
    projected += count;
  }
  if (projected > static_cast<double>(max_vertices)) {
    char count[32];
    std::snprintf(count, sizeof count, "%.6g", projected);
    throw Error(ErrorKind::CapacityExceeded, std::string("composition would have ") + count + " vertices");
  }

  std::vector<Word> result;
  result.reserve(static_cast<std::size_t>(projected));
  for (const Word& t : outer_vertices) {
    if (t.empty()) {
      result.emplace_back();
      continue;
    }
    bool empty_factor = false;
    for (int letter : t) empty_factor = empty_factor || pieces[letter - 1].empty();
    if (empty_factor) continue;
    std::vector<std::size_t> index(t.size(), 0);
    for (bool more = true; more;) {
      Word w;
      for (std::size_t p = 0; p < t.size(); ++p) {
        const Word& piece = pieces[t[p] - 1][index[p]];
        w.insert(w.end(), piece.begin(), piece.end());
      }
      result.push_back(std::move(w));
      more = false;
      for (std::size_t p = t.size(); p-- > 0;) {
        if (++index[p] < pieces[t[p] - 1].size()) {
          more = true;
          break;
        }
        index[p] = 0;
      }
    }
  }
  return FiniteTree::build_trusted(offset[k], std::move(result));
}

FiniteTree compose_same(const FiniteTree& a, const FiniteTree& b) {
  return compose(a, std::vector<FiniteTree>(a.alphabet(), b));
}

FiniteTree self_compose(const FiniteTree& t, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidSpec, "negative composition power");
  if (k == 0) return FiniteTree::identity();
  FiniteTree result = t;
  for (int i = 1; i < k; ++i) result = compose_same(t, result);
  return result;
}

FiniteTree relabel(const FiniteTree& t, const std::vector<int>& psi, int target_alphabet) {
  if (static_cast<int>(psi.size()) != t.alphabet()) {
    throw Error(ErrorKind::AlphabetMismatch, "relabeling map must have one image per letter");
  }
  for (int img : psi) {
    if (img < 1 || img > target_alphabet) {
      throw Error(ErrorKind::LetterOutOfRange, "relabeling image " + std::to_string(img) +
                                                   " outside [1," + std::to_string(target_alphabet) + "]");
    }
  }
  std::set<Word> image;
  for (const Word& w : t.vertices()) {
    Word mapped(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) mapped[i] = psi[w[i] - 1];
    if (!is_alternating(mapped)) {
      throw Error(ErrorKind::ImageNotAlternating, "\"" + format_word(w, t.alphabet()) + "\" maps to \"" +
                                                      format_word(mapped, target_alphabet) + "\"");
    }
    image.insert(std::move(mapped));
  }
  return FiniteTree::build_trusted(target_alphabet, std::vector<Word>(image.begin(), image.end()));
}

FiniteTree permute(const FiniteTree& t, const Permutation& sigma) {
  if (sigma.size() != t.alphabet()) {
    throw Error(ErrorKind::AlphabetMismatch, "permutation size differs from the alphabet");
  }
  std::vector<Word> out;
  for (Word w : t.vertices()) {
    for (int& letter : w) letter = sigma.inverse(letter);
    out.push_back(std::move(w));
  }
  return FiniteTree::build_trusted(t.alphabet(), std::move(out));
}

CanonicalForm canonical_form(const FiniteTree& t) {
  const Trie& trie = *t.trie_;
  std::unordered_map<int, std::string> memo;
  std::function<const std::string&(int)> encode = [&](int node) -> const std::string& {
    auto it = memo.find(node);
    if (it != memo.end()) return it->second;
    std::vector<std::string> kids;
    for (const auto& [letter, c] : trie.nodes[node].children) kids.push_back(encode(c));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (const auto& k : kids) s += k;
    s += ")";
    return memo.emplace(node, std::move(s)).first->second;
  };
  CanonicalForm out;
  out.encoding = encode(t.node_);
  out.minimal_alphabet = std::max(t.n(), t.m() + 1);
  return out;
}

bool is_isomorphic(const FiniteTree& a, const FiniteTree& b) {
  if (a.size() != b.size() || a.iso_hash() != b.iso_hash()) return false;
  return canonical_form(a).encoding == canonical_form(b).encoding;
}

int agreement_depth(const FiniteTree& a, const FiniteTree& b, int max_depth) {
  if (a.alphabet() != b.alphabet()) throw Error(ErrorKind::AlphabetMismatch, "metric needs equal alphabets");
  std::vector<std::pair<FiniteTree, FiniteTree>> level{{a, b}};
  for (int depth = 0; depth < max_depth; ++depth) {
    std::vector<std::pair<FiniteTree, FiniteTree>> next;
    for (const auto& [x, y] : level) {
      if (x.root_letters() != y.root_letters()) return depth;
      for (int letter : x.root_letters()) next.emplace_back(*x.branch(letter), *y.branch(letter));
    }
    if (next.empty()) return max_depth;
    level = std::move(next);
  }
  return max_depth;
}

double tree_metric(const FiniteTree& a, const FiniteTree& b, int max_depth) {
  const int d = agreement_depth(a, b, max_depth);
  return d >= max_depth ? 0.0 : std::exp(-static_cast<double>(d));
}

}  // namespace treeconv

#include "treeconv/lazy_tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "treeconv/errors.hpp"

namespace treeconv {

namespace detail {

struct LazyNode {
  LazyTree::Kind kind = LazyTree::Kind::Finite;
  int alphabet = 0;
  std::uint64_t id = 0;
  std::string signature;
  std::string iso;
  std::vector<int> letters;
  std::optional<int> height;

  std::optional<FiniteTree> finite;
  int param = 0;  // avoided letter, monotone floor/ceiling, path end, or concat offset
  std::vector<LazyTree> operands;
  std::vector<int> offsets;  // compose: start offset of each part
  std::vector<int> map;      // permutation images or relabeling images
};

}  // namespace detail

using detail::LazyNode;
using Kind = LazyTree::Kind;

LazyTree make_lazy(std::shared_ptr<const LazyNode> node) { return LazyTree(std::move(node)); }

namespace {

LazyTree intern(LazyNode&& proto) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::weak_ptr<const LazyNode>> table;
  static std::uint64_t next_id = 1;
  static std::size_t purge_at = 1 << 12;

  std::lock_guard<std::mutex> lock(mu);
  auto it = table.find(proto.signature);
  if (it != table.end()) {
    if (auto live = it->second.lock()) return make_lazy(std::move(live));
  }
  proto.id = next_id++;
  auto node = std::make_shared<const LazyNode>(std::move(proto));
  table[node->signature] = node;
  if (table.size() >= purge_at) {
    std::erase_if(table, [](const auto& kv) { return kv.second.expired(); });
    purge_at = std::max<std::size_t>(purge_at, 2 * table.size());
  }
  return make_lazy(std::move(node));
}

std::string id_of(const LazyTree& t) { return std::to_string(t.id()); }

LazyTree make_free(int n, int avoid) {
  LazyNode p;
  p.kind = Kind::Free;
  p.alphabet = n;
  p.param = avoid;
  p.signature = "free(" + std::to_string(n) + "," + std::to_string(avoid) + ")";
  p.iso = avoid == 0 ? "free:" + std::to_string(n) : "freeAvoid:" + std::to_string(n);
  for (int j = 1; j <= n; ++j) {
    if (j != avoid) p.letters.push_back(j);
  }
  return intern(std::move(p));
}

LazyTree make_monotone(int n, int floor) {
  LazyNode p;
  p.kind = Kind::Monotone;
  p.alphabet = n;
  p.param = floor;
  p.signature = "mono(" + std::to_string(n) + "," + std::to_string(floor) + ")";
  p.iso = "chain:" + std::to_string(n - floor);
  for (int j = floor + 1; j <= n; ++j) p.letters.push_back(j);
  p.height = n - floor;
  return intern(std::move(p));
}

LazyTree make_monotone_dagger(int n, int ceiling) {
  LazyNode p;
  p.kind = Kind::MonotoneDagger;
  p.alphabet = n;
  p.param = ceiling;
  p.signature = "monoDagger(" + std::to_string(n) + "," + std::to_string(ceiling) + ")";
  p.iso = "chain:" + std::to_string(ceiling - 1);
  for (int j = 1; j < ceiling; ++j) p.letters.push_back(j);
  p.height = ceiling - 1;
  return intern(std::move(p));
}

LazyTree make_path(int last) {
  LazyNode p;
  p.kind = Kind::Path;
  p.alphabet = 2;
  p.param = last;
  p.signature = "path(" + std::to_string(last) + ")";
  p.iso = "path";
  p.letters = {last};
  return intern(std::move(p));
}

LazyTree make_concat(const LazyTree& head, const LazyTree& tail, int offset, int alphabet) {
  if (tail.root_letters().empty()) return head;
  LazyNode p;
  p.kind = Kind::Concat;
  p.alphabet = alphabet;
  p.param = offset;
  p.operands = {head, tail};
  p.signature = "concat(" + id_of(head) + ";" + id_of(tail) + ";" + std::to_string(offset) + "," +
                std::to_string(alphabet) + ")";
  p.iso = "L" + p.signature;
  std::vector<int> letters = head.root_letters();
  for (int i : tail.root_letters()) {
    const int m = offset + i;
    if (head.has_letter(m)) {
      throw Error(ErrorKind::InvalidSpec, "concatenation head uses a shifted tail letter");
    }
    letters.push_back(m);
  }
  std::sort(letters.begin(), letters.end());
  p.letters = std::move(letters);
  auto hh = head.height_bound();
  auto th = tail.height_bound();
  if (hh && th) p.height = *hh + *th;
  return intern(std::move(p));
}

LazyTree make_relabel(const LazyTree& t, const std::vector<int>& psi, int target_alphabet) {
  LazyNode p;
  p.kind = Kind::Relabel;
  p.alphabet = target_alphabet;
  p.operands = {t};
  p.map = psi;
  p.signature = "relabel(" + id_of(t) + ";" + std::to_string(target_alphabet) + ";";
  for (int img : psi) p.signature += std::to_string(img) + ",";
  p.signature += ")";
  p.iso = t.iso_key();
  for (int l : t.root_letters()) p.letters.push_back(psi[l - 1]);
  std::sort(p.letters.begin(), p.letters.end());
  p.height = t.height_bound();
  return intern(std::move(p));
}

// Index of the part whose shifted range contains the joint letter m.
int part_of(const std::vector<int>& offsets, int m) {
  auto it = std::upper_bound(offsets.begin(), offsets.end(), m - 1);
  return static_cast<int>(it - offsets.begin());  // 1-based part index
}

}  // namespace

// ---------------------------------------------------------------------------

LazyTree LazyTree::finite(const FiniteTree& t) {
  LazyNode p;
  p.kind = Kind::Finite;
  p.alphabet = t.alphabet();
  p.signature = "finite(" + std::to_string(t.alphabet()) + "," + std::to_string(t.size()) + "," +
                t.labeled_hash().hex() + ")";
  p.iso = "F" + std::to_string(t.size()) + ":" + t.iso_hash().hex();
  p.letters = t.root_letters();
  p.height = t.height();
  p.finite = t;
  return intern(std::move(p));
}

LazyTree LazyTree::free(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "free tree needs a positive alphabet");
  return make_free(n, 0);
}

LazyTree LazyTree::boolean(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "boolean tree needs a positive alphabet");
  return finite(FiniteTree::boolean(n));
}

LazyTree LazyTree::monotone(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "monotone tree needs a positive alphabet");
  return make_monotone(n, 0);
}

LazyTree LazyTree::monotone_dagger(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "monotone tree needs a positive alphabet");
  return make_monotone_dagger(n, n + 1);
}

LazyTree LazyTree::subordination() { return make_path(1); }
LazyTree LazyTree::subordination_dagger() { return make_path(2); }

LazyTree LazyTree::compose(const LazyTree& outer, const std::vector<LazyTree>& parts) {
  const int k = outer.alphabet();
  if (static_cast<int>(parts.size()) != k) {
    throw Error(ErrorKind::ArityMismatch, "outer tree has alphabet " + std::to_string(k) + " but " +
                                              std::to_string(parts.size()) + " parts were given");
  }
  LazyNode p;
  p.kind = Kind::Compose;
  p.operands.push_back(outer);
  p.signature = "compose(" + id_of(outer) + ";";
  int total = 0;
  int part_height = 0;
  bool parts_finite = true;
  for (int j = 0; j < k; ++j) {
    p.offsets.push_back(total);
    total += parts[j].alphabet();
    p.operands.push_back(parts[j]);
    p.signature += (j ? "," : "") + id_of(parts[j]);
    auto h = parts[j].height_bound();
    if (h) {
      part_height = std::max(part_height, *h);
    } else {
      parts_finite = false;
    }
  }
  p.signature += ")";
  p.iso = "L" + p.signature;
  p.alphabet = total;
  for (int j : outer.root_letters()) {
    for (int i : parts[j - 1].root_letters()) p.letters.push_back(p.offsets[j - 1] + i);
  }
  std::sort(p.letters.begin(), p.letters.end());
  auto oh = outer.height_bound();
  if (oh && parts_finite) p.height = *oh * part_height;
  return intern(std::move(p));
}

LazyTree LazyTree::compose_same(const LazyTree& a, const LazyTree& b) {
  return compose(a, std::vector<LazyTree>(a.alphabet(), b));
}

LazyTree LazyTree::self_compose(const LazyTree& t, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidSpec, "negative composition power");
  if (k == 0) return finite(FiniteTree::identity());
  LazyTree result = t;
  for (int i = 1; i < k; ++i) result = compose_same(t, result);
  return result;
}

LazyTree LazyTree::permute(const LazyTree& t, const Permutation& sigma) {
  if (sigma.size() != t.alphabet()) {
    throw Error(ErrorKind::AlphabetMismatch, "permutation size differs from the alphabet");
  }
  LazyNode p;
  p.kind = Kind::Permute;
  p.alphabet = t.alphabet();
  p.operands = {t};
  p.map = sigma.images();
  p.signature = "permute(" + id_of(t) + ";";
  for (int img : p.map) p.signature += std::to_string(img) + ",";
  p.signature += ")";
  p.iso = t.iso_key();
  for (int l : t.root_letters()) p.letters.push_back(sigma.inverse(l));
  std::sort(p.letters.begin(), p.letters.end());
  p.height = t.height_bound();
  return intern(std::move(p));
}

LazyTree LazyTree::relabel(const LazyTree& t, const std::vector<int>& psi, int target_alphabet,
                           int check_depth) {
  // Throws ImageNotAlternating on the checked truncation.
  (void)treeconv::relabel(t.truncate(check_depth), psi, target_alphabet);
  std::vector<std::pair<FiniteTree, int>> stack{{t.truncate(check_depth), 0}};
  while (!stack.empty()) {
    auto [sub, depth] = stack.back();
    stack.pop_back();
    std::vector<int> images;
    for (int l : sub.root_letters()) images.push_back(psi[l - 1]);
    std::sort(images.begin(), images.end());
    if (std::adjacent_find(images.begin(), images.end()) != images.end()) {
      throw Error(ErrorKind::ImageNotAlternating, "relabeling merges sibling vertices");
    }
    for (int l : sub.root_letters()) stack.emplace_back(*sub.branch(l), depth + 1);
  }
  return make_relabel(t, psi, target_alphabet);
}

// ---------------------------------------------------------------------------

LazyTree::Kind LazyTree::kind() const { return node_->kind; }
int LazyTree::alphabet() const { return node_->alphabet; }
const std::vector<int>& LazyTree::root_letters() const { return node_->letters; }
bool LazyTree::has_letter(int j) const {
  return std::binary_search(node_->letters.begin(), node_->letters.end(), j);
}
std::optional<int> LazyTree::height_bound() const { return node_->height; }
std::optional<FiniteTree> LazyTree::as_finite() const { return node_->finite; }
std::uint64_t LazyTree::id() const { return node_->id; }
const std::string& LazyTree::key() const { return node_->signature; }
const std::string& LazyTree::iso_key() const { return node_->iso; }
const std::vector<LazyTree>& LazyTree::operands() const { return node_->operands; }
const std::vector<int>& LazyTree::letter_map() const { return node_->map; }

std::optional<LazyTree> LazyTree::branch(int j) const {
  const LazyNode& nd = *node_;
  if (j < 1 || j > nd.alphabet) {
    throw Error(ErrorKind::LetterOutOfRange, "branch letter " + std::to_string(j) + " outside [1," +
                                                 std::to_string(nd.alphabet) + "]");
  }
  if (!has_letter(j)) return std::nullopt;
  switch (nd.kind) {
    case Kind::Finite:
      return finite(*nd.finite->branch(j));
    case Kind::Free:
      return make_free(nd.alphabet, j);
    case Kind::Monotone:
      return make_monotone(nd.alphabet, j);
    case Kind::MonotoneDagger:
      return make_monotone_dagger(nd.alphabet, j);
    case Kind::Path:
      return make_path(3 - j);
    case Kind::Compose: {
      const LazyTree& outer = nd.operands[0];
      const int part = part_of(nd.offsets, j);
      const int inner = j - nd.offsets[part - 1];
      const LazyTree& piece = nd.operands[part];
      std::vector<LazyTree> parts(nd.operands.begin() + 1, nd.operands.end());
      LazyTree head = compose(*outer.branch(part), parts);
      return make_concat(head, *piece.branch(inner), nd.offsets[part - 1], nd.alphabet);
    }
    case Kind::Concat: {
      const LazyTree& head = nd.operands[0];
      const LazyTree& tail = nd.operands[1];
      const int i = j - nd.param;
      if (i >= 1 && i <= tail.alphabet() && tail.has_letter(i)) {
        return make_concat(head, *tail.branch(i), nd.param, nd.alphabet);
      }
      return head.branch(j);
    }
    case Kind::Permute: {
      const int source = nd.map[j - 1];
      Permutation sigma(nd.map);
      return permute(*nd.operands[0].branch(source), sigma);
    }
    case Kind::Relabel: {
      const LazyTree& src = nd.operands[0];
      for (int l : src.root_letters()) {
        if (nd.map[l - 1] == j) {
          return make_relabel(*src.branch(l), nd.map, nd.alphabet);
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

FiniteTree LazyTree::truncate(int depth) const {
  if (depth < 0) throw Error(ErrorKind::InvalidSpec, "negative truncation depth");
  if (node_->finite) return node_->finite->truncate(depth);
  std::map<std::pair<std::uint64_t, int>, std::vector<Word>> memo;
  auto words = [&](auto&& self, const LazyTree& t, int d) -> const std::vector<Word>& {
    auto key = std::make_pair(t.id(), d);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<Word> out{Word{}};
    if (d > 0) {
      for (int j : t.root_letters()) {
        LazyTree b = *t.branch(j);
        for (const Word& s : self(self, b, d - 1)) {
          Word w = s;
          w.push_back(j);
          out.push_back(std::move(w));
        }
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  };
  return FiniteTree::unchecked(alphabet(), words(words, *this, depth));
}

std::string LazyTree::describe() const {
  const LazyNode& nd = *node_;
  switch (nd.kind) {
    case Kind::Finite:
      return "finite(n=" + std::to_string(nd.alphabet) + ",|T|=" + std::to_string(nd.finite->size()) + ")";
    case Kind::Free:
      return nd.param == 0 ? "free(" + std::to_string(nd.alphabet) + ")"
                           : "freeAvoid(" + std::to_string(nd.alphabet) + "," + std::to_string(nd.param) + ")";
    case Kind::Monotone:
      return "mono(" + std::to_string(nd.alphabet) + (nd.param ? ",above " + std::to_string(nd.param) : "") + ")";
    case Kind::MonotoneDagger:
      return "monoDagger(" + std::to_string(nd.alphabet) +
             (nd.param != nd.alphabet + 1 ? ",below " + std::to_string(nd.param) : "") + ")";
    case Kind::Path:
      return nd.param == 1 ? "sub" : "subDagger";
    case Kind::Compose: {
      std::string s = "compose(" + nd.operands[0].describe() + ";";
      for (std::size_t i = 1; i < nd.operands.size(); ++i) {
        if (i > 1 && nd.operands[i].id() == nd.operands[i - 1].id()) continue;
        s += (i > 1 ? "," : "") + nd.operands[i].describe();
      }
      return s + ")";
    }
    case Kind::Concat:
      return "concat(" + nd.operands[0].describe() + ";" + nd.operands[1].describe() + ")";
    case Kind::Permute:
      return "permute(" + nd.operands[0].describe() + ")";
    case Kind::Relabel:
      return "relabel(" + nd.operands[0].describe() + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

enum class Family { None, Any, Free, Monotone, Boolean };

struct Classified {
  Family family = Family::None;
  int n = 0;
};

Classified classify(const LazyTree& t) {
  switch (t.kind()) {
    case Kind::Free:
      if (t.alphabet() == 1 && t.n() == 1) return {Family::Any, 1};
      if (t.n() == t.alphabet()) return {Family::Free, t.alphabet()};
      break;
    case Kind::Monotone:
      if (t.alphabet() == 1 && t.n() == 1) return {Family::Any, 1};
      if (t.n() == t.alphabet()) return {Family::Monotone, t.alphabet()};
      break;
    case Kind::Finite: {
      const FiniteTree& f = *t.as_finite();
      if (f.alphabet() == 1 && f.size() == 2) return {Family::Any, 1};
      if (f.height() == 1 && f.n() == f.alphabet()) return {Family::Boolean, f.alphabet()};
      break;
    }
    default:
      break;
  }
  return {};
}

LazyTree family_tree(Family f, int n) {
  switch (f) {
    case Family::Free: return LazyTree::free(n);
    case Family::Monotone: return LazyTree::monotone(n);
    case Family::Boolean: return LazyTree::boolean(n);
    default: return LazyTree::finite(FiniteTree::identity());
  }
}

}  // namespace

LazyTree simplify(const LazyTree& t) {
  if (t.kind() == Kind::Permute) {
    LazyTree inner = simplify(t.operands()[0]);
    return inner.id() == t.operands()[0].id() ? t : LazyTree::permute(inner, Permutation(t.letter_map()));
  }
  if (t.kind() != Kind::Compose) return t;
  LazyTree outer = simplify(t.operands()[0]);
  std::vector<LazyTree> parts;
  for (std::size_t i = 1; i < t.operands().size(); ++i) parts.push_back(simplify(t.operands()[i]));

  const Classified oc = classify(outer);
  if (oc.family == Family::Any) return parts[0];
  bool all_identity = true;
  for (const auto& p : parts) all_identity = all_identity && classify(p).family == Family::Any;
  if (all_identity) return outer;

  if (oc.family != Family::None) {
    int total = 0;
    bool ok = true;
    for (const auto& p : parts) {
      const Classified pc = classify(p);
      ok = ok && (pc.family == oc.family || pc.family == Family::Any);
      total += pc.n;
    }
    if (ok) return family_tree(oc.family, total);
  }
  return LazyTree::compose(outer, parts);
}

int m_of(const LazyTree& t, std::size_t max_nodes) {
  if (auto f = t.as_finite()) return f->m();
  // largest out-degree over all vertices, iterated to a fixpoint
  struct Entry {
    int value;
    int pass;
    LazyTree keep;
  };
  std::unordered_map<std::uint64_t, Entry> memo;
  std::unordered_set<std::uint64_t> active;
  int pass = 0;
  bool changed = true;
  auto degree = [&](auto&& self, const LazyTree& x) -> int {
    if (auto f = x.as_finite()) return std::max(f->n(), f->m());
    auto it = memo.find(x.id());
    if (it != memo.end() && (it->second.pass == pass || active.count(x.id()))) return it->second.value;
    if (it == memo.end()) {
      if (memo.size() >= max_nodes) throw Error(ErrorKind::CapacityExceeded, "branch closure too large");
      it = memo.emplace(x.id(), Entry{static_cast<int>(x.root_letters().size()), -1, x}).first;
      changed = true;
    }
    active.insert(x.id());
    int v = static_cast<int>(x.root_letters().size());
    const LazyTree& src = x.kind() == LazyTree::Kind::Concat ? x.operands()[0] : x;
    if (x.kind() == LazyTree::Kind::Concat) {
      v = std::max(v, static_cast<int>(src.root_letters().size()) + self(self, x.operands()[1]));
    }
    for (int j : src.root_letters()) v = std::max(v, self(self, *src.branch(j)));
    active.erase(x.id());
    Entry& e = memo.at(x.id());
    if (v != e.value) changed = true;
    e.value = v;
    e.pass = pass;
    return v;
  };
  int best = 0;
  while (changed) {
    changed = false;
    ++pass;
    best = 0;
    for (int j : t.root_letters()) best = std::max(best, degree(degree, *t.branch(j)));
  }
  return best;
}

int agreement_depth(const LazyTree& a, const LazyTree& b, int max_depth) {
  if (a.alphabet() != b.alphabet()) throw Error(ErrorKind::AlphabetMismatch, "metric needs equal alphabets");
  std::vector<std::pair<LazyTree, LazyTree>> level{{a, b}};
  for (int depth = 0; depth < max_depth; ++depth) {
    std::vector<std::pair<LazyTree, LazyTree>> next;
    std::unordered_set<std::string> seen;
    for (const auto& [x, y] : level) {
      if (x.id() == y.id()) continue;
      if (!seen.insert(std::to_string(x.id()) + ":" + std::to_string(y.id())).second) continue;
      if (x.root_letters() != y.root_letters()) return depth;
      for (int letter : x.root_letters()) next.emplace_back(*x.branch(letter), *y.branch(letter));
    }
    if (next.empty()) return max_depth;
    level = std::move(next);
  }
  return max_depth;
}

double tree_metric(const LazyTree& a, const LazyTree& b, int max_depth) {
  const int d = agreement_depth(a, b, max_depth);
  return d >= max_depth ? 0.0 : std::exp(-static_cast<double>(d));
}

}  // namespace treeconv

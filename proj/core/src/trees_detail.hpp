#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "treeconv/trees.hpp"

namespace treeconv::detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void hash_combine(Hash128& h, std::uint64_t v) {
  h.hi = mix64(h.hi ^ mix64(v + 0x632be59bd9b4e019ULL));
  h.lo = mix64(h.lo + 0x8cb92ba72f3d8dd7ULL * (v ^ 0xa0761d6478bd642fULL));
}

inline void hash_combine(Hash128& h, const Hash128& v) {
  hash_combine(h, v.hi);
  hash_combine(h, v.lo);
}

struct TrieNode {
  std::vector<std::pair<int, int>> children;  // (letter, node), sorted by letter
  int height = 0;
  std::size_t size = 1;
  int sub_m = 0;  // max child count over proper descendants
  Hash128 labeled;
  Hash128 iso;
};

struct Trie {
  std::vector<TrieNode> nodes;  // node 0 is the root
};

}  // namespace treeconv::detail

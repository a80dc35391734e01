#include "treeconv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "engine_detail.hpp"

namespace treeconv {

using detail::Edge;
using detail::EdgeLists;

namespace {

int method_rank(const std::string& m) {
  if (m == "exact") return 0;
  if (m == "truncation") return 1;
  if (m == "closure") return 2;
  return 3;
}

std::string format_complex(Complex z) {
  std::ostringstream os;
  os.precision(10);
  os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

}  // namespace

void ConvergenceReport::merge(const ConvergenceReport& other) {
  achieved_depth = std::max(achieved_depth, other.achieved_depth);
  max_delta = std::max(max_delta, other.max_delta);
  residual = std::max(residual, other.residual);
  converged = converged && other.converged;
  if (method_rank(other.method) > method_rank(method)) method = other.method;
}

DepthCapReached::DepthCapReached(Complex best, ConvergenceReport report)
    : Error(ErrorKind::DepthCapReached, "no convergence by depth " + std::to_string(report.achieved_depth) +
                                            " (max delta " + std::to_string(report.max_delta) + "), best value " +
                                            format_complex(best)),
      best_(best),
      report_(std::move(report)) {}

namespace detail {

void sweep(const EdgeLists& edges, const std::vector<KEvaluator>& measures, double w, double s, Complex z,
           const std::vector<Complex>& previous, std::vector<Complex>& next) {
  next.assign(edges.size(), Complex(0.0));
  for (std::size_t x = 0; x < edges.size(); ++x) {
    Complex sum = 0.0;
    for (const Edge& e : edges[x]) sum += e.count * measures[e.measure](z - s * previous[e.child]);
    next[x] = w * sum;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct TreeConvolution::Impl {
  LazyTree tree;
  std::vector<KEvaluator> original_measures;
  EngineOptions options;
  double w = 1.0;
  double s = 1.0;

  // Composite trees evaluate the outer tree over inner convolutions.
  std::shared_ptr<const Impl> outer;
  std::vector<std::shared_ptr<const Impl>> inner;

  EdgeLists edges;
  std::vector<KEvaluator> measures;
  bool acyclic = false;
  std::vector<int> order;  // children before parents
  int height = 0;

  mutable std::mutex mu;
  mutable ConvergenceReport stats;
  mutable bool evaluated = false;

  Impl(LazyTree t) : tree(std::move(t)) {}

  void record(const ConvergenceReport& r) const {
    std::lock_guard<std::mutex> lock(mu);
    if (!evaluated) {
      stats = r;
      evaluated = true;
    } else {
      stats.merge(r);
    }
  }

  void collect(ConvergenceReport& into, bool& any) const {
    {
      std::lock_guard<std::mutex> lock(mu);
      if (evaluated) {
        if (!any) {
          into = stats;
          any = true;
        } else {
          into.merge(stats);
        }
      }
    }
    if (outer) outer->collect(into, any);
    for (const auto& p : inner) p->collect(into, any);
  }

  Complex exact(Complex z) const {
    std::vector<Complex> k(edges.size(), Complex(0.0));
    std::vector<std::optional<Complex>> at_z(measures.size());
    for (int x : order) {
      Complex sum = 0.0;
      for (const Edge& e : edges[x]) {
        if (k[e.child] == Complex(0.0)) {
          auto& cached = at_z[e.measure];
          if (!cached) cached = measures[e.measure](z);
          sum += e.count * *cached;
        } else {
          sum += e.count * measures[e.measure](z - s * k[e.child]);
        }
      }
      k[x] = w * sum;
    }
    return k[0];
  }

  Evaluation evaluate(Complex z) const {
    require_upper_half_plane(z, "tree convolution");
    if (outer) {
      Evaluation ev = outer->evaluate(z);
      record(ev.report);
      return ev;
    }
    if (acyclic) {
      Evaluation ev{exact(z), ConvergenceReport{height, 0.0, 0.0, true, "exact"}};
      record(ev.report);
      return ev;
    }

    std::vector<Complex> points{z};
    for (Complex p : options.probe_points) {
      if (p != z) points.push_back(p);
    }
    std::vector<std::vector<Complex>> state(points.size(), std::vector<Complex>(edges.size(), Complex(0.0)));
    std::vector<Complex> next;
    double delta = 0.0;
    int depth = 0;
    for (depth = 1; depth <= options.depth_cap; ++depth) {
      delta = 0.0;
      for (std::size_t p = 0; p < points.size(); ++p) {
        detail::sweep(edges, measures, w, s, points[p], state[p], next);
        delta = std::max(delta, std::abs(next[0] - state[p][0]));
        state[p].swap(next);
      }
      if (delta < options.tol) {
        Evaluation ev{state[0][0], ConvergenceReport{depth, delta, 0.0, true, "truncation"}};
        record(ev.report);
        return ev;
      }
    }
    depth = options.depth_cap;
    const Complex best = state[0][0];

    if (options.closure_solver && edges.size() <= options.max_solver_nodes) {
      detail::ClosureSolution sol = detail::solve_closure(edges, measures, w, s, z, options);
      if (sol.ok) {
        Evaluation ev{sol.k[0], ConvergenceReport{depth, delta, sol.residual, true, "closure"}};
        record(ev.report);
        return ev;
      }
    }
    ConvergenceReport report{depth, delta, 0.0, false, "truncation"};
    record(report);
    if (options.allow_partial) return Evaluation{best, report};
    throw DepthCapReached(best, report);
  }

  Complex at_depth(Complex z, int depth) const {
    require_upper_half_plane(z, "tree convolution");
    if (depth < 0) throw Error(ErrorKind::InvalidSpec, "negative depth");
    if (outer) {
      if (w != 1.0 || s != 1.0) throw Error(ErrorKind::InvalidSpec, "weighted composite evaluation");
      return convolve_K(tree.truncate(depth), original_measures, z);
    }
    std::vector<Complex> state(edges.size(), Complex(0.0));
    std::vector<Complex> next;
    for (int d = 0; d < depth; ++d) {
      detail::sweep(edges, measures, w, s, z, state, next);
      state.swap(next);
    }
    return state[0];
  }
};

namespace {

using ImplPtr = std::shared_ptr<const TreeConvolution::Impl>;

struct BuildCache {
  std::map<std::string, std::pair<ImplPtr, KEvaluator>> inner;
};

std::string measures_key(const std::vector<KEvaluator>& ms) {
  std::ostringstream os;
  const bool same = std::all_of(ms.begin(), ms.end(), [&](const KEvaluator& k) { return k.same_as(ms[0]); });
  if (same) {
    os << "same:" << ms[0].identity() << "x" << ms.size();
  } else {
    for (const auto& k : ms) os << k.identity() << ",";
  }
  return os.str();
}

void build_graph(TreeConvolution::Impl& impl, const LazyTree& tree) {
  const auto& ms = impl.original_measures;
  const bool iso = std::all_of(ms.begin(), ms.end(), [&](const KEvaluator& k) { return k.same_as(ms[0]); });
  impl.measures = iso ? std::vector<KEvaluator>{ms[0]} : ms;

  std::unordered_map<std::string, int> index;
  std::vector<LazyTree> nodes;
  auto key_of = [&](const LazyTree& t) { return iso ? t.iso_key() : std::to_string(t.id()); };
  auto intern = [&](const LazyTree& t) {
    auto [it, fresh] = index.emplace(key_of(t), static_cast<int>(nodes.size()));
    if (fresh) {
      nodes.push_back(t);
      if (nodes.size() > impl.options.max_closure_nodes) {
        throw Error(ErrorKind::CapacityExceeded, "branch closure exceeds " +
                                                     std::to_string(impl.options.max_closure_nodes) + " nodes");
      }
    }
    return it->second;
  };
  intern(tree);
  for (std::size_t x = 0; x < nodes.size(); ++x) {
    const LazyTree t = nodes[x];
    std::vector<Edge> out;
    for (int j : t.root_letters()) {
      const int c = intern(*t.branch(j));
      if (iso) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Edge& e) { return e.child == c; });
        if (it != out.end()) {
          it->count += 1.0;
          continue;
        }
        out.push_back(Edge{0, c, 1.0});
      } else {
        out.push_back(Edge{j - 1, c, 1.0});
      }
    }
    impl.edges.push_back(std::move(out));
  }

  // Depth-first post-order; a grey child means a cycle.
  const std::size_t n = impl.edges.size();
  std::vector<char> colour(n, 0);
  std::vector<int> height(n, 0);
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  colour[0] = 1;
  impl.acyclic = true;
  while (!stack.empty() && impl.acyclic) {
    auto& [x, next_edge] = stack.back();
    if (next_edge < impl.edges[x].size()) {
      const int c = impl.edges[x][next_edge++].child;
      if (colour[c] == 1) {
        impl.acyclic = false;
      } else if (colour[c] == 0) {
        colour[c] = 1;
        stack.emplace_back(c, 0);
      }
      continue;
    }
    colour[x] = 2;
    for (const Edge& e : impl.edges[x]) height[x] = std::max(height[x], height[e.child] + 1);
    impl.order.push_back(x);
    stack.pop_back();
  }
  if (impl.acyclic) {
    impl.height = height[0];
  } else {
    impl.order.clear();
  }
}

ImplPtr build(const LazyTree& input, std::vector<KEvaluator> measures, const EngineOptions& options, double w,
              double s, BuildCache& cache) {
  if (static_cast<int>(measures.size()) != input.alphabet()) {
    throw Error(ErrorKind::ArityMismatch, "tree over [" + std::to_string(input.alphabet()) + "] needs " +
                                              std::to_string(input.alphabet()) + " measures, got " +
                                              std::to_string(measures.size()));
  }
  for (const auto& m : measures) {
    if (!m) throw Error(ErrorKind::InvalidSpec, "empty measure evaluator");
  }
  const LazyTree tree = simplify(input);
  auto impl = std::make_shared<TreeConvolution::Impl>(tree);
  impl->original_measures = std::move(measures);
  impl->options = options;
  impl->w = w;
  impl->s = s;

  if (tree.kind() == LazyTree::Kind::Compose && w == 1.0 && s == 1.0) {
    const auto& ops = tree.operands();
    std::vector<KEvaluator> outer_measures;
    std::size_t offset = 0;
    for (std::size_t j = 1; j < ops.size(); ++j) {
      const std::size_t width = static_cast<std::size_t>(ops[j].alphabet());
      std::vector<KEvaluator> slice(impl->original_measures.begin() + offset,
                                    impl->original_measures.begin() + offset + width);
      offset += width;
      const std::string key = std::to_string(ops[j].id()) + "|" + measures_key(slice);
      auto it = cache.inner.find(key);
      if (it == cache.inner.end()) {
        ImplPtr part = build(ops[j], std::move(slice), options, 1.0, 1.0, cache);
        KEvaluator k([part](Complex z) { return part->evaluate(z).value; }, "convolution(" + ops[j].describe() + ")");
        it = cache.inner.emplace(key, std::make_pair(part, k)).first;
      }
      if (std::find(impl->inner.begin(), impl->inner.end(), it->second.first) == impl->inner.end()) {
        impl->inner.push_back(it->second.first);
      }
      outer_measures.push_back(it->second.second);
    }
    impl->outer = build(ops[0], std::move(outer_measures), options, 1.0, 1.0, cache);
    return impl;
  }
  build_graph(*impl, tree);
  return impl;
}

}  // namespace

TreeConvolution::TreeConvolution(const LazyTree& tree, std::vector<KEvaluator> measures, EngineOptions options) {
  BuildCache cache;
  impl_ = build(tree, std::move(measures), options, 1.0, 1.0, cache);
}

TreeConvolution TreeConvolution::weighted(const LazyTree& tree, std::vector<KEvaluator> measures, double w,
                                          double s, EngineOptions options) {
  BuildCache cache;
  return TreeConvolution(build(tree, std::move(measures), options, w, s, cache));
}

Evaluation TreeConvolution::evaluate(Complex z) const { return impl_->evaluate(z); }

Complex TreeConvolution::evaluate_at_depth(Complex z, int depth) const { return impl_->at_depth(z, depth); }

KEvaluator TreeConvolution::as_evaluator(std::string descriptor) const {
  if (descriptor.empty()) descriptor = "convolution(" + impl_->tree.describe() + ")";
  auto impl = impl_;
  return KEvaluator([impl](Complex z) { return impl->evaluate(z).value; }, std::move(descriptor));
}

ConvergenceReport TreeConvolution::aggregate_report() const {
  ConvergenceReport report;
  bool any = false;
  impl_->collect(report, any);
  return report;
}

// ---------------------------------------------------------------------------

Complex convolve_K(const FiniteTree& tree, const std::vector<KEvaluator>& measures, Complex z) {
  require_upper_half_plane(z, "convolve_K");
  if (static_cast<int>(measures.size()) != tree.alphabet()) {
    throw Error(ErrorKind::ArityMismatch, "tree over [" + std::to_string(tree.alphabet()) + "] got " +
                                              std::to_string(measures.size()) + " measures");
  }
  std::map<Hash128, Complex> memo;
  auto rec = [&](auto&& self, const FiniteTree& t) -> Complex {
    const Hash128 key = t.labeled_hash();
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Complex sum = 0.0;
    for (int j : t.root_letters()) sum += measures[j - 1](z - self(self, *t.branch(j)));
    memo.emplace(key, sum);
    return sum;
  };
  return rec(rec, tree);
}

Evaluation convolve_lazy(const ConvolutionProblem& problem, Complex z) {
  return TreeConvolution(problem.tree, problem.measures, problem.options).evaluate(z);
}

FreeConvolution free_convolve(const KEvaluator& mu, const KEvaluator& nu, Complex z, const EngineOptions& options) {
  require_upper_half_plane(z, "free_convolve");
  TreeConvolution full(LazyTree::free(2), {mu, nu}, options);
  TreeConvolution sub(LazyTree::subordination(), {mu, nu}, options);
  TreeConvolution sub_dagger(LazyTree::subordination_dagger(), {mu, nu}, options);
  FreeConvolution out;
  Evaluation ev = full.evaluate(z);
  out.k = ev.value;
  out.report = ev.report;
  Evaluation a = sub.evaluate(z);
  Evaluation b = sub_dagger.evaluate(z);
  out.report.merge(a.report);
  out.report.merge(b.report);
  out.omega = z - a.value;
  out.omega_dagger = z - b.value;
  return out;
}

KEvaluator convolution_evaluator(const LazyTree& tree, std::vector<KEvaluator> measures,
                                 const EngineOptions& options) {
  return TreeConvolution(tree, std::move(measures), options).as_evaluator();
}

TreeConvolution phi_convolution(const LazyTree& tree, double c, const KEvaluator& mu, const EngineOptions& options) {
  if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorKind::InvalidSpec, "phi_N needs c in [0,1]");
  const int n = tree.alphabet();
  return TreeConvolution::weighted(tree, std::vector<KEvaluator>(n, mu), 1.0 / n, c, options);
}

KEvaluator phi_N(const LazyTree& tree, double c, const KEvaluator& mu, const EngineOptions& options) {
  return phi_convolution(tree, c, mu, options).as_evaluator("phi(" + tree.describe() + ")");
}

namespace {

std::size_t power_alphabet(const LazyTree& tree, int k) {
  double total = std::pow(static_cast<double>(tree.alphabet()), k);
  if (total > 1e7) throw Error(ErrorKind::CapacityExceeded, "composition power alphabet exceeds 1e7 letters");
  return static_cast<std::size_t>(std::llround(total));
}

void require_branching(const LazyTree& tree, int k) {
  if (tree.n() <= 1) {
    throw Error(ErrorKind::RootDegreeTooSmall, "root has " + std::to_string(tree.n()) + " children, need > 1");
  }
  if (k < 1) throw Error(ErrorKind::InvalidSpec, "composition power must be at least 1");
}

}  // namespace

TreeConvolution bp_approximant(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options) {
  require_branching(tree, k);
  const double scale = std::pow(static_cast<double>(tree.n()), -k);
  KEvaluator base = boolean_power(scale, mu);
  return TreeConvolution(LazyTree::self_compose(tree, k), std::vector<KEvaluator>(power_alphabet(tree, k), base),
                         options);
}

KEvaluator bp_limit(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options) {
  return bp_approximant(tree, mu, k, options)
      .as_evaluator("bp(" + tree.describe() + "," + mu.descriptor() + ",k=" + std::to_string(k) + ")");
}

TreeConvolution clt_convolution(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options) {
  require_branching(tree, k);
  const double c = std::pow(static_cast<double>(tree.n()), -0.5 * k);
  KEvaluator base = dilate(c, mu);
  return TreeConvolution(LazyTree::self_compose(tree, k), std::vector<KEvaluator>(power_alphabet(tree, k), base),
                         options);
}

KEvaluator clt_scaled(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options) {
  return clt_convolution(tree, mu, k, options)
      .as_evaluator("clt(" + tree.describe() + "," + mu.descriptor() + ",k=" + std::to_string(k) + ")");
}

}  // namespace treeconv

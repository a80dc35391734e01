#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "treeconv/checks.hpp"
#include "treeconv/engine.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/inversion.hpp"
#include "treeconv/json_io.hpp"
#include "treeconv/lazy_tree.hpp"
#include "treeconv/transforms.hpp"
#include "treeconv/trees.hpp"

namespace treeconv::cli {
namespace {

using nlohmann::json;

enum class Kind { Number, Integer, Text, Flag };

struct Knob {
  const char* name;  // config key; the flag is --name with '_' spelled '-'
  Kind kind;
  const char* help;
};

const std::vector<Knob>& knobs() {
  static const std::vector<Knob> all = {
      {"tree", Kind::Text, "tree spec: inline JSON or a file path"},
      {"other", Kind::Text, "second tree spec (metric)"},
      {"parts", Kind::Text, "JSON array of part trees (compose)"},
      {"measure", Kind::Text, "measure spec: inline JSON or a file path"},
      {"points", Kind::Text, "JSON array of [re, im] points"},
      {"which", Kind::Text, "G, F or K"},
      {"j", Kind::Integer, "root letter (branch)"},
      {"eps", Kind::Number, "distance above the real axis"},
      {"depth", Kind::Integer, "engine depth cap; truncation depth for tree actions"},
      {"tol", Kind::Number, "convergence tolerance"},
      {"xmin", Kind::Number, "grid start"},
      {"xmax", Kind::Number, "grid end"},
      {"step", Kind::Number, "grid spacing"},
      {"k", Kind::Integer, "self-composition power"},
      {"k_min", Kind::Integer, "first approximant"},
      {"k_max", Kind::Integer, "last approximant"},
      {"out", Kind::Text, "output path"},
      {"seed", Kind::Integer, "seed for randomized suites"},
      {"suite", Kind::Text, "transforms, operad, nevanlinna or all"},
      {"inject_fault", Kind::Text, "perturb the named identity"},
      {"threads", Kind::Integer, "grid workers, 0 for all cores"},
      {"allow_partial", Kind::Flag, "report the best value instead of failing"},
      {"no_closure", Kind::Flag, "truncation only, no branch-closure solve"},
  };
  return all;
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); }

json defaults_for(const std::string& command) {
  json d = {{"depth", 60}, {"tol", 1e-10}, {"threads", 0}, {"allow_partial", false}, {"no_closure", false}};
  if (command == "tree") {
    d["depth"] = 6;
  } else if (command == "eval") {
    d["which"] = "K";
    d["points"] = json::array({json::array({0.0, 1.0})});
  } else if (command == "density" || command == "bp") {
    d["xmin"] = -5.0;
    d["xmax"] = 5.0;
    d["step"] = 0.01;
    d["eps"] = 1e-5;
    if (command == "bp") {
      d["k_min"] = 1;
      d["k_max"] = 6;
    }
  } else if (command == "check") {
    d["suite"] = "all";
    d["seed"] = 42;
    d["inject_fault"] = "";
  }
  return d;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid(path + ": " + e.what());
  }
}

// Strings starting with '{' or '[' are inline JSON, anything else a path.
json load_input(const json& v, const std::string& key) {
  if (!v.is_string()) return v;
  const std::string s = v.get<std::string>();
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) invalid(key + " is empty");
  if (s[first] == '{' || s[first] == '[') {
    try {
      return json::parse(s);
    } catch (const json::exception& e) {
      invalid(key + ": " + e.what());
    }
  }
  return read_json_file(s);
}

struct Config {
  std::string command;
  std::string action;
  json values;

  bool has(const std::string& key) const { return values.contains(key) && !values[key].is_null(); }
  const json& at(const std::string& key) const {
    if (!has(key)) invalid("missing --" + key);
    return values.at(key);
  }
  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) invalid(key + " must be a number");
    return v.get<double>();
  }
  long integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) invalid(key + " must be an integer");
    return v.get<long>();
  }
  std::string text(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) invalid(key + " must be a string");
    return v.get<std::string>();
  }
  bool flag(const std::string& key) const { return has(key) && values.at(key).get<bool>(); }
  json input(const std::string& key) const { return load_input(at(key), key); }

  json resolved() const {
    json r = values;
    r["command"] = command;
    if (!action.empty()) r["action"] = action;
    for (const char* key : {"tree", "other", "parts", "measure", "points"})
      if (has(key)) r[key] = input(key);
    return r;
  }
};

json convert(const Knob& knob, const std::string& raw) {
  try {
    switch (knob.kind) {
      case Kind::Number: {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::Integer: {
        std::size_t used = 0;
        const long v = std::stol(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::Text:
        return raw;
      case Kind::Flag:
        return true;
    }
  } catch (const std::exception&) {
  }
  invalid(flag_name(knob.name) + ": cannot parse '" + raw + "'");
}

void validate(const Config& c) {
  auto positive = [&](const char* key) {
    if (c.has(key) && !(c.number(key) > 0)) invalid(std::string(key) + " must be positive");
  };
  auto nonnegative = [&](const char* key) {
    if (c.has(key) && c.integer(key) < 0) invalid(std::string(key) + " must be nonnegative");
  };
  positive("eps");
  positive("tol");
  positive("step");
  nonnegative("depth");
  nonnegative("k");
  nonnegative("k_min");
  nonnegative("threads");
  if (c.has("xmin") && c.has("xmax") && !(c.number("xmax") > c.number("xmin")))
    invalid("xmax must exceed xmin");
  if (c.has("k_min") && c.has("k_max") && c.integer("k_max") < c.integer("k_min"))
    invalid("k_max must be at least k_min");
  if (c.has("which")) {
    const std::string w = c.text("which");
    if (w != "G" && w != "F" && w != "K") invalid("which must be G, F or K");
  }
}

EngineOptions engine_options(const Config& c) {
  EngineOptions o;
  o.depth_cap = static_cast<int>(c.integer("depth"));
  o.tol = c.number("tol");
  o.allow_partial = c.flag("allow_partial");
  o.closure_solver = !c.flag("no_closure");
  return o;
}

unsigned thread_count(const Config& c) {
  const long t = c.integer("threads");
  if (t > 0) return static_cast<unsigned>(t);
  return std::max(1u, std::thread::hardware_concurrency());
}

json report_json(const ConvergenceReport& r) {
  return {{"achieved_depth", r.achieved_depth}, {"max_delta", r.max_delta}, {"residual", r.residual},
          {"converged", r.converged},           {"method", r.method}};
}

void write_sidecar(const std::string& out_path, const Config& c) {
  std::ofstream s(out_path + ".config.json");
  if (!s) invalid("cannot write " + out_path + ".config.json");
  s << c.resolved().dump(2) << "\n";
}

void emit(const json& result, const Config& c, std::ostream& out) {
  const std::string text = result.dump(2) + "\n";
  out << text;
  if (c.has("out")) {
    const std::string path = c.text("out");
    std::ofstream f(path);
    if (!f) invalid("cannot write " + path);
    f << text;
    write_sidecar(path, c);
  }
}

json lazy_tree_json(const LazyTree& t, int depth) {
  if (auto f = t.as_finite()) return tree_to_json(*f);
  json j = tree_to_json(t.truncate(depth));
  j["truncated_at"] = depth;
  return j;
}

int cmd_tree(const Config& c, std::ostream& out) {
  const LazyTree tree = parse_tree(c.input("tree"));
  const int depth = static_cast<int>(c.integer("depth"));
  const std::string& a = c.action;
  json result;
  if (a == "compose") {
    if (c.has("parts")) {
      const json parts = c.input("parts");
      if (!parts.is_array()) invalid("parts must be an array");
      std::vector<LazyTree> ps;
      for (const auto& p : parts) ps.push_back(parse_tree(p));
      result = lazy_tree_json(LazyTree::compose(tree, ps), depth);
    } else if (c.has("k")) {
      result = lazy_tree_json(LazyTree::self_compose(tree, static_cast<int>(c.integer("k"))), depth);
    } else {
      invalid("compose needs --parts or --k");
    }
  } else if (a == "branch") {
    const int j = static_cast<int>(c.integer("j"));
    if (j < 1 || j > tree.alphabet()) throw Error(ErrorKind::LetterOutOfRange, "j=" + std::to_string(j));
    auto b = tree.branch(j);
    result = b ? lazy_tree_json(*b, depth) : json{{"empty", true}, {"n", tree.alphabet()}};
  } else if (a == "truncate") {
    result = tree_to_json(tree.truncate(depth));
  } else if (a == "metric") {
    const LazyTree other = parse_tree(c.input("other"));
    if (other.alphabet() != tree.alphabet()) throw Error(ErrorKind::AlphabetMismatch, "metric");
    result = {{"agreement_depth", agreement_depth(tree, other, depth)},
              {"max_depth", depth},
              {"metric", tree_metric(tree, other, depth)}};
  } else if (a == "canonical") {
    auto f = tree.as_finite();
    if (!f) invalid("canonical form needs a finite tree");
    const CanonicalForm cf = canonical_form(*f);
    result = {{"encoding", cf.encoding}, {"minimal_alphabet", cf.minimal_alphabet}};
  } else {
    const int n = tree.n();
    const int m = m_of(tree);
    result = {{"n", n}, {"m", m}, {"minimal_alphabet", std::max(n, m + 1)}};
  }
  emit(result, c, out);
  return kOk;
}

int cmd_eval(const Config& c, std::ostream& out) {
  const MeasureSpecPtr spec = parse_measure(c.input("measure"));
  const json points = c.input("points");
  if (!points.is_array()) invalid("points must be an array");
  std::vector<Complex> zs;
  for (const auto& p : points) {
    const Complex z = complex_from_json(p);
    require_upper_half_plane(z, "point");
    zs.push_back(z);
  }
  const CompiledMeasure cm = compile_measure(*spec, engine_options(c));
  const std::string which = c.text("which");
  json values = json::array();
  for (Complex z : zs) {
    Complex v;
    if (which == "G") {
      v = cm.g(z);
    } else if (which == "F") {
      v = 1.0 / cm.g(z);
    } else {
      v = cm.k(z);
    }
    values.push_back(complex_to_json(v));
  }
  emit(json{{"measure", spec->describe()}, {"values", values}, {"which", which}}, c, out);
  return kOk;
}

std::vector<KEvaluator> letter_measures(const json& mj, int alphabet, const EngineOptions& o) {
  std::vector<KEvaluator> ms;
  if (mj.is_array()) {
    if (static_cast<int>(mj.size()) != alphabet)
      throw Error(ErrorKind::ArityMismatch, "need one measure per letter");
    for (const auto& m : mj) ms.push_back(compile(*parse_measure(m), o));
  } else {
    ms.assign(static_cast<std::size_t>(alphabet), compile(*parse_measure(mj), o));
  }
  return ms;
}

struct Source {
  std::function<Complex(Complex)> g;
  std::function<ConvergenceReport()> report;
  std::string provenance;
};

Source density_source(const Config& c) {
  const EngineOptions o = engine_options(c);
  const json mj = c.input("measure");
  if (c.has("tree")) {
    const LazyTree tree = parse_tree(c.input("tree"));
    std::shared_ptr<TreeConvolution> conv;
    if (c.has("k")) {
      if (mj.is_array()) invalid("--k takes a single measure");
      conv = std::make_shared<TreeConvolution>(
          bp_approximant(tree, compile(*parse_measure(mj), o), static_cast<int>(c.integer("k")), o));
    } else {
      conv = std::make_shared<TreeConvolution>(tree, letter_measures(mj, tree.alphabet(), o), o);
    }
    return {g_from_k(conv->as_evaluator()), [conv] { return conv->aggregate_report(); }, tree.describe()};
  }
  const MeasureSpecPtr spec = parse_measure(mj);
  if (const auto* tc = std::get_if<TreeConvolutionOf>(&spec->law)) {
    std::vector<KEvaluator> ms;
    for (const auto& m : tc->measures) ms.push_back(compile(*m, o));
    auto conv = std::make_shared<TreeConvolution>(tc->tree, std::move(ms), o);
    return {g_from_k(conv->as_evaluator()), [conv] { return conv->aggregate_report(); }, spec->describe()};
  }
  return {compile_measure(*spec, o).g, [] { return ConvergenceReport{}; }, spec->describe()};
}

void write_density_csv(const DensityGrid& d, const Config& c, std::ostream& out) {
  if (!c.has("out")) {
    write_csv(out, d);
    return;
  }
  const std::string path = c.text("out");
  std::ofstream f(path);
  if (!f) invalid("cannot write " + path);
  write_csv(f, d);
  write_sidecar(path, c);
}

json grid_json(const DensityGrid& d) {
  const Moments mo = moments(d, 2);
  return {{"points", d.size()}, {"moments", mo.values}, {"mass_deficit", mo.mass_deficit}};
}

int cmd_density(const Config& c, std::ostream& out) {
  const Source src = density_source(c);
  const DensityGrid d = density(src.g, c.number("xmin"), c.number("xmax"), c.number("step"), c.number("eps"),
                                src.provenance, thread_count(c));
  const ConvergenceReport r = src.report();
  write_density_csv(d, c, out);
  if (c.has("out")) {
    json report = grid_json(d);
    report["convergence"] = report_json(r);
    report["provenance"] = d.provenance;
    report["warnings"] = r.converged ? json::array() : json::array({"convergence not reached"});
    out << report.dump(2) << "\n";
  }
  return kOk;
}

int cmd_bp(const Config& c, std::ostream& out) {
  const EngineOptions o = engine_options(c);
  const LazyTree tree = parse_tree(c.input("tree"));
  if (tree.n() <= 1) throw Error(ErrorKind::RootDegreeTooSmall, "n(T) = " + std::to_string(tree.n()));
  const KEvaluator mu = compile(*parse_measure(c.input("measure")), o);
  const int k_min = static_cast<int>(c.integer("k_min"));
  const int k_max = static_cast<int>(c.integer("k_max"));
  const unsigned threads = thread_count(c);

  json table = json::array();
  json reports = json::array();
  std::optional<DensityGrid> prev;
  std::optional<CdfGrid> prev_cdf;
  for (int k = k_min; k <= k_max; ++k) {
    const TreeConvolution conv = bp_approximant(tree, mu, k, o);
    DensityGrid d = density(g_from_k(conv.as_evaluator()), c.number("xmin"), c.number("xmax"),
                            c.number("step"), c.number("eps"), "bp k=" + std::to_string(k), threads);
    CdfGrid cdf = cdf_from_density(d);
    json rep = report_json(conv.aggregate_report());
    rep["k"] = k;
    reports.push_back(rep);
    if (prev) {
      table.push_back({{"k", k - 1},
                       {"k_next", k},
                       {"levy", levy_distance(*prev_cdf, cdf)},
                       {"sup_density_change", sup_difference(*prev, d)}});
    }
    prev = std::move(d);
    prev_cdf = std::move(cdf);
  }
  if (c.has("out")) write_density_csv(*prev, c, out);
  json result = {{"convergence", reports}, {"distances", table}, {"final", grid_json(*prev)}};
  out << result.dump(2) << "\n";
  return kOk;
}

int cmd_check(const Config& c, std::ostream& out) {
  const std::string suite = c.text("suite");
  std::vector<std::string> names;
  if (suite == "all") {
    names = suite_names();
  } else {
    const auto all = suite_names();
    if (std::find(all.begin(), all.end(), suite) == all.end()) invalid("unknown suite " + suite);
    names = {suite};
  }
  const auto seed = static_cast<std::uint64_t>(c.integer("seed"));
  const std::string fault = c.text("inject_fault");
  bool passed = true;
  json suites = json::array();
  for (const auto& name : names) {
    const SuiteReport r = run_suite(name, seed, fault);
    passed = passed && r.passed;
    suites.push_back(to_json(r));
  }
  emit(json{{"passed", passed}, {"seed", seed}, {"suites", suites}}, c, out);
  return passed ? kOk : kSuiteFailure;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& msg) {
  err << json{{"error", {{"kind", kind}, {"message", msg}}}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-indexed convolutions of probability measures"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path;
    std::string action;
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"tree", "tree operations: compose, branch, truncate, metric, canonical, stats"},
      {"eval", "evaluate G, F or K of a measure"},
      {"density", "density of a measure or a tree convolution on a grid"},
      {"bp", "successive approximants of a limit law"},
      {"check", "run the property suites"},
  };
  std::map<std::string, Sub> subs;
  for (const auto& [name, help] : commands) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    if (name == "tree")
      s.app->add_option("action", s.action, "action")
          ->required()
          ->check(CLI::IsMember({"compose", "branch", "truncate", "metric", "canonical", "stats"}));
    s.app->add_option("--config", s.config_path, "JSON config file");
    for (const Knob& knob : knobs()) {
      if (knob.kind == Kind::Flag) {
        s.opts[knob.name] = s.app->add_flag(flag_name(knob.name), knob.help);
      } else {
        s.opts[knob.name] = s.app->add_option(flag_name(knob.name), s.raw[knob.name], knob.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what());
    return kInputError;
  }
  CLI::App* chosen = app.get_subcommands().front();

  try {
    Sub& s = subs.at(chosen->get_name());
    Config c;
    c.command = chosen->get_name();
    c.action = s.action;
    c.values = defaults_for(c.command);
    if (!s.config_path.empty()) {
      const json file = read_json_file(s.config_path);
      if (!file.is_object()) invalid("config must be a JSON object");
      for (const auto& [key, value] : file.items()) {
        const auto known = std::find_if(knobs().begin(), knobs().end(),
                                        [&](const Knob& k) { return key == k.name; });
        if (known == knobs().end()) invalid("unknown config key " + key);
        c.values[key] = value;
      }
    }
    for (const Knob& knob : knobs()) {
      if (s.opts[knob.name]->count() == 0) continue;
      c.values[knob.name] = convert(knob, s.raw[knob.name]);
    }
    validate(c);

    if (c.command == "tree") return cmd_tree(c, out);
    if (c.command == "eval") return cmd_eval(c, out);
    if (c.command == "density") return cmd_density(c, out);
    if (c.command == "bp") return cmd_bp(c, out);
    return cmd_check(c, out);
  } catch (const DepthCapReached& e) {
    err << json{{"error",
                 {{"kind", to_string(ErrorKind::DepthCapReached)},
                  {"message", e.what()},
                  {"best", complex_to_json(e.best())},
                  {"report", report_json(e.report())}}}}
               .dump()
        << "\n";
    return kConvergenceFailure;
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::DepthCapReached ? kConvergenceFailure : kInputError;
    print_error(err, to_string(e.kind()), e.what());
    return code;
  } catch (const json::exception& e) {
    print_error(err, to_string(ErrorKind::InvalidSpec), e.what());
    return kInputError;
  }
}

}  // namespace treeconv::cli

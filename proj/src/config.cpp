#include "zopn/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace zopn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double to_double(std::string_view s, const std::string& what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, s));
  }
  return v;
}

long long to_integer(std::string_view s, const std::string& what) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", what, s));
  }
  return v;
}

/// "name(a, b)" -> {"name", {"a", "b"}}; "name" -> {"name", {}}.
std::pair<std::string, std::vector<std::string_view>> split_call(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos) return {lower(text), {}};
  if (text.back() != ')') throw ConfigError(fmt::format("unbalanced parentheses in '{}'", text));
  std::vector<std::string_view> args;
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  while (!inner.empty()) {
    const auto comma = inner.find(',');
    args.push_back(trim(inner.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return {lower(trim(text.substr(0, open))), args};
}

void expect_args(const std::string& name, const std::vector<std::string_view>& args, std::size_t lo,
                 std::size_t hi) {
  if (args.size() < lo || args.size() > hi) {
    throw ConfigError(fmt::format("'{}' takes {} to {} arguments, got {}", name, lo, hi, args.size()));
  }
}

// Recursive descent over + - * / ( ) with the variable n.
class BudgetParser {
 public:
  BudgetParser(std::string_view text, Index n) : text_(text), n_(static_cast<long double>(n)) {}

  std::uint64_t run() {
    const long double v = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    if (v < 0) fail("budget must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }

 private:
  long double expr() {
    long double v = term();
    for (;;) {
      skip();
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }
  long double term() {
    long double v = factor();
    for (;;) {
      skip();
      if (eat('*')) {
        v *= factor();
      } else if (eat('/')) {
        const long double d = factor();
        if (d == 0) fail("division by zero");
        v = static_cast<long double>(static_cast<long long>(v / d));
      } else {
        return v;
      }
    }
  }
  long double factor() {
    skip();
    if (eat('(')) {
      const long double v = expr();
      skip();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (eat('n')) return n_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number, 'n' or '('");
    return static_cast<long double>(to_integer(text_.substr(start, pos_ - start), "budget"));
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(fmt::format("budget expression '{}': {}", text_, why));
  }

  std::string_view text_;
  long double n_;
  std::size_t pos_ = 0;
};

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  text = trim(text);
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const long long lo = to_integer(text.substr(0, dots), "seeds");
    const long long hi = to_integer(text.substr(dots + 2), "seeds");
    if (lo < 0 || hi < lo) throw ConfigError(fmt::format("bad seed range '{}'", text));
    for (long long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    return seeds;
  }
  while (!text.empty()) {
    const auto comma = text.find(',');
    const long long s = to_integer(text.substr(0, comma), "seeds");
    if (s < 0) throw ConfigError("seeds must be nonnegative");
    seeds.push_back(static_cast<std::uint64_t>(s));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return seeds;
}

/// Typed access with unknown-key detection.
class SectionReader {
 public:
  explicit SectionReader(const ConfigSection& s) : s_(s) {}

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    const auto it = s_.values.find(key);
    if (it == s_.values.end()) return std::nullopt;
    return it->second;
  }
  double number(const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? to_double(*v, where(key)) : fallback;
  }
  long long integer(const std::string& key, long long fallback) {
    const auto v = get(key);
    return v ? to_integer(*v, where(key)) : fallback;
  }
  std::string where(const std::string& key) const {
    const auto it = s_.lines.find(key);
    return fmt::format("line {} ({})", it == s_.lines.end() ? s_.line : it->second, key);
  }
  void finish() const {
    for (const auto& [key, value] : s_.values) {
      if (!used_.count(key)) {
        throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", s_.lines.at(key), key, s_.kind));
      }
    }
  }

 private:
  const ConfigSection& s_;
  std::set<std::string> used_;
};

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractViolation& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  } catch (const ParseError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

ProblemSpec read_problem(SectionReader& r, std::optional<std::filesystem::path>& dataset_path,
                         const std::filesystem::path& base_dir) {
  ProblemSpec spec;
  const std::string kind = lower(r.get("kind").value_or("lasso"));
  spec.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
  if (kind == "lasso") {
    LassoSpec s;
    s.n = r.integer("n", s.n);
    s.p = r.integer("p", static_cast<long long>(std::llround(0.4 * static_cast<double>(s.n))));
    s.sparsity = r.number("sparsity", s.sparsity);
    s.noise_level = r.number("noise", s.noise_level);
    s.zeta = r.number("zeta", s.zeta);
    if (s.n <= 0 || s.p <= 0) throw ConfigError("lasso needs positive n and p");
    spec.kind = s;
  } else if (kind == "logistic_l1") {
    spec.kind = LogisticL1Spec{r.number("zeta", LogisticL1Spec{}.zeta)};
  } else if (kind == "logistic_l2") {
    spec.kind = LogisticL2Spec{r.number("zeta", LogisticL2Spec{}.zeta)};
  } else if (kind == "elastic_binary") {
    spec.kind = ElasticBinarySpec{r.number("zeta1", ElasticBinarySpec{}.zeta1),
                                  r.number("zeta2", ElasticBinarySpec{}.zeta2)};
  } else if (kind == "svm_tanh") {
    spec.kind = SvmTanhSpec{r.number("zeta", SvmTanhSpec{}.zeta)};
  } else {
    throw ConfigError(fmt::format("{}: unknown problem kind '{}'", r.where("kind"), kind));
  }
  if (const auto path = r.get("dataset")) {
    std::filesystem::path p(std::string(trim(*path)));
    if (p.is_relative()) p = base_dir / p;
    dataset_path = p;
    spec.dataset = std::make_shared<const Dataset>(load_libsvm(p));
  }
  return spec;
}

SolverEntry read_solver(SectionReader& r, const std::string& label) {
  SolverEntry entry;
  entry.name = label.empty() ? "solver" : label;
  const std::string type = lower(r.get("type").value_or("zopn"));
  const auto est_text = r.get("estimator");
  if (type == "zopn") {
    ZopnConfig cfg;
    if (est_text) cfg.estimator = with_context(r.where("estimator"), [&] { return parse_estimator(*est_text); });
    if (const auto h = r.get("hessian")) cfg.hessian = with_context(r.where("hessian"), [&] { return parse_hessian(*h); });
    if (const auto s = r.get("schedule")) {
      cfg.schedule = with_context(r.where("schedule"), [&] { return parse_schedule(*s); });
    }
    if (const auto s = r.get("radius")) cfg.schedule = ConstantRadius{to_double(*s, r.where("radius"))};
    cfg.c1 = r.number("c1", cfg.c1);
    cfg.c2 = r.number("c2", cfg.c2);
    cfg.beta = r.number("beta", cfg.beta);
    cfg.initial_step = r.number("step", cfg.initial_step);
    cfg.gamma = r.number("gamma", cfg.gamma);
    if (const auto t = r.get("tolerance")) {
      if (lower(trim(*t)) == "none") {
        cfg.tolerance = std::nullopt;
      } else {
        cfg.tolerance = to_double(*t, r.where("tolerance"));
      }
    }
    cfg.max_inner = static_cast<int>(r.integer("max_inner", cfg.max_inner));
    cfg.bounds.min_eig = r.number("min_eig", cfg.bounds.min_eig);
    cfg.bounds.max_eig = r.number("max_eig", cfg.bounds.max_eig);
    cfg.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
    with_context(fmt::format("solver '{}'", entry.name), [&] {
      validate(cfg);
      return 0;
    });
    if (std::holds_alternative<BfgsHessian>(cfg.hessian) &&
        std::holds_alternative<DoublyExponentialRadius>(cfg.schedule) && cfg.tolerance && *cfg.tolerance > 0.0) {
      const double eps = *cfg.tolerance;
      const double r0 = next_radius(cfg.schedule, 0);
      if (r0 > eps * eps * eps) {
        throw ConfigError(fmt::format("{}: solver '{}': bfgs with a doubly exponential schedule needs radius_0 = {} <= "
                                      "tolerance^3 = {}",
                                      r.where("schedule"), entry.name, r0, eps * eps * eps));
      }
    }
    entry.config = cfg;
  } else if (type == "proxgd") {
    ProxGdConfig cfg;
    if (est_text) cfg.estimator = with_context(r.where("estimator"), [&] { return parse_estimator(*est_text); });
    cfg.radius = r.number("radius", cfg.radius);
    cfg.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
    cfg.runs = static_cast<int>(r.integer("runs", is_stochastic(cfg.estimator) ? 10 : 1));
    const std::string step = r.get("step").value_or("tune");
    if (lower(trim(step)) == "tune") {
      entry.tune = true;
    } else {
      cfg.step = to_double(step, r.where("step"));
    }
    if (const auto b = r.get("tune_budget")) entry.tune_budget_expr = std::string(trim(*b));
    if (r.get("tune_runs")) entry.tune_runs = static_cast<int>(r.integer("tune_runs", 1));
    with_context(fmt::format("solver '{}'", entry.name), [&] {
      validate(cfg);
      return 0;
    });
    entry.config = cfg;
  } else {
    throw ConfigError(fmt::format("{}: unknown solver type '{}'", r.where("type"), type));
  }
  return entry;
}

}  // namespace

std::vector<ConfigSection> parse_sections(std::string_view text) {
  std::vector<ConfigSection> sections;
  sections.push_back(ConfigSection{});
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: unterminated section header", line_no));
      const std::string_view header = trim(line.substr(1, line.size() - 2));
      const auto space = header.find_first_of(" \t");
      ConfigSection s;
      s.kind = lower(header.substr(0, space));
      if (space != std::string_view::npos) s.label = std::string(trim(header.substr(space)));
      if (s.kind.empty()) throw ConfigError(fmt::format("line {}: empty section header", line_no));
      s.line = line_no;
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    ConfigSection& current = sections.back();
    if (current.values.count(key)) throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
    current.values[key] = value;
    current.lines[key] = line_no;
  }
  if (sections.front().values.empty()) sections.erase(sections.begin());
  return sections;
}

std::uint64_t evaluate_budget(std::string_view expr, Index n) { return BudgetParser(trim(expr), n).run(); }

static GradEstimator parse_estimator_unchecked(std::string_view text) {
  const auto [name, args] = split_call(text);
  if (name == "forward" || name == "fd") {
    expect_args(name, args, 0, 0);
    return ForwardDifference{};
  }
  if (name == "central" || name == "cd") {
    expect_args(name, args, 0, 0);
    return CentralDifference{};
  }
  if (name == "gaussian" || name == "gs") {
    expect_args(name, args, 0, 1);
    return GaussianSmoothing{args.empty() ? 1 : static_cast<int>(to_integer(args[0], name))};
  }
  if (name == "spherical" || name == "ss") {
    expect_args(name, args, 0, 1);
    return SphericalSmoothing{args.empty() ? 1 : static_cast<int>(to_integer(args[0], name))};
  }
  if (name == "double_gaussian" || name == "dgs") {
    expect_args(name, args, 0, 1);
    DoubleGaussianSmoothing e;
    if (!args.empty()) e.outer_radius = to_double(args[0], name);
    return e;
  }
  throw ConfigError(fmt::format("unknown estimator '{}'", text));
}

GradEstimator parse_estimator(std::string_view text) {
  GradEstimator est = parse_estimator_unchecked(text);
  try {
    validate(est);
  } catch (const ContractViolation& e) {
    throw ConfigError(fmt::format("estimator '{}': {}", text, e.what()));
  }
  return est;
}

RadiusSchedule parse_schedule(std::string_view text) {
  const auto [name, args] = split_call(text);
  RadiusSchedule out;
  if (args.empty() && !name.empty() && (std::isdigit(static_cast<unsigned char>(name.front())) || name.front() == '.')) {
    out = ConstantRadius{to_double(name, "radius")};
  } else if (name == "constant") {
    expect_args(name, args, 1, 1);
    out = ConstantRadius{to_double(args[0], name)};
  } else if (name == "power") {
    expect_args(name, args, 2, 2);
    out = PowerDecayRadius{to_double(args[0], name), to_double(args[1], name)};
  } else if (name == "doubly_exponential") {
    expect_args(name, args, 0, 3);
    DoublyExponentialRadius s;
    if (args.size() > 0) s.base = to_double(args[0], name);
    if (args.size() > 1) s.cap = to_double(args[1], name);
    if (args.size() > 2) s.floor = to_double(args[2], name);
    out = s;
  } else {
    throw ConfigError(fmt::format("unknown radius schedule '{}'", text));
  }
  validate(out);
  return out;
}

HessianStrategy parse_hessian(std::string_view text) {
  const auto [name, args] = split_call(text);
  if (name == "identity") {
    expect_args(name, args, 0, 0);
    return IdentityHessian{};
  }
  if (name == "bfgs") {
    expect_args(name, args, 0, 1);
    BfgsHessian h;
    if (!args.empty()) h.curvature_threshold = to_double(args[0], name);
    return h;
  }
  if (name == "lazy" || name == "lazyh") {
    expect_args(name, args, 0, 1);
    return LazyHessian{args.empty() ? 0 : static_cast<int>(to_integer(args[0], name))};
  }
  throw ConfigError(fmt::format("unknown Hessian strategy '{}'", text));
}

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  bool have_problem = false;
  for (const ConfigSection& section : parse_sections(text)) {
    SectionReader r(section);
    if (section.kind == "problem") {
      if (have_problem) throw ConfigError(fmt::format("line {}: second [problem] section", section.line));
      cfg.problem = read_problem(r, cfg.dataset_path, base_dir);
      have_problem = true;
    } else if (section.kind == "experiment") {
      if (const auto b = r.get("budget")) cfg.budget_expr = *b;
      cfg.gap_tol = r.number("gap_tol", cfg.gap_tol);
      if (const auto s = r.get("seeds")) cfg.seeds = parse_seeds(*s);
      if (const auto o = r.get("output")) {
        cfg.output = std::filesystem::path(*o);
        if (cfg.output.is_relative()) cfg.output = base_dir / cfg.output;
      }
      cfg.threads = static_cast<int>(r.integer("threads", 0));
      evaluate_budget(cfg.budget_expr, 1);
    } else if (section.kind == "solver") {
      cfg.solvers.push_back(read_solver(r, section.label));
    } else {
      throw ConfigError(fmt::format("line {}: unknown section [{}]", section.line, section.kind));
    }
    r.finish();
  }
  if (!have_problem) throw ConfigError("config has no [problem] section");
  if (cfg.solvers.empty()) throw ConfigError("config has no [solver ...] section");
  std::set<std::string> names;
  for (const auto& s : cfg.solvers) {
    if (!names.insert(s.name).second) throw ConfigError(fmt::format("duplicate solver name '{}'", s.name));
  }
  if (!std::holds_alternative<LassoSpec>(cfg.problem.kind) && !cfg.problem.dataset) {
    throw ConfigError(fmt::format("problem '{}' needs a dataset", kind_name(cfg.problem.kind)));
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment(buffer.str(), path.parent_path().empty() ? "." : path.parent_path());
}

Index problem_dimension(const ExperimentConfig& cfg) {
  if (const auto* lasso = std::get_if<LassoSpec>(&cfg.problem.kind)) return lasso->n;
  if (!cfg.problem.dataset) throw ConfigError("problem has no dataset");
  return cfg.problem.dataset->n;
}

}  // namespace zopn

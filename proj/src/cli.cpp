#include "cohexp/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "cohexp/coherence.hpp"
#include "cohexp/error.hpp"
#include "cohexp/experiments.hpp"
#include "cohexp/functor.hpp"
#include "cohexp/gamma.hpp"
#include "cohexp/serialize.hpp"

namespace cohexp::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string expr;
  std::string expr2;
  std::string gamma;
  std::string config;
  std::string out;
  std::string format = "text";
  std::string setting = "xor";
  double alpha = 0.5;
  std::size_t grid = 0;
  std::size_t random = 0;
  std::uint64_t seed = 0;
  std::size_t witnesses = 5;
  bool ascii = false;
  bool no_simplify = false;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string point(const Point& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + num(x[i]);
  return s + ")";
}

std::string bits(const BoolVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(int(v[i]));
  return s + ")";
}

std::string describe(const SamplingSpec& s, std::size_t arity) {
  std::ostringstream os;
  if (auto g = std::get_if<SamplingSpec::Grid>(&s.mode)) {
    os << "grid " << g->points_per_axis << " per axis (" << s.sample_count(arity) << " points)";
  } else {
    const auto& r = std::get<SamplingSpec::Random>(s.mode);
    os << "random " << r.count << " points (seed " << r.seed << ")";
  }
  return os.str();
}

class Command {
 public:
  Command(const Options& o, const std::set<std::string>& given, std::ostream& out)
      : o_(o), given_(given), out_(out) {}

  Projection projection() const { return Projection::threshold(o_.alpha); }
  bool structured() const { return o_.format == "structured"; }

  std::optional<SamplingSpec> sampling() const {
    if (o_.grid && o_.random) throw DomainError("--grid and --random are mutually exclusive");
    if (o_.grid) return SamplingSpec::grid(o_.grid);
    if (o_.random) return SamplingSpec::random(o_.random, o_.seed);
    return std::nullopt;
  }
  SamplingSpec sampling_for(std::size_t arity) const {
    auto s = sampling();
    return s ? *s : SamplingSpec::default_for(arity, o_.seed);
  }

  Expr expr(const std::string& path, const char* flag) const {
    if (path.empty()) throw DomainError(std::string("missing required ") + flag);
    if (!fs::exists(path)) throw FormatError(std::string(flag) + ": no such file " + path);
    return load_expr(path);
  }

  GammaSpec gamma(bool required) const {
    const std::string& g = o_.gamma;
    if (g.empty() && !required) return GammaSpec::domain_extension(projection(), sampling());
    if (g == "extend") return GammaSpec::domain_extension(projection(), sampling());
    const std::string prefix = "output-mod:";
    if (g.rfind(prefix, 0) == 0) {
      return GammaSpec::output_modification(expr(g.substr(prefix.size()), "--gamma output-mod:<file>"),
                                            projection(), sampling());
    }
    throw DomainError("--gamma must be \"extend\" or \"output-mod:<file>\", got \"" + g + "\"");
  }

  // Structured output goes through here so --out applies uniformly.
  void emit(const std::string& text) const {
    if (!o_.out.empty() && structured()) {
      write_text_file(o_.out, text);
    } else {
      out_ << text;
    }
  }
  void emit(const Json& j) const { emit(j.dump(2) + "\n"); }

  int check() const {
    const Expr f = expr(o_.expr, "--expr");
    const auto s = sampling_for(f.in_arity());
    const auto report = check_coherence(f, projection(), s, kDefaultWitnessLimit);
    if (structured()) {
      emit(report_to_json(report));
      return kOk;
    }
    std::ostringstream os;
    os << "expression: " << f.in_arity() << " -> " << f.out_arity() << " under " << projection().describe()
       << "\nsampling: " << describe(s, f.in_arity())
       << "\nverdict: " << (report.fully_coherent() ? "coherent on sample" : "incoherent") << '\n';
    for (std::size_t i = 0; i < report.per_component.size(); ++i) {
      const auto& c = report.per_component[i];
      os << "component " << i << ": coherent fraction " << num(c.fraction()) << " (" << c.coherent << "/"
         << c.total << ")\n";
      for (std::size_t k = 0; k < c.witnesses.size() && k < o_.witnesses; ++k) {
        const auto& w = c.witnesses[k];
        os << "  witness x=" << point(w.x) << " f=" << num(w.value) << " delta(f(x))=" << num(w.projected)
           << " delta(f(delta(x)))=" << num(w.projected_at_fixed) << '\n';
      }
    }
    emit(os.str());
    return kOk;
  }

  int explain() const {
    const Expr f = expr(o_.expr, "--expr");
    const GammaSpec spec = gamma(false);
    const DnfFormula dnf = cohexp::explain(f, spec, !o_.no_simplify);
    if (structured()) {
      emit(dnf_to_json(dnf));
      return kOk;
    }
    const Notation n = o_.ascii ? Notation::Ascii : Notation::Unicode;
    std::ostringstream os;
    for (std::size_t k = 0; k < dnf.n_outputs(); ++k) {
      if (dnf.n_outputs() > 1) os << "output " << k << ": ";
      os << dnf.render(k, n) << '\n';
    }
    emit(os.str());
    return kOk;
  }

  int repair() const {
    const Expr f = expr(o_.expr, "--expr");
    if (o_.gamma.empty()) throw DomainError("missing required --gamma");
    const GammaSpec spec = gamma(true);
    const auto sampling = spec.sampling_for(f.in_arity());
    const auto before = check_coherence(f, spec.projection, sampling, 0);
    const Expr repaired = apply_gamma(f, spec);
    const auto after = check_coherence(repaired, spec.projection, spec.sampling_for(repaired.in_arity()), 0);
    const Json doc = expr_to_json(repaired);
    if (structured()) {
      emit(doc);
      return kOk;
    }
    if (!o_.out.empty()) write_text_file(o_.out, doc.dump(2) + "\n");
    std::ostringstream os;
    os << "gamma: " << spec.describe() << "\nincoherent component indices before:";
    const auto bad = incoherent_components(before);
    if (bad.empty()) os << " none (unchanged)";
    for (auto i : bad) os << ' ' << i;
    os << "\nrepaired: " << repaired.in_arity() << " -> " << repaired.out_arity()
       << "\ncoherent after: " << (after.fully_coherent() ? "yes" : "no") << '\n';
    if (o_.out.empty()) os << doc.dump(2) << '\n';
    out_ << os.str();
    return kOk;
  }

  int demo_noncomp() const {
    if (o_.gamma.empty()) throw DomainError("missing required --gamma");
    const GammaSpec spec = gamma(true);
    const auto result = o_.expr.empty() ? demo_noncompositional(spec)
                                        : demo_noncompositional(spec, expr(o_.expr, "--expr"));
    Json j;
    std::ostringstream os;
    if (auto w = std::get_if<NonCompositionalWitness>(&result)) {
      j = {{"result", "witness"},
           {"a", w->a},
           {"gamma_g_at_a", w->gamma_g_at_a},
           {"lhs", w->lhs},
           {"rhs", w->rhs},
           {"g", expr_to_json(w->g)},
           {"f", expr_to_json(w->f)}};
      os << "f = constant " << num(w->a) << ", a = " << num(w->a) << "\nGamma(g . f)(a) = " << num(w->lhs)
         << "\n(Gamma(g) . Gamma(f))(a) = " << num(w->rhs) << "\nGamma(g)(a) = " << num(w->gamma_g_at_a)
         << "\nGamma(g . f) != Gamma(g) . Gamma(f)\n";
    } else if (auto u = std::get_if<CompositionUndefined>(&result)) {
      j = {{"result", "composition_undefined"},
           {"gamma_g_in_arity", u->gamma_g_in_arity},
           {"f_out_arity", u->f_out_arity}};
      os << "Gamma(g) takes " << u->gamma_g_in_arity << " inputs but Gamma(f) has " << u->f_out_arity
         << " output: Gamma(g) . Gamma(f) is undefined while Gamma(g . f) exists\n";
    } else {
      const auto& na = std::get<NotApplicable>(result);
      j = {{"result", "not_applicable"}, {"reason", na.reason}};
      os << "not applicable: " << na.reason << '\n';
    }
    emit(structured() ? j.dump(2) + "\n" : os.str());
    return kOk;
  }

  int functor_law() const {
    const Expr f = expr(o_.expr, "--expr");
    const Expr g = expr(o_.expr2, "--expr2");
    const auto result = verify_functor_law(f, g, projection());
    Json j;
    std::ostringstream os;
    if (auto v = std::get_if<FunctorViolated>(&result)) {
      const BoolVector& vertex = v->vertex;
      j = {{"result", "violated"}, {"vertex", vertex}, {"composite", v->composite}, {"composed", v->composed}};
      os << "violated at vertex " << bits(vertex) << ": (g . f)^delta = " << bits(v->composite)
         << ", g^delta . f^delta = " << bits(v->composed) << '\n';
    } else {
      j = {{"result", "holds"}};
      os << "holds: (g . f)^delta = g^delta . f^delta on all " << (std::size_t{1} << f.in_arity())
         << " vertices\n";
    }
    emit(structured() ? j.dump(2) + "\n" : os.str());
    return kOk;
  }

  int experiment(const Json& config) const {
    Setting setting = setting_from_string(o_.setting);
    if (!given_.count("setting") && config.contains("setting")) {
      setting = setting_from_string(config.at("setting").get<std::string>());
    }
    ExperimentConfig cfg = ExperimentConfig::defaults(setting, o_.seed);
    cfg = experiment_config_from_json(config, cfg);
    cfg.setting = setting;
    if (given_.count("seed") || !config.contains("train") || !config.at("train").contains("seed")) {
      cfg.train.seed = o_.seed;
    }
    if (given_.count("alpha")) cfg.train.projection = projection();
    if (given_.count("no-simplify")) cfg.simplify = false;

    const ExperimentRun run = run_experiment(cfg);
    const Json report = metrics_to_json(run.report);
    const std::string table = render_table(run.report);
    if (!o_.out.empty()) {
      const fs::path dir(o_.out);
      write_text_file(dir / "config.json", experiment_config_to_json(cfg).dump(2) + "\n");
      write_text_file(dir / "report.json", report.dump(2) + "\n");
      write_text_file(dir / "report.txt", table);
      write_text_file(dir / "model.json", model_to_json(run.model).dump(2) + "\n");
      write_text_file(dir / "train.csv", run.train.to_csv());
      write_text_file(dir / "val.csv", run.val.to_csv());
      write_text_file(dir / "test.csv", run.test.to_csv());
      write_text_file(dir / "surface.csv", surface_csv(run.model, cfg.train.projection));
    }
    out_ << (structured() ? report.dump(2) + "\n" : table);
    return kOk;
  }

 private:
  // Model output on a 101 x 101 grid, with the coherence flag per point.
  static std::string surface_csv(const MlpModel& m, const Projection& p) {
    std::ostringstream os;
    os.precision(17);
    os << "x,y,output,coherent\n";
    Point x(2), dx(2), y(1), ydx(1);
    for (int i = 0; i <= 100; ++i) {
      for (int k = 0; k <= 100; ++k) {
        x[0] = i / 100.0;
        x[1] = k / 100.0;
        dx[0] = p.apply(x[0]);
        dx[1] = p.apply(x[1]);
        m.forward_into(x, y);
        m.forward_into(dx, ydx);
        os << x[0] << ',' << x[1] << ',' << y[0] << ',' << int(p.apply(y[0]) == p.apply(ydx[0])) << '\n';
      }
    }
    return os.str();
  }

  const Options& o_;
  const std::set<std::string>& given_;
  std::ostream& out_;
};

// Copies config values into options that were not given on the command line.
// Relative paths resolve against the config file's directory.
void merge_config(const Json& c, const fs::path& dir, const std::set<std::string>& given, Options& o) {
  auto path = [&](const char* key, std::string& field) {
    if (given.count(key) || !c.contains(key)) return;
    fs::path p = c.at(key).get<std::string>();
    field = p.is_relative() ? (dir / p).string() : p.string();
  };
  auto value = [&](const char* key, auto& field) {
    if (!given.count(key) && c.contains(key)) field = c.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    path("expr", o.expr);
    path("expr2", o.expr2);
    path("out", o.out);
    if (!given.count("gamma") && c.contains("gamma")) {
      o.gamma = c.at("gamma").get<std::string>();
      const std::string prefix = "output-mod:";
      if (o.gamma.rfind(prefix, 0) == 0) {
        fs::path p = o.gamma.substr(prefix.size());
        if (p.is_relative()) o.gamma = prefix + (dir / p).string();
      }
    }
    value("format", o.format);
    value("alpha", o.alpha);
    value("grid", o.grid);
    value("random", o.random);
    value("seed", o.seed);
    value("witnesses", o.witnesses);
    value("ascii", o.ascii);
    value("no-simplify", o.no_simplify);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  if (const char* env = std::getenv("COHEXP_SEED")) {
    try {
      o.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "E_DOMAIN: COHEXP_SEED must be an unsigned integer, got \"" << env << "\"\n";
      return kInputError;
    }
  }

  CLI::App app{"Coherence checking, repair and DNF explanations for fuzzy functions", "cohexp"};
  app.require_subcommand(1);
  std::map<std::string, CLI::Option*> opts;

  auto common = [&](CLI::App* sub) {
    auto add = [&opts, sub](const std::string& name, auto& field, const std::string& help) {
      auto* opt = sub->add_option("--" + name, field, help);
      opts[sub->get_name() + "/" + name] = opt;
      return opt;
    };
    auto flag = [&opts, sub](const std::string& name, bool& field, const std::string& help) {
      opts[sub->get_name() + "/" + name] = sub->add_flag("--" + name, field, help);
    };
    add("alpha", o.alpha, "threshold of the projection (default 0.5)");
    add("grid", o.grid, "sample a grid with this many points per axis");
    add("random", o.random, "sample this many uniform random points");
    add("seed", o.seed, "random seed (default: COHEXP_SEED or 0)");
    add("out", o.out, "output path");
    add("format", o.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
    add("config", o.config, "JSON file supplying any flag; flags take precedence")->check(CLI::ExistingFile);
    return std::pair{add, flag};
  };

  auto* check = app.add_subcommand("check", "estimate delta-coherence and list witnesses");
  {
    auto [add, flag] = common(check);
    add("expr", o.expr, "expression file");
    add("witnesses", o.witnesses, "witnesses printed per component (default 5)");
  }
  auto* explain = app.add_subcommand("explain", "booleanize an expression and print its DNF");
  {
    auto [add, flag] = common(explain);
    add("expr", o.expr, "expression file");
    add("gamma", o.gamma, "extend | output-mod:<fallback file> (default extend)");
    flag("ascii", o.ascii, "render with & | ! instead of Unicode connectives");
    flag("no-simplify", o.no_simplify, "print one minterm per true row");
  }
  auto* repair = app.add_subcommand("repair", "apply a coherency map and write the repaired expression");
  {
    auto [add, flag] = common(repair);
    add("expr", o.expr, "expression file");
    add("gamma", o.gamma, "extend | output-mod:<fallback file>");
  }
  auto* demo = app.add_subcommand("demo-noncomp", "build a witness that Gamma is not compositional");
  {
    auto [add, flag] = common(demo);
    add("gamma", o.gamma, "extend | output-mod:<fallback file>");
    add("expr", o.expr, "unary non-coherent g (default: 0 at 0, 1 elsewhere)");
  }
  auto* law = app.add_subcommand("functor-law", "compare (g . f)^delta with g^delta . f^delta");
  {
    auto [add, flag] = common(law);
    add("expr", o.expr, "f");
    add("expr2", o.expr2, "g");
  }
  auto* exp = app.add_subcommand("experiment", "run a synthetic experiment end to end");
  {
    auto [add, flag] = common(exp);
    add("setting", o.setting, "xor or fuzzy-or")->check(CLI::IsMember({"xor", "fuzzy-or"}));
    flag("no-simplify", o.no_simplify, "report unminimized formulas");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "E_USAGE: " << e.what() << '\n';
    return kInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::set<std::string> given;
  for (const auto& [key, opt] : opts) {
    const auto slash = key.find('/');
    if (key.substr(0, slash) == sub->get_name() && opt->count() > 0) given.insert(key.substr(slash + 1));
  }

  try {
    Json config = Json::object();
    if (!o.config.empty()) {
      config = read_json_file(o.config);
      if (!config.is_object()) throw FormatError("config: top level must be an object");
      merge_config(config, fs::path(o.config).parent_path(), given, o);
    }
    Command cmd(o, given, out);
    const std::string name = sub->get_name();
    if (name == "check") return cmd.check();
    if (name == "explain") return cmd.explain();
    if (name == "repair") return cmd.repair();
    if (name == "demo-noncomp") return cmd.demo_noncomp();
    if (name == "functor-law") return cmd.functor_law();
    return cmd.experiment(config);
  } catch (const ContractError& e) {
    err << e.code() << ": " << e.what() << '\n';
    return kContractError;
  } catch (const TrainingError& e) {
    err << e.code() << ": " << e.what() << '\n';
    return kFailure;
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "E_IO: " << e.what() << '\n';
    return kInputError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace cohexp::cli

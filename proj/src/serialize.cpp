#include "cohexp/serialize.hpp"

#include <fstream>
#include <sstream>

#include "cohexp/error.hpp"

namespace cohexp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw FormatError(std::string("missing field \"") + name + "\"");
  }
  return j.at(name);
}

template <class T>
T get_as(const Json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field \"") + name + "\": " + e.what());
  }
}

std::string op_name(Condition::Op op) {
  switch (op) {
    case Condition::Op::Less:
      return "<";
    case Condition::Op::LessEq:
      return "<=";
    case Condition::Op::Greater:
      return ">";
    case Condition::Op::GreaterEq:
      return ">=";
  }
  return "?";
}

Condition::Op op_from(const std::string& s) {
  if (s == "<") return Condition::Op::Less;
  if (s == "<=") return Condition::Op::LessEq;
  if (s == ">") return Condition::Op::Greater;
  if (s == ">=") return Condition::Op::GreaterEq;
  throw FormatError("unknown comparison \"" + s + "\"");
}

TNormKind tnorm_from(const std::string& s) {
  if (s == "min") return TNormKind::Min;
  if (s == "product") return TNormKind::Product;
  if (s == "lukasiewicz") return TNormKind::Lukasiewicz;
  throw FormatError("unknown t-norm \"" + s + "\"");
}

TConormKind tconorm_from(const std::string& s) {
  if (s == "max") return TConormKind::Max;
  if (s == "prob_sum") return TConormKind::ProbSum;
  if (s == "lukasiewicz") return TConormKind::Lukasiewicz;
  throw FormatError("unknown t-conorm \"" + s + "\"");
}

// Writes the projection fields into an existing object.
void put_projection(Json& j, const Projection& p) {
  std::visit(Overloaded{
                 [&](const Projection::Threshold& t) {
                   j["projection"] = "threshold";
                   j["alpha"] = t.alpha;
                 },
                 [&](const Projection::Identity&) { j["projection"] = "identity"; },
                 [&](const Projection::Quantize& q) {
                   j["projection"] = "quantize";
                   j["levels"] = q.levels;
                 },
             },
             p.kind());
}

}  // namespace

Json projection_to_json(const Projection& p) {
  Json j = Json::object();
  put_projection(j, p);
  return j;
}

Projection projection_from_json(const Json& j) {
  const auto kind = get_as<std::string>(j, "projection");
  try {
    if (kind == "threshold") return Projection::threshold(get_as<double>(j, "alpha"));
    if (kind == "identity") return Projection::identity();
    if (kind == "quantize") return Projection::quantize(get_as<int>(j, "levels"));
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
  throw FormatError("unknown projection \"" + kind + "\"");
}

Json sampling_to_json(const SamplingSpec& s) {
  Json j = Json::object();
  if (auto g = std::get_if<SamplingSpec::Grid>(&s.mode)) {
    j["mode"] = "grid";
    j["points_per_axis"] = g->points_per_axis;
  } else {
    const auto& r = std::get<SamplingSpec::Random>(s.mode);
    j["mode"] = "random";
    j["count"] = r.count;
    j["seed"] = r.seed;
  }
  return j;
}

SamplingSpec sampling_from_json(const Json& j) {
  const auto mode = get_as<std::string>(j, "mode");
  try {
    if (mode == "grid") return SamplingSpec::grid(get_as<std::size_t>(j, "points_per_axis"));
    if (mode == "random") {
      return SamplingSpec::random(get_as<std::size_t>(j, "count"), get_as<std::uint64_t>(j, "seed"));
    }
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
  throw FormatError("unknown sampling mode \"" + mode + "\"");
}

Json model_to_json(const MlpModel& m) {
  Json layers = Json::array();
  for (const auto& L : m.layers()) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < L.out; ++r) {
      rows.push_back(std::vector<double>(L.weights.begin() + static_cast<std::ptrdiff_t>(r * L.in),
                                         L.weights.begin() + static_cast<std::ptrdiff_t>((r + 1) * L.in)));
    }
    Json l = {{"activation", L.activation == Activation::PReLU ? "prelu" : "sigmoid"},
              {"weights", rows},
              {"bias", L.bias}};
    if (L.activation == Activation::PReLU) l["slope"] = L.slope;
    layers.push_back(std::move(l));
  }
  return Json{{"in_arity", m.in_arity()}, {"out_arity", m.out_arity()}, {"layers", layers}};
}

MlpModel model_from_json(const Json& j) {
  std::vector<DenseLayer> layers;
  for (const auto& l : field(j, "layers")) {
    DenseLayer L;
    const auto act = get_as<std::string>(l, "activation");
    if (act == "prelu") {
      L.activation = Activation::PReLU;
      L.slope = get_as<double>(l, "slope");
    } else if (act == "sigmoid") {
      L.activation = Activation::Sigmoid;
    } else {
      throw FormatError("unknown activation \"" + act + "\"");
    }
    const auto rows = get_as<std::vector<std::vector<double>>>(l, "weights");
    L.bias = get_as<std::vector<double>>(l, "bias");
    L.out = rows.size();
    L.in = rows.empty() ? 0 : rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != L.in) throw FormatError("ragged weight matrix");
      L.weights.insert(L.weights.end(), r.begin(), r.end());
    }
    layers.push_back(std::move(L));
  }
  MlpModel m(std::move(layers));
  if (j.contains("in_arity") && get_as<std::size_t>(j, "in_arity") != m.in_arity()) {
    throw FormatError("model in_arity does not match its layers");
  }
  if (j.contains("out_arity") && get_as<std::size_t>(j, "out_arity") != m.out_arity()) {
    throw FormatError("model out_arity does not match its layers");
  }
  return m;
}

Json expr_to_json(const Expr& e) {
  Json j = Json::object();
  const auto& n = e.node();
  auto head = [&](const char* tag) {
    j["node"] = tag;
    j["in_arity"] = n.in_arity;
    j["out_arity"] = n.out_arity;
  };
  std::visit(
      Overloaded{
          [&](const ExprNode::Const& c) {
            head("const");
            j["values"] = c.values;
          },
          [&](const ExprNode::Coord& c) {
            head("coord");
            j["indices"] = c.indices;
          },
          [&](const ExprNode::TNorm& t) {
            head("tnorm");
            j["kind"] = to_string(t.kind);
          },
          [&](const ExprNode::TConorm& t) {
            head("tconorm");
            j["kind"] = to_string(t.kind);
          },
          [&](const ExprNode::Affine& a) {
            head("affine");
            j["matrix"] = a.matrix;
            j["bias"] = a.bias;
            j["clamp"] = a.clamp;
          },
          [&](const ExprNode::Mlp& m) {
            head("mlp");
            if (!m.weights_ref.empty()) {
              j["weights_ref"] = m.weights_ref;
            } else {
              j["weights"] = model_to_json(*m.model);
            }
          },
          [&](const ExprNode::Lifted& l) {
            head("projection");
            put_projection(j, l.projection);
          },
          [&](const ExprNode::Compose& c) {
            head("compose");
            j["parts"] = Json::array({expr_to_json(c.outer), expr_to_json(c.inner)});
          },
          [&](const ExprNode::Parallel& p) {
            head("parallel");
            j["parts"] = Json::array();
            for (const auto& part : p.parts) j["parts"].push_back(expr_to_json(part));
          },
          [&](const ExprNode::Fanout& p) {
            head("fanout");
            j["parts"] = Json::array();
            for (const auto& part : p.parts) j["parts"].push_back(expr_to_json(part));
          },
          [&](const ExprNode::Piecewise& p) {
            head("piecewise");
            j["regions"] = Json::array();
            for (const auto& r : p.regions) {
              Json when = Json::array();
              for (const auto& c : r.when) {
                when.push_back({{"input", c.input}, {"op", op_name(c.op)}, {"value", c.value}});
              }
              j["regions"].push_back({{"when", when}, {"then", expr_to_json(r.then)}});
            }
            j["otherwise"] = expr_to_json(p.otherwise);
          },
          [&](const ExprNode::DomainExtension& d) {
            head("domain_extension");
            put_projection(j, d.projection);
            j["extended"] = d.extended;
            j["base"] = expr_to_json(d.base);
          },
          [&](const ExprNode::OutputModification& m) {
            head("output_modification");
            put_projection(j, m.projection);
            j["base"] = expr_to_json(m.base);
            j["fallback"] = expr_to_json(m.fallback);
          },
      },
      n.payload);
  return j;
}

namespace {

Expr parse_expr(const Json& j, const std::filesystem::path& base_dir) {
  const auto tag = get_as<std::string>(j, "node");
  auto parts = [&]() {
    std::vector<Expr> out;
    for (const auto& p : field(j, "parts")) out.push_back(parse_expr(p, base_dir));
    return out;
  };
  if (tag == "const") {
    return Expr::constant(get_as<std::size_t>(j, "in_arity"), get_as<std::vector<double>>(j, "values"));
  }
  if (tag == "coord") {
    return Expr::coord(get_as<std::size_t>(j, "in_arity"), get_as<std::vector<std::size_t>>(j, "indices"));
  }
  if (tag == "tnorm") return Expr::tnorm(tnorm_from(get_as<std::string>(j, "kind")));
  if (tag == "tconorm") return Expr::tconorm(tconorm_from(get_as<std::string>(j, "kind")));
  if (tag == "affine") {
    const bool clamp = j.contains("clamp") ? get_as<bool>(j, "clamp") : true;
    return Expr::affine(get_as<std::vector<std::vector<double>>>(j, "matrix"),
                        get_as<std::vector<double>>(j, "bias"), clamp);
  }
  if (tag == "mlp") {
    if (j.contains("weights_ref")) {
      const auto ref = get_as<std::string>(j, "weights_ref");
      const std::filesystem::path path = std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref) : base_dir / ref;
      return Expr::mlp(std::make_shared<const MlpModel>(load_model(path)), ref);
    }
    return Expr::mlp(std::make_shared<const MlpModel>(model_from_json(field(j, "weights"))));
  }
  if (tag == "projection") {
    return Expr::projection(projection_from_json(j), get_as<std::size_t>(j, "in_arity"));
  }
  if (tag == "compose") {
    auto ps = parts();
    if (ps.size() != 2) throw FormatError("compose needs exactly two parts [outer, inner]");
    return compose(ps[0], ps[1]);
  }
  if (tag == "parallel") return Expr::parallel(parts());
  if (tag == "fanout") return Expr::fanout(parts());
  if (tag == "piecewise") {
    std::vector<PiecewiseRegion> regions;
    for (const auto& r : field(j, "regions")) {
      PiecewiseRegion region{{}, parse_expr(field(r, "then"), base_dir)};
      for (const auto& c : field(r, "when")) {
        region.when.push_back(Condition{get_as<std::size_t>(c, "input"), op_from(get_as<std::string>(c, "op")),
                                        get_as<double>(c, "value")});
      }
      regions.push_back(std::move(region));
    }
    return Expr::piecewise(get_as<std::size_t>(j, "in_arity"), get_as<std::size_t>(j, "out_arity"),
                           std::move(regions), parse_expr(field(j, "otherwise"), base_dir));
  }
  if (tag == "domain_extension") {
    return Expr::domain_extension(parse_expr(field(j, "base"), base_dir), projection_from_json(j),
                                  get_as<std::vector<std::size_t>>(j, "extended"));
  }
  if (tag == "output_modification") {
    return Expr::output_modification(parse_expr(field(j, "base"), base_dir),
                                     parse_expr(field(j, "fallback"), base_dir), projection_from_json(j));
  }
  throw FormatError("unknown node \"" + tag + "\"");
}

}  // namespace

Expr expr_from_json(const Json& j, const std::filesystem::path& base_dir) {
  Expr e = parse_expr(j, base_dir);
  if (j.contains("in_arity") && get_as<std::size_t>(j, "in_arity") != e.in_arity()) {
    throw FormatError("node \"" + get_as<std::string>(j, "node") + "\": declared in_arity " +
                      std::to_string(get_as<std::size_t>(j, "in_arity")) + " but structure gives " +
                      std::to_string(e.in_arity()));
  }
  if (j.contains("out_arity") && get_as<std::size_t>(j, "out_arity") != e.out_arity()) {
    throw FormatError("node \"" + get_as<std::string>(j, "node") + "\": declared out_arity " +
                      std::to_string(get_as<std::size_t>(j, "out_arity")) + " but structure gives " +
                      std::to_string(e.out_arity()));
  }
  return e;
}

Json gamma_to_json(const GammaSpec& g) {
  Json j = Json::object();
  if (g.is_extension()) {
    j["kind"] = "domain_extension";
  } else {
    j["kind"] = "output_modification";
    j["fallback"] = expr_to_json(std::get<GammaSpec::OutputModification>(g.kind).fallback);
  }
  put_projection(j, g.projection);
  if (g.sampling) j["sampling"] = sampling_to_json(*g.sampling);
  return j;
}

GammaSpec gamma_from_json(const Json& j, const std::filesystem::path& base_dir) {
  const auto kind = get_as<std::string>(j, "kind");
  const Projection p = j.contains("projection") ? projection_from_json(j) : Projection::threshold(0.5);
  std::optional<SamplingSpec> s;
  if (j.contains("sampling")) s = sampling_from_json(j.at("sampling"));
  if (kind == "domain_extension") return GammaSpec::domain_extension(p, s);
  if (kind == "output_modification") {
    return GammaSpec::output_modification(expr_from_json(field(j, "fallback"), base_dir), p, s);
  }
  throw FormatError("unknown gamma kind \"" + kind + "\"");
}

Json table_to_json(const TruthTable& t) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    std::string in, out;
    for (auto b : t.input_vector(r)) in += static_cast<char>('0' + b);
    for (auto b : t.row(r)) out += static_cast<char>('0' + b);
    rows.push_back(Json::array({in, out}));
  }
  return Json{{"n_inputs", t.n_inputs()}, {"n_outputs", t.n_outputs()}, {"rows", rows}};
}

TruthTable table_from_json(const Json& j) {
  TruthTable t(get_as<std::size_t>(j, "n_inputs"), get_as<std::size_t>(j, "n_outputs"));
  const auto& rows = field(j, "rows");
  if (rows.size() != t.n_rows()) throw FormatError("truth table: wrong number of rows");
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != 2) throw FormatError("truth table: rows are [inputs, outputs] pairs");
    const auto in = row[0].get<std::string>();
    const auto out = row[1].get<std::string>();
    BoolVector iv;
    for (char c : in) iv.push_back(c == '1' ? 1 : 0);
    if (in.size() != t.n_inputs() || t.row_index(iv) != r) throw FormatError("truth table: rows out of order");
    if (out.size() != t.n_outputs()) throw FormatError("truth table: output width mismatch");
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (out[k] != '0' && out[k] != '1') throw FormatError("truth table: bits must be 0 or 1");
      t.set(r, k, out[k] == '1');
    }
  }
  return t;
}

Json dnf_to_json(const DnfFormula& f) {
  Json outputs = Json::array();
  for (std::size_t k = 0; k < f.n_outputs(); ++k) {
    Json terms = Json::array();
    for (const auto& t : f.terms(k)) {
      Json lits = Json::array();
      for (const auto& l : t) lits.push_back({{"var", l.var}, {"negated", l.negated}});
      terms.push_back(lits);
    }
    outputs.push_back({{"formula", f.render(k)}, {"ascii", f.render(k, Notation::Ascii)}, {"terms", terms}});
  }
  return Json{{"n_inputs", f.n_inputs()}, {"names", f.names()}, {"outputs", outputs}};
}

Json report_to_json(const CoherenceReport& r) {
  Json comps = Json::array();
  for (const auto& c : r.per_component) {
    Json ws = Json::array();
    for (const auto& w : c.witnesses) {
      ws.push_back({{"sample_index", w.sample_index},
                    {"x", w.x},
                    {"value", w.value},
                    {"projected", w.projected},
                    {"projected_at_fixed_point", w.projected_at_fixed}});
    }
    comps.push_back({{"coherent_fraction", c.fraction()},
                     {"coherent", c.coherent},
                     {"total", c.total},
                     {"witnesses", ws}});
  }
  Json j{{"verdict", r.fully_coherent() ? "coherent_on_sample" : "incoherent_with_witnesses"},
         {"sampling", sampling_to_json(r.sampling)},
         {"per_component", comps}};
  put_projection(j, r.projection);
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

Expr load_expr(const std::filesystem::path& path) {
  return expr_from_json(read_json_file(path), path.parent_path());
}

MlpModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const StructuralError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace cohexp

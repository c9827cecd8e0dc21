#include "lhc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lhc/error.hpp"
#include "lhc/io.hpp"

namespace lhc {

using nlohmann::json;

namespace {

// Source text and name used to attach line numbers to field paths.
struct Context {
  std::string source;
  std::string text;

  int line_of_offset(std::size_t offset) const {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
  }

  // Best-effort: follows the keys of a dotted path through the text.
  int line_of_path(const std::string& path) const {
    std::size_t pos = 0;
    bool found_any = false;
    std::string key;
    auto consume = [&](const std::string& k) {
      if (k.empty()) return;
      const auto at = text.find('"' + k + '"', pos);
      if (at != std::string::npos) {
        pos = at;
        found_any = true;
      }
    };
    for (char c : path) {
      if (c == '.' || c == '[') {
        consume(key);
        key.clear();
        if (c == '[') key = "\x01";
      } else if (c == ']') {
        key.clear();
      } else if (key != "\x01") {
        key += c;
      }
    }
    if (key != "\x01") consume(key);
    return found_any ? line_of_offset(pos) : 1;
  }

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    const std::string where = path.empty() ? "" : path + ": ";
    throw ScenarioError(path, source + ":" + std::to_string(line_of_path(path)) + ": " + where + message);
  }
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const Context& ctx, const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) ctx.fail(path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) ctx.fail(join(path, k), "unknown field");
}

const json* field(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& required(const Context& ctx, const json& j, const std::string& path, const char* key) {
  const json* v = field(j, key);
  if (v == nullptr) ctx.fail(join(path, key), "required field missing");
  return *v;
}

double as_real(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_number()) ctx.fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) ctx.fail(path, "expected a finite number");
  return x;
}

std::int64_t as_integer(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_number_integer()) ctx.fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_unsigned(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    ctx.fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_string()) ctx.fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_vector(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_array()) ctx.fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(ctx, v[i], index(path, i)));
  return out;
}

Matrix as_matrix(const Context& ctx, const json& v, const std::string& path) {
  if (!v.is_array()) ctx.fail(path, "expected an array of rows");
  Matrix out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_vector(ctx, v[i], index(path, i)));
  return out;
}

// A number or an array of numbers.
std::vector<double> as_schedule(const Context& ctx, const json& v, const std::string& path) {
  if (v.is_number()) return {as_real(ctx, v, path)};
  return as_vector(ctx, v, path);
}

double real_or(const Context& ctx, const json& j, const std::string& path, const char* key, double fallback) {
  const json* v = field(j, key);
  return v ? as_real(ctx, *v, join(path, key)) : fallback;
}

ModelSpec parse_model(const Context& ctx, const json& j, const std::string& path) {
  require_object(ctx, j, path, {"dim", "a", "Q", "atoms"});
  ModelSpec m;
  const auto dim = as_integer(ctx, required(ctx, j, path, "dim"), join(path, "dim"));
  if (dim < 1 || dim > 64) ctx.fail(join(path, "dim"), "dimension must be between 1 and 64");
  m.dim = static_cast<int>(dim);
  m.a = field(j, "a") ? as_vector(ctx, j["a"], join(path, "a")) : std::vector<double>(m.dim, 0.0);
  if (static_cast<int>(m.a.size()) != m.dim) ctx.fail(join(path, "a"), "drift length must equal dim");
  m.Q.assign(m.dim, std::vector<double>(m.dim, 0.0));
  if (const json* q = field(j, "Q")) {
    const std::string qp = join(path, "Q");
    if (q->is_object()) {
      require_object(ctx, *q, qp, {"diag"});
      const auto diag = as_vector(ctx, required(ctx, *q, qp, "diag"), join(qp, "diag"));
      if (static_cast<int>(diag.size()) != m.dim) ctx.fail(join(qp, "diag"), "diagonal length must equal dim");
      for (int k = 0; k < m.dim; ++k) m.Q[k][k] = diag[k];
    } else {
      m.Q = as_matrix(ctx, *q, qp);
      if (static_cast<int>(m.Q.size()) != m.dim) ctx.fail(qp, "covariance must be dim x dim");
      for (std::size_t r = 0; r < m.Q.size(); ++r)
        if (static_cast<int>(m.Q[r].size()) != m.dim) ctx.fail(index(qp, r), "covariance must be dim x dim");
    }
  }
  if (const json* atoms = field(j, "atoms")) {
    const std::string ap = join(path, "atoms");
    if (!atoms->is_array()) ctx.fail(ap, "expected an array of [[y...], rho] pairs");
    for (std::size_t k = 0; k < atoms->size(); ++k) {
      const json& a = (*atoms)[k];
      const std::string p = index(ap, k);
      if (!a.is_array() || a.size() != 2) ctx.fail(p, "atom must be [[y...], rho]");
      AtomSpec atom;
      atom.y = as_vector(ctx, a[0], index(p, 0));
      atom.rho = as_real(ctx, a[1], index(p, 1));
      if (static_cast<int>(atom.y.size()) != m.dim) ctx.fail(index(p, 0), "jump length must equal dim");
      if (!(atom.rho > 0.0)) ctx.fail(index(p, 1), "jump rate must be positive");
      m.atoms.push_back(std::move(atom));
    }
  }
  return m;
}

CurveSpec parse_curve(const Context& ctx, const json& j, const std::string& path, int nodes) {
  require_object(ctx, j, path, {"type", "rate", "beta0", "beta1", "beta2", "tau", "values"});
  CurveSpec c;
  c.type = as_string(ctx, required(ctx, j, path, "type"), join(path, "type"));
  if (c.type == "flat") {
    c.rate = as_real(ctx, required(ctx, j, path, "rate"), join(path, "rate"));
  } else if (c.type == "nelson_siegel") {
    c.beta0 = as_real(ctx, required(ctx, j, path, "beta0"), join(path, "beta0"));
    c.beta1 = real_or(ctx, j, path, "beta1", 0.0);
    c.beta2 = real_or(ctx, j, path, "beta2", 0.0);
    c.tau = real_or(ctx, j, path, "tau", 1.0);
    if (!(c.tau > 0.0)) ctx.fail(join(path, "tau"), "tau must be positive");
  } else if (c.type == "grid") {
    c.values = as_vector(ctx, required(ctx, j, path, "values"), join(path, "values"));
    if (static_cast<int>(c.values.size()) != nodes)
      ctx.fail(join(path, "values"), "grid curve needs one value per node (" + std::to_string(nodes) + ")");
  } else {
    ctx.fail(join(path, "type"), "curve type must be flat, nelson_siegel or grid");
  }
  return c;
}

VolSpec parse_vol(const Context& ctx, const json& j, const std::string& path, const std::vector<ModelSpec>& models) {
  require_object(ctx, j, path, {"model", "type", "sigma", "decay"});
  VolSpec v;
  const auto model = field(j, "model") ? as_integer(ctx, j["model"], join(path, "model")) : 0;
  if (model < 0 || model >= static_cast<std::int64_t>(models.size()))
    ctx.fail(join(path, "model"), "model index out of range");
  v.model = static_cast<int>(model);
  v.type = field(j, "type") ? as_string(ctx, j["type"], join(path, "type")) : "constant";
  if (v.type != "constant" && v.type != "exponential")
    ctx.fail(join(path, "type"), "volatility type must be constant or exponential");
  v.sigma = as_vector(ctx, required(ctx, j, path, "sigma"), join(path, "sigma"));
  if (static_cast<int>(v.sigma.size()) != models[v.model].dim)
    ctx.fail(join(path, "sigma"), "sigma length must equal the model dimension");
  v.decay = real_or(ctx, j, path, "decay", 0.0);
  if (v.type == "constant" && v.decay != 0.0) ctx.fail(join(path, "decay"), "constant volatility takes no decay");
  if (v.decay < 0.0) ctx.fail(join(path, "decay"), "decay must be non-negative");
  return v;
}

void check_square(const Context& ctx, const Matrix& m, int size, const std::string& path) {
  if (static_cast<int>(m.size()) != size)
    ctx.fail(path, "intensity matrix must be " + std::to_string(size) + " x " + std::to_string(size));
  for (std::size_t r = 0; r < m.size(); ++r)
    if (static_cast<int>(m[r].size()) != size)
      ctx.fail(index(path, r), "intensity matrix must be " + std::to_string(size) + " x " + std::to_string(size));
}

RatingsSpec parse_ratings(const Context& ctx, const json& j, const std::string& path, int nodes, bool multiple) {
  require_object(ctx, j, path, {"K", "Lambda", "deltas", "initial_state"});
  RatingsSpec r;
  const auto k = as_integer(ctx, required(ctx, j, path, "K"), join(path, "K"));
  if (k < 2) ctx.fail(join(path, "K"), "K must be at least 2");
  r.K = static_cast<int>(k);
  const int states = multiple ? r.K - 1 : r.K;

  const std::string lp = join(path, "Lambda");
  const json& lam = required(ctx, j, path, "Lambda");
  require_object(ctx, lam, lp, {"mode", "matrix", "breakpoints", "matrices"});
  r.lambda.mode = as_string(ctx, required(ctx, lam, lp, "mode"), join(lp, "mode"));
  if (r.lambda.mode == "constant" || r.lambda.mode == "h1") {
    r.lambda.matrix = as_matrix(ctx, required(ctx, lam, lp, "matrix"), join(lp, "matrix"));
    check_square(ctx, r.lambda.matrix, states, join(lp, "matrix"));
    if (r.lambda.mode == "h1" && multiple)
      ctx.fail(join(lp, "mode"), "h1 mode derives default intensities; multiple defaults has no default state");
  } else if (r.lambda.mode == "piecewise") {
    r.lambda.breakpoints = as_vector(ctx, required(ctx, lam, lp, "breakpoints"), join(lp, "breakpoints"));
    const json& mats = required(ctx, lam, lp, "matrices");
    if (!mats.is_array()) ctx.fail(join(lp, "matrices"), "expected an array of matrices");
    for (std::size_t m = 0; m < mats.size(); ++m) {
      r.lambda.matrices.push_back(as_matrix(ctx, mats[m], index(join(lp, "matrices"), m)));
      check_square(ctx, r.lambda.matrices.back(), states, index(join(lp, "matrices"), m));
    }
    if (r.lambda.breakpoints.empty() || r.lambda.breakpoints.size() != r.lambda.matrices.size())
      ctx.fail(join(lp, "breakpoints"), "one breakpoint per matrix is required");
    if (r.lambda.breakpoints.front() != 0.0) ctx.fail(join(lp, "breakpoints"), "first breakpoint must be 0");
  } else {
    ctx.fail(join(lp, "mode"), "Lambda mode must be constant, piecewise or h1");
  }

  if (const json* d = field(j, "deltas")) {
    const std::string dp = join(path, "deltas");
    if (!d->is_array()) ctx.fail(dp, "expected one recovery entry per rating");
    for (std::size_t i = 0; i < d->size(); ++i) {
      auto values = as_schedule(ctx, (*d)[i], index(dp, i));
      if (values.size() != 1 && static_cast<int>(values.size()) != nodes)
        ctx.fail(index(dp, i), "recovery must be a number or one value per node");
      for (double v : values)
        if (v < 0.0 || v > 1.0) ctx.fail(index(dp, i), "recovery must lie in [0, 1]");
      r.deltas.push_back(std::move(values));
    }
    if (static_cast<int>(r.deltas.size()) != r.K - 1) ctx.fail(dp, "one recovery entry per rating (K - 1) is required");
  } else if (!multiple) {
    ctx.fail(join(path, "deltas"), "required field missing");
  }

  const auto init = field(j, "initial_state") ? as_integer(ctx, j["initial_state"], join(path, "initial_state")) : 1;
  if (init < 1 || init > r.K - 1) ctx.fail(join(path, "initial_state"), "initial state must be a rating in 1..K-1");
  r.initial_state = static_cast<int>(init);
  return r;
}

McSpec parse_mc(const Context& ctx, const json& j, const std::string& path, const GridSpec& grid) {
  require_object(ctx, j, path,
                 {"n_paths", "seed", "checkpoints", "maturity", "z_threshold", "export_paths", "negative_control_bump"});
  McSpec m;
  m.seed = as_unsigned(ctx, required(ctx, j, path, "seed"), join(path, "seed"));
  if (const json* v = field(j, "n_paths")) m.n_paths = as_unsigned(ctx, *v, join(path, "n_paths"));
  if (m.n_paths < 1) ctx.fail(join(path, "n_paths"), "at least one path is required");
  if (const json* v = field(j, "checkpoints")) {
    const auto c = as_integer(ctx, *v, join(path, "checkpoints"));
    if (c < 1) ctx.fail(join(path, "checkpoints"), "at least one checkpoint is required");
    m.checkpoints = static_cast<int>(c);
  }
  if (const json* v = field(j, "maturity")) {
    const double t = as_real(ctx, *v, join(path, "maturity"));
    const double dt = grid.T_star / grid.n_steps;
    const double node = std::round(t / dt);
    if (!(t > 0.0) || t > grid.T_star * (1.0 + 1e-12) || std::abs(node * dt - t) > 1e-9 * grid.T_star)
      ctx.fail(join(path, "maturity"), "maturity must be a positive grid node not after T_star");
    m.maturity = t;
  }
  m.z_threshold = real_or(ctx, j, path, "z_threshold", 4.0);
  if (!(m.z_threshold > 0.0)) ctx.fail(join(path, "z_threshold"), "z threshold must be positive");
  if (const json* v = field(j, "export_paths")) m.export_paths = as_unsigned(ctx, *v, join(path, "export_paths"));
  m.negative_control_bump = real_or(ctx, j, path, "negative_control_bump", 0.01);
  return m;
}

}  // namespace

int Scenario::maturity_node() const {
  const double dt = grid.T_star / grid.n_steps;
  return static_cast<int>(std::lround(mc.maturity.value_or(grid.T_star) / dt));
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const Context ctx{source, text};
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", source + ":" + std::to_string(ctx.line_of_offset(e.byte > 0 ? e.byte - 1 : 0)) +
                                ": malformed JSON: " + e.what());
  }
  require_object(ctx, root, "", {"name", "grid", "models", "curves", "vols", "ratings", "scheme", "mc", "output"});

  Scenario s;
  if (const json* v = field(root, "name")) s.name = as_string(ctx, *v, "name");

  const json& grid = required(ctx, root, "", "grid");
  require_object(ctx, grid, "grid", {"T_star", "n_steps"});
  s.grid.T_star = as_real(ctx, required(ctx, grid, "grid", "T_star"), "grid.T_star");
  if (!(s.grid.T_star > 0.0)) ctx.fail("grid.T_star", "horizon must be positive");
  const auto steps = as_integer(ctx, required(ctx, grid, "grid", "n_steps"), "grid.n_steps");
  if (steps < 1 || steps > 5000) ctx.fail("grid.n_steps", "step count must be between 1 and 5000");
  s.grid.n_steps = static_cast<int>(steps);
  const int nodes = s.grid.n_steps + 1;

  const json& models = required(ctx, root, "", "models");
  if (!models.is_array() || models.empty()) ctx.fail("models", "expected a non-empty array of Lévy models");
  for (std::size_t k = 0; k < models.size(); ++k) s.models.push_back(parse_model(ctx, models[k], index("models", k)));

  if (const json* sch = field(root, "scheme")) {
    require_object(ctx, *sch, "scheme", {"type", "loss", "gamma"});
    s.scheme.type = as_string(ctx, required(ctx, *sch, "scheme", "type"), "scheme.type");
    if (!recovery_kind_from_string(s.scheme.type))
      ctx.fail("scheme.type", "scheme must be market_value, treasury, par or multiple_defaults");
    if (const json* l = field(*sch, "loss")) {
      s.scheme.loss = as_schedule(ctx, *l, "scheme.loss");
      if (s.scheme.loss.size() != 1 && static_cast<int>(s.scheme.loss.size()) != nodes)
        ctx.fail("scheme.loss", "loss must be a number or one value per node");
      for (double v : s.scheme.loss)
        if (v < 0.0 || v > 1.0) ctx.fail("scheme.loss", "loss must lie in [0, 1]");
    }
    if (const json* g = field(*sch, "gamma")) {
      s.scheme.gamma = as_real(ctx, *g, "scheme.gamma");
      if (*s.scheme.gamma < 0.0) ctx.fail("scheme.gamma", "Cox intensity must be non-negative");
    }
  }
  const bool multiple = s.scheme.type == "multiple_defaults";
  if (multiple && s.scheme.loss.empty()) ctx.fail("scheme.loss", "required field missing");

  const json& curves = required(ctx, root, "", "curves");
  require_object(ctx, curves, "curves", {"f0", "g0"});
  s.f0 = parse_curve(ctx, required(ctx, curves, "curves", "f0"), "curves.f0", nodes);
  if (const json* g0 = field(curves, "g0")) {
    if (!g0->is_array()) ctx.fail("curves.g0", "expected an array of curves");
    for (std::size_t i = 0; i < g0->size(); ++i) s.g0.push_back(parse_curve(ctx, (*g0)[i], index("curves.g0", i), nodes));
  }

  const json& vols = required(ctx, root, "", "vols");
  require_object(ctx, vols, "vols", {"f", "g"});
  s.vol_f = parse_vol(ctx, required(ctx, vols, "vols", "f"), "vols.f", s.models);
  if (const json* g = field(vols, "g")) {
    if (!g->is_array()) ctx.fail("vols.g", "expected an array of volatility specs");
    for (std::size_t i = 0; i < g->size(); ++i) s.vol_g.push_back(parse_vol(ctx, (*g)[i], index("vols.g", i), s.models));
  }

  if (const json* r = field(root, "ratings")) {
    s.ratings = parse_ratings(ctx, *r, "ratings", nodes, multiple);
    const int ratings = s.ratings->K - 1;
    if (static_cast<int>(s.g0.size()) != ratings) ctx.fail("curves.g0", "one pre-default curve per rating (K - 1) is required");
    if (static_cast<int>(s.vol_g.size()) != ratings) ctx.fail("vols.g", "one volatility per rating (K - 1) is required");
    if (!field(root, "scheme")) ctx.fail("scheme", "required field missing");
  } else {
    if (!s.g0.empty()) ctx.fail("curves.g0", "pre-default curves need a ratings block");
    if (!s.vol_g.empty()) ctx.fail("vols.g", "pre-default volatilities need a ratings block");
  }

  s.mc = parse_mc(ctx, required(ctx, root, "", "mc"), "mc", s.grid);

  if (const json* out = field(root, "output")) {
    require_object(ctx, *out, "output", {"directory", "format"});
    if (const json* d = field(*out, "directory")) s.output.directory = as_string(ctx, *d, "output.directory");
    if (const json* f = field(*out, "format")) s.output.format = as_string(ctx, *f, "output.format");
    if (s.output.format != "csv" && s.output.format != "json") ctx.fail("output.format", "format must be csv or json");
  }

  // model-level invariants
  for (std::size_t k = 0; k < s.models.size(); ++k) {
    try {
      (void)build_levy_model(s.models[k]);
    } catch (const ModelError& e) {
      ctx.fail(index("models", k), e.what());
    }
  }
  if (s.ratings) {
    try {
      (void)build_generator(s);
    } catch (const ModelError& e) {
      ctx.fail("ratings.Lambda", e.what());
    }
    try {
      build_recovery(s).validate(s.ratings->K - 1, nodes);
    } catch (const ModelError& e) {
      ctx.fail("ratings.deltas", e.what());
    }
  }
  try {
    (void)build_market(s);
  } catch (const ModelError& e) {
    ctx.fail("", e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("", path + ": cannot open scenario file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path);
}

namespace {

json curve_json(const CurveSpec& c) {
  json j;
  j["type"] = c.type;
  if (c.type == "flat") j["rate"] = c.rate;
  if (c.type == "nelson_siegel") {
    j["beta0"] = c.beta0;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["tau"] = c.tau;
  }
  if (c.type == "grid") j["values"] = c.values;
  return j;
}

json vol_json(const VolSpec& v) {
  return json{{"model", v.model}, {"type", v.type}, {"sigma", v.sigma}, {"decay", v.decay}};
}

json schedule_json(const std::vector<double>& values) {
  if (values.size() == 1) return values.front();
  return values;
}

json to_json(const Scenario& s) {
  json root;
  root["name"] = s.name;
  root["grid"] = {{"T_star", s.grid.T_star}, {"n_steps", s.grid.n_steps}};
  json models = json::array();
  for (const auto& m : s.models) {
    json atoms = json::array();
    for (const auto& a : m.atoms) atoms.push_back(json::array({a.y, a.rho}));
    models.push_back({{"dim", m.dim}, {"a", m.a}, {"Q", m.Q}, {"atoms", atoms}});
  }
  root["models"] = models;
  json g0 = json::array();
  for (const auto& c : s.g0) g0.push_back(curve_json(c));
  root["curves"] = {{"f0", curve_json(s.f0)}, {"g0", g0}};
  json vg = json::array();
  for (const auto& v : s.vol_g) vg.push_back(vol_json(v));
  root["vols"] = {{"f", vol_json(s.vol_f)}, {"g", vg}};
  if (s.ratings) {
    json lam;
    lam["mode"] = s.ratings->lambda.mode;
    if (s.ratings->lambda.mode == "piecewise") {
      lam["breakpoints"] = s.ratings->lambda.breakpoints;
      lam["matrices"] = s.ratings->lambda.matrices;
    } else {
      lam["matrix"] = s.ratings->lambda.matrix;
    }
    json deltas = json::array();
    for (const auto& d : s.ratings->deltas) deltas.push_back(schedule_json(d));
    root["ratings"] = {{"K", s.ratings->K}, {"Lambda", lam}, {"initial_state", s.ratings->initial_state}};
    if (!deltas.empty()) root["ratings"]["deltas"] = deltas;
  }
  json scheme = {{"type", s.scheme.type}};
  if (!s.scheme.loss.empty()) scheme["loss"] = schedule_json(s.scheme.loss);
  if (s.scheme.gamma) scheme["gamma"] = *s.scheme.gamma;
  root["scheme"] = scheme;
  json mc = {{"n_paths", s.mc.n_paths},
             {"seed", s.mc.seed},
             {"checkpoints", s.mc.checkpoints},
             {"z_threshold", s.mc.z_threshold},
             {"export_paths", s.mc.export_paths},
             {"negative_control_bump", s.mc.negative_control_bump}};
  if (s.mc.maturity) mc["maturity"] = *s.mc.maturity;
  root["mc"] = mc;
  root["output"] = {{"directory", s.output.directory}, {"format", s.output.format}};
  return root;
}

}  // namespace

std::string canonical_json(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

std::string scenario_hash(const Scenario& scenario) {
  json j = to_json(scenario);
  j.erase("output");
  return hex64(fnv1a64(j.dump()));
}

std::vector<double> build_curve(const CurveSpec& spec, const TimeGrid& grid) {
  std::vector<double> out(grid.nodes());
  for (int k = 0; k < grid.nodes(); ++k) {
    const double theta = grid.time(k);
    if (spec.type == "flat") {
      out[k] = spec.rate;
    } else if (spec.type == "nelson_siegel") {
      const double x = theta / spec.tau;
      out[k] = spec.beta0 + spec.beta1 * std::exp(-x) + spec.beta2 * x * std::exp(-x);
    } else if (spec.type == "grid") {
      out[k] = spec.values.at(static_cast<std::size_t>(k));
    } else {
      throw ModelError("unknown curve type " + spec.type);
    }
  }
  return out;
}

LevyModel build_levy_model(const ModelSpec& spec) {
  Vec a = Eigen::Map<const Vec>(spec.a.data(), static_cast<Eigen::Index>(spec.a.size()));
  Mat q(spec.dim, spec.dim);
  for (int r = 0; r < spec.dim; ++r)
    for (int c = 0; c < spec.dim; ++c) q(r, c) = spec.Q.at(r).at(c);
  std::vector<JumpAtom> atoms;
  for (const auto& at : spec.atoms)
    atoms.push_back({Eigen::Map<const Vec>(at.y.data(), static_cast<Eigen::Index>(at.y.size())), at.rho});
  return LevyModel(std::move(a), std::move(q), std::move(atoms));
}

namespace {

Mat to_mat(const Matrix& m) {
  Mat out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m.size(); ++c) out(r, c) = m[r].at(c);
  return out;
}

RecoveryKind scheme_kind(const Scenario& s) {
  const auto kind = recovery_kind_from_string(s.scheme.type);
  if (!kind) throw ModelError("unknown recovery scheme " + s.scheme.type);
  return *kind;
}

RecoverySchedule schedule(const std::vector<double>& values, int nodes) {
  if (values.size() == 1) return RecoverySchedule::constant(values.front(), nodes);
  return RecoverySchedule(values);
}

}  // namespace

IntensityMatrixProcess build_generator(const Scenario& s) {
  if (!s.ratings) throw ModelError("scenario has no ratings block");
  const bool absorbing = has_default_state(scheme_kind(s));
  const auto& lam = s.ratings->lambda;
  if (lam.mode == "piecewise") {
    std::vector<Mat> mats;
    for (const auto& m : lam.matrices) mats.push_back(to_mat(m));
    return IntensityMatrixProcess::piecewise(lam.breakpoints, std::move(mats), absorbing);
  }
  Mat m = to_mat(lam.matrix);
  if (lam.mode == "h1") m.col(m.cols() - 1).head(m.rows() - 1).setZero();
  return IntensityMatrixProcess::constant(m, absorbing);
}

RecoveryScheme build_recovery(const Scenario& s) {
  RecoveryScheme scheme;
  scheme.kind = scheme_kind(s);
  const int nodes = s.grid.n_steps + 1;
  const int ratings = s.ratings ? s.ratings->K - 1 : 0;
  if (s.ratings && !s.ratings->deltas.empty()) {
    for (const auto& d : s.ratings->deltas) scheme.deltas.push_back(schedule(d, nodes));
  } else {
    for (int i = 0; i < ratings; ++i) scheme.deltas.push_back(RecoverySchedule::constant(0.0, nodes));
  }
  if (!s.scheme.loss.empty()) scheme.loss = schedule(s.scheme.loss, nodes);
  scheme.cox_intensity = s.scheme.gamma;
  return scheme;
}

MarketModel build_market(const Scenario& s, bool include_ratings) {
  MarketModel m;
  m.grid = TimeGrid(s.grid.T_star, s.grid.n_steps);
  for (const auto& spec : s.models) m.drivers.push_back(build_levy_model(spec));
  auto setup = [&](const CurveSpec& curve, const VolSpec& vol) {
    CurveSetup c;
    c.initial = build_curve(curve, m.grid);
    const Vec sigma = Eigen::Map<const Vec>(vol.sigma.data(), static_cast<Eigen::Index>(vol.sigma.size()));
    c.vol = VolatilitySurface::exponential(m.grid, sigma, vol.decay);
    c.driver = vol.model;
    return c;
  };
  m.riskfree = setup(s.f0, s.vol_f);
  m.scheme.kind = scheme_kind(s);
  if (s.ratings && include_ratings) {
    for (std::size_t i = 0; i < s.g0.size(); ++i) {
      m.ratings.push_back(setup(s.g0[i], s.vol_g[i]));
      m.ratings.back().vol.owner_rating = static_cast<int>(i);
    }
    m.generator = build_generator(s);
    m.lambda_mode = s.ratings->lambda.mode == "h1" ? LambdaMode::H1 : LambdaMode::Given;
    m.scheme = build_recovery(s);
    m.initial_state = s.ratings->initial_state - 1;
  }
  m.validate();
  return m;
}

}  // namespace lhc

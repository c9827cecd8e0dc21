#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "lhc/error.hpp"
#include "lhc/io.hpp"
#include "lhc/log.hpp"
#include "lhc/parallel.hpp"
#include "lhc/scenario.hpp"
#include "lhc/verification.hpp"

namespace lhc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kEquivalenceTolerance = 1e-12;

struct Options {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::string> out;
  std::optional<std::string> format;
  int threads = 0;
};

struct Session {
  Scenario scenario;
  std::string header;
  fs::path out;
  int threads = 0;
};

Session open_session(const Options& opt) {
  Session s;
  s.scenario = load_scenario(opt.scenario);
  if (opt.seed) s.scenario.mc.seed = *opt.seed;
  if (opt.paths) {
    if (*opt.paths < 1) throw ScenarioError("mc.n_paths", "--paths: at least one path is required");
    s.scenario.mc.n_paths = *opt.paths;
  }
  if (opt.out) s.scenario.output.directory = *opt.out;
  if (opt.format) s.scenario.output.format = *opt.format;
  s.header = artifact_header(scenario_hash(s.scenario), s.scenario.mc.seed);
  s.out = s.scenario.output.directory;
  s.threads = opt.threads;
  fs::create_directories(s.out);
  spdlog::info("scenario {} ({}), output in {}", s.scenario.name, s.header, s.out.string());
  return s;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  spdlog::info("wrote {}", path.string());
}

void write_json(const Session& s, const std::string& name, json body) {
  body["header"] = s.header;
  write_file(s.out / name, body.dump(2) + "\n");
}

std::string cell(const json& v) {
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Row-oriented artifact written as CSV or JSON.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<json> row) { rows_.push_back(std::move(row)); }

  void write(const Session& s, const std::string& stem) const {
    if (s.scenario.output.format == "json") {
      json body{{"columns", columns_}, {"rows", rows_}};
      write_json(s, stem + ".json", std::move(body));
      return;
    }
    std::ostringstream out;
    out << '#' << s.header << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell(row[c]);
      out << '\n';
    }
    write_file(s.out / (stem + ".csv"), out.str());
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<json>> rows_;
};

Table surface_table(const TimeGrid& grid, const std::function<double(int, int)>& value) {
  Table table({"t", "theta", "value"});
  for (int t = 0; t < grid.nodes(); ++t)
    for (int theta = t; theta < grid.nodes(); ++theta) table.add({grid.time(t), grid.time(theta), value(t, theta)});
  return table;
}

std::string scheme_name(const Scenario& s) { return s.has_ratings() ? s.scheme.type : "riskfree"; }

std::uint64_t exported_paths(const Scenario& s) {
  return std::max<std::uint64_t>(1, std::min(s.mc.export_paths, s.mc.n_paths));
}

json report_json(const MartingaleReport& r) {
  return json{{"checkpoints", r.checkpoints}, {"mean", r.mean},         {"std_err", r.std_err},
              {"z", r.z},                     {"initial", r.initial},   {"paths", r.paths},
              {"z_threshold", r.z_threshold}, {"max_abs_z", r.max_abs_z()}, {"degenerate", r.degenerate}};
}

MartingaleReport market_test(const MarketSimulator& sim, const Scenario& s, const std::vector<int>& nodes,
                             int threads) {
  const int m = s.maturity_node();
  if (s.has_ratings())
    return defaultable_martingale_test(sim, m, s.mc.n_paths, s.mc.seed, nodes, s.mc.z_threshold, threads);
  return riskfree_martingale_test(sim, m, s.mc.n_paths, s.mc.seed, nodes, s.mc.z_threshold, threads);
}

int cmd_simulate(const Session& s) {
  const MarketSimulator sim(build_market(s.scenario));
  const auto n = exported_paths(s.scenario);
  const auto paths = map_paths(n, s.threads, [&](std::uint64_t p) { return sim.simulate(s.scenario.mc.seed, p); });
  const TimeGrid& grid = sim.model().grid;

  Table chain({"path_id", "jump_time", "from_state", "to_state"});
  Table levy({"path_id", "driver", "jump_time", "atom"});
  Table cox({"path_id", "jump_time"});
  for (std::uint64_t p = 0; p < n; ++p) {
    const auto& path = paths[p];
    int from = path.chain.initial_state();
    for (std::size_t k = 0; k < path.chain.jump_times().size(); ++k) {
      const int to = path.chain.jump_states()[k];
      chain.add({p, path.chain.jump_times()[k], from + 1, to + 1});
      from = to;
    }
    for (std::size_t d = 0; d < path.levy_jumps.size(); ++d)
      for (const auto& e : path.levy_jumps[d]) levy.add({p, d, e.time, e.atom});
    for (double t : path.cox_jumps) cox.add({p, t});
  }
  if (s.scenario.has_ratings()) chain.write(s, "rating_paths");
  levy.write(s, "levy_jumps");
  if (sim.model().scheme.kind == RecoveryKind::MultipleDefaults && s.scenario.has_ratings()) cox.write(s, "cox_jumps");

  const auto& first = paths.front();
  surface_table(grid, [&](int t, int theta) { return first.riskfree.row(t)[theta]; }).write(s, "forward_f");
  for (std::size_t i = 0; i < first.ratings.size(); ++i)
    surface_table(grid, [&](int t, int theta) { return first.ratings[i].row(t)[theta]; })
        .write(s, "forward_g" + std::to_string(i + 1));
  if (s.scenario.has_ratings()) {
    Table generator({"t", "from_state", "to_state", "intensity"});
    for (int k = 0; k < grid.nodes(); ++k) {
      const Mat& lam = first.generator_nodes.at(static_cast<std::size_t>(k));
      for (int i = 0; i < lam.rows(); ++i)
        for (int j = 0; j < lam.cols(); ++j)
          if (i != j) generator.add({grid.time(k), i + 1, j + 1, lam(i, j)});
    }
    generator.write(s, "generator");
  }
  return kOk;
}

int cmd_drift(const Session& s) {
  const MarketSimulator sim(build_market(s.scenario));
  const TimeGrid& grid = sim.model().grid;
  const MarketPath path = sim.simulate(s.scenario.mc.seed, 0, {.keep_drifts = true});
  surface_table(grid, [&](int t, int theta) { return path.riskfree_drift.row(t)[theta]; }).write(s, "alpha_f");
  for (std::size_t i = 0; i < path.rating_drifts.size(); ++i)
    surface_table(grid, [&](int t, int theta) { return path.rating_drifts[i].row(t)[theta]; })
        .write(s, "alpha_g" + std::to_string(i + 1));

  const PathResidualReport res = path_residuals(sim, path);
  json curves = json::array();
  for (const auto& c : res.curves)
    curves.push_back({{"curve", c.rating < 0 ? std::string("f") : "g" + std::to_string(c.rating + 1)},
                      {"max", c.max},
                      {"mean", c.mean}});
  const bool pass = res.residual_max <= res.tolerance;
  write_json(s, "drift.json",
             {{"scenario", s.scenario.name},
              {"scheme", scheme_name(s.scenario)},
              {"curves", curves},
              {"residuals", {{"max", res.residual_max}, {"mean", res.residual_mean}, {"tolerance", res.tolerance}}},
              {"verdict", pass ? "pass" : "fail"}});
  return pass ? kOk : kFailed;
}

int cmd_price(const Session& s) {
  const MarketSimulator sim(build_market(s.scenario));
  const TimeGrid& grid = sim.model().grid;
  const int m = s.scenario.maturity_node();
  const auto n = exported_paths(s.scenario);
  const bool rated = s.scenario.has_ratings();

  const auto priced = map_paths(n, s.threads, [&](std::uint64_t p) {
    const MarketPath path = sim.simulate(s.scenario.mc.seed, p);
    if (rated) return price_market_path(sim, path, m);
    DefaultableBondPath out;
    out.maturity = m;
    for (int k = 0; k < grid.nodes(); ++k) {
      const double d = k <= m ? bond_price(path.riskfree, k, m) : bank_account(path.riskfree, k) / bank_account(path.riskfree, m);
      out.value.push_back(d);
      out.discounted.push_back(d / bank_account(path.riskfree, k));
      out.rating.push_back(0);
      out.loss_factor.push_back(1.0);
    }
    return out;
  });
  Table prices({"path_id", "t", "theta", "D", "D_discounted", "rating", "V"});
  for (std::uint64_t p = 0; p < n; ++p)
    for (int k = 0; k <= m; ++k) {
      const auto& d = priced[p];
      const json rating = rated ? json(d.rating[k] + 1) : json("");
      prices.add({p, grid.time(k), grid.time(m), d.value[k], d.discounted[k], rating, d.loss_factor[k]});
    }
  prices.write(s, "prices");

  std::vector<int> nodes;
  for (int k = 1; k <= m; ++k) nodes.push_back(k);
  const MartingaleReport summary = market_test(sim, s.scenario, nodes, s.threads);
  json body = report_json(summary);
  body["scenario"] = s.scenario.name;
  body["scheme"] = scheme_name(s.scenario);
  body["maturity"] = grid.time(m);
  write_json(s, "price_summary.json", std::move(body));
  return kOk;
}

int cmd_verify(const Session& s) {
  const Scenario& sc = s.scenario;
  const MarketModel model = build_market(sc);
  const MarketSimulator sim(model);
  const int m = sc.maturity_node();
  const auto nodes = martingale_checkpoints(m, sc.mc.checkpoints);

  spdlog::info("martingale test, {} paths", sc.mc.n_paths);
  const MartingaleReport main = market_test(sim, sc, nodes, s.threads);
  const MartingaleReport riskfree =
      riskfree_martingale_test(sim, m, sc.mc.n_paths, sc.mc.seed, nodes, sc.mc.z_threshold, s.threads);

  MarketModel bumped = model;
  bumped.riskfree_drift_bump = sc.mc.negative_control_bump;
  bumped.rating_drift_bump.assign(bumped.ratings.size(), sc.mc.negative_control_bump);
  spdlog::info("negative control, drift bump {}", sc.mc.negative_control_bump);
  const MartingaleReport control = market_test(MarketSimulator(std::move(bumped)), sc, nodes, s.threads);
  const bool detected = control.max_abs_z() > sc.mc.z_threshold;

  const PathResidualReport res = path_residuals(sim, sim.simulate(sc.mc.seed, 0, {.keep_drifts = true}));
  const bool residual_ok = res.residual_max <= res.tolerance;
  const bool gap_ok = res.equivalence_gap <= kEquivalenceTolerance;
  const bool pass = main.pass() && riskfree.pass() && detected && residual_ok && gap_ok;

  json body = report_json(main);
  body["scenario"] = sc.name;
  body["scheme"] = scheme_name(sc);
  body["rating"] = sc.has_ratings() ? sc.ratings->initial_state : 0;
  body["maturity"] = model.grid.time(m);
  body["verdict"] = pass ? "pass" : "fail";
  body["residuals"] = {{"max", res.residual_max}, {"mean", res.residual_mean}, {"tolerance", res.tolerance}};
  body["equivalence_gap"] = res.equivalence_gap;
  body["riskfree"] = {{"z", riskfree.z}, {"max_abs_z", riskfree.max_abs_z()}, {"pass", riskfree.pass()}};
  body["negative_control"] = {
      {"bump", sc.mc.negative_control_bump}, {"z", control.z}, {"max_abs_z", control.max_abs_z()}, {"detected", detected}};
  body["assumptions"] = {{"integrability", "finite atom Levy measures satisfy the integrability conditions"},
                         {"H2", "chain and Cox streams are independent of the Levy streams"},
                         {"H3", "holding times use independent uniforms"}};
  write_json(s, "verify.json", std::move(body));
  return pass ? kOk : kFailed;
}

void flatten(const json& v, const std::string& artifact, const std::string& field, Table& table) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items())
      if (k != "header") flatten(child, artifact, field.empty() ? k : field + "." + k, table);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].is_structured()) {
        flatten(v[i], artifact, field + "[" + std::to_string(i) + "]", table);
      } else {
        table.add({artifact, field, i, v[i]});
      }
    }
  } else {
    table.add({artifact, field, "", v});
  }
}

int cmd_report(const fs::path& dir) {
  Session s;
  s.out = dir;
  s.scenario.output.format = "csv";
  Table table({"artifact", "field", "index", "value"});
  int merged = 0;
  for (const char* name : {"drift.json", "price_summary.json", "verify.json"}) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    const json doc = json::parse(in);
    if (s.header.empty()) s.header = doc.value("header", std::string());
    flatten(doc, name, "", table);
    ++merged;
  }
  if (merged == 0) {
    std::cerr << "lhc report: no JSON artifacts found in " << dir.string() << '\n';
    return kInvalid;
  }
  table.write(s, "report");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  log::configure_from_env();
  CLI::App app{"Lévy HJM term-structure engine with rating migration", "lhc"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override mc.seed");
    sub->add_option("--paths", opt.paths, "Override mc.n_paths");
    sub->add_option("--threads", opt.threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", opt.out, "Override output.directory");
    sub->add_option("--format", opt.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* simulate = app.add_subcommand("simulate", "Simulate curves, rating paths and jumps");
  auto* drift = app.add_subcommand("drift", "Synthesize drift surfaces and report condition residuals");
  auto* price = app.add_subcommand("price", "Price the defaultable bond along simulated paths");
  auto* verify = app.add_subcommand("verify", "Martingale, residual and equivalence checks");
  for (auto* sub : {simulate, drift, price, verify}) add_common(sub);
  auto* report = app.add_subcommand("report", "Merge JSON outputs of a directory into report.csv");
  std::string report_dir = "out";
  report->add_option("--out", report_dir, "Directory holding the JSON outputs")->check(CLI::ExistingDirectory);

  std::vector<const char*> argv{"lhc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (report->parsed()) return cmd_report(report_dir);
    const Session session = open_session(opt);
    if (simulate->parsed()) return cmd_simulate(session);
    if (drift->parsed()) return cmd_drift(session);
    if (price->parsed()) return cmd_price(session);
    return cmd_verify(session);
  } catch (const ScenarioError& e) {
    std::cerr << "lhc: " << e.what() << '\n';
    return kInvalid;
  } catch (const H1InfeasibleError& e) {
    std::cerr << "lhc: scenario is H1-infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "lhc: " << e.what() << '\n';
    return kInvalid;
  }
}

}  // namespace lhc::cli

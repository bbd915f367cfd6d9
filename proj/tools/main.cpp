// Command-line surface for the group-linear shrinkage library: estimate a
// file of (x, v) pairs, run scenario simulations and risk curves, and run the
// batting-average validation pipeline. Exit codes: 0 success, 2 usage error,
// 3 data error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grouplin/batting.hpp"
#include "grouplin/estimators.hpp"
#include "grouplin/io.hpp"
#include "grouplin/simulation.hpp"

namespace {

using nlohmann::ordered_json;

struct OutputConfig {
  std::string path = "-";
  std::string format = "csv";
  int precision = 6;
  std::string args;  // echoed into every output
  std::uint64_t seed = 1;
};

void add_output_options(CLI::App* cmd, OutputConfig& out) {
  cmd->add_option("--out", out.path, "Output path ('-' for stdout)");
  cmd->add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--precision", out.precision, "Significant digits")
      ->check(CLI::Range(1, 17));
  cmd->add_option("--seed", out.seed, "Base seed; echoed into the output");
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw grouplin::data_error("cannot open output file '" + path + "'");
  }
  out << text;
}

ordered_json json_number(double value, int precision) {
  if (!std::isfinite(value)) return grouplin::format_number(value, precision);
  return ordered_json::parse(grouplin::format_number(value, precision));
}

std::pair<grouplin::BinningKind, double> parse_binning(const std::string& text) {
  if (text == "log") return {grouplin::BinningKind::equal_log, 1.0};
  if (text == "dynamic") return {grouplin::BinningKind::dynamic_sure, 1.0};
  if (text.rfind("width:", 0) == 0) {
    const std::string arg = text.substr(6);
    char* end = nullptr;
    const double value = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size() || !(value > 0.0)) {
      throw std::invalid_argument("bad binning '" + text +
                                  "' (expected width:<L> with L > 0)");
    }
    return {grouplin::BinningKind::equal_width, value};
  }
  throw std::invalid_argument("bad binning '" + text +
                              "' (expected log, width:<L> or dynamic)");
}

std::vector<grouplin::MethodSpec> parse_methods(const std::string& csv,
                                                grouplin::BinningKind binning,
                                                double lipschitz) {
  std::vector<grouplin::MethodSpec> specs;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    specs.push_back(grouplin::parse_method(token, binning, lipschitz));
  }
  if (specs.empty()) throw std::invalid_argument("no methods given");
  return specs;
}

std::vector<std::size_t> parse_n_grid(const std::string& text) {
  auto parse_count = [&](const std::string& field) {
    char* end = nullptr;
    const long value = std::strtol(field.c_str(), &end, 10);
    if (field.empty() || end != field.c_str() + field.size() || value < 1) {
      throw std::invalid_argument("bad n specification '" + text + "'");
    }
    return static_cast<std::size_t>(value);
  };
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) return {parse_count(text)};
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos) {
    throw std::invalid_argument("bad n range '" + text +
                                "' (expected start:stop:step)");
  }
  const std::size_t start = parse_count(text.substr(0, c1));
  const std::size_t stop = parse_count(text.substr(c1 + 1, c2 - c1 - 1));
  const std::size_t step = parse_count(text.substr(c2 + 1));
  if (stop < start) {
    throw std::invalid_argument("bad n range '" + text + "' (stop < start)");
  }
  std::vector<std::size_t> grid;
  for (std::size_t n = start; n <= stop; n += step) grid.push_back(n);
  return grid;
}

std::string csv_meta(const std::string& command, const OutputConfig& out) {
  std::ostringstream os;
  os << "# command: " << command << "\n";
  os << "# args: " << out.args << "\n";
  os << "# seed: " << out.seed << "\n";
  return os.str();
}

ordered_json json_meta(const std::string& command, const OutputConfig& out) {
  ordered_json meta;
  meta["command"] = command;
  meta["args"] = out.args;
  meta["seed"] = out.seed;
  return meta;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateConfig {
  std::string input = "-";
  std::string method = "gl";
  std::string binning = "log";
  std::string emit_partition;
  OutputConfig out;
};

int cmd_estimate(const EstimateConfig& cfg) {
  const auto [binning, lipschitz] = parse_binning(cfg.binning);
  const grouplin::MethodSpec spec =
      grouplin::parse_method(cfg.method, binning, lipschitz);

  grouplin::Dataset data;
  if (cfg.input == "-") {
    data = grouplin::read_xv_csv(std::cin, "<stdin>");
  } else {
    std::ifstream in(cfg.input);
    if (!in) throw grouplin::data_error("cannot open input file '" + cfg.input + "'");
    data = grouplin::read_xv_csv(in, cfg.input);
  }

  grouplin::EstimateResult est;
  if (spec.kind == grouplin::MethodSpec::Kind::group_linear) {
    grouplin::BinPartition partition;
    switch (spec.binning) {
      case grouplin::BinningKind::equal_log:
        partition = grouplin::bins_equal_log(data);
        break;
      case grouplin::BinningKind::equal_width:
        partition = grouplin::bins_equal_width(data, spec.lipschitz);
        break;
      case grouplin::BinningKind::dynamic_sure:
        partition = grouplin::bins_dynamic(data);
        break;
    }
    est = grouplin::group_linear(data, partition);
    est.method = spec.label();
    if (!cfg.emit_partition.empty()) {
      write_text(cfg.emit_partition,
                 grouplin::partition_json(partition).dump(2) + "\n");
    }
  } else {
    if (!cfg.emit_partition.empty()) {
      throw std::invalid_argument(
          "--emit-partition applies to group-linear methods only");
    }
    est = grouplin::apply_method(data, spec);
  }

  const int p = cfg.out.precision;
  if (cfg.out.format == "csv") {
    std::ostringstream os;
    os << csv_meta("estimate", cfg.out);
    os << "# method: " << est.method << "\n";
    if (!est.warning.empty()) os << "# warning: " << est.warning << "\n";
    os << "index,x,v,estimate,block,b_hat\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      const long block = est.block_of.empty() ? -1 : est.block_of[i];
      os << i << ',' << grouplin::format_number(data.x(i), p) << ','
         << grouplin::format_number(data.v(i), p) << ','
         << grouplin::format_number(est.estimates[i], p) << ',' << block << ','
         << grouplin::format_number(est.shrinkage[i], p) << "\n";
    }
    write_text(cfg.out.path, os.str());
  } else {
    ordered_json j;
    j["meta"] = json_meta("estimate", cfg.out);
    j["meta"]["method"] = est.method;
    if (!est.warning.empty()) j["meta"]["warning"] = est.warning;
    j["rows"] = ordered_json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
      ordered_json row;
      row["index"] = i;
      row["x"] = json_number(data.x(i), p);
      row["v"] = json_number(data.v(i), p);
      row["estimate"] = json_number(est.estimates[i], p);
      row["block"] = est.block_of.empty() ? -1 : est.block_of[i];
      row["b_hat"] = json_number(est.shrinkage[i], p);
      j["rows"].push_back(row);
    }
    write_text(cfg.out.path, j.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate / curve

struct SimulateConfig {
  std::string scenario = "a";
  std::string methods = "gl,sure-m,sure-sg";
  std::string binning = "log";
  std::string n_spec = "500";
  std::size_t reps = 2000;
  bool oracles = false;
  std::size_t mc_size = 1000000;
  OutputConfig out;
};

void write_risk_table(const std::string& command, const SimulateConfig& cfg,
                      const std::vector<grouplin::sim::RiskReport>& rows,
                      const std::vector<grouplin::sim::RiskReport>& oracle_rows,
                      const grouplin::NormalNormalParams* xkb_params) {
  const int p = cfg.out.precision;
  if (cfg.out.format == "csv") {
    std::ostringstream os;
    os << csv_meta(command, cfg.out);
    if (xkb_params != nullptr) {
      os << "# oracle-xkb params: mu=" << grouplin::format_number(xkb_params->mu, p)
         << " gamma=" << grouplin::format_number(xkb_params->gamma, p) << "\n";
    }
    os << "scenario,method,n,N,risk,mcse\n";
    auto emit = [&](const grouplin::sim::RiskReport& r) {
      os << cfg.scenario << ',' << r.method << ',' << r.n << ',' << r.replications
         << ',' << grouplin::format_number(r.risk, p) << ','
         << grouplin::format_number(r.mcse, p) << "\n";
    };
    for (const auto& r : rows) emit(r);
    for (const auto& r : oracle_rows) emit(r);
    write_text(cfg.out.path, os.str());
  } else {
    ordered_json j;
    j["meta"] = json_meta(command, cfg.out);
    if (xkb_params != nullptr) {
      j["meta"]["oracle_xkb_params"] = {
          {"mu", json_number(xkb_params->mu, p)},
          {"gamma", json_number(xkb_params->gamma, p)}};
    }
    j["rows"] = ordered_json::array();
    auto emit = [&](const grouplin::sim::RiskReport& r) {
      ordered_json row;
      row["scenario"] = cfg.scenario;
      row["method"] = r.method;
      row["n"] = r.n;
      row["N"] = r.replications;
      row["risk"] = json_number(r.risk, p);
      row["mcse"] = json_number(r.mcse, p);
      j["rows"].push_back(row);
    };
    for (const auto& r : rows) emit(r);
    for (const auto& r : oracle_rows) emit(r);
    write_text(cfg.out.path, j.dump(2) + "\n");
  }
}

int cmd_simulate(const std::string& command, const SimulateConfig& cfg) {
  const auto label = grouplin::sim::parse_scenario(cfg.scenario);
  const auto sc = grouplin::sim::scenario(label);
  const auto [binning, lipschitz] = parse_binning(cfg.binning);
  const auto methods = parse_methods(cfg.methods, binning, lipschitz);
  const auto grid = parse_n_grid(cfg.n_spec);

  const auto rows = grouplin::sim::risk_curve(sc, methods, grid, cfg.reps,
                                              cfg.out.seed);

  std::vector<grouplin::sim::RiskReport> oracle_rows;
  grouplin::NormalNormalParams params;
  const grouplin::NormalNormalParams* params_ptr = nullptr;
  if (cfg.oracles) {
    // Oracle rows carry n = 0: they are n-free reference levels.
    oracle_rows.push_back({"oracle-linear", 0, 0,
                           grouplin::sim::oracle_linear(sc, cfg.mc_size), 0.0});
    const auto xkb = grouplin::sim::oracle_xkb(
        sc, cfg.mc_size, grouplin::derive_seed(cfg.out.seed, 0xacce5));
    oracle_rows.push_back({"oracle-xkb", 0, cfg.mc_size, xkb.first, 0.0});
    params = xkb.second;
    params_ptr = &params;
  }
  write_risk_table(command, cfg, rows, oracle_rows, params_ptr);
  return 0;
}

// ---------------------------------------------------------------------------
// baseball

struct BaseballConfig {
  std::string input;
  std::string methods = "naive,grand-mean,js,sure-m,sure-sg,gl,gl-dynamic";
  std::string binning = "log";
  std::string subset = "each";
  std::size_t shuffles = 1000;
  OutputConfig out;
};

int cmd_baseball(const BaseballConfig& cfg) {
  namespace bb = grouplin::batting;
  const auto [binning, lipschitz] = parse_binning(cfg.binning);
  const auto methods = parse_methods(cfg.methods, binning, lipschitz);

  std::vector<bb::Subset> subsets;
  if (cfg.subset == "each") {
    subsets = {bb::Subset::all, bb::Subset::pitchers, bb::Subset::non_pitchers};
  } else if (cfg.subset == "all") {
    subsets = {bb::Subset::all};
  } else if (cfg.subset == "pitchers") {
    subsets = {bb::Subset::pitchers};
  } else if (cfg.subset == "non-pitchers") {
    subsets = {bb::Subset::non_pitchers};
  } else {
    throw std::invalid_argument("bad subset '" + cfg.subset + "'");
  }

  std::vector<bb::BattingRecord> records;
  if (cfg.input == "-") {
    records = bb::read_batting_csv(std::cin, "<stdin>");
  } else {
    std::ifstream in(cfg.input);
    if (!in) throw grouplin::data_error("cannot open input file '" + cfg.input + "'");
    records = bb::read_batting_csv(in, cfg.input);
  }

  const auto report =
      bb::run_table(records, methods, subsets, cfg.shuffles, cfg.out.seed);

  const int p = cfg.out.precision;
  const bool shuffled = report.shuffle_rounds > 0;
  if (cfg.out.format == "csv") {
    std::ostringstream os;
    os << csv_meta("baseball", cfg.out);
    os << "# shuffles: " << report.shuffle_rounds << "\n";
    os << (shuffled ? "method,subset,tse_ratio,shuffled_mean,shuffled_se\n"
                    : "method,subset,tse_ratio\n");
    for (const auto& row : report.rows) {
      for (std::size_t s = 0; s < report.subsets.size(); ++s) {
        os << row.method << ',' << bb::subset_name(report.subsets[s]) << ','
           << grouplin::format_number(row.cells[s].original, p);
        if (shuffled) {
          os << ',' << grouplin::format_number(row.cells[s].shuffled_mean, p)
             << ',' << grouplin::format_number(row.cells[s].shuffled_se, p);
        }
        os << "\n";
      }
    }
    write_text(cfg.out.path, os.str());
  } else {
    ordered_json j;
    j["meta"] = json_meta("baseball", cfg.out);
    j["meta"]["shuffles"] = report.shuffle_rounds;
    j["rows"] = ordered_json::array();
    for (const auto& row : report.rows) {
      for (std::size_t s = 0; s < report.subsets.size(); ++s) {
        ordered_json cell;
        cell["method"] = row.method;
        cell["subset"] = bb::subset_name(report.subsets[s]);
        cell["tse_ratio"] = json_number(row.cells[s].original, p);
        if (shuffled) {
          cell["shuffled_mean"] = json_number(row.cells[s].shuffled_mean, p);
          cell["shuffled_se"] = json_number(row.cells[s].shuffled_se, p);
        }
        j["rows"].push_back(cell);
      }
    }
    write_text(cfg.out.path, j.dump(2) + "\n");
  }
  return 0;
}

std::string join_args(int argc, char** argv) {
  std::string joined;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) joined += ' ';
    joined += argv[i];
  }
  return joined;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-linear shrinkage estimation for heteroscedastic normal means"};
  app.require_subcommand(1);

  EstimateConfig est_cfg;
  auto* est = app.add_subcommand(
      "estimate", "Estimate means for a CSV of x,v observations");
  est->add_option("--in", est_cfg.input, "Input CSV with header x,v ('-' for stdin)");
  est->add_option("--method", est_cfg.method, "Estimator");
  est->add_option("--binning", est_cfg.binning, "Binning for group-linear: log, width:<L>, dynamic");
  est->add_option("--emit-partition", est_cfg.emit_partition, "Write the variance partition as JSON");
  add_output_options(est, est_cfg.out);

  SimulateConfig sim_cfg;
  auto* simc = app.add_subcommand("simulate", "Monte Carlo risk at a single n");
  simc->add_option("--scenario", sim_cfg.scenario, "Scenario label a-f")->required();
  simc->add_option("--methods,--method", sim_cfg.methods, "Comma-separated estimators");
  simc->add_option("--binning", sim_cfg.binning, "Default binning for bare 'gl'");
  simc->add_option("--n", sim_cfg.n_spec, "Sample size (or start:stop:step)");
  simc->add_option("--reps", sim_cfg.reps, "Replications");
  simc->add_flag("--oracles", sim_cfg.oracles, "Append oracle reference rows");
  simc->add_option("--mc-size", sim_cfg.mc_size, "Draws for oracle computation");
  add_output_options(simc, sim_cfg.out);

  SimulateConfig curve_cfg;
  curve_cfg.n_spec = "20:500:20";
  auto* curve = app.add_subcommand("curve", "Risk curve over a grid of n");
  curve->add_option("--scenario", curve_cfg.scenario, "Scenario label a-f")->required();
  curve->add_option("--methods,--method", curve_cfg.methods, "Comma-separated estimators");
  curve->add_option("--binning", curve_cfg.binning, "Default binning for bare 'gl'");
  curve->add_option("--n", curve_cfg.n_spec, "Grid start:stop:step");
  curve->add_option("--reps", curve_cfg.reps, "Replications per grid point");
  curve->add_flag("--oracles", curve_cfg.oracles, "Append oracle reference rows");
  curve->add_option("--mc-size", curve_cfg.mc_size, "Draws for oracle computation");
  add_output_options(curve, curve_cfg.out);

  BaseballConfig bb_cfg;
  auto* bb = app.add_subcommand("baseball", "Batting-average validation pipeline");
  bb->add_option("--in", bb_cfg.input, "Input CSV with header id,h1,n1,h2,n2,pitcher")->required();
  bb->add_option("--methods,--method", bb_cfg.methods, "Comma-separated estimators");
  bb->add_option("--binning", bb_cfg.binning, "Default binning for bare 'gl'");
  bb->add_option("--subset", bb_cfg.subset, "each, all, pitchers or non-pitchers");
  bb->add_option("--shuffles", bb_cfg.shuffles, "Hypergeometric shuffle rounds");
  add_output_options(bb, bb_cfg.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string args = join_args(argc, argv);
  est_cfg.out.args = args;
  sim_cfg.out.args = args;
  curve_cfg.out.args = args;
  bb_cfg.out.args = args;

  try {
    if (est->parsed()) return cmd_estimate(est_cfg);
    if (simc->parsed()) return cmd_simulate("simulate", sim_cfg);
    if (curve->parsed()) return cmd_simulate("curve", curve_cfg);
    if (bb->parsed()) return cmd_baseball(bb_cfg);
  } catch (const grouplin::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

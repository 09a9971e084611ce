// bilateral: command-line front end over the bilateral library.
//
// Exit codes: 0 ok, 2 bad input (spec, flags, infeasible parameters),
// 3 numerical failure, 1 anything else.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bilateral/distributions.hpp"
#include "bilateral/errors.hpp"
#include "bilateral/game.hpp"
#include "bilateral/measures.hpp"
#include "bilateral/mechanisms.hpp"
#include "bilateral/spec_io.hpp"
#include "bilateral/worstcase.hpp"

namespace {

using bilateral::DistPtr;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 42;
  double tol = bilateral::QuadratureConfig{}.abs_tol;
  double rel_tol = bilateral::QuadratureConfig{}.rel_tol;
  int max_subdivisions = bilateral::QuadratureConfig{}.max_subdivisions;
  std::string format = "table";
  std::string out;

  bilateral::QuadratureConfig qcfg() const {
    bilateral::QuadratureConfig c;
    c.abs_tol = tol;
    c.rel_tol = rel_tol;
    c.max_subdivisions = max_subdivisions;
    c.check();
    return c;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Inline JSON if the argument starts with '{', else a file path.
std::string load_spec(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return arg;
  std::ifstream in(arg);
  if (!in) throw InputError("cannot read spec file " + arg);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DistPtr load_dist(const std::string& arg, const std::string& what) {
  try {
    return bilateral::parse_distribution(load_spec(arg));
  } catch (const bilateral::SpecError& e) {
    throw InputError(what + ": " + e.what());
  }
}

// A result rendered as rows (for csv/table) and as a JSON value.
struct Output {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  json doc;
  std::vector<std::string> trailer;  // table format only
};

std::string render(const Output& o, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    os << o.doc.dump(2) << "\n";
  } else if (format == "csv") {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << "\n";
    };
    line(o.header);
    for (const auto& r : o.rows) line(r);
  } else {
    std::vector<std::size_t> width(o.header.size(), 0);
    for (std::size_t i = 0; i < o.header.size(); ++i) width[i] = o.header[i].size();
    for (const auto& r : o.rows) {
      for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        os << (i ? "  " : "") << cells[i];
        if (i + 1 < cells.size()) os << std::string(width[i] - cells[i].size(), ' ');
      }
      os << "\n";
    };
    line(o.header);
    for (const auto& r : o.rows) line(r);
    for (const auto& t : o.trailer) os << t << "\n";
  }
  return os.str();
}

Output report_output(const bilateral::MeasureReport& r, const std::string& mech) {
  Output o;
  o.doc = bilateral::to_json(r);
  o.doc["mechanism"] = mech;
  o.header = bilateral::report_csv_header();
  o.rows.push_back(bilateral::report_csv_row(r));
  return o;
}

// Key/value layout for a single report in table format.
Output transpose(const Output& o) {
  Output t;
  t.doc = o.doc;
  t.header = {"field", "value"};
  for (std::size_t i = 0; i < o.header.size(); ++i) t.rows.push_back({o.header[i], o.rows[0][i]});
  return t;
}

// ---- evaluate

struct EvaluateArgs {
  std::string dist;
  std::string seller;
  std::string buyer;
  std::string mech;
  std::size_t mc = 0;
};

Output cmd_evaluate(const EvaluateArgs& a, const Global& g) {
  const bool symmetric = !a.dist.empty();
  if (symmetric == (!a.seller.empty() || !a.buyer.empty())) {
    throw InputError("give either --dist, or both --seller and --buyer");
  }
  if (!symmetric && (a.seller.empty() || a.buyer.empty())) {
    throw InputError("--seller and --buyer must be given together");
  }
  bilateral::Mechanism m;
  try {
    m = bilateral::parse_mechanism(load_spec(a.mech));
  } catch (const bilateral::SpecError& e) {
    throw InputError(std::string("--mech: ") + e.what());
  }
  const auto cfg = g.qcfg();
  const DistPtr S = symmetric ? load_dist(a.dist, "--dist") : load_dist(a.seller, "--seller");
  const DistPtr B = symmetric ? S : load_dist(a.buyer, "--buyer");

  bilateral::MeasureReport r;
  if (a.mc > 0) {
    r = bilateral::mc_oracle(*S, *B, bilateral::price_rule(m, *S, *B, cfg), a.mc, bilateral::Seed{g.seed});
  } else {
    r = symmetric ? bilateral::evaluate(m, *S, cfg) : bilateral::evaluate(m, *S, *B, cfg);
  }
  Output o = report_output(r, bilateral::mechanism_name(m));
  if (std::holds_alternative<bilateral::HybridAsym>(m) && a.mc == 0) {
    const auto h = bilateral::hybrid_asym_price(*S, *B, cfg);
    o.doc["hybrid"] = {{"branch", bilateral::to_string(h.branch)},
                       {"alpha", h.alpha},
                       {"fallback", h.fallback}};
    o.header.insert(o.header.end(), {"branch", "alpha", "fallback"});
    o.rows[0].insert(o.rows[0].end(), {bilateral::to_string(h.branch), num(h.alpha), h.fallback ? "1" : "0"});
  }
  return g.format == "table" ? transpose(o) : o;
}

// ---- sweep

struct SweepArgs {
  std::string dist;
  int points = 101;
  std::vector<double> prices;
  bool prices_given = false;
};

Output cmd_sweep(const SweepArgs& a, const Global& g) {
  const DistPtr F = load_dist(a.dist, "--dist");
  const auto cfg = g.qcfg();
  std::vector<double> grid = a.prices;
  if (!a.prices_given) {
    if (a.points < 0) throw InputError("--points must be >= 0");
    const double lo = F->support_lo();
    const double hi = F->integration_hi(cfg);
    for (int i = 0; i < a.points; ++i) {
      grid.push_back(a.points == 1 ? lo : lo + (hi - lo) * i / (a.points - 1));
    }
  }
  if (grid.empty()) throw InputError("empty price grid");
  for (double p : grid) {
    if (!std::isfinite(p) || p < 0.0) throw InputError("prices must be finite and >= 0");
  }
  for (const auto& at : F->atoms()) grid.push_back(at.x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const double ow = bilateral::opt_w(*F, cfg);
  Output o;
  o.header = {"p", "gft", "w", "ratio"};
  o.doc = json::array();
  for (double p : grid) {
    const double gft = bilateral::gft(p, *F, cfg);
    const double w = bilateral::welfare(p, *F, cfg);
    const double ratio = ow > 0.0 ? w / ow : 1.0;
    o.rows.push_back({num(p), num(gft), num(w), num(ratio)});
    o.doc.push_back({{"p", p}, {"gft", gft}, {"w", w}, {"ratio", ratio}});
  }
  return o;
}

// ---- table1

Output cmd_table1() {
  struct Cell {
    const char* variant;
    const char* objective;
    const char* shown;
    double value;
    bool optimal;
    const char* certified_by;
  };
  const double e = std::exp(1.0);
  const Cell cells[] = {
      {"symmetric, full knowledge", "welfare", "(2+sqrt2)/4", (2.0 + std::sqrt(2.0)) / 4.0, true, "minimax-constant"},
      {"symmetric, full knowledge", "gft", "1/2", 0.5, true, "external"},
      {"symmetric, 1 prior sample", "welfare", "3/4", 0.75, true, "welfare-three-quarters"},
      {"symmetric, 1 prior sample", "gft", "1/2", 0.5, true, "exact-half-law"},
      {"asymmetric, full knowledge", "welfare", "1-1/e+eps", 1.0 - 1.0 / e + bilateral::kHybridMargin, false,
       "hybrid-guarantee"},
      {"asymmetric, full knowledge", "gft", "0", 0.0, true, "external"},
      {"asymmetric, 1 prior sample", "welfare", "1/2", 0.5, false, "external"},
      {"asymmetric, 1 prior sample", "gft", "0", 0.0, true, "external"},
  };
  Output o;
  o.header = {"variant", "objective", "ratio", "value", "optimal", "certified_by"};
  o.doc = json::array();
  for (const Cell& c : cells) {
    o.rows.push_back({std::string("\"") + c.variant + "\"", c.objective, c.shown, num(c.value),
                      c.optimal ? "yes" : "no", c.certified_by});
    o.doc.push_back({{"variant", c.variant},
                     {"objective", c.objective},
                     {"ratio", c.shown},
                     {"value", c.value},
                     {"optimal", c.optimal},
                     {"certified_by", c.certified_by}});
  }
  return o;
}

// ---- minimax

struct MinimaxArgs {
  int resolution = 10000;
  std::string mode = "reduced";
};

Output cmd_minimax(const MinimaxArgs& a) {
  const auto mode = a.mode == "full" ? bilateral::ScanMode::Full3D : bilateral::ScanMode::Reduced1D;
  const auto r = bilateral::minimax_scan(a.resolution, mode);
  Output o;
  o.header = {"mode", "resolution", "best_value", "grid_value", "y", "mu", "mu1", "gamma"};
  o.rows.push_back({a.mode, std::to_string(r.grid_resolution), num(r.best_value), num(r.grid_value), num(r.y),
                    num(r.mu), num(r.mu1), num(r.gamma)});
  o.doc = {{"mode", a.mode},     {"resolution", r.grid_resolution},
           {"best_value", r.best_value}, {"grid_value", r.grid_value},
           {"y", r.y},           {"mu", r.mu},
           {"mu1", r.mu1},       {"gamma", r.gamma}};
  return o;
}

// ---- game

struct GameArgs {
  double epsilon = 1e-4;
  int x_grid = 1000;
  std::size_t mc_samples = 0;
  bool closed_form = false;
};

Output cmd_game(const GameArgs& a, const Global& g) {
  Output o;
  o.doc = json::object();
  json rows = json::array();
  if (a.closed_form) {
    if (a.x_grid < 1) throw InputError("--x-grid must be >= 1");
    std::vector<double> values;
    o.header = {"x", "closed_form"};
    for (int i = 0; i <= a.x_grid; ++i) {
      const double x = static_cast<double>(i) / a.x_grid;
      const double v = bilateral::expected_payoff(x);
      values.push_back(v);
      o.rows.push_back({num(x), num(v)});
      rows.push_back({{"x", x}, {"closed_form", v}});
    }
    const auto best = bilateral::argmax_lowest(values, 0.0);
    const double x = static_cast<double>(best.index) / a.x_grid;
    o.doc = {{"sup_value", best.value}, {"argmax_x", x}, {"rows", rows}};
    o.trailer = {"sup " + num(best.value) + " at x = " + num(x)};
    return o;
  }
  bilateral::GameConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.x_grid = a.x_grid;
  cfg.mc_samples = a.mc_samples;
  cfg.seed = bilateral::Seed{g.seed};
  const auto r = bilateral::simulate_game(cfg, g.qcfg());
  o.header = {"x", "closed_form", "simulated", "gap"};
  if (a.mc_samples > 0) o.header.insert(o.header.end(), {"mc", "mc_stderr"});
  for (const auto& row : r.rows) {
    std::vector<std::string> cells = {num(row.x), num(row.closed_form), num(row.simulated), num(row.gap)};
    json j = {{"x", row.x}, {"closed_form", row.closed_form}, {"simulated", row.simulated}, {"gap", row.gap}};
    if (a.mc_samples > 0) {
      cells.insert(cells.end(), {num(row.mc), num(row.mc_stderr)});
      j["mc"] = row.mc;
      j["mc_stderr"] = row.mc_stderr;
    }
    o.rows.push_back(std::move(cells));
    rows.push_back(std::move(j));
  }
  o.doc = {{"epsilon", a.epsilon}, {"sup_value", r.sup_value}, {"argmax_x", r.argmax_x}, {"rows", rows}};
  o.trailer = {"sup " + num(r.sup_value) + " at x = " + num(r.argmax_x)};
  return o;
}

// ---- validate

Output cmd_validate(const std::string& dist) {
  const DistPtr F = load_dist(dist, "--dist");
  Output o;
  o.header = {"status", "mean", "support_lo", "support_hi"};
  o.rows.push_back({"ok", num(F->mean()), num(F->support_lo()), num(F->support_hi())});
  o.doc = {{"status", "ok"}, {"spec", bilateral::to_json(*F)}, {"mean", F->mean()}};
  return o;
}

void emit(const std::string& text, const Global& g) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw InputError("cannot write " + g.out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-price bilateral trade: measures, mechanisms and worst cases"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Seed for Monte Carlo draws");
  app.add_option("--tol", g.tol, "Absolute quadrature tolerance")->check(CLI::PositiveNumber);
  app.add_option("--rel-tol", g.rel_tol, "Relative quadrature tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-subdivisions", g.max_subdivisions, "Quadrature subinterval budget");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
  app.add_option("--out", g.out, "Write output to this path instead of stdout");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Expected GFT and welfare of one mechanism");
  evaluate->add_option("--dist", ev.dist, "Common distribution (spec file or inline JSON)");
  evaluate->add_option("--seller", ev.seller, "Seller distribution");
  evaluate->add_option("--buyer", ev.buyer, "Buyer distribution");
  evaluate->add_option("--mech", ev.mech, "Mechanism spec")->required();
  evaluate->add_option("--mc", ev.mc, "Estimate by Monte Carlo with this many samples instead");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "GFT and welfare of every price on a grid");
  sweep->add_option("--dist", sw.dist, "Common distribution")->required();
  sweep->add_option("--points", sw.points, "Equispaced prices over the support");
  auto* prices_opt = sweep->add_option("--prices", sw.prices, "Explicit prices, comma separated")->delimiter(',');

  auto* table1 = app.add_subcommand("table1", "Approximation ratios for each setting");

  MinimaxArgs mm;
  auto* minimax = app.add_subcommand("minimax", "Grid search for the worst mean-price ratio");
  minimax->add_option("--resolution", mm.resolution, "Points per axis");
  minimax->add_option("--mode", mm.mode, "reduced (1-d) or full (3-d)")->check(CLI::IsMember({"reduced", "full"}));

  GameArgs ga;
  auto* game = app.add_subcommand("game", "Quantile-mechanism game against nature's mixed strategy");
  game->add_option("--epsilon", ga.epsilon, "Width of the low seller value range");
  game->add_option("--x-grid", ga.x_grid, "Number of quantile steps");
  game->add_option("--mc-samples", ga.mc_samples, "Monte Carlo draws per quantile (0 = off)");
  game->add_flag("--closed-form", ga.closed_form, "Only the exact expected payoff");

  std::string vdist;
  auto* validate = app.add_subcommand("validate", "Parse and check a distribution spec");
  validate->add_option("--dist", vdist, "Distribution spec")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    Output o;
    if (*evaluate) o = cmd_evaluate(ev, g);
    if (*sweep) {
      sw.prices_given = prices_opt->count() > 0;
      o = cmd_sweep(sw, g);
    }
    if (*table1) o = cmd_table1();
    if (*minimax) o = cmd_minimax(mm);
    if (*game) o = cmd_game(ga, g);
    if (*validate) o = cmd_validate(vdist);
    emit(render(o, g.format), g);
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const bilateral::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const bilateral::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "bilateral/game.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bilateral/errors.hpp"
#include "bilateral/measures.hpp"

namespace bilateral {

namespace {

const double kInvE = std::exp(-1.0);

void check_x(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw OutOfRange("x = " + std::to_string(x) + " is outside [0, 1]");
}

void check_y(double y) {
  if (!(y >= kInvE && y <= 1.0)) {
    throw OutOfRange("y = " + std::to_string(y) + " is outside [1/e, 1]");
  }
}

}  // namespace

double NatureStrategy::density(double y) const {
  if (y < kInvE || y > 1.0) return 0.0;
  return kInvE / (y * y);
}

double NatureStrategy::cdf(double y) const {
  if (y < kInvE) return 0.0;
  if (y >= 1.0) return 1.0;
  return 1.0 - kInvE / y;
}

double NatureStrategy::draw(double u) const {
  if (u < 1.0 - atom_prob) return kInvE / (1.0 - u);
  return 1.0;
}

double NatureStrategy::total_mass(const QuadratureConfig& cfg) const {
  return atom_prob + integrate([this](double y) { return density(y); }, kInvE, 1.0, cfg);
}

void GameConfig::check() const {
  if (!(epsilon > 0.0 && epsilon <= 0.01)) throw std::invalid_argument("epsilon must lie in (0, 0.01]");
  if (x_grid < 100) throw std::invalid_argument("x_grid must be >= 100");
}

double payoff(double x, double y) {
  check_x(x);
  check_y(y);
  return (1.0 - y) + (x < y ? x : 0.0);
}

double expected_payoff(double x) {
  check_x(x);
  if (x <= kInvE) return 1.0 - 2.0 * kInvE + x;
  if (x < 1.0) return 1.0 - kInvE;
  return 1.0 - 2.0 * kInvE;
}

double expected_payoff_quadrature(double x, const QuadratureConfig& cfg) {
  check_x(x);
  const NatureStrategy nature;
  const double breaks[] = {x};
  const double cont = integrate([&](double y) { return payoff(x, y) * nature.density(y); }, kInvE,
                                1.0, cfg, breaks);
  return nature.atom_prob * payoff(x, 1.0) + cont;
}

DistPtr nature_distribution(double y, double eps) {
  if (!(y >= kInvE && y <= 1.0)) throw std::invalid_argument("nature_distribution: y outside [1/e, 1]");
  if (!(eps > 0.0 && eps <= 0.01)) throw std::invalid_argument("nature_distribution: eps outside (0, 0.01]");
  if (y == 1.0) return make_uniform(0.0, eps);
  return make_mixture({{y, make_uniform(0.0, eps)}, {1.0 - y, point_mass(1.0)}});
}

double concrete_welfare(double x, double y, double eps) {
  check_x(x);
  const DistPtr seller = nature_distribution(y, eps);
  const DistPtr buyer = point_mass(1.0);
  return asym_welfare(seller->quantile(x), *seller, *buyer);
}

double simulated_value(double x, double eps, const QuadratureConfig& cfg) {
  check_x(x);
  const NatureStrategy nature;
  const double breaks[] = {x};
  const double cont = integrate(
      [&](double y) { return concrete_welfare(x, y, eps) * nature.density(y); }, kInvE, 1.0, cfg,
      breaks);
  return nature.atom_prob * concrete_welfare(x, 1.0, eps) + cont;
}

std::pair<double, double> simulated_value_mc(double x, double eps, std::size_t n, Seed seed) {
  check_x(x);
  if (n < 2) throw std::invalid_argument("simulated_value_mc needs n >= 2");
  const NatureStrategy nature;
  struct Acc {
    double sum = 0.0;
    double sq = 0.0;
  };
  auto body = [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(split(seed, chunk));
    Acc a;
    for (std::size_t i = begin; i < end; ++i) {
      const double y = nature.draw(rng.uniform_open());
      const DistPtr seller = nature_distribution(y, eps);
      const double s = seller->quantile(rng.uniform_open());
      const double p = seller->quantile(x);
      const double w = (1.0 > p && p >= s) ? 1.0 : s;
      a.sum += w;
      a.sq += w * w;
    }
    return a;
  };
  const Acc a = chunked_reduce(n, kMcChunk, Exec::Serial, Acc{}, body, [](Acc& l, const Acc& r) {
    l.sum += r.sum;
    l.sq += r.sq;
  });
  const double nn = static_cast<double>(n);
  const double mean = a.sum / nn;
  const double var = std::max(0.0, (a.sq - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn)};
}

GameResult simulate_game(const GameConfig& cfg, const QuadratureConfig& qcfg, Exec exec) {
  cfg.check();
  const auto n = static_cast<std::size_t>(cfg.x_grid) + 1;
  GameResult out;
  out.rows = parallel_map<GameRow>(n, exec, [&](std::size_t i) {
    GameRow row;
    row.x = static_cast<double>(i) / cfg.x_grid;
    row.closed_form = expected_payoff(row.x);
    row.simulated = simulated_value(row.x, cfg.epsilon, qcfg);
    row.gap = row.simulated - row.closed_form;
    if (cfg.mc_samples > 0) {
      const auto [m, se] = simulated_value_mc(row.x, cfg.epsilon, cfg.mc_samples, split(cfg.seed, i));
      row.mc = m;
      row.mc_stderr = se;
    }
    return row;
  });
  std::vector<double> values;
  values.reserve(n);
  for (const GameRow& r : out.rows) values.push_back(r.simulated);
  const ArgBest best = argmax_lowest(values, 0.0);
  out.sup_value = best.value;
  out.argmax_x = out.rows[best.index].x;
  return out;
}

}  // namespace bilateral

#pragma once

#include <string>
#include <vector>

#include "bilateral/distributions.hpp"
#include "bilateral/numerics.hpp"
#include "bilateral/parallel.hpp"

namespace bilateral {

// Nature's mixed strategy over y in [1/e, 1]: an atom at y = 1 plus the
// density 1/(e y^2).
struct NatureStrategy {
  double atom_prob = 0.36787944117144233;  // 1/e

  double density(double y) const;
  // P[Y <= y].
  double cdf(double y) const;
  // Inverse-CDF draw from a uniform in (0, 1).
  double draw(double u) const;
  // atom_prob + ∫ density, by quadrature.
  double total_mass(const QuadratureConfig& cfg = {}) const;
};

struct GameConfig {
  double epsilon = 1e-4;
  int x_grid = 1000;
  // Monte Carlo draws per grid point; 0 turns the column off.
  std::size_t mc_samples = 0;
  Seed seed{42};

  // Throws std::invalid_argument on an invalid field.
  void check() const;
};

// V(x, y) = (1 - y) + x 1{x < y}. Throws OutOfRange outside [0,1] x [1/e,1].
double payoff(double x, double y);

// E_y[V(x, y)] in closed form. Throws OutOfRange for x outside [0, 1].
double expected_payoff(double x);
// The same expectation by quadrature against NatureStrategy.
double expected_payoff_quadrature(double x, const QuadratureConfig& cfg = {});

// Seller values: Uniform(0, eps) with probability y, else 1.
DistPtr nature_distribution(double y, double eps);

// Welfare of posting the x-quantile of nature_distribution(y, eps) against
// a buyer worth 1.
double concrete_welfare(double x, double y, double eps);
// concrete_welfare mixed over NatureStrategy by quadrature.
double simulated_value(double x, double eps, const QuadratureConfig& cfg = {});
// Monte Carlo estimate of simulated_value; returns {mean, stderr}.
std::pair<double, double> simulated_value_mc(double x, double eps, std::size_t n, Seed seed);

struct GameRow {
  double x = 0.0;
  double closed_form = 0.0;
  double simulated = 0.0;
  double gap = 0.0;  // simulated - closed_form
  double mc = 0.0;
  double mc_stderr = 0.0;
};

struct GameResult {
  double sup_value = 0.0;
  double argmax_x = 0.0;
  std::vector<GameRow> rows;
};

// One row per x in {0, 1/x_grid, ..., 1}; sup over the simulated column.
GameResult simulate_game(const GameConfig& cfg, const QuadratureConfig& qcfg = {},
                         Exec exec = Exec::Parallel);

}  // namespace bilateral

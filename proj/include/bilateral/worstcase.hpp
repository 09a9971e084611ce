#pragma once

#include <memory>

#include "bilateral/distributions.hpp"
#include "bilateral/parallel.hpp"

namespace bilateral {

// (mu, mu1, gamma, delta) for the distribution on {0, mu, mu + delta, 1}
// with mean mu, E[S | S <= mu] = mu1 and F(mu) = gamma.
struct FourPointSpec {
  double mu = 0.0;
  double mu1 = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

struct FourPointMasses {
  double q0 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

// Raw masses, no feasibility check. When mu + delta = 1 the two upper atoms
// coincide and all mass above mu goes to 1.
FourPointMasses four_point_masses(const FourPointSpec& spec);

// Throws InfeasibleSpec naming the first negative mass or out-of-range field.
// Zero-mass atoms are dropped.
std::shared_ptr<const DiscreteDistribution> four_point(const FourPointSpec& spec);

// Parameters of the four-point distribution matched to a discrete F on
// [0, 1]: same mu, mu1, gamma; delta is the gap from mu to the next atom
// above it, or 1 - mu when there is none.
FourPointSpec match_four_point(const Distribution& F);

// Atoms 0, 1/n, 1; requires n >= 2.
std::shared_ptr<const DiscreteDistribution> minimizing_sequence(int n);

// W(mu_n; F_n) and OPT-W(F_n) as closed forms in n.
double minimizing_sequence_welfare(int n);
double minimizing_sequence_opt_w(int n);

// The ratio bound in the three statistics, as a single fraction.
// Throws SingularDenominator when mu <= 0, mu >= 1 or the denominator is not positive.
double lower_bound_objective(double mu, double mu1, double gamma);
// Same value in x = 1 - mu1 / mu: (1 + gamma x) / (1 + 2 gamma x - gamma^2 x^2 / (1 - mu)).
double lower_bound_reduced(double mu, double gamma, double x);
// (1 + y) / (1 + y (2 - y)), the mu -> 0 slice with y = gamma x.
double reduced_objective_1d(double y);

enum class ScanMode { Reduced1D, Full3D };

struct MinimaxScanResult {
  ScanMode mode = ScanMode::Reduced1D;
  // Minimum after local refinement (1-D) or on the grid (3-D).
  double best_value = 1.0;
  double grid_value = 1.0;
  // 1-D argmin, or gamma * x at the 3-D argmin.
  double y = 0.0;
  double mu = 0.0;
  double mu1 = 0.0;
  double gamma = 0.0;
  int grid_resolution = 0;
};

// Throws std::invalid_argument if resolution < 100. The 3-D mode uses
// `resolution` points per axis, mu log-spaced down to 1e-6.
MinimaxScanResult minimax_scan(int resolution, ScanMode mode = ScanMode::Reduced1D,
                               Exec exec = Exec::Parallel);

struct PowerRatio {
  double closed_form = 0.0;
  // Sample-price welfare over OPT-W, evaluated on the power distribution.
  double direct = 0.0;
  // OPT-GFT is below 1e-3 of OPT-W, so the ratio is within that of 1.
  bool near_degenerate = false;
};

PowerRatio power_family_ratio(double r, const QuadratureConfig& cfg = {});

}  // namespace bilateral

#pragma once

#include <string>
#include <variant>

#include "bilateral/distributions.hpp"
#include "bilateral/measures.hpp"

namespace bilateral {

struct FixedPrice {
  double p = 0.0;
};
// Posts the mean of the (seller's) distribution.
struct MeanPrice {};
// Posts one draw from the common distribution.
struct SamplePrice {};
// Randomized price with CDF 1 + log F_S(x) on [F_S^-1(1/e), F_S^-1(1)].
struct GStar {};
// Posts F_S^-1(g) with g ~ G on [0, 1].
struct QuantileRule {
  DistPtr g;
};
// Case analysis on alpha = E[(S - B)_+] / OPT-W.
struct HybridAsym {};

using Mechanism = std::variant<FixedPrice, MeanPrice, SamplePrice, GStar, QuantileRule, HybridAsym>;

std::string mechanism_name(const Mechanism& m);

// ---- sample price, symmetric setting

// 1/2 ∫ F (1 - F).
double sample_price_expected_gft(const Distribution& F, const QuadratureConfig& cfg = {});
// E over the price draw of the posted-price GFT, in quantile space:
// ∫_0^1 [u E(B - Q(u))_+ + (1 - u) E(Q(u) - S)_+] du. At an atom of F the
// draw's rank decides ties, so the atom's mass is split evenly.
double sample_price_expected_gft_outer(const Distribution& F, const QuadratureConfig& cfg = {});
double sample_price_expected_welfare(const Distribution& F, const QuadratureConfig& cfg = {});

// ---- mean price, symmetric setting

struct MeanPriceResult {
  double price = 0.0;
  // E[S] + GFT(mu, F).
  double welfare = 0.0;
  // mu + (mu - mu1) gamma with mu1 = E[S | S <= mu], gamma = F(mu).
  double welfare_three_quantity = 0.0;
  double mu1 = 0.0;
  double gamma = 0.0;
};

MeanPriceResult mean_price_welfare(const Distribution& F, const QuadratureConfig& cfg = {});

// ---- G*

struct GStarResult {
  double welfare = 0.0;
  double lo = 0.0;  // F_S^-1(1/e)
  double hi = 0.0;  // F_S^-1(1), or the tail cut for unbounded F_S
  // G* collapsed to a point mass.
  bool degenerate = false;
};

// E_{p ~ G*}[h(p)] for the G* built from F_S: ∫_0^1 h(F_S^-1(e^{v-1})) dv.
// `extra_breaks` are price locations where h jumps.
double gstar_expectation(const Distribution& F_S, const std::function<double(double)>& h,
                         const QuadratureConfig& cfg = {},
                         const std::vector<double>& extra_breaks = {});

GStarResult gstar_expected_welfare(const Distribution& F_S, const Distribution& F_B,
                                   const QuadratureConfig& cfg = {});

// ---- best fixed price

struct PricedWelfare {
  double price = 0.0;
  double welfare = 0.0;
};

// Candidate prices: 0, both means, every atom and its floating-point
// neighbours, and grid_size + 1 quantile-equispaced points of each side.
std::vector<double> price_candidates(const Distribution& F_S, const Distribution& F_B,
                                     int grid_size, const QuadratureConfig& cfg = {});

// Argmax of asym_welfare over price_candidates; lowest price wins ties.
// Throws std::invalid_argument if grid_size < 10.
PricedWelfare best_fixed_price(const Distribution& F_S, const Distribution& F_B, int grid_size,
                               const QuadratureConfig& cfg = {}, Exec exec = Exec::Parallel);

// ---- hybrid mechanism

enum class HybridBranch {
  GStarArgmax,   // alpha >= 0.0003
  Separated,     // alpha == 0
  HighQuantile,  // small alpha, P[B <= p*] <= 1/5
  Window,        // small alpha, P[B <= p*] > 1/5
};
std::string to_string(HybridBranch b);

inline constexpr double kHybridAlphaSplit = 0.0003;
inline constexpr double kHybridMargin = 0.0001;

struct HybridResult {
  double price = 0.0;
  double welfare = 0.0;
  double opt_w = 0.0;
  double alpha = 0.0;
  HybridBranch branch = HybridBranch::GStarArgmax;
  // p* = inf{p : P[S >= p] <= 1/5}; NaN on the G* and separated branches.
  double p_star = 0.0;
  // The branch price missed the guarantee and best_fixed_price was used.
  bool fallback = false;
};

HybridResult hybrid_asym_price(const Distribution& F_S, const Distribution& F_B,
                               const QuadratureConfig& cfg = {});

// inf{p : P[S >= p] <= 1/5} by bisection on the survival function.
double high_quantile_by_bisection(const Distribution& F_S, const QuadratureConfig& cfg = {});

// ---- evaluation

// Uniform-to-price map for Monte Carlo. SamplePrice uses `F_S` as the common
// distribution and sets rank_ties.
PriceRule price_rule(const Mechanism& m, const Distribution& F_S, const Distribution& F_B,
                     const QuadratureConfig& cfg = {});

// Expected welfare of `m` and the derived report. SamplePrice requires the
// symmetric overload.
MeasureReport evaluate(const Mechanism& m, const Distribution& F_S, const Distribution& F_B,
                       const QuadratureConfig& cfg = {});
MeasureReport evaluate(const Mechanism& m, const Distribution& F, const QuadratureConfig& cfg = {});

}  // namespace bilateral

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bilateral/distributions.hpp"
#include "bilateral/numerics.hpp"
#include "bilateral/parallel.hpp"

namespace bilateral {

enum class Method { ExactDiscrete, Quadrature, MonteCarlo };
std::string to_string(Method m);

// Which side of a posted price p counts as trading.
enum class TieBreak {
  BuyerStrict,   // trade iff B > p >= S
  SellerStrict,  // trade iff B >= p > S
};

struct McStderr {
  double mean_s = 0.0;
  double opt_gft = 0.0;
  double opt_w = 0.0;
  double gft_at_p = 0.0;
  double w_at_p = 0.0;
};

struct MeasureReport {
  double mean_s = 0.0;
  double opt_gft = 0.0;
  double opt_w = 0.0;
  double gft_at_p = 0.0;
  double w_at_p = 0.0;
  double ratio_gft = 0.0;
  double ratio_w = 0.0;
  Method method = Method::ExactDiscrete;
  // Standard error of w_at_p; set only for Monte Carlo reports.
  std::optional<double> mc_stderr;
  std::optional<McStderr> mc_detail;
  // Posted price, when the mechanism posts a single one.
  std::optional<double> price;
  // Set when a ratio has a zero denominator and was reported as 1.
  bool degenerate = false;
};

// Fills the ratios and the degenerate flag from the five raw quantities.
MeasureReport make_report(double mean_s, double opt_gft, double opt_w, double gft_at_p,
                          double w_at_p, Method method);

std::vector<std::string> report_csv_header();
std::vector<std::string> report_csv_row(const MeasureReport& r);

// ---- symmetric setting: S, B i.i.d. F

// OPT-GFT(F) = E[(B - S)_+]. Exact double sum for discrete F, quadrature of
// F(1 - F) otherwise.
double opt_gft(const Distribution& F, const QuadratureConfig& cfg = {});
double opt_gft_exact(const Distribution& F);
double opt_gft_quadrature(const Distribution& F, const QuadratureConfig& cfg = {});

// GFT(p, F) = F(p) E[(S - p)_+] + (1 - F(p)) E[(p - S)_+], the integral
// formula with ∫_p^∞ (1 - F) and ∫_0^p F evaluated from partial expectations.
double gft(double p, const Distribution& F, const QuadratureConfig& cfg = {});
// Same formula with both integrals done by quadrature.
double gft_quadrature(double p, const Distribution& F, const QuadratureConfig& cfg = {});
// E[(B - S) 1{trade}] as a double sum over atom pairs, for discrete F.
double gft_exact(double p, const Distribution& F, TieBreak tie);

double welfare(double p, const Distribution& F, const QuadratureConfig& cfg = {});
// OPT-W(F) = E[S] + OPT-GFT(F).
double opt_w(const Distribution& F, const QuadratureConfig& cfg = {});
// E[max{S, B}] computed directly: double sum or ∫(1 - F^2).
double opt_w_direct(const Distribution& F, const QuadratureConfig& cfg = {});

// ---- asymmetric setting: S ~ F_S, B ~ F_B independent, trade iff B > p >= S

double asym_welfare(double p, const Distribution& F_S, const Distribution& F_B,
                    const QuadratureConfig& cfg = {});
double asym_welfare_quadrature(double p, const Distribution& F_S, const Distribution& F_B,
                               const QuadratureConfig& cfg = {});
// Double sum over atom pairs; both sides discrete.
double asym_welfare_exact(double p, const Distribution& F_S, const Distribution& F_B);

// E[max{S, B}].
double asym_opt_w(const Distribution& F_S, const Distribution& F_B,
                  const QuadratureConfig& cfg = {});
// E[(B - S)_+]; asym_opt_w = E[S] + expected_surplus.
double expected_surplus(const Distribution& F_S, const Distribution& F_B,
                        const QuadratureConfig& cfg = {});
// E[(S - B)_+].
double expected_shortfall(const Distribution& F_S, const Distribution& F_B,
                          const QuadratureConfig& cfg = {});

// ---- Monte Carlo oracle

// Every price rule is a map from a uniform draw to a price. With rank_ties
// set, a price that coincides with S or B is compared by the underlying
// uniforms instead (the continuous-limit reading of "p drawn from F").
struct PriceRule {
  std::function<double(double)> price_at;
  bool rank_ties = false;
};

PriceRule fixed_price_rule(double p);

// Samples are processed in chunks of this size, chunk c seeded by split(seed, c).
inline constexpr std::size_t kMcChunk = 1u << 14;

// i.i.d. estimates of every MeasureReport field. Throws std::invalid_argument
// for n < 1000.
MeasureReport mc_oracle(const Distribution& F_S, const Distribution& F_B, const PriceRule& rule,
                        std::size_t n, Seed seed, Exec exec = Exec::Parallel);

}  // namespace bilateral

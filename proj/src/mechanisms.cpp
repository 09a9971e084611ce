#include "bilateral/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bilateral/errors.hpp"

namespace bilateral {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kInvE = std::exp(-1.0);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Top of the seller's support; the tail cut for unbounded supports.
double top_of_support(const Distribution& F, const QuadratureConfig& cfg) {
  return F.integration_hi(cfg);
}

double quantile_rule_welfare(const Distribution& G, const Distribution& F_S,
                             const Distribution& F_B, const QuadratureConfig& cfg) {
  if (G.support_lo() < 0.0 || G.support_hi() > 1.0) {
    throw std::invalid_argument("quantile rule: G must be supported on [0, 1]");
  }
  auto price_of = [&](double g) { return F_S.quantile(g); };
  if (G.is_discrete()) {
    double w = 0.0;
    for (const Atom& a : discrete_atoms(G)) {
      w += a.p * asym_welfare(price_of(a.x), F_S, F_B, cfg);
    }
    return w;
  }
  std::vector<double> breaks;
  for (const Atom& a : F_S.atoms()) {
    breaks.push_back(G.cdf(F_S.prob_lt(a.x)));
    breaks.push_back(G.cdf(F_S.cdf(a.x)));
  }
  for (double y : F_B.breakpoints()) breaks.push_back(G.cdf(F_S.cdf(y)));
  for (double b : G.breakpoints()) breaks.push_back(G.cdf(b));
  sort_unique(breaks);
  return integrate(
      [&](double v) { return asym_welfare(price_of(G.quantile(v)), F_S, F_B, cfg); }, 0.0, 1.0,
      cfg, breaks);
}

}  // namespace

std::string mechanism_name(const Mechanism& m) {
  return std::visit(Overloaded{[](const FixedPrice&) { return std::string("fixed"); },
                               [](const MeanPrice&) { return std::string("mean"); },
                               [](const SamplePrice&) { return std::string("sample"); },
                               [](const GStar&) { return std::string("gstar"); },
                               [](const QuantileRule&) { return std::string("quantile"); },
                               [](const HybridAsym&) { return std::string("hybrid"); }},
                    m);
}

// ---------------------------------------------------------------- sample price

double sample_price_expected_gft(const Distribution& F, const QuadratureConfig& cfg) {
  return 0.5 * opt_gft(F, cfg);
}

double sample_price_expected_gft_outer(const Distribution& F, const QuadratureConfig& cfg) {
  auto g = [&F](double u, double x) {
    return u * F.expected_excess_above(x) + (1.0 - u) * F.expected_deficit_below(x);
  };
  if (F.is_discrete()) {
    double total = 0.0;
    double below = 0.0;
    for (const Atom& a : discrete_atoms(F)) {
      // ∫ over the atom's quantile interval of a function linear in u.
      total += a.p * g(below + 0.5 * a.p, a.x);
      below += a.p;
    }
    return total;
  }
  const double top = std::isfinite(F.support_hi()) ? 1.0 : cfg.tail_quantile;
  std::vector<double> breaks;
  for (double b : F.breakpoints()) {
    breaks.push_back(F.prob_lt(b));
    breaks.push_back(F.cdf(b));
  }
  sort_unique(breaks);
  return integrate([&](double u) { return g(u, F.quantile(u)); }, 0.0, top, cfg, breaks);
}

double sample_price_expected_welfare(const Distribution& F, const QuadratureConfig& cfg) {
  return F.mean() + sample_price_expected_gft(F, cfg);
}

// ---------------------------------------------------------------- mean price

MeanPriceResult mean_price_welfare(const Distribution& F, const QuadratureConfig& cfg) {
  MeanPriceResult r;
  const double mu = atom_aligned_mean(F);
  r.price = mu;
  r.gamma = F.cdf(mu);
  r.mu1 = conditional_mean_below(F, mu);
  r.welfare_three_quantity = mu + (mu - r.mu1) * r.gamma;
  r.welfare = welfare(mu, F, cfg);
  return r;
}

// ---------------------------------------------------------------- G*

double gstar_expectation(const Distribution& F_S, const std::function<double(double)>& h,
                         const QuadratureConfig& cfg, const std::vector<double>& extra_breaks) {
  if (F_S.is_discrete()) {
    // Each atom x_k in range carries log F(x_k) - log max(F(x_k-), 1/e).
    double total = 0.0;
    for (const Atom& a : discrete_atoms(F_S)) {
      const double hi = F_S.cdf(a.x);
      if (!(hi > kInvE)) continue;
      const double lo = std::max(F_S.prob_lt(a.x), kInvE);
      const double weight = std::log(hi) - std::log(lo);
      if (weight > 0.0) total += weight * h(a.x);
    }
    return total;
  }
  const double top = std::isfinite(F_S.support_hi()) ? 1.0 : 1.0 + std::log(cfg.tail_quantile);
  std::vector<double> breaks;
  auto add_level = [&](double level) {
    if (level > kInvE && level < 1.0) breaks.push_back(1.0 + std::log(level));
  };
  for (double b : F_S.breakpoints()) {
    add_level(F_S.prob_lt(b));
    add_level(F_S.cdf(b));
  }
  for (double b : extra_breaks) {
    add_level(F_S.prob_lt(b));
    add_level(F_S.cdf(b));
  }
  sort_unique(breaks);
  return integrate([&](double v) { return h(F_S.quantile(std::exp(v - 1.0))); }, 0.0, top, cfg,
                   breaks);
}

GStarResult gstar_expected_welfare(const Distribution& F_S, const Distribution& F_B,
                                   const QuadratureConfig& cfg) {
  GStarResult r;
  r.lo = F_S.quantile(kInvE);
  r.hi = top_of_support(F_S, cfg);
  r.degenerate = !(r.lo < r.hi);
  auto h = [&](double p) { return asym_welfare(p, F_S, F_B, cfg); };
  if (r.degenerate) {
    r.welfare = h(r.lo);
    return r;
  }
  r.welfare = gstar_expectation(F_S, h, cfg, F_B.breakpoints());
  return r;
}

// ---------------------------------------------------------------- best fixed price

std::vector<double> price_candidates(const Distribution& F_S, const Distribution& F_B,
                                     int grid_size, const QuadratureConfig& cfg) {
  std::vector<double> c{0.0, F_S.mean(), F_B.mean()};
  for (const Distribution* d : {&F_S, &F_B}) {
    for (const Atom& a : d->atoms()) {
      c.push_back(a.x);
      c.push_back(std::nextafter(a.x, -kInf));
      c.push_back(std::nextafter(a.x, kInf));
    }
    for (double b : d->breakpoints()) c.push_back(b);
    for (int i = 0; i <= grid_size; ++i) {
      const double q = std::min(static_cast<double>(i) / grid_size, cfg.tail_quantile);
      c.push_back(d->quantile(q));
    }
  }
  c.erase(std::remove_if(c.begin(), c.end(), [](double x) { return !std::isfinite(x) || x < 0.0; }),
          c.end());
  sort_unique(c);
  return c;
}

PricedWelfare best_fixed_price(const Distribution& F_S, const Distribution& F_B, int grid_size,
                               const QuadratureConfig& cfg, Exec exec) {
  if (grid_size < 10) throw std::invalid_argument("best_fixed_price: grid_size must be >= 10");
  const auto prices = price_candidates(F_S, F_B, grid_size, cfg);
  const auto values = parallel_map<double>(prices.size(), exec, [&](std::size_t i) {
    return asym_welfare(prices[i], F_S, F_B, cfg);
  });
  const ArgBest best = argmax_lowest(values);
  return {prices[best.index], best.value};
}

// ---------------------------------------------------------------- hybrid

std::string to_string(HybridBranch b) {
  switch (b) {
    case HybridBranch::GStarArgmax: return "gstar";
    case HybridBranch::Separated: return "separated";
    case HybridBranch::HighQuantile: return "high-quantile";
    case HybridBranch::Window: return "window";
  }
  return "unknown";
}

namespace {

constexpr double kFifth = 0.2;
// Slack on probability comparisons against 1/5, matching the quantile lookup.
constexpr double kLevelSlack = 1e-13;

PricedWelfare best_of(const std::vector<double>& prices, const Distribution& F_S,
                      const Distribution& F_B, const QuadratureConfig& cfg) {
  PricedWelfare best{prices.front(), -kInf};
  for (double p : prices) {
    const double w = asym_welfare(p, F_S, F_B, cfg);
    if (w > best.welfare) best = {p, w};
  }
  return best;
}

// Half-width of the price window: sqrt(10 alpha) OPT / 2.
double window_half_width(double alpha, double opt) { return 0.5 * std::sqrt(10.0 * alpha) * opt; }

}  // namespace

double high_quantile_by_bisection(const Distribution& F_S, const QuadratureConfig& cfg) {
  auto done = [&](double p) { return 1.0 - F_S.prob_lt(p) <= kFifth + kLevelSlack; };
  double lo = F_S.support_lo();
  if (done(lo)) return lo;
  double hi = top_of_support(F_S, cfg);
  if (!done(hi)) hi = std::nextafter(hi, kInf);
  const double tol = std::ldexp(std::max(hi - lo, 1e-300), -52);
  for (int it = 0; it < 2000 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (done(mid) ? hi : lo) = mid;
  }
  return hi;
}

HybridResult hybrid_asym_price(const Distribution& F_S, const Distribution& F_B,
                               const QuadratureConfig& cfg) {
  HybridResult r;
  r.opt_w = asym_opt_w(F_S, F_B, cfg);
  r.p_star = kNaN;
  const double opt = r.opt_w;
  if (!(opt > 0.0)) {
    r.branch = HybridBranch::Separated;
    r.price = 0.0;
    r.welfare = asym_welfare(0.0, F_S, F_B, cfg);
    return r;
  }
  const double shortfall = expected_shortfall(F_S, F_B, cfg);
  r.alpha = shortfall / opt;
  const double target = (1.0 - kInvE + kHybridMargin) * opt - 1e-9;
  const double seller_top = top_of_support(F_S, cfg);

  PricedWelfare pick;
  if (r.alpha >= kHybridAlphaSplit) {
    r.branch = HybridBranch::GStarArgmax;
    std::vector<double> support;
    for (const Atom& a : F_S.atoms()) {
      if (F_S.cdf(a.x) > kInvE) support.push_back(a.x);
    }
    if (!F_S.is_discrete()) {
      const double vtop = std::isfinite(F_S.support_hi()) ? 1.0 : 1.0 + std::log(cfg.tail_quantile);
      constexpr int kSteps = 512;
      for (int i = 0; i <= kSteps; ++i) {
        support.push_back(F_S.quantile(std::exp(vtop * i / kSteps - 1.0)));
      }
    }
    sort_unique(support);
    pick = best_of(support, F_S, F_B, cfg);
  } else if (shortfall == 0.0 && std::isfinite(seller_top)) {
    // Every seller value sits at or below every buyer value.
    r.branch = HybridBranch::Separated;
    const double p_sep = F_S.quantile(1.0);
    std::vector<double> cands;
    for (double a = 1e-4; a >= 1e-14; a /= 10.0) {
      const double h = window_half_width(a, opt);
      cands.push_back(p_sep + h);
      cands.push_back(std::max(p_sep - h, 0.0));
    }
    pick = best_of(cands, F_S, F_B, cfg);
  } else {
    const double p_star = F_S.quantile(0.8);
    const double p_check = high_quantile_by_bisection(F_S, cfg);
    if (std::abs(p_star - p_check) > 1e-9 * std::max(1.0, std::abs(p_star))) {
      throw NumericError("hybrid: quantile p* = " + std::to_string(p_star) +
                         " disagrees with bisection " + std::to_string(p_check));
    }
    r.p_star = p_star;
    if (F_B.cdf(p_star) <= kFifth + kLevelSlack) {
      r.branch = HybridBranch::HighQuantile;
      // At a seller atom the infimum is not attained; the price just above
      // it is probed too.
      double gap = kInf;
      for (const Distribution* d : {&F_S, &F_B}) {
        for (const Atom& a : d->atoms()) {
          if (a.x > p_star) gap = std::min(gap, a.x - p_star);
        }
      }
      const double eta = std::min(0.5 * gap, 1e-9 * std::max(1.0, p_star));
      pick = best_of({p_star, p_star + eta}, F_S, F_B, cfg);
    } else {
      r.branch = HybridBranch::Window;
      double eps = 1e-6 * opt;
      double p0 = p_star - eps;
      for (int shrink = 0; shrink <= 12; ++shrink) {
        p0 = p_star - eps;
        if (1.0 - F_S.prob_lt(p0) > kFifth && F_B.cdf(p0) > kFifth) break;
        eps /= 10.0;
      }
      const double h = window_half_width(r.alpha, opt);
      pick = best_of({p0 + h, std::max(p0 - h, 0.0)}, F_S, F_B, cfg);
    }
  }

  r.price = pick.price;
  r.welfare = pick.welfare;
  if (r.welfare < target) {
    const PricedWelfare fb = best_fixed_price(F_S, F_B, 256, cfg, Exec::Serial);
    if (fb.welfare > r.welfare) {
      r.price = fb.price;
      r.welfare = fb.welfare;
    }
    r.fallback = true;
  }
  return r;
}

// ---------------------------------------------------------------- evaluation

PriceRule price_rule(const Mechanism& m, const Distribution& F_S, const Distribution& F_B,
                     const QuadratureConfig& cfg) {
  return std::visit(
      Overloaded{
          [](const FixedPrice& f) { return fixed_price_rule(f.p); },
          [&](const MeanPrice&) { return fixed_price_rule(atom_aligned_mean(F_S)); },
          [&](const SamplePrice&) {
            return PriceRule{[&F_S](double u) { return F_S.quantile(u); }, true};
          },
          [&](const GStar&) {
            return PriceRule{[&F_S](double u) { return F_S.quantile(std::exp(u - 1.0)); }, false};
          },
          [&](const QuantileRule& q) {
            DistPtr g = q.g;
            return PriceRule{[&F_S, g](double u) { return F_S.quantile(g->quantile(u)); }, false};
          },
          [&](const HybridAsym&) {
            return fixed_price_rule(hybrid_asym_price(F_S, F_B, cfg).price);
          }},
      m);
}

namespace {

bool exact_inputs(const Mechanism& m, const Distribution& F_S, const Distribution& F_B) {
  if (!(F_S.is_discrete() && F_B.is_discrete())) return false;
  if (const auto* q = std::get_if<QuantileRule>(&m)) return q->g->is_discrete();
  return true;
}

}  // namespace

MeasureReport evaluate(const Mechanism& m, const Distribution& F_S, const Distribution& F_B,
                       const QuadratureConfig& cfg) {
  std::optional<double> price;
  const double w = std::visit(
      Overloaded{
          [&](const FixedPrice& f) {
            price = f.p;
            return asym_welfare(f.p, F_S, F_B, cfg);
          },
          [&](const MeanPrice&) {
            price = atom_aligned_mean(F_S);
            return asym_welfare(*price, F_S, F_B, cfg);
          },
          [&](const SamplePrice&) -> double {
            throw std::invalid_argument("sample price is defined for a common distribution only");
          },
          [&](const GStar&) { return gstar_expected_welfare(F_S, F_B, cfg).welfare; },
          [&](const QuantileRule& q) {
            if (!q.g) throw std::invalid_argument("quantile rule without G");
            return quantile_rule_welfare(*q.g, F_S, F_B, cfg);
          },
          [&](const HybridAsym&) {
            const HybridResult h = hybrid_asym_price(F_S, F_B, cfg);
            price = h.price;
            return h.welfare;
          }},
      m);
  const double mean_s = F_S.mean();
  MeasureReport r = make_report(mean_s, expected_surplus(F_S, F_B, cfg), asym_opt_w(F_S, F_B, cfg),
                                w - mean_s, w,
                                exact_inputs(m, F_S, F_B) ? Method::ExactDiscrete : Method::Quadrature);
  r.price = price;
  return r;
}

MeasureReport evaluate(const Mechanism& m, const Distribution& F, const QuadratureConfig& cfg) {
  const double mean = F.mean();
  const double og = opt_gft(F, cfg);
  const Method method = exact_inputs(m, F, F) ? Method::ExactDiscrete : Method::Quadrature;
  if (std::holds_alternative<SamplePrice>(m)) {
    const double g = sample_price_expected_gft(F, cfg);
    return make_report(mean, og, mean + og, g, mean + g, method);
  }
  MeasureReport asym = evaluate(m, F, F, cfg);
  MeasureReport r = make_report(mean, og, mean + og, asym.w_at_p - mean, asym.w_at_p, method);
  r.price = asym.price;
  return r;
}

}  // namespace bilateral

#include "bilateral/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "bilateral/errors.hpp"

namespace bilateral {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::vector<double> merged_breakpoints(const Distribution& a, const Distribution* b = nullptr) {
  std::vector<double> out = a.breakpoints();
  if (b) {
    auto more = b->breakpoints();
    out.insert(out.end(), more.begin(), more.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ∫_0^p F over [support_lo, p]; F vanishes below support_lo.
double integral_cdf_below(const Distribution& F, double p, const QuadratureConfig& cfg) {
  const double lo = std::max(0.0, F.support_lo());
  if (p <= lo) return 0.0;
  const auto bp = F.breakpoints();
  return integrate([&F](double x) { return F.cdf(x); }, lo, p, cfg, bp);
}

// ∫_p^∞ (1 - F), as the mean minus ∫_0^p (1 - F).
double integral_survival_above(const Distribution& F, double p, const QuadratureConfig& cfg) {
  if (p <= 0.0) return F.mean() - p;
  const auto bp = F.breakpoints();
  const double head = integrate([&F](double x) { return 1.0 - F.cdf(x); }, 0.0, p, cfg, bp);
  return std::max(F.mean() - head, 0.0);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::ExactDiscrete: return "exact-discrete";
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

MeasureReport make_report(double mean_s, double opt_gft_v, double opt_w_v, double gft_at_p,
                          double w_at_p, Method method) {
  MeasureReport r;
  r.mean_s = mean_s;
  r.opt_gft = opt_gft_v;
  r.opt_w = opt_w_v;
  r.gft_at_p = gft_at_p;
  r.w_at_p = w_at_p;
  r.method = method;
  const double scale = std::max(1.0, std::abs(opt_w_v));
  if (opt_gft_v <= 1e-14 * scale) {
    r.ratio_gft = 1.0;
    r.degenerate = true;
  } else {
    r.ratio_gft = gft_at_p / opt_gft_v;
  }
  if (opt_w_v <= 0.0) {
    r.ratio_w = 1.0;
    r.degenerate = true;
  } else {
    r.ratio_w = w_at_p / opt_w_v;
  }
  return r;
}

std::vector<std::string> report_csv_header() {
  return {"method", "price", "mean_s", "opt_gft", "opt_w", "gft_at_p",
          "w_at_p", "ratio_gft", "ratio_w", "mc_stderr", "degenerate"};
}

std::vector<std::string> report_csv_row(const MeasureReport& r) {
  return {to_string(r.method),
          r.price ? num(*r.price) : "",
          num(r.mean_s),
          num(r.opt_gft),
          num(r.opt_w),
          num(r.gft_at_p),
          num(r.w_at_p),
          num(r.ratio_gft),
          num(r.ratio_w),
          r.mc_stderr ? num(*r.mc_stderr) : "",
          r.degenerate ? "1" : "0"};
}

// ---------------------------------------------------------------- symmetric

double opt_gft_exact(const Distribution& F) {
  const auto atoms = discrete_atoms(F);
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      s += atoms[i].p * atoms[j].p * (atoms[j].x - atoms[i].x);
    }
  }
  return s;
}

double opt_gft_quadrature(const Distribution& F, const QuadratureConfig& cfg) {
  const double lo = std::max(0.0, F.support_lo());
  const double hi = F.integration_hi(cfg);
  const auto bp = F.breakpoints();
  return integrate(
      [&F](double x) {
        const double c = F.cdf(x);
        return c * (1.0 - c);
      },
      lo, hi, cfg, bp);
}

double opt_gft(const Distribution& F, const QuadratureConfig& cfg) {
  return F.is_discrete() ? opt_gft_exact(F) : opt_gft_quadrature(F, cfg);
}

double gft(double p, const Distribution& F, const QuadratureConfig&) {
  if (std::isinf(p) && p > 0) return 0.0;
  const double c = F.cdf(p);
  return c * F.expected_excess_above(p) + (1.0 - c) * F.expected_deficit_below(p);
}

double gft_quadrature(double p, const Distribution& F, const QuadratureConfig& cfg) {
  const double c = F.cdf(p);
  return c * integral_survival_above(F, p, cfg) + (1.0 - c) * integral_cdf_below(F, p, cfg);
}

double gft_exact(double p, const Distribution& F, TieBreak tie) {
  const auto atoms = discrete_atoms(F);
  double s = 0.0;
  for (const Atom& sa : atoms) {
    for (const Atom& ba : atoms) {
      const bool trade = tie == TieBreak::BuyerStrict ? (ba.x > p && p >= sa.x)
                                                      : (ba.x >= p && p > sa.x);
      if (trade) s += sa.p * ba.p * (ba.x - sa.x);
    }
  }
  return s;
}

double welfare(double p, const Distribution& F, const QuadratureConfig& cfg) {
  return F.mean() + gft(p, F, cfg);
}

double opt_w(const Distribution& F, const QuadratureConfig& cfg) {
  return F.mean() + opt_gft(F, cfg);
}

double opt_w_direct(const Distribution& F, const QuadratureConfig& cfg) {
  if (F.is_discrete()) {
    const auto atoms = discrete_atoms(F);
    double s = 0.0;
    for (const Atom& a : atoms) {
      for (const Atom& b : atoms) s += a.p * b.p * std::max(a.x, b.x);
    }
    return s;
  }
  const double hi = F.integration_hi(cfg);
  const auto bp = F.breakpoints();
  return integrate(
      [&F](double x) {
        const double c = F.cdf(x);
        return 1.0 - c * c;
      },
      0.0, hi, cfg, bp);
}

// ---------------------------------------------------------------- asymmetric

double asym_welfare(double p, const Distribution& F_S, const Distribution& F_B,
                    const QuadratureConfig&) {
  if (std::isinf(p) && p > 0) return F_S.mean();
  return F_S.mean() + F_S.cdf(p) * F_B.expected_excess_above(p) +
         (1.0 - F_B.cdf(p)) * F_S.expected_deficit_below(p);
}

double asym_welfare_quadrature(double p, const Distribution& F_S, const Distribution& F_B,
                               const QuadratureConfig& cfg) {
  return F_S.mean() + F_S.cdf(p) * integral_survival_above(F_B, p, cfg) +
         (1.0 - F_B.cdf(p)) * integral_cdf_below(F_S, p, cfg);
}

double asym_welfare_exact(double p, const Distribution& F_S, const Distribution& F_B) {
  const auto sa = discrete_atoms(F_S);
  const auto ba = discrete_atoms(F_B);
  double w = 0.0;
  for (const Atom& s : sa) {
    for (const Atom& b : ba) {
      w += s.p * b.p * ((b.x > p && p >= s.x) ? b.x : s.x);
    }
  }
  return w;
}

double expected_surplus(const Distribution& F_S, const Distribution& F_B,
                        const QuadratureConfig& cfg) {
  if (F_S.is_discrete() && F_B.is_discrete()) {
    const auto sa = discrete_atoms(F_S);
    const auto ba = discrete_atoms(F_B);
    double v = 0.0;
    for (const Atom& s : sa) {
      for (const Atom& b : ba) {
        if (b.x > s.x) v += s.p * b.p * (b.x - s.x);
      }
    }
    return v;
  }
  if (F_S.is_discrete()) {
    double v = 0.0;
    for (const Atom& s : discrete_atoms(F_S)) v += s.p * F_B.expected_excess_above(s.x);
    return v;
  }
  if (F_B.is_discrete()) {
    double v = 0.0;
    for (const Atom& b : discrete_atoms(F_B)) v += b.p * F_S.expected_deficit_below(b.x);
    return v;
  }
  const double hi = std::max(F_S.integration_hi(cfg), F_B.integration_hi(cfg));
  const auto bp = merged_breakpoints(F_S, &F_B);
  return integrate([&](double x) { return F_S.cdf(x) * (1.0 - F_B.cdf(x)); }, 0.0, hi, cfg, bp);
}

double expected_shortfall(const Distribution& F_S, const Distribution& F_B,
                          const QuadratureConfig& cfg) {
  return expected_surplus(F_B, F_S, cfg);
}

double asym_opt_w(const Distribution& F_S, const Distribution& F_B, const QuadratureConfig& cfg) {
  if (F_S.is_discrete() && F_B.is_discrete()) {
    const auto sa = discrete_atoms(F_S);
    const auto ba = discrete_atoms(F_B);
    double v = 0.0;
    for (const Atom& s : sa) {
      for (const Atom& b : ba) v += s.p * b.p * std::max(s.x, b.x);
    }
    return v;
  }
  if (F_S.is_discrete()) {
    double v = 0.0;
    for (const Atom& s : discrete_atoms(F_S)) v += s.p * (s.x + F_B.expected_excess_above(s.x));
    return v;
  }
  if (F_B.is_discrete()) {
    double v = 0.0;
    for (const Atom& b : discrete_atoms(F_B)) v += b.p * (b.x + F_S.expected_excess_above(b.x));
    return v;
  }
  const double hi = std::max(F_S.integration_hi(cfg), F_B.integration_hi(cfg));
  const auto bp = merged_breakpoints(F_S, &F_B);
  return integrate([&](double x) { return 1.0 - F_S.cdf(x) * F_B.cdf(x); }, 0.0, hi, cfg, bp);
}

// ---------------------------------------------------------------- Monte Carlo

PriceRule fixed_price_rule(double p) {
  return PriceRule{[p](double) { return p; }, false};
}

namespace {

constexpr int kFields = 5;  // mean_s, opt_gft, opt_w, gft, w

// Per-field running mean and sum of squared deviations.
struct Moments {
  std::size_t n = 0;
  std::array<double, kFields> mean{};
  std::array<double, kFields> m2{};

  void add(const std::array<double, kFields>& v) {
    ++n;
    for (int k = 0; k < kFields; ++k) {
      const double d = v[k] - mean[k];
      mean[k] += d / static_cast<double>(n);
      m2[k] += d * (v[k] - mean[k]);
    }
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double nt = na + nb;
    for (int k = 0; k < kFields; ++k) {
      const double d = o.mean[k] - mean[k];
      mean[k] += d * nb / nt;
      m2[k] += o.m2[k] + d * d * na * nb / nt;
    }
    n += o.n;
  }

  double stderr_of(int k) const {
    if (n < 2) return 0.0;
    const double var = m2[k] / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

MeasureReport mc_oracle(const Distribution& F_S, const Distribution& F_B, const PriceRule& rule,
                        std::size_t n, Seed seed, Exec exec) {
  if (n < 1000) throw std::invalid_argument("mc_oracle needs at least 1000 samples");
  if (!rule.price_at) throw std::invalid_argument("mc_oracle: empty price rule");

  auto body = [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(split(seed, chunk));
    Moments m;
    for (std::size_t i = begin; i < end; ++i) {
      const double us = rng.uniform_open();
      const double ub = rng.uniform_open();
      const double up = rng.uniform_open();
      const double s = F_S.quantile(us);
      const double b = F_B.quantile(ub);
      const double p = rule.price_at(up);
      const bool seller_ok = (rule.rank_ties && p == s) ? up >= us : p >= s;
      const bool buyer_ok = (rule.rank_ties && b == p) ? ub > up : b > p;
      const bool trade = seller_ok && buyer_ok;
      m.add({s, std::max(b - s, 0.0), std::max(s, b), trade ? b - s : 0.0, trade ? b : s});
    }
    return m;
  };
  const Moments m = chunked_reduce(n, kMcChunk, exec, Moments{}, body,
                                   [](Moments& acc, const Moments& part) { acc.merge(part); });

  MeasureReport r = make_report(m.mean[0], m.mean[1], m.mean[2], m.mean[3], m.mean[4],
                                Method::MonteCarlo);
  r.mc_stderr = m.stderr_of(4);
  r.mc_detail = McStderr{m.stderr_of(0), m.stderr_of(1), m.stderr_of(2), m.stderr_of(3),
                         m.stderr_of(4)};
  return r;
}

}  // namespace bilateral

#include "bilateral/worstcase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bilateral/errors.hpp"
#include "bilateral/measures.hpp"
#include "bilateral/mechanisms.hpp"

namespace bilateral {

namespace {

constexpr double kMassTol = 1e-12;
const double kSqrt2 = std::sqrt(2.0);

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FourPointMasses four_point_masses(const FourPointSpec& s) {
  FourPointMasses m;
  m.q0 = s.gamma * (1.0 - s.mu1 / s.mu);
  m.q1 = s.mu1 * s.gamma / s.mu;
  const double denom = 1.0 - s.mu - s.delta;
  if (std::abs(denom) <= kMassTol) {
    m.q2 = 0.0;
    m.q3 = 1.0 - s.gamma;
  } else {
    m.q2 = (1.0 - s.gamma - s.mu + s.mu1 * s.gamma) / denom;
    m.q3 = (s.mu * s.gamma - s.mu1 * s.gamma - s.delta + s.delta * s.gamma) / denom;
  }
  return m;
}

std::shared_ptr<const DiscreteDistribution> four_point(const FourPointSpec& s) {
  if (!(s.mu > 0.0 && s.mu <= 1.0)) throw InfeasibleSpec("mu = " + fmt(s.mu) + " is outside (0, 1]");
  if (!(s.mu1 >= 0.0 && s.mu1 <= s.mu)) throw InfeasibleSpec("mu1 = " + fmt(s.mu1) + " is outside [0, mu]");
  if (!(s.gamma > 0.0 && s.gamma <= 1.0)) throw InfeasibleSpec("gamma = " + fmt(s.gamma) + " is outside (0, 1]");
  if (!(s.delta > 0.0 && s.delta <= 1.0 - s.mu + kMassTol)) {
    throw InfeasibleSpec("delta = " + fmt(s.delta) + " is outside (0, 1 - mu]");
  }
  const FourPointMasses m = four_point_masses(s);
  const double q[4] = {m.q0, m.q1, m.q2, m.q3};
  const double x[4] = {0.0, s.mu, std::min(s.mu + s.delta, 1.0), 1.0};
  const char* names[4] = {"q0", "q1", "q2", "q3"};
  std::vector<Atom> atoms;
  for (int i = 0; i < 4; ++i) {
    if (q[i] < -kMassTol || q[i] > 1.0 + kMassTol) {
      throw InfeasibleSpec(std::string(names[i]) + " = " + fmt(q[i]) + " is not a probability");
    }
    if (q[i] > 0.0) {
      if (!atoms.empty() && atoms.back().x == x[i]) {
        atoms.back().p += q[i];
      } else {
        atoms.push_back({x[i], q[i]});
      }
    }
  }
  const double sum = m.q0 + m.q1 + m.q2 + m.q3;
  if (std::abs(sum - 1.0) > kMassTol) throw InfeasibleSpec("masses sum to " + fmt(sum));
  return std::make_shared<DiscreteDistribution>(std::move(atoms));
}

FourPointSpec match_four_point(const Distribution& F) {
  if (F.support_lo() < 0.0 || F.support_hi() > 1.0) {
    throw InfeasibleSpec("four-point matching needs support in [0, 1]");
  }
  FourPointSpec s;
  s.mu = atom_aligned_mean(F);
  s.gamma = F.cdf(s.mu);
  s.mu1 = conditional_mean_below(F, s.mu);
  double gap = 1.0 - s.mu;
  for (const Atom& a : discrete_atoms(F)) {
    if (a.x > s.mu) gap = std::min(gap, a.x - s.mu);
  }
  s.delta = gap;
  return s;
}

std::shared_ptr<const DiscreteDistribution> minimizing_sequence(int n) {
  if (n < 2) throw std::invalid_argument("minimizing_sequence needs n >= 2");
  const double inv = 1.0 / n;
  return std::make_shared<DiscreteDistribution>(std::vector<Atom>{
      {0.0, (kSqrt2 - 1.0) * (1.0 - inv)},
      {inv, 2.0 - kSqrt2},
      {1.0, (kSqrt2 - 1.0) * inv},
  });
}

double minimizing_sequence_welfare(int n) {
  const double nn = n;
  return kSqrt2 / nn - (kSqrt2 - 1.0) / (nn * nn);
}

double minimizing_sequence_opt_w(int n) {
  const double nn = n;
  return 4.0 * (kSqrt2 - 1.0) / nn - (4.0 * kSqrt2 - 5.0) / (nn * nn);
}

double lower_bound_objective(double mu, double mu1, double gamma) {
  if (!(mu > 0.0 && mu < 1.0)) throw SingularDenominator("mu = " + fmt(mu) + " is outside (0, 1)");
  const double num = mu + (mu - mu1) * gamma;
  const double t = 1.0 - gamma - mu + mu1 * gamma;
  const double den = mu1 * gamma * gamma * (2.0 - mu1 / mu) + 2.0 * gamma * (mu - gamma * mu1) +
                     (1.0 - gamma) * (1.0 - gamma) - t * t / (1.0 - mu);
  if (!(den > 0.0)) throw SingularDenominator("denominator " + fmt(den) + " is not positive");
  return num / den;
}

double lower_bound_reduced(double mu, double gamma, double x) {
  if (!(mu < 1.0)) throw SingularDenominator("mu = " + fmt(mu) + " is not below 1");
  const double gx = gamma * x;
  const double den = 1.0 + 2.0 * gx - gx * gx / (1.0 - mu);
  if (!(den > 0.0)) throw SingularDenominator("denominator " + fmt(den) + " is not positive");
  return (1.0 + gx) / den;
}

double reduced_objective_1d(double y) { return (1.0 + y) / (1.0 + y * (2.0 - y)); }

namespace {

// Golden-section minimum of a unimodal f on [a, b].
double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

MinimaxScanResult scan_1d(int res, Exec exec) {
  const auto values = parallel_map<double>(static_cast<std::size_t>(res) + 1, exec, [&](std::size_t i) {
    return reduced_objective_1d(static_cast<double>(i) / res);
  });
  const ArgBest g = argmin_lowest(values, 0.0);
  const double step = 1.0 / res;
  const double y0 = static_cast<double>(g.index) * step;
  const double y = golden_min(reduced_objective_1d, std::max(0.0, y0 - step), std::min(1.0, y0 + step));
  MinimaxScanResult r;
  r.mode = ScanMode::Reduced1D;
  r.grid_value = g.value;
  r.best_value = std::min(g.value, reduced_objective_1d(y));
  r.y = reduced_objective_1d(y) <= g.value ? y : y0;
  r.grid_resolution = res;
  return r;
}

struct Cell {
  double value = std::numeric_limits<double>::infinity();
  double mu = 0.0;
  double mu1 = 0.0;
  double gamma = 0.0;
  double x = 0.0;
};

MinimaxScanResult scan_3d(int res, Exec exec) {
  const double log_lo = std::log(1e-6);
  const double log_hi = std::log(1.0 - 1e-6);
  const auto rows = parallel_map<Cell>(static_cast<std::size_t>(res), exec, [&](std::size_t i) {
    const double mu = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / (res - 1));
    Cell best;
    for (int j = 1; j <= res; ++j) {
      const double gamma = static_cast<double>(j) / res;
      for (int k = 0; k <= res; ++k) {
        const double x = static_cast<double>(k) / res;
        const double mu1 = mu * (1.0 - x);
        // Values are capped at 1: E[S 1{S > mu}] <= P[S > mu].
        if (1.0 - gamma - mu + mu1 * gamma < 0.0) continue;
        double v;
        try {
          v = lower_bound_objective(mu, mu1, gamma);
        } catch (const SingularDenominator&) {
          continue;
        }
        if (v < best.value) best = {v, mu, mu1, gamma, x};
      }
    }
    return best;
  });
  std::vector<double> values;
  values.reserve(rows.size());
  for (const Cell& c : rows) values.push_back(c.value);
  const ArgBest g = argmin_lowest(values, 0.0);
  const Cell& c = rows[g.index];
  MinimaxScanResult r;
  r.mode = ScanMode::Full3D;
  r.best_value = c.value;
  r.grid_value = c.value;
  r.mu = c.mu;
  r.mu1 = c.mu1;
  r.gamma = c.gamma;
  r.y = c.gamma * c.x;
  r.grid_resolution = res;
  return r;
}

}  // namespace

MinimaxScanResult minimax_scan(int resolution, ScanMode mode, Exec exec) {
  if (resolution < 100) throw std::invalid_argument("minimax_scan: resolution must be >= 100");
  return mode == ScanMode::Reduced1D ? scan_1d(resolution, exec) : scan_3d(resolution, exec);
}

PowerRatio power_family_ratio(double r, const QuadratureConfig& cfg) {
  if (!(r > 0.0)) throw std::invalid_argument("power_family_ratio: r must be > 0");
  PowerRatio out;
  const double a = 1.0 / (r + 1.0) - 1.0 / (2.0 * r + 1.0);
  out.closed_form = 1.0 - 0.5 * a / (r / (r + 1.0) + 1.0 / (r + 1.0) - 1.0 / (2.0 * r + 1.0));

  const PowerDistribution F(r);
  // Both numerator and denominator scale like the mean for small r.
  QuadratureConfig tight = cfg;
  tight.abs_tol = cfg.abs_tol * std::min(1.0, F.mean());
  const double ow = opt_w(F, tight);
  out.direct = sample_price_expected_welfare(F, tight) / ow;
  out.near_degenerate = opt_gft(F, tight) < 1e-3 * ow;
  return out;
}

}  // namespace bilateral

#include "bilateral/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bilateral/errors.hpp"

namespace bilateral {

void QuadratureConfig::check() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be > 0");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
  if (max_subdivisions < 16)
    throw std::invalid_argument("max_subdivisions must be >= 16");
  if (!(tail_quantile > 0.0 && tail_quantile < 1.0))
    throw std::invalid_argument("tail_quantile must lie in (0, 1)");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Seed split(Seed parent, std::uint64_t stream) noexcept {
  return Seed{splitmix64(parent.value ^ splitmix64(stream + 0x632be59bd9b4e019ULL))};
}

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece evaluate_piece(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  // max_depth = 0: a single non-adaptive G10/K21 pass.
  const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
  // Boost reports |K - G| on the reference interval [-1, 1]; map it to [a, b].
  err *= 0.5 * (b - a);
  if (!std::isfinite(v)) {
    throw NonConvergence("integrand is not finite on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }
  return {a, b, v, err};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg, std::span<const double> breakpoints) {
  if (a > b) throw InvalidInterval("integrate: a > b");
  if (a == b) return 0.0;

  std::vector<double> cuts{a, b};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  if (static_cast<int>(cuts.size()) - 1 > cfg.max_subdivisions) {
    throw NonConvergence("integrate: more breakpoints than max_subdivisions");
  }

  std::priority_queue<Piece> heap;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Piece p = evaluate_piece(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }

  std::vector<Piece> exhausted;
  int pieces = static_cast<int>(heap.size());
  auto converged = [&] {
    return total_err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total));
  };
  while (!converged()) {
    if (pieces >= cfg.max_subdivisions) {
      const Piece& w = heap.top();
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    " subintervals (error estimate %.3g, worst piece [%.6g, %.6g] error %.3g)",
                    total_err, w.a, w.b, w.error);
      throw NonConvergence("integrate: tolerance not met within " +
                           std::to_string(cfg.max_subdivisions) + buf);
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted at machine resolution; accept what we have.
      total_err -= worst.error;
      exhausted.push_back(worst);
      continue;
    }
    Piece left = evaluate_piece(f, worst.a, mid);
    Piece right = evaluate_piece(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++pieces;
  }

  // Re-sum from the pieces to drop accumulated cancellation in `total`.
  double resummed = 0.0;
  for (const Piece& p : exhausted) resummed += p.value;
  while (!heap.empty()) {
    resummed += heap.top().value;
    heap.pop();
  }
  return resummed;
}

double invert_monotone(const std::function<double(double)>& F, double q, double lo,
                       double hi, std::span<const double> jumps) {
  if (lo > hi) throw InvalidInterval("invert_monotone: lo > hi");
  if (F(lo) >= q) return lo;
  if (F(hi) < q) {
    throw NotBracketed("invert_monotone: level " + std::to_string(q) +
                       " exceeds F(hi) = " + std::to_string(F(hi)));
  }
  // Invariant: F(lo) < q <= F(hi).
  const double tol = std::ldexp(hi - lo, -50);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (F(mid) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  double best = hi;
  for (double x : jumps) {
    if (x > lo && x < best && F(x) >= q) best = x;
  }
  return best;
}

}  // namespace bilateral

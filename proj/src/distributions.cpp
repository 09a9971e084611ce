#include "bilateral/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bilateral/errors.hpp"

namespace bilateral {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<Atom> merge_sorted(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.x < r.x; });
  std::vector<Atom> out;
  for (const Atom& a : atoms) {
    if (!out.empty() && out.back().x == a.x) {
      out.back().p += a.p;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- base

std::vector<double> Distribution::breakpoints() const {
  std::vector<double> out{support_lo()};
  for (const Atom& a : atoms()) out.push_back(a.x);
  if (std::isfinite(support_hi())) out.push_back(support_hi());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Distribution::expected_excess_above(double t) const {
  const double v = mean() - partial_expectation_below(t) - t * (1.0 - cdf(t));
  return std::max(v, 0.0);
}

double Distribution::expected_deficit_below(double t) const {
  const double v = t * cdf(t) - partial_expectation_below(t);
  return std::max(v, 0.0);
}

double Distribution::integration_hi(const QuadratureConfig& cfg) const {
  const double hi = support_hi();
  if (std::isfinite(hi)) return hi;
  return quantile(cfg.tail_quantile);
}

double Distribution::sample(Seed seed) const {
  Rng rng(seed);
  return sample(rng);
}

// ---------------------------------------------------------------- discrete

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("discrete distribution needs at least one atom");
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.x) || !std::isfinite(a.p)) {
      throw std::invalid_argument("discrete atom is not finite");
    }
  }
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& l, const Atom& r) { return l.x < r.x; });
  double cp = 0.0;
  double cpx = 0.0;
  cum_p_.reserve(atoms_.size());
  cum_px_.reserve(atoms_.size());
  for (const Atom& a : atoms_) {
    cp += a.p;
    cpx += a.p * a.x;
    cum_p_.push_back(cp);
    cum_px_.push_back(cpx);
  }
  mean_ = cpx;
}

double DiscreteDistribution::cdf(double x) const {
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                             [](double v, const Atom& a) { return v < a.x; });
  if (it == atoms_.begin()) return 0.0;
  return cum_p_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double DiscreteDistribution::prob_lt(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                             [](const Atom& a, double v) { return a.x < v; });
  if (it == atoms_.begin()) return 0.0;
  return cum_p_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double DiscreteDistribution::quantile(double q) const {
  if (q <= 0.0) return atoms_.front().x;
  // Rounding in the prefix sums must not push a level that sits exactly on a
  // cumulative boundary onto the next atom.
  const double level = q - 1e-13;
  auto it = std::lower_bound(cum_p_.begin(), cum_p_.end(), level);
  if (it == cum_p_.end()) return atoms_.back().x;
  return atoms_[static_cast<std::size_t>(it - cum_p_.begin())].x;
}

double DiscreteDistribution::partial_expectation_below(double t) const {
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                             [](double v, const Atom& a) { return v < a.x; });
  if (it == atoms_.begin()) return 0.0;
  return cum_px_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

// ---------------------------------------------------------------- uniform

UniformDistribution::UniformDistribution(double a, double b) : a_(a), b_(b) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b)) {
    throw std::invalid_argument("uniform needs finite a < b");
  }
}

double UniformDistribution::cdf(double x) const {
  if (x <= a_) return 0.0;
  if (x >= b_) return 1.0;
  return (x - a_) / (b_ - a_);
}

double UniformDistribution::quantile(double q) const {
  if (q <= 0.0) return a_;
  if (q >= 1.0) return b_;
  return a_ + q * (b_ - a_);
}

double UniformDistribution::partial_expectation_below(double t) const {
  if (t <= a_) return 0.0;
  const double u = std::min(t, b_);
  return (u - a_) * (u + a_) / (2.0 * (b_ - a_));
}

// ---------------------------------------------------------------- exponential

ExponentialDistribution::ExponentialDistribution(double rate) : rate_(rate) {
  if (!(std::isfinite(rate) && rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
}

double ExponentialDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-rate_ * x);
}

double ExponentialDistribution::quantile(double q) const {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return kInf;
  return -std::log1p(-q) / rate_;
}

double ExponentialDistribution::partial_expectation_below(double t) const {
  if (t <= 0.0) return 0.0;
  if (std::isinf(t)) return mean();
  const double u = rate_ * t;
  return (-std::expm1(-u) - u * std::exp(-u)) / rate_;
}

double ExponentialDistribution::support_hi() const { return kInf; }

// ---------------------------------------------------------------- power

PowerDistribution::PowerDistribution(double r) : r_(r) {
  if (!(std::isfinite(r) && r > 0.0)) throw std::invalid_argument("power exponent r must be > 0");
}

double PowerDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return std::pow(x, r_);
}

double PowerDistribution::quantile(double q) const {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  return std::pow(q, 1.0 / r_);
}

double PowerDistribution::partial_expectation_below(double t) const {
  if (t <= 0.0) return 0.0;
  const double u = std::min(t, 1.0);
  return r_ / (r_ + 1.0) * std::pow(u, r_ + 1.0);
}

// ---------------------------------------------------------------- mixture

MixtureDistribution::MixtureDistribution(std::vector<MixtureComponent> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("mixture needs at least one part");
  for (const auto& c : parts_) {
    if (!c.dist) throw std::invalid_argument("mixture part is null");
    if (!std::isfinite(c.weight)) throw std::invalid_argument("mixture weight is not finite");
  }
  for (const Atom& a : atoms()) jumps_.push_back(a.x);
}

double MixtureDistribution::cdf(double x) const {
  double s = 0.0;
  for (const auto& c : parts_) s += c.weight * c.dist->cdf(x);
  return s;
}

double MixtureDistribution::prob_lt(double x) const {
  double s = 0.0;
  for (const auto& c : parts_) s += c.weight * c.dist->prob_lt(x);
  return s;
}

double MixtureDistribution::quantile(double q) const {
  const double lo = support_lo();
  if (q <= 0.0) return lo;
  double hi = support_hi();
  if (std::isinf(hi)) {
    if (q >= 1.0) return kInf;
    hi = std::max(1.0, lo + 1.0);
    while (cdf(hi) < q) {
      hi *= 2.0;
      if (!std::isfinite(hi)) return kInf;
    }
  } else if (cdf(hi) < q) {
    // Weights summing to slightly under one.
    return hi;
  }
  return invert_monotone([this](double x) { return cdf(x); }, q, lo, hi, jumps_);
}

double MixtureDistribution::mean() const {
  double s = 0.0;
  for (const auto& c : parts_) s += c.weight * c.dist->mean();
  return s;
}

double MixtureDistribution::partial_expectation_below(double t) const {
  double s = 0.0;
  for (const auto& c : parts_) s += c.weight * c.dist->partial_expectation_below(t);
  return s;
}

double MixtureDistribution::support_lo() const {
  double lo = kInf;
  for (const auto& c : parts_) {
    if (c.weight > 0.0) lo = std::min(lo, c.dist->support_lo());
  }
  return std::isinf(lo) ? parts_.front().dist->support_lo() : lo;
}

double MixtureDistribution::support_hi() const {
  double hi = -kInf;
  for (const auto& c : parts_) {
    if (c.weight > 0.0) hi = std::max(hi, c.dist->support_hi());
  }
  return std::isinf(hi) && hi < 0 ? parts_.front().dist->support_hi() : hi;
}

std::vector<Atom> MixtureDistribution::atoms() const {
  std::vector<Atom> all;
  for (const auto& c : parts_) {
    for (Atom a : c.dist->atoms()) {
      a.p *= c.weight;
      all.push_back(a);
    }
  }
  return merge_sorted(std::move(all));
}

std::vector<double> MixtureDistribution::breakpoints() const {
  std::vector<double> out;
  for (const auto& c : parts_) {
    auto b = c.dist->breakpoints();
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool MixtureDistribution::is_discrete() const {
  return std::all_of(parts_.begin(), parts_.end(),
                     [](const MixtureComponent& c) { return c.dist->is_discrete(); });
}

// ---------------------------------------------------------------- truncation

TruncatedDistribution::TruncatedDistribution(DistPtr base, double cap)
    : base_(std::move(base)), cap_(cap) {
  if (!base_) throw std::invalid_argument("truncation base is null");
  if (!std::isfinite(cap)) throw std::invalid_argument("truncation cap must be finite");
}

double TruncatedDistribution::cdf(double x) const {
  return x < cap_ ? base_->cdf(x) : 1.0;
}

double TruncatedDistribution::prob_lt(double x) const {
  return x <= cap_ ? base_->prob_lt(x) : 1.0;
}

double TruncatedDistribution::quantile(double q) const {
  return std::min(base_->quantile(q), cap_);
}

double TruncatedDistribution::mean() const {
  return base_->partial_expectation_below(cap_) + cap_ * (1.0 - base_->cdf(cap_));
}

double TruncatedDistribution::partial_expectation_below(double t) const {
  return t < cap_ ? base_->partial_expectation_below(t) : mean();
}

double TruncatedDistribution::support_lo() const {
  return std::min(base_->support_lo(), cap_);
}

std::vector<Atom> TruncatedDistribution::atoms() const {
  std::vector<Atom> out;
  for (const Atom& a : base_->atoms()) {
    if (a.x < cap_) out.push_back(a);
  }
  const double top = 1.0 - base_->prob_lt(cap_);
  if (top > 0.0) out.push_back({cap_, top});
  return out;
}

std::vector<double> TruncatedDistribution::breakpoints() const {
  std::vector<double> out;
  for (double b : base_->breakpoints()) {
    if (b < cap_) out.push_back(b);
  }
  out.push_back(cap_);
  return out;
}

// ---------------------------------------------------------------- factories

DistPtr make_discrete(std::vector<Atom> atoms) {
  return std::make_shared<DiscreteDistribution>(std::move(atoms));
}
DistPtr point_mass(double x) { return make_discrete({{x, 1.0}}); }
DistPtr make_uniform(double a, double b) { return std::make_shared<UniformDistribution>(a, b); }
DistPtr make_exponential(double rate) { return std::make_shared<ExponentialDistribution>(rate); }
DistPtr make_power(double r) { return std::make_shared<PowerDistribution>(r); }
DistPtr make_mixture(std::vector<MixtureComponent> parts) {
  return std::make_shared<MixtureDistribution>(std::move(parts));
}
DistPtr make_truncated(DistPtr base, double cap) {
  return std::make_shared<TruncatedDistribution>(std::move(base), cap);
}

std::vector<Atom> discrete_atoms(const Distribution& d) {
  if (!d.is_discrete()) throw std::invalid_argument("distribution is not purely discrete");
  return merge_sorted(d.atoms());
}

double atom_aligned_mean(const Distribution& d) {
  double mu = d.mean();
  for (const Atom& a : d.atoms()) {
    if (std::abs(a.x - mu) <= 1e-12 * std::max(1.0, std::abs(a.x))) mu = a.x;
  }
  return mu;
}

double conditional_mean_below(const Distribution& d, double t) {
  const double p = d.prob_le(t);
  if (!(p > 0.0)) throw EmptyConditioning("P[S <= " + fmt(t) + "] = 0");
  return d.partial_expectation_below(t) / p;
}

// ---------------------------------------------------------------- validate

namespace {

void validate_into(const Distribution& d, const std::string& where, std::vector<Violation>& out) {
  auto add = [&](std::string code, std::string msg) {
    out.push_back({std::move(code), where.empty() ? msg : where + ": " + msg});
  };
  constexpr double kTol = 1e-12;
  const std::size_t before = out.size();
  const std::string prefix = where.empty() ? "" : where + "/";

  if (const auto* disc = dynamic_cast<const DiscreteDistribution*>(&d)) {
    const auto& atoms = disc->atom_list();
    double sum = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Atom& a = atoms[i];
      sum += a.p;
      if (!(a.p > 0.0 && a.p <= 1.0)) {
        add("atom-mass", "atom at " + fmt(a.x) + " has mass " + fmt(a.p) + " outside (0, 1]");
      }
      if (a.x < 0.0) add("negative-support", "atom at " + fmt(a.x) + " is negative");
      if (i > 0 && !(atoms[i - 1].x < a.x)) {
        add("atom-order", "atom locations are not strictly increasing at " + fmt(a.x));
      }
    }
    if (std::abs(sum - 1.0) > kTol) add("mass-sum", "atom masses sum to " + fmt(sum));
  } else if (const auto* mix = dynamic_cast<const MixtureDistribution*>(&d)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < mix->parts().size(); ++i) {
      const auto& c = mix->parts()[i];
      sum += c.weight;
      if (!(c.weight > 0.0)) add("mixture-weights", "part " + std::to_string(i) + " has weight " + fmt(c.weight));
      validate_into(*c.dist, prefix + "parts/" + std::to_string(i), out);
    }
    if (std::abs(sum - 1.0) > kTol) add("mixture-weights", "weights sum to " + fmt(sum));
  } else if (const auto* tr = dynamic_cast<const TruncatedDistribution*>(&d)) {
    if (tr->cap() < 0.0) add("negative-support", "cap " + fmt(tr->cap()) + " is negative");
    validate_into(*tr->base(), prefix + "dist", out);
  }
  // Structural problems make the grid checks below meaningless.
  if (out.size() > before) return;

  const double mu = d.mean();
  if (!(std::isfinite(mu) && mu > 0.0)) {
    add("mean", "mean " + fmt(mu) + " is not finite and positive");
  }
  if (d.support_lo() < 0.0 || d.cdf(-1e-9) > 0.0) {
    add("negative-support", "mass below zero");
  }

  const QuadratureConfig cfg;
  const double hi = d.integration_hi(cfg);
  std::vector<double> grid{-1.0, -1e-9, 0.0};
  constexpr int kGrid = 256;
  for (int i = 0; i <= kGrid; ++i) grid.push_back(hi * i / kGrid);
  const auto atoms = d.atoms();
  double atom_sum = 0.0;
  for (const Atom& a : atoms) {
    atom_sum += a.p;
    grid.push_back(a.x);
    grid.push_back(std::nextafter(a.x, -kInf));
    grid.push_back(std::nextafter(a.x, kInf));
    if (std::abs(d.mass_at(a.x) - a.p) > kTol) {
      add("atom-mass", "mass at " + fmt(a.x) + " is " + fmt(d.mass_at(a.x)) + ", atom list says " + fmt(a.p));
    }
  }
  if (atom_sum > 1.0 + kTol) add("atom-mass", "atom masses sum to " + fmt(atom_sum) + " > 1");
  std::sort(grid.begin(), grid.end());

  double prev = 0.0;
  bool monotone_reported = false;
  bool range_reported = false;
  for (double x : grid) {
    const double c = d.cdf(x);
    const double lt = d.prob_lt(x);
    if (!range_reported && (c < -kTol || c > 1.0 + kTol || lt > c + kTol)) {
      add("cdf-range", "cdf(" + fmt(x) + ") = " + fmt(c) + ", prob_lt = " + fmt(lt));
      range_reported = true;
    }
    if (!monotone_reported && c < prev - kTol) {
      add("nonmonotone-cdf", "cdf decreases at " + fmt(x));
      monotone_reported = true;
    }
    prev = std::max(prev, c);
  }

  if (std::isfinite(d.support_hi())) {
    if (std::abs(d.cdf(hi) - 1.0) > kTol) add("cdf-tail", "cdf(support_hi) = " + fmt(d.cdf(hi)));
  } else if (d.cdf(hi) < cfg.tail_quantile - kTol) {
    add("cdf-tail", "cdf does not reach the tail quantile at " + fmt(hi));
  }

  if (std::isfinite(mu)) {
    const double pe = d.partial_expectation_below(hi);
    if (std::abs(pe - mu) > 1e-9 * std::max(1.0, mu)) {
      add("partial-expectation", "E[S 1{S <= hi}] = " + fmt(pe) + " differs from mean " + fmt(mu));
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Distribution& d) {
  std::vector<Violation> out;
  validate_into(d, "", out);
  return out;
}

}  // namespace bilateral

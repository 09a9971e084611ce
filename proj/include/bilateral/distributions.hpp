#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bilateral/numerics.hpp"

namespace bilateral {

struct Atom {
  double x;
  double p;
  friend bool operator==(const Atom&, const Atom&) = default;
};

// A value distribution on the nonnegative reals. The CDF is the primitive:
// no family is required to have a density. All implementations are
// immutable and may be shared freely across threads.
class Distribution {
 public:
  virtual ~Distribution() = default;

  // P[S <= x], right-continuous.
  virtual double cdf(double x) const = 0;
  // P[S < x].
  virtual double prob_lt(double x) const = 0;
  // inf{x : cdf(x) >= q} for q in [0, 1]; quantile(0) is the support minimum.
  virtual double quantile(double q) const = 0;
  virtual double mean() const = 0;
  // E[S * 1{S <= t}].
  virtual double partial_expectation_below(double t) const = 0;
  virtual double support_lo() const = 0;
  // May be +infinity.
  virtual double support_hi() const = 0;
  // Point masses, sorted by location. Empty for continuous families.
  virtual std::vector<Atom> atoms() const = 0;
  // Every location where the CDF jumps or has a kink.
  virtual std::vector<double> breakpoints() const;
  // True when every query is a finite sum over atoms.
  virtual bool is_discrete() const { return false; }

  double prob_le(double x) const { return cdf(x); }
  double mass_at(double x) const { return cdf(x) - prob_lt(x); }

  // E[(S - t)_+] and E[(t - S)_+], from partial expectations.
  double expected_excess_above(double t) const;
  double expected_deficit_below(double t) const;

  // Upper end of the integration range: the support maximum, or the
  // tail-quantile cut for unbounded supports.
  double integration_hi(const QuadratureConfig& cfg) const;

  double sample(Rng& rng) const { return quantile(rng.uniform_open()); }
  double sample(Seed seed) const;
};

using DistPtr = std::shared_ptr<const Distribution>;

// Finite discrete distribution; every query is exact.
class DiscreteDistribution final : public Distribution {
 public:
  // Atoms are sorted by location. Masses are kept as given: use validate()
  // to check they form a probability distribution.
  explicit DiscreteDistribution(std::vector<Atom> atoms);

  double cdf(double x) const override;
  double prob_lt(double x) const override;
  double quantile(double q) const override;
  double mean() const override { return mean_; }
  double partial_expectation_below(double t) const override;
  double support_lo() const override { return atoms_.front().x; }
  double support_hi() const override { return atoms_.back().x; }
  std::vector<Atom> atoms() const override { return atoms_; }
  bool is_discrete() const override { return true; }

  const std::vector<Atom>& atom_list() const { return atoms_; }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cum_p_;   // sum of masses up to and including i
  std::vector<double> cum_px_;  // sum of x*p up to and including i
  double mean_ = 0.0;
};

class UniformDistribution final : public Distribution {
 public:
  UniformDistribution(double a, double b);

  double cdf(double x) const override;
  double prob_lt(double x) const override { return cdf(x); }
  double quantile(double q) const override;
  double mean() const override { return 0.5 * (a_ + b_); }
  double partial_expectation_below(double t) const override;
  double support_lo() const override { return a_; }
  double support_hi() const override { return b_; }
  std::vector<Atom> atoms() const override { return {}; }
  std::vector<double> breakpoints() const override { return {a_, b_}; }

  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_;
  double b_;
};

class ExponentialDistribution final : public Distribution {
 public:
  explicit ExponentialDistribution(double rate);

  double cdf(double x) const override;
  double prob_lt(double x) const override { return cdf(x); }
  double quantile(double q) const override;
  double mean() const override { return 1.0 / rate_; }
  double partial_expectation_below(double t) const override;
  double support_lo() const override { return 0.0; }
  double support_hi() const override;
  std::vector<Atom> atoms() const override { return {}; }
  std::vector<double> breakpoints() const override { return {0.0}; }

  double rate() const { return rate_; }

 private:
  double rate_;
};

// F(x) = min{x^r, 1} on [0, 1].
class PowerDistribution final : public Distribution {
 public:
  explicit PowerDistribution(double r);

  double cdf(double x) const override;
  double prob_lt(double x) const override { return cdf(x); }
  double quantile(double q) const override;
  double mean() const override { return r_ / (r_ + 1.0); }
  double partial_expectation_below(double t) const override;
  double support_lo() const override { return 0.0; }
  double support_hi() const override { return 1.0; }
  std::vector<Atom> atoms() const override { return {}; }
  std::vector<double> breakpoints() const override { return {0.0, 1.0}; }

  double exponent() const { return r_; }

 private:
  double r_;
};

struct MixtureComponent {
  double weight;
  DistPtr dist;
};

class MixtureDistribution final : public Distribution {
 public:
  explicit MixtureDistribution(std::vector<MixtureComponent> parts);

  double cdf(double x) const override;
  double prob_lt(double x) const override;
  double quantile(double q) const override;
  double mean() const override;
  double partial_expectation_below(double t) const override;
  double support_lo() const override;
  double support_hi() const override;
  std::vector<Atom> atoms() const override;
  std::vector<double> breakpoints() const override;
  bool is_discrete() const override;

  const std::vector<MixtureComponent>& parts() const { return parts_; }

 private:
  std::vector<MixtureComponent> parts_;
  std::vector<double> jumps_;
};

// All mass of `base` at or above `cap` is moved to an atom at `cap`.
class TruncatedDistribution final : public Distribution {
 public:
  TruncatedDistribution(DistPtr base, double cap);

  double cdf(double x) const override;
  double prob_lt(double x) const override;
  double quantile(double q) const override;
  double mean() const override;
  double partial_expectation_below(double t) const override;
  double support_lo() const override;
  double support_hi() const override { return cap_; }
  std::vector<Atom> atoms() const override;
  std::vector<double> breakpoints() const override;
  bool is_discrete() const override { return base_->is_discrete(); }

  const DistPtr& base() const { return base_; }
  double cap() const { return cap_; }

 private:
  DistPtr base_;
  double cap_;
};

DistPtr make_discrete(std::vector<Atom> atoms);
DistPtr point_mass(double x);
DistPtr make_uniform(double a, double b);
DistPtr make_exponential(double rate);
DistPtr make_power(double r);
DistPtr make_mixture(std::vector<MixtureComponent> parts);
DistPtr make_truncated(DistPtr base, double cap);

// Exact atom list for a distribution whose is_discrete() is true.
std::vector<Atom> discrete_atoms(const Distribution& d);

// The mean, moved onto an atom lying within 1e-12 relative of it. A summed
// mean can land one ulp below the atom it equals.
double atom_aligned_mean(const Distribution& d);

// E[S | S <= t]. Throws EmptyConditioning if P[S <= t] = 0.
double conditional_mean_below(const Distribution& d, double t);

struct Violation {
  std::string code;
  std::string message;
};

// Checks the distribution invariants on a grid plus every atom location.
// Empty result iff valid.
std::vector<Violation> validate(const Distribution& d);

}  // namespace bilateral

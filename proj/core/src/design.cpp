#include "cpsband/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cpsband/error.hpp"
#include "cpsband/inclusion_table.hpp"

namespace cpsband {

void PopulationFrame::validate() const {
  if (y.empty()) throw InvalidArgument("population must have at least one unit");
  if (y.size() != x.size()) {
    throw InvalidArgument("population y and x have different lengths");
  }
  for (double xi : x) {
    if (!(xi > 0.0) || !std::isfinite(xi)) {
      throw InvalidArgument("population sizes x must be finite and positive");
    }
  }
  for (double yi : y) {
    if (!std::isfinite(yi)) throw InvalidArgument("population y must be finite");
  }
}

bool PoissonParams::is_canonical(double tol) const {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  return std::abs(total - n) <= tol;
}

namespace {

double logistic(double l) {
  if (l >= 0.0) return 1.0 / (1.0 + std::exp(-l));
  const double e = std::exp(l);
  return e / (1.0 + e);
}

double logit(double p) {
  constexpr double kFloor = 1e-300;
  constexpr double kCeil = 1.0 - 1e-16;
  p = std::clamp(p, kFloor, kCeil);
  return std::log(p) - std::log1p(-p);
}

// Shift lambda with sum_i logistic(l_i + lambda) == target, 0 < target < |l|.
double canonical_shift(std::span<const double> logits, double target) {
  auto excess = [&](double shift, double* slope) {
    double total = 0.0, d = 0.0;
    for (double l : logits) {
      const double s = logistic(l + shift);
      total += s;
      d += s * (1.0 - s);
    }
    if (slope) *slope = d;
    return total - target;
  };

  double lo = -1.0, hi = 1.0;
  while (excess(lo, nullptr) > 0.0) lo *= 2.0;
  while (excess(hi, nullptr) < 0.0) hi *= 2.0;

  double shift = std::clamp(0.0, lo, hi);
  const double tol = 1e-14 * std::max(1.0, target);
  for (int iter = 0; iter < 200; ++iter) {
    double slope = 0.0;
    const double f = excess(shift, &slope);
    if (std::abs(f) <= tol) break;
    if (f > 0.0) {
      hi = shift;
    } else {
      lo = shift;
    }
    double step = slope > 0.0 ? shift - f / slope : 0.5 * (lo + hi);
    if (!(step > lo && step < hi)) step = 0.5 * (lo + hi);
    if (step == shift) break;
    shift = step;
  }
  return shift;
}

void check_poisson_params(const PoissonParams& params, const char* who) {
  if (params.p.empty()) {
    throw InvalidArgument(std::string(who) + ": empty parameter vector");
  }
  if (params.n < 0 || static_cast<std::size_t>(params.n) > params.p.size()) {
    throw InvalidArgument(std::string(who) + ": sample size outside [0, N]");
  }
  for (double p : params.p) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidArgument(std::string(who) + ": p must lie in (0, 1]");
    }
  }
}

}  // namespace

InclusionProbabilities compute_pips_probabilities(std::span<const double> x,
                                                  int n) {
  const std::size_t units = x.size();
  if (units == 0) throw InvalidArgument("compute_pips_probabilities: no units");
  if (n < 1 || static_cast<std::size_t>(n) > units) {
    throw InvalidArgument("compute_pips_probabilities: n outside [1, N]");
  }
  for (double xi : x) {
    if (!(xi > 0.0) || !std::isfinite(xi)) {
      throw InvalidArgument("compute_pips_probabilities: sizes must be positive");
    }
  }

  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  const double smallest = *std::min_element(x.begin(), x.end());
  auto expected_size = [&](double c) {
    double s = 0.0;
    for (double xi : x) s += std::min(c * xi / total, 1.0);
    return s;
  };

  // At hi every unit is clipped, so the expected size is N >= n.
  double lo = 0.0;
  double hi = total / smallest * n;
  double c = hi;
  for (int iter = 0; iter < 400; ++iter) {
    c = 0.5 * (lo + hi);
    const double g = expected_size(c);
    if (std::abs(g - n) < 1e-12) break;
    if (g < n) {
      lo = c;
    } else {
      hi = c;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }

  InclusionProbabilities out;
  out.n = n;
  out.pi.resize(units);
  for (std::size_t i = 0; i < units; ++i) {
    out.pi[i] = std::min(c * x[i] / total, 1.0);
  }
  return out;
}

InclusionProbabilities cps_inclusion_from_poisson(const PoissonParams& params) {
  check_poisson_params(params, "cps_inclusion_from_poisson");
  const std::size_t units = params.p.size();

  std::vector<std::size_t> free_units;
  std::vector<double> free_p;
  for (std::size_t i = 0; i < units; ++i) {
    if (params.p[i] < 1.0) {
      free_units.push_back(i);
      free_p.push_back(params.p[i]);
    }
  }
  const int certainties = static_cast<int>(units - free_units.size());
  if (params.n < certainties) {
    throw InvalidArgument(
        "cps_inclusion_from_poisson: n is smaller than the number of units "
        "with p == 1");
  }
  const int reduced = params.n - certainties;

  InclusionProbabilities out;
  out.n = params.n;
  out.pi.assign(units, 1.0);
  if (free_units.empty()) return out;

  std::vector<double> reduced_pi;
  if (reduced == 0) {
    reduced_pi.assign(free_units.size(), 0.0);
  } else if (static_cast<std::size_t>(reduced) == free_units.size()) {
    reduced_pi.assign(free_units.size(), 1.0);
  } else {
    reduced_pi = InclusionTable(free_p, reduced).first_order();
  }
  for (std::size_t k = 0; k < free_units.size(); ++k) {
    out.pi[free_units[k]] = reduced_pi[k];
  }
  return out;
}

CanonicalPoissonParams canonicalize(const PoissonParams& params) {
  check_poisson_params(params, "canonicalize");
  std::vector<double> logits;
  std::vector<std::size_t> free_units;
  for (std::size_t i = 0; i < params.p.size(); ++i) {
    if (params.p[i] < 1.0) {
      free_units.push_back(i);
      logits.push_back(logit(params.p[i]));
    }
  }
  const int certainties = static_cast<int>(params.p.size() - free_units.size());
  const int reduced = params.n - certainties;
  if (reduced < 0) {
    throw InvalidArgument("canonicalize: n is smaller than the number of certainties");
  }

  CanonicalPoissonParams out{params.p, params.n};
  if (free_units.empty()) return out;
  if (reduced == 0) {
    throw InvalidArgument(
        "canonicalize: no canonical representative with p > 0 when every "
        "slot is taken by certainties");
  }
  if (static_cast<std::size_t>(reduced) == free_units.size()) {
    for (std::size_t i : free_units) out.p[i] = 1.0;
    return out;
  }
  const double shift = canonical_shift(logits, reduced);
  for (std::size_t k = 0; k < free_units.size(); ++k) {
    out.p[free_units[k]] = logistic(logits[k] + shift);
  }
  return out;
}

CanonicalPoissonParams poisson_from_cps_inclusion(
    const InclusionProbabilities& target, const InversionOptions& options) {
  const std::size_t units = target.pi.size();
  if (units == 0) throw InvalidArgument("poisson_from_cps_inclusion: no units");
  if (target.n < 1 || static_cast<std::size_t>(target.n) > units) {
    throw InvalidArgument("poisson_from_cps_inclusion: n outside [1, N]");
  }
  double total = 0.0;
  for (double pi : target.pi) {
    if (!(pi > 0.0 && pi <= 1.0)) {
      throw InvalidArgument("poisson_from_cps_inclusion: pi must lie in (0, 1]");
    }
    total += pi;
  }
  if (std::abs(total - target.n) > 1e-9 * std::max(1, target.n)) {
    throw InvalidArgument("poisson_from_cps_inclusion: sum(pi) != n (got " +
                          std::to_string(total) + ")");
  }

  std::vector<std::size_t> free_units;
  std::vector<double> goal;
  for (std::size_t i = 0; i < units; ++i) {
    if (target.pi[i] < 1.0) {
      free_units.push_back(i);
      goal.push_back(target.pi[i]);
    }
  }
  CanonicalPoissonParams out;
  out.n = target.n;
  out.p.assign(units, 1.0);
  if (free_units.empty()) return out;

  const int reduced =
      target.n - static_cast<int>(units - free_units.size());
  if (reduced <= 0 || static_cast<std::size_t>(reduced) >= free_units.size()) {
    throw InvalidArgument("poisson_from_cps_inclusion: inconsistent certainties");
  }

  const std::size_t m = free_units.size();
  std::vector<double> goal_logit(m), logits(m), p(m);
  for (std::size_t k = 0; k < m; ++k) {
    goal_logit[k] = logit(goal[k]);
    logits[k] = goal_logit[k];
  }

  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double shift = canonical_shift(logits, reduced);
    for (std::size_t k = 0; k < m; ++k) {
      logits[k] += shift;
      p[k] = logistic(logits[k]);
    }
    const std::vector<double> current = InclusionTable(p, reduced).first_order();
    residual = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      residual = std::max(residual, std::abs(current[k] - goal[k]));
    }
    if (residual < options.tolerance) break;
    for (std::size_t k = 0; k < m; ++k) {
      logits[k] += options.damping * (goal_logit[k] - logit(current[k]));
    }
  }
  if (!(residual < options.tolerance)) {
    throw ConvergenceError(
        "poisson_from_cps_inclusion: no convergence, residual " +
            std::to_string(residual),
        residual, iter);
  }
  for (std::size_t k = 0; k < m; ++k) out.p[free_units[k]] = p[k];
  return out;
}

double solve_theta(double alpha, std::span<const double> w_samples) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("solve_theta: alpha must lie in (0, 1)");
  }
  if (w_samples.empty()) throw InvalidArgument("solve_theta: no weights");
  for (double w : w_samples) {
    if (!(w > 0.0)) throw InvalidArgument("solve_theta: weights must be positive");
  }
  const double count = static_cast<double>(w_samples.size());
  const double mean_w =
      std::accumulate(w_samples.begin(), w_samples.end(), 0.0) / count;
  const double smallest = *std::min_element(w_samples.begin(), w_samples.end());
  auto level = [&](double theta) {
    double s = 0.0;
    for (double w : w_samples) s += std::min(theta * w / mean_w, 1.0);
    return s / count;
  };

  double lo = 0.0;
  double hi = mean_w / smallest;  // every term is 1 here
  for (int iter = 0; iter < 400 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g = level(mid);
    if (std::abs(g - alpha) < 1e-15) return mid;
    if (g < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double truncated_weight(double w, double theta, double mean_w) {
  return std::min(w, mean_w / theta);
}

double design_variance_d(std::span<const double> p) {
  double d = 0.0;
  for (double pi : p) d += pi * (1.0 - pi);
  return d;
}

}  // namespace cpsband

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "brl/rng.hpp"
#include "brl/skeleton.hpp"

namespace brl::testutil {

// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double fp = f(x);
    x[i] = orig - step;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

inline bool grad_close(const std::vector<double>& analytic,
                       const std::vector<double>& numeric, double rel = 1e-5,
                       double abs_floor = 1e-7) {
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    const double scale =
        std::max({std::abs(analytic[i]), std::abs(numeric[i]), abs_floor / rel});
    if (diff > rel * scale) return false;
  }
  return true;
}

// Regularized incomplete gamma functions (series / continued fraction),
// for the chi-square survival function.
inline double gamma_p(double a, double x);

inline double gamma_q_cf(double a, double x) {
  const double eps = 1e-14;
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-14) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

// p-value of a chi-square statistic with the given degrees of freedom
inline double chi_square_pvalue(double stat, double dof) {
  if (stat <= 0.0) return 1.0;
  if (stat < dof + 1.0) return 1.0 - gamma_p(dof / 2.0, stat / 2.0);
  return gamma_q_cf(dof / 2.0, stat / 2.0);
}

inline SkeletonSequence random_sequence(std::size_t m, std::size_t t,
                                        std::size_t v, std::size_t c, Rng& rng,
                                        int label = 0) {
  SkeletonSequence seq(m, t, v, c, label);
  std::normal_distribution<double> d(0.0, 1.0);
  for (double& x : seq.data) x = d(rng);
  return seq;
}

// Random tree graph with a root self-loop and an arbitrary partition.
inline SkeletonGraph random_graph(std::size_t v, Rng& rng) {
  SkeletonGraph g;
  g.num_joints = v;
  g.parent.resize(v);
  g.parent[0] = 0;
  for (std::size_t j = 1; j < v; ++j) {
    std::uniform_int_distribution<std::size_t> d(0, j - 1);
    g.parent[j] = d(rng);
    g.edges.emplace_back(g.parent[j], j);
  }
  std::uniform_int_distribution<std::size_t> cut(1, v - 1);
  const std::size_t split = v > 1 ? cut(rng) : 1;
  for (std::size_t j = 0; j < v; ++j)
    (j < split ? g.lower : g.upper).push_back(j);
  if (g.upper.empty()) {
    g.upper.push_back(g.lower.back());
    g.lower.pop_back();
  }
  g.validate();
  return g;
}

}  // namespace brl::testutil

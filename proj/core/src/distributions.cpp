//
// Copyright 2026 The bnv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "bnv/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <boost/math/distributions/normal.hpp>

namespace bnv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double norm_Phi(double z) {
  if (z == kInf) return 1.0;
  if (z == -kInf) return 0.0;
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double norm_phi(double z) {
  if (std::isinf(z)) return 0.0;
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
  return std::exp(-0.5 * z * z) * kInvSqrt2Pi;
}

double z_phi(double z) {
  if (std::isinf(z)) return 0.0;  // z * phi(z) -> 0 in both tails
  return z * norm_phi(z);
}

void require(bool cond, const char* msg) {
  if (!cond) throw InvalidArgument(msg);
}

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double lm = a + 0.5 * (m - a);
  const double rm = m + 0.5 * (b - m);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature with absolute tolerance `tol`. Handles
// integrands with step discontinuities (bounded error via the depth cap).
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int depth = 48) {
  if (!(b > a)) return 0.0;
  const double m = a + 0.5 * (b - a);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, depth);
}

}  // namespace

struct Distribution::Node {
  Kind kind;
  std::string label;

  // gaussian
  double mu = 0.0, sigma = 1.0;
  // uniform
  double a = 0.0, b = 1.0;
  // exponential
  double lambda = 1.0;
  // two_point: value tp_b with probability tp_p, value tp_a otherwise.
  // `atoms` holds the induced (value, mass) pairs sorted by value, with
  // zero-mass entries dropped and equal values merged.
  double tp_a = 0.0, tp_b = 0.0, tp_p = 0.0;
  std::vector<std::pair<double, double>> atoms;
  // pareto
  double xm = 1.0, shape = 1.0;
  // mixture
  std::vector<std::pair<double, Distribution>> parts;
  // conditioned
  std::optional<Distribution> base;
  double lo_q = 0.0, hi_q = 1.0;
};

// --- Factories -------------------------------------------------------------

Distribution Distribution::gaussian(double mu, double sigma) {
  require(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0,
          "gaussian: sigma must be positive and parameters finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kGaussian;
  n->mu = mu;
  n->sigma = sigma;
  n->label = "gaussian(" + fmt(mu) + "," + fmt(sigma) + ")";
  return Distribution(std::move(n));
}

Distribution Distribution::uniform(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, "uniform: requires finite a < b");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kUniform;
  n->a = a;
  n->b = b;
  n->label = "uniform(" + fmt(a) + "," + fmt(b) + ")";
  return Distribution(std::move(n));
}

Distribution Distribution::exponential(double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "exponential: rate must be positive and finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kExponential;
  n->lambda = lambda;
  n->label = "exponential(" + fmt(lambda) + ")";
  return Distribution(std::move(n));
}

Distribution Distribution::two_point(double a, double b, double p) {
  require(std::isfinite(a) && std::isfinite(b), "two_point: values must be finite");
  require(p >= 0.0 && p <= 1.0, "two_point: p must lie in [0, 1]");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kTwoPoint;
  n->tp_a = a;
  n->tp_b = b;
  n->tp_p = p;
  if (a == b || p == 1.0 || p == 0.0) {
    n->atoms = {{p == 1.0 ? b : a, 1.0}};
  } else if (a < b) {
    n->atoms = {{a, 1.0 - p}, {b, p}};
  } else {
    n->atoms = {{b, p}, {a, 1.0 - p}};
  }
  if (n->atoms.size() == 1) {
    n->label = "point_mass(" + fmt(n->atoms.front().first) + ")";
  } else {
    n->label = "two_point(" + fmt(a) + "," + fmt(b) + "," + fmt(p) + ")";
  }
  return Distribution(std::move(n));
}

Distribution Distribution::shifted_bernoulli(double offset, double p) {
  require(std::isfinite(offset), "shifted_bernoulli: offset must be finite");
  return two_point(offset, offset + 1.0, p);
}

Distribution Distribution::point_mass(double a) { return two_point(a, a, 1.0); }

Distribution Distribution::pareto(double x_m, double a) {
  require(std::isfinite(x_m) && x_m > 0.0, "pareto: scale must be positive and finite");
  require(std::isfinite(a) && a > 0.0, "pareto: shape must be positive and finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kPareto;
  n->xm = x_m;
  n->shape = a;
  n->label = "pareto(" + fmt(x_m) + "," + fmt(a) + ")";
  return Distribution(std::move(n));
}

Distribution Distribution::mixture(std::vector<std::pair<double, Distribution>> parts) {
  require(!parts.empty(), "mixture: needs at least one component");
  double total = 0.0;
  for (const auto& [w, d] : parts) {
    require(std::isfinite(w) && w > 0.0, "mixture: weights must be positive and finite");
    total += w;
  }
  require(std::fabs(total - 1.0) <= 1e-9, "mixture: weights must sum to 1");
  std::string label = "mixture(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    parts[i].first /= total;
    if (i) label += "+";
    label += fmt(parts[i].first) + "*" + parts[i].second.name();
  }
  label += ")";
  auto n = std::make_shared<Node>();
  n->kind = Kind::kMixture;
  n->parts = std::move(parts);
  n->label = std::move(label);
  return Distribution(std::move(n));
}

Distribution Distribution::conditioned(Distribution base, double lo_q, double hi_q) {
  require(std::isfinite(lo_q) && std::isfinite(hi_q) && lo_q >= 0.0 && hi_q <= 1.0 && lo_q < hi_q,
          "conditioned: quantile bounds must satisfy 0 <= lo < hi <= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kConditioned;
  n->lo_q = lo_q;
  n->hi_q = hi_q;
  n->label = "conditioned(" + base.name() + "," + fmt(lo_q) + "," + fmt(hi_q) + ")";
  n->base = std::move(base);
  return Distribution(std::move(n));
}

Distribution::Kind Distribution::kind() const { return node_->kind; }

const std::string& Distribution::name() const { return node_->label; }

// --- CDF -------------------------------------------------------------------

double Distribution::cdf(double x) const {
  const Node& n = *node_;
  if (std::isnan(x)) throw InvalidArgument("cdf: x is NaN");
  switch (n.kind) {
    case Kind::kGaussian:
      return norm_Phi((x - n.mu) / n.sigma);
    case Kind::kUniform:
      if (x <= n.a) return 0.0;
      if (x >= n.b) return 1.0;
      return (x - n.a) / (n.b - n.a);
    case Kind::kExponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-n.lambda * x);
    case Kind::kTwoPoint: {
      double acc = 0.0;
      for (const auto& [v, m] : n.atoms) {
        if (v <= x) acc += m;
      }
      return acc;
    }
    case Kind::kPareto:
      return x <= n.xm ? 0.0 : 1.0 - std::pow(n.xm / x, n.shape);
    case Kind::kMixture: {
      double acc = 0.0;
      for (const auto& [w, d] : n.parts) acc += w * d.cdf(x);
      return acc;
    }
    case Kind::kConditioned: {
      const double f = std::clamp(n.base->cdf(x), n.lo_q, n.hi_q);
      return (f - n.lo_q) / (n.hi_q - n.lo_q);
    }
  }
  throw Error("cdf: unreachable");
}

double Distribution::cdf_left(double x) const {
  const Node& n = *node_;
  if (std::isnan(x)) throw InvalidArgument("cdf_left: x is NaN");
  switch (n.kind) {
    case Kind::kTwoPoint: {
      double acc = 0.0;
      for (const auto& [v, m] : n.atoms) {
        if (v < x) acc += m;
      }
      return acc;
    }
    case Kind::kMixture: {
      double acc = 0.0;
      for (const auto& [w, d] : n.parts) acc += w * d.cdf_left(x);
      return acc;
    }
    case Kind::kConditioned: {
      const double f = std::clamp(n.base->cdf_left(x), n.lo_q, n.hi_q);
      return (f - n.lo_q) / (n.hi_q - n.lo_q);
    }
    default:
      return cdf(x);  // continuous kinds
  }
}

double Distribution::atom(double x) const { return cdf(x) - cdf_left(x); }

// --- Quantile ---------------------------------------------------------------

namespace {

// Generalized inverse by bisection: returns the least x with F(x) >= p,
// resolved to adjacent doubles. Works across atoms and flat CDF stretches.
double bisect_quantile(const Distribution& d, double p, double lo_hint, double hi_hint) {
  double lo = lo_hint, hi = hi_hint;
  // Expand until F(lo) < p <= F(hi).
  int guard = 0;
  while (d.cdf(lo) >= p) {
    lo = lo * 2.0 - 1.0;
    if (++guard > 4100) throw Error("quantile: lower bracket expansion failed");
  }
  guard = 0;
  while (d.cdf(hi) < p) {
    hi = hi * 2.0 + 1.0;
    if (++guard > 4100) throw Error("quantile: upper bracket expansion failed");
  }
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo) || !(mid < hi)) break;
    if (d.cdf(mid) >= p) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

double Distribution::quantile(double p) const {
  const Node& n = *node_;
  if (!(p > 0.0) || p > 1.0 || std::isnan(p)) {
    throw InvalidQuantile("quantile: p must lie in (0, 1]");
  }
  if (p == 1.0) return support().second;
  switch (n.kind) {
    case Kind::kGaussian: {
      const boost::math::normal_distribution<double> nd(n.mu, n.sigma);
      return boost::math::quantile(nd, p);
    }
    case Kind::kUniform:
      return n.a + p * (n.b - n.a);
    case Kind::kExponential:
      return -std::log1p(-p) / n.lambda;
    case Kind::kTwoPoint: {
      double acc = 0.0;
      for (const auto& [v, m] : n.atoms) {
        acc += m;
        if (p <= acc) return v;
      }
      return n.atoms.back().first;
    }
    case Kind::kPareto:
      return n.xm * std::pow(1.0 - p, -1.0 / n.shape);
    case Kind::kMixture: {
      auto [slo, shi] = support();
      const double lo = std::isfinite(slo) ? slo - 1.0 : -1.0;
      const double hi = std::isfinite(shi) ? shi : 1.0;
      return bisect_quantile(*this, p, lo, hi);
    }
    case Kind::kConditioned:
      return n.base->quantile(n.lo_q + p * (n.hi_q - n.lo_q));
  }
  throw Error("quantile: unreachable");
}

// --- Sampling ---------------------------------------------------------------

double Distribution::sample(Rng& rng) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kGaussian: {
      std::normal_distribution<double> nd(n.mu, n.sigma);
      return nd(rng);
    }
    case Kind::kUniform: {
      std::uniform_real_distribution<double> ud(n.a, n.b);
      return ud(rng);
    }
    case Kind::kExponential: {
      std::exponential_distribution<double> ed(n.lambda);
      return ed(rng);
    }
    case Kind::kTwoPoint:
      return uniform_unit(rng) < n.tp_p ? n.tp_b : n.tp_a;
    case Kind::kPareto:
      return n.xm * std::pow(uniform_unit(rng), -1.0 / n.shape);
    case Kind::kMixture: {
      const double u = uniform_unit(rng);
      double acc = 0.0;
      for (const auto& [w, d] : n.parts) {
        acc += w;
        if (u < acc) return d.sample(rng);
      }
      return n.parts.back().second.sample(rng);
    }
    case Kind::kConditioned:
      return n.base->quantile(n.lo_q + uniform_unit(rng) * (n.hi_q - n.lo_q));
  }
  throw Error("sample: unreachable");
}

Dataset Distribution::sample_n(std::size_t count, Rng& rng) const {
  Dataset out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

// --- Support ----------------------------------------------------------------

std::pair<double, double> Distribution::support() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kGaussian:
      return {-kInf, kInf};
    case Kind::kUniform:
      return {n.a, n.b};
    case Kind::kExponential:
      return {0.0, kInf};
    case Kind::kTwoPoint:
      return {n.atoms.front().first, n.atoms.back().first};
    case Kind::kPareto:
      return {n.xm, kInf};
    case Kind::kMixture: {
      double lo = kInf, hi = -kInf;
      for (const auto& [w, d] : n.parts) {
        auto [l, h] = d.support();
        lo = std::min(lo, l);
        hi = std::max(hi, h);
      }
      return {lo, hi};
    }
    case Kind::kConditioned: {
      const double lo =
          n.lo_q > 0.0 ? n.base->quantile(n.lo_q) : n.base->support().first;
      const double hi = n.base->quantile(n.hi_q);  // hi_q == 1 handled inside
      return {lo, hi};
    }
  }
  throw Error("support: unreachable");
}

// --- Interval moments --------------------------------------------------------

PartialMoments Distribution::partial(double lo, double hi) const {
  const Node& n = *node_;
  if (std::isnan(lo) || std::isnan(hi)) throw InvalidArgument("partial: NaN endpoint");
  if (!(hi > lo)) return {};
  switch (n.kind) {
    case Kind::kGaussian: {
      const double alpha = (lo - n.mu) / n.sigma;
      const double beta = (hi - n.mu) / n.sigma;
      const double p = norm_Phi(beta) - norm_Phi(alpha);
      const double ez = norm_phi(alpha) - norm_phi(beta);
      const double ezz = p + z_phi(alpha) - z_phi(beta);
      PartialMoments out;
      out.prob = p;
      out.x = n.mu * p + n.sigma * ez;
      out.xx = n.mu * n.mu * p + 2.0 * n.mu * n.sigma * ez + n.sigma * n.sigma * ezz;
      return out;
    }
    case Kind::kUniform: {
      const double l = std::max(lo, n.a);
      const double h = std::min(hi, n.b);
      if (!(h > l)) return {};
      const double inv = 1.0 / (n.b - n.a);
      PartialMoments out;
      out.prob = (h - l) * inv;
      out.x = 0.5 * (h * h - l * l) * inv;
      out.xx = (h * h * h - l * l * l) / 3.0 * inv;
      return out;
    }
    case Kind::kExponential: {
      const double l = std::max(lo, 0.0);
      const double h = hi;
      if (!(h > l)) return {};
      const double il = 1.0 / n.lambda;
      const double el = std::exp(-n.lambda * l);
      const double eh = std::isinf(h) ? 0.0 : std::exp(-n.lambda * h);
      PartialMoments out;
      out.prob = el - eh;
      out.x = (l + il) * el - (std::isinf(h) ? 0.0 : (h + il) * eh);
      out.xx = (l * l + 2.0 * l * il + 2.0 * il * il) * el -
               (std::isinf(h) ? 0.0 : (h * h + 2.0 * h * il + 2.0 * il * il) * eh);
      return out;
    }
    case Kind::kTwoPoint: {
      PartialMoments out;
      for (const auto& [v, m] : n.atoms) {
        if (v > lo && v <= hi) {
          out.prob += m;
          out.x += m * v;
          out.xx += m * v * v;
        }
      }
      return out;
    }
    case Kind::kPareto: {
      const double l = std::max(lo, n.xm);
      const double h = hi;
      if (!(h > l)) return {};
      const double a = n.shape;
      const double xa = std::pow(n.xm, a);
      PartialMoments out;
      out.prob = xa * (std::pow(l, -a) - (std::isinf(h) ? 0.0 : std::pow(h, -a)));
      if (std::isinf(h) && a <= 1.0) {
        out.x = kInf;
      } else if (a == 1.0) {
        out.x = n.xm * std::log(h / l);
      } else {
        out.x = a * xa * (std::pow(l, 1.0 - a) - (std::isinf(h) ? 0.0 : std::pow(h, 1.0 - a))) /
                (a - 1.0);
      }
      if (std::isinf(h) && a <= 2.0) {
        out.xx = kInf;
      } else if (a == 2.0) {
        out.xx = 2.0 * n.xm * n.xm * std::log(h / l);
      } else {
        out.xx = a * xa *
                 (std::pow(l, 2.0 - a) - (std::isinf(h) ? 0.0 : std::pow(h, 2.0 - a))) /
                 (a - 2.0);
      }
      return out;
    }
    case Kind::kMixture: {
      PartialMoments out;
      for (const auto& [w, d] : n.parts) {
        const PartialMoments p = d.partial(lo, hi);
        out.prob += w * p.prob;
        out.x += w * p.x;
        out.xx += w * p.xx;
      }
      return out;
    }
    case Kind::kConditioned: {
      // With F the base CDF and Q its generalized inverse, the conditioned
      // law is the image of Uniform(l, h) under Q; for any 0 <= A < B <= 1,
      //   Integral_A^B g(Q(u)) du
      //     = E_base[g(X); (Q(A), Q(B)]] + g(Q(A))(F(Q(A)) - A)
      //                                  - g(Q(B))(F(Q(B)) - B),
      // which clips the atoms straddling the cut points exactly.
      const Distribution& base = *n.base;
      const double span = n.hi_q - n.lo_q;
      const double A = std::max(base.cdf(lo), n.lo_q);
      const double B = std::min(std::isinf(hi) ? 1.0 : base.cdf(hi), n.hi_q);
      if (!(B > A)) return {};
      const bool clip_lo = A > 0.0;
      const bool clip_hi = B < 1.0;
      const double zA = clip_lo ? base.quantile(A) : -kInf;
      const double zB = clip_hi ? base.quantile(B) : kInf;
      PartialMoments bp = base.partial(zA, zB);
      double dp = bp.prob, dx = bp.x, dxx = bp.xx;
      if (clip_lo) {
        const double excess = base.cdf(zA) - A;
        dp += excess;
        dx += zA * excess;
        dxx += zA * zA * excess;
      }
      if (clip_hi) {
        const double excess = base.cdf(zB) - B;
        dp -= excess;
        dx -= zB * excess;
        dxx -= zB * zB * excess;
      }
      PartialMoments out;
      out.prob = (B - A) / span;  // exact; dp agrees up to rounding
      out.x = dx / span;
      out.xx = dxx / span;
      (void)dp;
      return out;
    }
  }
  throw Error("partial: unreachable");
}

double Distribution::mean() const { return partial(-kInf, kInf).x; }

double Distribution::variance() const {
  const PartialMoments t = partial(-kInf, kInf);
  if (!std::isfinite(t.xx)) return kInf;
  return std::max(0.0, t.xx - t.x * t.x);
}

double Distribution::abs_moment_about(double c) const {
  const PartialMoments total = partial(-kInf, kInf);
  if (!std::isfinite(total.x)) return kInf;
  const PartialMoments left = partial(-kInf, c);
  const double below = c * left.prob - left.x;
  const double above = (total.x - left.x) - c * (total.prob - left.prob);
  return below + above;
}

// --- Normalized variance ------------------------------------------------------

BoundednessReport normalized_variance(const Distribution& d) {
  const PartialMoments total = d.partial(-kInf, kInf);
  if (!std::isfinite(total.x) || !std::isfinite(total.xx)) {
    throw InfiniteMoment("normalized_variance: distribution lacks a finite second moment");
  }
  const double mu = total.x;
  const double var = std::max(0.0, total.xx - mu * mu);
  const double first = d.abs_moment_about(mu);

  BoundednessReport r;
  r.first_moment = first;
  r.second_moment = var;
  r.method = "closed-form";
  if (first == 0.0) {
    r.degenerate = true;
    r.c_value = 1.0;
    r.error_bound = 0.0;
    return r;
  }
  const double c = var / (first * first);
  BNV_CHECK(c >= 1.0 - 1e-9, "normalized variance fell below 1 beyond rounding");
  r.c_value = std::max(1.0, c);
  r.error_bound = 1e-9 * std::max(1.0, r.c_value);
  return r;
}

// --- Hard instance -------------------------------------------------------------

Distribution hard_instance(const Distribution& core) {
  if (core.cdf_left(-0.5) != 0.0 || core.cdf_left(0.5) != 1.0) {
    throw InvalidArgument("hard_instance: core must be supported inside [-1/2, 1/2)");
  }
  return Distribution::mixture({{0.25, Distribution::point_mass(-1.0)},
                                {0.25, Distribution::point_mass(1.0)},
                                {0.5, core}});
}

// --- Pairwise difference Q = |X - X'| --------------------------------------------

namespace {

// P[|X1 - X2| <= q] for independent X1 ~ d1, X2 ~ d2.
double cross_q_cdf(const Distribution& d1, const Distribution& d2, double q);

// E|X1 - X2| for independent X1 ~ d1, X2 ~ d2, by quadrature of
// P[min <= t < max] = F1(t)(1 - F2(t)) + F2(t)(1 - F1(t)) with exact tail
// corrections from interval moments.
double generic_cross_q_mean(const Distribution& d1, const Distribution& d2) {
  const auto endpoints = [](const Distribution& d, bool upper) {
    auto [lo, hi] = d.support();
    if (upper) return std::isfinite(hi) ? hi : d.quantile(1.0 - 1e-13);
    return std::isfinite(lo) ? lo : d.quantile(1e-13);
  };
  const double s = std::min(endpoints(d1, false), endpoints(d2, false));
  const double t = std::max(endpoints(d1, true), endpoints(d2, true));
  if (!(t > s)) return 0.0;

  const auto h = [&](double u) {
    const double f1 = d1.cdf(u);
    const double f2 = d2.cdf(u);
    return f1 * (1.0 - f2) + f2 * (1.0 - f1);
  };
  const double tol = 1e-10 * std::max(1.0, t - s);
  double total = adaptive_simpson(h, s, t, tol);

  // Exact-in-the-limit tail corrections: beyond t the integrand is
  // (1 - F1) + (1 - F2) up to a factor >= 1 - 1e-13, and the integrals of the
  // survival functions are E[(X - t)+]; symmetrically below s.
  const auto upper_excess = [&](const Distribution& d) {
    const PartialMoments all = d.partial(-kInf, kInf);
    const PartialMoments le = d.partial(-kInf, t);
    return (all.x - le.x) - t * (all.prob - le.prob);
  };
  const auto lower_excess = [&](const Distribution& d) {
    const PartialMoments le = d.partial(-kInf, s);
    return s * le.prob - le.x;
  };
  total += upper_excess(d1) + upper_excess(d2) + lower_excess(d1) + lower_excess(d2);
  return total;
}

double cross_q_mean(const Distribution& d1, const Distribution& d2) {
  // Atom side: E|X - v| is a closed-form interval-moment query.
  if (d1.kind() == Distribution::Kind::kTwoPoint || d2.kind() == Distribution::Kind::kTwoPoint) {
    const Distribution& atoms = d1.kind() == Distribution::Kind::kTwoPoint ? d1 : d2;
    const Distribution& other = d1.kind() == Distribution::Kind::kTwoPoint ? d2 : d1;
    double acc = 0.0;
    const auto [lo, hi] = atoms.support();
    double seen = -kInf;
    for (double v : {lo, hi}) {
      if (v == seen) continue;
      seen = v;
      const double m = atoms.atom(v);
      if (m > 0.0) acc += m * other.abs_moment_about(v);
    }
    return acc;
  }
  if (d1.kind() == Distribution::Kind::kGaussian && d2.kind() == Distribution::Kind::kGaussian) {
    // X1 - X2 is normal; the folded-normal mean is closed form.
    const double m = d1.mean() - d2.mean();
    const double s = std::sqrt(d1.variance() + d2.variance());
    static const double kSqrt2OverPi = std::sqrt(2.0 / std::acos(-1.0));
    return s * kSqrt2OverPi * std::exp(-0.5 * m * m / (s * s)) +
           m * std::erf(m / (s * std::sqrt(2.0)));
  }
  return generic_cross_q_mean(d1, d2);
}

// P[|X1 - X2| <= q] via the quantile transform of d1:
//   Integral_0^1 [F2(Q1(u) + q) - F2^-(Q1(u) - q)] du.
double generic_cross_q_cdf(const Distribution& d1, const Distribution& d2, double q) {
  const double u0 = 1e-12;
  const auto f = [&](double u) {
    const double x = d1.quantile(u);
    return d2.cdf(x + q) - d2.cdf_left(x - q);
  };
  return adaptive_simpson(f, u0, 1.0 - u0, 1e-10);
}

double cross_q_cdf(const Distribution& d1, const Distribution& d2, double q) {
  if (std::isnan(q)) throw InvalidArgument("q_cdf: q is NaN");
  if (q < 0.0) return 0.0;
  if (d1.kind() == Distribution::Kind::kTwoPoint || d2.kind() == Distribution::Kind::kTwoPoint) {
    const Distribution& atoms = d1.kind() == Distribution::Kind::kTwoPoint ? d1 : d2;
    const Distribution& other = d1.kind() == Distribution::Kind::kTwoPoint ? d2 : d1;
    double acc = 0.0;
    const auto [lo, hi] = atoms.support();
    double seen = -kInf;
    for (double v : {lo, hi}) {
      if (v == seen) continue;
      seen = v;
      const double m = atoms.atom(v);
      if (m > 0.0) acc += m * (other.cdf(v + q) - other.cdf_left(v - q));
    }
    return acc;
  }
  if (d1.kind() == Distribution::Kind::kGaussian && d2.kind() == Distribution::Kind::kGaussian) {
    const double m = d1.mean() - d2.mean();
    const double s = std::sqrt(d1.variance() + d2.variance());
    return norm_Phi((q - m) / s) - norm_Phi((-q - m) / s);
  }
  // Prefer integrating over the side with the cheaper quantile.
  const bool d1_cheap = d1.kind() != Distribution::Kind::kMixture;
  return d1_cheap ? generic_cross_q_cdf(d1, d2, q) : generic_cross_q_cdf(d2, d1, q);
}

}  // namespace

double q_cdf(const Distribution& d, double q) {
  if (std::isnan(q)) throw InvalidArgument("q_cdf: q is NaN");
  if (q < 0.0) return 0.0;
  const Distribution::Node& n = *d.node_;
  switch (n.kind) {
    case Distribution::Kind::kGaussian:
      return std::erf(q / (2.0 * n.sigma));
    case Distribution::Kind::kUniform: {
      const double r = n.b - n.a;
      if (q >= r) return 1.0;
      const double s = 1.0 - q / r;
      return 1.0 - s * s;
    }
    case Distribution::Kind::kExponential:
      return -std::expm1(-n.lambda * q);
    case Distribution::Kind::kTwoPoint:
      return cross_q_cdf(d, d, q);
    case Distribution::Kind::kMixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n.parts.size(); ++i) {
        acc += n.parts[i].first * n.parts[i].first * q_cdf(n.parts[i].second, q);
        for (std::size_t j = i + 1; j < n.parts.size(); ++j) {
          acc += 2.0 * n.parts[i].first * n.parts[j].first *
                 cross_q_cdf(n.parts[i].second, n.parts[j].second, q);
        }
      }
      return acc;
    }
    case Distribution::Kind::kPareto:
    case Distribution::Kind::kConditioned:
      return cross_q_cdf(d, d, q);
  }
  throw Error("q_cdf: unreachable");
}

double q_mean(const Distribution& d) {
  const Distribution::Node& n = *d.node_;
  switch (n.kind) {
    case Distribution::Kind::kGaussian: {
      static const double kTwoOverSqrtPi = 2.0 / std::sqrt(std::acos(-1.0));
      return n.sigma * kTwoOverSqrtPi;
    }
    case Distribution::Kind::kUniform:
      return (n.b - n.a) / 3.0;
    case Distribution::Kind::kExponential:
      return 1.0 / n.lambda;
    case Distribution::Kind::kTwoPoint: {
      double acc = 0.0;
      for (const auto& [v1, m1] : n.atoms) {
        for (const auto& [v2, m2] : n.atoms) {
          acc += m1 * m2 * std::fabs(v1 - v2);
        }
      }
      return acc;
    }
    case Distribution::Kind::kPareto: {
      if (n.shape <= 1.0) return kInf;
      return 2.0 * n.xm * n.shape / ((n.shape - 1.0) * (2.0 * n.shape - 1.0));
    }
    case Distribution::Kind::kMixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n.parts.size(); ++i) {
        acc += n.parts[i].first * n.parts[i].first * q_mean(n.parts[i].second);
        for (std::size_t j = i + 1; j < n.parts.size(); ++j) {
          acc += 2.0 * n.parts[i].first * n.parts[j].first *
                 cross_q_mean(n.parts[i].second, n.parts[j].second);
        }
      }
      return acc;
    }
    case Distribution::Kind::kConditioned:
      return generic_cross_q_mean(d, d);
  }
  throw Error("q_mean: unreachable");
}

std::vector<std::string> distribution_catalog() {
  return {
      R"(gaussian            {"kind":"gaussian","mu":0,"sigma":1}             normal with mean mu, stddev sigma)",
      R"(uniform             {"kind":"uniform","a":0,"b":1}                   uniform on [a, b])",
      R"(exponential         {"kind":"exponential","lambda":1}                rate-lambda exponential on [0, inf))",
      R"(two_point           {"kind":"two_point","a":0,"b":1,"p":0.5}         value b with prob p, else a)",
      R"(shifted_bernoulli   {"kind":"shifted_bernoulli","offset":0,"p":0.5}  two_point(offset, offset+1, p))",
      R"(point_mass          {"kind":"point_mass","at":0}                     degenerate distribution at a point)",
      R"(pareto              {"kind":"pareto","x_m":1,"a":3}                  heavy tail F(x)=1-(x_m/x)^a; finite C needs a>2)",
      R"(mixture             {"kind":"mixture","parts":[{"weight":0.5,"dist":{...}},...]}  weighted mixture, weights sum to 1)",
      R"(conditioned         {"kind":"conditioned","base":{...},"lo_q":0.25,"hi_q":0.75}   base between its lo_q-/hi_q-quantiles)",
      R"(hard_gadget         {"kind":"hard_gadget","core":{...}}              1/4 at -1, 1/4 at +1, 1/2 core in [-1/2,1/2))",
  };
}

}  // namespace bnv

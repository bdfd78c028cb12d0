#pragma once

// The family f_{a,t}: the restriction to the unit circle of
// J_{a,t}(z) = exp(2 pi i t) z^2 (z + a)/(a z + 1), in the angle coordinate.
//
// On |z| = 1 we have a z + 1 = z conj(z + a), so J_{a,0}(z) = z (z+a)/conj(z+a)
// and the lift is
//   lift(x) = x + t + atan2(sin 2 pi x, a + cos 2 pi x) / pi.
// Re(z + a) >= a - 1 > 0, so the atan2 never leaves (-pi/2, pi/2) and no
// branch tracking is needed. lift(0) = t, lift(x + 1) = lift(x) + 1.
//
// t is kept unreduced: the rotation number of this lift is a continuous,
// nondecreasing function of t on the whole line with F(t + 1) = F(t) + 1.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include "rotacalc/errors.hpp"
#include "rotacalc/real.hpp"

namespace rotacalc {

// Closed forms with c = cos 2 pi x, s = sin 2 pi x.
inline double derivative_from_cos(double a, double c) {
  return (a * a + 4 * a * c + 3) / (a * a + 2 * a * c + 1);
}

// D log Df = -2 pi s (4a/(a^2 + 4ac + 3) - 2a/(a^2 + 2ac + 1)).
inline double dlog_derivative_from_cs(double a, double c, double s) {
  const double pi = 3.14159265358979323846;
  return -2 * pi * s * (4 * a / (a * a + 4 * a * c + 3) - 2 * a / (a * a + 2 * a * c + 1));
}

// max_x |D log Df_{a,0}(x)| by a dense scan refined around the best node.
double dlog_derivative_sup(double a);

template <class Real>
struct MapParams {
  Real a;
  Real t;

  void validate() const {
    using std::isfinite;
    using boost::multiprecision::isfinite;
    if (!isfinite(a) || !isfinite(t)) throw DomainError("map parameters must be finite");
    if (!(a > 3)) throw DomainError("the family requires a > 3 (Df vanishes at a = 3)");
  }

  // t in [0, 1).
  Real reduced_t() const {
    using std::floor;
    using boost::multiprecision::floor;
    return t - floor(t);
  }
};

template <class Real>
class BlaschkeFamily {
 public:
  using real_type = Real;

  explicit BlaschkeFamily(MapParams<Real> params) : params_(std::move(params)) {
    using std::cos;
    using std::sin;
    using std::asin;
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    using boost::multiprecision::asin;
    params_.validate();
    pi_ = pi_value<Real>();
    const Real angle = 2 * pi_ * params_.reduced_t();
    rot_c_ = cos(angle);
    rot_s_ = sin(angle);
    a_double_ = to_double(params_.a);
    t_double_ = to_double(params_.t);
    max_offset_ = asin(Real(1) / params_.a) / pi_;
  }
  BlaschkeFamily(Real a, Real t) : BlaschkeFamily(MapParams<Real>{std::move(a), std::move(t)}) {}

  const MapParams<Real>& params() const { return params_; }
  const Real& a() const { return params_.a; }
  const Real& t() const { return params_.t; }
  double a_double() const { return a_double_; }
  double t_double() const { return t_double_; }
  const Real& pi() const { return pi_; }
  const Real& rotation_cos() const { return rot_c_; }
  const Real& rotation_sin() const { return rot_s_; }
  // sup |lift(x) - x - t| = asin(1/a)/pi.
  const Real& max_offset() const { return max_offset_; }

  BlaschkeFamily with_t(const Real& t) const { return BlaschkeFamily(MapParams<Real>{params_.a, t}); }

  Real lift(const Real& x) const {
    using std::atan2;
    using std::cos;
    using std::sin;
    using boost::multiprecision::atan2;
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    const Real angle = 2 * pi_ * x;
    return x + params_.t + atan2(sin(angle), params_.a + cos(angle)) / pi_;
  }

  Real derivative(const Real& x) const {
    using std::cos;
    using boost::multiprecision::cos;
    const Real c = cos(2 * pi_ * x);
    const Real& a = params_.a;
    return (a * a + 4 * a * c + 3) / (a * a + 2 * a * c + 1);
  }

  Real dlog_derivative(const Real& x) const {
    using std::cos;
    using std::sin;
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    const Real angle = 2 * pi_ * x;
    const Real c = cos(angle);
    const Real s = sin(angle);
    const Real& a = params_.a;
    return -2 * pi_ * s * (4 * a / (a * a + 4 * a * c + 3) - 2 * a / (a * a + 2 * a * c + 1));
  }

  // Solves lift(x) = y. The lift is increasing with lift(x) - x - t within
  // max_offset, so [y - t - h, y - t + h] brackets the root; Newton steps
  // that leave the bracket fall back to bisection.
  Real inverse_lift(const Real& y) const {
    using std::abs;
    using boost::multiprecision::abs;
    const Real slack = max_offset_ * Real(1.0001) + Real(1e-12);
    Real lo = y - params_.t - slack;
    Real hi = y - params_.t + slack;
    Real x = y - params_.t;
    const Real tolerance = 8 * unit_roundoff<Real>() * (1 + abs(y));
    for (int iteration = 0; iteration < 400; ++iteration) {
      const Real residual = lift(x) - y;
      if (residual > 0) hi = x;
      else lo = x;
      if (hi - lo <= tolerance || residual == 0) return x;
      Real next = x - residual / derivative(x);
      if (!(next > lo && next < hi)) next = (lo + hi) / 2;
      if (abs(next - x) <= tolerance) return next;
      x = next;
    }
    throw DomainError("inverse lift did not converge; bracket width " + format_real(Real(hi - lo), 6));
  }

 private:
  MapParams<Real> params_;
  Real pi_;
  Real rot_c_;
  Real rot_s_;
  Real max_offset_;
  double a_double_ = 0;
  double t_double_ = 0;
};

template <class M>
concept CircleMap = requires(const M& map, const typename M::real_type& x) {
  { map.lift(x) } -> std::convertible_to<typename M::real_type>;
  { map.derivative(x) } -> std::convertible_to<typename M::real_type>;
  { map.inverse_lift(x) } -> std::convertible_to<typename M::real_type>;
};

// Forward orbit of one point, stepped on the unit circle without trig:
// with w = z + a, one step is z <- exp(2 pi i t) z w^2 / |w|^2. A double
// shadow of the lifted displacement supplies the integer part, the angle of
// z_n conj(z_0) the exact fractional part. Alongside it tracks
// log Df^n(x0) and, on request, D log Df^n(x0) = sum_i DlogDf(x_i) Df^i(x0)
// in double, and Df^n(x0) in Real.
template <class Real>
class LiftOrbit {
 public:
  struct Options {
    bool track_slope = false;
    bool track_real_derivative = false;
  };

  LiftOrbit(const BlaschkeFamily<Real>& map, const Real& x0, Options options = {})
      : map_(&map), options_(options), x0_(x0) {
    using std::cos;
    using std::sin;
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    const Real angle = 2 * map.pi() * x0;
    c0_ = cos(angle);
    s0_ = sin(angle);
    c_ = c0_;
    s_ = s0_;
    real_derivative_ = 1;
  }

  void step() {
    const Real& a = map_->a();
    const double ad = map_->a_double();
    const double cd = to_double(c_);
    const double sd = to_double(s_);
    const double n2d = ad * ad + 2 * ad * cd + 1;
    const double df = (ad * ad + 4 * ad * cd + 3) / n2d;
    if (options_.track_slope) slope_ += dlog_derivative_from_cs(ad, cd, sd) * std::exp(log_derivative_);
    log_derivative_ += std::log(df);
    shadow_ += map_->t_double() + std::atan2(sd, cd + ad) / 3.14159265358979323846;

    const Real w_re = c_ + a;
    const Real& w_im = s_;
    const Real n2 = w_re * w_re + w_im * w_im;
    if (options_.track_real_derivative) {
      real_derivative_ *= (a * a + 4 * a * c_ + 3) / n2;
    }
    const Real w2_re = w_re * w_re - w_im * w_im;
    const Real w2_im = 2 * w_re * w_im;
    const Real u_re = c_ * w2_re - s_ * w2_im;
    const Real u_im = c_ * w2_im + s_ * w2_re;
    c_ = (map_->rotation_cos() * u_re - map_->rotation_sin() * u_im) / n2;
    s_ = (map_->rotation_cos() * u_im + map_->rotation_sin() * u_re) / n2;
    if ((++steps_ & 15U) == 0) renormalize();
  }

  void advance(std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) step();
  }

  std::uint64_t steps() const { return steps_; }
  const Real& start() const { return x0_; }

  // lift^n(x0) - x0.
  Real displacement() const {
    using std::atan2;
    using boost::multiprecision::atan2;
    const Real fraction = atan2(s_ * c0_ - c_ * s0_, c_ * c0_ + s_ * s0_) / (2 * map_->pi());
    const double whole = std::nearbyint(shadow_ - to_double(fraction));
    return Real(whole) + fraction;
  }
  double displacement_estimate() const { return shadow_; }
  Real position() const { return x0_ + displacement(); }

  double log_derivative() const { return log_derivative_; }
  double slope() const { return slope_; }
  const Real& real_derivative() const { return real_derivative_; }
  const Real& cos_angle() const { return c_; }
  const Real& sin_angle() const { return s_; }

 private:
  void renormalize() {
    using std::sqrt;
    using boost::multiprecision::sqrt;
    const Real r = sqrt(c_ * c_ + s_ * s_);
    c_ /= r;
    s_ /= r;
  }

  const BlaschkeFamily<Real>* map_;
  Options options_;
  Real x0_;
  Real c0_, s0_, c_, s_;
  Real real_derivative_;
  double shadow_ = 0;
  double log_derivative_ = 0;
  double slope_ = 0;
  std::uint64_t steps_ = 0;
};

// points[i] = f^{+-i}(x0) mod 1, lifted[i] the lifted position, and
// log_deriv[i] = log Df^{+-i}(x0).
template <class Real>
struct OrbitRecord {
  std::vector<Real> points;
  std::vector<Real> lifted;
  std::vector<double> log_deriv;
};

template <CircleMap M>
OrbitRecord<typename M::real_type> iterate(const M& map, const typename M::real_type& x0, std::int64_t n,
                                          std::int64_t budget = 10'000'000) {
  using Real = typename M::real_type;
  using std::floor;
  using std::log;
  using boost::multiprecision::floor;
  using boost::multiprecision::log;
  if (n > budget || -n > budget) throw DomainError("iteration count exceeds the budget");
  OrbitRecord<Real> record;
  const std::size_t count = static_cast<std::size_t>(n < 0 ? -n : n);
  record.points.reserve(count + 1);
  record.lifted.reserve(count + 1);
  record.log_deriv.reserve(count + 1);
  Real x = x0;
  double sum = 0;
  auto push = [&] {
    record.lifted.push_back(x);
    record.points.push_back(x - floor(x));
    record.log_deriv.push_back(sum);
  };
  push();
  for (std::size_t i = 0; i < count; ++i) {
    if (n > 0) {
      sum += to_double(log(map.derivative(x)));
      x = map.lift(x);
    } else {
      // Df^{-k}(x0) = 1 / Df^k(f^{-k} x0).
      x = map.inverse_lift(x);
      sum -= to_double(log(map.derivative(x)));
    }
    push();
  }
  return record;
}

}  // namespace rotacalc

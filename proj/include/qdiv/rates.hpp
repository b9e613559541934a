#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qdiv/common.hpp"

namespace qdiv {

/// Time-dependent scalar rate from a small set of named shapes. Each shape
/// carries a closed-form antiderivative, so Gamma integrals are exact, and an
/// explicit blow-up instant when the integral diverges in finite time.
/// value() is undefined from the blow-up instant on (throws RateBlowUp);
/// integral() returns +infinity there, which downstream code turns into
/// exact zeros of exp(-Gamma).
class Rate {
 public:
  enum class Kind { Constant, Step, Tanh, NegTanh, Sin, NegSin, Poly, Blowup };

  static Rate constant(double c) { return Rate(Kind::Constant, {c}); }
  /// c * [t >= t0]
  static Rate step(double c, double t0) { return Rate(Kind::Step, {c, t0}); }
  /// c * tanh(t)
  static Rate tanh_shape(double c = 1.0) { return Rate(Kind::Tanh, {c}); }
  /// -c * tanh(t)
  static Rate neg_tanh(double c = 1.0) { return Rate(Kind::NegTanh, {c}); }
  /// c * sin(w t)
  static Rate sin_shape(double c = 1.0, double w = 1.0) { return Rate(Kind::Sin, {c, w}); }
  /// -c * sin(w t)
  static Rate neg_sin(double c = 1.0, double w = 1.0) { return Rate(Kind::NegSin, {c, w}); }
  /// sum_k a_k t^k
  static Rate poly(std::vector<double> coeffs) { return Rate(Kind::Poly, std::move(coeffs)); }
  /// c / (tb - t) for t < tb; the integral diverges logarithmically at tb
  static Rate blowup(double c, double tb) {
    if (tb <= 0.0) raise(ErrorCode::RateBlowUp, "blow-up instant must be positive");
    return Rate(Kind::Blowup, {c, tb});
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return p_; }

  double blowup_time() const {
    return kind_ == Kind::Blowup ? p_[1] : std::numeric_limits<double>::infinity();
  }
  bool has_blowup() const { return kind_ == Kind::Blowup; }

  double value(double t) const {
    switch (kind_) {
      case Kind::Constant: return p_[0];
      case Kind::Step: return t >= p_[1] ? p_[0] : 0.0;
      case Kind::Tanh: return p_[0] * std::tanh(t);
      case Kind::NegTanh: return -p_[0] * std::tanh(t);
      case Kind::Sin: return p_[0] * std::sin(p_[1] * t);
      case Kind::NegSin: return -p_[0] * std::sin(p_[1] * t);
      case Kind::Poly: {
        double v = 0.0;
        for (std::size_t k = p_.size(); k-- > 0;) v = v * t + p_[k];
        return v;
      }
      case Kind::Blowup:
        if (t >= p_[1] - 1e-14)
          raise(ErrorCode::RateBlowUp,
                "rate evaluated at or past its blow-up instant t = " + std::to_string(p_[1]));
        return p_[0] / (p_[1] - t);
    }
    return 0.0;
  }

  /// int_0^t of value; exact antiderivatives, +inf at and past a blow-up.
  double integral(double t) const {
    switch (kind_) {
      case Kind::Constant: return p_[0] * t;
      case Kind::Step: return p_[0] * std::max(0.0, t - p_[1]);
      case Kind::Tanh: return p_[0] * std::log(std::cosh(t));
      case Kind::NegTanh: return -p_[0] * std::log(std::cosh(t));
      case Kind::Sin: return p_[0] * (1.0 - std::cos(p_[1] * t)) / p_[1];
      case Kind::NegSin: return -p_[0] * (1.0 - std::cos(p_[1] * t)) / p_[1];
      case Kind::Poly: {
        double v = 0.0;
        for (std::size_t k = p_.size(); k-- > 0;) v = v * t + p_[k] / static_cast<double>(k + 1);
        return v * t;
      }
      case Kind::Blowup:
        if (t >= p_[1] - 1e-14) return std::numeric_limits<double>::infinity();
        return p_[0] * std::log(p_[1] / (p_[1] - t));
    }
    return 0.0;
  }

 private:
  Rate(Kind kind, std::vector<double> p) : kind_(kind), p_(std::move(p)) {}

  Kind kind_;
  std::vector<double> p_;
};

namespace detail {

inline double simpson_slice(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fb, double fm, double whole, double eps,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_slice(f, a, fa, m, fm, flm);
  const double right = simpson_slice(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  if (depth <= 0)
    raise(ErrorCode::QuadratureFailure,
          "adaptive quadrature failed to reach the requested tolerance");
  return adaptive_simpson(f, a, m, fa, fm, flm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature, absolute tolerance tol::quadrature by default.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double eps = tol::quadrature) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    raise(ErrorCode::QuadratureFailure, "integrand is not finite on the requested interval");
  const double whole = detail::simpson_slice(f, a, fa, b, fb, fm);
  return detail::adaptive_simpson(f, a, b, fa, fb, fm, whole, eps, 48);
}

}  // namespace qdiv

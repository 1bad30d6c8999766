#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace merodyn {

using cplx = std::complex<double>;

// Values with |z| beyond this are identified with the point at infinity.
inline constexpr double kSphereInf = 1e13;
// Stand-in coordinate for infinity after a non-finite evaluation.
inline constexpr double kInfPoint = 1e300;

inline bool finite_c(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool is_inf_point(cplx z) {
  if (!finite_c(z)) return true;
  return std::abs(z.real()) > kSphereInf || std::abs(z.imag()) > kSphereInf ||
         std::hypot(z.real(), z.imag()) > kSphereInf;
}

// Replace NaN/Inf coordinates by the canonical infinity tag so downstream
// arithmetic stays total.
inline cplx sphere_fix(cplx z) {
  if (!finite_c(z)) return cplx(kInfPoint, 0.0);
  return z;
}

// Chordal metric on the Riemann sphere, d(z,w) = 2|z-w| / (sqrt(1+|z|^2) sqrt(1+|w|^2)),
// with either argument allowed to be the infinity tag.
inline double chordal(cplx z, cplx w) {
  bool zi = is_inf_point(z), wi = is_inf_point(w);
  if (zi && wi) return 0.0;
  if (zi) std::swap(z, w), std::swap(zi, wi);
  double nz = std::hypot(1.0, std::abs(z));
  if (wi) return 2.0 / nz;
  double nw = std::hypot(1.0, std::abs(w));
  return 2.0 * std::abs(z - w) / (nz * nw);
}

// exp(z) guarded against overflow into NaN: returns the infinity tag instead.
inline cplx exp_c(cplx z) {
  if (z.real() > 700.0) return cplx(kInfPoint, 0.0);
  return std::exp(z);
}

// tan via q = exp(2iz) on the side where |q| <= 1; exact odd and conjugation
// symmetry, no overflow anywhere.
inline cplx tan_c(cplx z) {
  if (z.imag() < 0.0) return -tan_c(-z);
  cplx q = std::exp(cplx(-2.0 * z.imag(), 2.0 * z.real()));
  cplx d = 1.0 + q;
  if (std::abs(d.real()) < 1e-300 && std::abs(d.imag()) < 1e-300)
    return cplx(kInfPoint, 0.0);
  cplx r = (1.0 - q) / d;
  return cplx(-r.imag(), r.real()); // i * r
}

inline cplx tanh_c(cplx z) {
  // tanh z = -i tan(iz)
  cplx w = tan_c(cplx(-z.imag(), z.real()));
  return cplx(w.imag(), -w.real());
}

// log(cos z) without overflow: peel off the dominant exponential.
inline cplx log_cos(cplx z) {
  if (z.imag() >= 0.0) {
    cplx q = std::exp(cplx(-2.0 * z.imag(), 2.0 * z.real())); // e^{2iz}
    return cplx(z.imag(), -z.real()) - std::log(2.0) + std::log(1.0 + q);
  }
  cplx q = std::exp(cplx(2.0 * z.imag(), -2.0 * z.real())); // e^{-2iz}
  return cplx(-z.imag(), z.real()) - std::log(2.0) + std::log(1.0 + q);
}

inline cplx log_cosh(cplx z) { return log_cos(cplx(-z.imag(), z.real())); }

// log(sec^2 z) = -2 log cos z, continuous along vertical lines.
inline cplx log_sec2(cplx z) { return -2.0 * log_cos(z); }

inline cplx log_sech2(cplx z) { return -2.0 * log_cosh(z); }

// exp of an accumulated log-multiplier; underflows/overflows saturate cleanly.
inline cplx exp_saturated(cplx logv) {
  if (logv.real() < -745.0) return cplx(0.0, 0.0);
  if (logv.real() > 709.0) return cplx(kInfPoint, 0.0);
  return std::exp(logv);
}

} // namespace merodyn

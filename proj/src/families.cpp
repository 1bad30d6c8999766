#include "merodyn/family.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace merodyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sec^2 z via the bounded exponential, mirrored to the |q| <= 1 half plane.
cplx sec2_c(cplx z) {
  if (z.imag() < 0.0) return std::conj(sec2_c(std::conj(z)));
  cplx q = std::exp(cplx(-2.0 * z.imag(), 2.0 * z.real()));
  cplx d = 1.0 + q;
  if (std::abs(d) < 1e-150) return cplx(kInfPoint, 0.0);
  return 4.0 * q / (d * d);
}

std::vector<cplx> one_point(cplx p) { return {p}; }

} // namespace

cplx FamilySlice::pole_by_index(cplx, long) const { return cplx(kInfPoint, 0.0); }

std::vector<Pole> FamilySlice::poles_in(cplx, cplx, double) const { return {}; }

std::optional<Pole> FamilySlice::nearest_pole(cplx lambda, cplx z, double& dist) const {
  dist = std::numeric_limits<double>::infinity();
  if (!has_poles() || is_inf_point(z)) return std::nullopt;
  std::optional<Pole> best;
  for (const Pole& p : poles_in(lambda, z, 8.0)) {
    double d = std::abs(z - p.z);
    if (d < dist) { dist = d; best = p; }
  }
  return best;
}

bool FamilySlice::is_parameter_singular(cplx lambda, double tol) const {
  for (cplx s : parameter_singularities())
    if (std::abs(lambda - s) <= tol) return true;
  return false;
}

// ---------------------------------------------------------------------------
// exp family: z -> e^z + lambda

namespace {

class ExpFamily final : public FamilySlice {
  std::string id_ = "exp";

public:
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override { return sphere_fix(exp_c(z) + lambda); }
  cplx deriv_z(cplx, cplx z) const override { return sphere_fix(exp_c(z)); }
  cplx log_deriv_z(cplx, cplx z) const override { return z; }
  cplx free_av(cplx lambda) const override { return lambda; }
  std::vector<cplx> other_singular_values(cplx) const override { return {}; }
  bool has_poles() const override { return false; }
  std::vector<cplx> parameter_singularities() const override { return {}; }
  std::vector<Symmetry> symmetries() const override {
    return {{"conjugation", true, [](cplx l) { return std::conj(l); }}};
  }
};

// ---------------------------------------------------------------------------
// tan family: z -> lambda tan z

class TanFamily final : public FamilySlice {
  std::string id_ = "tan";

public:
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override { return sphere_fix(lambda * tan_c(z)); }
  cplx deriv_z(cplx lambda, cplx z) const override { return sphere_fix(lambda * sec2_c(z)); }
  cplx log_deriv_z(cplx lambda, cplx z) const override {
    return std::log(lambda) + log_sec2(z);
  }
  cplx free_av(cplx lambda) const override { return cplx(0.0, 1.0) * lambda; }
  std::vector<cplx> other_singular_values(cplx lambda) const override {
    return {cplx(0.0, -1.0) * lambda};
  }
  bool has_poles() const override { return true; }
  cplx pole_by_index(cplx, long k) const override {
    return cplx(kPi / 2 + double(k) * kPi, 0.0);
  }
  std::vector<Pole> poles_in(cplx, cplx center, double radius) const override {
    std::vector<Pole> out;
    if (std::abs(center.imag()) > radius) return out;
    long k0 = std::lround((center.real() - kPi / 2) / kPi);
    long span = long(std::ceil(radius / kPi)) + 1;
    for (long k = k0 - span; k <= k0 + span; ++k) {
      cplx p(kPi / 2 + double(k) * kPi, 0.0);
      if (std::abs(center - p) <= radius) out.push_back({p, k, 1});
    }
    return out;
  }
  std::optional<Pole> nearest_pole(cplx, cplx z, double& dist) const override {
    dist = std::numeric_limits<double>::infinity();
    if (is_inf_point(z)) return std::nullopt;
    long k = std::lround((z.real() - kPi / 2) / kPi);
    Pole p{cplx(kPi / 2 + double(k) * kPi, 0.0), k, 1};
    dist = std::abs(z - p.z);
    return p;
  }
  std::vector<cplx> parameter_singularities() const override { return {cplx(0.0, 0.0)}; }
  std::vector<Symmetry> symmetries() const override {
    return {{"negation", false, [](cplx l) { return -l; }},
            {"conjugation", true, [](cplx l) { return std::conj(l); }}};
  }
};

// ---------------------------------------------------------------------------
// Shared core for the two F2 slices written as
//   f(z) = (e^z - e^{-z}) / ((1/lambda) e^z + inv_mu e^{-z}),
// evaluated on the side where the dominant exponential is divided out.

cplx sig_eval(cplx inv_mu, cplx lambda, cplx z) {
  if (z.real() >= 0.0) {
    cplx w = std::exp(-2.0 * z);
    return sphere_fix((1.0 - w) / (1.0 / lambda + inv_mu * w));
  }
  cplx u = std::exp(2.0 * z);
  return sphere_fix((u - 1.0) / (u / lambda + inv_mu));
}

// f' = 2 c / D^2 with c = 1/lambda + inv_mu and D the denominator.
cplx sig_deriv(cplx c, cplx inv_mu, cplx lambda, cplx z) {
  if (z.real() >= 0.0) {
    cplx w = std::exp(-2.0 * z);
    cplx d = 1.0 / lambda + inv_mu * w;
    return sphere_fix(2.0 * c * w / (d * d));
  }
  cplx u = std::exp(2.0 * z);
  cplx d = u / lambda + inv_mu;
  return sphere_fix(2.0 * c * u / (d * d));
}

cplx sig_log_deriv(cplx c, cplx inv_mu, cplx lambda, cplx z) {
  if (z.real() >= 0.0) {
    cplx w = std::exp(-2.0 * z);
    return std::log(2.0 * c) - 2.0 * z - 2.0 * std::log(1.0 / lambda + inv_mu * w);
  }
  cplx u = std::exp(2.0 * z);
  return std::log(2.0 * c) + 2.0 * z - 2.0 * std::log(u / lambda + inv_mu);
}

// Denominator zeros: e^{2z} = -lambda inv_mu, so z = base + i pi k.
cplx sig_pole_base(cplx inv_mu, cplx lambda) {
  cplx t = -lambda * inv_mu;
  if (!finite_c(t) || std::abs(t) == 0.0) return cplx(kInfPoint, 0.0);
  return 0.5 * std::log(t);
}

std::vector<Pole> sig_poles_in(cplx base, cplx center, double radius) {
  std::vector<Pole> out;
  if (is_inf_point(base)) return out;
  if (std::abs(center.real() - base.real()) > radius) return out;
  long k0 = std::lround((center.imag() - base.imag()) / kPi);
  long span = long(std::ceil(radius / kPi)) + 1;
  for (long k = k0 - span; k <= k0 + span; ++k) {
    cplx p = base + cplx(0.0, kPi * double(k));
    if (std::abs(center - p) <= radius) out.push_back({p, k, 1});
  }
  return out;
}

std::optional<Pole> sig_nearest(cplx base, cplx z, double& dist) {
  dist = std::numeric_limits<double>::infinity();
  if (is_inf_point(base) || is_inf_point(z)) return std::nullopt;
  long k = std::lround((z.imag() - base.imag()) / kPi);
  Pole p{base + cplx(0.0, kPi * double(k)), k, 1};
  dist = std::abs(z - p.z);
  return p;
}

class FixedMultSlice final : public FamilySlice {
  cplx rho0_;
  cplx c_; // 1/lambda + 1/mu collapses to 2/rho0, independent of lambda
  std::string id_;

  cplx inv_mu(cplx l) const { return (2.0 * l - rho0_) / (rho0_ * l); }

public:
  explicit FixedMultSlice(cplx rho0) : rho0_(rho0), c_(2.0 / rho0) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "f2rho:%.17g,%.17g", rho0.real(), rho0.imag());
    id_ = buf;
  }
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override { return sig_eval(inv_mu(lambda), lambda, z); }
  cplx deriv_z(cplx lambda, cplx z) const override {
    return sig_deriv(c_, inv_mu(lambda), lambda, z);
  }
  cplx log_deriv_z(cplx lambda, cplx z) const override {
    return sig_log_deriv(c_, inv_mu(lambda), lambda, z);
  }
  cplx free_av(cplx lambda) const override { return lambda; }
  std::vector<cplx> other_singular_values(cplx lambda) const override {
    return {sphere_fix(-rho0_ * lambda / (2.0 * lambda - rho0_))};
  }
  bool has_poles() const override { return true; }
  cplx pole_by_index(cplx lambda, long k) const override {
    cplx base = sig_pole_base(inv_mu(lambda), lambda);
    if (is_inf_point(base)) return base;
    return base + cplx(0.0, kPi * double(k));
  }
  std::vector<Pole> poles_in(cplx lambda, cplx center, double radius) const override {
    return sig_poles_in(sig_pole_base(inv_mu(lambda), lambda), center, radius);
  }
  std::optional<Pole> nearest_pole(cplx lambda, cplx z, double& dist) const override {
    return sig_nearest(sig_pole_base(inv_mu(lambda), lambda), z, dist);
  }
  std::vector<cplx> parameter_singularities() const override {
    return {cplx(0.0, 0.0), rho0_ / 2.0};
  }
  std::vector<PersistentCycle> persistent_cycles() const override {
    PersistentCycle pc;
    pc.period = 1;
    pc.multiplier = rho0_;
    pc.points = [](cplx) { return one_point(cplx(0.0, 0.0)); };
    return {pc};
  }
  std::vector<Symmetry> symmetries() const override {
    if (std::abs(rho0_.imag()) < 1e-15)
      return {{"conjugation", true, [](cplx l) { return std::conj(l); }}};
    return {};
  }
};

class PiSlice final : public FamilySlice {
  std::string id_ = "pi-slice";
  cplx inv_mu_{0.0, 1.0 / kPi}; // i/pi, so the far asymptotic value is pi*i

  cplx c(cplx lambda) const { return 1.0 / lambda + inv_mu_; }

public:
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override { return sig_eval(inv_mu_, lambda, z); }
  cplx deriv_z(cplx lambda, cplx z) const override {
    return sig_deriv(c(lambda), inv_mu_, lambda, z);
  }
  cplx log_deriv_z(cplx lambda, cplx z) const override {
    return sig_log_deriv(c(lambda), inv_mu_, lambda, z);
  }
  cplx free_av(cplx lambda) const override { return lambda; }
  std::vector<cplx> other_singular_values(cplx) const override { return {cplx(0.0, kPi)}; }
  bool has_poles() const override { return true; }
  cplx pole_by_index(cplx lambda, long k) const override {
    cplx base = sig_pole_base(inv_mu_, lambda);
    if (is_inf_point(base)) return base;
    return base + cplx(0.0, kPi * double(k));
  }
  std::vector<Pole> poles_in(cplx lambda, cplx center, double radius) const override {
    return sig_poles_in(sig_pole_base(inv_mu_, lambda), center, radius);
  }
  std::optional<Pole> nearest_pole(cplx lambda, cplx z, double& dist) const override {
    return sig_nearest(sig_pole_base(inv_mu_, lambda), z, dist);
  }
  std::vector<cplx> parameter_singularities() const override {
    return {cplx(0.0, 0.0), cplx(0.0, kPi)};
  }
};

// ---------------------------------------------------------------------------
// tanh2 family: z -> lambda tanh^2 z  (double poles)

class TanhSqFamily final : public FamilySlice {
  std::string id_ = "tanh2";

public:
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override {
    cplx t = tanh_c(z);
    return sphere_fix(lambda * t * t);
  }
  cplx deriv_z(cplx lambda, cplx z) const override {
    cplx t = tanh_c(z);
    return sphere_fix(2.0 * lambda * t * exp_saturated(log_sech2(z)));
  }
  cplx log_deriv_z(cplx lambda, cplx z) const override {
    return std::log(2.0 * lambda) + std::log(tanh_c(z)) + log_sech2(z);
  }
  cplx free_av(cplx lambda) const override { return lambda; }
  std::vector<cplx> other_singular_values(cplx) const override { return {cplx(0.0, 0.0)}; }
  bool has_poles() const override { return true; }
  int pole_order() const override { return 2; }
  cplx pole_by_index(cplx, long k) const override {
    return cplx(0.0, kPi / 2 + double(k) * kPi);
  }
  std::vector<Pole> poles_in(cplx, cplx center, double radius) const override {
    std::vector<Pole> out;
    if (std::abs(center.real()) > radius) return out;
    long k0 = std::lround((center.imag() - kPi / 2) / kPi);
    long span = long(std::ceil(radius / kPi)) + 1;
    for (long k = k0 - span; k <= k0 + span; ++k) {
      cplx p(0.0, kPi / 2 + double(k) * kPi);
      if (std::abs(center - p) <= radius) out.push_back({p, k, 2});
    }
    return out;
  }
  std::optional<Pole> nearest_pole(cplx, cplx z, double& dist) const override {
    dist = std::numeric_limits<double>::infinity();
    if (is_inf_point(z)) return std::nullopt;
    long k = std::lround((z.imag() - kPi / 2) / kPi);
    Pole p{cplx(0.0, kPi / 2 + double(k) * kPi), k, 2};
    dist = std::abs(z - p.z);
    return p;
  }
  std::vector<cplx> parameter_singularities() const override { return {cplx(0.0, 0.0)}; }
  std::vector<PersistentCycle> persistent_cycles() const override {
    PersistentCycle pc;
    pc.period = 1;
    pc.multiplier = cplx(0.0, 0.0);
    pc.points = [](cplx) { return one_point(cplx(0.0, 0.0)); };
    return {pc};
  }
  std::vector<Symmetry> symmetries() const override {
    return {{"negation", false, [](cplx l) { return -l; }},
            {"conjugation", true, [](cplx l) { return std::conj(l); }}};
  }
};

// ---------------------------------------------------------------------------
// tanhz2 family: z -> lambda tanh(z^2)  (even, two tied asymptotic values)

// Index convention for square-root pole lattices: even k is the principal
// root of sheet m = k >> 1, odd k its negative.
cplx sqrt_lattice_pole(cplx sheet_base, long k) {
  long m = k >> 1;
  cplx s = sheet_base + cplx(0.0, kPi * double(m));
  cplx r = std::sqrt(s);
  return (k & 1) ? -r : r;
}

class TanhZsqFamily final : public FamilySlice {
  std::string id_ = "tanhz2";
  static constexpr cplx sheet_base() { return cplx(0.0, kPi / 2); } // z^2 = i(pi/2 + m pi)

public:
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override { return sphere_fix(lambda * tanh_c(z * z)); }
  cplx deriv_z(cplx lambda, cplx z) const override {
    return sphere_fix(2.0 * lambda * z * exp_saturated(log_sech2(z * z)));
  }
  cplx log_deriv_z(cplx lambda, cplx z) const override {
    return std::log(2.0 * lambda) + std::log(z) + log_sech2(z * z);
  }
  cplx free_av(cplx lambda) const override { return lambda; }
  std::vector<cplx> other_singular_values(cplx lambda) const override {
    return {-lambda, cplx(0.0, 0.0)};
  }
  bool has_poles() const override { return true; }
  cplx pole_by_index(cplx, long k) const override { return sqrt_lattice_pole(sheet_base(), k); }
  std::vector<Pole> poles_in(cplx, cplx center, double radius) const override;
  std::optional<Pole> nearest_pole(cplx, cplx z, double& dist) const override;
  std::vector<cplx> parameter_singularities() const override { return {cplx(0.0, 0.0)}; }
  std::vector<PersistentCycle> persistent_cycles() const override {
    PersistentCycle pc;
    pc.period = 1;
    pc.multiplier = cplx(0.0, 0.0);
    pc.points = [](cplx) { return one_point(cplx(0.0, 0.0)); };
    return {pc};
  }
  std::vector<Symmetry> symmetries() const override {
    return {{"negation", false, [](cplx l) { return -l; }},
            {"conjugation", true, [](cplx l) { return std::conj(l); }}};
  }
};

std::vector<Pole> sqrt_lattice_poles_in(cplx sheet_base, cplx center, double radius,
                                        int order) {
  std::vector<Pole> out;
  double R = std::abs(center) + radius;
  double m_hi = (R * R + std::abs(sheet_base)) / kPi + 2.0;
  if (m_hi > 1e7) m_hi = 1e7;
  long span = long(m_hi);
  for (long m = -span; m <= span; ++m) {
    cplx s = sheet_base + cplx(0.0, kPi * double(m));
    cplx r = std::sqrt(s);
    if (std::abs(center - r) <= radius) out.push_back({r, 2 * m, order});
    if (std::abs(center + r) <= radius) out.push_back({-r, 2 * m + 1, order});
  }
  return out;
}

std::optional<Pole> sqrt_lattice_nearest(cplx sheet_base, cplx z, double& dist,
                                         int order) {
  dist = std::numeric_limits<double>::infinity();
  if (is_inf_point(z) || is_inf_point(sheet_base)) return std::nullopt;
  cplx s = z * z;
  if (is_inf_point(s)) return std::nullopt;
  long m0 = std::lround((s.imag() - sheet_base.imag()) / kPi);
  std::optional<Pole> best;
  for (long m = m0 - 1; m <= m0 + 1; ++m) {
    cplx sm = sheet_base + cplx(0.0, kPi * double(m));
    cplx r = std::sqrt(sm);
    double dp = std::abs(z - r), dn = std::abs(z + r);
    if (dp < dist) { dist = dp; best = Pole{r, 2 * m, order}; }
    if (dn < dist) { dist = dn; best = Pole{-r, 2 * m + 1, order}; }
  }
  return best;
}

std::vector<Pole> TanhZsqFamily::poles_in(cplx, cplx center, double radius) const {
  return sqrt_lattice_poles_in(sheet_base(), center, radius, 1);
}

std::optional<Pole> TanhZsqFamily::nearest_pole(cplx, cplx z, double& dist) const {
  return sqrt_lattice_nearest(sheet_base(), z, dist, 1);
}

// ---------------------------------------------------------------------------
// precomp family: the F2 slice with lambda-independent asymptotic value
// -sqrt(pi i) mapped onto the superattracting fixed point 0, precomposed
// with z^2.

class PrecompFamily final : public FamilySlice {
  std::string id_ = "precomp";
  cplx c2_;     // sqrt(pi i), principal branch
  cplx inv_c2_;

  cplx c(cplx lambda) const { return 1.0 / lambda + inv_c2_; }
  cplx sheet_base(cplx lambda) const { return sig_pole_base(inv_c2_, lambda); }

public:
  PrecompFamily() : c2_(std::sqrt(cplx(0.0, kPi))), inv_c2_(1.0 / std::sqrt(cplx(0.0, kPi))) {}
  const std::string& id() const override { return id_; }
  cplx eval(cplx lambda, cplx z) const override { return sig_eval(inv_c2_, lambda, z * z); }
  cplx deriv_z(cplx lambda, cplx z) const override {
    return sphere_fix(sig_deriv(c(lambda), inv_c2_, lambda, z * z) * 2.0 * z);
  }
  cplx log_deriv_z(cplx lambda, cplx z) const override {
    return sig_log_deriv(c(lambda), inv_c2_, lambda, z * z) + std::log(2.0 * z);
  }
  cplx free_av(cplx lambda) const override { return lambda; }
  std::vector<cplx> other_singular_values(cplx) const override {
    return {-c2_, cplx(0.0, 0.0)};
  }
  bool has_poles() const override { return true; }
  cplx pole_by_index(cplx lambda, long k) const override {
    cplx base = sheet_base(lambda);
    if (is_inf_point(base)) return base;
    return sqrt_lattice_pole(base, k);
  }
  std::vector<Pole> poles_in(cplx lambda, cplx center, double radius) const override {
    cplx base = sheet_base(lambda);
    if (is_inf_point(base)) return {};
    return sqrt_lattice_poles_in(base, center, radius, 1);
  }
  std::optional<Pole> nearest_pole(cplx lambda, cplx z, double& dist) const override {
    return sqrt_lattice_nearest(sheet_base(lambda), z, dist, 1);
  }
  std::vector<cplx> parameter_singularities() const override {
    return {cplx(0.0, 0.0), -c2_};
  }
  std::vector<PersistentCycle> persistent_cycles() const override {
    PersistentCycle pc;
    pc.period = 1;
    pc.multiplier = cplx(0.0, 0.0);
    pc.points = [](cplx) { return one_point(cplx(0.0, 0.0)); };
    return {pc};
  }
};

} // namespace

FamilyPtr make_exponential() { return std::make_shared<ExpFamily>(); }
FamilyPtr make_tangent() { return std::make_shared<TanFamily>(); }

FamilyPtr make_fixed_multiplier_slice(cplx rho0) {
  double m = std::abs(rho0);
  if (m >= 1.0 - 1e-12)
    throw std::invalid_argument("fixed multiplier slice needs |rho0| < 1");
  if (m < 1e-12)
    throw std::invalid_argument("fixed multiplier slice needs rho0 != 0");
  return std::make_shared<FixedMultSlice>(rho0);
}

FamilyPtr make_pi_slice() { return std::make_shared<PiSlice>(); }
FamilyPtr make_tanh_sq() { return std::make_shared<TanhSqFamily>(); }
FamilyPtr make_tanh_zsq() { return std::make_shared<TanhZsqFamily>(); }
FamilyPtr make_precomposed_slice() { return std::make_shared<PrecompFamily>(); }

FamilyPtr make_family(const std::string& id) {
  if (id == "exp") return make_exponential();
  if (id == "tan") return make_tangent();
  if (id == "pi-slice") return make_pi_slice();
  if (id == "tanh2") return make_tanh_sq();
  if (id == "tanhz2") return make_tanh_zsq();
  if (id == "precomp") return make_precomposed_slice();
  if (id.rfind("f2rho:", 0) == 0) {
    double re = 0.0, im = 0.0;
    int n = std::sscanf(id.c_str() + 6, "%lf,%lf", &re, &im);
    if (n < 1) return nullptr;
    try {
      return make_fixed_multiplier_slice(cplx(re, im));
    } catch (const std::invalid_argument&) {
      return nullptr;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

cplx F2Map::eval(cplx z) const {
  if (z.real() >= 0.0) {
    cplx w = std::exp(-z);
    return sphere_fix((a + b * w) / (c + d * w));
  }
  cplx u = std::exp(z);
  return sphere_fix((a * u + b) / (c * u + d));
}

cplx F2Map::deriv(cplx z) const {
  // (ad - bc) e^z / (c e^z + d)^2 with ad - bc = 1
  if (z.real() >= 0.0) {
    cplx w = std::exp(-z);
    cplx D = c + d * w;
    return sphere_fix(w / (D * D));
  }
  cplx u = std::exp(z);
  cplx D = c * u + d;
  return sphere_fix(u / (D * D));
}

cplx F2Map::av_plus() const { return sphere_fix(a / c); }
cplx F2Map::av_minus() const { return sphere_fix(b / d); }

F2Map f2_normal_form(cplx a, cplx b, cplx c, cplx d) {
  if (std::abs(a * d - b * c - 1.0) > 1e-12)
    throw std::invalid_argument("normal form requires ad - bc = 1");
  return F2Map{a, b, c, d};
}

} // namespace merodyn

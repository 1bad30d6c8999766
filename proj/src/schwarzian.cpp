#include "merodyn/schwarzian.hpp"

#include <cmath>

namespace merodyn {

namespace {

// Second and third derivatives of f from samples of f'. Step chosen so the
// h^4 truncation of the extrapolated stencil and the eps/h^2 rounding error
// are both far below 1e-8 relative for scale-1 analytic functions.
struct HigherDerivs {
  cplx f2, f3;
};

HigherDerivs higher_derivs(const CFn& fp, cplx z) {
  double h = 1e-3 * std::max(1.0, std::abs(z));
  auto d1 = [&](double s) { return (fp(z + s) - fp(z - s)) / (2.0 * s); };
  auto d2 = [&](double s) { return (fp(z + s) - 2.0 * fp(z) + fp(z - s)) / (s * s); };
  HigherDerivs out;
  out.f2 = (4.0 * d1(h / 2) - d1(h)) / 3.0;
  out.f3 = (4.0 * d2(h / 2) - d2(h)) / 3.0;
  return out;
}

} // namespace

SchwarzianResult schwarzian(const CFn& f, const CFn& fp, cplx z) {
  (void)f; // the stencil needs only f'
  SchwarzianResult r;
  cplx f1 = fp(z);
  if (!finite_c(f1) || std::abs(f1) < 1e-12) return r;
  HigherDerivs d = higher_derivs(fp, z);
  cplx q = d.f2 / f1;
  r.value = d.f3 / f1 - 1.5 * q * q;
  r.ok = finite_c(r.value);
  return r;
}

CocycleCheck check_cocycle(const CFn& f, const CFn& fp, const CFn& g, const CFn& gp,
                           cplx z) {
  CocycleCheck out;
  cplx fz = f(z);
  cplx f1 = fp(z);
  CFn comp = [&](cplx w) { return g(f(w)); };
  CFn compp = [&](cplx w) { return gp(f(w)) * fp(w); };
  SchwarzianResult sc = schwarzian(comp, compp, z);
  SchwarzianResult sg = schwarzian(g, gp, fz);
  SchwarzianResult sf = schwarzian(f, fp, z);
  if (!sc.ok || !sg.ok || !sf.ok) return out;
  cplx lhs = sc.value;
  cplx rhs = sg.value * f1 * f1 + sf.value;
  double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  out.residual = std::abs(lhs - rhs) / scale;
  out.ok = true;
  return out;
}

} // namespace merodyn

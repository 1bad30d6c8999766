// Acceptance battery: eleven desk-scale checks, one verdict line each, exit 0
// iff all pass. Tolerances and runtime limits are pinned here, next to each
// check. A FAIL line is followed by indented notes with the measured numbers
// behind it; nothing is relaxed to force a green run.

#include "merodyn/image.hpp"
#include "merodyn/orbit.hpp"
#include "merodyn/render.hpp"
#include "merodyn/schwarzian.hpp"
#include "merodyn/shell.hpp"
#include "merodyn/special_params.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace merodyn;

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kInf = std::numeric_limits<double>::infinity();

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Verdict {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

int g_failed = 0;

void report(int idx, const char* name, const Verdict& v) {
  std::printf("[%2d] %s  %s: %s\n", idx, v.pass ? "PASS" : "FAIL", name,
              v.detail.c_str());
  for (const std::string& n : v.notes) std::printf("        - %s\n", n.c_str());
  std::fflush(stdout);
  if (!v.pass) ++g_failed;
}

// 1. multiplier identity on the tangent unit disk: rho(lambda) = lambda.
Verdict c1() {
  double t0 = now_s();
  auto F = make_tangent();
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> R(0.05, 0.95), A(0.0, 2.0 * kPi);
  IterationBudget b;
  double worst = 0.0;
  int unresolved = 0;
  for (int i = 0; i < 100; ++i) {
    cplx l = std::polar(R(rng), A(rng));
    CycleRecord c;
    if (multiplier_at(*F, l, b, c) != MultErr::None || c.period != 1) {
      ++unresolved;
      continue;
    }
    worst = std::max(worst, std::abs(c.multiplier - l));
  }
  double dt = now_s() - t0;
  Verdict v;
  v.pass = unresolved == 0 && worst < 1e-9 && dt < 5.0;
  v.detail = fmt("max |rho - lambda| = %.2e (tol 1e-9) over 100 draws, %.2fs (limit 5s)",
                 worst, dt);
  if (unresolved) v.detail += fmt("; %d draws unresolved", unresolved);
  return v;
}

// 2. exponential fixed point at lambda = -2 against a 1-d real oracle.
Verdict c2() {
  double t0 = now_s();
  double z = -1.8; // e^z - 2 = z, attracting branch
  for (int i = 0; i < 60; ++i) z -= (std::exp(z) - 2.0 - z) / (std::exp(z) - 1.0);
  double rho_oracle = std::exp(z);
  auto F = make_exponential();
  CycleRecord c;
  MultErr e = multiplier_at(*F, cplx(-2.0, 0.0), IterationBudget{}, c);
  double err = (e == MultErr::None && c.period == 1)
                   ? std::abs(c.multiplier - cplx(rho_oracle, 0.0))
                   : kInf;
  double dt = now_s() - t0;
  Verdict v;
  v.pass = err < 1e-10 && dt < 1.0;
  v.detail = fmt("|rho - e^{z*}| = %.2e (tol 1e-10), z* = %.12f, %.2fs (limit 1s)", err,
                 z, dt);
  return v;
}

// 3. order-2 virtual cycle parameters of the tangent family in closed form.
Verdict c3() {
  double t0 = now_s();
  auto F = make_tangent();
  struct Case {
    cplx guess;
    long pole;
    cplx expect;
  } cases[2] = {{cplx(0.0, -1.5), 0, cplx(0.0, -kPi / 2)},
                {cplx(0.0, 1.5), -1, cplx(0.0, kPi / 2)}};
  double worst_l = 0.0, worst_r = 0.0;
  bool pole_hits = true, solved = true;
  for (const Case& cs : cases) {
    VirtualCycleHit h;
    if (solve_virtual_cycle(*F, cs.guess, 2, cs.pole, h) != ParamErr::None) {
      solved = false;
      continue;
    }
    worst_l = std::max(worst_l, std::abs(h.lambda - cs.expect));
    worst_r = std::max(worst_r, h.residual);
    OrbitResult orb;
    if (iterate_free_av(*F, h.lambda, IterationBudget{}, orb) != OrbitErr::None ||
        orb.status != OrbitStatus::PoleHit || orb.pole_hit_order != 1)
      pole_hits = false;
  }
  double dt = now_s() - t0;
  Verdict v;
  v.pass = solved && worst_l < 1e-10 && worst_r < 1e-11 && pole_hits && dt < 1.0;
  v.detail =
      fmt("max |lambda - (-+ i pi/2)| = %.2e (tol 1e-10), max residual = %.2e "
          "(tol 1e-11), free orbit pole-hit order 1: %s, %.2fs (limit 1s)",
          worst_l, worst_r, pole_hits ? "yes" : "NO", dt);
  return v;
}

// 4. internal ray from 1.2i traced to t = -18: landing at i pi/2 plus the
// degenerating-cycle signature over the last 10 samples.
Verdict c4() {
  double t0 = now_s();
  auto F = make_tangent();
  RayOptions opt; // t_min = -18, extension on
  InternalRay ray;
  ShellErr e = trace_internal_ray(*F, cplx(0.0, 1.2), opt, ray);
  cplx target(0.0, kPi / 2);
  bool landed =
      e == ShellErr::None && ray.landing == RayLanding::FiniteVirtualCenter;
  double dcenter = landed ? std::abs(ray.center - target) : kInf;
  double min_maxa = kInf, max_a1v = 0.0, max_pd = 0.0;
  int k = int(ray.samples.size());
  for (int i = std::max(0, k - 10); i < k; ++i) {
    const RaySample& s = ray.samples[i];
    double ma = 0.0;
    for (cplx a : s.cycle.points)
      if (!is_inf_point(a)) ma = std::max(ma, std::abs(a));
    min_maxa = std::min(min_maxa, ma);
    if (s.cycle.points.size() >= 2)
      max_a1v = std::max(max_a1v,
                         std::abs(s.cycle.points[1] - F->free_av(s.lambda)));
    double pd = kInf;
    F->nearest_pole(s.lambda, s.cycle.points.back(), pd);
    max_pd = std::max(max_pd, pd);
  }
  double dt = now_s() - t0;
  bool sig = min_maxa > 1e2 && max_a1v < 1e-3 && max_pd < 1e-3;
  Verdict v;
  v.pass = landed && dcenter < 1e-6 && sig && dt < 30.0;
  v.detail = fmt(
      "landing |lambda* - i pi/2| = %.1e (tol 1e-6); last-10 signature: "
      "min max|a_i| = %.3g (need > 1e2), max |a_1 - v| = %.1e (tol 1e-3), "
      "max pole dist = %.3g (tol 1e-3); %.1fs (limit 30s)",
      dcenter, min_maxa, max_a1v, max_pd, dt);
  if (!v.pass) {
    v.notes.push_back(fmt(
        "the landing itself is resolved (polished to %.1e) but at t = -18 the cycle "
        "is far from degenerate: the ray approaches the center like "
        "|lambda(t) - lambda*| ~ 2 pi / |t| (measured d = %.3g at t_end = %.3g), so "
        "max|a_i| > 1e2 first holds near t ~ -400 and the pole distance drops under "
        "1e-3 only near t ~ -6300",
        dcenter, k ? std::abs(ray.samples.back().lambda - target) : 0.0,
        k ? ray.samples.back().t : 0.0));
    v.notes.push_back(fmt(
        "the component seeded at 1.2i has period %d, not 2; the genuine period-2 "
        "component sits above the shared virtual center (seed 1.58i, see check 6)",
        ray.period));
  }
  return v;
}

// 5. period-1 rays have their virtual center at infinity: exp from -2 and the
// tangent right-hand component from 4 must diverge, with no finite landing.
Verdict c5() {
  double t0 = now_s();
  struct Case {
    const char* name;
    FamilyPtr F;
    cplx seed;
  } cases[2] = {{"exp", make_exponential(), cplx(-2.0, 0.0)},
                {"tan", make_tangent(), cplx(4.0, 0.0)}};
  bool diverged[2] = {false, false};
  double t_cross[2] = {0.0, 0.0}, lam_at[2] = {0.0, 0.0};
  int period[2] = {0, 0};
  for (int i = 0; i < 2; ++i) {
    RayOptions opt;
    opt.t_min = -12.0;
    opt.t_hard = -2.5e4; // |lambda| grows only linearly in |t|; leave room
    opt.divergence_cutoff = 1e4;
    InternalRay ray;
    if (trace_internal_ray(*cases[i].F, cases[i].seed, opt, ray) != ShellErr::None)
      continue;
    period[i] = ray.period;
    diverged[i] = ray.landing == RayLanding::DivergesToInfinity;
    if (!ray.samples.empty()) {
      t_cross[i] = ray.samples.back().t;
      lam_at[i] = std::abs(ray.samples.back().lambda);
    }
  }
  double dt = now_s() - t0;
  bool substance = diverged[0] && diverged[1] && period[0] == 1 && period[1] == 1;
  bool literal = substance && t_cross[0] > -12.0 && t_cross[1] > -12.0;
  Verdict v;
  v.pass = substance && literal && dt < 30.0;
  v.detail = fmt(
      "exp: |lambda| = %.3g at t = %.5g; tan: |lambda| = %.3g at t = %.5g; both "
      "period 1, both diverge past the 1e4 cutoff with no finite landing; literal "
      "gate 'before t = -12': %s; %.1fs (limit 30s)",
      lam_at[0], t_cross[0], lam_at[1], t_cross[1], literal ? "met" : "NOT met", dt);
  if (substance && !literal) {
    v.notes.push_back(
        "divergence is certain but slow: on the real exp ray lambda(t) = t - e^t "
        "exactly, and on the tangent right-hand ray t = log(4 lambda) - 2 lambda, so "
        "|lambda| ~ |t| and ~ |t|/2; the cutoff 1e4 is first crossed near t = -1e4 "
        "and t = -2e4, while lambda(-12) is only ~ -12 resp. ~ 7");
    v.notes.push_back(
        "reaching |lambda| > 1e4 by t = -12 would need |rho| to stay above e^-12 "
        "out to |lambda| = 1e4, contradicting |rho| = e^t -> 0 along the ray");
  }
  return v;
}

// 6. the virtual center does not depend on the ray angle: four rays in the
// tangent period-2 component land together.
Verdict c6() {
  double t0 = now_s();
  auto F = make_tangent();
  cplx seed(0.0, 1.58);
  CycleRecord c;
  Verdict v;
  if (multiplier_at(*F, seed, IterationBudget{}, c) != MultErr::None) {
    v.detail = "seed 1.58i did not resolve to an attracting cycle";
    return v;
  }
  double tseed = c.log_multiplier.real();
  cplx centers[4];
  bool all_landed = true;
  for (int k = 0; k < 4; ++k) {
    RayOptions opt;
    opt.theta_offset = 0.25 * k;
    opt.t_min = tseed - 10.0;
    opt.t_hard = tseed - 40.0;
    InternalRay ray;
    ShellErr e = trace_internal_ray(*F, seed, opt, ray);
    if (e != ShellErr::None || ray.landing != RayLanding::FiniteVirtualCenter) {
      all_landed = false;
      continue;
    }
    centers[k] = ray.center;
  }
  double spread = all_landed ? 0.0 : kInf;
  for (int i = 0; i < 4 && all_landed; ++i)
    for (int j = i + 1; j < 4; ++j)
      spread = std::max(spread, std::abs(centers[i] - centers[j]));
  double dt = now_s() - t0;
  v.pass = all_landed && spread < 1e-5 && dt < 120.0;
  v.detail = fmt(
      "period-%d component at 1.58i (t0 = %.2f): rays at offsets {0, 1/4, 1/2, 3/4} "
      "land with spread %.2e (tol 1e-5) at (%.12g, %.12g); %.1fs (limit 120s)",
      c.period, tseed, spread, centers[0].real(), centers[0].imag(), dt);
  return v;
}

// 7. structural content of the 512^2 tangent plane on [-6,6]^2.
Verdict c7(PlaneGrid& g, double& t512) {
  auto F = make_tangent();
  IterationBudget b;
  b.max_iter = 600; // most of the window is pole dust; 600 resolves the components
  Window w{cplx(0.0, 0.0), 12.0, 12.0};
  double t0 = now_s();
  RenderErr re = render_plane(*F, w, 512, 512, b, 8, g);
  t512 = now_s() - t0;
  Verdict v;
  if (re != RenderErr::None) {
    v.detail = "render failed";
    return v;
  }

  // (i) the unit-disk component from 0.5 stays within |lambda| <= 1 + 2 px
  ComponentMask disk;
  ComponentErr ce = component_extract(g, cplx(0.5, 0.0), disk);
  double px = 12.0 / 512.0, bound = 1.0 + 2.0 * px, worst_r = 0.0;
  if (ce == ComponentErr::None)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        if (disk.mask[size_t(iy) * g.nx + ix])
          worst_r = std::max(worst_r, std::abs(g.lambda_at(ix, iy)));
  bool disk_ok = ce == ComponentErr::None && disk.period == 1 &&
                 disk.status == CellStatus::Attracting && worst_r <= bound;

  // (ii) symmetry agreement on determined cells. Conjugation is exact cell by
  // cell; negation conjugates dynamics up to a sign flip of the orbit, so the
  // period may double or halve and agreement means matching status plus a
  // {1, 2, 1/2} period ratio.
  long det = 0, ok_conj = 0, ok_neg = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const PixelClass& a = g.at(ix, iy);
      if (a.status == CellStatus::Undetermined) continue;
      ++det;
      const PixelClass& cc = g.at(ix, g.ny - 1 - iy);
      if (cc.status == a.status && cc.period == a.period) ++ok_conj;
      const PixelClass& m = g.at(g.nx - 1 - ix, g.ny - 1 - iy);
      if (m.status == a.status &&
          (m.period == a.period || m.period == 2 * a.period ||
           a.period == 2 * m.period))
        ++ok_neg;
    }
  double pct_conj = det ? 100.0 * double(ok_conj) / double(det) : 0.0;
  double pct_neg = det ? 100.0 * double(ok_neg) / double(det) : 0.0;
  bool sym_ok = pct_conj >= 99.9 && pct_neg >= 99.9;

  // (iii) unbounded components of periods 1 and 2 touching the window edge
  ComponentMask right, left;
  bool iii_ok =
      component_extract(g, cplx(4.0, 0.0), right) == ComponentErr::None &&
      component_extract(g, cplx(-4.0, 0.0), left) == ComponentErr::None &&
      right.status == CellStatus::Attracting && right.period == 1 &&
      right.touches_edge && left.status == CellStatus::Attracting &&
      left.period == 2 && left.touches_edge;

  v.pass = disk_ok && sym_ok && iii_ok && t512 < 120.0;
  v.detail = fmt(
      "unit-disk component max |lambda| = %.4f (bound %.4f, period %d); symmetry "
      "agreement conj %.3f%%, negation %.3f%% (need 99.9%%) over %ld determined "
      "cells; edge components: period %d right / period %d left, touch edge %s/%s; "
      "render %.1fs (limit 120s)",
      worst_r, bound, disk.period, pct_conj, pct_neg, det, right.period, left.period,
      right.touches_edge ? "yes" : "NO", left.touches_edge ? "yes" : "NO", t512);
  return v;
}

// 8. virtual centers accumulate on the boundary: a shrinking disk at -i pi/2
// keeps yielding polished virtual cycle parameters.
Verdict c8() {
  double t0 = now_s();
  auto F = make_tangent();
  std::vector<DensityHit> hits;
  ParamErr e = density_probe(*F, cplx(0.0, -kPi / 2), {0.5, 0.1, 0.02}, hits, 6);
  double dt = now_s() - t0;
  Verdict v;
  bool all = e == ParamErr::None && hits.size() == 3;
  std::string per;
  for (const DensityHit& h : hits) {
    all = all && h.found;
    per += fmt(" r=%.2g:%s", h.radius,
               h.found ? fmt("|dl|=%.2g(p%d)", h.distance, h.hit.order).c_str()
                       : "none");
  }
  v.pass = all && dt < 30.0;
  v.detail = fmt("hits inside every disk:%s; %.1fs (limit 30s)", per.c_str(), dt);
  return v;
}

// 9. Schwarzian identities.
Verdict c9() {
  double t0 = now_s();
  CFn ex = [](cplx z) { return std::exp(z); };
  double worst_exp = 0.0;
  for (int k = 0; k < 10; ++k) {
    auto r = schwarzian(ex, ex, std::polar(0.8, 2.0 * kPi * k / 10.0) + cplx(0.05, 0.02));
    worst_exp = std::max(worst_exp, r.ok ? std::abs(r.value - cplx(-0.5, 0.0)) : kInf);
  }
  CFn mob = [](cplx z) { return (2.0 * z + 1.0) / (z + 1.0); };
  CFn mobp = [](cplx z) { return 1.0 / ((z + 1.0) * (z + 1.0)); };
  double worst_mob = 0.0;
  for (int k = 0; k < 5; ++k) {
    auto r = schwarzian(mob, mobp, std::polar(0.6, 2.0 * kPi * k / 5.0) + cplx(0.4, 0.3));
    worst_mob = std::max(worst_mob, r.ok ? std::abs(r.value) : kInf);
  }
  cplx a(1.2, 0.3), b(0.2, -0.1), c(0.5, 0.2);
  F2Map nf = f2_normal_form(a, b, c, (1.0 + b * c) / a);
  CFn f2 = [&](cplx z) { return nf.eval(z); };
  CFn f2p = [&](cplx z) { return nf.deriv(z); };
  std::vector<cplx> vals;
  for (int k = 0; k < 6; ++k) {
    auto r = schwarzian(f2, f2p, std::polar(0.9, 2.0 * kPi * k / 6.0) + cplx(0.1, -0.05));
    if (r.ok) vals.push_back(r.value);
  }
  double spread = vals.size() == 6 ? 0.0 : kInf;
  for (size_t i = 0; i < vals.size(); ++i)
    for (size_t j = i + 1; j < vals.size(); ++j)
      spread = std::max(spread, std::abs(vals[i] - vals[j]));
  CFn idf = [](cplx z) { return z; };
  CFn idp = [](cplx) { return cplx(1.0, 0.0); };
  CFn sq = [](cplx z) { return z * z; };
  CFn sqp = [](cplx z) { return 2.0 * z; };
  auto c1r = check_cocycle(ex, ex, mob, mobp, cplx(0.4, 0.3));
  auto c2r = check_cocycle(idf, idp, idf, idp, cplx(0.3, -0.2));
  auto c3r = check_cocycle(sq, sqp, ex, ex, cplx(1.0, 0.0));
  double worst_coc = std::max({c1r.ok ? c1r.residual : kInf,
                               c2r.ok ? c2r.residual : kInf,
                               c3r.ok ? c3r.residual : kInf});
  double dt = now_s() - t0;
  Verdict v;
  v.pass = worst_exp < 1e-6 && worst_mob < 1e-8 && spread < 1e-5 &&
           worst_coc < 1e-5 && dt < 1.0;
  v.detail = fmt(
      "S(exp)+1/2: %.1e (tol 1e-6, 10 pts); S(Mobius): %.1e (tol 1e-8); normal-form "
      "spread: %.1e (tol 1e-5); worst cocycle residual: %.1e (tol 1e-5, 3 triples); "
      "%.2fs (limit 1s)",
      worst_exp, worst_mob, spread, worst_coc, dt);
  return v;
}

// 10. nonzero multipliers: |rho| > 1e-9 over every attracting cell of the
// check-7 grid.
Verdict c10(const PlaneGrid& g) {
  long attracting = 0, viol = 0;
  double min_log = kInf;
  cplx worst{};
  const double floor_log = std::log(1e-9);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const PixelClass& c = g.at(ix, iy);
      if (c.status != CellStatus::Attracting) continue;
      ++attracting;
      if (c.log_abs_multiplier <= floor_log) ++viol;
      if (c.log_abs_multiplier < min_log) {
        min_log = c.log_abs_multiplier;
        worst = g.lambda_at(ix, iy);
      }
    }
  Verdict v;
  v.pass = attracting > 0 && viol == 0;
  v.detail = fmt(
      "%ld attracting cells, %ld with |rho| <= 1e-9; min log|rho| = %.1f at "
      "lambda = (%.4f, %.4f)",
      attracting, viol, min_log, worst.real(), worst.imag());
  if (!v.pass && viol > 0) {
    v.notes.push_back(
        "every log|rho| is a finite real, so rho vanishes nowhere: the substance "
        "(nonzero multipliers on shell components) holds on all cells");
    v.notes.push_back(fmt(
        "near a virtual center the multiplier decays like exp(-2 pi / d) in the "
        "distance d to the center (measured on check 4's ray), so every cell within "
        "d ~ 2 pi / 20.7 = 0.30 of one of the virtual centers crosses the 1e-9 "
        "floor; with centers accumulating along the component boundaries (check 8) "
        "a fixed positive floor on |rho| cannot hold on a 512^2 sampling; min "
        "log|rho| = %.1f corresponds to d ~ %.3f",
        min_log, 2.0 * kPi / -min_log));
  }
  return v;
}

// 11. determinism and scaling: byte-identical CSV across repeat renders, and
// the 1024^2 render costs at most 4.6x the 512^2 one at the same worker count.
Verdict c11(const PlaneGrid& g512, double t512) {
  auto F = make_tangent();
  IterationBudget b;
  b.max_iter = 600;
  Window w{cplx(0.0, 0.0), 12.0, 12.0};
  double t0 = now_s();
  PlaneGrid g2;
  RenderErr r1 = render_plane(*F, w, 512, 512, b, 8, g2);
  double t512b = now_s() - t0;
  bool same = r1 == RenderErr::None && csv_string(g512) == csv_string(g2);
  t0 = now_s();
  PlaneGrid g3;
  RenderErr r2 = render_plane(*F, w, 1024, 1024, b, 8, g3);
  double t1024 = now_s() - t0;
  double base = std::min(t512, t512b);
  double ratio = base > 0 ? t1024 / base : kInf;
  Verdict v;
  v.pass = same && r2 == RenderErr::None && ratio <= 4.6;
  v.detail = fmt(
      "repeat 512^2 renders byte-identical: %s; 512^2 %.2fs/%.2fs, 1024^2 %.2fs, "
      "ratio %.2f (limit 4.6, 8 workers)",
      same ? "yes" : "NO", t512, t512b, t1024, ratio);
  return v;
}

} // namespace

int main() {
  std::printf("merodyn acceptance battery\n");
  report(1, "tangent multiplier identity", c1());
  report(2, "exponential fixed-point multiplier vs 1-d oracle", c2());
  report(3, "tangent order-2 virtual cycles in closed form", c3());
  report(4, "ray landing and degenerating-cycle signature", c4());
  report(5, "period-1 rays diverge (virtual center at infinity)", c5());
  report(6, "virtual center independent of the ray angle", c6());
  PlaneGrid g7;
  double t512 = 0.0;
  report(7, "tangent plane structure at 512^2", c7(g7, t512));
  report(8, "virtual centers dense near -i pi/2", c8());
  report(9, "schwarzian identities", c9());
  report(10, "nonzero multiplier sweep", c10(g7));
  report(11, "determinism and scaling", c11(g7, t512));
  std::printf("%d of 11 passed\n", 11 - g_failed);
  return g_failed == 0 ? 0 : 1;
}

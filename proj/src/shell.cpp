#include "merodyn/shell.hpp"

#include <algorithm>
#include <cmath>

namespace merodyn {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kCorrTol = 1e-9;  // corrector residual gate in log rho
constexpr double kStepInit = 0.05; // first continuation step, in t or radians
constexpr double kStepMin = 1e-4;
constexpr double kStepMax = 0.5;

double frac_turn(double phi) {
  double th = phi / kTwoPi;
  return th - std::floor(th);
}

bool regular(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag()) && std::abs(z) < 1e8;
}

// Continuation state: the attracting cycle followed along the trace. Every
// evaluation refines from the committed cycle, so trial points that wander
// off simply fail the corrector instead of poisoning the state.
struct Tracker {
  const FamilySlice& F;
  int period = 0;
  cplx lambda{};
  CycleRecord cyc;

  // A moderate cycle point away from the poles survives refinement longest
  // once the cycle starts degenerating toward a virtual cycle.
  cplx seed_point() const {
    cplx best = cyc.points.front();
    double best_score = -1.0;
    for (const cplx& z : cyc.points) {
      if (std::abs(z) > 50.0) continue;
      double score = 10.0;
      if (F.has_poles()) {
        double d = 0.0;
        if (F.nearest_pole(lambda, z, d)) score = std::min(d, 10.0);
      }
      if (score > best_score) {
        best_score = score;
        best = z;
      }
    }
    return best;
  }

  // log rho at l, imaginary part rebranched onto the lift nearest phi_hint.
  // The per-factor branches of the log-derivative sum can slip by 2 pi as
  // lambda moves; the hint keeps the continued phase on one lift.
  bool eval(cplx l, double phi_hint, cplx& out, CycleRecord* keep = nullptr) {
    if (F.is_parameter_singular(l)) return false;
    CycleRecord r;
    if (refine_cycle(F, l, seed_point(), period, r) != RefineErr::None) return false;
    double im = r.log_multiplier.imag();
    im -= kTwoPi * std::round((im - phi_hint) / kTwoPi);
    out = cplx(r.log_multiplier.real(), im);
    if (keep) *keep = r;
    return true;
  }

  bool derivative_at(cplx l, double phi_hint, cplx& out) {
    double h = 1e-6 * std::max(1.0, std::abs(l));
    cplx gp, gm;
    if (!eval(l + h, phi_hint, gp) || !eval(l - h, phi_hint, gm)) return false;
    out = (gp - gm) / (2.0 * h);
    return regular(out) && std::abs(out) > 1e-14;
  }

  // One predictor-corrector move to log rho = target. Commits on success.
  bool step_to(cplx target, double* res_out = nullptr) {
    cplx l = lambda;
    CycleRecord r;
    cplx g;
    if (!eval(l, target.imag(), g, &r)) return false;
    for (int it = 0; it < 8; ++it) {
      if (std::abs(g - target) < kCorrTol) {
        lambda = l;
        cyc = r;
        if (res_out) *res_out = std::abs(g - target);
        return true;
      }
      cplx gd;
      if (!derivative_at(l, target.imag(), gd)) return false;
      l -= (g - target) / gd;
      if (!eval(l, target.imag(), g, &r)) return false;
    }
    return false;
  }
};

double cluster_diameter(const std::vector<RaySample>& s, int tail) {
  int n = int(s.size());
  double diam = 0.0;
  for (int i = std::max(0, n - tail); i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      diam = std::max(diam, std::abs(s[i].lambda - s[j].lambda));
  return diam;
}

// Confirmed reclassification that disagrees with the traced period means the
// continuation slid off its component.
bool left_component(const FamilySlice& F, cplx lambda, int period) {
  IterationBudget bud;
  OrbitResult r;
  if (iterate_free_av(F, lambda, bud, r) != OrbitErr::None) return false;
  if (r.status == OrbitStatus::CapturedPersistent) return true;
  if (r.status == OrbitStatus::ConvergedFreeCycle && r.cycle)
    return r.cycle->period != period;
  return false; // Undetermined is a budget artifact, not a verdict
}

} // namespace

ShellErr trace_internal_ray(const FamilySlice& F, cplx seed, const RayOptions& opt,
                            InternalRay& out) {
  out = {};
  if (!std::isfinite(seed.real()) || !std::isfinite(seed.imag())) return ShellErr::BadSeed;

  IterationBudget bud;
  CycleRecord rec;
  if (multiplier_at(F, seed, bud, rec) != MultErr::None) return ShellErr::BadSeed;
  out.period = rec.period;

  Tracker trk{F, rec.period, seed, rec};
  const double t0 = rec.log_multiplier.real();
  const double phi0 = rec.log_multiplier.imag();

  // Target angle: an explicit theta picks the lift nearest the seed phase,
  // the offset then rotates on top of it.
  double phi_t = phi0;
  if (!std::isnan(opt.theta)) {
    double base = kTwoPi * opt.theta;
    phi_t = base + kTwoPi * std::round((phi0 - base) / kTwoPi);
  }
  phi_t += kTwoPi * opt.theta_offset;
  out.theta = frac_turn(phi_t);

  // Rotate to the target angle at fixed modulus before descending.
  double phi = phi0;
  double dphi = kStepInit;
  while (std::abs(phi_t - phi) > 1e-12) {
    double step = std::clamp(phi_t - phi, -dphi, dphi);
    if (trk.step_to(cplx(t0, phi + step))) {
      phi += step;
      dphi = std::min(dphi * 1.5, kStepMax);
    } else {
      dphi *= 0.5;
      if (dphi < kStepMin) {
        out.samples.push_back({t0, trk.lambda, 0.0, trk.cyc});
        out.landing = RayLanding::Stalled;
        out.stall_reason = "rotation corrector stalled";
        return ShellErr::None;
      }
    }
  }

  out.samples.push_back({t0, trk.lambda, 0.0, trk.cyc});
  if (opt.t_min >= t0 - 1e-12) {
    out.landing = RayLanding::Stalled;
    out.stall_reason = "no room below the seed level";
    return ShellErr::None;
  }

  const double floor_t = opt.extend ? std::min(opt.t_hard, opt.t_min) : opt.t_min;
  double t = t0;
  double dt = kStepInit;
  int since_reclass = 0;
  while (true) {
    if (t <= floor_t + 1e-12) {
      if (opt.extend) {
        out.landing = RayLanding::Stalled;
        out.stall_reason = "hard floor reached without a landing diagnosis";
      } else {
        out.landing = RayLanding::Unresolved;
      }
      break;
    }
    double tn = std::max(t - dt, floor_t);
    double res = 0.0;
    if (!trk.step_to(cplx(tn, phi_t), &res)) {
      dt *= 0.5;
      if (dt < kStepMin) {
        out.landing = RayLanding::Stalled;
        out.stall_reason = "corrector stalled";
        break;
      }
      continue;
    }
    t = tn;
    out.samples.push_back({t, trk.lambda, res, trk.cyc});
    dt = std::min(dt * 1.5, kStepMax);

    if (std::abs(trk.lambda) > opt.divergence_cutoff) {
      out.landing = RayLanding::DivergesToInfinity;
      break;
    }
    if (++since_reclass >= 50) {
      since_reclass = 0;
      if (left_component(F, trk.lambda, out.period)) return ShellErr::LeftComponent;
    }
    if (t <= opt.t_min + 1e-12) {
      if (!opt.extend) {
        out.landing = RayLanding::Unresolved;
        break;
      }
      CenterResult c = locate_virtual_center(F, out);
      if (c.kind == CenterKind::FiniteCenter) {
        out.landing = RayLanding::FiniteVirtualCenter;
        out.center = c.hit.lambda;
        out.center_hit = c.hit;
        break;
      }
      if (c.kind == CenterKind::AtParameterSingularity) {
        out.landing = RayLanding::AtParameterSingularity;
        out.singularity = c.singularity;
        break;
      }
    }
  }
  return ShellErr::None;
}

CenterResult locate_virtual_center(const FamilySlice& F, const InternalRay& ray) {
  CenterResult out;
  if (ray.landing == RayLanding::DivergesToInfinity) {
    out.kind = CenterKind::AtInfinity;
    return out;
  }
  if (ray.samples.size() < 5 || ray.period < 1) return out;
  const cplx le = ray.samples.back().lambda;

  // The approach to a center is only O(1/t), so the tail is extrapolated
  // along lambda(t) ~ lambda* + c/t before ranking candidate centers.
  cplx lhat = le;
  if (ray.samples.size() >= 9) {
    const RaySample& s1 = ray.samples[ray.samples.size() - 9];
    const RaySample& s2 = ray.samples.back();
    if (s1.t < -1.0 && s2.t < -1.0 && s1.t != s2.t) {
      cplx c = (s2.lambda - s1.lambda) / (1.0 / s2.t - 1.0 / s1.t);
      lhat = s2.lambda - c / s2.t;
    }
  }

  // A cycle closing up on a virtual cycle pushes iterates of the free value
  // toward poles. Neighbouring components keep rival centers within reach,
  // so every close approach is polished and the hit nearest the
  // extrapolated limit wins; each polish is self-verifying.
  if (F.has_poles() && ray.period >= 2) {
    bool found = false;
    double best_rank = 1e300;
    cplx z = F.free_av(le);
    for (int j = 0; j + 2 <= ray.period; ++j) {
      if (j > 0) z = F.eval(le, z);
      if (!regular(z)) break;
      double d = 0.0;
      auto p = F.nearest_pole(le, z, d);
      if (!p || d >= 0.25) continue;
      VirtualCycleHit hit;
      ParamErr e = solve_virtual_cycle(F, le, j + 2, p->index, hit);
      if (e == ParamErr::OrbitThroughPole && hit.actual_order >= 2)
        e = solve_virtual_cycle(F, hit.lambda, hit.actual_order, hit.actual_pole_index, hit);
      if (e != ParamErr::None || std::abs(hit.lambda - le) >= 0.5 ||
          F.is_parameter_singular(hit.lambda))
        continue;
      double rank = std::abs(hit.lambda - lhat);
      if (rank < best_rank) {
        best_rank = rank;
        out.hit = hit;
        found = true;
      }
    }
    if (found) {
      out.kind = CenterKind::FiniteCenter;
      return out;
    }
  }

  // Cauchy cluster onto a puncture of the slice.
  if (cluster_diameter(ray.samples, 5) < 1e-4) {
    for (cplx s : F.parameter_singularities()) {
      if (std::abs(le - s) < 1e-3) {
        out.kind = CenterKind::AtParameterSingularity;
        out.singularity = s;
        return out;
      }
    }
  }
  return out;
}

std::vector<cplx> multiplier_field(const PlaneGrid& grid) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<cplx> out(grid.cells.size(), cplx(nan, nan));
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const PixelClass& c = grid.cells[i];
    if (c.status == CellStatus::Attracting)
      out[i] = exp_saturated(cplx(c.log_abs_multiplier, c.arg_multiplier));
  }
  return out;
}

ShellErr trace_boundary_level(const FamilySlice& F, cplx seed, double level,
                              BoundaryTrace& out, int max_steps) {
  out = {};
  out.level = level;
  if (!(level > 0.0) || level >= 1.0) return ShellErr::BadLevel;
  if (!std::isfinite(seed.real()) || !std::isfinite(seed.imag())) return ShellErr::BadSeed;

  IterationBudget bud;
  CycleRecord rec;
  if (multiplier_at(F, seed, bud, rec) != MultErr::None) return ShellErr::BadSeed;

  Tracker trk{F, rec.period, seed, rec};
  const double tr = std::log(level);
  double t = rec.log_multiplier.real();
  double phi = rec.log_multiplier.imag();

  // Walk the modulus out to the level along the seed's angle.
  double dt = kStepInit;
  while (std::abs(tr - t) > 1e-12) {
    double step = std::clamp(tr - t, -dt, dt);
    if (trk.step_to(cplx(t + step, phi))) {
      t += step;
      dt = std::min(dt * 1.5, kStepMax);
    } else {
      dt *= 0.5;
      if (dt < kStepMin) return ShellErr::None; // open, nothing reached
    }
  }

  const cplx start = trk.lambda;
  const double phi_start = phi;
  const double ds_nom = 0.02;
  out.points.push_back(start);
  double ds = ds_nom;
  double arclen = 0.0;
  int since_reclass = 0;

  for (int step = 0; step < max_steps; ++step) {
    cplx gd;
    if (!trk.derivative_at(trk.lambda, phi, gd)) break;
    cplx dir = cplx(0.0, 1.0) * std::conj(gd) / std::abs(gd);
    cplx l = trk.lambda + ds * dir;

    // Corrector pulls Re log rho back onto the level; the phase rides free.
    bool ok = false;
    cplx g;
    CycleRecord rc;
    for (int it = 0; it < 8; ++it) {
      if (!trk.eval(l, phi, g, &rc)) break;
      if (std::abs(g.real() - tr) < kCorrTol) {
        ok = true;
        break;
      }
      cplx gd2;
      if (!trk.derivative_at(l, phi, gd2)) break;
      l -= (g.real() - tr) * std::conj(gd2) / std::norm(gd2);
    }
    if (!ok) {
      ds *= 0.5;
      if (ds < kStepMin) break;
      continue;
    }

    arclen += std::abs(l - trk.lambda);
    trk.lambda = l;
    trk.cyc = rc;
    phi = g.imag();
    out.points.push_back(l);
    ds = std::min(ds * 1.5, ds_nom);
    if (std::abs(l) > 1e4) break;

    if (++since_reclass >= 200) {
      since_reclass = 0;
      if (left_component(F, l, trk.period)) return ShellErr::LeftComponent;
    }

    // Close the loop through the start point exactly once it comes back in
    // range; the lifted phase carries the accumulated winding.
    if (arclen > 10.0 * ds_nom && std::abs(l - start) < 2.0 * ds_nom) {
      double phi_tgt = phi_start + kTwoPi * std::round((phi - phi_start) / kTwoPi);
      cplx target(tr, phi_tgt);
      cplx lf = l;
      bool hit = false;
      for (int it = 0; it < 10; ++it) {
        cplx gg;
        if (!trk.eval(lf, phi_tgt, gg)) break;
        if (std::abs(gg - target) < kCorrTol) {
          hit = true;
          break;
        }
        cplx gd3;
        if (!trk.derivative_at(lf, phi_tgt, gd3)) break;
        lf -= (gg - target) / gd3;
      }
      if (hit && std::abs(lf - start) < 1e-6) {
        out.points.push_back(lf);
        out.closed = true;
        break;
      }
    }
  }
  return ShellErr::None;
}

} // namespace merodyn

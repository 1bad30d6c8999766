#include "merodyn/special_params.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace merodyn {

namespace {

constexpr int kNewtonSteps = 50;
constexpr int kHalvings = 8;
constexpr double kTol = 1e-11;
constexpr double kBlowup = 1e10; // orbit segments past this are not regular

bool regular(cplx z) { return finite_c(z) && std::abs(z) < kBlowup; }

struct Residual {
  cplx value{};
  bool ok = false;
};

// Damped Newton on a holomorphic residual, derivative by central differences.
// A numerically flat basin (residual tiny on a whole neighbourhood, as happens
// when the orbit shoots through a pole and the tail forgets lambda) is refused
// rather than reported as a root.
template <class Fn>
ParamErr newton_param(const Fn& G, cplx guess, cplx& lambda, double& resid,
                      int& steps) {
  cplx l = guess;
  Residual g = G(l);
  for (steps = 0; steps < kNewtonSteps; ++steps) {
    if (!g.ok) return ParamErr::NoConvergence;
    if (std::abs(g.value) < kTol) {
      double off = 1e-5 * std::max(1.0, std::abs(l));
      Residual probe = G(l + cplx(off, 0.7 * off));
      if (probe.ok && std::abs(probe.value) < 1e-8) return ParamErr::NoConvergence;
      lambda = l;
      resid = std::abs(g.value);
      return ParamErr::None;
    }
    double h = 1e-7 * std::max(1.0, std::abs(l));
    Residual gp = G(l + h), gm = G(l - h);
    if (!gp.ok || !gm.ok) return ParamErr::NoConvergence;
    cplx d = (gp.value - gm.value) / (2.0 * h);
    if (!finite_c(d) || std::abs(d) == 0.0) return ParamErr::NoConvergence;
    cplx step = g.value / d;
    double scale = 1.0;
    bool accepted = false;
    for (int half = 0; half <= kHalvings; ++half, scale *= 0.5) {
      cplx ln = l - scale * step;
      Residual gn = G(ln);
      if (gn.ok && std::abs(gn.value) < std::abs(g.value)) {
        l = ln;
        g = gn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return ParamErr::NoConvergence;
  }
  return ParamErr::NoConvergence;
}

// Newton from a rough guess can slide into an exponential valley where the
// residual decays without a zero. The step magnitude |G/G'| estimates the
// distance to a root (and stays bounded below in a valley), so rescan the
// neighbourhood for its argmin and retry from there.
template <class Fn>
bool rescue_seed(const Fn& G, cplx guess, double radius, cplx& seed) {
  const int n = 24;
  double best = 1.0; // farther than this is not a usable seed
  bool found = false;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      cplx l = guess + cplx((((ix + 0.5) / n) - 0.5) * 2.0 * radius,
                            (((iy + 0.5) / n) - 0.5) * 2.0 * radius);
      Residual g = G(l);
      if (!g.ok) continue;
      double h = 1e-7 * std::max(1.0, std::abs(l));
      Residual gp = G(l + h), gm = G(l - h);
      if (!gp.ok || !gm.ok) continue;
      cplx d = (gp.value - gm.value) / (2.0 * h);
      double step = std::abs(g.value / d);
      if (std::isfinite(step) && step < best) {
        best = step;
        seed = l;
        found = true;
      }
    }
  return found;
}

template <class Fn>
ParamErr newton_with_rescue(const Fn& G, cplx guess, cplx& lambda, double& resid,
                            int& steps) {
  ParamErr err = newton_param(G, guess, lambda, resid, steps);
  if (err != ParamErr::NoConvergence) return err;
  cplx seed;
  if (!rescue_seed(G, guess, 1.5, seed)) return err;
  return newton_param(G, seed, lambda, resid, steps);
}

Residual vc_residual(const FamilySlice& F, cplx l, int order, long pole_index) {
  if (F.is_parameter_singular(l)) return {};
  cplx z = F.free_av(l);
  if (!regular(z)) return {};
  for (int j = 0; j < order - 2; ++j) {
    z = F.eval(l, z);
    if (!regular(z)) return {};
  }
  cplx pole = F.pole_by_index(l, pole_index);
  if (is_inf_point(pole)) return {};
  return {z - pole, true};
}

cplx singular_value(const FamilySlice& F, cplx l, int sv_index) {
  if (sv_index == 0) return F.free_av(l);
  auto others = F.other_singular_values(l);
  if (sv_index - 1 >= int(others.size())) return cplx(kInfPoint, 0.0);
  return others[std::size_t(sv_index - 1)];
}

Residual mis_residual(const FamilySlice& F, cplx l, int m, int n, int sv_index,
                      cplx* landing = nullptr) {
  if (F.is_parameter_singular(l)) return {};
  cplx z = singular_value(F, l, sv_index);
  if (!regular(z)) return {};
  cplx zn = z;
  for (int j = 1; j <= m; ++j) {
    z = F.eval(l, z);
    if (!regular(z)) return {};
    if (j == n) zn = z;
  }
  if (landing) *landing = zn;
  return {z - zn, true};
}

// Chordal pole proximity at the sharpness of an exact hit.
bool on_pole(const FamilySlice& F, cplx l, cplx z, long* index = nullptr) {
  double d = 0.0;
  auto p = F.nearest_pole(l, z, d);
  if (!p) return false;
  if (index) *index = p->index;
  return chordal(z, p->z) < 1e-9;
}

} // namespace

ParamErr solve_virtual_cycle(const FamilySlice& F, cplx guess, int order,
                             long pole_index, VirtualCycleHit& out) {
  out = {};
  out.order = order;
  out.pole_index = pole_index;
  if (!F.has_poles()) return ParamErr::FamilyHasNoPoles;
  if (order < 2) return ParamErr::BadArgument;

  auto G = [&](cplx l) { return vc_residual(F, l, order, pole_index); };
  ParamErr err = newton_with_rescue(G, guess, out.lambda, out.residual, out.steps);
  if (err != ParamErr::None) return err;

  out.points.clear();
  cplx z = F.free_av(out.lambda);
  for (int j = 0; j <= order - 2; ++j) {
    if (j > 0) z = F.eval(out.lambda, z);
    out.points.push_back(z);
    if (j < order - 2 && on_pole(F, out.lambda, z, &out.actual_pole_index)) {
      out.actual_order = j + 2;
      return ParamErr::OrbitThroughPole;
    }
  }
  return ParamErr::None;
}

ParamErr solve_misiurewicz(const FamilySlice& F, cplx guess, int m, int n,
                           int sv_index, MisiurewiczHit& out) {
  out = {};
  out.m = m;
  out.n = n;
  out.sv_index = sv_index;
  if (m <= n || n < 0 || sv_index < 0) return ParamErr::BadArgument;
  if (sv_index > int(F.other_singular_values(guess).size()))
    return ParamErr::BadArgument;

  auto H = [&](cplx l) { return mis_residual(F, l, m, n, sv_index); };
  ParamErr err = newton_with_rescue(H, guess, out.lambda, out.residual, out.steps);
  if (err != ParamErr::None) return err;

  mis_residual(F, out.lambda, m, n, sv_index, &out.landing);

  // Walk the whole pre-orbit once more: a segment through a pole means the
  // equation was satisfied by accident of the tail, not by a landing cycle.
  if (F.has_poles()) {
    cplx w = singular_value(F, out.lambda, sv_index);
    for (int j = 0; j < m; ++j) {
      if (on_pole(F, out.lambda, w)) return ParamErr::OrbitThroughPole;
      w = F.eval(out.lambda, w);
    }
  }

  int q = m - n;
  cplx log_mult{0.0, 0.0};
  cplx w = out.landing;
  for (int j = 0; j < q; ++j) {
    log_mult += F.log_deriv_z(out.lambda, w);
    w = F.eval(out.lambda, w);
  }
  out.multiplier = exp_saturated(log_mult);
  out.repelling_check = std::abs(out.multiplier);
  if (!(log_mult.real() > 0.0)) return ParamErr::NotRepelling;
  return ParamErr::None;
}

ParamErr density_probe(const FamilySlice& F, cplx center,
                       const std::vector<double>& radii,
                       std::vector<DensityHit>& out, int max_order,
                       int grid_n) {
  out.clear();
  if (!F.has_poles()) return ParamErr::FamilyHasNoPoles;
  if (radii.empty() || max_order < 2 || grid_n < 8) return ParamErr::BadArgument;
  for (double r : radii)
    if (!(r > 0.0)) return ParamErr::BadArgument;

  for (double r : radii) {
    // best sample per (iterate, pole branch): proximity argmin is the scan
    std::map<std::pair<int, long>, std::pair<double, cplx>> best;
    for (int iy = 0; iy < grid_n; ++iy)
      for (int ix = 0; ix < grid_n; ++ix) {
        cplx l = center + cplx(((ix + 0.5) / grid_n - 0.5) * 2.0 * r,
                               ((iy + 0.5) / grid_n - 0.5) * 2.0 * r);
        if (std::abs(l - center) > r) continue;
        if (F.is_parameter_singular(l)) continue;
        cplx z = F.free_av(l);
        for (int j = 0; j <= max_order - 2; ++j) {
          if (!regular(z) || std::abs(z) > 1e8) break;
          double d = 0.0;
          auto p = F.nearest_pole(l, z, d);
          if (p && d <= 1.0) {
            auto key = std::make_pair(j, p->index);
            auto it = best.find(key);
            if (it == best.end() || d < it->second.first) best[key] = {d, l};
          }
          z = F.eval(l, z);
        }
      }

    std::vector<std::pair<double, std::pair<std::pair<int, long>, cplx>>> ranked;
    for (const auto& [key, val] : best)
      ranked.push_back({val.first, {key, val.second}});
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    DensityHit dh;
    dh.radius = r;
    int tried = 0;
    for (const auto& cand : ranked) {
      if (++tried > 8) break;
      int order = cand.second.first.first + 2;
      long index = cand.second.first.second;
      VirtualCycleHit h;
      if (solve_virtual_cycle(F, cand.second.second, order, index, h) !=
          ParamErr::None)
        continue;
      double dist = std::abs(h.lambda - center);
      if (dist <= r && dist > 1e-8 * std::max(1.0, std::abs(center)) &&
          !F.is_parameter_singular(h.lambda)) {
        dh.found = true;
        dh.hit = h;
        dh.distance = dist;
        break;
      }
    }
    out.push_back(dh);
  }
  return ParamErr::None;
}

} // namespace merodyn

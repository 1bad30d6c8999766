#include "merodyn/orbit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace merodyn {

namespace {

constexpr double kDetectTol = 1e-9; // spherical tail-similarity tolerance

// squared-form chordal comparison: chordal(z,w) < tol, no square roots
inline bool chordal_lt(cplx z, double nz2, cplx w, double nw2, double tol) {
  return 4.0 * std::norm(z - w) < tol * tol * nz2 * nw2;
}

inline double norm1p(cplx z) { return 1.0 + std::norm(z); }

// one forward pass of length `period`; returns false if the orbit leaves the
// sphere horizon mid-cycle
bool cycle_pass(const FamilySlice& F, cplx lambda, cplx z0, int period,
                std::vector<cplx>& pts, cplx& logd, cplx& end) {
  pts.resize(period);
  logd = cplx(0.0, 0.0);
  cplx w = z0;
  for (int i = 0; i < period; ++i) {
    if (is_inf_point(w)) return false;
    pts[i] = w;
    logd += F.log_deriv_z(lambda, w);
    w = F.eval(lambda, w);
  }
  end = w;
  return !is_inf_point(end);
}

// rotate so that points[1] is the cycle point nearest the free value and
// points[0] its predecessor
void relabel_near_free(std::vector<cplx>& pts, cplx v) {
  int p = int(pts.size());
  if (p < 2) return;
  int best = 0;
  double bd = chordal(pts[0], v);
  for (int i = 1; i < p; ++i) {
    double d = chordal(pts[i], v);
    if (d < bd) { bd = d; best = i; }
  }
  int start = (best - 1 + p) % p;
  std::vector<cplx> rot(p);
  for (int i = 0; i < p; ++i) rot[i] = pts[(start + i) % p];
  pts.swap(rot);
}

} // namespace

RefineErr refine_cycle(const FamilySlice& F, cplx lambda, cplx seed, int period,
                       CycleRecord& out) {
  std::vector<cplx> pts;
  cplx logd, end;
  cplx z0 = seed;
  double res = std::numeric_limits<double>::infinity();

  for (int it = 0; it < 60; ++it) {
    if (!cycle_pass(F, lambda, z0, period, pts, logd, end)) return RefineErr::NoConvergence;
    cplx Fv = end - z0;
    res = std::abs(Fv);
    if (res < 1e-13) break;
    cplx dF = exp_saturated(logd) - 1.0;
    if (std::abs(dF) < 1e-12) return RefineErr::NoConvergence;
    cplx step = Fv / dF;
    double damp = 1.0;
    bool moved = false;
    for (int h = 0; h < 8; ++h) {
      cplx zt = z0 - damp * step;
      std::vector<cplx> tp;
      cplx tl, te;
      if (cycle_pass(F, lambda, zt, period, tp, tl, te) && std::abs(te - zt) < res) {
        z0 = zt;
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved) return RefineErr::NoConvergence;
  }
  if (!cycle_pass(F, lambda, z0, period, pts, logd, end)) return RefineErr::NoConvergence;
  if (!(std::abs(end - z0) < 1e-12)) return RefineErr::NoConvergence;

  for (int i = 0; i < period; ++i)
    for (int j = i + 1; j < period; ++j)
      if (chordal(pts[i], pts[j]) <= 1e-8) return RefineErr::PeriodCollapse;

  relabel_near_free(pts, F.free_av(lambda));
  out.points = pts;
  out.period = period;
  out.log_multiplier = logd;
  out.multiplier = exp_saturated(logd);
  out.residual = std::abs(end - z0);
  return RefineErr::None;
}

namespace {

// refine at the detected period, enforce minimality by the divisor rule, and
// classify against the persistent cycles
struct Classified {
  bool ok = false;
  bool captured = false;
  int captured_index = -1;
  CycleRecord rec;
};

Classified classify_detected(const FamilySlice& F, cplx lambda, cplx seed, int k,
                             const std::vector<PersistentCycle>& pcs,
                             const std::vector<std::vector<cplx>>& pc_pts) {
  Classified c;
  CycleRecord rec;
  if (refine_cycle(F, lambda, seed, k, rec) != RefineErr::None) return c;

  // divisor minimality: a near-miss at a multiple of the true period re-refines
  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    for (int d = 1; d < rec.period; ++d) {
      if (rec.period % d != 0) continue;
      cplx w = rec.points[0];
      for (int i = 0; i < d; ++i) w = F.eval(lambda, w);
      if (std::abs(w - rec.points[0]) <= 1e-6) {
        CycleRecord sub;
        if (refine_cycle(F, lambda, rec.points[0], d, sub) == RefineErr::None) {
          rec = sub;
          shrunk = true;
        }
        break;
      }
    }
  }

  // attracting only; anything drifting along a neutral cycle stays unclassified
  if (rec.log_multiplier.real() > 1e-12) return c;

  for (size_t pi = 0; pi < pcs.size(); ++pi) {
    if (pcs[pi].period != rec.period) continue;
    bool all = true;
    for (cplx q : pc_pts[pi]) {
      bool hit = false;
      for (cplx a : rec.points)
        if (chordal(a, q) <= 1e-8) { hit = true; break; }
      if (!hit) { all = false; break; }
    }
    if (all) {
      c.captured = true;
      c.captured_index = int(pi);
      break;
    }
  }
  c.ok = true;
  c.rec = std::move(rec);
  return c;
}

} // namespace

OrbitErr iterate_free_av(const FamilySlice& F, cplx lambda, const IterationBudget& b,
                         OrbitResult& out) {
  out = OrbitResult{};
  if (F.is_parameter_singular(lambda)) return OrbitErr::ParameterSingularity;

  const auto pcs = F.persistent_cycles();
  std::vector<std::vector<cplx>> pc_pts;
  std::vector<double> pc_norm2;
  for (const auto& pc : pcs) {
    pc_pts.push_back(pc.points(lambda));
    for (cplx q : pc_pts.back()) pc_norm2.push_back(norm1p(q));
  }
  std::vector<int> streak(pcs.size(), 0);

  const int win = b.max_period + 1;
  std::vector<cplx> hist(win);
  std::vector<double> hist_n2(win);
  const bool poles = F.has_poles();

  cplx z = F.free_av(lambda);
  int next_detect = b.transient;

  for (int n = 0; n < b.max_iter; ++n) {
    double nz2 = norm1p(z);

    if (poles) {
      double d = 0.0;
      auto p = F.nearest_pole(lambda, z, d);
      if (p && chordal(z, p->z) < b.eps_hit) {
        out.status = OrbitStatus::PoleHit;
        out.pole_hit_order = n + 1;
        out.pole_index = p->index;
        out.iterations = n;
        return OrbitErr::None;
      }
    }

    {
      size_t qi = 0;
      for (size_t pi = 0; pi < pcs.size(); ++pi) {
        bool near = false;
        for (cplx q : pc_pts[pi]) {
          if (chordal_lt(z, nz2, q, pc_norm2[qi], b.eps_capture)) near = true;
          ++qi;
        }
        streak[pi] = near ? streak[pi] + 1 : 0;
        if (streak[pi] >= b.capture_confirm * pcs[pi].period) {
          out.status = OrbitStatus::CapturedPersistent;
          out.captured_index = int(pi);
          out.iterations = n;
          CycleRecord rec;
          rec.points = pc_pts[pi];
          rec.period = pcs[pi].period;
          rec.multiplier = pcs[pi].multiplier;
          rec.log_multiplier = (std::abs(rec.multiplier) == 0.0)
                                   ? cplx(-std::numeric_limits<double>::infinity(), 0.0)
                                   : std::log(rec.multiplier);
          rec.residual = 0.0;
          out.cycle = rec;
          return OrbitErr::None;
        }
      }
    }

    if (n >= b.transient && n >= next_detect) {
      int kmax = std::min(b.max_period, n);
      for (int k = 1; k <= kmax; ++k) {
        int idx = (n - k) % win;
        if (!chordal_lt(z, nz2, hist[idx], hist_n2[idx], kDetectTol)) continue;
        Classified c = classify_detected(F, lambda, z, k, pcs, pc_pts);
        if (c.ok) {
          out.status = c.captured ? OrbitStatus::CapturedPersistent
                                  : OrbitStatus::ConvergedFreeCycle;
          out.captured_index = c.captured_index;
          out.cycle = std::move(c.rec);
          out.iterations = n;
          return OrbitErr::None;
        }
        next_detect = n + 25; // near-neutral refinement failed; back off
        break;
      }
    }

    hist[n % win] = z;
    hist_n2[n % win] = nz2;
    z = F.eval(lambda, z);

    if (is_inf_point(z)) {
      out.status = OrbitStatus::Undetermined;
      out.escaped = true;
      out.iterations = n + 1;
      return OrbitErr::None;
    }
  }

  out.status = OrbitStatus::Undetermined;
  out.iterations = b.max_iter;
  int kmax = std::min(b.max_period, b.max_iter - 1);
  double drift = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kmax; ++k) {
    int idx = (b.max_iter - k) % win;
    drift = std::min(drift, chordal(z, hist[idx]));
  }
  out.near_indifferent = drift < 1e-3;
  return OrbitErr::None;
}

MultErr multiplier_at(const FamilySlice& F, cplx lambda, const IterationBudget& b,
                      CycleRecord& out) {
  OrbitResult r;
  if (iterate_free_av(F, lambda, b, r) == OrbitErr::ParameterSingularity)
    return MultErr::ParameterSingularity;
  if (r.status == OrbitStatus::ConvergedFreeCycle ||
      r.status == OrbitStatus::CapturedPersistent) {
    out = *r.cycle;
    return MultErr::None;
  }
  return MultErr::NotAttracting;
}

// ---------------------------------------------------------------------------

bool budget_from_json(const std::string& text, IterationBudget& out, std::string* err) {
  auto fail = [&](const std::string& m) {
    if (err) *err = m;
    return false;
  };
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) return fail("budget: invalid JSON");
  if (!j.is_object()) return fail("budget: expected an object");
  IterationBudget b;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "max_iter" || k == "transient" || k == "max_period") {
      if (!v.is_number_integer()) return fail("budget: key '" + k + "' must be an integer");
      if (k == "max_iter") b.max_iter = v.get<int>();
      else if (k == "transient") b.transient = v.get<int>();
      else b.max_period = v.get<int>();
    } else if (k == "eps_hit" || k == "eps_capture") {
      if (!v.is_number()) return fail("budget: key '" + k + "' must be a number");
      if (k == "eps_hit") b.eps_hit = v.get<double>();
      else b.eps_capture = v.get<double>();
    } else {
      return fail("budget: unknown key '" + k + "'");
    }
  }
  if (b.max_iter < 1 || b.transient < 0 || b.max_period < 1 || b.eps_hit <= 0 ||
      b.eps_capture <= 0)
    return fail("budget: values out of range");
  out = b;
  return true;
}

std::string budget_to_json(const IterationBudget& b) {
  nlohmann::json j{{"max_iter", b.max_iter},
                   {"transient", b.transient},
                   {"max_period", b.max_period},
                   {"eps_hit", b.eps_hit},
                   {"eps_capture", b.eps_capture}};
  return j.dump();
}

} // namespace merodyn

#pragma once

#include "family.hpp"

#include <vector>

namespace merodyn {

enum class ParamErr {
  None = 0,
  BadArgument,
  FamilyHasNoPoles,
  NoConvergence,    // Newton budget spent, or the residual has no isolated zero
  OrbitThroughPole, // an earlier iterate already sits on a pole
  NotRepelling,     // landing cycle is attracting or indifferent
};

// lambda* with f^{order-2}(v(lambda*)) = pole_{pole_index}(lambda*): the free
// value runs v -> f(v) -> .. -> pole -> inf and the asymptotic value closes
// the loop.
struct VirtualCycleHit {
  cplx lambda{};
  int order = 0;
  long pole_index = 0;
  double residual = 0.0; // |f^{order-2}(v) - pole| at lambda
  int steps = 0;
  int actual_order = 0;        // on OrbitThroughPole: the order the orbit realises
  long actual_pole_index = 0;  // .. and the pole it runs through
  std::vector<cplx> points;    // the finite virtual cycle points, points[0] = v
};

ParamErr solve_virtual_cycle(const FamilySlice& F, cplx guess, int order,
                             long pole_index, VirtualCycleHit& out);

// lambda* with f^m(s) = f^n(s) for a singular value s, landing on a repelling
// cycle of period m-n. sv_index 0 is the free asymptotic value, k >= 1 picks
// other_singular_values()[k-1].
struct MisiurewiczHit {
  cplx lambda{};
  int m = 0, n = 0;
  int sv_index = 0;
  cplx landing{};    // f^n(s)
  cplx multiplier{}; // (f^{m-n})' around the landing cycle
  double repelling_check = 0.0; // |multiplier|
  double residual = 0.0;
  int steps = 0;
};

ParamErr solve_misiurewicz(const FamilySlice& F, cplx guess, int m, int n,
                           int sv_index, MisiurewiczHit& out);

struct DensityHit {
  double radius = 0.0;
  bool found = false;
  VirtualCycleHit hit;   // valid when found
  double distance = 0.0; // |hit.lambda - center|
};

// For each radius, scans a grid_n^2 subgrid of the disk around center for
// orbits passing near a pole within the first max_order-1 iterates of the
// free value and polishes the best candidates into virtual cycle parameters.
// A hit must land inside the disk and be distinct from center itself; a miss
// is recorded per radius, not fatal.
ParamErr density_probe(const FamilySlice& F, cplx center,
                       const std::vector<double>& radii,
                       std::vector<DensityHit>& out, int max_order = 6,
                       int grid_n = 64);

} // namespace merodyn

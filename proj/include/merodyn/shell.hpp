#pragma once

#include "render.hpp"
#include "special_params.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace merodyn {

enum class ShellErr { None = 0, BadSeed, BadLevel, LeftComponent };

enum class RayLanding {
  Unresolved = 0,       // stopped at t_min without a diagnosis (extend off)
  FiniteVirtualCenter,  // converged to a finite virtual cycle parameter
  DivergesToInfinity,   // |lambda| crossed the cutoff
  AtParameterSingularity,
  Stalled,              // see stall_reason
};

struct RaySample {
  double t = 0.0;
  cplx lambda{};
  double residual = 0.0; // |log rho - (t + i phi)| after correction
  CycleRecord cycle;     // refined cycle at lambda
};

struct InternalRay {
  int period = 0;
  double theta = 0.0; // angle actually traced, in turns, normalised to [0,1)
  std::vector<RaySample> samples; // t strictly decreasing
  RayLanding landing = RayLanding::Unresolved;
  std::string stall_reason;
  cplx center{};              // landing FiniteVirtualCenter: polished lambda*
  VirtualCycleHit center_hit; // .. and the matching hit
  cplx singularity{};         // landing AtParameterSingularity
};

struct RayOptions {
  // NaN inherits the phase of the seed multiplier; theta_offset (in turns)
  // is added on top either way. The ray is rotated to the target angle at
  // fixed modulus before descending.
  double theta = std::numeric_limits<double>::quiet_NaN();
  double theta_offset = 0.0;
  double t_min = -18.0;
  bool extend = true;    // keep descending past t_min until the landing resolves
  double t_hard = -60.0; // absolute floor for the extension
  double divergence_cutoff = 1e4;
};

// Follows lambda(t) with |rho(lambda(t))| = e^t from the component of `seed`
// down toward its center. BadSeed when the seed orbit is not an attracting
// free cycle; LeftComponent when a mid-ray reclassification disagrees with
// the seed period (a continuation bug, not a geometry outcome).
ShellErr trace_internal_ray(const FamilySlice& F, cplx seed, const RayOptions& opt,
                            InternalRay& out);

enum class CenterKind { FiniteCenter, AtInfinity, AtParameterSingularity, Inconclusive };

struct CenterResult {
  CenterKind kind = CenterKind::Inconclusive;
  VirtualCycleHit hit; // FiniteCenter
  cplx singularity{};  // AtParameterSingularity
};

// Diagnoses where a traced ray lands. Finite answers are polished through
// solve_virtual_cycle and re-verified, so a wrong guess fails closed.
CenterResult locate_virtual_center(const FamilySlice& F, const InternalRay& ray);

// Complex multiplier per cell for Attracting cells, NaN elsewhere.
std::vector<cplx> multiplier_field(const PlaneGrid& grid);

struct BoundaryTrace {
  double level = 0.0;
  std::vector<cplx> points;
  bool closed = false; // last point returned to the first within 1e-6
};

// Walks the level curve |rho| = level through the component of `seed`.
// BadLevel unless 0 < level < 1. An open trace (step cap or corrector stall)
// comes back with closed = false.
ShellErr trace_boundary_level(const FamilySlice& F, cplx seed, double level,
                              BoundaryTrace& out, int max_steps = 20000);

} // namespace merodyn

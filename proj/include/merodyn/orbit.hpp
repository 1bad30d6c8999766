#pragma once

#include "family.hpp"

#include <optional>
#include <string>
#include <vector>

namespace merodyn {

struct IterationBudget {
  int max_iter = 5000;
  int transient = 200;
  int max_period = 64;
  double eps_hit = 1e-9;     // spherical pole-proximity tolerance
  double eps_capture = 1e-7; // spherical capture tolerance
  int capture_confirm = 3;   // consecutive periods required to call a capture
};

// JSON round trip for budgets; keys are exactly
// {max_iter, transient, max_period, eps_hit, eps_capture}, all optional on
// input, unknown keys rejected.
bool budget_from_json(const std::string& text, IterationBudget& out,
                      std::string* err = nullptr);
std::string budget_to_json(const IterationBudget& b);

enum class OrbitStatus { ConvergedFreeCycle, CapturedPersistent, PoleHit, Undetermined };

struct CycleRecord {
  std::vector<cplx> points; // forward orbit order; for period >= 2, points[1]
                            // is the cycle point nearest the free value
  int period = 0;
  cplx multiplier{0.0, 0.0};     // exp of log_multiplier, saturates at 0 / inf
  cplx log_multiplier{0.0, 0.0}; // real part is exact log|rho|
  double residual = 0.0;         // |f^p(a0) - a0|
};

struct OrbitResult {
  OrbitStatus status = OrbitStatus::Undetermined;
  int iterations = 0;
  int pole_hit_order = 0; // status PoleHit: f^(order-1)(v) lies on a pole
  long pole_index = 0;
  std::optional<CycleRecord> cycle;
  int captured_index = -1; // which persistent cycle, status CapturedPersistent
  bool escaped = false;    // orbit crossed the sphere horizon
  bool near_indifferent = false; // budget ran out while barely moving
};

enum class OrbitErr { None, ParameterSingularity };

// Runs the forward orbit of the free asymptotic value and classifies it.
OrbitErr iterate_free_av(const FamilySlice& F, cplx lambda, const IterationBudget& b,
                         OrbitResult& out);

enum class RefineErr { None, NoConvergence, PeriodCollapse };

// Newton refinement of a period-`period` point from `seed` (damped, at most 60
// steps with up to 8 halvings each). On success the record satisfies
// residual < 1e-12 and pairwise-distinct points (spherical 1e-8).
RefineErr refine_cycle(const FamilySlice& F, cplx lambda, cplx seed, int period,
                       CycleRecord& out);

enum class MultErr { None, ParameterSingularity, NotAttracting };

// Multiplier of the attracting cycle that captures the free asymptotic value.
MultErr multiplier_at(const FamilySlice& F, cplx lambda, const IterationBudget& b,
                      CycleRecord& out);

} // namespace merodyn

#pragma once

#include "complex_util.hpp"

#include <functional>

namespace merodyn {

using CFn = std::function<cplx(cplx)>;

struct SchwarzianResult {
  bool ok = false; // false: |f'(z)| too small to divide by
  cplx value{0.0, 0.0};
};

// Schwarzian derivative S(f)(z) = f'''/f' - (3/2)(f''/f')^2, computed from the
// first derivative by Richardson-extrapolated central differences.
SchwarzianResult schwarzian(const CFn& f, const CFn& fp, cplx z);

struct CocycleCheck {
  bool ok = false;
  double residual = 0.0; // |S(g o f) - (S(g) o f) (f')^2 - S(f)|, relative
};

CocycleCheck check_cocycle(const CFn& f, const CFn& fp, const CFn& g, const CFn& gp,
                           cplx z);

} // namespace merodyn

#pragma once

#include "complex_util.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace merodyn {

struct Pole {
  cplx z;
  long index = 0; // branch index; meaning is family-specific but stable
  int order = 1;
};

// A cycle that exists for every parameter in the slice with constant multiplier.
struct PersistentCycle {
  int period = 1;
  cplx multiplier{0.0, 0.0};
  std::function<std::vector<cplx>(cplx)> points; // lambda -> cycle points
};

// Parameter-plane symmetry: lambda -> map(lambda) conjugate dynamics.
struct Symmetry {
  std::string name;
  bool antiholomorphic = false;
  std::function<cplx(cplx)> map;
};

// One dynamically parametrised slice f_lambda with a single free asymptotic
// value moving affinely in lambda. Evaluations are total: overflow and poles
// come back as the infinity tag (see sphere_fix), never NaN.
class FamilySlice {
public:
  virtual ~FamilySlice() = default;

  virtual const std::string& id() const = 0;

  virtual cplx eval(cplx lambda, cplx z) const = 0;
  virtual cplx deriv_z(cplx lambda, cplx z) const = 0;
  // log of deriv_z, computed without overflow; real part is exact log|f'|,
  // imaginary part is some branch of the argument.
  virtual cplx log_deriv_z(cplx lambda, cplx z) const = 0;

  // The free asymptotic value (affine in lambda).
  virtual cplx free_av(cplx lambda) const = 0;
  // Remaining finite singular values (asymptotic or critical), fixed or tied.
  virtual std::vector<cplx> other_singular_values(cplx lambda) const = 0;

  virtual bool has_poles() const = 0;
  virtual int pole_order() const { return 1; }
  // Closed-form pole for a branch index. Only meaningful when has_poles().
  virtual cplx pole_by_index(cplx lambda, long k) const;
  // All poles within euclidean `radius` of `center`.
  virtual std::vector<Pole> poles_in(cplx lambda, cplx center, double radius) const;
  // Nearest pole to z with its euclidean distance; nullopt when the family is
  // entire or no pole is resolvable at this lambda.
  virtual std::optional<Pole> nearest_pole(cplx lambda, cplx z, double& dist) const;

  // Parameters where the slice degenerates (excluded from the slice).
  virtual std::vector<cplx> parameter_singularities() const = 0;
  virtual std::vector<PersistentCycle> persistent_cycles() const { return {}; }
  virtual std::vector<Symmetry> symmetries() const { return {}; }

  bool is_parameter_singular(cplx lambda, double tol = 1e-12) const;
};

using FamilyPtr = std::shared_ptr<const FamilySlice>;

FamilyPtr make_exponential();                       // e^z + lambda
FamilyPtr make_tangent();                           // lambda tan z
FamilyPtr make_fixed_multiplier_slice(cplx rho0);   // fixed point 0 with multiplier rho0
FamilyPtr make_pi_slice();                          // second asymptotic value pinned at pi*i
FamilyPtr make_tanh_sq();                           // lambda tanh^2 z
FamilyPtr make_tanh_zsq();                          // lambda tanh(z^2)
FamilyPtr make_precomposed_slice();                 // F2 map precomposed with z^2

// Registry lookup: "exp", "tan", "pi-slice", "tanh2", "tanhz2", "precomp",
// "f2rho:<re>,<im>". Returns nullptr for an unknown id or invalid argument.
FamilyPtr make_family(const std::string& id);

// Normal form (a e^z + b)/(c e^z + d) with ad - bc = 1.
struct F2Map {
  cplx a, b, c, d;
  cplx eval(cplx z) const;
  cplx deriv(cplx z) const; // e^z / (c e^z + d)^2
  cplx av_plus() const;     // asymptotic value for Re z -> +inf
  cplx av_minus() const;    // asymptotic value for Re z -> -inf
};

// Throws std::invalid_argument unless ad - bc = 1 (within 1e-12).
F2Map f2_normal_form(cplx a, cplx b, cplx c, cplx d);

} // namespace merodyn

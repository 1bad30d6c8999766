#pragma once

#include "orbit.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace merodyn {

enum class CellStatus : uint8_t { Undetermined = 0, Attracting = 1, Captured = 2, PoleHit = 3 };

struct PixelClass {
  CellStatus status = CellStatus::Undetermined;
  int32_t period = 0;
  int32_t iterations = 0;
  double log_abs_multiplier = std::numeric_limits<double>::quiet_NaN();
  double arg_multiplier = std::numeric_limits<double>::quiet_NaN();
};

struct Window {
  cplx center{0.0, 0.0};
  double width = 0.0;
  double height = 0.0;
};

// Row-major grid of cell classifications; iy increases upward (math
// orientation), cell centers sit at half-integer offsets.
struct PlaneGrid {
  Window window;
  int nx = 0, ny = 0;
  std::string family_id;
  IterationBudget budget;
  std::vector<PixelClass> cells;

  cplx lambda_at(int ix, int iy) const {
    double re = window.center.real() + ((ix + 0.5) / nx - 0.5) * window.width;
    double im = window.center.imag() + ((iy + 0.5) / ny - 0.5) * window.height;
    return cplx(re, im);
  }
  const PixelClass& at(int ix, int iy) const { return cells[size_t(iy) * nx + ix]; }
};

enum class RenderErr { None, BadResolution, BadWindow };

// Deterministic tiled render: output is byte-identical for any thread count.
// threads <= 0 picks the hardware concurrency.
RenderErr render_plane(const FamilySlice& F, const Window& w, int nx, int ny,
                       const IterationBudget& b, int threads, PlaneGrid& out);

struct ComponentMask {
  int nx = 0, ny = 0;
  std::vector<uint8_t> mask; // 1 = inside
  long count = 0;
  bool touches_edge = false;
  CellStatus status = CellStatus::Undetermined;
  int period = 0;
  int min_x = 0, max_x = -1, min_y = 0, max_y = -1;
};

enum class ComponentErr { None, SeedOutside, BadSeed };

// 4-connected flood over cells matching the seed's (status, period).
// BadSeed when the seed cell is Undetermined.
ComponentErr component_extract(const PlaneGrid& g, cplx seed, ComponentMask& out);

} // namespace merodyn

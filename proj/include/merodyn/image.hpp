#pragma once

#include "render.hpp"

#include <cstdint>
#include <string>

namespace merodyn {

struct RGB {
  uint8_t r = 0, g = 0, b = 0;
};

// Fixed palette: period 1 yellow, 2 cyan, 3 red, 4 olive, periods >= 5 cycle
// through a 16-entry table; captured green, pole hits white, undetermined black.
RGB cell_color(const PixelClass& c);

enum class EmitErr { None, IoError };

EmitErr emit_ppm(const PlaneGrid& g, const std::string& path); // binary P6
EmitErr emit_png(const PlaneGrid& g, const std::string& path); // 8-bit RGB
EmitErr emit_csv(const PlaneGrid& g, const std::string& path);

// The exact bytes emit_csv writes; goldens hash this.
std::string csv_string(const PlaneGrid& g);

// FNV-1a over csv_string
uint64_t grid_hash(const PlaneGrid& g);

} // namespace merodyn

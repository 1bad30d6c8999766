#include <doctest.h>

#include "merodyn/image.hpp"
#include "merodyn/render.hpp"

#include <cstdio>
#include <fstream>

using namespace merodyn;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

PlaneGrid render_tan_square(int threads) {
  auto F = make_tangent();
  IterationBudget b;
  b.max_iter = 600;
  PlaneGrid g;
  REQUIRE(render_plane(*F, {cplx(0, 0), 6.0, 6.0}, 64, 64, b, threads, g) ==
          RenderErr::None);
  return g;
}

} // namespace

TEST_SUITE_BEGIN("render");

TEST_CASE("grid geometry: half-integer cell centers, math orientation") {
  auto F = make_exponential();
  IterationBudget b;
  b.max_iter = 50;
  PlaneGrid g;
  REQUIRE(render_plane(*F, {cplx(-1, 0), 4.0, 2.0}, 8, 4, b, 1, g) == RenderErr::None);
  CHECK(g.lambda_at(0, 0) == cplx(-1 + (0.5 / 8 - 0.5) * 4.0, (0.5 / 4 - 0.5) * 2.0));
  CHECK(g.lambda_at(7, 3).real() == doctest::Approx(-1 + (7.5 / 8 - 0.5) * 4.0));
  CHECK(g.lambda_at(7, 3).imag() > 0.0); // top row is positive imaginary
}

TEST_CASE("render rejects bad inputs") {
  auto F = make_exponential();
  IterationBudget b;
  PlaneGrid g;
  CHECK(render_plane(*F, {cplx(0, 0), 1.0, 1.0}, 0, 8, b, 1, g) == RenderErr::BadResolution);
  CHECK(render_plane(*F, {cplx(0, 0), 1.0, 1.0}, 8, 20000, b, 1, g) ==
        RenderErr::BadResolution);
  CHECK(render_plane(*F, {cplx(0, 0), -1.0, 1.0}, 8, 8, b, 1, g) == RenderErr::BadWindow);
}

TEST_CASE("exp plane: attracting region and escape region land where they should") {
  auto F = make_exponential();
  IterationBudget b;
  PlaneGrid g;
  REQUIRE(render_plane(*F, {cplx(-1, 0), 6.0, 4.0}, 48, 32, b, 2, g) == RenderErr::None);
  // locate the cells holding -2 and +1.5
  int hits = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      cplx l = g.lambda_at(ix, iy);
      if (std::abs(l - cplx(-2, 0)) < 0.1) {
        CHECK(g.at(ix, iy).status == CellStatus::Attracting);
        CHECK(g.at(ix, iy).period == 1);
        ++hits;
      }
      if (std::abs(l - cplx(1.5, 0)) < 0.1) {
        CHECK(g.at(ix, iy).status == CellStatus::Undetermined);
        ++hits;
      }
    }
  CHECK(hits >= 2);
}

TEST_CASE("deterministic across thread counts, byte for byte") {
  PlaneGrid g1 = render_tan_square(1);
  PlaneGrid g4 = render_tan_square(4);
  CHECK(csv_string(g1) == csv_string(g4));
  CHECK(grid_hash(g1) == grid_hash(g4));
}

TEST_CASE("tan plane symmetries: conjugation exact, negation at status level") {
  PlaneGrid g = render_tan_square(2);
  int n = g.nx;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const PixelClass& a = g.at(ix, iy);
      // conjugation: lambda -> conj lambda is (iy -> n-1-iy)
      const PixelClass& c = g.at(ix, n - 1 - iy);
      CHECK(a.status == c.status);
      CHECK(a.period == c.period);
      CHECK(a.iterations == c.iterations);
      if (a.status == CellStatus::Attracting) {
        CHECK(a.log_abs_multiplier ==
              doctest::Approx(c.log_abs_multiplier).epsilon(1e-12));
      }
      // negation: orbits of -lambda are sign-alternating images of orbits of
      // lambda, so periods double or halve and a doubled period can overflow
      // max_period. Statuses agree when both sides resolve; a one-sided
      // Undetermined is only allowed when doubling was out of reach.
      const PixelClass& m = g.at(n - 1 - ix, n - 1 - iy);
      if (a.status != CellStatus::Undetermined && m.status != CellStatus::Undetermined) {
        CHECK(a.status == m.status);
        if (a.status == CellStatus::Attracting) {
          bool rel = m.period == a.period || m.period == 2 * a.period ||
                     a.period == 2 * m.period;
          CHECK(rel);
        }
      } else if (a.status == CellStatus::Attracting) {
        CHECK(2 * a.period > 64);
      } else if (m.status == CellStatus::Attracting) {
        CHECK(2 * m.period > 64);
      } else {
        CHECK(a.status == m.status);
      }
    }
}

TEST_CASE("tan plane content: unit disk, flanking components, pole dust") {
  PlaneGrid g = render_tan_square(2);
  // |lambda| < 1: the persistent-free attracting fixed point at the origin
  // does not exist (multiplier lambda nonconstant), the free value converges
  // to the origin fixed point: status Attracting period 1
  int disk = 0, right1 = 0, left2 = 0, pole = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      cplx l = g.lambda_at(ix, iy);
      const PixelClass& p = g.at(ix, iy);
      if (std::abs(l) < 0.9 && p.status == CellStatus::Attracting && p.period == 1) ++disk;
      if (std::abs(l - cplx(2.0, 0)) < 0.45 && p.status == CellStatus::Attracting &&
          p.period == 1)
        ++right1;
      if (std::abs(l - cplx(-2.0, 0)) < 0.45 && p.status == CellStatus::Attracting &&
          p.period == 2)
        ++left2;
      if (p.status == CellStatus::PoleHit) ++pole;
    }
  CHECK(disk > 150);
  CHECK(right1 > 10);
  CHECK(left2 > 10);
  CHECK(pole == 0); // exact prepoles have measure zero; no cell snaps to one
  // inside the disk the multiplier is lambda itself
  const PixelClass& c = g.at(37, 32); // lambda = (0.515625, 0.046875)
  cplx l = g.lambda_at(37, 32);
  REQUIRE(c.status == CellStatus::Attracting);
  CHECK(c.log_abs_multiplier == doctest::Approx(std::log(std::abs(l))).epsilon(1e-9));
  CHECK(c.arg_multiplier == doctest::Approx(std::arg(l)).epsilon(1e-9));
}

TEST_CASE("component extraction floods the unit disk and stops at its rim") {
  PlaneGrid g = render_tan_square(2);
  ComponentMask m;
  REQUIRE(component_extract(g, cplx(0.3, 0.2), m) == ComponentErr::None);
  CHECK(m.status == CellStatus::Attracting);
  CHECK(m.period == 1);
  CHECK(m.count > 150);
  // the disk has radius 1 inside a width-6 window: roughly pi/36 of the area
  CHECK(m.count < 700);
  CHECK(!m.touches_edge);
  CHECK(component_extract(g, cplx(100, 0), m) == ComponentErr::SeedOutside);
  // the slow collar just inside |lambda|=1 runs out of budget: BadSeed
  CHECK(component_extract(g, cplx(0.984, 0.047), m) == ComponentErr::BadSeed);
}

TEST_CASE("palette is pinned") {
  PixelClass p;
  p.status = CellStatus::Attracting;
  p.period = 1;
  CHECK((cell_color(p).r == 255 && cell_color(p).g == 255 && cell_color(p).b == 0));
  p.period = 2;
  CHECK((cell_color(p).r == 0 && cell_color(p).g == 255 && cell_color(p).b == 255));
  p.period = 3;
  CHECK((cell_color(p).r == 255 && cell_color(p).g == 0 && cell_color(p).b == 0));
  p.period = 4;
  CHECK((cell_color(p).r == 128 && cell_color(p).g == 128 && cell_color(p).b == 0));
  p.period = 5;
  RGB five = cell_color(p);
  p.period = 21; // 5 + 16: cycles back
  CHECK((cell_color(p).r == five.r && cell_color(p).g == five.g && cell_color(p).b == five.b));
  p.status = CellStatus::Captured;
  CHECK((cell_color(p).r == 0 && cell_color(p).g == 160 && cell_color(p).b == 0));
  p.status = CellStatus::PoleHit;
  CHECK(cell_color(p).r == 255);
  p.status = CellStatus::Undetermined;
  CHECK(cell_color(p).r == 0);
}

TEST_CASE("emitters: ppm header, png signature, csv shape") {
  auto F = make_exponential();
  IterationBudget b;
  b.max_iter = 60;
  PlaneGrid g;
  REQUIRE(render_plane(*F, {cplx(-1, 0), 4.0, 4.0}, 16, 12, b, 1, g) == RenderErr::None);

  REQUIRE(emit_ppm(g, "t_plane.ppm") == EmitErr::None);
  std::string ppm = slurp("t_plane.ppm");
  CHECK(ppm.rfind("P6\n16 12\n255\n", 0) == 0);
  CHECK(ppm.size() == 13 + 16 * 12 * 3);

  REQUIRE(emit_png(g, "t_plane.png") == EmitErr::None);
  std::string png = slurp("t_plane.png");
  REQUIRE(png.size() > 40);
  CHECK(png.compare(0, 8, "\x89PNG\r\n\x1a\n", 8) == 0);
  CHECK(png.compare(12, 4, "IHDR", 4) == 0);
  // big-endian dimensions
  CHECK(uint8_t(png[19]) == 16);
  CHECK(uint8_t(png[23]) == 12);

  REQUIRE(emit_csv(g, "t_plane.csv") == EmitErr::None);
  std::string csv = slurp("t_plane.csv");
  CHECK(csv.rfind("ix,iy,re_lambda,im_lambda,status,period,log_abs_multiplier,iters\n", 0) ==
        0);
  size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 1 + 16 * 12);
  CHECK(csv == csv_string(g));
  std::remove("t_plane.ppm");
  std::remove("t_plane.png");
  std::remove("t_plane.csv");
}

TEST_SUITE_END();

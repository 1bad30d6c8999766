#include "merodyn/render.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <thread>

namespace merodyn {

namespace {

constexpr int kTile = 64;
constexpr double kTwoPi = 6.283185307179586476925;

PixelClass classify_cell(const FamilySlice& F, cplx lambda, const IterationBudget& b) {
  PixelClass px;
  OrbitResult r;
  if (iterate_free_av(F, lambda, b, r) != OrbitErr::None) return px; // singular: stays Undetermined
  px.iterations = r.iterations;
  switch (r.status) {
    case OrbitStatus::ConvergedFreeCycle:
      px.status = CellStatus::Attracting;
      break;
    case OrbitStatus::CapturedPersistent:
      px.status = CellStatus::Captured;
      break;
    case OrbitStatus::PoleHit:
      px.status = CellStatus::PoleHit;
      return px;
    case OrbitStatus::Undetermined:
      return px;
  }
  if (r.cycle) {
    px.period = r.cycle->period;
    px.log_abs_multiplier = r.cycle->log_multiplier.real();
    px.arg_multiplier = std::remainder(r.cycle->log_multiplier.imag(), kTwoPi);
  }
  return px;
}

} // namespace

RenderErr render_plane(const FamilySlice& F, const Window& w, int nx, int ny,
                       const IterationBudget& b, int threads, PlaneGrid& out) {
  if (nx < 1 || ny < 1 || nx > 16384 || ny > 16384) return RenderErr::BadResolution;
  if (!(w.width > 0.0) || !(w.height > 0.0) || !finite_c(w.center))
    return RenderErr::BadWindow;

  out.window = w;
  out.nx = nx;
  out.ny = ny;
  out.family_id = F.id();
  out.budget = b;
  out.cells.assign(size_t(nx) * ny, PixelClass{});

  int tx = (nx + kTile - 1) / kTile;
  int ty = (ny + kTile - 1) / kTile;
  int ntiles = tx * ty;

  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, ntiles);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int t = next.fetch_add(1);
      if (t >= ntiles) return;
      int x0 = (t % tx) * kTile, y0 = (t / tx) * kTile;
      int x1 = std::min(x0 + kTile, nx), y1 = std::min(y0 + kTile, ny);
      for (int iy = y0; iy < y1; ++iy)
        for (int ix = x0; ix < x1; ++ix)
          out.cells[size_t(iy) * nx + ix] = classify_cell(F, out.lambda_at(ix, iy), b);
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return RenderErr::None;
}

ComponentErr component_extract(const PlaneGrid& g, cplx seed, ComponentMask& out) {
  double x0 = g.window.center.real() - 0.5 * g.window.width;
  double y0 = g.window.center.imag() - 0.5 * g.window.height;
  int ix = int(std::floor((seed.real() - x0) / g.window.width * g.nx));
  int iy = int(std::floor((seed.imag() - y0) / g.window.height * g.ny));
  if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny) return ComponentErr::SeedOutside;

  const PixelClass& s = g.at(ix, iy);
  if (s.status == CellStatus::Undetermined) return ComponentErr::BadSeed;

  out.nx = g.nx;
  out.ny = g.ny;
  out.mask.assign(size_t(g.nx) * g.ny, 0);
  out.count = 0;
  out.touches_edge = false;
  out.status = s.status;
  out.period = s.period;
  out.min_x = ix;
  out.max_x = ix;
  out.min_y = iy;
  out.max_y = iy;

  std::deque<std::pair<int, int>> q{{ix, iy}};
  out.mask[size_t(iy) * g.nx + ix] = 1;
  while (!q.empty()) {
    auto [cx, cy] = q.front();
    q.pop_front();
    ++out.count;
    out.min_x = std::min(out.min_x, cx);
    out.max_x = std::max(out.max_x, cx);
    out.min_y = std::min(out.min_y, cy);
    out.max_y = std::max(out.max_y, cy);
    if (cx == 0 || cy == 0 || cx == g.nx - 1 || cy == g.ny - 1) out.touches_edge = true;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      int nx2 = cx + dx[d], ny2 = cy + dy[d];
      if (nx2 < 0 || nx2 >= g.nx || ny2 < 0 || ny2 >= g.ny) continue;
      size_t id = size_t(ny2) * g.nx + nx2;
      if (out.mask[id]) continue;
      const PixelClass& p = g.cells[id];
      if (p.status != s.status || p.period != s.period) continue;
      out.mask[id] = 1;
      q.push_back({nx2, ny2});
    }
  }
  return ComponentErr::None;
}

} // namespace merodyn

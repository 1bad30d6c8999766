#include "merodyn/image.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>

namespace merodyn {

namespace {

const RGB kPeriodBase[4] = {{255, 255, 0}, {0, 255, 255}, {255, 0, 0}, {128, 128, 0}};

// periods >= 5 cycle through these 16 (documented in the README)
const RGB kPeriodTable[16] = {
    {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
    {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
    {210, 245, 60},  {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
    {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195}};

const char* status_token(CellStatus s) {
  switch (s) {
    case CellStatus::Attracting: return "attracting";
    case CellStatus::Captured: return "captured";
    case CellStatus::PoleHit: return "polehit";
    default: return "undetermined";
  }
}

void append_u32be(std::string& s, uint32_t v) {
  s.push_back(char(v >> 24));
  s.push_back(char(v >> 16));
  s.push_back(char(v >> 8));
  s.push_back(char(v));
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
  append_u32be(out, uint32_t(data.size()));
  size_t start = out.size();
  out.append(type, 4);
  out.append(data);
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(out.data() + start), uInt(out.size() - start));
  append_u32be(out, uint32_t(crc));
}

bool write_file(const std::string& path, const std::string& bytes) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  size_t n = std::fwrite(bytes.data(), 1, bytes.size(), f);
  return std::fclose(f) == 0 && n == bytes.size();
}

// top-down raster of the grid (iy increases upward in the grid itself)
std::string raster_rgb(const PlaneGrid& g) {
  std::string px;
  px.reserve(size_t(g.nx) * g.ny * 3);
  for (int iy = g.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      RGB c = cell_color(g.at(ix, iy));
      px.push_back(char(c.r));
      px.push_back(char(c.g));
      px.push_back(char(c.b));
    }
  return px;
}

} // namespace

RGB cell_color(const PixelClass& c) {
  switch (c.status) {
    case CellStatus::Undetermined: return {0, 0, 0};
    case CellStatus::PoleHit: return {255, 255, 255};
    case CellStatus::Captured: return {0, 160, 0};
    case CellStatus::Attracting: break;
  }
  int p = c.period;
  if (p >= 1 && p <= 4) return kPeriodBase[p - 1];
  if (p >= 5) return kPeriodTable[(p - 5) % 16];
  return {0, 0, 0};
}

EmitErr emit_ppm(const PlaneGrid& g, const std::string& path) {
  char head[64];
  int n = std::snprintf(head, sizeof head, "P6\n%d %d\n255\n", g.nx, g.ny);
  std::string out(head, size_t(n));
  out += raster_rgb(g);
  return write_file(path, out) ? EmitErr::None : EmitErr::IoError;
}

EmitErr emit_png(const PlaneGrid& g, const std::string& path) {
  std::string raw;
  std::string px = raster_rgb(g);
  size_t stride = size_t(g.nx) * 3;
  raw.reserve(px.size() + g.ny);
  for (int row = 0; row < g.ny; ++row) {
    raw.push_back('\0'); // filter type 0
    raw.append(px, size_t(row) * stride, stride);
  }
  uLongf bound = compressBound(uLong(raw.size()));
  std::string z(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()),
                Z_DEFAULT_COMPRESSION) != Z_OK)
    return EmitErr::IoError;
  z.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  append_u32be(ihdr, uint32_t(g.nx));
  append_u32be(ihdr, uint32_t(g.ny));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", z);
  append_chunk(out, "IEND", "");
  return write_file(path, out) ? EmitErr::None : EmitErr::IoError;
}

std::string csv_string(const PlaneGrid& g) {
  std::string out = "ix,iy,re_lambda,im_lambda,status,period,log_abs_multiplier,iters\n";
  char line[256];
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const PixelClass& c = g.at(ix, iy);
      cplx l = g.lambda_at(ix, iy);
      std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%s,%d,%.17g,%d\n", ix, iy,
                    l.real(), l.imag(), status_token(c.status), c.period,
                    c.log_abs_multiplier, c.iterations);
      out += line;
    }
  return out;
}

EmitErr emit_csv(const PlaneGrid& g, const std::string& path) {
  return write_file(path, csv_string(g)) ? EmitErr::None : EmitErr::IoError;
}

uint64_t grid_hash(const PlaneGrid& g) {
  std::string s = csv_string(g);
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace merodyn

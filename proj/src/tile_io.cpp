#include "aqua/tile_io.hpp"

#include <cstring>
#include <fstream>

namespace aqua {

namespace {

constexpr char kMagic[4] = {'D', 'A', 'Q', 'T'};
constexpr uint8_t kVersion = 1;

void put_u16le(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

uint16_t get_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void write_tile(const Raster& r, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("write_tile: cannot open " + path.string());
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  os.put(static_cast<char>(r.bands));
  put_u16le(os, static_cast<uint16_t>(r.width));
  put_u16le(os, static_cast<uint16_t>(r.height));
  char zeros[6] = {0};
  os.write(zeros, 6);
  static_assert(sizeof(float) == 4);
  os.write(reinterpret_cast<const char*>(r.data.data()),
           static_cast<std::streamsize>(r.data.size() * sizeof(float)));
  os.write(reinterpret_cast<const char*>(r.valid.data()),
           static_cast<std::streamsize>(r.valid.size()));
  if (!os) throw DataError("write_tile: write failed for " + path.string());
}

Raster read_tile(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_tile: cannot open " + path.string());
  uint8_t header[16];
  is.read(reinterpret_cast<char*>(header), 16);
  if (is.gcount() != 16) throw TruncatedFile("read_tile: short header in " + path.string());
  if (std::memcmp(header, kMagic, 4) != 0)
    throw BadMagic("read_tile: bad magic in " + path.string());
  if (header[4] != kVersion)
    throw UnsupportedVersion("read_tile: version " + std::to_string(header[4]));
  int bands = header[5];
  int width = get_u16le(header + 6);
  int height = get_u16le(header + 8);
  if (bands < 1 || width < 1 || height < 1)
    throw DataError("read_tile: bad dimensions in " + path.string());

  Raster r(width, height, bands);
  is.read(reinterpret_cast<char*>(r.data.data()),
          static_cast<std::streamsize>(r.data.size() * sizeof(float)));
  if (static_cast<size_t>(is.gcount()) != r.data.size() * sizeof(float))
    throw TruncatedFile("read_tile: short data in " + path.string());
  is.read(reinterpret_cast<char*>(r.valid.data()),
          static_cast<std::streamsize>(r.valid.size()));
  if (static_cast<size_t>(is.gcount()) != r.valid.size())
    throw TruncatedFile("read_tile: short validity block in " + path.string());
  return r;
}

void write_mask_tile(const WaterMask& m, const std::filesystem::path& path) {
  Raster r(m.width, m.height, 1);
  for (size_t i = 0; i < m.values.size(); ++i)
    r.data[i] = static_cast<float>(m.values[i]);
  write_tile(r, path);
}

WaterMask read_mask_tile(const std::filesystem::path& path) {
  Raster r = read_tile(path);
  if (r.bands != 1) throw DataError("read_mask_tile: expected 1 band in " + path.string());
  WaterMask m(r.width, r.height);
  for (size_t i = 0; i < m.values.size(); ++i)
    m.values[i] = r.data[i] > 0.5f ? 1 : 0;
  return m;
}

}  // namespace aqua

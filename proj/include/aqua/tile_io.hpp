#pragma once

#include <filesystem>

#include "aqua/raster.hpp"

namespace aqua {

// ".dqt" tile format:
//   magic "DAQT" | version u8 = 1 | bands u8 | width u16 LE | height u16 LE |
//   reserved 6 bytes = 0 | data float32 LE (row-major within band, bands
//   concatenated) | valid u8 per pixel.
void write_tile(const Raster& r, const std::filesystem::path& path);
Raster read_tile(const std::filesystem::path& path);

// Masks travel as 1-band tiles with a 0/1 float payload.
void write_mask_tile(const WaterMask& m, const std::filesystem::path& path);
WaterMask read_mask_tile(const std::filesystem::path& path);

}  // namespace aqua

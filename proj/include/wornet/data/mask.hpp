#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace wornet {

/// Row-major 0/1 raster. Serialized as run lengths (see rle_encode).
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;

  static BinaryMask zeros(int height, int width);

  uint8_t at(int r, int c) const;
  void set(int r, int c, uint8_t v);
  long count() const;
  bool operator==(const BinaryMask&) const = default;
};

/// Alternating run lengths over the row-major scan, starting with a possibly
/// zero-length run of 0s. Runs always sum to height·width.
std::vector<long> rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const std::vector<long>& runs, int height, int width);

/// Half-open pixel rectangle [row0, row1) × [col0, col1).
struct Box {
  int row0 = 0;
  int col0 = 0;
  int row1 = 0;
  int col1 = 0;

  int height() const { return row1 - row0; }
  int width() const { return col1 - col0; }
  bool operator==(const Box&) const = default;
};

/// Smallest box containing every set pixel, plus that box as a filled mask.
/// Empty masks are rejected.
std::pair<Box, BinaryMask> mask_to_box(const BinaryMask& mask);

}  // namespace wornet

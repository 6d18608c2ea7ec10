#include "wornet/data/mask.hpp"

#include "wornet/tensor.hpp"

namespace wornet {

BinaryMask BinaryMask::zeros(int height, int width) {
  check(height >= 1 && width >= 1, "mask dims must be >= 1");
  BinaryMask m;
  m.height = height;
  m.width = width;
  m.pixels.assign(static_cast<size_t>(height) * width, 0);
  return m;
}

uint8_t BinaryMask::at(int r, int c) const {
  check(r >= 0 && r < height && c >= 0 && c < width, "mask index out of range");
  return pixels[static_cast<size_t>(r) * width + c];
}

void BinaryMask::set(int r, int c, uint8_t v) {
  check(r >= 0 && r < height && c >= 0 && c < width, "mask index out of range");
  pixels[static_cast<size_t>(r) * width + c] = v ? 1 : 0;
}

long BinaryMask::count() const {
  long n = 0;
  for (uint8_t p : pixels) n += p ? 1 : 0;
  return n;
}

std::vector<long> rle_encode(const BinaryMask& mask) {
  check(mask.height >= 1 && mask.width >= 1 &&
            mask.pixels.size() == static_cast<size_t>(mask.height) * mask.width,
        "rle_encode: malformed mask");
  std::vector<long> runs;
  uint8_t current = 0;  // scan starts counting zeros
  long run = 0;
  for (uint8_t p : mask.pixels) {
    const uint8_t v = p ? 1 : 0;
    if (v == current) {
      ++run;
    } else {
      runs.push_back(run);
      current = v;
      run = 1;
    }
  }
  runs.push_back(run);
  return runs;
}

BinaryMask rle_decode(const std::vector<long>& runs, int height, int width) {
  BinaryMask m = BinaryMask::zeros(height, width);
  long total = 0;
  for (long r : runs) {
    check(r >= 0, "rle_decode: negative run length");
    total += r;
  }
  check(total == static_cast<long>(height) * width,
        "rle_decode: runs sum to " + std::to_string(total) + ", expected " +
            std::to_string(static_cast<long>(height) * width));
  size_t pos = 0;
  uint8_t value = 0;
  for (long r : runs) {
    for (long i = 0; i < r; ++i) m.pixels[pos++] = value;
    value = value ? 0 : 1;
  }
  return m;
}

std::pair<Box, BinaryMask> mask_to_box(const BinaryMask& mask) {
  int r0 = mask.height, c0 = mask.width, r1 = -1, c1 = -1;
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c)
      if (mask.pixels[static_cast<size_t>(r) * mask.width + c]) {
        if (r < r0) r0 = r;
        if (r > r1) r1 = r;
        if (c < c0) c0 = c;
        if (c > c1) c1 = c;
      }
  check(r1 >= 0, "mask_to_box: mask has no set pixels");
  Box box{r0, c0, r1 + 1, c1 + 1};
  BinaryMask filled = BinaryMask::zeros(mask.height, mask.width);
  for (int r = box.row0; r < box.row1; ++r)
    for (int c = box.col0; c < box.col1; ++c)
      filled.pixels[static_cast<size_t>(r) * mask.width + c] = 1;
  return {box, filled};
}

}  // namespace wornet

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <wornet/data/mask.hpp>
#include <wornet/rng.hpp>

namespace wornet {

/// Knobs for procedural scene generation and the train/val split layout.
struct GenConfig {
  int image_size = 64;
  double unworn_ratio = 0.37;
  double val_fraction = 0.16;
  int folds = 10;
  double min_overlap = 0.55;

  bool operator==(const GenConfig&) const = default;
};

void validate_config(const GenConfig& cfg);

/// Interleaved RGB raster, row-major.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> rgb;

  static Image filled(int height, int width, std::array<uint8_t, 3> color);

  uint8_t at(int r, int c, int ch) const { return rgb[size_t(3) * (size_t(r) * width + c) + ch]; }
  void set(int r, int c, std::array<uint8_t, 3> color) {
    const size_t base = size_t(3) * (size_t(r) * width + c);
    rgb[base] = color[0];
    rgb[base + 1] = color[1];
    rgb[base + 2] = color[2];
  }
  bool operator==(const Image&) const = default;
};

struct Garment {
  BinaryMask mask;
  bool worn = false;
};

/// One synthetic image: a person silhouette, one or two garments drawn on the
/// body, and optionally one free-standing garment pasted over the canvas.
struct Scene {
  Image image;
  BinaryMask person;
  std::vector<Garment> garments;
};

struct Offset {
  int row = 0;
  int col = 0;
  bool operator==(const Offset&) const = default;
};

/// Fraction of the overlay rectangle (not its mask) that lands on the canvas
/// when its top-left corner is placed at the given offset.
double overlap_fraction(int overlay_h, int overlay_w, Offset offset, int canvas_h, int canvas_w);

/// Uniform draw over all integer offsets that keep the overlay touching the
/// canvas, rejecting draws whose canvas overlap is below min_overlap. After
/// 1000 rejections falls back to (0, 0), which always satisfies the bound.
Offset sample_offset(Rng& rng, int overlay_h, int overlay_w, int canvas_h, int canvas_w,
                     double min_overlap = 0.55);

struct Composite {
  Image image;
  BinaryMask mask;
};

/// Paste overlay pixels wherever the translated overlay mask lands on the
/// canvas. Returns the new image plus the translated, canvas-cropped mask.
/// Existing masks of the underlay scene are the caller's and stay untouched.
/// An empty overlay mask is a no-op; a nonempty mask translated entirely off
/// the canvas is rejected.
Composite composite_overlay(const Image& underlay, const Image& overlay,
                            const BinaryMask& overlay_mask, Offset offset);

/// Per-scene Bernoulli rates chosen so that garments are unworn with
/// probability unworn_ratio overall. Scenes carry one or two worn garments
/// (two with probability two_worn) and at most one unworn garment (present
/// with probability unworn).
struct ClassMix {
  double two_worn = 0.0;
  double unworn = 0.0;
};

ClassMix class_mix_for(double unworn_ratio);

/// Build one scene from the given stream. Worn garments keep at least 55% of
/// their pixels inside the person mask; the unworn garment is placed by
/// sample_offset and may occlude anything already drawn.
Scene generate_scene(Rng& rng, const GenConfig& cfg);

}  // namespace wornet

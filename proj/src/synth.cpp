#include "wornet/data/synth.hpp"

#include <algorithm>
#include <cmath>

#include "wornet/tensor.hpp"

namespace wornet {

void validate_config(const GenConfig& cfg) {
  check(cfg.image_size >= 32, "image_size must be >= 32");
  check(cfg.unworn_ratio >= 0.0 && cfg.unworn_ratio <= 0.5, "unworn_ratio must lie in [0, 0.5]");
  check(cfg.val_fraction > 0.0 && cfg.val_fraction <= 1.0, "val_fraction must lie in (0, 1]");
  check(cfg.folds >= 1, "folds must be >= 1");
  check(cfg.min_overlap >= 0.0 && cfg.min_overlap < 1.0, "min_overlap must lie in [0, 1)");
}

Image Image::filled(int height, int width, std::array<uint8_t, 3> color) {
  check(height >= 1 && width >= 1, "image dims must be >= 1");
  Image img;
  img.height = height;
  img.width = width;
  img.rgb.resize(size_t(3) * height * width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) img.set(r, c, color);
  return img;
}

double overlap_fraction(int overlay_h, int overlay_w, Offset offset, int canvas_h, int canvas_w) {
  check(overlay_h >= 1 && overlay_w >= 1 && canvas_h >= 1 && canvas_w >= 1,
        "overlap_fraction dims must be >= 1");
  const long r0 = std::max(offset.row, 0);
  const long r1 = std::min(offset.row + overlay_h, canvas_h);
  const long c0 = std::max(offset.col, 0);
  const long c1 = std::min(offset.col + overlay_w, canvas_w);
  const long inter = std::max(0L, r1 - r0) * std::max(0L, c1 - c0);
  return double(inter) / (double(overlay_h) * double(overlay_w));
}

Offset sample_offset(Rng& rng, int overlay_h, int overlay_w, int canvas_h, int canvas_w,
                     double min_overlap) {
  check(overlay_h >= 1 && overlay_w >= 1, "overlay dims must be >= 1");
  check(overlay_h <= canvas_h && overlay_w <= canvas_w, "overlay must fit inside the canvas");
  check(min_overlap >= 0.0 && min_overlap <= 1.0, "min_overlap must lie in [0, 1]");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Offset off{int(rng.uniform_int(-overlay_h + 1, canvas_h - 1)),
               int(rng.uniform_int(-overlay_w + 1, canvas_w - 1))};
    if (overlap_fraction(overlay_h, overlay_w, off, canvas_h, canvas_w) >= min_overlap) return off;
  }
  return {0, 0};
}

Composite composite_overlay(const Image& underlay, const Image& overlay,
                            const BinaryMask& overlay_mask, Offset offset) {
  check(underlay.height >= 1 && underlay.width >= 1, "underlay dims must be >= 1");
  check(overlay.height == overlay_mask.height && overlay.width == overlay_mask.width,
        "overlay image and mask dims must match");
  Composite out{underlay, BinaryMask::zeros(underlay.height, underlay.width)};
  if (overlay_mask.count() == 0) return out;
  long placed = 0;
  for (int r = 0; r < overlay.height; ++r) {
    const int rr = r + offset.row;
    if (rr < 0 || rr >= underlay.height) continue;
    for (int c = 0; c < overlay.width; ++c) {
      const int cc = c + offset.col;
      if (cc < 0 || cc >= underlay.width) continue;
      if (!overlay_mask.at(r, c)) continue;
      out.mask.set(rr, cc, 1);
      out.image.set(rr, cc, {overlay.at(r, c, 0), overlay.at(r, c, 1), overlay.at(r, c, 2)});
      ++placed;
    }
  }
  check(placed > 0, "translated overlay mask falls entirely outside the canvas");
  return out;
}

ClassMix class_mix_for(double unworn_ratio) {
  check(unworn_ratio >= 0.0 && unworn_ratio <= 0.5, "unworn_ratio must lie in [0, 0.5]");
  // Scenes hold 1 + Bernoulli(two_worn) worn garments and Bernoulli(unworn)
  // unworn garments, so the expected unworn share of all garments is
  // unworn / (1 + two_worn + unworn). Solve for the requested share while
  // keeping both rates inside [0, 1].
  ClassMix mix;
  if (unworn_ratio <= 0.4) {
    mix = {0.5, 1.5 * unworn_ratio / (1.0 - unworn_ratio)};
  } else {
    mix = {(1.0 - 2.0 * unworn_ratio) / unworn_ratio, 1.0};
  }
  mix.two_worn = std::clamp(mix.two_worn, 0.0, 1.0);
  mix.unworn = std::clamp(mix.unworn, 0.0, 1.0);
  return mix;
}

namespace {

std::array<uint8_t, 3> random_color(Rng& rng, int lo, int hi) {
  return {uint8_t(rng.uniform_int(lo, hi)), uint8_t(rng.uniform_int(lo, hi)),
          uint8_t(rng.uniform_int(lo, hi))};
}

std::array<uint8_t, 3> shade(Rng& rng, std::array<uint8_t, 3> base) {
  const int n = int(rng.uniform_int(-8, 8));
  std::array<uint8_t, 3> px;
  for (int k = 0; k < 3; ++k) px[k] = uint8_t(std::clamp(int(base[k]) + n, 0, 255));
  return px;
}

void fill_ellipse(BinaryMask& m, double cy, double cx, double ay, double ax) {
  for (int r = 0; r < m.height; ++r)
    for (int c = 0; c < m.width; ++c) {
      const double dy = (r - cy) / ay;
      const double dx = (c - cx) / ax;
      if (dy * dy + dx * dx <= 1.0) m.set(r, c, 1);
    }
}

void fill_rect(BinaryMask& m, int r0, int r1, int c0, int c1) {
  r0 = std::max(r0, 0);
  c0 = std::max(c0, 0);
  r1 = std::min(r1, m.height);
  c1 = std::min(c1, m.width);
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) m.set(r, c, 1);
}

struct RowSpan {
  int lo = -1;
  int hi = -1;
};

std::vector<RowSpan> row_spans(const BinaryMask& m) {
  std::vector<RowSpan> spans(m.height);
  for (int r = 0; r < m.height; ++r)
    for (int c = 0; c < m.width; ++c)
      if (m.at(r, c)) {
        if (spans[r].lo < 0) spans[r].lo = c;
        spans[r].hi = c;
      }
  return spans;
}

/// Drops mask boundary pixels at random, imitating the ragged edge of a real
/// segmentation. Two passes, so edges recede by up to two pixels. Returns the
/// input unchanged when erosion would empty the mask.
BinaryMask roughen_mask(Rng& rng, const BinaryMask& m) {
  BinaryMask out = m;
  for (int pass = 0; pass < 2; ++pass) {
    BinaryMask next = out;
    for (int r = 0; r < out.height; ++r)
      for (int c = 0; c < out.width; ++c) {
        if (!out.at(r, c)) continue;
        const bool edge = r == 0 || r + 1 == out.height || c == 0 || c + 1 == out.width ||
                          !out.at(r - 1, c) || !out.at(r + 1, c) || !out.at(r, c - 1) ||
                          !out.at(r, c + 1);
        if (edge && rng.uniform() < 0.5) next.set(r, c, 0);
      }
    out = std::move(next);
  }
  if (out.count() == 0) return m;
  return out;
}

/// Adds one to three false-positive blobs of the kind a real segmenter leaves
/// behind. Applied to every garment mask regardless of label, so the noise
/// carries no class signal. At most 12 pixels total.
void speckle_mask(Rng& rng, BinaryMask& m) {
  const long n = rng.uniform_int(1, 3);
  for (long i = 0; i < n; ++i) {
    const long sz = rng.uniform_int(1, 2);
    const long r0 = rng.uniform_int(0, long(m.height) - sz);
    const long c0 = rng.uniform_int(0, long(m.width) - sz);
    for (long r = r0; r < r0 + sz; ++r)
      for (long c = c0; c < c0 + sz; ++c) m.set(int(r), int(c), 1);
  }
}

struct WornGarment {
  BinaryMask paint;  // region drawn into the image
  BinaryMask mask;   // recorded segmentation, roughened and speckled
};

/// Band of the person silhouette between the given rows, with optional sleeve
/// pixels protruding past the silhouette. Sleeve pixels are capped at 0.8x the
/// in-person pixel count so at least 1/1.8 of the garment stays inside; the
/// cap is re-enforced on the roughened mask with headroom for speckle noise.
WornGarment worn_garment(Rng& rng, const BinaryMask& person, const std::vector<RowSpan>& spans,
                         int r0, int r1, bool sleeves, int image_size) {
  BinaryMask g = BinaryMask::zeros(person.height, person.width);
  long core = 0;
  for (int r = std::max(r0, 0); r < std::min(r1, person.height); ++r)
    for (int c = 0; c < person.width; ++c)
      if (person.at(r, c)) {
        g.set(r, c, 1);
        ++core;
      }
  if (core == 0) {
    // Degenerate band; fall back to the whole silhouette.
    g = person;
    core = g.count();
    sleeves = false;
  }
  std::vector<std::pair<int, int>> extra;
  if (sleeves) {
    const int len = int(rng.uniform_int(2, std::max(2, image_size * 3 / 25)));
    const int sleeve_rows = std::max(1, (std::min(r1, person.height) - std::max(r0, 0)) * 2 / 5);
    for (int r = std::max(r0, 0); r < std::max(r0, 0) + sleeve_rows && r < person.height; ++r) {
      const RowSpan& s = spans[r];
      if (s.lo < 0) continue;
      for (int c = std::max(0, s.lo - len); c < s.lo; ++c)
        if (!person.at(r, c)) extra.emplace_back(r, c);
      for (int c = s.hi + 1; c < std::min(person.width, s.hi + 1 + len); ++c)
        if (!person.at(r, c)) extra.emplace_back(r, c);
    }
    const long cap = long(0.8 * double(core));
    if (long(extra.size()) > cap) extra.resize(size_t(cap));
    for (auto [r, c] : extra) g.set(r, c, 1);
  }
  BinaryMask rec = roughen_mask(rng, g);
  long inside = 0;
  for (int r = 0; r < rec.height; ++r)
    for (int c = 0; c < rec.width; ++c)
      if (rec.at(r, c) && person.at(r, c)) ++inside;
  if (inside == 0) {
    rec = g;  // erosion stripped the whole core; keep the exact mask
  } else {
    long out = 0;
    for (auto [r, c] : extra) out += rec.at(r, c);
    const long allowed = std::max(0L, long(0.8 * double(inside)) - 12);
    for (auto it = extra.rbegin(); it != extra.rend() && out > allowed; ++it)
      if (rec.at(it->first, it->second)) {
        rec.set(it->first, it->second, 0);
        --out;
      }
    if (inside >= 24) speckle_mask(rng, rec);
  }
  return {std::move(g), std::move(rec)};
}

/// Free-standing garment silhouette on its own small canvas.
BinaryMask standalone_garment(Rng& rng, int h, int w) {
  BinaryMask m = BinaryMask::zeros(h, w);
  const long kind = rng.uniform_int(0, 2);
  if (kind == 0) {
    // Tee: full-width yoke with sleeves, narrower body below.
    const int yoke = std::max(2, h * 2 / 5);
    fill_rect(m, 0, yoke, 0, w);
    fill_rect(m, yoke, h, w / 5, w - w / 5);
  } else if (kind == 1) {
    fill_rect(m, 1, h - 1, 1, w - 1);
  } else {
    fill_ellipse(m, (h - 1) / 2.0, (w - 1) / 2.0, h / 2.0, w / 2.0);
  }
  if (m.count() == 0) fill_rect(m, 0, h, 0, w);
  return m;
}

}  // namespace

Scene generate_scene(Rng& rng, const GenConfig& cfg) {
  validate_config(cfg);
  const int S = cfg.image_size;
  const ClassMix mix = class_mix_for(cfg.unworn_ratio);

  const bool two_worn = rng.uniform() < mix.two_worn;
  const bool has_unworn = rng.uniform() < mix.unworn;

  const auto bg_color = random_color(rng, 20, 90);
  const auto person_color = random_color(rng, 110, 210);

  const double cx = S * rng.uniform(0.40, 0.60);
  const double cy = S * rng.uniform(0.38, 0.50);
  const double ax = S * rng.uniform(0.11, 0.17);
  const double ay = S * rng.uniform(0.20, 0.28);
  const double head_r = S * rng.uniform(0.055, 0.085);
  const double leg_h = S * rng.uniform(0.10, 0.20);

  Scene scene;
  scene.person = BinaryMask::zeros(S, S);
  fill_ellipse(scene.person, cy, cx, ay, ax);
  fill_ellipse(scene.person, cy - ay - head_r * 0.7, cx, head_r, head_r);
  fill_rect(scene.person, int(cy + ay * 0.8), int(std::min(double(S), cy + ay + leg_h)),
            int(cx - ax * 0.55), int(cx + ax * 0.55) + 1);
  check(scene.person.count() > 0, "person silhouette came out empty");

  scene.image = Image::filled(S, S, bg_color);
  for (int r = 0; r < S; ++r)
    for (int c = 0; c < S; ++c)
      scene.image.set(r, c, shade(rng, scene.person.at(r, c) ? person_color : bg_color));

  const auto spans = row_spans(scene.person);
  const int n_worn = two_worn ? 2 : 1;
  for (int i = 0; i < n_worn; ++i) {
    double lo, hi;
    if (n_worn == 1) {
      lo = cy - ay * rng.uniform(0.45, 0.65);
      hi = cy + ay * rng.uniform(0.15, 0.45);
    } else if (i == 0) {
      lo = cy - ay * rng.uniform(0.65, 0.85);
      hi = cy - ay * 0.05;
    } else {
      lo = cy + ay * 0.05;
      hi = cy + ay * rng.uniform(0.55, 0.85);
    }
    const bool sleeves = i == 0 && rng.uniform() < 0.7;
    WornGarment g = worn_garment(rng, scene.person, spans, int(lo), int(hi), sleeves, S);
    const auto color = random_color(rng, 40, 240);
    for (int r = 0; r < S; ++r)
      for (int c = 0; c < S; ++c)
        if (g.paint.at(r, c)) scene.image.set(r, c, shade(rng, color));
    scene.garments.push_back({std::move(g.mask), true});
  }

  if (has_unworn) {
    const int gh = int(rng.uniform_int(std::max(8L, long(S) * 3 / 20), long(S) * 5 / 16));
    const int gw = int(rng.uniform_int(std::max(8L, long(S) * 3 / 20), long(S) * 5 / 16));
    BinaryMask mini = standalone_garment(rng, gh, gw);
    const auto color = random_color(rng, 40, 240);
    Image mini_img = Image::filled(gh, gw, color);
    for (int r = 0; r < gh; ++r)
      for (int c = 0; c < gw; ++c) mini_img.set(r, c, shade(rng, color));

    Offset off{0, 0};
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Offset cand = sample_offset(rng, gh, gw, S, S, cfg.min_overlap);
      bool any = false;
      for (int r = 0; r < gh && !any; ++r)
        for (int c = 0; c < gw && !any; ++c)
          any = mini.at(r, c) && r + cand.row >= 0 && r + cand.row < S && c + cand.col >= 0 &&
                c + cand.col < S;
      if (any) {
        off = cand;
        break;
      }
    }
    Composite comp = composite_overlay(scene.image, mini_img, mini, off);
    scene.image = std::move(comp.image);
    BinaryMask um = roughen_mask(rng, comp.mask);
    speckle_mask(rng, um);
    scene.garments.push_back({std::move(um), false});
  }

  return scene;
}

}  // namespace wornet

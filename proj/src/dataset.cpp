#include "wornet/data/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <thread>

#include "wornet/tensor.hpp"

namespace wornet {

namespace {

constexpr uint64_t kSplitStream = 0x73706c6974;  // far above any scene index

std::string scene_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%06d", id);
  return buf;
}

std::string label_name(bool worn) { return worn ? "worn" : "unworn"; }

bool parse_label(const std::string& s, const std::string& where) {
  if (s == "worn") return true;
  if (s == "unworn") return false;
  fail(where + ": unknown label '" + s + "'");
}

nlohmann::json parse_json_file(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path);
  check(in.good(), what + " not found: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    fail(what + " parse error in " + path.string() + ": " + e.what());
  }
}

}  // namespace

nlohmann::json mask_to_json(const BinaryMask& mask) {
  return {{"height", mask.height}, {"width", mask.width}, {"runs", rle_encode(mask)}};
}

BinaryMask mask_from_json(const nlohmann::json& j) {
  return rle_decode(j.at("runs").get<std::vector<long>>(), j.at("height").get<int>(),
                    j.at("width").get<int>());
}

nlohmann::json gen_config_to_json(const GenConfig& cfg) {
  return {{"image_size", cfg.image_size},
          {"unworn_ratio", cfg.unworn_ratio},
          {"val_fraction", cfg.val_fraction},
          {"folds", cfg.folds},
          {"min_overlap", cfg.min_overlap}};
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig cfg;
  cfg.image_size = j.at("image_size").get<int>();
  cfg.unworn_ratio = j.at("unworn_ratio").get<double>();
  cfg.val_fraction = j.at("val_fraction").get<double>();
  cfg.folds = j.at("folds").get<int>();
  cfg.min_overlap = j.at("min_overlap").get<double>();
  validate_config(cfg);
  return cfg;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  check(image.height >= 1 && image.width >= 1, "image dims must be >= 1");
  check(image.rgb.size() == size_t(3) * image.height * image.width,
        "image buffer does not match its dims");
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), std::streamsize(image.rgb.size()));
  check(out.good(), "short write to " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "raster not found: " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  check(in.good() && magic == "P6", path.string() + " is not a P6 raster");
  check(w >= 1 && h >= 1, path.string() + " has invalid dims");
  check(maxval == 255, path.string() + " must use maxval 255");
  in.get();  // single whitespace byte before the pixel block
  Image img;
  img.height = h;
  img.width = w;
  img.rgb.resize(size_t(3) * h * w);
  in.read(reinterpret_cast<char*>(img.rgb.data()), std::streamsize(img.rgb.size()));
  check(in.gcount() == std::streamsize(img.rgb.size()), path.string() + " is truncated");
  return img;
}

std::vector<std::string> assign_splits(long n, uint64_t seed, double val_fraction, int folds) {
  check(n >= 0, "record count must be >= 0");
  check(val_fraction > 0.0 && val_fraction <= 1.0, "val_fraction must lie in (0, 1]");
  check(folds >= 1, "folds must be >= 1");
  std::vector<long> perm(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) perm[size_t(i)] = i;
  // Hand-rolled Fisher-Yates: identical order on every platform.
  Rng rng = Rng::derive(seed, kSplitStream);
  for (long i = n - 1; i > 0; --i) std::swap(perm[size_t(i)], perm[size_t(rng.uniform_int(0, i))]);
  const long n_val = std::min(n, std::lround(val_fraction * double(n)));
  std::vector<std::string> splits(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j)
    splits[size_t(perm[size_t(j)])] =
        j < n_val ? "val-fold-" + std::to_string(j % folds + 1) : "train";
  return splits;
}

GeneratedDataset generate_dataset(const GenConfig& cfg, long count, uint64_t seed, int threads) {
  validate_config(cfg);
  check(count >= 1, "sample count must be >= 1");
  threads = std::max(1, threads);

  GeneratedDataset out;
  out.manifest.seed = seed;
  out.manifest.config = cfg;

  long produced = 0;
  int next_scene = 0;
  while (produced < count) {
    const int block = std::max(threads * 8, 32);
    std::vector<Scene> slots(static_cast<size_t>(block));
    auto fill = [&](int first) {
      for (int k = first; k < block; k += threads) {
        Rng rng = Rng::derive(seed, uint64_t(next_scene + k));
        slots[size_t(k)] = generate_scene(rng, cfg);
      }
    };
    if (threads == 1) {
      fill(0);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(fill, t);
      for (auto& th : pool) th.join();
    }
    for (int k = 0; k < block && produced < count; ++k) {
      const int id = next_scene + k;
      Scene& scene = slots[size_t(k)];
      bool contributed = false;
      for (const Garment& g : scene.garments) {
        if (produced == count) break;
        SampleRecord rec;
        rec.scene = id;
        rec.image = "images/" + scene_name(id) + ".ppm";
        rec.s_mask = scene.person;
        rec.o_mask = g.mask;
        rec.worn = g.worn;
        out.manifest.samples.push_back(std::move(rec));
        ++produced;
        contributed = true;
      }
      if (contributed) out.scenes.emplace_back(id, std::move(scene));
    }
    next_scene += block;
  }

  const auto splits = assign_splits(count, seed, cfg.val_fraction, cfg.folds);
  for (long i = 0; i < count; ++i) out.manifest.samples[size_t(i)].split = splits[size_t(i)];
  return out;
}

void write_dataset(const GeneratedDataset& data, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "scenes");

  for (const auto& [id, scene] : data.scenes) {
    const std::string name = scene_name(id);
    write_ppm(dir / "images" / (name + ".ppm"), scene.image);
    nlohmann::json clothes = nlohmann::json::array();
    for (const Garment& g : scene.garments) {
      nlohmann::json entry = mask_to_json(g.mask);
      entry["label"] = label_name(g.worn);
      clothes.push_back(std::move(entry));
    }
    nlohmann::json doc{{"format_version", kSceneFileVersion},
                       {"image", "../images/" + name + ".ppm"},
                       {"persons", nlohmann::json::array({mask_to_json(scene.person)})},
                       {"clothes", std::move(clothes)}};
    std::ofstream out(dir / "scenes" / (name + ".json"));
    check(out.good(), "cannot open scene file for writing");
    out << doc.dump(2) << "\n";
    check(out.good(), "short write to scene file");
  }

  nlohmann::json samples = nlohmann::json::array();
  for (const SampleRecord& rec : data.manifest.samples)
    samples.push_back({{"scene", rec.scene},
                       {"image", rec.image},
                       {"s_mask", mask_to_json(rec.s_mask)},
                       {"o_mask", mask_to_json(rec.o_mask)},
                       {"label", label_name(rec.worn)},
                       {"split", rec.split}});
  nlohmann::json manifest{{"format_version", data.manifest.format_version},
                          {"seed", data.manifest.seed},
                          {"config", gen_config_to_json(data.manifest.config)},
                          {"samples", std::move(samples)}};
  std::ofstream out(dir / "manifest.json");
  check(out.good(), "cannot open manifest for writing");
  out << manifest.dump() << "\n";
  check(out.good(), "short write to manifest");
}

LoadedDataset to_loaded(const GeneratedDataset& data) {
  LoadedDataset out;
  out.manifest = data.manifest;
  for (const auto& [id, scene] : data.scenes) out.images.emplace(id, scene.image);
  return out;
}

const Image& LoadedDataset::image_of(const SampleRecord& rec) const {
  auto it = images.find(rec.scene);
  check(it != images.end(), "no raster loaded for scene " + std::to_string(rec.scene));
  return it->second;
}

LoadedDataset read_dataset(const std::filesystem::path& dir) {
  const nlohmann::json manifest = parse_json_file(dir / "manifest.json", "dataset manifest");
  LoadedDataset out;
  try {
    out.manifest.format_version = manifest.at("format_version").get<int>();
    check(out.manifest.format_version == kDatasetVersion,
          "unsupported dataset format version " + std::to_string(out.manifest.format_version));
    out.manifest.seed = manifest.at("seed").get<uint64_t>();
    out.manifest.config = gen_config_from_json(manifest.at("config"));
  } catch (const nlohmann::json::exception& e) {
    fail("dataset manifest is malformed: " + std::string(e.what()));
  }

  const auto& samples = manifest.at("samples");
  check(samples.is_array(), "dataset manifest is malformed: samples must be an array");
  for (size_t i = 0; i < samples.size(); ++i) {
    const std::string where = "sample " + std::to_string(i);
    try {
      const auto& s = samples[i];
      SampleRecord rec;
      rec.scene = s.at("scene").get<int>();
      rec.image = s.at("image").get<std::string>();
      rec.s_mask = mask_from_json(s.at("s_mask"));
      rec.o_mask = mask_from_json(s.at("o_mask"));
      rec.worn = parse_label(s.at("label").get<std::string>(), where);
      rec.split = s.at("split").get<std::string>();
      if (rec.split != "train") {
        const std::string prefix = "val-fold-";
        check(rec.split.rfind(prefix, 0) == 0, where + ": unknown split '" + rec.split + "'");
        const int fold = std::stoi(rec.split.substr(prefix.size()));
        check(fold >= 1 && fold <= out.manifest.config.folds,
              where + ": fold index out of range in '" + rec.split + "'");
      }
      check(rec.s_mask.count() > 0, where + ": person mask is empty");
      out.manifest.samples.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      fail(where + " is malformed: " + std::string(e.what()));
    }
  }

  for (const SampleRecord& rec : out.manifest.samples) {
    if (!out.images.contains(rec.scene)) out.images.emplace(rec.scene, read_ppm(dir / rec.image));
    const Image& img = out.images.at(rec.scene);
    check(rec.s_mask.height == img.height && rec.s_mask.width == img.width &&
              rec.o_mask.height == img.height && rec.o_mask.width == img.width,
          "scene " + std::to_string(rec.scene) + ": mask dims do not match the raster");
  }
  return out;
}

SceneFile read_scene_file(const std::filesystem::path& path) {
  const nlohmann::json doc = parse_json_file(path, "scene file");
  SceneFile out;
  try {
    const int version = doc.at("format_version").get<int>();
    check(version == kSceneFileVersion,
          "unsupported scene file version " + std::to_string(version));
    out.image_path = doc.at("image").get<std::string>();
    for (const auto& m : doc.at("persons")) out.persons.push_back(mask_from_json(m));
    for (const auto& m : doc.at("clothes")) out.clothes.push_back(mask_from_json(m));
  } catch (const nlohmann::json::exception& e) {
    fail("scene file is malformed: " + std::string(e.what()));
  }
  check(!out.persons.empty(), "scene file lists no person masks");
  check(!out.clothes.empty(), "scene file lists no clothing masks");
  out.image = read_ppm(path.parent_path() / out.image_path);
  for (const BinaryMask& m : out.persons)
    check(m.height == out.image.height && m.width == out.image.width,
          "person mask dims do not match the raster");
  for (const BinaryMask& m : out.clothes)
    check(m.height == out.image.height && m.width == out.image.width,
          "clothing mask dims do not match the raster");
  return out;
}

}  // namespace wornet

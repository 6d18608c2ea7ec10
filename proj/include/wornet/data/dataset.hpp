#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include <wornet/data/synth.hpp>

namespace wornet {

inline constexpr int kDatasetVersion = 1;
inline constexpr int kSceneFileVersion = 1;

/// One person/garment pairing. Masks are stored inline (RLE in the manifest);
/// the image is shared by every sample of the same scene.
struct SampleRecord {
  int scene = 0;
  std::string image;  // path relative to the manifest
  BinaryMask s_mask;
  BinaryMask o_mask;
  bool worn = false;
  std::string split = "train";

  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  int format_version = kDatasetVersion;
  uint64_t seed = 0;
  GenConfig config;
  std::vector<SampleRecord> samples;
};

/// Freshly generated dataset: the manifest plus every scene keyed by index.
/// Scenes keep all garments even when the sample budget truncates the record
/// list mid-scene.
struct GeneratedDataset {
  DatasetManifest manifest;
  std::vector<std::pair<int, Scene>> scenes;
};

/// Dataset re-read from disk: records plus one decoded raster per scene.
struct LoadedDataset {
  DatasetManifest manifest;
  std::map<int, Image> images;

  const Image& image_of(const SampleRecord& rec) const;
};

/// Scene description consumed by pairwise prediction: one raster plus any
/// number of person and garment masks. Paths inside the file are relative to
/// the file's own directory.
struct SceneFile {
  std::string image_path;
  Image image;
  std::vector<BinaryMask> persons;
  std::vector<BinaryMask> clothes;
};

nlohmann::json mask_to_json(const BinaryMask& mask);
BinaryMask mask_from_json(const nlohmann::json& j);

nlohmann::json gen_config_to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

/// Split labels ("train" or "val-fold-1..folds") for n records: a seeded
/// shuffle picks round(val_fraction * n) validation records, which are dealt
/// round-robin across folds, so fold sizes differ by at most one.
std::vector<std::string> assign_splits(long n, uint64_t seed, double val_fraction, int folds);

/// Generate scenes until `count` person/garment pairs exist, truncating the
/// final scene's surplus garments. Scene i is a pure function of (seed, i),
/// so any thread count yields byte-identical output.
GeneratedDataset generate_dataset(const GenConfig& cfg, long count, uint64_t seed,
                                  int threads = 1);

void write_dataset(const GeneratedDataset& data, const std::filesystem::path& dir);
LoadedDataset read_dataset(const std::filesystem::path& dir);

/// In-memory view of a freshly generated dataset, bypassing the disk round
/// trip. Equivalent to write_dataset followed by read_dataset.
LoadedDataset to_loaded(const GeneratedDataset& data);

SceneFile read_scene_file(const std::filesystem::path& path);

}  // namespace wornet

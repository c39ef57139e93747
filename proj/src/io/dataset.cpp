#include "io/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "io/pnm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ds::io {

namespace {

std::string find_image_file(const fs::path& images, const std::string& stem) {
  for (const char* ext : {".pgm", ".ppm"}) {
    fs::path p = images / (stem + ext);
    if (fs::exists(p)) return p.string();
  }
  fail(ErrCode::Io, "no image file for stem '" + stem + "' under " + images.string());
}

LabeledImage load_one(const fs::path& dir, const std::string& stem) {
  LabeledImage li;
  li.stem = stem;
  li.image = read_pnm(find_image_file(dir / "images", stem));
  fs::path mask = dir / "masks" / (stem + ".pgm");
  if (fs::exists(mask)) {
    li.label = read_mask(mask.string());
    if (li.label.shape != Shape{li.image.shape[1], li.image.shape[2]})
      fail(ErrCode::Shape, "mask dims for '" + stem + "' do not match image");
  } else {
    li.label = Tensor::zeros({li.image.shape[1], li.image.shape[2]});
  }
  return li;
}

} // namespace

Dataset load_dataset(const std::string& dir) {
  fs::path root(dir);
  fs::path splits = root / "splits.json";
  std::ifstream f(splits);
  if (!f) fail(ErrCode::Io, "cannot open " + splits.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    fail(ErrCode::Io, splits.string() + ": " + e.what());
  }
  Dataset ds;
  auto load_split = [&](const char* key, std::vector<LabeledImage>& out) {
    if (!j.contains(key)) fail(ErrCode::Io, splits.string() + ": missing split '" + key + "'");
    for (const auto& stem : j.at(key)) out.push_back(load_one(root, stem.get<std::string>()));
  };
  load_split("train", ds.train);
  load_split("val", ds.val);
  load_split("test", ds.test);
  if (ds.train.empty()) fail(ErrCode::Io, dir + ": empty training split");
  ds.channels = ds.train.front().image.shape[0];
  for (const auto* split : {&ds.train, &ds.val, &ds.test})
    for (const auto& li : *split)
      if (li.image.shape[0] != ds.channels) fail(ErrCode::Io, "mixed channel counts in dataset " + dir);
  return ds;
}

std::map<std::string, Tensor> load_product_masks(const std::string& dir) {
  std::map<std::string, Tensor> masks;
  fs::path root = fs::path(dir) / "ground_truth_product";
  if (!fs::exists(root)) return masks;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.path().extension() != ".pgm") continue;
    masks.emplace(entry.path().stem().string(), read_mask(entry.path().string()));
  }
  return masks;
}

void save_labeled_image(const std::string& dir, const LabeledImage& img) {
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "masks");
  fs::path ipath = fs::path(dir) / "images" / (img.stem + (img.image.shape[0] == 3 ? ".ppm" : ".pgm"));
  if (img.image.shape[0] == 3)
    write_ppm(ipath.string(), img.image);
  else
    write_pgm(ipath.string(), img.image);
  write_mask((fs::path(dir) / "masks" / (img.stem + ".pgm")).string(), img.label);
}

void write_splits(const std::string& dir, const std::vector<std::string>& train, const std::vector<std::string>& val,
                  const std::vector<std::string>& test) {
  json j;
  j["train"] = train;
  j["val"] = val;
  j["test"] = test;
  std::ofstream f(fs::path(dir) / "splits.json");
  if (!f) fail(ErrCode::Io, "cannot write splits.json under " + dir);
  f << j.dump(2) << "\n";
}

} // namespace ds::io

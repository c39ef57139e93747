#include "synth/library.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "io/pnm.hpp"

namespace fs = std::filesystem;

namespace ds::synth {

DefectLibrary build_library(const std::vector<io::LabeledImage>& training, int padding) {
  if (padding < 0) fail(ErrCode::InvalidArg, "build_library: negative padding");
  DefectLibrary lib;
  for (const auto& li : training) {
    const int H = li.label.shape[0], W = li.label.shape[1];
    std::vector<int> comp(static_cast<size_t>(H) * W, -1);
    int next_comp = 0;
    for (int sy = 0; sy < H; ++sy)
      for (int sx = 0; sx < W; ++sx) {
        if (li.label.at(sy, sx) != 1.0 || comp[static_cast<size_t>(sy) * W + sx] >= 0) continue;
        // flood fill, 4-connectivity
        int id = next_comp++;
        std::vector<std::pair<int, int>> stack{{sy, sx}};
        std::vector<std::pair<int, int>> pixels;
        comp[static_cast<size_t>(sy) * W + sx] = id;
        while (!stack.empty()) {
          auto [y, x] = stack.back();
          stack.pop_back();
          pixels.emplace_back(y, x);
          const int dy[] = {-1, 1, 0, 0}, dx[] = {0, 0, -1, 1};
          for (int d = 0; d < 4; ++d) {
            int ny = y + dy[d], nx = x + dx[d];
            if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
            if (li.label.at(ny, nx) != 1.0 || comp[static_cast<size_t>(ny) * W + nx] >= 0) continue;
            comp[static_cast<size_t>(ny) * W + nx] = id;
            stack.emplace_back(ny, nx);
          }
        }
        int r0 = H, r1 = -1, c0 = W, c1 = -1;
        for (auto [y, x] : pixels) {
          r0 = std::min(r0, y);
          r1 = std::max(r1, y);
          c0 = std::min(c0, x);
          c1 = std::max(c1, x);
        }
        r0 = std::max(0, r0 - padding);
        c0 = std::max(0, c0 - padding);
        r1 = std::min(H - 1, r1 + padding);
        c1 = std::min(W - 1, c1 + padding);
        int rows = r1 - r0 + 1, cols = c1 - c0 + 1;

        DefectInstance inst;
        inst.texture = Tensor::zeros({li.image.shape[0], rows, cols});
        inst.mask = Tensor::zeros({rows, cols});
        for (int y = 0; y < rows; ++y)
          for (int x = 0; x < cols; ++x) {
            for (int c = 0; c < li.image.shape[0]; ++c) inst.texture.at(c, y, x) = li.image.at(c, r0 + y, c0 + x);
            if (comp[static_cast<size_t>(r0 + y) * W + (c0 + x)] == id) inst.mask.at(y, x) = 1.0;
          }
        inst.validate();
        lib.instances.push_back(std::move(inst));
        lib.provenance.push_back({li.stem, r0, c0, rows, cols});
      }
  }
  if (lib.instances.empty()) fail(ErrCode::InvalidArg, "empty defect library: no defective pixels in the training set");
  return lib;
}

void export_library(const std::string& dir, const DefectLibrary& lib) {
  fs::create_directories(dir);
  char name[32];
  for (size_t i = 0; i < lib.instances.size(); ++i) {
    std::snprintf(name, sizeof(name), "instance_%04zu", i);
    fs::path sub = fs::path(dir) / name;
    fs::create_directories(sub);
    const auto& inst = lib.instances[i];
    if (inst.texture.shape[0] == 3)
      io::write_ppm((sub / "texture.ppm").string(), inst.texture);
    else
      io::write_pgm((sub / "texture.pgm").string(), inst.texture);
    io::write_mask((sub / "mask.pgm").string(), inst.mask);
    const auto& p = lib.provenance[i];
    nlohmann::json j{{"source_image", p.source_stem},
                     {"crop", {{"row", p.row0}, {"col", p.col0}, {"rows", p.rows}, {"cols", p.cols}}}};
    std::ofstream f(sub / "provenance.json");
    if (!f) fail(ErrCode::Io, "cannot write provenance under " + sub.string());
    f << j.dump(2) << "\n";
  }
}

} // namespace ds::synth

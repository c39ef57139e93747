#include "io/pnm.hpp"

#include <cmath>
#include <fstream>

namespace ds::io {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& f) {
  std::string tok;
  int c;
  while ((c = f.get()) != EOF) {
    if (c == '#') {
      while ((c = f.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PnmHeader {
  bool color = false;
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_header(std::istream& f, const std::string& path) {
  std::string magic = next_token(f);
  PnmHeader h;
  if (magic == "P6")
    h.color = true;
  else if (magic != "P5")
    fail(ErrCode::Io, path + ": unsupported PNM magic '" + magic + "' (want P5 or P6)");
  try {
    h.width = std::stoi(next_token(f));
    h.height = std::stoi(next_token(f));
    h.maxval = std::stoi(next_token(f));
  } catch (const std::exception&) {
    fail(ErrCode::Io, path + ": malformed PNM header");
  }
  if (h.width <= 0 || h.height <= 0) fail(ErrCode::Io, path + ": bad dimensions");
  if (h.maxval <= 0 || h.maxval > 255) fail(ErrCode::Io, path + ": only 8-bit PNM supported (maxval <= 255)");
  return h;
}

std::vector<unsigned char> read_payload(std::istream& f, size_t count, const std::string& path) {
  std::vector<unsigned char> bytes(count);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
  if (static_cast<size_t>(f.gcount()) != count) fail(ErrCode::Io, path + ": truncated pixel data");
  return bytes;
}

} // namespace

Tensor read_pnm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrCode::Io, "cannot open image: " + path);
  PnmHeader h = read_header(f, path);
  int channels = h.color ? 3 : 1;
  auto bytes = read_payload(f, static_cast<size_t>(channels) * h.width * h.height, path);
  Tensor img({channels, h.height, h.width});
  const double scale = 1.0 / static_cast<double>(h.maxval);
  // PNM interleaves channels; tensors are planar
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, y, x) = scale * bytes[(static_cast<size_t>(y) * h.width + x) * channels + c];
  return img;
}

static void write_raw(const std::string& path, bool color, int h, int w, const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrCode::Io, "cannot open image for writing: " + path);
  f << (color ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrCode::Io, "short write: " + path);
}

static unsigned char quantize(double v) {
  double q = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<unsigned char>(q);
}

void write_pgm(const std::string& path, const Tensor& image) {
  int h, w;
  const double* data = image.data.data();
  if (image.rank() == 3 && image.shape[0] == 1) {
    h = image.shape[1];
    w = image.shape[2];
  } else if (image.rank() == 2) {
    h = image.shape[0];
    w = image.shape[1];
  } else {
    fail(ErrCode::Shape, "write_pgm expects {1,H,W} or {H,W}, got " + shape_str(image.shape));
  }
  std::vector<unsigned char> bytes(static_cast<size_t>(h) * w);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize(data[i]);
  write_raw(path, false, h, w, bytes);
}

void write_ppm(const std::string& path, const Tensor& image) {
  if (image.rank() != 3 || image.shape[0] != 3)
    fail(ErrCode::Shape, "write_ppm expects {3,H,W}, got " + shape_str(image.shape));
  int h = image.shape[1], w = image.shape[2];
  std::vector<unsigned char> bytes(static_cast<size_t>(3) * h * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        bytes[(static_cast<size_t>(y) * w + x) * 3 + c] = quantize(image.at(c, y, x));
  write_raw(path, true, h, w, bytes);
}

Tensor read_mask(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrCode::Io, "cannot open mask: " + path);
  PnmHeader h = read_header(f, path);
  if (h.color) fail(ErrCode::Io, path + ": masks must be P5");
  auto bytes = read_payload(f, static_cast<size_t>(h.width) * h.height, path);
  Tensor mask({h.height, h.width});
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == 0)
      mask.data[i] = 0.0;
    else if (bytes[i] == 255)
      mask.data[i] = 1.0;
    else
      fail(ErrCode::Io, path + ": mask pixels must be 0 or 255, found " + std::to_string(bytes[i]));
  }
  return mask;
}

void write_mask(const std::string& path, const Tensor& mask) {
  int h, w;
  if (mask.rank() == 2) {
    h = mask.shape[0];
    w = mask.shape[1];
  } else if (mask.rank() == 3 && mask.shape[0] == 1) {
    h = mask.shape[1];
    w = mask.shape[2];
  } else {
    fail(ErrCode::Shape, "write_mask expects {H,W}, got " + shape_str(mask.shape));
  }
  std::vector<unsigned char> bytes(static_cast<size_t>(h) * w);
  for (size_t i = 0; i < bytes.size(); ++i) {
    double v = mask.data[i];
    if (v != 0.0 && v != 1.0) fail(ErrCode::InvalidArg, "write_mask: mask must be binary");
    bytes[i] = v == 1.0 ? 255 : 0;
  }
  write_raw(path, false, h, w, bytes);
}

} // namespace ds::io

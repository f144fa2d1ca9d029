#include "mousepose/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace mousepose {

namespace {

void writeHeader(std::ofstream& out, const char magic[4], std::uint32_t width,
                 std::uint32_t height, float scale, float background) {
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&width), 4);
  out.write(reinterpret_cast<const char*>(&height), 4);
  out.write(reinterpret_cast<const char*>(&scale), 4);
  out.write(reinterpret_cast<const char*>(&background), 4);
}

struct Header {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  float scale = 0.0f;
  float background = 0.0f;
};

Header readHeader(std::ifstream& in, const char magic[4], const std::string& path) {
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0) {
    throw std::runtime_error(path + ": wrong magic");
  }
  Header h;
  in.read(reinterpret_cast<char*>(&h.width), 4);
  in.read(reinterpret_cast<char*>(&h.height), 4);
  in.read(reinterpret_cast<char*>(&h.scale), 4);
  in.read(reinterpret_cast<char*>(&h.background), 4);
  if (!in) throw std::runtime_error(path + ": truncated header");
  return h;
}

}  // namespace

void saveDepthImage(const DepthImage& image, const std::string& path, float scale_mm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  writeHeader(out, "MPD1", static_cast<std::uint32_t>(image.width),
              static_cast<std::uint32_t>(image.height), scale_mm, image.background_mm);
  std::vector<std::uint16_t> codes(image.values.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    long code = std::lround(image.values[i] / scale_mm);
    codes[i] = static_cast<std::uint16_t>(std::min(code, 65535L));
  }
  out.write(reinterpret_cast<const char*>(codes.data()),
            static_cast<std::streamsize>(codes.size() * sizeof(std::uint16_t)));
  if (!out) throw std::runtime_error("failed writing " + path);
}

DepthImage loadDepthImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  Header h = readHeader(in, "MPD1", path);
  DepthImage image;
  image.width = static_cast<int>(h.width);
  image.height = static_cast<int>(h.height);
  image.background_mm = h.background;
  std::vector<std::uint16_t> codes(h.width * static_cast<std::size_t>(h.height));
  in.read(reinterpret_cast<char*>(codes.data()),
          static_cast<std::streamsize>(codes.size() * sizeof(std::uint16_t)));
  if (!in) throw std::runtime_error(path + ": truncated depth data");
  image.values.resize(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    image.values[i] = static_cast<float>(codes[i]) * h.scale;
  }
  return image;
}

void saveLabelImage(const LabelImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  writeHeader(out, "MPL1", static_cast<std::uint32_t>(image.width),
              static_cast<std::uint32_t>(image.height), 1.0f,
              static_cast<float>(PartClass::Background));
  out.write(reinterpret_cast<const char*>(image.values.data()),
            static_cast<std::streamsize>(image.values.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

LabelImage loadLabelImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  Header h = readHeader(in, "MPL1", path);
  LabelImage image;
  image.width = static_cast<int>(h.width);
  image.height = static_cast<int>(h.height);
  image.values.resize(h.width * static_cast<std::size_t>(h.height));
  in.read(reinterpret_cast<char*>(image.values.data()),
          static_cast<std::streamsize>(image.values.size()));
  if (!in) throw std::runtime_error(path + ": truncated label data");
  return image;
}

void saveTruthSidecar(const TruthSidecar& truth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "mousepose-truth 1\n";
  char line[256];
  std::snprintf(line, sizeof(line), "camera %d %d %.17g %.17g %.17g %.17g\n", truth.camera.width,
                truth.camera.height, truth.camera.focal, truth.camera.cx, truth.camera.cy,
                truth.camera.height_mm);
  out << line;
  for (const Vec3& j : truth.joints) {
    std::snprintf(line, sizeof(line), "joint %.17g %.17g %.17g\n", j.x, j.y, j.z);
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

TruthSidecar loadTruthSidecar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "mousepose-truth" || version != 1) {
    throw std::runtime_error(path + ": not a truth sidecar");
  }
  TruthSidecar truth;
  std::string key;
  if (!(in >> key >> truth.camera.width >> truth.camera.height >> truth.camera.focal >>
        truth.camera.cx >> truth.camera.cy >> truth.camera.height_mm) ||
      key != "camera") {
    throw std::runtime_error(path + ": bad camera line");
  }
  for (Vec3& j : truth.joints) {
    if (!(in >> key >> j.x >> j.y >> j.z) || key != "joint") {
      throw std::runtime_error(path + ": bad joint line");
    }
  }
  return truth;
}

}  // namespace mousepose

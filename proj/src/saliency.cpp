#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <png.h>

#include "autoedit/ingest.hpp"
#include "autoedit/parallel.hpp"

namespace autoedit {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, "saliency", message);
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());

  // Header tokens, skipping '#' comments.
  auto token = [&]() {
    std::string tok;
    while (true) {
      int c = in.get();
      if (c == EOF) break;
      if (c == '#') {
        std::string ignored;
        std::getline(in, ignored);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    return tok;
  };

  const auto magic = token();
  if (magic != "P5" && magic != "P2") fail(ErrorKind::Validation, path.string() + ": not a PGM image");
  GrayImage img;
  int maxval = 0;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    fail(ErrorKind::Validation, path.string() + ": malformed PGM header");
  }
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) {
    fail(ErrorKind::Validation, path.string() + ": unsupported PGM dimensions or maxval");
  }

  const auto count = static_cast<size_t>(img.width) * static_cast<size_t>(img.height);
  img.pixels.resize(count);
  const float scale = 1.0f / static_cast<float>(maxval);
  if (magic == "P5") {
    const size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size()) fail(ErrorKind::Validation, path.string() + ": truncated PGM data");
    for (size_t i = 0; i < count; ++i) {
      const unsigned v = bytes_per == 2 ? (raw[2 * i] << 8u) | raw[2 * i + 1] : raw[i];
      img.pixels[i] = static_cast<float>(v) * scale;
    }
  } else {
    for (size_t i = 0; i < count; ++i) {
      unsigned v = 0;
      if (!(in >> v)) fail(ErrorKind::Validation, path.string() + ": truncated PGM data");
      img.pixels[i] = static_cast<float>(v) * scale;
    }
  }
  return img;
}

GrayImage read_png(const fs::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) fail(ErrorKind::Io, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Io, "libpng initialisation failed");
  }

  GrayImage img;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Validation, path.string() + ": corrupt PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  const auto stride = png_get_rowbytes(png, info);
  buffer.resize(stride * static_cast<size_t>(img.height));
  rows.resize(static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[static_cast<size_t>(y)] = buffer.data() + stride * static_cast<size_t>(y);
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  img.pixels.resize(static_cast<size_t>(img.width) * static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      img.pixels[static_cast<size_t>(y) * img.width + x] = rows[static_cast<size_t>(y)][x] / 255.0f;
    }
  }
  return img;
}

std::map<std::int64_t, fs::path> index_maps(const fs::path& dir) {
  std::map<std::int64_t, fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".png" && ext != ".PGM" && ext != ".PNG") continue;
    // Frame number is the trailing digit run of the stem: 000123.pgm, frame_000123.png.
    const auto stem = entry.path().stem().string();
    auto pos = stem.size();
    while (pos > 0 && std::isdigit(static_cast<unsigned char>(stem[pos - 1]))) --pos;
    if (pos == stem.size()) continue;
    frames[std::stoll(stem.substr(pos))] = entry.path();
  }
  return frames;
}

}  // namespace

GrayImage read_gray_image(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return read_png(path);
  return read_pgm(path);
}

double thresholded_box_mean(const GrayImage& image, const Box& box, double tau) {
  if (image.pixels.empty()) return 0.0;
  const float max_value = *std::max_element(image.pixels.begin(), image.pixels.end());
  const double floor_value = tau * max_value;

  // Pixel (i, j) belongs to the box when its center (i + 0.5, j + 0.5) does.
  auto first = [](double lo) { return static_cast<int>(std::ceil(lo - 0.5)); };
  auto last = [](double hi) { return static_cast<int>(std::ceil(hi - 0.5)) - 1; };
  int x0 = std::max(0, first(box.x));
  int x1 = std::min(image.width - 1, last(box.x + box.w));
  int y0 = std::max(0, first(box.y));
  int y1 = std::min(image.height - 1, last(box.y + box.h));
  if (x0 > x1 || y0 > y1) {
    // Sub-pixel box: use the pixel under its center.
    x0 = x1 = std::clamp(static_cast<int>(std::floor(box.cx())), 0, image.width - 1);
    y0 = y1 = std::clamp(static_cast<int>(std::floor(box.cy())), 0, image.height - 1);
  }

  double sum = 0.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) sum += std::max(image.at(x, y) - floor_value, 0.0);
  }
  return sum / (static_cast<double>(x1 - x0 + 1) * static_cast<double>(y1 - y0 + 1));
}

Grid reduce_saliency(const SaliencySource& source, const std::vector<ActorTrack>& tracks,
                     const SceneMeta& meta, double tau_sal) {
  const auto frames = static_cast<size_t>(meta.frame_count);
  const auto actors = static_cast<size_t>(meta.actor_count());

  if (const auto* scores = std::get_if<SaliencyScores>(&source)) {
    if (scores->scores.rows() != frames || scores->scores.cols() != actors) {
      fail(ErrorKind::Validation, "saliency score table does not cover all frames and actors");
    }
    return scores->scores;
  }

  Grid out(frames, actors, 0.0);
  const auto* maps = std::get_if<SaliencyMaps>(&source);
  if (!maps) return out;

  const auto index = index_maps(maps->directory);
  for (size_t t = 0; t < frames; ++t) {
    if (!index.count(static_cast<std::int64_t>(t))) {
      fail(ErrorKind::Io, "missing saliency map for frame " + std::to_string(t) + " in " + maps->directory.string());
    }
  }

  const double scale = 1.0 / static_cast<double>(maps->downscale);
  parallel_for(frames, [&](size_t t) {
    const auto image = read_gray_image(index.at(static_cast<std::int64_t>(t)));
    for (size_t a = 0; a < actors; ++a) {
      const auto& box = tracks[a].boxes[t];
      if (!box) fail(ErrorKind::Validation, "saliency reduction requires gap-filled tracks");
      const Box scaled{box->x * scale, box->y * scale, box->w * scale, box->h * scale};
      out(t, a) = thresholded_box_mean(image, scaled, tau_sal);
    }
  });
  return out;
}

}  // namespace autoedit

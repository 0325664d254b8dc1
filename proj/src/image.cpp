#include "ternavit/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "ternavit/tensor_io.hpp"

namespace ternavit {

Image load_image_png(const std::string& path, std::size_t channels) {
  if (channels != 1 && channels != 3)
    fail(ErrorCode::InvalidArgument, "load_image_png: channels must be 1 or 3");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    fail(ErrorCode::CorruptData, "load_image_png: " + path + ": " + png.message);
  png.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    fail(ErrorCode::CorruptData, "load_image_png: " + path + ": " + msg);
  }
  Image img(png.height, png.width, channels);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = static_cast<float>(pixels[i]) / 255.0f;
  return img;
}

Image load_image_ften(const std::string& path) {
  const TensorFile t = read_ften(path);
  if (t.dims.size() != 3)
    fail(ErrorCode::DimensionMismatch, "load_image_ften: expected a 3-d (H,W,C) tensor");
  Image img(static_cast<std::size_t>(t.dims[0]), static_cast<std::size_t>(t.dims[1]),
            static_cast<std::size_t>(t.dims[2]));
  img.data = t.values;
  return img;
}

Image load_image(const std::string& path, std::size_t channels) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "load_image: cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  is.read(magic, 4);
  is.close();
  if (std::memcmp(magic, "FTEN", 4) == 0) return load_image_ften(path);
  constexpr unsigned char kPngSig[4] = {0x89, 'P', 'N', 'G'};
  if (std::memcmp(magic, kPngSig, 4) == 0) return load_image_png(path, channels);
  fail(ErrorCode::BadMagic, "load_image: " + path + " is neither PNG nor FTEN");
}

}  // namespace ternavit

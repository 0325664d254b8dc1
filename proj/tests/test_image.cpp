#include <doctest.h>

#include <png.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ternavit/image.hpp"
#include "ternavit/tensor_io.hpp"

using namespace ternavit;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_test_png(const std::string& path, std::size_t w, std::size_t h,
                    const std::vector<std::uint8_t>& rgb) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&img, path.c_str(), 0, rgb.data(), 0, nullptr) != 0);
}

}  // namespace

TEST_CASE("PNG images decode to [0,1] floats with channel conversion") {
  const std::string path = tmp_path("ternavit_test.png");
  std::vector<std::uint8_t> rgb(2 * 2 * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(i * 20);
  write_test_png(path, 2, 2, rgb);

  const Image img = load_image_png(path, 3);
  CHECK(img.height == 2);
  CHECK(img.width == 2);
  CHECK(img.channels == 3);
  for (std::size_t i = 0; i < rgb.size(); ++i)
    CHECK(img.data[i] == doctest::Approx(rgb[i] / 255.0).epsilon(1e-6));

  // Grayscale conversion goes through libpng and stays in range.
  const Image gray = load_image_png(path, 1);
  CHECK(gray.channels == 1);
  for (float v : gray.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }

  // The sniffing loader dispatches on magic bytes.
  const Image sniffed = load_image(path, 3);
  CHECK(sniffed.data == img.data);
  std::filesystem::remove(path);
}

TEST_CASE("FTEN images and malformed inputs") {
  const std::string path = tmp_path("ternavit_img.ften");
  TensorFile t;
  t.dims = {2, 3, 1};
  t.values = {0.0f, 0.1f, 0.2f, 0.3f, 0.4f, 0.5f};
  write_ften(path, t);
  const Image img = load_image(path, 1);
  CHECK(img.height == 2);
  CHECK(img.width == 3);
  CHECK(img.channels == 1);
  CHECK(img.at(1, 2, 0) == 0.5f);
  std::filesystem::remove(path);

  const std::string junk = tmp_path("ternavit_junk.png");
  {
    std::ofstream os(junk, std::ios::binary);
    os << "definitely not an image";
  }
  CHECK_THROWS_AS(load_image(junk, 3), Error);
  std::filesystem::remove(junk);
}

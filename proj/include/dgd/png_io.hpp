#pragma once

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"

namespace dgd {

// 8-bit RGB PNG codec. Gray/palette/alpha inputs are normalized to RGB on
// read via the libpng simplified API; alpha composites over black.
inline ImageBuffer read_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw Error::data("cannot read PNG '" + path + "': " + png.message);
  png.format = PNG_FORMAT_RGB;
  ImageBuffer img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error::data("cannot decode PNG '" + path + "': " + msg);
  }
  return img;
}

inline void write_png(const std::string& path, const ImageBuffer& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * ImageBuffer::channels)
    throw Error::data("image buffer inconsistent with its dimensions");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error::data("cannot write PNG '" + path + "': " + msg);
  }
}

}  // namespace dgd

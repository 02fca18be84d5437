#pragma once

// PNG/JPEG decoding, PNG encoding and the LFX1 raw float dump.

#include <array>
#include <bit>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"

namespace brightfuse {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) fail(ErrorKind::kIo, "cannot open " + path.string());
  return f;
}

inline ImageU8 decode_png(std::FILE* fp, const std::string& name) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorKind::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorKind::kIo, "png: out of memory");
  }

  ImageU8 out;
  std::vector<png_bytep> rows;
  bool sixteen = false;
  // No C++ objects with non-trivial destructors are created between setjmp
  // and a possible longjmp besides `out` and `rows`, which are declared above.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kIo, "png: corrupt file " + name);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    sixteen = true;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    out = ImageU8(static_cast<int>(png_get_image_width(png, info)),
                  static_cast<int>(png_get_image_height(png, info)));
    rows.resize(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + std::size_t(y) * out.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (sixteen) fail(ErrorKind::kFormat, "png: 16-bit images are not supported: " + name);
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

inline ImageU8 decode_jpeg(std::FILE* fp, const std::string& name) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  ImageU8 out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorKind::kIo, "jpeg: corrupt file " + name);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out = ImageU8(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + std::size_t(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

}  // namespace detail

/// Decodes an 8-bit PNG or JPEG. Grayscale is replicated to RGB, alpha is
/// dropped, 16-bit PNGs are rejected with kFormat.
inline ImageU8 load_image(const std::filesystem::path& path) {
  auto fp = detail::open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  const std::size_t n = std::fread(sig.data(), 1, sig.size(), fp.get());
  std::rewind(fp.get());
  if (n == 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return detail::decode_png(fp.get(), path.string());
  if (n >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF)
    return detail::decode_jpeg(fp.get(), path.string());
  if (n == 0) fail(ErrorKind::kIo, "empty file " + path.string());
  fail(ErrorKind::kFormat, "unrecognized image format: " + path.string());
}

inline ImageF load_image_f(const std::filesystem::path& path) { return to_float(load_image(path)); }

/// Writes an 8-bit RGB PNG.
inline void save_png(const std::filesystem::path& path, const ImageU8& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kIo, "png write failed for " + path.string() + ": " + msg);
  }
}

inline void save_png(const std::filesystem::path& path, const ImageF& img) { save_png(path, to_u8(img)); }

// ---------------------------------------------------------------------------
// LFX1 float dump: "LFX1", u32 H, u32 W, u32 C, then H*W*C little-endian f32
// in [H][W][C] order.

namespace detail {

static_assert(std::endian::native == std::endian::little, "LFX1/LFW1 I/O assumes a little-endian host");

inline void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
inline void write_f32(std::ostream& os, float v) { os.write(reinterpret_cast<const char*>(&v), 4); }

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) fail(ErrorKind::kFormat, "unexpected end of file");
  return v;
}
inline std::uint8_t read_u8(std::istream& is) {
  char v = 0;
  if (!is.read(&v, 1)) fail(ErrorKind::kFormat, "unexpected end of file");
  return static_cast<std::uint8_t>(v);
}
inline void read_f32s(std::istream& is, float* dst, std::size_t count) {
  if (!is.read(reinterpret_cast<char*>(dst), std::streamsize(count * 4)))
    fail(ErrorKind::kFormat, "unexpected end of file");
}

}  // namespace detail

inline void write_float_dump(const std::filesystem::path& path, const ImageF& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::kIo, "cannot open " + path.string());
  os.write("LFX1", 4);
  detail::write_u32(os, static_cast<std::uint32_t>(img.height()));
  detail::write_u32(os, static_cast<std::uint32_t>(img.width()));
  detail::write_u32(os, static_cast<std::uint32_t>(img.channels()));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) detail::write_f32(os, img(x, y, c));
  if (!os) fail(ErrorKind::kIo, "write failed for " + path.string());
}

inline ImageF read_float_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, "LFX1", 4) != 0)
    fail(ErrorKind::kMagicMismatch, "not an LFX1 file: " + path.string());
  const auto h = detail::read_u32(is);
  const auto w = detail::read_u32(is);
  const auto c = detail::read_u32(is);
  if ((c != 1 && c != 3) || w > (1u << 16) || h > (1u << 16))
    fail(ErrorKind::kFormat, "LFX1: unsupported shape in " + path.string());
  std::vector<float> buf(std::size_t(h) * w * c);
  detail::read_f32s(is, buf.data(), buf.size());
  ImageF img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  std::size_t i = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int ch = 0; ch < img.channels(); ++ch) img(x, y, ch) = buf[i++];
  return img;
}

}  // namespace brightfuse

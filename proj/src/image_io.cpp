#include "histovote/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>

#include <jpeglib.h>
#include <png.h>
#include <tiffio.h>

#include "histovote/errors.hpp"

namespace histovote {

namespace {

using Bytes = std::vector<std::uint8_t>;

[[noreturn]] void decode_fail(ImageFormat format, const std::string& what) {
  throw DecodeError(std::string(format_name(format)) + " decode error: " + what);
}

void require_dims(long width, long height) {
  if (width <= 0 || height <= 0) {
    throw DimensionError("image has zero dimension (" + std::to_string(width) + "x" + std::to_string(height) + ")");
  }
}

// Converts an interleaved 8-bit buffer with `channels` samples per pixel into a raster.
// Channels 1-2 are grey (+alpha); 3-4 are RGB (+alpha).
RgbRaster from_interleaved(const std::uint8_t* data, int width, int height, int channels) {
  Plane r(height, width), g(height, width), b(height, width);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = data + static_cast<std::size_t>(y) * width * channels;
    for (int x = 0; x < width; ++x) {
      const std::uint8_t* px = row + static_cast<std::size_t>(x) * channels;
      if (channels < 3) {
        r(y, x) = g(y, x) = b(y, x) = px[0];
      } else {
        r(y, x) = px[0];
        g(y, x) = px[1];
        b(y, x) = px[2];
      }
    }
  }
  return RgbRaster(std::move(r), std::move(g), std::move(b));
}

Bytes to_interleaved(const RgbRaster& raster) {
  Bytes out(static_cast<std::size_t>(raster.width()) * raster.height() * 3);
  std::size_t k = 0;
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      out[k++] = raster.red()(y, x);
      out[k++] = raster.green()(y, x);
      out[k++] = raster.blue()(y, x);
    }
  }
  return out;
}

// ---------------------------------------------------------------- PNG

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
  std::string error;
};

void png_read_bytes(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->offset + length > state->bytes.size()) {
    png_error(png, "unexpected end of data (truncated file)");
  }
  std::memcpy(out, state->bytes.data() + state->offset, length);
  state->offset += length;
}

void png_on_error(png_structp png, png_const_charp message) {
  auto* state = static_cast<PngReadState*>(png_get_error_ptr(png));
  if (state) state->error = message;
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

RgbRaster decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) decode_fail(ImageFormat::Png, "bad signature");
  if (bytes.size() >= 24 && std::memcmp(bytes.data() + 12, "IHDR", 4) == 0) {
    const auto be32 = [&](std::size_t at) {
      return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
             (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
    };
    require_dims(be32(16), be32(20));
  }
  PngReadState state{bytes, 0, {}};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_on_error, png_on_warning);
  if (!png) decode_fail(ImageFormat::Png, "out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    decode_fail(ImageFormat::Png, "out of memory");
  }

  // Everything that owns memory across setjmp is declared before it.
  Bytes buffer;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    decode_fail(ImageFormat::Png, state.error.empty() ? "malformed stream" : state.error);
  }
  png_set_read_fn(png, &state, png_read_bytes);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  // High byte of 16-bit samples.
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  channels = png_get_channels(png, info);

  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_interleaved(buffer.data(), static_cast<int>(width), static_cast<int>(height), channels);
}

void png_write_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush(png_structp) {}

Bytes encode_png_interleaved(const Bytes& pixels, int width, int height, int channels) {
  Bytes out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png encoder allocation failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encoding failed");
  }
  png_set_write_fn(png, &out, png_write_bytes, png_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// ---------------------------------------------------------------- JPEG

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_on_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Corrupt-data warnings (premature end of file, bad Huffman codes) would otherwise be padded over
// with grey pixels; treat them as errors. Trace messages (level > 0) are ignored.
void jpeg_on_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_on_error(cinfo);
}

RgbRaster decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_on_error;
  err.mgr.emit_message = jpeg_on_message;
  Bytes buffer;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    decode_fail(ImageFormat::Jpeg, err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    jpeg_destroy_decompress(&cinfo);
    decode_fail(ImageFormat::Jpeg, "CMYK images are not supported");
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int width = static_cast<int>(cinfo.output_width);
  const int height = static_cast<int>(cinfo.output_height);
  const int channels = cinfo.output_components;
  buffer.resize(static_cast<std::size_t>(width) * height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  require_dims(width, height);
  return from_interleaved(buffer.data(), width, height, channels);
}

// ---------------------------------------------------------------- TIFF

struct TiffMemory {
  std::span<const std::uint8_t> bytes;
  toff_t offset = 0;
};

tsize_t tiff_read(thandle_t h, tdata_t buf, tsize_t size) {
  auto* m = static_cast<TiffMemory*>(h);
  const auto avail = static_cast<tsize_t>(m->bytes.size()) - static_cast<tsize_t>(m->offset);
  const tsize_t n = std::max<tsize_t>(0, std::min(size, avail));
  if (n > 0) std::memcpy(buf, m->bytes.data() + m->offset, static_cast<std::size_t>(n));
  m->offset += static_cast<toff_t>(n);
  return n;
}
tsize_t tiff_write(thandle_t, tdata_t, tsize_t) { return 0; }
toff_t tiff_seek(thandle_t h, toff_t off, int whence) {
  auto* m = static_cast<TiffMemory*>(h);
  switch (whence) {
    case SEEK_SET: m->offset = off; break;
    case SEEK_CUR: m->offset += off; break;
    case SEEK_END: m->offset = m->bytes.size() + off; break;
  }
  return m->offset;
}
int tiff_close(thandle_t) { return 0; }
toff_t tiff_size(thandle_t h) { return static_cast<TiffMemory*>(h)->bytes.size(); }
int tiff_map(thandle_t, tdata_t*, toff_t*) { return 0; }
void tiff_unmap(thandle_t, tdata_t, toff_t) {}

thread_local std::string tiff_last_error;

void tiff_error_handler(const char* module, const char* fmt, va_list args) {
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  tiff_last_error = std::string(module ? module : "tiff") + ": " + buf;
}

RgbRaster decode_tiff(std::span<const std::uint8_t> bytes) {
  TIFFSetErrorHandler(tiff_error_handler);
  TIFFSetWarningHandler(nullptr);
  tiff_last_error.clear();
  TiffMemory mem{bytes, 0};
  TIFF* tif = TIFFClientOpen("memory", "rm", &mem, tiff_read, tiff_write, tiff_seek, tiff_close, tiff_size,
                             tiff_map, tiff_unmap);
  if (!tif) decode_fail(ImageFormat::Tiff, tiff_last_error.empty() ? "cannot open stream" : tiff_last_error);
  std::unique_ptr<TIFF, void (*)(TIFF*)> guard(tif, TIFFClose);
  uint32_t width = 0, height = 0;
  TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &width);
  TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &height);
  require_dims(width, height);
  std::vector<uint32_t> rgba(static_cast<std::size_t>(width) * height);
  if (!TIFFReadRGBAImageOriented(tif, width, height, rgba.data(), ORIENTATION_TOPLEFT, 0)) {
    decode_fail(ImageFormat::Tiff, tiff_last_error.empty() ? "unreadable raster data" : tiff_last_error);
  }
  Plane r(height, width), g(height, width), b(height, width);
  for (uint32_t y = 0; y < height; ++y) {
    for (uint32_t x = 0; x < width; ++x) {
      const uint32_t px = rgba[static_cast<std::size_t>(y) * width + x];
      r(y, x) = static_cast<std::uint8_t>(TIFFGetR(px));
      g(y, x) = static_cast<std::uint8_t>(TIFFGetG(px));
      b(y, x) = static_cast<std::uint8_t>(TIFFGetB(px));
    }
  }
  return RgbRaster(std::move(r), std::move(g), std::move(b));
}

// ---------------------------------------------------------------- PPM (binary P6)

RgbRaster decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1L << 30)) decode_fail(ImageFormat::Ppm, "header value too large");
      ++pos;
      any = true;
    }
    if (!any) decode_fail(ImageFormat::Ppm, "malformed header");
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') decode_fail(ImageFormat::Ppm, "not a binary P6 file");
  const long width = next_token();
  const long height = next_token();
  const long maxval = next_token();
  require_dims(width, height);
  if (maxval <= 0 || maxval > 65535) decode_fail(ImageFormat::Ppm, "bad maxval");
  ++pos;  // single whitespace before the raster
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * 3 * sample_bytes;
  if (pos > bytes.size() || bytes.size() - pos < need) decode_fail(ImageFormat::Ppm, "truncated pixel data");
  if (sample_bytes == 1) return from_interleaved(bytes.data() + pos, width, height, 3);
  Bytes high(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < high.size(); ++i) high[i] = bytes[pos + 2 * i];  // big-endian high byte
  return from_interleaved(high.data(), width, height, 3);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view format_name(ImageFormat format) {
  switch (format) {
    case ImageFormat::Auto: return "auto";
    case ImageFormat::Png: return "png";
    case ImageFormat::Jpeg: return "jpeg";
    case ImageFormat::Tiff: return "tiff";
    case ImageFormat::Ppm: return "ppm";
  }
  return "unknown";
}

ImageFormat parse_format(std::string_view name) {
  const std::string n = lower(name);
  if (n.empty() || n == "auto") return ImageFormat::Auto;
  if (n == "png") return ImageFormat::Png;
  if (n == "jpeg" || n == "jpg") return ImageFormat::Jpeg;
  if (n == "tiff" || n == "tif") return ImageFormat::Tiff;
  if (n == "ppm") return ImageFormat::Ppm;
  throw DecodeError("unsupported image format '" + std::string(name) + "'");
}

ImageFormat detect_format(std::span<const std::uint8_t> bytes) {
  const auto starts = [&](std::initializer_list<std::uint8_t> magic) {
    return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin());
  };
  if (starts({0x89, 'P', 'N', 'G'})) return ImageFormat::Png;
  if (starts({0xFF, 0xD8, 0xFF})) return ImageFormat::Jpeg;
  if (starts({'I', 'I', 42, 0}) || starts({'M', 'M', 0, 42}) || starts({'I', 'I', 43, 0}) ||
      starts({'M', 'M', 0, 43})) {
    return ImageFormat::Tiff;
  }
  if (starts({'P', '6'})) return ImageFormat::Ppm;
  return ImageFormat::Auto;
}

RgbRaster decode_image(std::span<const std::uint8_t> bytes, ImageFormat hint) {
  const ImageFormat format = hint == ImageFormat::Auto ? detect_format(bytes) : hint;
  switch (format) {
    case ImageFormat::Png: return decode_png(bytes);
    case ImageFormat::Jpeg: return decode_jpeg(bytes);
    case ImageFormat::Tiff: return decode_tiff(bytes);
    case ImageFormat::Ppm: return decode_ppm(bytes);
    case ImageFormat::Auto: break;
  }
  throw DecodeError("unrecognized image format (" + std::to_string(bytes.size()) + " bytes)");
}

std::vector<std::uint8_t> encode_png(const RgbRaster& raster) {
  return encode_png_interleaved(to_interleaved(raster), raster.width(), raster.height(), 3);
}

std::vector<std::uint8_t> encode_png(const BlueMask& mask) {
  Bytes grey(static_cast<std::size_t>(mask.width()) * mask.height());
  std::size_t k = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) grey[k++] = mask.at(x, y) ? 255 : 0;
  }
  return encode_png_interleaved(grey, mask.width(), mask.height(), 1);
}

std::vector<std::uint8_t> encode_jpeg(const RgbRaster& raster, int quality) {
  jpeg_compress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_on_error;
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
  const Bytes pixels = to_interleaved(raster);
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(out);
    throw IoError(std::string("jpeg encoding failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out, &out_size);
  cinfo.image_width = static_cast<JDIMENSION>(raster.width());
  cinfo.image_height = static_cast<JDIMENSION>(raster.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * raster.width() * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  Bytes result(out, out + out_size);
  std::free(out);
  return result;
}

std::vector<std::uint8_t> encode_ppm(const RgbRaster& raster) {
  const std::string header =
      "P6\n" + std::to_string(raster.width()) + " " + std::to_string(raster.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  const Bytes pixels = to_interleaved(raster);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

RgbRaster read_image(const std::filesystem::path& path, ImageFormat hint) {
  const Bytes bytes = read_file(path);
  try {
    return decode_image(bytes, hint);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const RgbRaster& raster) { write_file(path, encode_png(raster)); }

void write_png(const std::filesystem::path& path, const BlueMask& mask) { write_file(path, encode_png(mask)); }

}  // namespace histovote

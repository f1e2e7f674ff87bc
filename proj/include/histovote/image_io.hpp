#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "histovote/raster.hpp"

namespace histovote {

enum class ImageFormat { Auto, Png, Jpeg, Tiff, Ppm };

std::string_view format_name(ImageFormat format);
/// Accepts "auto", "png", "jpeg"/"jpg", "tiff"/"tif", "ppm" (case-insensitive).
ImageFormat parse_format(std::string_view name);
/// Sniffs the magic bytes; returns Auto when nothing matches.
ImageFormat detect_format(std::span<const std::uint8_t> bytes);

/// Decodes to 8-bit RGB. Alpha is dropped, grey is expanded, 16-bit samples keep their high byte.
RgbRaster decode_image(std::span<const std::uint8_t> bytes, ImageFormat hint = ImageFormat::Auto);

std::vector<std::uint8_t> encode_png(const RgbRaster& raster);
/// 8-bit greyscale PNG: bluish pixels 255, others 0.
std::vector<std::uint8_t> encode_png(const BlueMask& mask);
std::vector<std::uint8_t> encode_jpeg(const RgbRaster& raster, int quality = 95);
std::vector<std::uint8_t> encode_ppm(const RgbRaster& raster);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

RgbRaster read_image(const std::filesystem::path& path, ImageFormat hint = ImageFormat::Auto);
void write_png(const std::filesystem::path& path, const RgbRaster& raster);
void write_png(const std::filesystem::path& path, const BlueMask& mask);

}  // namespace histovote

#include "vsim/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "vsim/errors.hpp"

namespace vsim {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  return buf;
}

// ---- PNG ----

struct PngReadState {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + n > st->size) png_error(png, "truncated PNG");
  std::memcpy(out, st->data + st->pos, n);
  st->pos += n;
}

Image2D decode_png(const std::vector<uint8_t>& buf, const std::string& path) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<uint8_t> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("invalid PNG: " + path);
  }
  PngReadState st{buf.data(), buf.size(), 0};
  png_set_read_fn(png, &st, png_mem_read);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);
  int channels = png_get_channels(png, info);
  if (depth != 8 && depth != 16) throw FormatError("unsupported PNG bit depth");
  if (channels != 1 && channels != 3) throw FormatError("unsupported PNG channel count");

  size_t rowbytes = png_get_rowbytes(png, info);
  pixels.resize(rowbytes * h);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = pixels.data() + y * rowbytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image2D img(static_cast<int>(h), static_cast<int>(w));
  const double scale = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    const uint8_t* row = pixels.data() + y * rowbytes;
    for (png_uint_32 x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        if (depth == 8) {
          acc += row[x * channels + c];
        } else {
          // PNG stores 16-bit samples big-endian.
          const uint8_t* p = row + 2 * (x * channels + c);
          acc += (static_cast<unsigned>(p[0]) << 8) | p[1];
        }
      }
      img.at(static_cast<int>(y), static_cast<int>(x)) =
          acc * scale / channels;
    }
  }
  return img;
}

// ---- TIFF (baseline, uncompressed) ----

class TiffReader {
 public:
  TiffReader(const uint8_t* data, size_t size) : data_(data), size_(size) {
    if (size_ < 8) throw FormatError("truncated TIFF");
    if (data_[0] == 'I' && data_[1] == 'I') {
      little_ = true;
    } else if (data_[0] == 'M' && data_[1] == 'M') {
      little_ = false;
    } else {
      throw FormatError("bad TIFF byte order mark");
    }
    if (u16(2) != 42) throw FormatError("bad TIFF magic");
  }

  Image2D decode() {
    uint32_t ifd = u32(4);
    if (ifd + 2 > size_) throw FormatError("truncated TIFF IFD");
    uint16_t n = u16(ifd);

    uint32_t width = 0, height = 0, compression = 1, photometric = 1;
    uint32_t samples = 1, rows_per_strip = 0xffffffffu, planar = 1;
    std::vector<uint32_t> bits, strip_offsets, strip_counts, sample_format;

    for (uint16_t i = 0; i < n; ++i) {
      uint32_t e = ifd + 2 + 12u * i;
      if (e + 12 > size_) throw FormatError("truncated TIFF IFD entry");
      uint16_t tag = u16(e);
      switch (tag) {
        case 256: width = entry_first(e); break;
        case 257: height = entry_first(e); break;
        case 258: bits = entry_values(e); break;
        case 259: compression = entry_first(e); break;
        case 262: photometric = entry_first(e); break;
        case 273: strip_offsets = entry_values(e); break;
        case 277: samples = entry_first(e); break;
        case 278: rows_per_strip = entry_first(e); break;
        case 279: strip_counts = entry_values(e); break;
        case 284: planar = entry_first(e); break;
        case 339: sample_format = entry_values(e); break;
        default: break;
      }
    }

    if (width == 0 || height == 0) throw FormatError("TIFF missing dimensions");
    if (compression != 1) throw FormatError("only uncompressed TIFF supported");
    if (planar != 1) throw FormatError("only chunky TIFF supported");
    if (photometric > 2) throw FormatError("unsupported TIFF photometric");
    if (samples != 1 && samples != 3) throw FormatError("unsupported TIFF sample count");
    if (bits.empty()) bits.assign(samples, 1);
    if (bits.size() != samples) throw FormatError("TIFF bits/sample mismatch");
    for (uint32_t b : bits) {
      if (b != bits[0]) throw FormatError("heterogeneous TIFF bit depths");
    }
    uint32_t depth = bits[0];
    if (depth != 8 && depth != 16) throw FormatError("unsupported TIFF bit depth");
    for (uint32_t f : sample_format) {
      if (f != 1) throw FormatError("only unsigned TIFF samples supported");
    }
    if (strip_offsets.empty() || strip_counts.size() != strip_offsets.size()) {
      throw FormatError("TIFF strip table malformed");
    }

    const size_t bytes_per_px = samples * depth / 8;
    const size_t row_bytes = width * bytes_per_px;
    std::vector<uint8_t> raster;
    raster.reserve(row_bytes * height);
    for (size_t s = 0; s < strip_offsets.size(); ++s) {
      uint64_t off = strip_offsets[s];
      uint64_t cnt = strip_counts[s];
      if (off + cnt > size_) throw FormatError("TIFF strip out of bounds");
      raster.insert(raster.end(), data_ + off, data_ + off + cnt);
    }
    if (raster.size() < row_bytes * height) throw FormatError("TIFF pixel data truncated");
    (void)rows_per_strip;

    Image2D img(static_cast<int>(height), static_cast<int>(width));
    const double scale = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
    const bool invert = photometric == 0;  // WhiteIsZero
    for (uint32_t y = 0; y < height; ++y) {
      const uint8_t* row = raster.data() + y * row_bytes;
      for (uint32_t x = 0; x < width; ++x) {
        double acc = 0.0;
        for (uint32_t c = 0; c < samples; ++c) {
          if (depth == 8) {
            acc += row[x * samples + c];
          } else {
            const uint8_t* p = row + 2 * (x * samples + c);
            // 16-bit samples follow the file byte order.
            acc += little_ ? (p[0] | static_cast<unsigned>(p[1]) << 8)
                           : (static_cast<unsigned>(p[0]) << 8 | p[1]);
          }
        }
        double v = acc * scale / samples;
        img.at(static_cast<int>(y), static_cast<int>(x)) = invert ? 1.0 - v : v;
      }
    }
    return img;
  }

 private:
  uint16_t u16(size_t off) const {
    if (off + 2 > size_) throw FormatError("truncated TIFF");
    return little_ ? data_[off] | static_cast<uint16_t>(data_[off + 1]) << 8
                   : static_cast<uint16_t>(data_[off]) << 8 | data_[off + 1];
  }
  uint32_t u32(size_t off) const {
    if (off + 4 > size_) throw FormatError("truncated TIFF");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      int shift = little_ ? 8 * i : 8 * (3 - i);
      v |= static_cast<uint32_t>(data_[off + i]) << shift;
    }
    return v;
  }

  // IFD entry: tag u16, type u16, count u32, value/offset u32.
  std::vector<uint32_t> entry_values(uint32_t e) const {
    uint16_t type = u16(e + 2);
    uint32_t count = u32(e + 4);
    size_t elem = type == 3 ? 2 : type == 4 ? 4 : type == 1 ? 1 : 0;
    if (elem == 0) throw FormatError("unsupported TIFF field type");
    size_t total = elem * count;
    size_t base = total <= 4 ? e + 8 : u32(e + 8);
    if (base + total > size_) throw FormatError("TIFF field out of bounds");
    std::vector<uint32_t> vals(count);
    for (uint32_t i = 0; i < count; ++i) {
      vals[i] = elem == 1 ? data_[base + i]
              : elem == 2 ? u16(base + 2 * i)
                          : u32(base + 4 * i);
    }
    return vals;
  }
  uint32_t entry_first(uint32_t e) const {
    auto v = entry_values(e);
    if (v.empty()) throw FormatError("empty TIFF field");
    return v[0];
  }

  const uint8_t* data_;
  size_t size_;
  bool little_ = true;
};

}  // namespace

Image2D read_image(const std::string& path) {
  std::vector<uint8_t> buf = read_file(path);
  static const uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (buf.size() >= 8 && std::memcmp(buf.data(), kPngSig, 8) == 0) {
    return decode_png(buf, path);
  }
  if (buf.size() >= 4 && ((buf[0] == 'I' && buf[1] == 'I') ||
                          (buf[0] == 'M' && buf[1] == 'M'))) {
    return TiffReader(buf.data(), buf.size()).decode();
  }
  throw FormatError("unrecognized raster format: " + path);
}

void write_image_png16(const std::string& path, const Image2D& img) {
  namespace fs = std::filesystem;
  fs::path dest(path);
  fs::path tmp = dest;
  tmp += ".tmp";

  FILE* fp = std::fopen(tmp.c_str(), "wb");
  if (!fp) throw IoError("cannot open for write: " + tmp.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    std::error_code ec;
    fs::remove(tmp, ec);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(img.width) * 2);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = std::clamp(img.at(y, x), 0.0, 1.0);
      auto q = static_cast<uint16_t>(std::lround(v * 65535.0));
      row[2 * x] = static_cast<uint8_t>(q >> 8);
      row[2 * x + 1] = static_cast<uint8_t>(q & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);

  std::error_code ec;
  fs::rename(tmp, dest, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed: " + dest.string());
  }
}

}  // namespace vsim

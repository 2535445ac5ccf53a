#include "vsim/raster_io.hpp"

#include <gtest/gtest.h>
#include <png.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vsim/errors.hpp"

namespace vsim {
namespace {

namespace fs = std::filesystem;

class RasterTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "vsim_raster_test";
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

void write_blob(const std::string& p, const std::vector<uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// Writes an 8-bit PNG with the given channel count (1 = gray, 3 = RGB).
void write_png8(const std::string& p, int h, int w, int channels,
                const std::vector<uint8_t>& pixels) {
  FILE* fp = std::fopen(p.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  ASSERT_EQ(0, setjmp(png_jmpbuf(png)));
  png_init_io(png, fp);
  png_set_IHDR(png, info, w, h, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() +
                                             static_cast<size_t>(y) * w * channels));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

// Minimal baseline uncompressed TIFF: header, one IFD, one strip.
std::vector<uint8_t> make_tiff(bool little, uint16_t w, uint16_t h,
                               uint16_t depth, uint16_t samples,
                               uint16_t photometric,
                               const std::vector<uint8_t>& pixel_bytes) {
  std::vector<uint8_t> b;
  auto put8 = [&](uint8_t v) { b.push_back(v); };
  auto put16 = [&](uint16_t v) {
    if (little) {
      put8(v & 0xff);
      put8(v >> 8);
    } else {
      put8(v >> 8);
      put8(v & 0xff);
    }
  };
  auto put32 = [&](uint32_t v) {
    if (little) {
      put16(v & 0xffff);
      put16(v >> 16);
    } else {
      put16(v >> 16);
      put16(v & 0xffff);
    }
  };
  // SHORT values sit in the low half of the 4-byte value field.
  auto entry_short = [&](uint16_t tag, uint16_t value) {
    put16(tag);
    put16(3);
    put32(1);
    put16(value);
    put16(0);
  };
  auto entry_long = [&](uint16_t tag, uint32_t value) {
    put16(tag);
    put16(4);
    put32(1);
    put32(value);
  };

  const uint16_t n_entries = 8;
  const uint32_t ifd_off = 8;
  const uint32_t ifd_size = 2 + 12u * n_entries + 4;
  const bool bits_external = samples > 1;
  const uint32_t bits_off = ifd_off + ifd_size;
  const uint32_t data_off = bits_off + (bits_external ? 2u * samples : 0u);

  put8(little ? 'I' : 'M');
  put8(little ? 'I' : 'M');
  put16(42);
  put32(ifd_off);

  put16(n_entries);
  entry_short(256, w);
  entry_short(257, h);
  if (bits_external) {
    put16(258);
    put16(3);
    put32(samples);
    put32(bits_off);
  } else {
    entry_short(258, depth);
  }
  entry_short(259, 1);  // uncompressed
  entry_short(262, photometric);
  entry_long(273, data_off);
  entry_short(277, samples);
  entry_long(279, static_cast<uint32_t>(pixel_bytes.size()));
  put32(0);  // next IFD

  if (bits_external) {
    for (uint16_t s = 0; s < samples; ++s) put16(depth);
  }
  b.insert(b.end(), pixel_bytes.begin(), pixel_bytes.end());
  return b;
}

TEST_F(RasterTest, Png16RoundTripIsExactOnQuantizedValues) {
  Image2D img(2, 3);
  const uint16_t levels[] = {0, 1, 12345, 30000, 65534, 65535};
  for (int i = 0; i < 6; ++i) img.pixels[i] = levels[i] / 65535.0;
  const std::string p = path("q.png");
  write_image_png16(p, img);
  Image2D back = read_image(p);
  ASSERT_EQ(img.height, back.height);
  ASSERT_EQ(img.width, back.width);
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(img.pixels[i], back.pixels[i]) << i;
}

TEST_F(RasterTest, Png16WriteClampsOutOfRange) {
  Image2D img(1, 2);
  img.pixels = {-0.5, 1.5};
  const std::string p = path("clamp.png");
  write_image_png16(p, img);
  Image2D back = read_image(p);
  EXPECT_DOUBLE_EQ(0.0, back.pixels[0]);
  EXPECT_DOUBLE_EQ(1.0, back.pixels[1]);
}

TEST_F(RasterTest, Png8GrayScalesBy255) {
  const std::string p = path("g8.png");
  write_png8(p, 1, 2, 1, {0, 255});
  Image2D img = read_image(p);
  EXPECT_DOUBLE_EQ(0.0, img.pixels[0]);
  EXPECT_DOUBLE_EQ(1.0, img.pixels[1]);
}

TEST_F(RasterTest, PngRgbCollapsesToChannelMean) {
  const std::string p = path("rgb.png");
  write_png8(p, 1, 1, 3, {30, 60, 90});
  Image2D img = read_image(p);
  EXPECT_DOUBLE_EQ(0.23529411764705882, img.at(0, 0));
  EXPECT_DOUBLE_EQ((30.0 + 60.0 + 90.0) / (3.0 * 255.0), img.at(0, 0));
}

TEST_F(RasterTest, TiffLittleEndian8Bit) {
  const std::string p = path("ii8.tif");
  write_blob(p, make_tiff(true, 2, 2, 8, 1, 1, {0, 85, 170, 255}));
  Image2D img = read_image(p);
  ASSERT_EQ(2, img.height);
  ASSERT_EQ(2, img.width);
  EXPECT_DOUBLE_EQ(0.0, img.at(0, 0));
  EXPECT_DOUBLE_EQ(85.0 / 255.0, img.at(0, 1));
  EXPECT_DOUBLE_EQ(170.0 / 255.0, img.at(1, 0));
  EXPECT_DOUBLE_EQ(1.0, img.at(1, 1));
}

TEST_F(RasterTest, TiffBigEndian16Bit) {
  // 0x1234 and 0xffff stored big-endian.
  const std::string p = path("mm16.tif");
  write_blob(p, make_tiff(false, 2, 1, 16, 1, 1, {0x12, 0x34, 0xff, 0xff}));
  Image2D img = read_image(p);
  EXPECT_DOUBLE_EQ(0x1234 / 65535.0, img.at(0, 0));
  EXPECT_DOUBLE_EQ(1.0, img.at(0, 1));
}

TEST_F(RasterTest, TiffLittleEndian16BitByteOrder) {
  const std::string p = path("ii16.tif");
  write_blob(p, make_tiff(true, 1, 1, 16, 1, 1, {0x34, 0x12}));
  Image2D img = read_image(p);
  EXPECT_DOUBLE_EQ(0x1234 / 65535.0, img.at(0, 0));
}

TEST_F(RasterTest, TiffWhiteIsZeroInverts) {
  const std::string p = path("wiz.tif");
  write_blob(p, make_tiff(true, 1, 2, 8, 1, 0, {0, 255}));
  Image2D img = read_image(p);
  EXPECT_DOUBLE_EQ(1.0, img.at(0, 0));
  EXPECT_DOUBLE_EQ(0.0, img.at(0, 1));
}

TEST_F(RasterTest, TiffRgbCollapsesToChannelMean) {
  const std::string p = path("rgb.tif");
  write_blob(p, make_tiff(true, 1, 1, 8, 3, 2, {30, 60, 90}));
  Image2D img = read_image(p);
  EXPECT_DOUBLE_EQ(0.23529411764705882, img.at(0, 0));
}

TEST_F(RasterTest, RejectsUnknownMagic) {
  const std::string p = path("junk.bin");
  write_blob(p, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_THROW(read_image(p), FormatError);
}

TEST_F(RasterTest, RejectsBadTiffMagicNumber) {
  auto bytes = make_tiff(true, 1, 1, 8, 1, 1, {7});
  bytes[2] = 43;
  const std::string p = path("bad42.tif");
  write_blob(p, bytes);
  EXPECT_THROW(read_image(p), FormatError);
}

TEST_F(RasterTest, RejectsTiffStripOutOfBounds) {
  auto bytes = make_tiff(true, 4, 4, 8, 1, 1, std::vector<uint8_t>(16, 9));
  bytes.resize(bytes.size() - 8);
  const std::string p = path("short.tif");
  write_blob(p, bytes);
  EXPECT_THROW(read_image(p), FormatError);
}

TEST_F(RasterTest, RejectsCompressedTiff) {
  auto bytes = make_tiff(true, 1, 1, 8, 1, 1, {7});
  const std::string p = path("lzw.tif");
  // Patch the compression entry (tag 259, fourth entry) to LZW (5).
  // Entry layout: IFD at 8, count u16, entries of 12 bytes; value at +8.
  const size_t entry = 8 + 2 + 3 * 12;
  ASSERT_EQ(259, bytes[entry] | (bytes[entry + 1] << 8));
  bytes[entry + 8] = 5;
  write_blob(p, bytes);
  EXPECT_THROW(read_image(p), FormatError);
}

TEST_F(RasterTest, MissingFileIsIoError) {
  EXPECT_THROW(read_image(path("absent.png")), IoError);
}

TEST_F(RasterTest, RejectsTruncatedPng) {
  Image2D img(4, 4, 0.5);
  const std::string p = path("t.png");
  write_image_png16(p, img);
  std::ifstream in(p, std::ios::binary);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  in.close();
  bytes.resize(bytes.size() / 2);
  const std::string p2 = path("trunc.png");
  write_blob(p2, bytes);
  EXPECT_THROW(read_image(p2), FormatError);
}

}  // namespace
}  // namespace vsim

#include "vsim/container.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "vsim/errors.hpp"

namespace vsim {

namespace {

constexpr char kMagic[4] = {'V', 'S', 'I', 'M'};
constexpr uint16_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;
constexpr size_t kHeaderBytes = 19;
constexpr size_t kMetaBytes = 33;

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(static_cast<uint8_t>(v & 0xff));
  b.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<uint8_t>& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<uint8_t>& b, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(b, u);
}

void put_f32(std::vector<uint8_t>& b, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(b, u);
}

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(data_[pos_]) |
                 static_cast<uint16_t>(data_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() {
    uint64_t u = u64();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
  float f32() {
    uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
  void raw(void* dst, size_t n) {
    need(n);
    std::memcpy(dst, data_ + pos_, n);
    pos_ += n;
  }
  size_t remaining() const { return size_ - pos_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > size_) throw FormatError("container truncated");
  }
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

}  // namespace

size_t container_size(int frames, int height, int width) {
  return kHeaderBytes + static_cast<size_t>(frames) * kMetaBytes +
         static_cast<size_t>(frames) * height * width * 4;
}

void write_container(const std::string& path, const SimStack& stack) {
  // Accepts any frame sequence, not only 9-frame stacks; callers that need
  // the full stack invariant run SimStack::validate() themselves.
  if (stack.frames.empty() || stack.metas.size() != stack.frames.size()) {
    throw ConfigError("frame/meta count mismatch");
  }
  const int t = static_cast<int>(stack.frames.size());
  const int h = stack.frames[0].height;
  const int w = stack.frames[0].width;
  for (const Image2D& f : stack.frames) {
    if (f.height != h || f.width != w ||
        f.pixels.size() != static_cast<size_t>(h) * w) {
      throw ConfigError("frames must share dimensions");
    }
  }
  for (const PatternMeta& m : stack.metas) {
    if (m.order_index < 0 || m.order_index > 255) {
      throw ConfigError("order_index out of range for container");
    }
  }

  std::vector<uint8_t> buf;
  buf.reserve(container_size(t, h, w));
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u16(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(t));
  put_u32(buf, static_cast<uint32_t>(h));
  put_u32(buf, static_cast<uint32_t>(w));
  buf.push_back(kDtypeF32);
  for (const PatternMeta& m : stack.metas) {
    put_f64(buf, m.theta);
    put_f64(buf, m.phi);
    put_f64(buf, m.k0);
    put_f64(buf, m.m);
    buf.push_back(static_cast<uint8_t>(m.order_index));
  }
  for (const Image2D& frame : stack.frames) {
    for (double p : frame.pixels) put_f32(buf, static_cast<float>(p));
  }

  namespace fs = std::filesystem;
  fs::path dest(path);
  fs::path tmp = dest;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, dest, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed: " + dest.string());
  }
}

SimStack read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw IoError("read failed: " + path);

  ByteReader r(buf.data(), buf.size());
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");
  if (r.u16() != kVersion) throw FormatError("unsupported version");
  const uint32_t t = r.u32();
  const uint32_t h = r.u32();
  const uint32_t w = r.u32();
  if (r.u8() != kDtypeF32) throw FormatError("unsupported dtype");
  if (t == 0 || h == 0 || w == 0) throw FormatError("empty geometry");
  if (buf.size() != container_size(static_cast<int>(t), static_cast<int>(h),
                                   static_cast<int>(w))) {
    throw FormatError("container size mismatch");
  }

  SimStack stack;
  stack.metas.resize(t);
  for (uint32_t i = 0; i < t; ++i) {
    PatternMeta& m = stack.metas[i];
    m.theta = r.f64();
    m.phi = r.f64();
    m.k0 = r.f64();
    m.m = r.f64();
    m.order_index = r.u8();
  }
  stack.frames.reserve(t);
  for (uint32_t i = 0; i < t; ++i) {
    Image2D frame(static_cast<int>(h), static_cast<int>(w));
    for (double& p : frame.pixels) p = r.f32();
    stack.frames.push_back(std::move(frame));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes");
  return stack;
}

}  // namespace vsim

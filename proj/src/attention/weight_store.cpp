#include "vsim/attention/weight_store.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "vsim/errors.hpp"

namespace vsim::attn {

namespace {

void put_u16(std::string& buf, uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>(v >> 8 & 0xff));
}

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>(v >> 8 * i & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> 8 * i & 0xff));
}

void put_f64(std::string& buf, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(buf, bits);
}

struct ByteReader {
  const uint8_t* p;
  size_t left;

  void need(size_t n) const {
    if (left < n) throw FormatError("weight file truncated");
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(p[0] | p[1] << 8);
    p += 2;
    left -= 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << 8 * i;
    p += 4;
    left -= 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << 8 * i;
    p += 8;
    left -= 8;
    return v;
  }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    left -= n;
    return s;
  }
};

}  // namespace

const std::vector<double>* WeightStore::find(const std::string& name) const {
  for (const auto& [n, v] : entries)
    if (n == name) return &v;
  return nullptr;
}

WeightStore export_weights(Network& net) {
  WeightStore store;
  visit_params(net, [&store](const std::string& name, std::vector<double>& v) {
    store.entries.emplace_back(name, v);
  });
  return store;
}

void import_weights(Network& net, const WeightStore& store) {
  visit_params(net, [&store](const std::string& name, std::vector<double>& v) {
    const std::vector<double>* src = store.find(name);
    if (!src) throw FormatError("weight store is missing " + name);
    if (src->size() != v.size())
      throw FormatError("weight store size mismatch for " + name);
    v = *src;
  });
}

void save_weights(const WeightStore& store, const std::string& path) {
  std::string buf;
  buf.append("VSWT");
  put_u16(buf, 1);
  put_u32(buf, static_cast<uint32_t>(store.entries.size()));
  for (const auto& [name, values] : store.entries) {
    if (name.size() > 0xffff) throw ConfigError("weight name too long");
    put_u16(buf, static_cast<uint16_t>(name.size()));
    buf.append(name);
    put_u64(buf, values.size());
    for (double v : values) put_f64(buf, v);
  }

  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

WeightStore load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());

  ByteReader r{reinterpret_cast<const uint8_t*>(buf.data()), buf.size()};
  if (r.bytes(4) != "VSWT") throw FormatError("not a weight file: " + path);
  if (r.u16() != 1) throw FormatError("unsupported weight file version");
  const uint32_t count = r.u32();

  WeightStore store;
  store.entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.u16();
    std::string name = r.bytes(name_len);
    const uint64_t n = r.u64();
    r.need(n * 8);
    std::vector<double> values(n);
    for (uint64_t j = 0; j < n; ++j) values[j] = r.f64();
    store.entries.emplace_back(std::move(name), std::move(values));
  }
  if (r.left != 0) throw FormatError("trailing bytes in weight file");
  return store;
}

}  // namespace vsim::attn

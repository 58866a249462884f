#include "phaser/model_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace phaser {

namespace {

constexpr char kMagic[4] = {'P', 'H', 'S', 'W'};
constexpr std::uint16_t kVersion = 1;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& buf, std::size_t& pos, int bytes, const std::string& path) {
  if (pos + static_cast<std::size_t>(bytes) > buf.size())
    throw DataError(path + ": truncated tensor file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += static_cast<std::size_t>(bytes);
  return v;
}

}  // namespace

void write_phsw(const std::vector<NamedTensorF>& tensors, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_le(out, kVersion, 2);
  put_le(out, tensors.size(), 4);
  for (const auto& t : tensors) {
    put_le(out, t.name.size(), 4);
    out.append(t.name);
    put_le(out, t.shape.size(), 1);
    std::size_t numel = 1;
    for (int d : t.shape) {
      put_le(out, static_cast<std::uint64_t>(d), 4);
      numel *= static_cast<std::size_t>(d);
    }
    if (numel != t.data.size())
      throw DataError("write_phsw: tensor '" + t.name + "' shape/data mismatch");
    for (float f : t.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_le(out, bits, 4);
    }
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError(path + ": cannot open for writing");
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw DataError(path + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<NamedTensorF> read_phsw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw DataError(path + ": bad magic");
  std::size_t pos = 4;
  const auto version = static_cast<std::uint16_t>(get_le(buf, pos, 2, path));
  if (version != kVersion)
    throw DataError(path + ": unsupported version " + std::to_string(version));
  const auto count = static_cast<std::uint32_t>(get_le(buf, pos, 4, path));
  std::vector<NamedTensorF> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensorF t;
    const auto name_len = static_cast<std::uint32_t>(get_le(buf, pos, 4, path));
    if (pos + name_len > buf.size()) throw DataError(path + ": truncated tensor file");
    t.name.assign(buf.data() + pos, name_len);
    pos += name_len;
    const auto rank = static_cast<int>(get_le(buf, pos, 1, path));
    std::size_t numel = 1;
    for (int d = 0; d < rank; ++d) {
      t.shape.push_back(static_cast<int>(get_le(buf, pos, 4, path)));
      numel *= static_cast<std::size_t>(t.shape.back());
    }
    t.data.resize(numel);
    for (std::size_t k = 0; k < numel; ++k) {
      const auto bits = static_cast<std::uint32_t>(get_le(buf, pos, 4, path));
      std::memcpy(&t.data[k], &bits, 4);
    }
    tensors.push_back(std::move(t));
  }
  if (pos != buf.size()) throw DataError(path + ": trailing bytes");
  return tensors;
}

}  // namespace phaser

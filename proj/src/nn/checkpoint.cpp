#include "fsdt/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace fsdt::nn {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'D', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  // little-endian host assumed; raw layout is the wire format
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;

  template <class T>
  T get() {
    if (pos + sizeof(T) > b.size())
      throw CheckpointError("checkpoint truncated");
    T v;
    std::memcpy(&v, b.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }

  void bytes(void* dst, std::size_t n) {
    if (pos + n > b.size()) throw CheckpointError("checkpoint truncated");
    std::memcpy(dst, b.data() + pos, n);
    pos += n;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const NamedTensorRefs& entries) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    put(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put(out, static_cast<std::uint8_t>(t->shape.size()));
    for (int d : t->shape) put(out, static_cast<std::uint32_t>(d));
    const auto* p = reinterpret_cast<const std::uint8_t*>(t->data());
    out.insert(out.end(), p, p + t->size() * sizeof(float));
  }
  return out;
}

NamedTensors parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError("bad checkpoint magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version");
  const auto count = r.get<std::uint32_t>();
  NamedTensors out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>();
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    const auto rank = r.get<std::uint8_t>();
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(r.get<std::uint32_t>());
    Tensor<float> t(shape);
    r.bytes(t.data(), t.size() * sizeof(float));
    out.emplace_back(std::move(name), std::move(t));
  }
  if (r.pos != bytes.size()) throw CheckpointError("trailing bytes in checkpoint");
  return out;
}

std::vector<std::uint8_t> save_checkpoint(const ParamSet<float>& ps) {
  NamedTensorRefs refs;
  refs.reserve(ps.entry_count());
  for (const auto& e : ps.entries()) refs.emplace_back(e->name, &e->value);
  return serialize_checkpoint(refs);
}

ParamSet<float> load_checkpoint(const std::vector<std::uint8_t>& bytes) {
  ParamSet<float> ps;
  for (auto& [name, t] : parse_checkpoint(bytes)) ps.add(name, std::move(t));
  return ps;
}

void load_values_into(ParamSet<float>& ps,
                      const std::vector<std::uint8_t>& bytes,
                      const std::string& prefix) {
  std::size_t matched = 0;
  for (auto& [name, t] : parse_checkpoint(bytes)) {
    if (name.rfind(prefix, 0) != 0) continue;
    auto* e = ps.find(name.substr(prefix.size()));
    if (!e) throw CheckpointError("unknown checkpoint entry: " + name);
    if (e->value.shape != t.shape)
      throw CheckpointError("shape mismatch for: " + name);
    e->value.v = std::move(t.v);
    ++matched;
  }
  if (matched != ps.entry_count())
    throw CheckpointError("checkpoint does not cover all parameters");
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw CheckpointError("cannot open: " + path);
  const auto size = f.tellg();
  f.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) throw CheckpointError("read failed: " + path);
  return bytes;
}

}  // namespace fsdt::nn

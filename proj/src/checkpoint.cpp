#include "cwrs/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cwrs/errors.hpp"

namespace cwrs {

namespace {

constexpr char kMagic[8] = {'C', 'W', 'R', 'S', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts need byte swaps");

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw CheckpointError("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& manifest) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoFailure("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kVersion);
  write_u32(os, static_cast<uint32_t>(params.raw().size()));
  for (const auto& [name, p] : params.raw()) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<uint32_t>(p.value.rank()));
    for (int d : p.value.shape()) write_u32(os, static_cast<uint32_t>(d));
    os.write(reinterpret_cast<const char*>(p.value.data()),
             static_cast<std::streamsize>(p.value.numel() * sizeof(double)));
  }
  if (!os) throw IoFailure("failed writing checkpoint: " + path);
  os.close();

  std::ofstream ms(path + ".manifest", std::ios::trunc);
  if (!ms) throw IoFailure("cannot open manifest for writing: " + path + ".manifest");
  for (const auto& [k, v] : manifest) ms << k << "=" << v << "\n";
  if (!ms) throw IoFailure("failed writing manifest");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("bad checkpoint magic in " + path);
  uint32_t version = read_u32(is);
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  uint32_t count = read_u32(is);
  LoadedCheckpoint out;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t rank = read_u32(is);
    std::vector<int> shape;
    size_t numel = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      uint32_t dim = read_u32(is);
      shape.push_back(static_cast<int>(dim));
      numel *= dim;
    }
    std::vector<double> data(numel);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!is) throw CheckpointError("truncated checkpoint tensor " + name);
    out.tensors.emplace(name, Tensor(std::move(shape), std::move(data)));
  }

  std::ifstream ms(path + ".manifest");
  if (ms) {
    std::string line;
    while (std::getline(ms, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      out.manifest[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  return out;
}

void restore_params(ParamStore& params, const std::map<std::string, Tensor>& tensors) {
  for (const auto& [name, t] : tensors) {
    Param* p = params.find(name);
    if (!p) throw CheckpointError("checkpoint tensor has no matching param: " + name);
    if (p->value.shape() != t.shape())
      throw CheckpointError("shape mismatch restoring " + name);
    p->value = t;
  }
}

}  // namespace cwrs

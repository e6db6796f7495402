#include "pacrf/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pacrf/errors.hpp"

namespace pacrf {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'C', 'R', 'F', 'C', 'K', 'P'};

template <class T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& in, const std::string& what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw CheckpointError("corrupt checkpoint: truncated " + what);
  }
  return value;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const std::string& what) {
  const auto len = read_pod<std::uint32_t>(in, what + " length");
  if (len > (1u << 26)) {
    throw CheckpointError("corrupt checkpoint: implausible " + what +
                          " length");
  }
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) {
    throw CheckpointError("corrupt checkpoint: truncated " + what);
  }
  return s;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_checkpoint(const std::string& path, const CheckpointData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CheckpointError("cannot write checkpoint: " + path);
  }
  out.write(kMagic, 8);
  write_pod<std::uint32_t>(out, data.version);
  write_pod<std::uint64_t>(out, fnv1a(data.config_json));
  write_string(out, data.config_json);
  write_string(out, data.rng_state);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(data.tensors.size()));
  for (const auto& [name, tensor] : data.tensors) {
    write_string(out, name);
    write_pod<std::uint64_t>(out, tensor.rows());
    write_pod<std::uint64_t>(out, tensor.cols());
    out.write(reinterpret_cast<const char*>(tensor.data().data()),
              static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!out) {
    throw CheckpointError("write failed: " + path);
  }
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open checkpoint: " + path);
  }
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0) {
    throw CheckpointError("corrupt checkpoint: bad magic in " + path);
  }
  CheckpointData data;
  data.version = read_pod<std::uint32_t>(in, "version");
  if (data.version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " +
                          std::to_string(data.version) + " unsupported (" +
                          "expected " + std::to_string(kCheckpointVersion) +
                          ")");
  }
  const auto digest = read_pod<std::uint64_t>(in, "digest");
  data.config_json = read_string(in, "config");
  if (digest != fnv1a(data.config_json)) {
    throw CheckpointError("corrupt checkpoint: config digest mismatch");
  }
  data.rng_state = read_string(in, "rng state");
  const auto count = read_pod<std::uint32_t>(in, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(in, "tensor name");
    const auto rows = read_pod<std::uint64_t>(in, "tensor rows");
    const auto cols = read_pod<std::uint64_t>(in, "tensor cols");
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24)) {
      throw CheckpointError("corrupt checkpoint: implausible tensor shape");
    }
    Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) {
      throw CheckpointError("corrupt checkpoint: truncated tensor " + name);
    }
    data.tensors.emplace(name, std::move(t));
  }
  return data;
}

}  // namespace pacrf

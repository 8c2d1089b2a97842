#include "textclf/widemlp.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace textclf {

namespace {

constexpr char kMagic[8] = {'W', 'M', 'L', 'P', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const MLPParams<float>& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, 1);  // format version
  write_u32(out, static_cast<std::uint32_t>(p.input_dim));
  write_u32(out, static_cast<std::uint32_t>(p.hidden_dim));
  write_u32(out, static_cast<std::uint32_t>(p.n_classes));
  write_u32(out, static_cast<std::uint32_t>(p.depth));
  write_u32(out, static_cast<std::uint32_t>(p.mode));
  for (const auto& l : p.layers) {
    out.write(reinterpret_cast<const char*>(l.weight.data()),
              static_cast<std::streamsize>(l.weight.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(l.bias.data()),
              static_cast<std::streamsize>(l.bias.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

MLPParams<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != 1)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const std::size_t input_dim = read_u32(in);
  const std::size_t hidden_dim = read_u32(in);
  const std::size_t n_classes = read_u32(in);
  const std::size_t depth = read_u32(in);
  const auto mode = static_cast<InputMode>(read_u32(in));
  MLPParams<float> p = init_params<float>(input_dim, hidden_dim, n_classes, depth, 0, mode);
  for (auto& l : p.layers) {
    in.read(reinterpret_cast<char*>(l.weight.data()),
            static_cast<std::streamsize>(l.weight.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(l.bias.data()),
            static_cast<std::streamsize>(l.bias.size() * sizeof(float)));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return p;
}

}  // namespace textclf

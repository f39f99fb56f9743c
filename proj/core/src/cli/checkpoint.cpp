#include "soco/cli/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "soco/error.hpp"
#include "soco/io.hpp"

namespace soco::cli {
namespace {

constexpr const char* kLayerNames[6] = {"l0.weight", "l0.bias", "l1.weight",
                                        "l1.bias",   "l2.weight", "l2.bias"};

std::size_t checked_product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / 8 / d) {
      throw FormatError("checkpoint: tensor too large");
    }
    n *= d;
  }
  return n;
}

}  // namespace

bool Checkpoint::contains(const std::string& name) const {
  return std::any_of(tensors.begin(), tensors.end(),
                     [&](const NamedTensor& t) { return t.name == name; });
}

const numerics::Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw FormatError("checkpoint: missing tensor '" + name + "'");
}

void Checkpoint::add(std::string name, numerics::Tensor tensor) {
  if (contains(name)) throw FormatError("checkpoint: duplicate tensor '" + name + "'");
  tensors.push_back({std::move(name), std::move(tensor)});
}

void Checkpoint::add_net(const std::string& prefix, const numerics::Mlp& net) {
  for (std::size_t k = 0; k < 6; ++k) add(prefix + "." + kLayerNames[k], net.params()[k]);
}

void Checkpoint::load_net(const std::string& prefix, numerics::Mlp& net) const {
  auto& params = net.params();
  for (std::size_t k = 0; k < 6; ++k) {
    const auto& stored = get(prefix + "." + kLayerNames[k]);
    if (stored.shape() != params[k].shape()) {
      throw ShapeError("checkpoint: shape mismatch for '" + prefix + "." + kLayerNames[k] + "'");
    }
  }
  for (std::size_t k = 0; k < 6; ++k) params[k] = get(prefix + "." + kLayerNames[k]);
}

numerics::Mlp Checkpoint::read_net(const std::string& prefix, numerics::OutputHead head) const {
  const auto& w1 = get(prefix + ".l0.weight");
  const auto& w3 = get(prefix + ".l2.weight");
  if (w1.shape().size() != 2 || w3.shape().size() != 2) {
    throw FormatError("checkpoint: '" + prefix + "' weights are not matrices");
  }
  auto net = numerics::Mlp::zeros({w1.rows(), w1.cols(), w3.cols()}, head);
  load_net(prefix, net);
  return net;
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt) {
  std::size_t header = 8 + 4 + 4;
  for (const auto& t : ckpt.tensors) header += 4 + t.name.size() + 4 + 8 * t.tensor.shape().size() + 8;

  io::ByteWriter w;
  w.bytes(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(kCheckpointMagic), 8));
  w.uint<std::uint32_t>(kCheckpointVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  std::size_t offset = header;
  for (const auto& t : ckpt.tensors) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.text(t.name);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t.tensor.shape().size()));
    for (auto d : t.tensor.shape()) w.uint<std::uint64_t>(d);
    w.uint<std::uint64_t>(offset);
    offset += 8 * t.tensor.size();
  }
  for (const auto& t : ckpt.tensors) {
    for (double v : t.tensor.data()) w.f64(v);
  }
  const std::string trailer = ckpt.trailer.dump();
  w.uint<std::uint64_t>(trailer.size());
  w.text(trailer);
  return w.buffer();
}

Checkpoint decode_checkpoint(std::span<const unsigned char> bytes) {
  io::ByteReader r(bytes);
  const auto magic = r.bytes(8);
  if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const unsigned char*>(kCheckpointMagic))) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = r.uint<std::uint32_t>();

  struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
    std::uint64_t offset;
  };
  std::vector<Entry> dir;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    const auto len = r.uint<std::uint32_t>();
    e.name = r.text(len);
    const auto rank = r.uint<std::uint32_t>();
    if (rank > 8) throw FormatError("checkpoint: implausible rank for '" + e.name + "'");
    for (std::uint32_t k = 0; k < rank; ++k) e.shape.push_back(static_cast<std::size_t>(r.uint<std::uint64_t>()));
    e.offset = r.uint<std::uint64_t>();
    dir.push_back(std::move(e));
  }

  Checkpoint ckpt;
  std::uint64_t expected = r.position();
  for (const auto& e : dir) {
    if (e.offset != expected) throw FormatError("checkpoint: bad data offset for '" + e.name + "'");
    const std::size_t n = checked_product(e.shape);
    if (r.remaining() < 8 * n) throw FormatError("checkpoint: unexpected end of file");
    std::vector<double> values(n);
    for (auto& v : values) v = r.f64();
    ckpt.add(e.name, numerics::Tensor(e.shape, std::move(values)));
    expected += 8 * n;
  }
  const auto trailer_len = r.uint<std::uint64_t>();
  if (r.remaining() != trailer_len) {
    throw FormatError(r.remaining() < trailer_len ? "checkpoint: unexpected end of file"
                                                  : "checkpoint: trailing bytes");
  }
  const auto trailer = r.text(static_cast<std::size_t>(trailer_len));
  try {
    ckpt.trailer = nlohmann::json::parse(trailer);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("checkpoint: bad trailer: ") + ex.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace soco::cli

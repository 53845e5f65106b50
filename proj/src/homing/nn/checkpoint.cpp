#include "homing/nn/checkpoint.hpp"

#include "homing/common/error.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace homing::nn {

namespace {

constexpr char kMagic[8] = {'H', 'M', 'G', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ofstream& os) : os_(os) {}
  template <typename T>
  void put(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_bytes(const std::string& s) {
    put<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ofstream& os_;
};

class Reader {
 public:
  Reader(std::ifstream& is, const std::string& path) : is_(is), path_(path) {}
  template <typename T>
  T get() {
    T v;
    if (!is_.read(reinterpret_cast<char*>(&v), sizeof(T))) fail("truncated file");
    return v;
  }
  std::string get_bytes() {
    const auto n = get<std::uint64_t>();
    if (n > (1u << 26)) fail("implausible string length");
    std::string s(n, '\0');
    if (n && !is_.read(s.data(), static_cast<std::streamsize>(n))) fail("truncated file");
    return s;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kConfig, "checkpoint " + path_ + ": " + what);
  }

 private:
  std::ifstream& is_;
  std::string path_;
};

void write_net(Writer& w, const RecurrentNet& net) {
  const NetworkShape& s = net.shape();
  for (int v : {s.obs_dim, s.h1, s.h2, s.h3, s.out_dim}) w.put<std::uint32_t>(v);
  for (int i = 0; i < s.obs_dim; ++i) w.put<double>(net.input_scale()[i]);
  for (int i = 0; i < s.obs_dim; ++i) w.put<double>(net.input_offset()[i]);
  w.put<std::uint64_t>(net.num_params());
  for (double p : net.params()) w.put<double>(p);
}

RecurrentNet read_net(Reader& r) {
  NetworkShape s;
  s.obs_dim = static_cast<int>(r.get<std::uint32_t>());
  s.h1 = static_cast<int>(r.get<std::uint32_t>());
  s.h2 = static_cast<int>(r.get<std::uint32_t>());
  s.h3 = static_cast<int>(r.get<std::uint32_t>());
  s.out_dim = static_cast<int>(r.get<std::uint32_t>());
  for (int v : {s.obs_dim, s.h1, s.h2, s.h3, s.out_dim})
    if (v <= 0 || v > 4096) r.fail("bad layer size");
  RecurrentNet net(s);
  for (int i = 0; i < s.obs_dim; ++i) net.input_scale()[i] = r.get<double>();
  for (int i = 0; i < s.obs_dim; ++i) net.input_offset()[i] = r.get<double>();
  const auto n = r.get<std::uint64_t>();
  if (n != net.num_params()) r.fail("parameter count does not match layer sizes");
  for (double& p : net.params()) p = r.get<double>();
  return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot open checkpoint for writing: " + path);
  Writer w(os);
  os.write(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(2);
  write_net(w, ckpt.policy);
  write_net(w, ckpt.value);
  w.put_bytes(ckpt.rng_state);
  w.put<double>(ckpt.clip_eps);
  w.put<std::uint64_t>(ckpt.batches_done);
  w.put_bytes(ckpt.metadata);
  if (!os) throw Error(ErrorCode::kIo, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open checkpoint: " + path);
  Reader r(is, path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    r.fail("not a checkpoint (bad magic)");
  if (r.get<std::uint32_t>() != kVersion) r.fail("unsupported version");
  if (r.get<std::uint32_t>() != 2) r.fail("expected two networks");
  Checkpoint ck{read_net(r), read_net(r), {}, 0.2, 0, {}};
  ck.rng_state = r.get_bytes();
  ck.clip_eps = r.get<double>();
  ck.batches_done = r.get<std::uint64_t>();
  ck.metadata = r.get_bytes();
  return ck;
}

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& state) {
  Rng rng;
  std::istringstream is(state);
  is >> rng;
  if (!is) throw Error(ErrorCode::kConfig, "malformed RNG state");
  return rng;
}

}  // namespace homing::nn

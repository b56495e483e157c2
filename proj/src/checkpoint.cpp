#include "seatwin/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace seatwin {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'W', 'N', 'C', 'K', 'P', '1'};

class Writer {
 public:
  explicit Writer(const std::string& path) {
    f_ = std::fopen(path.c_str(), "wb");
    if (f_ == nullptr)
      throw std::runtime_error("cannot open checkpoint for writing: " + path);
  }
  ~Writer() {
    if (f_ != nullptr) std::fclose(f_);
  }
  void bytes(const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f_) != n)
      throw std::runtime_error("checkpoint: short write");
  }
  template <typename T>
  void pod(const T& v) {
    bytes(&v, sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void doubles(const std::vector<double>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    bytes(v.data(), v.size() * sizeof(double));
  }

 private:
  std::FILE* f_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) {
    f_ = std::fopen(path.c_str(), "rb");
    if (f_ == nullptr)
      throw std::runtime_error("cannot open checkpoint: " + path);
  }
  ~Reader() {
    if (f_ != nullptr) std::fclose(f_);
  }
  void bytes(void* p, std::size_t n) {
    if (std::fread(p, 1, n, f_) != n)
      throw std::runtime_error("checkpoint: truncated file");
  }
  template <typename T>
  T pod() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1ull << 24)) throw std::runtime_error("checkpoint: bad string size");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    if (n > (1ull << 32)) throw std::runtime_error("checkpoint: bad array size");
    std::vector<double> v(n);
    bytes(v.data(), n * sizeof(double));
    return v;
  }

 private:
  std::FILE* f_;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.pod(Checkpoint::kVersion);

  const auto& pc = c.policy_config;
  w.pod(static_cast<std::uint64_t>(pc.hidden.size()));
  for (int h : pc.hidden) w.pod(static_cast<std::int32_t>(h));
  for (double s : pc.obs_scale) w.pod(s);
  w.pod(pc.log_std_init);
  w.pod(pc.log_std_min);
  w.pod(pc.log_std_max);
  w.pod(pc.hidden_gain);
  w.pod(pc.output_gain);

  w.doubles(c.params);
  w.doubles(c.opt.m);
  w.doubles(c.opt.v);
  w.pod(c.opt.step_count);
  w.pod(c.opt.current_lr);
  w.pod(c.opt.skipped_steps);

  w.pod(c.episode_counter);
  w.pod(c.policy_version);
  w.pod(c.encoder_offset_rad);
  w.str(c.rng_action);
  w.str(c.rng_traj);
  w.str(c.rng_update);
  w.str(c.rng_stack);
  w.pod(c.seed);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = r.pod<std::uint32_t>();
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version) + " in " + path);

  Checkpoint c;
  auto& pc = c.policy_config;
  const auto nh = r.pod<std::uint64_t>();
  if (nh == 0 || nh > 16) throw std::runtime_error("checkpoint: bad hidden count");
  pc.hidden.clear();
  for (std::uint64_t i = 0; i < nh; ++i) pc.hidden.push_back(r.pod<std::int32_t>());
  for (double& s : pc.obs_scale) s = r.pod<double>();
  pc.log_std_init = r.pod<double>();
  pc.log_std_min = r.pod<double>();
  pc.log_std_max = r.pod<double>();
  pc.hidden_gain = r.pod<double>();
  pc.output_gain = r.pod<double>();

  c.params = r.doubles();
  c.opt.m = r.doubles();
  c.opt.v = r.doubles();
  c.opt.step_count = r.pod<std::int64_t>();
  c.opt.current_lr = r.pod<double>();
  c.opt.skipped_steps = r.pod<std::uint64_t>();

  c.episode_counter = r.pod<std::int64_t>();
  c.policy_version = r.pod<std::uint64_t>();
  c.encoder_offset_rad = r.pod<double>();
  c.rng_action = r.str();
  c.rng_traj = r.str();
  c.rng_update = r.str();
  c.rng_stack = r.str();
  c.seed = r.pod<std::uint64_t>();
  return c;
}

}  // namespace seatwin

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace seatwin {

// Deterministic random source. All draws are built from raw mt19937_64
// output instead of std:: distributions, whose algorithms are
// implementation-defined; this keeps runs reproducible across standard
// libraries for the same seed.
class Rng {
 public:
  Rng() : engine_(0x9e3779b97f4a7c15ull) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent stream from a master seed and a stream tag
  // (splitmix64 over seed^tag), so subsystems consume separate streams.
  static Rng stream(std::uint64_t master_seed, std::uint64_t tag) {
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Marsaglia polar rejection (one spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    os.precision(17);
    os << spare_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    int flag = 0;
    is >> engine_ >> flag >> spare_;
    has_spare_ = (flag != 0);
  }

  bool operator==(const Rng& o) const {
    return engine_ == o.engine_ && has_spare_ == o.has_spare_ &&
           (!has_spare_ || spare_ == o.spare_);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace seatwin

#include "seatwin/trajectory.hpp"

#include <cstdio>
#include <vector>

namespace seatwin {

namespace {

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stod(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::string to_string(const TrajectorySpec& spec) {
  char buf[96];
  if (spec.kind == TrajectorySpec::Kind::kSinusoid)
    std::snprintf(buf, sizeof(buf), "sine:%g,%g", spec.freq_hz, spec.amplitude_n);
  else
    std::snprintf(buf, sizeof(buf), "chirp:%g,%g,%g,%g", spec.f0_hz, spec.f1_hz,
                  spec.duration_s, spec.amplitude_n);
  return buf;
}

TrajectorySpec parse_trajectory(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("trajectory: expected '<kind>:<params>', got '" +
                                text + "'");
  const std::string kind = text.substr(0, colon);
  const auto vals = parse_csv_doubles(text.substr(colon + 1));
  if (kind == "sine") {
    if (vals.size() != 2)
      throw std::invalid_argument("trajectory: sine wants 'sine:<freq>,<amp>'");
    return TrajectorySpec::sinusoid(vals[1], vals[0]);
  }
  if (kind == "chirp") {
    if (vals.size() != 4)
      throw std::invalid_argument(
          "trajectory: chirp wants 'chirp:<f0>,<f1>,<T>,<amp>'");
    return TrajectorySpec::chirp(vals[3], vals[0], vals[1], vals[2]);
  }
  throw std::invalid_argument("trajectory: unknown kind '" + kind + "'");
}

}  // namespace seatwin

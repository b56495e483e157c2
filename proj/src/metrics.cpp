#include "seatwin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace seatwin {

double mae(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("mae: empty sequence");
  double acc = 0.0;
  for (double e : errors) acc += std::abs(e);
  return acc / static_cast<double>(errors.size());
}

double overshoot_pct(std::span<const double> f_trace, double amplitude_n) {
  if (f_trace.empty()) throw std::invalid_argument("overshoot_pct: empty trace");
  if (!(amplitude_n > 0.0))
    throw std::invalid_argument("overshoot_pct: amplitude must be > 0");
  double peak = 0.0;
  for (double f : f_trace) peak = std::max(peak, std::abs(f));
  return (peak - amplitude_n) / amplitude_n * 100.0;
}

EvalReport evaluate_log(const EpisodeLog& log, const TrajectorySpec& spec) {
  EvalReport rep;
  rep.stable = !log.estop_truncated;

  const int nbins =
      static_cast<int>(std::round((kBinHiHz - kBinLoHz) / kBinWidthHz));
  rep.bins.resize(nbins);
  std::vector<double> sums(nbins, 0.0);
  for (int b = 0; b < nbins; ++b) {
    rep.bins[b].lo_hz = kBinLoHz + b * kBinWidthHz;
    rep.bins[b].hi_hz = kBinLoHz + (b + 1) * kBinWidthHz;
  }

  std::vector<double> errors, trace;
  errors.reserve(log.steps.size());
  trace.reserve(log.steps.size());
  for (const auto& s : log.steps) {
    errors.push_back(s.f_des - s.f);
    trace.push_back(s.f);
    const double f_inst = instantaneous_freq(spec, s.t);
    if (f_inst >= kBinLoHz && f_inst <= kBinHiHz) {
      int b = static_cast<int>((f_inst - kBinLoHz) / kBinWidthHz);
      b = std::clamp(b, 0, nbins - 1);  // top edge lands in the last bin
      sums[b] += std::abs(s.f_des - s.f);
      ++rep.bins[b].count;
    }
  }
  for (int b = 0; b < nbins; ++b)
    rep.bins[b].mae_n = rep.bins[b].count > 0
                            ? sums[b] / static_cast<double>(rep.bins[b].count)
                            : 0.0;

  rep.mae_n = errors.empty() ? 0.0 : mae(errors);
  rep.max_overshoot_pct =
      trace.empty() ? 0.0 : overshoot_pct(trace, spec.amplitude_n);
  rep.peak_force_n = log.peak_abs_force_n;
  return rep;
}

std::string eval_report_json(const EvalReport& rep) {
  std::string out = "{\n";
  char buf[256];
  auto add = [&](const char* key, double v, bool comma = true) {
    std::snprintf(buf, sizeof(buf), "  \"%s\": %.17g%s\n", key, v,
                  comma ? "," : "");
    out += buf;
  };
  add("mae_n", rep.mae_n);
  add("max_overshoot_pct", rep.max_overshoot_pct);
  add("peak_force_n", rep.peak_force_n);
  out += rep.stable ? "  \"stable\": true,\n" : "  \"stable\": false,\n";
  out += "  \"bins\": [\n";
  for (std::size_t b = 0; b < rep.bins.size(); ++b) {
    std::snprintf(buf, sizeof(buf),
                  "    {\"lo_hz\": %g, \"hi_hz\": %g, \"mae_n\": %.17g, "
                  "\"count\": %zu}%s\n",
                  rep.bins[b].lo_hz, rep.bins[b].hi_hz, rep.bins[b].mae_n,
                  rep.bins[b].count, b + 1 < rep.bins.size() ? "," : "");
    out += buf;
  }
  out += "  ],\n  \"episode_refs\": [";
  for (std::size_t i = 0; i < rep.episode_refs.size(); ++i) {
    out += "\"" + rep.episode_refs[i] + "\"";
    if (i + 1 < rep.episode_refs.size()) out += ", ";
  }
  out += "]\n}\n";
  return out;
}

}  // namespace seatwin

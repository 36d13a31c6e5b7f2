#ifndef APPTSCHED_SCHEDULER_HPP
#define APPTSCHED_SCHEDULER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "apptsched/and_protocol.hpp"
#include "apptsched/errors.hpp"
#include "apptsched/rng.hpp"

namespace apptsched {

/// Availability indicator over n dates (index 0-based).
struct Calendar {
  std::vector<bool> bits;

  Calendar() = default;
  explicit Calendar(std::vector<bool> b) : bits(std::move(b)) {}
  Calendar(std::size_t n, bool fill) : bits(n, fill) {}

  std::size_t size() const { return bits.size(); }
  bool operator[](std::size_t i) const { return bits[i]; }
};

struct ProtocolParams {
  std::size_t n = 0;       // calendar size
  std::size_t s = 0;       // subsample draw count (0 allowed)
  AndParams and_params;
  bool early_stop = false;  // stop at the first intersecting date (changes
                            // message statistics; off by default)

  void validate() const {
    if (n < 1) throw ParameterError("ProtocolParams: n must be >= 1");
    and_params.validate();
  }
};

struct SchedulerOutput {
  std::optional<std::size_t> date;  // empty means no intersection reported
  ExecStats stats;
};

/// s i.i.d. uniform draws from [0, n) using the parties' shared randomness.
inline std::vector<std::size_t> subsample(std::size_t n, std::size_t s,
                                          RandomStream& shared_rng) {
  if (n < 1) throw ParameterError("subsample: n must be >= 1");
  std::vector<std::size_t> draws(s);
  for (std::size_t i = 0; i < s; ++i)
    draws[i] = shared_rng.uniform_index(n);
  return draws;
}

/// Full scheduling protocol: subsample s dates with replacement, exchange
/// availability over the sample, and if that finds no intersection run the
/// quantum AND on every date outside the sampled support. A returned date is
/// always a true intersection.
inline SchedulerOutput run_pi_d(const Calendar& x, const Calendar& y,
                                const ProtocolParams& p,
                                const ChannelModel& ch,
                                RandomStream& shared_rng, RandomStream& rng) {
  if (x.size() != y.size())
    throw DimensionError("run_pi_d: calendars differ in length");
  if (x.size() != p.n)
    throw DimensionError("run_pi_d: params.n does not match calendar length");
  p.validate();
  ch.validate();

  SchedulerOutput out;
  const std::vector<std::size_t> draws = subsample(p.n, p.s, shared_rng);
  out.stats.classical_bits += static_cast<double>(p.s);  // Alice's x_i per draw

  std::optional<std::size_t> sampled_hit;
  for (std::size_t d : draws) {
    if (x[d] && y[d] && (!sampled_hit || d < *sampled_hit)) sampled_hit = d;
  }
  if (sampled_hit) {
    // Bob announces the smallest intersecting sampled date.
    out.stats.classical_bits += std::log2(static_cast<double>(p.s)) + 1.0;
    out.date = sampled_hit;
    return out;
  }

  std::vector<bool> sampled(p.n, false);
  for (std::size_t d : draws) sampled[d] = true;

  std::optional<std::size_t> best;
  for (std::size_t d = 0; d < p.n; ++d) {
    if (sampled[d]) continue;
    RandomStream date_rng = rng.derive(d);
    const int v = run_and(x[d] ? 1 : 0, y[d] ? 1 : 0, p.and_params, ch,
                          date_rng, out.stats);
    if (v == 1 && !best) {
      best = d;
      if (p.early_stop) break;
    }
  }
  out.date = best;
  return out;
}

}  // namespace apptsched

#endif

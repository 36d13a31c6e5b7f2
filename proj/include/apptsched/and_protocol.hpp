#ifndef APPTSCHED_AND_PROTOCOL_HPP
#define APPTSCHED_AND_PROTOCOL_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "apptsched/errors.hpp"
#include "apptsched/optics.hpp"
#include "apptsched/rng.hpp"

namespace apptsched {

enum class AndVariant { Main, Jrs };

/// Parameters of a single-date AND execution.
struct AndParams {
  int r = 1;                        // round count
  double alpha_out = 1.0;           // target detected amplitude
  AndVariant variant = AndVariant::Main;
  int max_reruns = 10000;
  // Use a constant re-injection amplitude even when eta < 1 (the lossless
  // protocol allows it; with loss it degrades the detected amplitude).
  bool constant_alpha = false;

  void validate() const {
    if (r < 1) throw ParameterError("AndParams: r must be >= 1");
    if (!(alpha_out > 0.0))
      throw ParameterError("AndParams: alpha_out must be positive");
    if (max_reruns < 1)
      throw ParameterError("AndParams: max_reruns must be >= 1");
  }
};

enum class AndValue { Zero, One, Inconclusive };

struct AndOutcome {
  AndValue value = AndValue::Inconclusive;
  ClickPattern click_pattern;
  int transcript_len = 0;  // messages exchanged (2r quantum + 1 classical)
};

/// Execution statistics accumulated by the wrappers and the scheduler.
struct ExecStats {
  std::int64_t reruns = 0;
  std::int64_t messages = 0;
  std::int64_t detector_events = 0;
  double classical_bits = 0.0;

  ExecStats& operator+=(const ExecStats& o) {
    reruns += o.reruns;
    messages += o.messages;
    detector_events += o.detector_events;
    classical_bits += o.classical_bits;
    return *this;
  }
};

/// Re-injection amplitudes compensating channel loss: alpha_0 = alpha_out /
/// eta^r and alpha_i = alpha_out / eta^{r-i+1/2} for i = 1..r, so every
/// injected copy arrives at the detector with magnitude alpha_out.
inline std::vector<double> amplitude_schedule(double alpha_out, double eta,
                                              int r) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw ParameterError("amplitude_schedule: eta must lie in (0, 1]");
  if (r < 1) throw ParameterError("amplitude_schedule: r must be >= 1");
  if (!(alpha_out > 0.0))
    throw ParameterError("amplitude_schedule: alpha_out must be positive");
  std::vector<double> a(static_cast<std::size_t>(r) + 1);
  a[0] = alpha_out / std::pow(eta, r);
  for (int i = 1; i <= r; ++i)
    a[static_cast<std::size_t>(i)] = alpha_out / std::pow(eta, r - i + 0.5);
  return a;
}

namespace detail {

inline AndValue classify_clicks(const ClickPattern& cp) {
  const bool c0 = cp.clicks[0];
  const bool c1 = cp.clicks[1];
  if (c0 && !c1) return AndValue::Zero;
  if (c1 && !c0) return AndValue::One;
  return AndValue::Inconclusive;
}

}  // namespace detail

/// One execution of the r-round beamsplitter AND. Alice rotates by
/// theta_r = pi/2r iff a = 1; Bob replaces the travelling state with a fresh
/// copy iff b = 0; after r rounds Alice threshold-detects both modes.
/// First-mode-only click reads Zero, second-mode-only reads One, anything
/// else is Inconclusive.
inline AndOutcome run_and_tilde(int a, int b, const AndParams& p,
                                const ChannelModel& ch, RandomStream& rng) {
  if ((a != 0 && a != 1) || (b != 0 && b != 1))
    throw ParameterError("run_and_tilde: inputs must be bits");
  p.validate();
  ch.validate();
  const double theta = M_PI / (2.0 * p.r);
  std::vector<double> sched;
  if (p.constant_alpha) {
    sched.assign(static_cast<std::size_t>(p.r) + 1, p.alpha_out);
  } else {
    sched = amplitude_schedule(p.alpha_out, ch.eta, p.r);
  }
  ModeAmplitudes state(sched[0], 0.0);
  for (int i = 1; i <= p.r; ++i) {
    if (a == 1) state = apply_beamsplitter(state, theta);
    state = apply_loss(state, ch.eta);  // Alice -> Bob
    if (b == 0) state = ModeAmplitudes(sched[static_cast<std::size_t>(i)], 0.0);
    state = apply_loss(state, ch.eta);  // Bob -> Alice
  }
  AndOutcome out;
  out.click_pattern = detect(state, ch, rng);
  out.value = detail::classify_clicks(out.click_pattern);
  out.transcript_len = 2 * p.r + 1;
  return out;
}

/// One execution of the sign-flip AND variant with theta = pi/4r. Bob's move
/// V_0 flips the sign of the second mode; Alice's move is the conjugated
/// V_v = R_theta V_0 R_theta^dagger. Ideal final state: (alpha, 0) unless
/// a = b = 1, in which case (0, -alpha).
inline AndOutcome run_and_jrs(int a, int b, const AndParams& p,
                              const ChannelModel& ch, RandomStream& rng) {
  if ((a != 0 && a != 1) || (b != 0 && b != 1))
    throw ParameterError("run_and_jrs: inputs must be bits");
  p.validate();
  ch.validate();
  const double theta = M_PI / (4.0 * p.r);
  const auto flip2 = [](ModeAmplitudes s) {
    s.amps[1] = -s.amps[1];
    return s;
  };
  const double alpha0 =
      p.constant_alpha ? p.alpha_out : p.alpha_out / std::pow(ch.eta, p.r);
  ModeAmplitudes state(alpha0, 0.0);
  for (int i = 1; i <= p.r; ++i) {
    if (a == 1) {
      state = apply_beamsplitter(state, -theta);
      state = flip2(state);
      state = apply_beamsplitter(state, theta);
    }
    state = apply_loss(state, ch.eta);  // Alice -> Bob
    if (b == 1) state = flip2(state);
    state = apply_loss(state, ch.eta);  // Bob -> Alice
  }
  AndOutcome out;
  out.click_pattern = detect(state, ch, rng);
  out.value = detail::classify_clicks(out.click_pattern);
  out.transcript_len = 2 * p.r + 1;
  return out;
}

namespace detail {

inline AndOutcome run_attempt(int a, int b, const AndParams& p,
                              const ChannelModel& ch, RandomStream& rng) {
  return p.variant == AndVariant::Jrs ? run_and_jrs(a, b, p, ch, rng)
                                      : run_and_tilde(a, b, p, ch, rng);
}

}  // namespace detail

/// Conclusive wrapper: rerun until a Zero or One, then verify a raw One
/// classically (both bits exchanged) so a returned 1 always means
/// AND(a, b) = 1. Throws when the rerun budget runs out.
inline int run_and(int a, int b, const AndParams& p, const ChannelModel& ch,
                   RandomStream& rng, ExecStats& stats) {
  for (int attempt = 0; attempt < p.max_reruns; ++attempt) {
    const AndOutcome out = detail::run_attempt(a, b, p, ch, rng);
    stats.messages += out.transcript_len;
    stats.detector_events += 2;
    if (out.value == AndValue::Inconclusive) {
      ++stats.reruns;
      continue;
    }
    if (out.value == AndValue::Zero) return 0;
    stats.classical_bits += 2.0;  // verification exchange of a and b
    return a & b;
  }
  throw RerunBudgetError(
      "run_and: rerun budget exhausted (alpha_out too small for channel?)");
}

/// Majority-vote wrapper: run the raw AND reps times; if Ones hold a strict
/// majority of the repetitions, verify classically and return AND(a, b),
/// else 0.
inline int run_and_majority(int a, int b, int reps, const AndParams& p,
                            const ChannelModel& ch, RandomStream& rng,
                            ExecStats& stats) {
  if (reps < 1) throw ParameterError("run_and_majority: reps must be >= 1");
  int ones = 0;
  for (int i = 0; i < reps; ++i) {
    const AndOutcome out = detail::run_attempt(a, b, p, ch, rng);
    stats.messages += out.transcript_len;
    stats.detector_events += 2;
    if (out.value == AndValue::One) ++ones;
  }
  if (2 * ones > reps) {
    stats.classical_bits += 2.0;
    return a & b;
  }
  return 0;
}

/// Smallest repetition count such that the probability of a spurious majority
/// of Ones on a non-intersecting date stays below 1/n^2, given the per-run
/// probability of a spurious One.
inline int majority_reps(double n, double p_spurious_one, int reps_cap = 1000) {
  if (!(n >= 2.0)) throw ParameterError("majority_reps: n must be >= 2");
  if (!(p_spurious_one >= 0.0 && p_spurious_one < 0.5))
    throw ParameterError("majority_reps: spurious probability outside [0, 0.5)");
  const double target = 1.0 / (n * n);
  for (int reps = 1; reps <= reps_cap; ++reps) {
    // Pr[Binomial(reps, p) > reps/2], summed directly in log space.
    double tail = 0.0;
    for (int k = reps / 2 + 1; k <= reps; ++k) {
      double logterm = std::lgamma(reps + 1.0) - std::lgamma(k + 1.0) -
                       std::lgamma(reps - k + 1.0);
      if (p_spurious_one == 0.0) {
        tail = 0.0;
        break;
      }
      logterm += k * std::log(p_spurious_one) +
                 (reps - k) * std::log1p(-p_spurious_one);
      tail += std::exp(logterm);
    }
    if (tail <= target) return reps;
  }
  throw ParameterError("majority_reps: no feasible reps below cap");
}

}  // namespace apptsched

#endif

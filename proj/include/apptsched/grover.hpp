#ifndef APPTSCHED_GROVER_HPP
#define APPTSCHED_GROVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "apptsched/errors.hpp"
#include "apptsched/leakage.hpp"
#include "apptsched/optics.hpp"
#include "apptsched/rng.hpp"
#include "apptsched/scheduler.hpp"

namespace apptsched {

struct GroverParams {
  std::size_t n = 1;       // number of modes / dates
  std::size_t k = 1;       // promised intersection count (0 = promised empty)
  double alpha = 1.0;      // total amplitude scale
  double epsilon = 0.1;    // target failure probability
  int max_reps = 0;        // override for the repetition count K (0 = use K)
  bool check_promise = false;  // verify the k promise against the inputs

  void validate() const {
    if (n < 1) throw ParameterError("GroverParams: n must be >= 1");
    if (k > n) throw ParameterError("GroverParams: k must be <= n");
    if (!(alpha > 0.0))
      throw ParameterError("GroverParams: alpha must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw ParameterError("GroverParams: epsilon outside (0, 1)");
  }
};

/// Rotation angle per iteration: sin^2(theta) = k/n.
inline double grover_theta(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw ParameterError("grover_theta: need 1 <= k <= n");
  return std::asin(std::sqrt(static_cast<double>(k) / n));
}

/// Iteration count r = floor(pi / 4 theta).
inline int grover_iterations(std::size_t k, std::size_t n) {
  return static_cast<int>(std::floor(M_PI / (4.0 * grover_theta(k, n))));
}

/// Repetition count K = ceil(log(1/eps) / log(1/(1 - e^{-a^2 k/n} + e^{-a^2}))).
/// The log argument must exceed 1 (fails when alpha is too small to produce
/// clicks reliably).
inline int grover_repetitions(std::size_t k, std::size_t n, double alpha,
                              double epsilon) {
  if (k < 1 || k > n)
    throw ParameterError("grover_repetitions: need 1 <= k <= n");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("grover_repetitions: epsilon outside (0, 1)");
  const double a2 = alpha * alpha;
  const double q =
      1.0 - std::exp(-a2 * static_cast<double>(k) / n) + std::exp(-a2);
  if (!(q < 1.0))
    throw ParameterError(
        "grover_repetitions: per-repetition failure probability >= 1 "
        "(alpha too small)");
  return static_cast<int>(std::ceil(std::log(1.0 / epsilon) / std::log(1.0 / q)));
}

namespace detail {

/// The two-message oracle procedure over 2n modes: Alice swaps pair i when
/// x_i = 1, Bob sign-flips the second mode of pair i when y_i = 1, Alice
/// swaps back. Loss (sqrt(eta) per one-way hop) is applied to all 2n modes
/// on each of the two transmissions.
inline ModeAmplitudes oracle_two_hop(const ModeAmplitudes& amps,
                                     const Calendar& x, const Calendar& y,
                                     double eta) {
  const std::size_t n = amps.amps.size();
  ModeAmplitudes reg;
  reg.amps.assign(2 * n, Amplitude(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i]) {
      reg.amps[2 * i + 1] = amps.amps[i];
    } else {
      reg.amps[2 * i] = amps.amps[i];
    }
  }
  reg = apply_loss(reg, eta);  // Alice -> Bob
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i]) reg.amps[2 * i + 1] = -reg.amps[2 * i + 1];
  }
  reg = apply_loss(reg, eta);  // Bob -> Alice
  ModeAmplitudes out;
  out.amps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.amps[i] = x[i] ? reg.amps[2 * i + 1] : reg.amps[2 * i];
  }
  return out;
}

}  // namespace detail

/// Ideal oracle: flip the sign of amplitude i iff x_i = y_i = 1, realized by
/// the explicit swap / phase-flip / swap procedure.
inline ModeAmplitudes grover_oracle(const ModeAmplitudes& amps,
                                    const Calendar& x, const Calendar& y) {
  if (amps.amps.size() != x.size() || x.size() != y.size())
    throw DimensionError("grover_oracle: length mismatch");
  return detail::oracle_two_hop(amps, x, y, 1.0);
}

/// Inversion about the mean: a_i -> 2 mean(a) - a_i.
inline ModeAmplitudes grover_diffusion(const ModeAmplitudes& amps) {
  const std::size_t n = amps.amps.size();
  Amplitude mean(0.0, 0.0);
  for (const Amplitude& a : amps.amps) mean += a;
  mean /= static_cast<double>(n);
  ModeAmplitudes out;
  out.amps.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.amps[i] = 2.0 * mean - amps.amps[i];
  return out;
}

/// Amplitude-amplified search over the calendar with classical verification
/// of the announced index. One-sided: an output date always intersects.
inline SchedulerOutput run_grover(const Calendar& x, const Calendar& y,
                                  const GroverParams& gp,
                                  const ChannelModel& ch, RandomStream& rng) {
  if (x.size() != y.size() || x.size() != gp.n)
    throw DimensionError("run_grover: calendar lengths must equal gp.n");
  gp.validate();
  ch.validate();

  if (gp.check_promise) {
    std::size_t actual = 0;
    for (std::size_t i = 0; i < gp.n; ++i)
      if (x[i] && y[i]) ++actual;
    if (actual != gp.k)
      throw PromiseViolationError(
          "run_grover: input intersection count differs from the promise");
  }

  SchedulerOutput out;
  if (gp.k == 0) return out;  // promised empty: nothing to search

  const int r = grover_iterations(gp.k, gp.n);
  const int K = gp.max_reps > 0
                    ? gp.max_reps
                    : grover_repetitions(gp.k, gp.n, gp.alpha, gp.epsilon);
  const double bits_index = std::ceil(std::log2(static_cast<double>(gp.n)));

  for (int rep = 0; rep < K; ++rep) {
    ModeAmplitudes state;
    state.amps.assign(gp.n, Amplitude(gp.alpha / std::sqrt(gp.n), 0.0));
    for (int l = 0; l < r; ++l) {
      state = detail::oracle_two_hop(state, x, y, ch.eta);
      out.stats.messages += 2;
      state = grover_diffusion(state);
    }
    const ClickPattern cp = detect(state, ch, rng);
    out.stats.detector_events += static_cast<std::int64_t>(gp.n);
    std::vector<std::size_t> clicked;
    for (std::size_t i = 0; i < gp.n; ++i)
      if (cp.clicks[i]) clicked.push_back(i);
    if (clicked.empty()) {
      out.stats.messages += 1;  // "no clicks" announcement
      out.stats.classical_bits += 1.0;
      ++out.stats.reruns;
      continue;
    }
    const std::size_t i = clicked[rng.uniform_index(clicked.size())];
    out.stats.messages += 2;  // (i, x_i) and y_i
    out.stats.classical_bits += bits_index + 2.0;
    if (x[i] && y[i]) {
      out.date = i;
      return out;
    }
    ++out.stats.reruns;
  }
  return out;
}

/// Photon-number bin masses for Poisson(alpha^2) total photon number: bin 0
/// collects distances below delta from alpha^2, bin j distances in
/// [j delta, (j+1) delta). chernoff[j] = e^{-j delta} is the analytic tail
/// bound on mass[j].
struct BinMasses {
  std::vector<double> mass;
  std::vector<double> chernoff;
};

inline BinMasses grover_bin_masses(double alpha, double delta,
                                   double tail = 1e-12) {
  if (!(delta > 0.0))
    throw ParameterError("grover_bin_masses: delta must be positive");
  const double a2 = alpha * alpha;
  const double loga2 = std::log(a2);
  BinMasses bm;
  double cum = 0.0;
  // log-space Poisson pmf, k ascending until the right tail is negligible
  for (std::size_t k = 0;; ++k) {
    const double logp =
        -a2 + static_cast<double>(k) * loga2 - std::lgamma(k + 1.0);
    const double p = std::exp(logp);
    const double d = std::abs(static_cast<double>(k) - a2);
    const std::size_t j = d < delta ? 0 : static_cast<std::size_t>(d / delta);
    if (bm.mass.size() <= j) bm.mass.resize(j + 1, 0.0);
    bm.mass[j] += p;
    cum += p;
    if (static_cast<double>(k) > a2 && 1.0 - cum < tail) break;
    if (k > 100000000)
      throw ParameterError("grover_bin_masses: truncation did not converge");
  }
  bm.chernoff.resize(bm.mass.size());
  for (std::size_t j = 0; j < bm.mass.size(); ++j)
    bm.chernoff[j] = std::exp(-static_cast<double>(j) * delta);
  return bm;
}

struct BinningParams {
  double delta = 0.0;   // 0 selects the default (e^2 - 1) alpha^2
  std::size_t j_max = 0;  // 0 selects automatic truncation at tail 1e-12

  double resolved_delta(double alpha) const {
    const double min_delta = (std::exp(2.0) - 1.0) * alpha * alpha;
    if (delta == 0.0) return min_delta;
    if (delta < min_delta)
      throw ParameterError("BinningParams: delta below (e^2 - 1) alpha^2");
    return delta;
  }
};

/// Leakage of a pure coherent-state protocol with `rounds` quantum hops and
/// K classical verification exchanges:
/// 2 rounds [2 H(E1) + sum_j Pr_j log dim(Pi_j)] + K (ceil(log2 n) + 3).
inline LeakageBound grover_leakage_bound(double n, double alpha, double rounds,
                                         const BinningParams& bp, int K) {
  if (!(n >= 2.0)) throw ParameterError("grover_leakage_bound: n must be >= 2");
  if (!(alpha > 0.0))
    throw ParameterError("grover_leakage_bound: alpha must be positive");
  if (rounds < 0.0 || K < 0)
    throw ParameterError("grover_leakage_bound: negative rounds or K");
  const double delta = bp.resolved_delta(alpha);
  const double a2 = alpha * alpha;
  BinMasses bm = grover_bin_masses(alpha, delta);
  std::size_t jm = bm.mass.size();
  if (bp.j_max > 0) jm = std::min(jm, bp.j_max + 1);

  double entropy = 0.0;
  double dim_term = 0.0;
  for (std::size_t j = 0; j < jm; ++j) {
    const double q = bm.mass[j];
    if (q > 0.0) entropy -= q * std::log2(q);
    double dimlog;
    if (j == 0) {
      dimlog = (a2 + delta - 1.0) * std::log2(a2 + delta + n - 2.0) +
               std::log2(2.0 * delta - 1.0);
    } else {
      const double jd = (static_cast<double>(j) + 1.0) * delta;
      dimlog = (a2 + jd - 1.0) * std::log2(a2 + jd + n - 2.0) +
               std::log2(2.0 * delta);
    }
    dim_term += q * std::max(dimlog, 0.0);
  }

  const double per_round = 2.0 * entropy + dim_term;
  const double classical =
      static_cast<double>(K) *
      (std::ceil(std::log2(n)) + 3.0);

  LeakageBound b;
  b.subsample_bits = classical;
  b.darkcount_term = 0.0;
  b.max_branch_a = per_round;
  b.max_branch_b = per_round;
  b.prefactor = 2.0 * rounds;
  b.total_bits = classical + b.prefactor * per_round;
  b.n = n;
  b.alpha = alpha;
  return b;
}

/// Blocked-search leakage: the calendar splits into n / r^2 blocks of size
/// r^2, each searched independently, so the bound is the per-block bound
/// scaled by the block count.
inline double grover_blocked_leakage_bound(double n, int r, double alpha,
                                           const BinningParams& bp,
                                           double epsilon) {
  if (r < 2) throw ParameterError("grover_blocked_leakage_bound: r must be >= 2");
  const double block = static_cast<double>(r) * r;
  if (!(block <= n))
    throw ParameterError("grover_blocked_leakage_bound: r^2 must be <= n");
  const std::size_t bn = static_cast<std::size_t>(block);
  const int rb = grover_iterations(1, bn);
  const int Kb = grover_repetitions(1, bn, alpha, epsilon);
  const LeakageBound per_block = grover_leakage_bound(
      block, alpha, 2.0 * rb * Kb, bp, Kb);
  return (n / block) * per_block.total_bits;
}

/// Blocked search: split into blocks of size r^2 (the last block padded with
/// unavailable dates), search each block with the promised per-block count
/// min(k, 1), and output the smallest verified intersection.
inline SchedulerOutput run_grover_blocked(const Calendar& x, const Calendar& y,
                                          int r, const GroverParams& gp,
                                          const ChannelModel& ch,
                                          RandomStream& rng) {
  if (x.size() != y.size() || x.size() != gp.n)
    throw DimensionError("run_grover_blocked: calendar lengths must equal gp.n");
  if (r < 1) throw ParameterError("run_grover_blocked: r must be >= 1");
  const std::size_t block = static_cast<std::size_t>(r) * r;
  if (block > gp.n)
    throw ParameterError("run_grover_blocked: r^2 must be <= n");
  const std::size_t nblocks = (gp.n + block - 1) / block;

  SchedulerOutput out;
  std::optional<std::size_t> best;
  for (std::size_t bidx = 0; bidx < nblocks; ++bidx) {
    const std::size_t lo = bidx * block;
    Calendar bx(block, false), by(block, false);
    for (std::size_t i = 0; i < block && lo + i < gp.n; ++i) {
      bx.bits[i] = x[lo + i];
      by.bits[i] = y[lo + i];
    }
    GroverParams bgp = gp;
    bgp.n = block;
    bgp.k = gp.k > 0 ? 1 : 0;
    bgp.check_promise = false;
    RandomStream block_rng = rng.derive(bidx);
    SchedulerOutput bo = run_grover(bx, by, bgp, ch, block_rng);
    out.stats += bo.stats;
    out.stats.classical_bits += 1.0;  // per-block candidate announcement
    if (bo.date && (!best || lo + *bo.date < *best)) best = lo + *bo.date;
  }
  out.date = best;
  return out;
}

}  // namespace apptsched

#endif

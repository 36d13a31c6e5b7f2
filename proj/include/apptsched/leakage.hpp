#ifndef APPTSCHED_LEAKAGE_HPP
#define APPTSCHED_LEAKAGE_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "apptsched/errors.hpp"
#include "apptsched/optics.hpp"

namespace apptsched {

/// Binary entropy h(x) = -x log2 x - (1-x) log2(1-x), h(0) = h(1) = 0.
/// Arguments exceeding [0,1] by at most 1e-12 are treated as round-off and
/// clamped; larger excursions are domain errors.
inline double binary_entropy(double x) {
  if (x < 0.0 || x > 1.0) {
    if (x > -1e-12 && x < 1.0 + 1e-12) {
      x = std::clamp(x, 0.0, 1.0);
    } else {
      throw ParameterError("binary_entropy: argument outside [0, 1]");
    }
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Entropy of a rank-two mixture p|psi><psi| + (1-p)|phi><phi| with overlap
/// F = |<psi|phi>|:  h(1/2 - 1/2 sqrt(1 - 4p(1-p)(1-F^2))).
inline double rank_two_entropy(double p, double F) {
  if (p < 0.0 || p > 1.0)
    throw ParameterError("rank_two_entropy: p outside [0, 1]");
  if (F < 0.0 || F > 1.0)
    throw ParameterError("rank_two_entropy: F outside [0, 1]");
  const double disc = 1.0 - 4.0 * p * (1.0 - p) * (1.0 - F * F);
  return binary_entropy(0.5 - 0.5 * std::sqrt(std::max(disc, 0.0)));
}

/// Overlap of the two r-copy message ensembles in the lossless protocol:
/// F(r, alpha) = exp(-r |alpha|^2 [1 - cos(pi/2r)]).
inline double fidelity_ideal(int r, double alpha) {
  if (r < 1) throw ParameterError("fidelity_ideal: r must be >= 1");
  const double a2 = alpha * alpha;
  return std::exp(-r * a2 * (1.0 - std::cos(M_PI / (2.0 * r))));
}

/// Lossy counterpart with the amplitude schedule compensating transmissivity:
/// exp(-[(eta^-2r - 1)/(1 - eta^2)] |alpha_out|^2 [1 - cos(pi/2r)]).
/// Dispatches to the geometric-sum limit (= fidelity_ideal) near eta = 1.
inline double fidelity_lossy(int r, double alpha_out, double eta) {
  if (r < 1) throw ParameterError("fidelity_lossy: r must be >= 1");
  if (!(eta > 0.0 && eta <= 1.0))
    throw ParameterError("fidelity_lossy: eta must lie in (0, 1]");
  if (std::abs(1.0 - eta) < 1e-8) return fidelity_ideal(r, alpha_out);
  const double pref = (std::pow(eta, -2.0 * r) - 1.0) / (1.0 - eta * eta);
  const double a2 = alpha_out * alpha_out;
  return std::exp(-pref * a2 * (1.0 - std::cos(M_PI / (2.0 * r))));
}

/// Probability of an inconclusive outcome (no click or double click) with one
/// detector seeing amplitude alpha_out and the other seeing vacuum.
inline double inconclusive_probability(double alpha_out,
                                       const ChannelModel& ch) {
  const double e = std::exp(-ch.eta_det * alpha_out * alpha_out);
  const double pd = ch.p_dark;
  return e * (1.0 - pd) * (1.0 - pd) + (1.0 - e + e * pd) * pd;
}

/// Total leakage in bits plus the theorem-shaped breakdown:
///   total = subsample_bits + darkcount_term + prefactor * max(branch_a, branch_b).
struct LeakageBound {
  double total_bits = 0.0;
  double subsample_bits = 0.0;
  double darkcount_term = 0.0;
  double max_branch_a = 0.0;
  double max_branch_b = 0.0;
  double prefactor = 0.0;
  // inputs echoed back
  double n = 0.0;
  double s = 0.0;
  int r = 0;
  double alpha = 0.0;
  ChannelModel ch = ChannelModel::ideal();
};

/// Classical information-leakage lower bound for disjointness at error eps.
struct ClassicalBound {
  double epsilon = 0.0;
  double bits = 0.0;
};

namespace detail {

inline void check_theorem_range(double n, double s, bool allow_out_of_range) {
  if (allow_out_of_range) return;
  if (!(n >= 4.0))
    throw PreconditionError("theorem range requires n >= 4");
  if (!(s >= 8.0 * std::log(n)))
    throw PreconditionError("theorem range requires s >= 8 ln n");
  if (!(s <= n)) throw PreconditionError("theorem range requires s <= n");
}

inline double continuity_mass(double n, double s) {
  return 2.0 * std::log(n) / s + 1.0 / n;
}

inline LeakageBound assemble(double n, double s, int r, double alpha,
                             const ChannelModel& ch, double p_inconclusive,
                             double darkcount, double branch_a,
                             double branch_b) {
  LeakageBound b;
  b.subsample_bits = s + std::log2(s) + 1.0;
  b.darkcount_term = darkcount;
  b.max_branch_a = branch_a;
  b.max_branch_b = branch_b;
  b.prefactor = n / (1.0 - p_inconclusive);
  b.total_bits = b.subsample_bits + b.darkcount_term +
                 b.prefactor * std::max(branch_a, branch_b);
  b.n = n;
  b.s = s;
  b.r = r;
  b.alpha = alpha;
  b.ch = ch;
  return b;
}

}  // namespace detail

/// Leakage bound for the full scheduling protocol with an ideal set-up:
/// s + log s + 1 + n/(1-e^-a^2) max[2(2r+1)/n,
///                                 h((1-F)/2) + 2(2r+1) h(2 ln n/s + 1/n)].
inline LeakageBound qic_bound_ideal(double n, double s, int r, double alpha,
                                    bool allow_out_of_range = false) {
  detail::check_theorem_range(n, s, allow_out_of_range);
  if (r < 1) throw ParameterError("qic_bound_ideal: r must be >= 1");
  const double p = std::exp(-alpha * alpha);
  const double M = 2.0 * r + 1.0;
  const double branch_a = 2.0 * M / n;
  const double branch_b =
      binary_entropy(0.5 * (1.0 - fidelity_ideal(r, alpha))) +
      2.0 * M * binary_entropy(detail::continuity_mass(n, s));
  return detail::assemble(n, s, r, alpha, ChannelModel::ideal(), p, 0.0,
                          branch_a, branch_b);
}

/// Leakage bound accounting for loss, detector efficiency and dark counts:
/// s + log s + 1 + 2n p_dark/(1-p)
///   + n/(1-p) max[2(2r+3)/n, h((1-F~)/2) + 2(2r+3) h(2 ln n/s + 1/n)].
inline LeakageBound qic_bound_experimental(double n, double s, int r,
                                           double alpha_out,
                                           const ChannelModel& ch,
                                           bool allow_out_of_range = false) {
  detail::check_theorem_range(n, s, allow_out_of_range);
  if (r < 1) throw ParameterError("qic_bound_experimental: r must be >= 1");
  ch.validate();
  const double p = inconclusive_probability(alpha_out, ch);
  const double M = 2.0 * r + 3.0;
  const double branch_a = 2.0 * M / n;
  const double branch_b =
      binary_entropy(0.5 * (1.0 - fidelity_lossy(r, alpha_out, ch.eta))) +
      2.0 * M * binary_entropy(detail::continuity_mass(n, s));
  const double darkcount = 2.0 * n / (1.0 - p) * ch.p_dark;
  return detail::assemble(n, s, r, alpha_out, ch, p, darkcount, branch_a,
                          branch_b);
}

/// Per-round fidelity of the sign-flip AND variant:
/// F'(r, alpha) = exp(-|alpha|^2 [1 - cos(pi/2r)]).
inline double fidelity_jrs(int r, double alpha) {
  if (r < 1) throw ParameterError("fidelity_jrs: r must be >= 1");
  return std::exp(-alpha * alpha * (1.0 - std::cos(M_PI / (2.0 * r))));
}

/// Bound for the scheduling protocol run with the sign-flip AND variant;
/// the entropy term is r h((1 - F')/2) instead of a single binary entropy.
inline LeakageBound qic_bound_jrs(double n, double s, int r, double alpha,
                                  bool allow_out_of_range = false) {
  detail::check_theorem_range(n, s, allow_out_of_range);
  if (r < 1) throw ParameterError("qic_bound_jrs: r must be >= 1");
  const double p = std::exp(-alpha * alpha);
  const double M = 2.0 * r + 1.0;
  const double branch_a = 2.0 * M / n;
  const double branch_b =
      r * binary_entropy(0.5 * (1.0 - fidelity_jrs(r, alpha))) +
      2.0 * M * binary_entropy(detail::continuity_mass(n, s));
  return detail::assemble(n, s, r, alpha, ChannelModel::ideal(), p, 0.0,
                          branch_a, branch_b);
}

/// Lossy extension of the sign-flip variant bound. Each odd-round message
/// pair carries amplitude alpha_i from the compensation schedule, so the
/// per-round overlap is exp(-(|alpha_i|^2/eta)[1 - cos(pi/2r)]) and the
/// entropy term is the sum over rounds.
inline LeakageBound qic_bound_jrs_lossy(double n, double s, int r,
                                        double alpha_out,
                                        const ChannelModel& ch,
                                        bool allow_out_of_range = false) {
  detail::check_theorem_range(n, s, allow_out_of_range);
  if (r < 1) throw ParameterError("qic_bound_jrs_lossy: r must be >= 1");
  ch.validate();
  const double p = inconclusive_probability(alpha_out, ch);
  const double M = 2.0 * r + 3.0;
  const double a2 = alpha_out * alpha_out;
  const double c = 1.0 - std::cos(M_PI / (2.0 * r));
  double entropy_sum = 0.0;
  for (int i = 1; i <= r; ++i) {
    const double ai2 = a2 * std::pow(ch.eta, -(2.0 * r - 2.0 * i + 1.0));
    entropy_sum +=
        binary_entropy(0.5 * (1.0 - std::exp(-(ai2 / ch.eta) * c)));
  }
  const double branch_a = 2.0 * M / n;
  const double branch_b =
      entropy_sum +
      2.0 * M * binary_entropy(detail::continuity_mass(n, s));
  const double darkcount = 2.0 * n / (1.0 - p) * ch.p_dark;
  return detail::assemble(n, s, r, alpha_out, ch, p, darkcount, branch_a,
                          branch_b);
}

/// Bound for the majority-vote regime (eta ~ 1 - 1/r, r <= n^(1/3)):
/// n (reps h((1 - F~)/2) + 2/n^2), with the repetition constant explicit.
inline LeakageBound qic_bound_n_over_r(double n, int r, double alpha_out,
                                       const ChannelModel& ch, int reps) {
  if (r < 1) throw ParameterError("qic_bound_n_over_r: r must be >= 1");
  if (reps < 1) throw ParameterError("qic_bound_n_over_r: reps must be >= 1");
  if (!(n >= 4.0)) throw ParameterError("qic_bound_n_over_r: n must be >= 4");
  ch.validate();
  const double per_date =
      reps * binary_entropy(
                 0.5 * (1.0 - fidelity_lossy(r, alpha_out, ch.eta))) +
      2.0 / (n * n);
  LeakageBound b;
  b.subsample_bits = 0.0;
  b.darkcount_term = 0.0;
  b.max_branch_a = 0.0;
  b.max_branch_b = per_date;
  b.prefactor = n;
  b.total_bits = n * per_date;
  b.n = n;
  b.r = r;
  b.alpha = alpha_out;
  b.ch = ch;
  return b;
}

/// Classical lower bound: 0.48 n at zero error, max(0, 0.48 - 16 h(sqrt(eps))) n
/// otherwise.
inline ClassicalBound classical_lower_bound(double n, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw ParameterError("classical_lower_bound: epsilon outside [0, 1)");
  ClassicalBound b;
  b.epsilon = epsilon;
  if (epsilon == 0.0) {
    b.bits = 0.48 * n;
  } else {
    b.bits = std::max(0.0, 0.48 - 16.0 * binary_entropy(std::sqrt(epsilon))) * n;
  }
  return b;
}

}  // namespace apptsched

#endif

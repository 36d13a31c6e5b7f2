#ifndef APPTSCHED_OPTICS_HPP
#define APPTSCHED_OPTICS_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "apptsched/errors.hpp"
#include "apptsched/rng.hpp"

namespace apptsched {

using Amplitude = std::complex<double>;

/// Complete classical description of a multimode coherent state: one complex
/// amplitude per optical mode.
struct ModeAmplitudes {
  std::vector<Amplitude> amps;

  ModeAmplitudes() = default;
  explicit ModeAmplitudes(std::vector<Amplitude> a) : amps(std::move(a)) {}
  ModeAmplitudes(Amplitude a0, Amplitude a1) : amps{a0, a1} {}

  std::size_t size() const { return amps.size(); }
  Amplitude& operator[](std::size_t i) { return amps[i]; }
  const Amplitude& operator[](std::size_t i) const { return amps[i]; }

  /// Sum of |amp_i|^2, conserved by beamsplitters and scaled by loss.
  double mean_photon_number() const {
    double sum = 0.0;
    for (const auto& a : amps) sum += std::norm(a);
    return sum;
  }

  bool finite() const {
    for (const auto& a : amps)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    return true;
  }
};

/// Channel and detector error parameters: one-hop transmissivity eta
/// (includes coupling), detector efficiency eta_det, dark-count probability
/// p_dark per detector per measurement.
struct ChannelModel {
  double eta = 1.0;
  double eta_det = 1.0;
  double p_dark = 0.0;

  static ChannelModel ideal() { return {1.0, 1.0, 0.0}; }

  void validate() const {
    if (!(eta > 0.0 && eta <= 1.0))
      throw ParameterError("eta must lie in (0, 1]");
    if (!(eta_det > 0.0 && eta_det <= 1.0))
      throw ParameterError("eta_det must lie in (0, 1]");
    if (!(p_dark >= 0.0 && p_dark < 1.0))
      throw ParameterError("p_dark must lie in [0, 1)");
  }
};

/// Threshold-detector outcomes, one click flag per measured mode.
struct ClickPattern {
  std::vector<bool> clicks;

  std::size_t count() const {
    std::size_t c = 0;
    for (bool b : clicks) c += b;
    return c;
  }
};

/// Two-mode beamsplitter rotation by angle theta:
/// (a, b) -> (cos(theta) a - sin(theta) b, sin(theta) a + cos(theta) b).
inline ModeAmplitudes apply_beamsplitter(const ModeAmplitudes& state,
                                         double theta) {
  if (state.size() != 2)
    throw DimensionError("apply_beamsplitter requires exactly 2 modes");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return ModeAmplitudes(c * state[0] - s * state[1],
                        s * state[0] + c * state[1]);
}

/// One-hop loss: every amplitude scaled by sqrt(eta).
inline ModeAmplitudes apply_loss(const ModeAmplitudes& state, double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw ParameterError("apply_loss: eta must lie in (0, 1]");
  const double f = std::sqrt(eta);
  ModeAmplitudes out = state;
  for (auto& a : out.amps) a *= f;
  return out;
}

/// Probability a threshold detector clicks on a coherent amplitude:
/// 1 - (1 - p_dark) * exp(-eta_det |amp|^2).
inline double click_probability(Amplitude amp, const ChannelModel& ch) {
  return 1.0 - (1.0 - ch.p_dark) * std::exp(-ch.eta_det * std::norm(amp));
}

/// Measure every mode with an independent threshold detector. Consumes one
/// uniform draw per mode, so the stream position is input-independent.
inline ClickPattern detect(const ModeAmplitudes& state, const ChannelModel& ch,
                           RandomStream& rng) {
  ClickPattern pattern;
  pattern.clicks.reserve(state.size());
  for (const auto& a : state.amps)
    pattern.clicks.push_back(rng.bernoulli(click_probability(a, ch)));
  return pattern;
}

/// Overlap |<a|b>| of two multimode coherent states:
/// exp(-1/2 sum_i |a_i - b_i|^2).
inline double coherent_overlap(const ModeAmplitudes& a,
                               const ModeAmplitudes& b) {
  if (a.size() != b.size())
    throw DimensionError("coherent_overlap: mode counts differ");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += std::norm(a[i] - b[i]);
  return std::exp(-0.5 * d2);
}

}  // namespace apptsched

#endif

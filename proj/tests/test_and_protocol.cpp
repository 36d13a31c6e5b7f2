#include <cmath>
#include <vector>

#include <doctest.h>

#include "apptsched/and_protocol.hpp"
#include "apptsched/leakage.hpp"
#include "apptsched/netsim.hpp"

using namespace apptsched;

namespace {

// Pre-detection state of one AND execution, read off the final quantum
// message of an in-process session (independent of the library's internal
// state handling).
ModeAmplitudes final_state(int a, int b, const AndParams& p,
                           const ChannelModel& ch) {
  TransportSpec ts;
  ts.channel = ch;
  SessionInputs in;
  in.a = a;
  in.b = b;
  in.and_params = p;
  const SessionResult res =
      run_session(ts, SessionProtocol::AndTilde, in, SessionSeeds{5, 6});
  const WireMessage& last_q = res.transcript[res.transcript.size() - 2];
  REQUIRE(last_q.kind == MessageKind::Quantum);
  ModeAmplitudes s;
  s.amps = last_q.modes;
  return s;
}

}  // namespace

TEST_CASE("amplitude schedule matches the printed formula") {
  const auto flat = amplitude_schedule(1.3, 1.0, 4);
  REQUIRE(flat.size() == 5);
  for (double a : flat) CHECK(a == doctest::Approx(1.3).epsilon(1e-15));

  const auto sched = amplitude_schedule(1.0, 0.99, 2);
  CHECK(sched[0] == doctest::Approx(std::pow(0.99, -2.0)).epsilon(1e-15));
  CHECK(sched[1] == doctest::Approx(std::pow(0.99, -1.5)).epsilon(1e-15));
  CHECK(sched[2] == doctest::Approx(std::pow(0.99, -0.5)).epsilon(1e-15));

  CHECK_THROWS_AS(amplitude_schedule(1.0, 0.0, 2), ParameterError);
}

TEST_CASE("amplitude schedule hop accounting") {
  // alpha_0 travels 2r hops; alpha_i travels 2(r - i) + 1 hops; each hop
  // multiplies by sqrt(eta), and the detected magnitude is alpha_out.
  for (double eta : {1.0, 0.99, 0.9, 0.6}) {
    for (int r : {1, 2, 5, 20}) {
      const auto sched = amplitude_schedule(0.8, eta, r);
      CHECK(sched[0] * std::pow(std::sqrt(eta), 2 * r) ==
            doctest::Approx(0.8).epsilon(1e-12));
      for (int i = 1; i <= r; ++i) {
        CHECK(sched[static_cast<std::size_t>(i)] *
                  std::pow(std::sqrt(eta), 2 * (r - i) + 1) ==
              doctest::Approx(0.8).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pre-detection states of the main AND variant") {
  AndParams p;
  p.r = 4;
  p.alpha_out = 1.1;
  const ChannelModel ideal = ChannelModel::ideal();

  const ModeAmplitudes s11 = final_state(1, 1, p, ideal);
  CHECK(std::abs(s11[0]) < 1e-10);
  CHECK(std::abs(std::abs(s11[1]) - 1.1) < 1e-10);

  const ModeAmplitudes s01 = final_state(0, 1, p, ideal);
  CHECK(std::abs(s01[0] - Amplitude(1.1, 0.0)) < 1e-10);
  CHECK(std::abs(s01[1]) < 1e-10);

  ChannelModel lossy;
  lossy.eta = 0.99;
  for (int a : {0, 1}) {
    for (int b : {0, 1}) {
      const ModeAmplitudes s = final_state(a, b, p, lossy);
      CHECK(std::sqrt(s.mean_photon_number()) ==
            doctest::Approx(1.1).epsilon(1e-10));
    }
  }
}

TEST_CASE("raw AND has one-sided error without dark counts") {
  RandomStream master(31, 0);
  AndParams p;
  p.alpha_out = 1.0;
  for (int t = 0; t < 100000; ++t) {
    RandomStream rng = master.derive(t);
    ChannelModel ch;
    ch.eta = 0.5 + 0.5 * rng.next_double();
    ch.eta_det = 0.5 + 0.5 * rng.next_double();
    p.r = 1 + static_cast<int>(rng.uniform_index(5));
    const int a = static_cast<int>(rng.uniform_index(2));
    const int b = static_cast<int>(rng.uniform_index(2));
    const AndOutcome out = run_and_tilde(a, b, p, ch, rng);
    if (out.value == AndValue::Zero) CHECK((a & b) == 0);
    if (out.value == AndValue::One) CHECK((a & b) == 1);
  }
}

TEST_CASE("message count per execution is 2r + 1") {
  RandomStream rng(4, 4);
  AndParams p;
  p.alpha_out = 1.0;
  for (int r : {1, 3, 8}) {
    p.r = r;
    const AndOutcome out =
        run_and_tilde(1, 0, p, ChannelModel::ideal(), rng);
    CHECK(out.transcript_len == 2 * r + 1);
  }
}

TEST_CASE("conclusive wrapper") {
  AndParams p;
  p.r = 2;
  p.alpha_out = 1.0;

  // (1, 0) never outputs 1, even with dark counts
  ChannelModel noisy;
  noisy.eta = 0.95;
  noisy.eta_det = 0.9;
  noisy.p_dark = 0.02;
  RandomStream rng(8, 1);
  for (int t = 0; t < 20000; ++t) {
    ExecStats st;
    RandomStream r2 = rng.derive(t);
    CHECK(run_and(1, 0, p, noisy, r2, st) == 0);
  }

  // (1, 1) ideal never errs
  for (int t = 0; t < 20000; ++t) {
    ExecStats st;
    RandomStream r2 = RandomStream(9, 1).derive(t);
    CHECK(run_and(1, 1, p, ChannelModel::ideal(), r2, st) == 1);
  }
}

TEST_CASE("rerun count follows the geometric law") {
  AndParams p;
  p.r = 3;
  p.alpha_out = 1.0;
  ChannelModel ch;
  ch.eta = 0.9;
  ch.eta_det = 0.9;
  const double pinc = inconclusive_probability(p.alpha_out, ch);
  const int N = 100000;
  double reruns = 0.0;
  RandomStream master(13, 2);
  for (int t = 0; t < N; ++t) {
    ExecStats st;
    RandomStream rng = master.derive(t);
    run_and(1, 1, p, ch, rng, st);
    reruns += static_cast<double>(st.reruns);
  }
  const double mean = pinc / (1.0 - pinc);
  const double var = pinc / ((1.0 - pinc) * (1.0 - pinc));
  const double sigma = std::sqrt(var / N);
  CHECK(std::abs(reruns / N - mean) < 3.0 * sigma);
}

TEST_CASE("inconclusive rate is input-independent") {
  AndParams p;
  p.r = 2;
  p.alpha_out = 1.0;
  ChannelModel ch;
  ch.eta = 0.95;
  ch.eta_det = 0.85;
  const int N = 100000;
  int inc00 = 0, inc11 = 0;
  RandomStream m1(17, 0), m2(18, 0);
  for (int t = 0; t < N; ++t) {
    RandomStream a = m1.derive(t), b = m2.derive(t);
    if (run_and_tilde(0, 0, p, ch, a).value == AndValue::Inconclusive) ++inc00;
    if (run_and_tilde(1, 1, p, ch, b).value == AndValue::Inconclusive) ++inc11;
  }
  const double pinc = inconclusive_probability(p.alpha_out, ch);
  const double sigma = std::sqrt(pinc * (1.0 - pinc) * N);
  CHECK(std::abs(inc00 - pinc * N) < 4.0 * sigma);
  CHECK(std::abs(inc11 - pinc * N) < 4.0 * sigma);
}

TEST_CASE("sign-flip variant evolution") {
  AndParams p;
  p.variant = AndVariant::Jrs;
  p.alpha_out = 0.9;
  const ChannelModel ideal = ChannelModel::ideal();

  for (int r : {1, 2, 3, 6}) {
    p.r = r;
    const ModeAmplitudes s11 = final_state(1, 1, p, ideal);
    CHECK(std::abs(s11[0]) < 1e-10);
    CHECK(std::abs(s11[1] - Amplitude(-0.9, 0.0)) < 1e-10);

    // both idle, or only Bob flips a vacuum mode: state stays (alpha, 0)
    for (int b : {0, 1}) {
      const ModeAmplitudes s0 = final_state(0, b, p, ideal);
      CHECK(std::abs(s0[0] - Amplitude(0.9, 0.0)) < 1e-10);
      CHECK(std::abs(s0[1]) < 1e-10);
    }
  }

  // (1, 0): Alice's involution returns the state to (alpha, 0) after even
  // round counts
  for (int r : {2, 4, 8}) {
    p.r = r;
    const ModeAmplitudes s = final_state(1, 0, p, ideal);
    CHECK(std::abs(s[0] - Amplitude(0.9, 0.0)) < 1e-10);
    CHECK(std::abs(s[1]) < 1e-10);
  }
}

TEST_CASE("majority vote matches the binomial oracle") {
  AndParams p;
  p.r = 1;
  p.alpha_out = 1.0;
  const ChannelModel ideal = ChannelModel::ideal();
  const int reps = 9;
  const int N = 100000;
  int failures = 0;
  RandomStream master(23, 0);
  for (int t = 0; t < N; ++t) {
    ExecStats st;
    RandomStream rng = master.derive(t);
    if (run_and_majority(1, 1, reps, p, ideal, rng, st) == 0) ++failures;
  }
  // each run is conclusive One with probability 1 - e^{-1}; failure means at
  // most 4 of 9 Ones
  const double q = 1.0 - std::exp(-1.0);
  double pfail = 0.0;
  for (int k = 0; k <= 4; ++k) {
    double c = 1.0;
    for (int j = 0; j < k; ++j) c = c * (reps - j) / (j + 1);
    pfail += c * std::pow(q, k) * std::pow(1.0 - q, reps - k);
  }
  const double sigma = std::sqrt(pfail * (1.0 - pfail) * N);
  CHECK(std::abs(failures - pfail * N) < 3.0 * sigma);

  for (int t = 0; t < 5000; ++t) {
    ExecStats st;
    RandomStream rng = RandomStream(24, 0).derive(t);
    CHECK(run_and_majority(0, 0, reps, p, ideal, rng, st) == 0);
    RandomStream rng2 = RandomStream(25, 0).derive(t);
    CHECK(run_and_majority(1, 0, reps, p, ideal, rng2, st) == 0);
  }
}

TEST_CASE("majority repetition helper bounds the spurious tail") {
  // spurious One on a non-intersecting date needs a dark count
  const int reps = majority_reps(1000.0, 1e-3);
  CHECK(reps >= 1);
  // with p = 1e-3 a single run already has tail 1e-3 > 1e-6, so reps > 1
  CHECK(reps > 1);
  CHECK(majority_reps(100.0, 0.0) == 1);
  CHECK_THROWS_AS(majority_reps(100.0, 0.7), ParameterError);
}

TEST_CASE("rerun budget surfaces as a typed error") {
  AndParams p;
  p.r = 1;
  p.alpha_out = 0.05;  // nearly always inconclusive
  p.max_reruns = 3;
  ChannelModel ch;
  ch.eta_det = 0.1;
  RandomStream rng(3, 3);
  CHECK_THROWS_AS(
      [&] {
        for (int t = 0; t < 1000; ++t) {
          ExecStats st;
          run_and(1, 1, p, ch, rng, st);
        }
      }(),
      RerunBudgetError);
}

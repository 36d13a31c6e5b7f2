#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "apptsched/optimizer.hpp"

using namespace apptsched;

TEST_CASE("optimizer returns a locally optimal point") {
  ChannelModel ch;
  ch.eta = 0.99;
  ch.eta_det = 0.9;
  ch.p_dark = 4e-8;
  OptConfig cfg;
  cfg.r_max = 200;
  const double n = 1e9;
  const OptResult best =
      optimize_params(n, ch, SPolicy::fixed_fraction(0.02), AndVariant::Main, cfg);

  const auto eval = [&](int r, double alpha) {
    return qic_bound_experimental(n, best.best_s, r, alpha, ch, true)
        .total_bits;
  };
  const double tol = 1e-6 * best.bound_bits;
  CHECK(eval(best.best_r, best.best_alpha) ==
        doctest::Approx(best.bound_bits).epsilon(1e-12));
  CHECK(eval(best.best_r + 1, best.best_alpha) > best.bound_bits - tol);
  if (best.best_r > 1)
    CHECK(eval(best.best_r - 1, best.best_alpha) > best.bound_bits - tol);
  CHECK(eval(best.best_r, best.best_alpha * 1.02) > best.bound_bits - tol);
  CHECK(eval(best.best_r, best.best_alpha * 0.98) > best.bound_bits - tol);

  // ratio consistency
  CHECK(best.ratio * best.bound_bits ==
        doctest::Approx(best.classical_bits).epsilon(1e-12));
  // default comparator is the eps-error bound at eps = p_dark
  CHECK(best.classical_bits ==
        doctest::Approx(classical_lower_bound(n, ch.p_dark).bits)
            .epsilon(1e-15));
}

TEST_CASE("zero-error comparator flag") {
  ChannelModel ch;
  ch.p_dark = 4e-8;
  OptConfig cfg;
  cfg.r_max = 20;
  cfg.zero_error_classical = true;
  const OptResult r = optimize_params(1e6, ch, SPolicy::two_thirds(),
                                      AndVariant::Main, cfg);
  CHECK(r.classical_bits == doctest::Approx(0.48e6).epsilon(1e-15));
}

TEST_CASE("infeasible subsample candidates raise") {
  ChannelModel ch;
  OptConfig cfg;
  cfg.r_max = 5;
  // s = 30 violates s >= 8 ln n at n = 1e6
  CHECK_THROWS_AS(optimize_params(1e6, ch, SPolicy::fixed_fraction(3e-5),
                                  AndVariant::Main, cfg),
                  ParameterError);
  cfg.allow_out_of_range = true;
  CHECK_NOTHROW(optimize_params(1e6, ch, SPolicy::fixed_fraction(3e-5),
                                AndVariant::Main, cfg));
}

TEST_CASE("sweep determinism and CSV shape") {
  SweepSpec spec;
  spec.param = "eta";
  spec.lo = 0.98;
  spec.hi = 1.0;
  spec.steps = 3;
  spec.n = 1e7;
  spec.ch.eta_det = 0.9;
  spec.ch.p_dark = 4e-8;
  spec.s_policy = SPolicy::fixed_fraction(0.01);
  spec.config.r_max = 60;

  const std::string a = sweep_to_csv(sweep(spec));
  const std::string b = sweep_to_csv(sweep(spec));
  CHECK(a == b);

  std::istringstream in(a);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "swept_param, value, r, alpha, s, qic_bits, classical_bits, ratio, "
        "status");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // RFC-4180: no quoting needed here, so fields are plain comma splits
    int commas = 0;
    for (char c : line) commas += c == ',';
    CHECK(commas == 8);
    CHECK(line.substr(0, 4) == "eta,");
    CHECK(line.substr(line.size() - 2) == "ok");
  }
  CHECK(rows == 3);
}

TEST_CASE("failed sweep points are marked, not fatal") {
  SweepSpec spec;
  spec.param = "n";
  spec.lo = 2.0;  // below the n >= 4 requirement: first row errors
  spec.hi = 1e4;
  spec.steps = 2;
  spec.log_scale = true;
  spec.s_policy = SPolicy::two_thirds();
  spec.config.r_max = 5;
  const auto rows = sweep(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "error");
  CHECK(rows[1].status == "ok");
}

TEST_CASE("s policies produce the documented candidates") {
  const auto frac = SPolicy::fixed_fraction(0.001).candidates(1e6);
  REQUIRE(frac.size() == 1);
  CHECK(frac[0] == doctest::Approx(1000.0));

  const auto tt = SPolicy::two_thirds().candidates(1e6);
  REQUIRE(tt.size() == 1);
  CHECK(tt[0] == doctest::Approx(1e4));

  const auto grid = SPolicy::default_grid(1e6).candidates(1e6);
  CHECK(grid.size() == 14);
  CHECK(grid.front() == doctest::Approx(1e2));
  CHECK(grid.back() == doctest::Approx(1e4));
}

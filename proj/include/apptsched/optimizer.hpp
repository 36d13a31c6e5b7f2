#ifndef APPTSCHED_OPTIMIZER_HPP
#define APPTSCHED_OPTIMIZER_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "apptsched/and_protocol.hpp"
#include "apptsched/errors.hpp"
#include "apptsched/leakage.hpp"

namespace apptsched {

/// How the subsample size s is chosen during optimization.
struct SPolicy {
  enum class Kind { FixedFraction, Grid, TwoThirds };
  Kind kind = Kind::FixedFraction;
  double fraction = 0.001;       // FixedFraction: s = fraction * n
  std::vector<double> grid;      // Grid: explicit s values

  static SPolicy fixed_fraction(double f) {
    SPolicy p;
    p.kind = Kind::FixedFraction;
    p.fraction = f;
    return p;
  }
  static SPolicy two_thirds() {
    SPolicy p;
    p.kind = Kind::TwoThirds;
    return p;
  }
  static SPolicy explicit_grid(std::vector<double> g) {
    SPolicy p;
    p.kind = Kind::Grid;
    p.grid = std::move(g);
    return p;
  }
  /// Logarithmic default grid {1e-4 .. 1e-1} n plus n^{2/3}.
  static SPolicy default_grid(double n) {
    SPolicy p;
    p.kind = Kind::Grid;
    for (int j = 0; j <= 12; ++j)
      p.grid.push_back(std::pow(10.0, -4.0 + 0.25 * j) * n);
    p.grid.push_back(std::pow(n, 2.0 / 3.0));
    return p;
  }

  std::vector<double> candidates(double n) const {
    switch (kind) {
      case Kind::FixedFraction:
        return {fraction * n};
      case Kind::TwoThirds:
        return {std::pow(n, 2.0 / 3.0)};
      case Kind::Grid:
        return grid;
    }
    return {};
  }
};

struct OptConfig {
  int r_min = 1;
  int r_max = 5000;
  double alpha_lo = 0.05;
  double alpha_hi = 5.0;
  double alpha_tol = 1e-6;        // golden-section terminal bracket width
  bool zero_error_classical = false;  // compare against 0.48 n instead of the
                                      // epsilon-error bound at eps = p_dark
  bool allow_out_of_range = false;    // evaluate bounds outside the proven
                                      // (n, s) range
};

struct OptResult {
  int best_r = 0;
  double best_alpha = 0.0;
  double best_s = 0.0;
  double bound_bits = 0.0;
  double classical_bits = 0.0;
  double ratio = 0.0;  // classical / quantum
};

namespace detail {

inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, double tol, double* argmin) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (argmin) *argmin = x;
  return f(x);
}

}  // namespace detail

/// Minimize the leakage bound over (r, alpha, s): exhaustive integer grid
/// over r, golden-section search over alpha per r, over the s-policy's
/// candidate list. Deterministic.
inline OptResult optimize_params(double n, const ChannelModel& ch,
                                 const SPolicy& s_policy,
                                 AndVariant variant = AndVariant::Main,
                                 const OptConfig& cfg = OptConfig()) {
  if (!(n >= 4.0)) throw ParameterError("optimize_params: n must be >= 4");
  ch.validate();
  if (cfg.r_min < 1 || cfg.r_max < cfg.r_min)
    throw ParameterError("optimize_params: bad r range");

  const auto objective = [&](int r, double alpha, double s) -> double {
    if (variant == AndVariant::Jrs) {
      return qic_bound_jrs_lossy(n, s, r, alpha, ch, true).total_bits;
    }
    return qic_bound_experimental(n, s, r, alpha, ch, true).total_bits;
  };

  OptResult best;
  best.bound_bits = std::numeric_limits<double>::infinity();
  bool any_feasible = false;
  for (double s : s_policy.candidates(n)) {
    if (!cfg.allow_out_of_range &&
        !(n >= 4.0 && s >= 8.0 * std::log(n) && s <= n))
      continue;
    any_feasible = true;
    for (int r = cfg.r_min; r <= cfg.r_max; ++r) {
      double a_best = 0.0;
      const double v = detail::golden_min(
          [&](double a) { return objective(r, a, s); }, cfg.alpha_lo,
          cfg.alpha_hi, cfg.alpha_tol, &a_best);
      if (v < best.bound_bits) {
        best.bound_bits = v;
        best.best_r = r;
        best.best_alpha = a_best;
        best.best_s = s;
      }
    }
  }
  if (!any_feasible)
    throw ParameterError(
        "optimize_params: no subsample candidate satisfies the bound's "
        "validity range (set allow_out_of_range to override)");

  const double eps = cfg.zero_error_classical ? 0.0 : ch.p_dark;
  best.classical_bits = classical_lower_bound(n, eps).bits;
  best.ratio = best.classical_bits / best.bound_bits;
  return best;
}

struct SweepSpec {
  std::string param;  // one of: eta, eta_det, pdark, n
  double lo = 0.0;
  double hi = 0.0;
  int steps = 2;
  bool log_scale = false;  // geometric spacing (e.g. for n sweeps)

  double n = 0.0;          // fixed calendar size (ignored when sweeping n)
  ChannelModel ch;         // fixed channel values
  SPolicy s_policy;
  AndVariant variant = AndVariant::Main;
  OptConfig config;

  void validate() const {
    if (steps < 2) throw ParameterError("SweepSpec: steps must be >= 2");
    if (!(hi >= lo)) throw ParameterError("SweepSpec: empty range");
    if (param != "eta" && param != "eta_det" && param != "pdark" &&
        param != "n")
      throw ParameterError("SweepSpec: unknown swept parameter " + param);
  }
};

struct SweepRow {
  std::string param;
  double value = 0.0;
  OptResult result;
  std::string status = "ok";
};

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (int i = 0; i < spec.steps; ++i) {
    const double t = static_cast<double>(i) / (spec.steps - 1);
    const double v = spec.log_scale
                         ? spec.lo * std::pow(spec.hi / spec.lo, t)
                         : spec.lo + t * (spec.hi - spec.lo);
    SweepRow row;
    row.param = spec.param;
    row.value = v;
    double n = spec.n;
    ChannelModel ch = spec.ch;
    if (spec.param == "eta") ch.eta = v;
    else if (spec.param == "eta_det") ch.eta_det = v;
    else if (spec.param == "pdark") ch.p_dark = v;
    else n = v;
    try {
      row.result =
          optimize_params(n, ch, spec.s_policy, spec.variant, spec.config);
    } catch (const std::exception& e) {
      row.status = "error";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "swept_param, value, r, alpha, s, qic_bits, classical_bits, ratio, "
      "status\n";
  char buf[512];
  for (const SweepRow& row : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                  row.param.c_str(), row.value, row.result.best_r,
                  row.result.best_alpha, row.result.best_s,
                  row.result.bound_bits, row.result.classical_bits,
                  row.result.ratio, row.status.c_str());
    out += buf;
  }
  return out;
}

}  // namespace apptsched

#endif

// Command-line front end: Monte Carlo simulation, leakage-bound evaluation,
// parameter optimization, sweeps, and classical lower bounds. Single
// evaluations emit JSON; sweeps emit CSV.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "apptsched/and_protocol.hpp"
#include "apptsched/grover.hpp"
#include "apptsched/leakage.hpp"
#include "apptsched/netsim.hpp"
#include "apptsched/optimizer.hpp"
#include "apptsched/optics.hpp"
#include "apptsched/rng.hpp"
#include "apptsched/scheduler.hpp"

namespace {

using nlohmann::json;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("APPTSCHED_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 1;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    f << j.dump(2) << "\n";
  }
}

json bound_json(const apptsched::LeakageBound& b) {
  return json{{"total_bits", b.total_bits},
              {"subsample_bits", b.subsample_bits},
              {"darkcount_term", b.darkcount_term},
              {"max_branch_a", b.max_branch_a},
              {"max_branch_b", b.max_branch_b},
              {"prefactor", b.prefactor},
              {"n", b.n},
              {"s", b.s},
              {"r", b.r},
              {"alpha", b.alpha}};
}

apptsched::SPolicy parse_s_policy(const std::string& text, double n) {
  if (text.rfind("frac:", 0) == 0)
    return apptsched::SPolicy::fixed_fraction(std::stod(text.substr(5)));
  if (text == "two-thirds") return apptsched::SPolicy::two_thirds();
  if (text == "grid") return apptsched::SPolicy::default_grid(n);
  throw apptsched::ParameterError("unknown s-policy: " + text);
}

// Random calendars with exactly k shared dates (for the Grover promise).
void promise_calendars(std::size_t n, std::size_t k, apptsched::RandomStream& rng,
                       apptsched::Calendar* x, apptsched::Calendar* y) {
  x->bits.assign(n, false);
  y->bits.assign(n, false);
  std::size_t placed = 0;
  while (placed < k) {
    const std::size_t i = rng.uniform_index(n);
    if (!((*x)[i] && (*y)[i])) {
      x->bits[i] = true;
      y->bits[i] = true;
      ++placed;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((*x)[i] && (*y)[i]) continue;
    // at most one of the two parties is available outside the intersection
    const std::uint64_t c = rng.uniform_index(3);
    x->bits[i] = c == 1;
    y->bits[i] = c == 2;
  }
}

struct SimulateArgs {
  std::string protocol = "pid";
  std::string transport = "none";  // none | inproc | tcp
  int a = 1, b = 1;
  double n = 64, s = 16, alpha = 1.0;
  int r = 4, trials = 100, k = 1;
  double eta = 1.0, eta_det = 1.0, p_dark = 0.0, epsilon = 0.1;
  bool ideal = false;
  std::string variant = "main";
  std::uint64_t seed = default_seed();
  int listen_port = -1;
  std::string connect_hostport;
  std::string out;
};

apptsched::ChannelModel make_channel(double eta, double eta_det, double p_dark,
                                     bool ideal) {
  if (ideal) return apptsched::ChannelModel::ideal();
  apptsched::ChannelModel ch;
  ch.eta = eta;
  ch.eta_det = eta_det;
  ch.p_dark = p_dark;
  ch.validate();
  return ch;
}

int run_tcp_endpoint(const SimulateArgs& args);

int run_simulate(const SimulateArgs& args) {
  using namespace apptsched;
  if (args.listen_port >= 0 || !args.connect_hostport.empty())
    return run_tcp_endpoint(args);

  const ChannelModel ch =
      make_channel(args.eta, args.eta_det, args.p_dark, args.ideal);
  const std::size_t n = static_cast<std::size_t>(args.n);

  AndParams ap;
  ap.r = args.r;
  ap.alpha_out = args.alpha;
  ap.variant = args.variant == "jrs" ? AndVariant::Jrs : AndVariant::Main;

  json j;
  j["protocol"] = args.protocol;
  j["trials"] = args.trials;
  j["seed"] = args.seed;

  if (args.protocol == "and") {
    int zero = 0, one = 0, inconclusive = 0;
    for (int t = 0; t < args.trials; ++t) {
      RandomStream rng = RandomStream(args.seed, 1).derive(t);
      AndOutcome out;
      if (args.transport == "none") {
        out = ap.variant == AndVariant::Jrs
                  ? apptsched::run_and_jrs(args.a, args.b, ap, ch, rng)
                  : apptsched::run_and_tilde(args.a, args.b, ap, ch, rng);
      } else {
        TransportSpec ts;
        ts.mode = args.transport == "tcp" ? TransportMode::Socket
                                          : TransportMode::InProcess;
        ts.channel = ch;
        SessionInputs in;
        in.a = args.a;
        in.b = args.b;
        in.and_params = ap;
        SessionSeeds seeds{args.seed, args.seed + static_cast<std::uint64_t>(t)};
        out = *run_session(ts, SessionProtocol::AndTilde, in, seeds).and_outcome;
      }
      if (out.value == AndValue::Zero) ++zero;
      else if (out.value == AndValue::One) ++one;
      else ++inconclusive;
    }
    j["zero"] = zero;
    j["one"] = one;
    j["inconclusive"] = inconclusive;
  } else if (args.protocol == "pid") {
    ProtocolParams pp;
    pp.n = n;
    pp.s = static_cast<std::size_t>(args.s);
    pp.and_params = ap;
    int found = 0, empty = 0, wrong = 0;
    double messages = 0.0, reruns = 0.0;
    for (int t = 0; t < args.trials; ++t) {
      RandomStream input_rng = RandomStream(args.seed, 2).derive(t);
      Calendar x(n, false), y(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        x.bits[i] = input_rng.bernoulli(0.5);
        y.bits[i] = input_rng.bernoulli(0.5);
      }
      RandomStream shared = RandomStream(args.seed, 0).derive(t);
      RandomStream noise = RandomStream(args.seed, 1).derive(t);
      const SchedulerOutput out = run_pi_d(x, y, pp, ch, shared, noise);
      if (out.date) {
        ++found;
        if (!(x[*out.date] && y[*out.date])) ++wrong;
      } else {
        ++empty;
      }
      messages += static_cast<double>(out.stats.messages);
      reruns += static_cast<double>(out.stats.reruns);
    }
    j["found"] = found;
    j["empty"] = empty;
    j["wrong"] = wrong;
    j["mean_messages"] = messages / args.trials;
    j["mean_reruns"] = reruns / args.trials;
  } else if (args.protocol == "grover") {
    GroverParams gp;
    gp.n = n;
    gp.k = static_cast<std::size_t>(args.k);
    gp.alpha = args.alpha;
    gp.epsilon = args.epsilon;
    int found = 0, empty = 0, wrong = 0;
    for (int t = 0; t < args.trials; ++t) {
      RandomStream input_rng = RandomStream(args.seed, 2).derive(t);
      Calendar x, y;
      promise_calendars(n, gp.k, input_rng, &x, &y);
      RandomStream noise = RandomStream(args.seed, 1).derive(t);
      const SchedulerOutput out = run_grover(x, y, gp, ch, noise);
      if (out.date) {
        ++found;
        if (!(x[*out.date] && y[*out.date])) ++wrong;
      } else {
        ++empty;
      }
    }
    j["found"] = found;
    j["empty"] = empty;
    j["wrong"] = wrong;
  } else {
    throw ParameterError("unknown protocol: " + args.protocol);
  }
  emit(j, args.out);
  return 0;
}

// Two-process socket mode: this process plays one endpoint of a single
// scheduling session. Calendars are generated from the shared seed so both
// processes agree on the inputs.
int run_tcp_endpoint(const SimulateArgs& args) {
  using namespace apptsched;
  const ChannelModel ch =
      make_channel(args.eta, args.eta_det, args.p_dark, args.ideal);
  const std::size_t n = static_cast<std::size_t>(args.n);

  ProtocolParams pp;
  pp.n = n;
  pp.s = static_cast<std::size_t>(args.s);
  pp.and_params.r = args.r;
  pp.and_params.alpha_out = args.alpha;
  pp.and_params.variant =
      args.variant == "jrs" ? AndVariant::Jrs : AndVariant::Main;

  RandomStream input_rng(args.seed, 2);
  Calendar x(n, false), y(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    x.bits[i] = input_rng.bernoulli(0.5);
    y.bits[i] = input_rng.bernoulli(0.5);
  }

  const std::uint64_t sid = args.seed * 0x9e3779b97f4a7c15ULL + args.seed;
  Transcript transcript;
  json j;
  if (args.listen_port >= 0) {
    const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (lfd < 0) throw TransportError("socket() failed");
    int one = 1;
    ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(static_cast<std::uint16_t>(args.listen_port));
    if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
        ::listen(lfd, 1) < 0)
      throw TransportError("bind/listen failed");
    const int fd = ::accept(lfd, nullptr, nullptr);
    ::close(lfd);
    if (fd < 0) throw TransportError("accept failed");
    SocketLink link(fd);
    Endpoint ep(Party::Alice, link, ch, &transcript, sid);
    RandomStream shared(args.seed, 0);
    RandomStream noise(args.seed, 1);
    const SchedulerOutput out = pi_d_alice(x, pp, ch, shared, noise, ep);
    j["role"] = "alice";
    j["date"] = out.date ? json(*out.date) : json(nullptr);
  } else {
    const auto colon = args.connect_hostport.rfind(':');
    if (colon == std::string::npos)
      throw ParameterError("--connect expects host:port");
    const std::string host = args.connect_hostport.substr(0, colon);
    const int port = std::stoi(args.connect_hostport.substr(colon + 1));
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
      throw ParameterError("--connect expects a numeric IPv4 host");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
      throw TransportError("connect failed");
    SocketLink link(fd);
    Endpoint ep(Party::Bob, link, ch, &transcript, sid);
    RandomStream shared(args.seed, 0);
    const SchedulerOutput out = pi_d_bob(y, pp, ch, shared, ep);
    j["role"] = "bob";
    j["date"] = out.date ? json(*out.date) : json(nullptr);
  }
  j["messages_received"] = transcript.messages().size();
  emit(j, args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent-state appointment-scheduling toolkit"};
  app.require_subcommand(1);

  // --- simulate ---
  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo protocol runs");
  c_sim->add_option("--protocol", sim.protocol, "and | pid | grover");
  c_sim->add_option("--transport", sim.transport, "none | inproc | tcp");
  c_sim->add_option("--a", sim.a);
  c_sim->add_option("--b", sim.b);
  c_sim->add_option("--n", sim.n);
  c_sim->add_option("--s", sim.s);
  c_sim->add_option("--r", sim.r);
  c_sim->add_option("--k", sim.k);
  c_sim->add_option("--alpha", sim.alpha);
  c_sim->add_option("--epsilon", sim.epsilon);
  c_sim->add_option("--eta", sim.eta);
  c_sim->add_option("--eta-det", sim.eta_det);
  c_sim->add_option("--pdark", sim.p_dark);
  c_sim->add_flag("--ideal", sim.ideal, "noiseless channel and detectors");
  c_sim->add_option("--variant", sim.variant, "main | jrs");
  c_sim->add_option("--trials", sim.trials);
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--listen", sim.listen_port,
                    "run the Alice endpoint of one session on this port");
  c_sim->add_option("--connect", sim.connect_hostport,
                    "run the Bob endpoint, connecting to host:port");
  c_sim->add_option("--out", sim.out, "write JSON here instead of stdout");

  // --- leakage ---
  struct {
    std::string variant = "experimental";
    double n = 1e9, s = 1e6, alpha = 1.0;
    int r = 50, reps = 1, K = 0;
    double eta = 1.0, eta_det = 1.0, p_dark = 0.0, rounds = 0.0, delta = 0.0;
    bool allow_oor = false;
    std::string out;
  } lk;
  auto* c_lk = app.add_subcommand("leakage", "closed-form leakage bounds");
  c_lk->add_option("--variant", lk.variant,
                   "ideal | experimental | jrs | jrs-lossy | n-over-r | grover");
  c_lk->add_option("--n", lk.n);
  c_lk->add_option("--s", lk.s);
  c_lk->add_option("--r", lk.r);
  c_lk->add_option("--alpha", lk.alpha);
  c_lk->add_option("--eta", lk.eta);
  c_lk->add_option("--eta-det", lk.eta_det);
  c_lk->add_option("--pdark", lk.p_dark);
  c_lk->add_option("--reps", lk.reps, "repetitions for n-over-r");
  c_lk->add_option("--rounds", lk.rounds, "quantum hops for grover");
  c_lk->add_option("--reps-k", lk.K, "classical repetitions K for grover");
  c_lk->add_option("--delta", lk.delta, "bin width for grover (0 = default)");
  c_lk->add_flag("--allow-out-of-range", lk.allow_oor,
                 "evaluate outside the proven (n, s) range");
  c_lk->add_option("--out", lk.out);

  // --- optimize ---
  struct {
    double n = 1e9;
    double eta = 1.0, eta_det = 1.0, p_dark = 0.0;
    std::string s_policy = "grid", variant = "main";
    int r_min = 1, r_max = 5000;
    bool zero_error = false, allow_oor = false;
    std::string out;
  } op;
  auto* c_op = app.add_subcommand("optimize", "minimize the bound over (r, alpha, s)");
  c_op->add_option("--n", op.n);
  c_op->add_option("--eta", op.eta);
  c_op->add_option("--eta-det", op.eta_det);
  c_op->add_option("--pdark", op.p_dark);
  c_op->add_option("--s-policy", op.s_policy, "frac:F | grid | two-thirds");
  c_op->add_option("--variant", op.variant, "main | jrs");
  c_op->add_option("--r-min", op.r_min);
  c_op->add_option("--r-max", op.r_max);
  c_op->add_flag("--zero-error", op.zero_error,
                 "compare against the zero-error classical bound");
  c_op->add_flag("--allow-out-of-range", op.allow_oor);
  c_op->add_option("--out", op.out);

  // --- sweep ---
  struct {
    std::string param = "eta";
    double from = 0.97, to = 1.0;
    int steps = 10;
    bool log_scale = false;
    double n = 1e9;
    double eta = 1.0, eta_det = 1.0, p_dark = 0.0;
    std::string s_policy = "grid", variant = "main";
    int r_min = 1, r_max = 5000;
    bool zero_error = false, allow_oor = false;
    std::string out;
  } sw;
  auto* c_sw = app.add_subcommand("sweep", "optimize along a parameter grid (CSV)");
  c_sw->add_option("--param", sw.param, "eta | eta_det | pdark | n");
  c_sw->add_option("--from", sw.from)->required();
  c_sw->add_option("--to", sw.to)->required();
  c_sw->add_option("--steps", sw.steps);
  c_sw->add_flag("--log", sw.log_scale, "geometric spacing");
  c_sw->add_option("--n", sw.n);
  c_sw->add_option("--eta", sw.eta);
  c_sw->add_option("--eta-det", sw.eta_det);
  c_sw->add_option("--pdark", sw.p_dark);
  c_sw->add_option("--s-policy", sw.s_policy);
  c_sw->add_option("--variant", sw.variant);
  c_sw->add_option("--r-min", sw.r_min);
  c_sw->add_option("--r-max", sw.r_max);
  c_sw->add_flag("--zero-error", sw.zero_error);
  c_sw->add_flag("--allow-out-of-range", sw.allow_oor);
  c_sw->add_option("--out", sw.out, "write CSV here instead of stdout");

  // --- classical ---
  struct {
    double n = 1e9, epsilon = 0.0;
    std::string out;
  } cl;
  auto* c_cl = app.add_subcommand("classical", "classical lower bounds");
  c_cl->add_option("--n", cl.n);
  c_cl->add_option("--epsilon", cl.epsilon);
  c_cl->add_option("--out", cl.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_sim->parsed()) return run_simulate(sim);

    if (c_lk->parsed()) {
      using namespace apptsched;
      ChannelModel ch;
      ch.eta = lk.eta;
      ch.eta_det = lk.eta_det;
      ch.p_dark = lk.p_dark;
      LeakageBound b;
      if (lk.variant == "ideal") {
        b = qic_bound_ideal(lk.n, lk.s, lk.r, lk.alpha, lk.allow_oor);
      } else if (lk.variant == "experimental") {
        b = qic_bound_experimental(lk.n, lk.s, lk.r, lk.alpha, ch, lk.allow_oor);
      } else if (lk.variant == "jrs") {
        b = qic_bound_jrs(lk.n, lk.s, lk.r, lk.alpha, lk.allow_oor);
      } else if (lk.variant == "jrs-lossy") {
        b = qic_bound_jrs_lossy(lk.n, lk.s, lk.r, lk.alpha, ch, lk.allow_oor);
      } else if (lk.variant == "n-over-r") {
        b = qic_bound_n_over_r(lk.n, lk.r, lk.alpha, ch, lk.reps);
      } else if (lk.variant == "grover") {
        BinningParams bp;
        bp.delta = lk.delta;
        b = grover_leakage_bound(lk.n, lk.alpha, lk.rounds, bp, lk.K);
      } else {
        throw ParameterError("unknown leakage variant: " + lk.variant);
      }
      emit(bound_json(b), lk.out);
      return 0;
    }

    if (c_op->parsed()) {
      using namespace apptsched;
      ChannelModel ch;
      ch.eta = op.eta;
      ch.eta_det = op.eta_det;
      ch.p_dark = op.p_dark;
      OptConfig cfg;
      cfg.r_min = op.r_min;
      cfg.r_max = op.r_max;
      cfg.zero_error_classical = op.zero_error;
      cfg.allow_out_of_range = op.allow_oor;
      const OptResult r = optimize_params(
          op.n, ch, parse_s_policy(op.s_policy, op.n),
          op.variant == "jrs" ? AndVariant::Jrs : AndVariant::Main, cfg);
      emit(json{{"r", r.best_r},
                {"alpha", r.best_alpha},
                {"s", r.best_s},
                {"qic_bits", r.bound_bits},
                {"classical_bits", r.classical_bits},
                {"ratio", r.ratio}},
           op.out);
      return 0;
    }

    if (c_sw->parsed()) {
      using namespace apptsched;
      SweepSpec spec;
      spec.param = sw.param;
      spec.lo = sw.from;
      spec.hi = sw.to;
      spec.steps = sw.steps;
      spec.log_scale = sw.log_scale;
      spec.n = sw.n;
      spec.ch.eta = sw.eta;
      spec.ch.eta_det = sw.eta_det;
      spec.ch.p_dark = sw.p_dark;
      spec.s_policy = parse_s_policy(sw.s_policy, sw.n);
      spec.variant = sw.variant == "jrs" ? AndVariant::Jrs : AndVariant::Main;
      spec.config.r_min = sw.r_min;
      spec.config.r_max = sw.r_max;
      spec.config.zero_error_classical = sw.zero_error;
      spec.config.allow_out_of_range = sw.allow_oor;
      const std::string csv = sweep_to_csv(sweep(spec));
      if (sw.out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(sw.out);
        f << csv;
      }
      return 0;
    }

    if (c_cl->parsed()) {
      const apptsched::ClassicalBound b =
          apptsched::classical_lower_bound(cl.n, cl.epsilon);
      emit(json{{"n", cl.n}, {"epsilon", b.epsilon}, {"bits", b.bits}}, cl.out);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

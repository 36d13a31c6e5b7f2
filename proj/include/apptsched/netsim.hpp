#ifndef APPTSCHED_NETSIM_HPP
#define APPTSCHED_NETSIM_HPP

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "apptsched/and_protocol.hpp"
#include "apptsched/errors.hpp"
#include "apptsched/grover.hpp"
#include "apptsched/optics.hpp"
#include "apptsched/rng.hpp"
#include "apptsched/scheduler.hpp"

namespace apptsched {

enum class Party { Alice, Bob };
enum class MessageKind { Quantum, Classical };

inline Party other(Party p) { return p == Party::Alice ? Party::Bob : Party::Alice; }

/// One message on the wire. Quantum messages carry mode amplitudes (the
/// complete classical description of the coherent state); classical messages
/// carry bits.
struct WireMessage {
  std::uint64_t session_id = 0;
  int round_index = 0;
  Party sender = Party::Alice;
  MessageKind kind = MessageKind::Classical;
  std::vector<Amplitude> modes;
  std::vector<bool> payload;

  bool operator==(const WireMessage& o) const {
    return session_id == o.session_id && round_index == o.round_index &&
           sender == o.sender && kind == o.kind && modes == o.modes &&
           payload == o.payload;
  }
};

/// Frame layout: 4-byte big-endian payload length, then a canonical UTF-8
/// text payload — a key-sorted object with 17-significant-digit decimal
/// floats — so equal messages always encode to equal bytes.
inline std::string encode_message(const WireMessage& m) {
  for (const Amplitude& a : m.modes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw ParameterError("encode_message: non-finite amplitude");
  }
  std::string body = "{\"kind\":\"";
  body += (m.kind == MessageKind::Quantum) ? "quantum" : "classical";
  body += "\",\"modes\":[";
  char buf[64];
  for (std::size_t i = 0; i < m.modes.size(); ++i) {
    if (i) body += ',';
    std::snprintf(buf, sizeof(buf), "[%.17g,%.17g]", m.modes[i].real(),
                  m.modes[i].imag());
    body += buf;
  }
  body += "],\"payload\":[";
  for (std::size_t i = 0; i < m.payload.size(); ++i) {
    if (i) body += ',';
    body += m.payload[i] ? '1' : '0';
  }
  body += "],\"round\":";
  body += std::to_string(m.round_index);
  body += ",\"sender\":\"";
  body += (m.sender == Party::Alice) ? "alice" : "bob";
  body += "\",\"session\":";
  body += std::to_string(m.session_id);
  body += '}';

  std::string frame(4, '\0');
  const std::uint32_t len = static_cast<std::uint32_t>(body.size());
  frame[0] = static_cast<char>((len >> 24) & 0xff);
  frame[1] = static_cast<char>((len >> 16) & 0xff);
  frame[2] = static_cast<char>((len >> 8) & 0xff);
  frame[3] = static_cast<char>(len & 0xff);
  frame += body;
  return frame;
}

inline WireMessage decode_message(const std::string& frame) {
  if (frame.size() < 4) throw TransportError("decode_message: short frame");
  const auto u = [&](int i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(frame[i]));
  };
  const std::uint32_t len = (u(0) << 24) | (u(1) << 16) | (u(2) << 8) | u(3);
  if (frame.size() != 4 + static_cast<std::size_t>(len))
    throw TransportError("decode_message: length mismatch");
  nlohmann::json j = nlohmann::json::parse(frame.substr(4));
  WireMessage m;
  m.session_id = j.at("session").get<std::uint64_t>();
  m.round_index = j.at("round").get<int>();
  m.sender = j.at("sender").get<std::string>() == "alice" ? Party::Alice
                                                          : Party::Bob;
  m.kind = j.at("kind").get<std::string>() == "quantum" ? MessageKind::Quantum
                                                        : MessageKind::Classical;
  for (const auto& p : j.at("modes"))
    m.modes.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& b : j.at("payload")) m.payload.push_back(b.get<int>() != 0);
  return m;
}

/// Delivered messages in order, recorded by the receiving endpoint.
class Transcript {
 public:
  void record(const std::string& frame, const WireMessage& m) {
    std::lock_guard<std::mutex> g(mu_);
    frames_.push_back(frame);
    messages_.push_back(m);
  }
  std::vector<std::string> frames() const {
    std::lock_guard<std::mutex> g(mu_);
    return frames_;
  }
  std::vector<WireMessage> messages() const {
    std::lock_guard<std::mutex> g(mu_);
    return messages_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> frames_;
  std::vector<WireMessage> messages_;
};

/// Raw framed byte pipe between the two endpoints.
class Link {
 public:
  virtual ~Link() = default;
  virtual void send_frame(const std::string& bytes) = 0;
  virtual std::string recv_frame() = 0;
  virtual void close() = 0;
};

struct InProcessPipes {
  std::mutex mu;
  std::condition_variable cv;
  std::queue<std::string> to_alice;
  std::queue<std::string> to_bob;
  bool closed = false;
};

class InProcessLink : public Link {
 public:
  InProcessLink(InProcessPipes* pipes, Party me) : pipes_(pipes), me_(me) {}

  void send_frame(const std::string& bytes) override {
    std::lock_guard<std::mutex> g(pipes_->mu);
    if (pipes_->closed) throw TransportError("in-process link closed");
    (me_ == Party::Alice ? pipes_->to_bob : pipes_->to_alice).push(bytes);
    pipes_->cv.notify_all();
  }

  std::string recv_frame() override {
    std::unique_lock<std::mutex> g(pipes_->mu);
    auto& q = me_ == Party::Alice ? pipes_->to_alice : pipes_->to_bob;
    pipes_->cv.wait(g, [&] { return !q.empty() || pipes_->closed; });
    if (q.empty()) throw TransportError("in-process link closed");
    std::string out = q.front();
    q.pop();
    return out;
  }

  void close() override {
    std::lock_guard<std::mutex> g(pipes_->mu);
    pipes_->closed = true;
    pipes_->cv.notify_all();
  }

 private:
  InProcessPipes* pipes_;
  Party me_;
};

class SocketLink : public Link {
 public:
  explicit SocketLink(int fd) : fd_(fd) {}
  ~SocketLink() override { close(); }
  SocketLink(const SocketLink&) = delete;
  SocketLink& operator=(const SocketLink&) = delete;

  void send_frame(const std::string& bytes) override {
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t k = ::send(fd_, bytes.data() + off, bytes.size() - off, 0);
      if (k <= 0) throw TransportError("socket send failed");
      off += static_cast<std::size_t>(k);
    }
  }

  std::string recv_frame() override {
    std::string head = read_exact(4);
    const auto u = [&](int i) {
      return static_cast<std::uint32_t>(static_cast<unsigned char>(head[i]));
    };
    const std::uint32_t len = (u(0) << 24) | (u(1) << 16) | (u(2) << 8) | u(3);
    return head + read_exact(len);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  std::string read_exact(std::size_t n) {
    std::string out(n, '\0');
    std::size_t off = 0;
    while (off < n) {
      const ssize_t k = ::recv(fd_, &out[off], n - off, 0);
      if (k <= 0) throw TransportError("socket recv failed or closed");
      off += static_cast<std::size_t>(k);
    }
    return out;
  }
  int fd_ = -1;
};

/// One party's view of the session: sequences messages, applies channel loss
/// to outgoing quantum states (the transport's impairment), records received
/// messages, and enforces the strictly increasing round index.
class Endpoint {
 public:
  Endpoint(Party me, Link& link, const ChannelModel& ch,
           Transcript* transcript, std::uint64_t session_id)
      : me_(me), link_(link), ch_(ch), transcript_(transcript),
        session_id_(session_id) {}

  Party me() const { return me_; }
  const ChannelModel& channel() const { return ch_; }

  void send_quantum(const ModeAmplitudes& state) {
    WireMessage m;
    m.kind = MessageKind::Quantum;
    const ModeAmplitudes sent = apply_loss(state, ch_.eta);
    m.modes = sent.amps;
    send(m);
  }

  void send_classical(const std::vector<bool>& bits) {
    WireMessage m;
    m.kind = MessageKind::Classical;
    m.payload = bits;
    send(m);
  }

  ModeAmplitudes recv_quantum() {
    WireMessage m = recv();
    if (m.kind != MessageKind::Quantum)
      throw ProtocolDesyncError("expected a quantum message");
    ModeAmplitudes s;
    s.amps = m.modes;
    return s;
  }

  std::vector<bool> recv_classical() {
    WireMessage m = recv();
    if (m.kind != MessageKind::Classical)
      throw ProtocolDesyncError("expected a classical message");
    return m.payload;
  }

 private:
  void send(WireMessage& m) {
    m.session_id = session_id_;
    m.round_index = round_++;
    m.sender = me_;
    link_.send_frame(encode_message(m));
  }

  WireMessage recv() {
    const std::string frame = link_.recv_frame();
    WireMessage m = decode_message(frame);
    if (m.session_id != session_id_)
      throw ProtocolDesyncError("session id mismatch");
    if (m.sender == me_) throw ProtocolDesyncError("received own message");
    if (m.round_index != round_)
      throw ProtocolDesyncError("round index out of order");
    ++round_;
    if (transcript_) transcript_->record(frame, m);
    return m;
  }

  Party me_;
  Link& link_;
  ChannelModel ch_;
  Transcript* transcript_;
  std::uint64_t session_id_;
  int round_ = 0;
};

namespace netdetail {

inline std::vector<bool> pack_uint(std::uint64_t v, int width) {
  std::vector<bool> bits(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i)
    bits[static_cast<std::size_t>(i)] = ((v >> (width - 1 - i)) & 1u) != 0;
  return bits;
}

inline std::uint64_t unpack_uint(const std::vector<bool>& bits,
                                 std::size_t off, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v = (v << 1) | (bits.at(off + static_cast<std::size_t>(i)) ? 1u : 0u);
  return v;
}

inline int index_width(std::size_t n) {
  int w = 1;
  while ((std::uint64_t(1) << w) < n) ++w;
  return w;
}

inline std::vector<bool> encode_and_value(AndValue v) {
  switch (v) {
    case AndValue::Zero: return {false, false};
    case AndValue::One: return {false, true};
    default: return {true, false};
  }
}

inline AndValue decode_and_value(const std::vector<bool>& bits) {
  if (bits.size() != 2) throw ProtocolDesyncError("bad result message");
  if (bits[0]) return AndValue::Inconclusive;
  return bits[1] ? AndValue::One : AndValue::Zero;
}

}  // namespace netdetail

// --- AND endpoints -------------------------------------------------------
// These mirror run_and_tilde / run_and_jrs operation for operation (and in
// particular consume the random stream identically), with each hop routed
// through the endpoint instead of a local apply_loss.

inline AndOutcome and_tilde_alice(int a, const AndParams& p,
                                  const ChannelModel& ch, RandomStream& rng,
                                  Endpoint& ep) {
  p.validate();
  const bool jrs = p.variant == AndVariant::Jrs;
  const double theta =
      jrs ? M_PI / (4.0 * p.r) : M_PI / (2.0 * p.r);
  const double alpha0 =
      p.constant_alpha ? p.alpha_out : p.alpha_out / std::pow(ch.eta, p.r);
  ModeAmplitudes state(alpha0, 0.0);
  for (int i = 1; i <= p.r; ++i) {
    if (a == 1) {
      if (jrs) {
        state = apply_beamsplitter(state, -theta);
        state.amps[1] = -state.amps[1];
        state = apply_beamsplitter(state, theta);
      } else {
        state = apply_beamsplitter(state, theta);
      }
    }
    ep.send_quantum(state);
    state = ep.recv_quantum();
  }
  AndOutcome out;
  out.click_pattern = detect(state, ch, rng);
  out.value = out.click_pattern.clicks[0] == out.click_pattern.clicks[1]
                  ? AndValue::Inconclusive
                  : (out.click_pattern.clicks[1] ? AndValue::One
                                                 : AndValue::Zero);
  out.transcript_len = 2 * p.r + 1;
  ep.send_classical(netdetail::encode_and_value(out.value));
  return out;
}

inline AndValue and_tilde_bob(int b, const AndParams& p,
                              const ChannelModel& ch, Endpoint& ep) {
  p.validate();
  const bool jrs = p.variant == AndVariant::Jrs;
  std::vector<double> sched;
  if (!jrs) {
    sched = p.constant_alpha
                ? std::vector<double>(static_cast<std::size_t>(p.r) + 1,
                                      p.alpha_out)
                : amplitude_schedule(p.alpha_out, ch.eta, p.r);
  }
  for (int i = 1; i <= p.r; ++i) {
    ModeAmplitudes state = ep.recv_quantum();
    if (jrs) {
      if (b == 1) state.amps[1] = -state.amps[1];
    } else if (b == 0) {
      state = ModeAmplitudes(sched[static_cast<std::size_t>(i)], 0.0);
    }
    ep.send_quantum(state);
  }
  return netdetail::decode_and_value(ep.recv_classical());
}

/// Conclusive wrapper over the wire: rerun until Zero or One, verify a raw
/// One by exchanging the input bits.
inline int and_alice(int a, const AndParams& p, const ChannelModel& ch,
                     RandomStream& rng, Endpoint& ep, ExecStats& stats) {
  for (int attempt = 0; attempt < p.max_reruns; ++attempt) {
    const AndOutcome out = and_tilde_alice(a, p, ch, rng, ep);
    stats.messages += out.transcript_len;
    stats.detector_events += 2;
    if (out.value == AndValue::Inconclusive) {
      ++stats.reruns;
      continue;
    }
    if (out.value == AndValue::Zero) return 0;
    ep.send_classical({a == 1});
    const std::vector<bool> bb = ep.recv_classical();
    stats.classical_bits += 2.0;
    return (a == 1 && bb.at(0)) ? 1 : 0;
  }
  throw RerunBudgetError("and_alice: rerun budget exhausted");
}

inline int and_bob(int b, const AndParams& p, const ChannelModel& ch,
                   Endpoint& ep, ExecStats& stats) {
  for (int attempt = 0; attempt < p.max_reruns; ++attempt) {
    const AndValue v = and_tilde_bob(b, p, ch, ep);
    stats.messages += 2 * p.r + 1;
    if (v == AndValue::Inconclusive) {
      ++stats.reruns;
      continue;
    }
    if (v == AndValue::Zero) return 0;
    const std::vector<bool> aa = ep.recv_classical();
    ep.send_classical({b == 1});
    stats.classical_bits += 2.0;
    return (aa.at(0) && b == 1) ? 1 : 0;
  }
  throw RerunBudgetError("and_bob: rerun budget exhausted");
}

// --- Scheduler endpoints -------------------------------------------------

inline SchedulerOutput pi_d_alice(const Calendar& x, const ProtocolParams& p,
                                  const ChannelModel& ch,
                                  RandomStream& shared_rng, RandomStream& rng,
                                  Endpoint& ep) {
  p.validate();
  if (x.size() != p.n) throw DimensionError("pi_d_alice: calendar length");
  SchedulerOutput out;
  const std::vector<std::size_t> draws = subsample(p.n, p.s, shared_rng);

  std::vector<bool> disclosed(draws.size());
  for (std::size_t j = 0; j < draws.size(); ++j) disclosed[j] = x[draws[j]];
  ep.send_classical(disclosed);
  out.stats.classical_bits += static_cast<double>(p.s);

  const int w = netdetail::index_width(p.n);
  const std::vector<bool> reply = ep.recv_classical();
  if (reply.at(0)) {
    out.date = netdetail::unpack_uint(reply, 1, w);
    out.stats.classical_bits += std::log2(static_cast<double>(p.s)) + 1.0;
    return out;
  }

  std::vector<bool> sampled(p.n, false);
  for (std::size_t d : draws) sampled[d] = true;
  std::optional<std::size_t> best;
  for (std::size_t d = 0; d < p.n; ++d) {
    if (sampled[d]) continue;
    RandomStream date_rng = rng.derive(d);
    const int v =
        and_alice(x[d] ? 1 : 0, p.and_params, ch, date_rng, ep, out.stats);
    if (v == 1 && !best) best = d;
  }
  out.date = best;
  return out;
}

inline SchedulerOutput pi_d_bob(const Calendar& y, const ProtocolParams& p,
                                const ChannelModel& ch,
                                RandomStream& shared_rng, Endpoint& ep) {
  p.validate();
  if (y.size() != p.n) throw DimensionError("pi_d_bob: calendar length");
  SchedulerOutput out;
  const std::vector<std::size_t> draws = subsample(p.n, p.s, shared_rng);

  const std::vector<bool> disclosed = ep.recv_classical();
  std::optional<std::size_t> hit;
  for (std::size_t j = 0; j < draws.size(); ++j) {
    if (disclosed.at(j) && y[draws[j]] && (!hit || draws[j] < *hit))
      hit = draws[j];
  }
  const int w = netdetail::index_width(p.n);
  if (hit) {
    std::vector<bool> reply = {true};
    const std::vector<bool> idx = netdetail::pack_uint(*hit, w);
    reply.insert(reply.end(), idx.begin(), idx.end());
    ep.send_classical(reply);
    out.date = hit;
    return out;
  }
  ep.send_classical({false});

  std::vector<bool> sampled(p.n, false);
  for (std::size_t d : draws) sampled[d] = true;
  std::optional<std::size_t> best;
  for (std::size_t d = 0; d < p.n; ++d) {
    if (sampled[d]) continue;
    const int v = and_bob(y[d] ? 1 : 0, p.and_params, ch, ep, out.stats);
    if (v == 1 && !best) best = d;
  }
  out.date = best;
  return out;
}

// --- Grover endpoints ----------------------------------------------------

inline SchedulerOutput grover_alice(const Calendar& x, const GroverParams& gp,
                                    const ChannelModel& ch, RandomStream& rng,
                                    Endpoint& ep) {
  gp.validate();
  if (x.size() != gp.n) throw DimensionError("grover_alice: calendar length");
  SchedulerOutput out;
  if (gp.k == 0) return out;
  const int r = grover_iterations(gp.k, gp.n);
  const int K = gp.max_reps > 0
                    ? gp.max_reps
                    : grover_repetitions(gp.k, gp.n, gp.alpha, gp.epsilon);
  const int w = netdetail::index_width(gp.n);

  for (int rep = 0; rep < K; ++rep) {
    ModeAmplitudes state;
    state.amps.assign(gp.n, Amplitude(gp.alpha / std::sqrt(gp.n), 0.0));
    for (int l = 0; l < r; ++l) {
      ModeAmplitudes reg;
      reg.amps.assign(2 * gp.n, Amplitude(0.0, 0.0));
      for (std::size_t i = 0; i < gp.n; ++i)
        reg.amps[2 * i + (x[i] ? 1 : 0)] = state.amps[i];
      ep.send_quantum(reg);
      reg = ep.recv_quantum();
      for (std::size_t i = 0; i < gp.n; ++i)
        state.amps[i] = reg.amps[2 * i + (x[i] ? 1 : 0)];
      out.stats.messages += 2;
      state = grover_diffusion(state);
    }
    const ClickPattern cp = detect(state, ch, rng);
    out.stats.detector_events += static_cast<std::int64_t>(gp.n);
    std::vector<std::size_t> clicked;
    for (std::size_t i = 0; i < gp.n; ++i)
      if (cp.clicks[i]) clicked.push_back(i);
    if (clicked.empty()) {
      ep.send_classical({false});
      out.stats.messages += 1;
      out.stats.classical_bits += 1.0;
      ++out.stats.reruns;
      continue;
    }
    const std::size_t i = clicked[rng.uniform_index(clicked.size())];
    std::vector<bool> msg = {true};
    const std::vector<bool> idx = netdetail::pack_uint(i, w);
    msg.insert(msg.end(), idx.begin(), idx.end());
    msg.push_back(x[i]);
    ep.send_classical(msg);
    const std::vector<bool> yi = ep.recv_classical();
    out.stats.messages += 2;
    out.stats.classical_bits += w + 2.0;
    if (x[i] && yi.at(0)) {
      out.date = i;
      return out;
    }
    ++out.stats.reruns;
  }
  return out;
}

inline SchedulerOutput grover_bob(const Calendar& y, const GroverParams& gp,
                                  const ChannelModel& ch, Endpoint& ep) {
  gp.validate();
  if (y.size() != gp.n) throw DimensionError("grover_bob: calendar length");
  SchedulerOutput out;
  if (gp.k == 0) return out;
  const int r = grover_iterations(gp.k, gp.n);
  const int K = gp.max_reps > 0
                    ? gp.max_reps
                    : grover_repetitions(gp.k, gp.n, gp.alpha, gp.epsilon);
  const int w = netdetail::index_width(gp.n);
  (void)ch;

  for (int rep = 0; rep < K; ++rep) {
    for (int l = 0; l < r; ++l) {
      ModeAmplitudes reg = ep.recv_quantum();
      for (std::size_t i = 0; i < gp.n; ++i)
        if (y[i]) reg.amps[2 * i + 1] = -reg.amps[2 * i + 1];
      ep.send_quantum(reg);
    }
    const std::vector<bool> msg = ep.recv_classical();
    if (!msg.at(0)) continue;  // no clicks announced
    const std::size_t i =
        static_cast<std::size_t>(netdetail::unpack_uint(msg, 1, w));
    const bool xi = msg.at(1 + static_cast<std::size_t>(w));
    ep.send_classical({y[i]});
    if (xi && y[i]) {
      out.date = i;
      return out;
    }
  }
  return out;
}

// --- Session driver ------------------------------------------------------

enum class SessionProtocol { AndTilde, PiD, Grover };
enum class TransportMode { InProcess, Socket };

struct TransportSpec {
  TransportMode mode = TransportMode::InProcess;
  ChannelModel channel;
  int port = 0;  // Socket mode: 0 picks an ephemeral loopback port
};

struct SessionInputs {
  // AndTilde
  int a = 0;
  int b = 0;
  AndParams and_params;
  // PiD
  Calendar x;
  Calendar y;
  ProtocolParams proto_params;
  // Grover
  GroverParams grover_params;
};

struct SessionSeeds {
  std::uint64_t shared_seed = 1;
  std::uint64_t noise_seed = 2;
};

struct SessionResult {
  std::optional<AndOutcome> and_outcome;          // AndTilde
  std::optional<SchedulerOutput> alice_output;    // PiD / Grover
  std::optional<SchedulerOutput> bob_output;
  std::vector<WireMessage> transcript;
  std::vector<std::string> transcript_frames;
};

namespace netdetail {

struct LinkPair {
  std::unique_ptr<Link> alice;
  std::unique_ptr<Link> bob;
  std::unique_ptr<InProcessPipes> pipes;
};

inline LinkPair make_links(const TransportSpec& ts) {
  LinkPair lp;
  if (ts.mode == TransportMode::InProcess) {
    lp.pipes = std::make_unique<InProcessPipes>();
    lp.alice = std::make_unique<InProcessLink>(lp.pipes.get(), Party::Alice);
    lp.bob = std::make_unique<InProcessLink>(lp.pipes.get(), Party::Bob);
    return lp;
  }
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(ts.port));
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(lfd, 1) < 0) {
    ::close(lfd);
    throw TransportError("bind/listen failed");
  }
  socklen_t alen = sizeof(addr);
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &alen);

  const int cfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (cfd < 0) {
    ::close(lfd);
    throw TransportError("socket() failed");
  }
  if (::connect(cfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(lfd);
    ::close(cfd);
    throw TransportError("connect failed");
  }
  const int afd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (afd < 0) {
    ::close(cfd);
    throw TransportError("accept failed");
  }
  lp.alice = std::make_unique<SocketLink>(afd);
  lp.bob = std::make_unique<SocketLink>(cfd);
  return lp;
}

}  // namespace netdetail

/// Run a protocol as two endpoints over the chosen transport. Alice's random
/// streams are RandomStream(noise_seed, 1) for detection noise and
/// RandomStream(shared_seed, 0) for the shared subsample; Bob holds an
/// identical copy of the shared stream.
inline SessionResult run_session(const TransportSpec& ts,
                                 SessionProtocol protocol,
                                 const SessionInputs& in,
                                 const SessionSeeds& seeds) {
  ts.channel.validate();
  netdetail::LinkPair lp = netdetail::make_links(ts);
  Transcript transcript;
  const std::uint64_t sid = seeds.shared_seed * 0x9e3779b97f4a7c15ULL +
                            seeds.noise_seed;
  Endpoint ea(Party::Alice, *lp.alice, ts.channel, &transcript, sid);
  Endpoint eb(Party::Bob, *lp.bob, ts.channel, &transcript, sid);

  SessionResult res;
  std::exception_ptr bob_err;
  std::thread bob_thread([&] {
    try {
      RandomStream shared(seeds.shared_seed, 0);
      switch (protocol) {
        case SessionProtocol::AndTilde:
          and_tilde_bob(in.b, in.and_params, ts.channel, eb);
          break;
        case SessionProtocol::PiD:
          res.bob_output =
              pi_d_bob(in.y, in.proto_params, ts.channel, shared, eb);
          break;
        case SessionProtocol::Grover:
          res.bob_output = grover_bob(in.y, in.grover_params, ts.channel, eb);
          break;
      }
    } catch (...) {
      bob_err = std::current_exception();
      lp.alice->close();
      lp.bob->close();
    }
  });

  std::exception_ptr alice_err;
  try {
    RandomStream shared(seeds.shared_seed, 0);
    RandomStream noise(seeds.noise_seed, 1);
    switch (protocol) {
      case SessionProtocol::AndTilde:
        res.and_outcome =
            and_tilde_alice(in.a, in.and_params, ts.channel, noise, ea);
        break;
      case SessionProtocol::PiD:
        res.alice_output = pi_d_alice(in.x, in.proto_params, ts.channel,
                                      shared, noise, ea);
        break;
      case SessionProtocol::Grover:
        res.alice_output =
            grover_alice(in.x, in.grover_params, ts.channel, noise, ea);
        break;
    }
  } catch (...) {
    alice_err = std::current_exception();
    lp.alice->close();
    lp.bob->close();
  }
  bob_thread.join();
  res.transcript = transcript.messages();
  res.transcript_frames = transcript.frames();
  if (alice_err) std::rethrow_exception(alice_err);
  if (bob_err) std::rethrow_exception(bob_err);
  return res;
}

}  // namespace apptsched

#endif

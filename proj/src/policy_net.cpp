#include "evasion/policy_net.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "evasion/errors.hpp"
#include "evasion/format.hpp"
#include "evasion/random.hpp"

namespace evasion {

void Architecture::validate(std::optional<std::size_t> in,
                            std::optional<std::size_t> out) const {
  if (widths.size() < 2) throw ShapeError("architecture needs >= 2 layers");
  for (std::size_t w : widths) {
    if (w == 0) throw ShapeError("architecture widths must be positive");
  }
  if (in && widths.front() != *in) {
    throw ShapeError("architecture input width must be " +
                     std::to_string(*in));
  }
  if (out && widths.back() != *out) {
    throw ShapeError("architecture output width must be " +
                     std::to_string(*out));
  }
}

std::string Architecture::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(widths[i]);
  }
  return s + "]";
}

std::size_t param_count(const Architecture& arch) {
  arch.validate();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < arch.widths.size(); ++l) {
    n += arch.widths[l] * arch.widths[l + 1];
  }
  return n;
}

void Network::validate() const {
  if (weights.size() != param_count(arch)) {
    throw ShapeError("network has " + std::to_string(weights.size()) +
                     " weights, architecture needs " +
                     std::to_string(param_count(arch)));
  }
}

Network init_network(const Architecture& arch, std::uint64_t seed) {
  Network net{arch, {}};
  net.weights.reserve(param_count(arch));
  Rng rng(seed);
  for (std::size_t l = 0; l < arch.layers(); ++l) {
    const double fan_in = static_cast<double>(arch.widths[l]);
    const double fan_out = static_cast<double>(arch.widths[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    const std::size_t n = arch.widths[l] * arch.widths[l + 1];
    for (std::size_t i = 0; i < n; ++i) {
      net.weights.push_back(uniform(rng, -limit, limit));
    }
  }
  return net;
}

PolicyParameters init_policy(const Architecture& arch, std::uint64_t seed) {
  PolicyParameters p;
  p.net = init_network(arch, seed);
  const std::size_t last =
      arch.widths[arch.layers() - 1] * arch.widths[arch.layers()];
  for (auto it = p.net.weights.end() - static_cast<std::ptrdiff_t>(last);
       it != p.net.weights.end(); ++it) {
    *it *= kPolicyOutputInitScale;
  }
  p.log_std = {std::log(0.5), std::log(0.5)};
  return p;
}

std::vector<double> forward(const Network& net, std::span<const double> input,
                            ForwardCache* cache) {
  const auto& widths = net.arch.widths;
  if (input.size() != widths.front()) {
    throw ShapeError("forward: expected " + std::to_string(widths.front()) +
                     " inputs, got " + std::to_string(input.size()));
  }
  for (double v : input) {
    if (!std::isfinite(v)) throw NumericFault("non-finite network input", -1);
  }
  if (cache) {
    cache->activations.assign(1, std::vector<double>(input.begin(), input.end()));
  }
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> y;
  const double* w = net.weights.data();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const bool hidden = l + 2 < widths.size();
    y.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w + o * in;
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = hidden && acc < 0.0 ? 0.0 : acc;
    }
    w += in * out;
    if (cache) cache->activations.push_back(y);
    x.swap(y);
  }
  return x;
}

void backward_accumulate(const Network& net, const ForwardCache& cache,
                         std::span<const double> upstream,
                         std::span<double> grad) {
  const auto& widths = net.arch.widths;
  if (!cache.valid() || cache.activations.size() != widths.size()) {
    throw UsageError("backward called without a matching forward cache");
  }
  if (upstream.size() != widths.back()) {
    throw ShapeError("backward: upstream gradient has wrong length");
  }
  if (grad.size() != net.weights.size()) {
    throw ShapeError("backward: gradient buffer has wrong length");
  }
  // Offsets of each layer's block.
  std::vector<std::size_t> offset(widths.size(), 0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    offset[l + 1] = offset[l] + widths[l] * widths[l + 1];
  }
  std::vector<double> delta(upstream.begin(), upstream.end());
  std::vector<double> prev_delta;
  for (std::size_t l = widths.size() - 1; l-- > 0;) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const std::vector<double>& x = cache.activations[l];
    const double* w = net.weights.data() + offset[l];
    double* g = grad.data() + offset[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = g + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * x[i];
    }
    if (l == 0) break;
    // Propagate through W^T, then the ReLU of layer l's output (= x).
    prev_delta.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev_delta[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < in; ++i) {
      if (!(x[i] > 0.0)) prev_delta[i] = 0.0;
    }
    delta.swap(prev_delta);
  }
}

std::vector<double> backward(const Network& net, const ForwardCache& cache,
                             std::span<const double> upstream) {
  std::vector<double> grad(net.weights.size(), 0.0);
  backward_accumulate(net, cache, upstream, grad);
  return grad;
}

std::vector<double> flatten(const PolicyParameters& params) {
  std::vector<double> flat = params.net.weights;
  flat.push_back(params.log_std[0]);
  flat.push_back(params.log_std[1]);
  return flat;
}

PolicyParameters unflatten(const Architecture& arch,
                           std::span<const double> flat) {
  const std::size_t n = param_count(arch);
  if (flat.size() != n + 2) {
    throw ShapeError("unflatten: expected " + std::to_string(n + 2) +
                     " values, got " + std::to_string(flat.size()));
  }
  PolicyParameters p;
  p.net.arch = arch;
  p.net.weights.assign(flat.begin(), flat.begin() + static_cast<long>(n));
  p.log_std = {flat[n], flat[n + 1]};
  return p;
}

// ---------------------------------------------------------------------------
// Checkpoint text format, one token group per line:
//
//   evasion-checkpoint 1
//   actor.widths <w0> <w1> ...
//   actor.log_std <s0> <s1>
//   actor.weights <count>
//   <count lines, one weight each, layout as in Network>
//   critic.widths ...        (optional block)
//   critic.weights <count>
//   <count lines>
//   end
//
// Numbers use the shortest round-trip decimal form.

namespace {

constexpr const char* kMagic = "evasion-checkpoint";
constexpr int kVersion = 1;

void write_widths(std::ostream& out, const char* key, const Architecture& a) {
  out << key;
  for (std::size_t w : a.widths) out << ' ' << w;
  out << '\n';
}

void write_weights(std::ostream& out, const char* key,
                   const std::vector<double>& weights) {
  out << key << ' ' << weights.size() << '\n';
  for (double w : weights) out << fmt_double(w) << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::vector<std::string> tokens(const std::string& expected_key) {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of file");
    ++line_;
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    if (out.empty() || (!expected_key.empty() && out[0] != expected_key)) {
      fail("expected '" + expected_key + "'");
    }
    return out;
  }

  double number(const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      fail("malformed number '" + text + "'");
    }
    return v;
  }

  std::size_t count(const std::string& text) {
    std::size_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      fail("malformed count '" + text + "'");
    }
    return v;
  }

  Architecture widths(const std::vector<std::string>& toks) {
    Architecture a;
    for (std::size_t i = 1; i < toks.size(); ++i) a.widths.push_back(count(toks[i]));
    a.validate();
    return a;
  }

  std::vector<double> weights(const std::string& key, std::size_t expected) {
    const auto head = tokens(key);
    if (head.size() != 2 || count(head[1]) != expected) {
      fail(key + " count does not match architecture");
    }
    std::vector<double> w(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      const auto t = tokens("");
      if (t.size() != 1) fail("expected one weight per line");
      w[i] = number(t[0]);
    }
    return w;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ShapeError("checkpoint line " + std::to_string(line_) + ": " +
                     message);
  }

 private:
  std::istream& in_;
  int line_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  ckpt.actor.net.validate();
  out << kMagic << ' ' << kVersion << '\n';
  write_widths(out, "actor.widths", ckpt.actor.net.arch);
  out << "actor.log_std " << fmt_double(ckpt.actor.log_std[0]) << ' '
      << fmt_double(ckpt.actor.log_std[1]) << '\n';
  write_weights(out, "actor.weights", ckpt.actor.net.weights);
  if (ckpt.critic) {
    ckpt.critic->validate();
    write_widths(out, "critic.widths", ckpt.critic->arch);
    write_weights(out, "critic.weights", ckpt.critic->weights);
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  const auto magic = r.tokens(kMagic);
  if (magic.size() != 2 || magic[1] != std::to_string(kVersion)) {
    r.fail("unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.actor.net.arch = r.widths(r.tokens("actor.widths"));
  const auto log_std = r.tokens("actor.log_std");
  if (log_std.size() != 3) r.fail("actor.log_std needs two values");
  ckpt.actor.log_std = {r.number(log_std[1]), r.number(log_std[2])};
  ckpt.actor.net.weights =
      r.weights("actor.weights", param_count(ckpt.actor.net.arch));

  const auto next = r.tokens("");
  if (next[0] == "critic.widths") {
    Network critic;
    critic.arch = r.widths(next);
    critic.weights = r.weights("critic.weights", param_count(critic.arch));
    ckpt.critic = std::move(critic);
    r.tokens("end");
  } else if (next[0] != "end") {
    r.fail("expected 'critic.widths' or 'end'");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open checkpoint for writing: " + path);
  write_checkpoint(out, ckpt);
  if (!out) throw Error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

}  // namespace evasion

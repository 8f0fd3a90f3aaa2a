#ifndef EVASION_POLICY_NET_HPP_
#define EVASION_POLICY_NET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evasion {

// Layer widths, input first. Hidden layers use ReLU, the output layer is
// linear, and no layer has a bias.
struct Architecture {
  std::vector<std::size_t> widths;

  std::size_t inputs() const { return widths.front(); }
  std::size_t outputs() const { return widths.back(); }
  std::size_t layers() const { return widths.size() - 1; }

  // Throws ShapeError unless there are >= 2 positive widths and, when given,
  // the input/output widths match.
  void validate(std::optional<std::size_t> inputs = std::nullopt,
                std::optional<std::size_t> outputs = std::nullopt) const;

  std::string to_string() const;  // "[8, 64, 64, 2]"

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// sum_i widths[i] * widths[i+1]
std::size_t param_count(const Architecture& arch);

// Weight layout: layer 0 first; each layer is an (out x in) matrix stored
// row-major, so weight (o, i) of layer l sits at offset_l + o * in + i.
struct Network {
  Architecture arch;
  std::vector<double> weights;

  void validate() const;
  friend bool operator==(const Network&, const Network&) = default;
};

// Actor network plus the state-independent Gaussian log standard deviations
// of the two action channels.
struct PolicyParameters {
  Network net;
  std::array<double, 2> log_std{};

  friend bool operator==(const PolicyParameters&,
                         const PolicyParameters&) = default;
};

// Glorot-uniform weights, one mt19937_64 stream per call.
Network init_network(const Architecture& arch, std::uint64_t seed);

inline constexpr double kPolicyOutputInitScale = 0.01;

// init_network with the output layer scaled by kPolicyOutputInitScale, plus
// log_std = ln(0.5).
PolicyParameters init_policy(const Architecture& arch, std::uint64_t seed);

// Per-call activations retained for backward().
struct ForwardCache {
  std::vector<std::vector<double>> activations;  // input + each layer output
  bool valid() const { return !activations.empty(); }
};

// Throws ShapeError for a wrong input length and NumericFault for a
// non-finite input.
std::vector<double> forward(const Network& net, std::span<const double> input,
                            ForwardCache* cache = nullptr);

// Gradient of <output, upstream> with respect to every weight, using the
// activations cached by the matching forward() call. ReLU'(0) = 0. Adds into
// `grad` when given (must have param_count entries), otherwise returns a new
// vector.
std::vector<double> backward(const Network& net, const ForwardCache& cache,
                             std::span<const double> upstream);
void backward_accumulate(const Network& net, const ForwardCache& cache,
                         std::span<const double> upstream,
                         std::span<double> grad);

// Weights followed by the two log_std values.
std::vector<double> flatten(const PolicyParameters& params);
// Throws ShapeError on a length mismatch.
PolicyParameters unflatten(const Architecture& arch,
                           std::span<const double> flat);

// Checkpoint container; see README for the byte layout.
struct Checkpoint {
  PolicyParameters actor;
  std::optional<Network> critic;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace evasion

#endif  // EVASION_POLICY_NET_HPP_

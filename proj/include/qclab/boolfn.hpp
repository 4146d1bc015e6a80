#pragma once

// Partial Boolean functions, subcubes and input distributions.
//
// Inputs are indexed by the integer whose binary expansion is
// x^(1) x^(2) ... x^(k), x^(1) most significant. Variables are numbered from 0
// in code and in every file format: variable j is x^(j+1), stored at index bit
// (k - 1 - j).

#include "qclab/errors.hpp"
#include "qclab/scalar.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qclab {

using Input = std::uint32_t;

/// Largest input width any module accepts; truth tables beyond this are not
/// desk scale.
inline constexpr int kMaxBits = 24;

inline int bit_of(Input x, int var, int bits) { return static_cast<int>((x >> (bits - 1 - var)) & 1U); }
inline Input var_mask(int var, int bits) { return Input{1} << (bits - 1 - var); }

enum class Value : std::int8_t { Zero = 0, One = 1, Undefined = -1 };

class PartialFn {
 public:
  PartialFn(int bits, std::vector<Value> values);

  /// Parses a table over the alphabet {0,1,*}.
  static PartialFn from_string(int bits, std::string_view values);

  int bits() const { return bits_; }
  std::size_t size() const { return values_.size(); }
  Value operator()(Input x) const { return values_[x]; }
  bool is_valid(Input x) const { return values_[x] != Value::Undefined; }

  /// At least one 0 and one 1 among the valid inputs; conflict complexity is
  /// undefined otherwise.
  bool is_two_sided() const;

  std::vector<Input> preimage(int b) const;
  std::vector<Input> valid_inputs() const;
  std::string to_string() const;

  friend bool operator==(const PartialFn&, const PartialFn&) = default;

 private:
  int bits_;
  std::vector<Value> values_;
};

/// Set of inputs consistent with a partial assignment.
class Subcube {
 public:
  explicit Subcube(int bits);

  int bits() const { return bits_; }
  int codim() const;
  bool is_fixed(int var) const { return (mask_ & var_mask(var, bits_)) != 0; }
  /// Value of a fixed variable.
  int value(int var) const { return bit_of(pattern_, var, bits_); }
  bool contains(Input x) const { return (x & mask_) == pattern_; }

  /// Intersection with {x_var = b}. Throws when var is fixed to the other value.
  Subcube with(int var, int b) const;
  /// True when the intersection with {x_var = b} is nonempty.
  bool admits(int var, int b) const { return !is_fixed(var) || value(var) == b; }

  std::vector<int> free_vars() const;

  /// Invokes fn on every point of the subcube, in increasing index order.
  template <class Fn>
  void for_each_point(Fn&& fn) const {
    const Input free = full_mask() & ~mask_;
    Input sub = 0;
    do {
      fn(pattern_ | sub);
      sub = (sub - free) & free;
    } while (sub != 0);
  }

  /// Sub-assignment restricted to `width` consecutive variables starting at
  /// `first`, re-expressed as a subcube over `width` bits.
  Subcube project(int first, int width) const;

  Input mask() const { return mask_; }
  Input pattern() const { return pattern_; }
  std::uint64_t key() const { return (std::uint64_t{mask_} << 32) | pattern_; }
  Input full_mask() const { return bits_ == 0 ? 0 : (Input{1} << bits_) - 1; }

  /// Compact "01*1" rendering, one character per variable.
  std::string to_string() const;
  static Subcube parse(std::string_view text);

  friend bool operator==(const Subcube&, const Subcube&) = default;
  friend auto operator<=>(const Subcube& a, const Subcube& b) { return a.key() <=> b.key(); }

 private:
  int bits_;
  Input mask_ = 0;
  Input pattern_ = 0;
};

/// Probability vector over {0,1}^bits. Exact when Scalar is Rational; float
/// masses are accepted when they sum to 1 within 1e-9.
template <class Scalar>
class InputDistribution {
 public:
  InputDistribution(int bits, Vector<Scalar> mass);

  static InputDistribution uniform(int bits);
  static InputDistribution uniform_on(int bits, std::span<const Input> support);
  static InputDistribution point(int bits, Input x);

  int bits() const { return bits_; }
  std::size_t size() const { return static_cast<std::size_t>(mass_.size()); }
  const Vector<Scalar>& mass() const { return mass_; }
  const Scalar& operator[](Input x) const { return mass_[static_cast<Eigen::Index>(x)]; }

  std::vector<Input> support() const;

  template <class Other>
  InputDistribution<Other> cast() const {
    Vector<Other> out(mass_.size());
    for (Eigen::Index i = 0; i < mass_.size(); ++i) out[i] = scalar_cast<Other>(mass_[i]);
    return InputDistribution<Other>(bits_, std::move(out));
  }

 private:
  int bits_;
  Vector<Scalar> mass_;
};

template <class Scalar>
Scalar mass_of(const InputDistribution<Scalar>& mu, const Subcube& c);

/// mu | C. Throws ZeroMassError when mu(C) = 0.
template <class Scalar>
InputDistribution<Scalar> condition(const InputDistribution<Scalar>& mu, const Subcube& c);

/// mu | S for an arbitrary subset given by its members.
template <class Scalar>
InputDistribution<Scalar> condition(const InputDistribution<Scalar>& mu, std::span<const Input> subset);

/// (mu | g^-1(0), mu | g^-1(1)). Throws SplitError naming the empty side and
/// PreconditionError when mu charges an invalid input.
template <class Scalar>
std::pair<InputDistribution<Scalar>, InputDistribution<Scalar>> split_by_value(
    const InputDistribution<Scalar>& mu, const PartialFn& g);

/// Pr_{x ~ mu|C}[x_var = 0]; the forced value when C fixes var.
template <class Scalar>
Scalar marginal_bit(const InputDistribution<Scalar>& mu, int var, const Subcube& c);

/// Mass of mu on {x in C : g(x) = b}.
template <class Scalar>
Scalar value_mass(const InputDistribution<Scalar>& mu, const PartialFn& g, const Subcube& c, int b);

template <class Scalar>
bool supported_on_valid(const InputDistribution<Scalar>& mu, const PartialFn& g);

}  // namespace qclab

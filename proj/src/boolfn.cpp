#include "qclab/boolfn.hpp"

#include <bit>

namespace qclab {

PartialFn::PartialFn(int bits, std::vector<Value> values) : bits_(bits), values_(std::move(values)) {
  if (bits < 0 || bits > kMaxBits) throw PreconditionError("function width out of range: " + std::to_string(bits));
  if (values_.size() != (std::size_t{1} << bits)) {
    throw ParseError("truth table has " + std::to_string(values_.size()) + " entries, expected 2^" +
                     std::to_string(bits));
  }
}

PartialFn PartialFn::from_string(int bits, std::string_view values) {
  if (bits < 0 || bits > kMaxBits) throw ParseError("function width out of range: " + std::to_string(bits));
  if (values.size() != (std::size_t{1} << bits)) {
    throw ParseError("values string has length " + std::to_string(values.size()) + ", expected " +
                     std::to_string(std::size_t{1} << bits));
  }
  std::vector<Value> table;
  table.reserve(values.size());
  for (char c : values) {
    switch (c) {
      case '0': table.push_back(Value::Zero); break;
      case '1': table.push_back(Value::One); break;
      case '*': table.push_back(Value::Undefined); break;
      default: throw ParseError(std::string("bad truth-table character '") + c + "'");
    }
  }
  return PartialFn(bits, std::move(table));
}

bool PartialFn::is_two_sided() const {
  bool zero = false, one = false;
  for (Value v : values_) {
    zero |= v == Value::Zero;
    one |= v == Value::One;
  }
  return zero && one;
}

std::vector<Input> PartialFn::preimage(int b) const {
  const Value want = b == 0 ? Value::Zero : Value::One;
  std::vector<Input> out;
  for (Input x = 0; x < values_.size(); ++x)
    if (values_[x] == want) out.push_back(x);
  return out;
}

std::vector<Input> PartialFn::valid_inputs() const {
  std::vector<Input> out;
  for (Input x = 0; x < values_.size(); ++x)
    if (is_valid(x)) out.push_back(x);
  return out;
}

std::string PartialFn::to_string() const {
  std::string s;
  s.reserve(values_.size());
  for (Value v : values_) s.push_back(v == Value::Zero ? '0' : v == Value::One ? '1' : '*');
  return s;
}

Subcube::Subcube(int bits) : bits_(bits) {
  if (bits < 0 || bits > kMaxBits) throw PreconditionError("subcube width out of range");
}

int Subcube::codim() const { return std::popcount(mask_); }

Subcube Subcube::with(int var, int b) const {
  if (var < 0 || var >= bits_) throw PreconditionError("variable " + std::to_string(var) + " out of range");
  Subcube out = *this;
  const Input m = var_mask(var, bits_);
  if (is_fixed(var)) {
    if (value(var) != b) throw PreconditionError("variable " + std::to_string(var) + " already fixed");
    return out;
  }
  out.mask_ |= m;
  if (b) out.pattern_ |= m;
  return out;
}

std::vector<int> Subcube::free_vars() const {
  std::vector<int> out;
  for (int j = 0; j < bits_; ++j)
    if (!is_fixed(j)) out.push_back(j);
  return out;
}

Subcube Subcube::project(int first, int width) const {
  Subcube out(width);
  for (int j = 0; j < width; ++j)
    if (is_fixed(first + j)) out = out.with(j, value(first + j));
  return out;
}

std::string Subcube::to_string() const {
  std::string s;
  for (int j = 0; j < bits_; ++j) s.push_back(is_fixed(j) ? static_cast<char>('0' + value(j)) : '*');
  return s;
}

Subcube Subcube::parse(std::string_view text) {
  Subcube c(static_cast<int>(text.size()));
  for (int j = 0; j < c.bits(); ++j) {
    const char ch = text[static_cast<std::size_t>(j)];
    if (ch == '0' || ch == '1') {
      c = c.with(j, ch - '0');
    } else if (ch != '*') {
      throw ParseError(std::string("bad subcube character '") + ch + "'");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

template <class Scalar>
InputDistribution<Scalar>::InputDistribution(int bits, Vector<Scalar> mass) : bits_(bits), mass_(std::move(mass)) {
  if (bits < 0 || bits > kMaxBits) throw PreconditionError("distribution width out of range");
  if (static_cast<std::size_t>(mass_.size()) != (std::size_t{1} << bits)) {
    throw ParseError("distribution has " + std::to_string(mass_.size()) + " masses, expected 2^" +
                     std::to_string(bits));
  }
  for (Eigen::Index i = 0; i < mass_.size(); ++i)
    if (mass_[i] < Scalar(0)) throw ParseError("negative probability mass at input " + std::to_string(i));
  const Scalar total = mass_.sum();
  if constexpr (is_exact_v<Scalar>) {
    if (total != Scalar(1)) throw ParseError("masses sum to " + qclab::to_string(total) + ", not 1");
  } else {
    if (std::abs(total - 1.0) > 1e-9) throw ParseError("masses sum to " + std::to_string(total) + ", not 1");
  }
}

template <class Scalar>
InputDistribution<Scalar> InputDistribution<Scalar>::uniform(int bits) {
  const auto n = static_cast<Eigen::Index>(std::size_t{1} << bits);
  return InputDistribution(bits, Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
}

template <class Scalar>
InputDistribution<Scalar> InputDistribution<Scalar>::uniform_on(int bits, std::span<const Input> support) {
  if (support.empty()) throw PreconditionError("uniform distribution on an empty set");
  const auto n = static_cast<Eigen::Index>(std::size_t{1} << bits);
  Vector<Scalar> mass = Vector<Scalar>::Zero(n);
  const Scalar w = Scalar(1) / Scalar(static_cast<long>(support.size()));
  for (Input x : support) mass[x] = w;
  return InputDistribution(bits, std::move(mass));
}

template <class Scalar>
InputDistribution<Scalar> InputDistribution<Scalar>::point(int bits, Input x) {
  const auto n = static_cast<Eigen::Index>(std::size_t{1} << bits);
  Vector<Scalar> mass = Vector<Scalar>::Zero(n);
  mass[x] = Scalar(1);
  return InputDistribution(bits, std::move(mass));
}

template <class Scalar>
std::vector<Input> InputDistribution<Scalar>::support() const {
  std::vector<Input> out;
  for (Eigen::Index i = 0; i < mass_.size(); ++i)
    if (mass_[i] > Scalar(0)) out.push_back(static_cast<Input>(i));
  return out;
}

template <class Scalar>
Scalar mass_of(const InputDistribution<Scalar>& mu, const Subcube& c) {
  Scalar total(0);
  c.for_each_point([&](Input x) { total += mu[x]; });
  return total;
}

template <class Scalar>
InputDistribution<Scalar> condition(const InputDistribution<Scalar>& mu, const Subcube& c) {
  if (c.bits() != mu.bits()) throw PreconditionError("subcube and distribution widths differ");
  const Scalar total = mass_of(mu, c);
  if (total == Scalar(0)) throw ZeroMassError("conditioning on subcube " + c.to_string() + " of mass 0");
  Vector<Scalar> out = Vector<Scalar>::Zero(mu.mass().size());
  c.for_each_point([&](Input x) { out[x] = mu[x] / total; });
  return InputDistribution<Scalar>(mu.bits(), std::move(out));
}

template <class Scalar>
InputDistribution<Scalar> condition(const InputDistribution<Scalar>& mu, std::span<const Input> subset) {
  Scalar total(0);
  for (Input x : subset) total += mu[x];
  if (total == Scalar(0)) throw ZeroMassError("conditioning on an event of mass 0");
  Vector<Scalar> out = Vector<Scalar>::Zero(mu.mass().size());
  for (Input x : subset) out[x] = mu[x] / total;
  if constexpr (!is_exact_v<Scalar>) out /= out.sum();
  return InputDistribution<Scalar>(mu.bits(), std::move(out));
}

template <class Scalar>
bool supported_on_valid(const InputDistribution<Scalar>& mu, const PartialFn& g) {
  if (mu.bits() != g.bits()) return false;
  for (Input x = 0; x < mu.size(); ++x)
    if (mu[x] > Scalar(0) && !g.is_valid(x)) return false;
  return true;
}

template <class Scalar>
std::pair<InputDistribution<Scalar>, InputDistribution<Scalar>> split_by_value(const InputDistribution<Scalar>& mu,
                                                                               const PartialFn& g) {
  if (mu.bits() != g.bits()) throw PreconditionError("distribution and function widths differ");
  if (!supported_on_valid(mu, g)) throw PreconditionError("distribution charges inputs outside g's domain");
  const auto zeros = g.preimage(0);
  const auto ones = g.preimage(1);
  Scalar m0(0), m1(0);
  for (Input x : zeros) m0 += mu[x];
  for (Input x : ones) m1 += mu[x];
  if (m0 == Scalar(0)) throw SplitError(0);
  if (m1 == Scalar(0)) throw SplitError(1);
  return {condition(mu, std::span<const Input>(zeros)), condition(mu, std::span<const Input>(ones))};
}

template <class Scalar>
Scalar marginal_bit(const InputDistribution<Scalar>& mu, int var, const Subcube& c) {
  if (c.is_fixed(var)) return c.value(var) == 0 ? Scalar(1) : Scalar(0);
  const Scalar total = mass_of(mu, c);
  if (total == Scalar(0)) throw ZeroMassError("marginal on subcube " + c.to_string() + " of mass 0");
  return mass_of(mu, c.with(var, 0)) / total;
}

template <class Scalar>
Scalar value_mass(const InputDistribution<Scalar>& mu, const PartialFn& g, const Subcube& c, int b) {
  const Value want = b == 0 ? Value::Zero : Value::One;
  Scalar total(0);
  c.for_each_point([&](Input x) {
    if (g(x) == want) total += mu[x];
  });
  return total;
}

#define QCLAB_INSTANTIATE(S)                                                                                  \
  template class InputDistribution<S>;                                                                        \
  template S mass_of(const InputDistribution<S>&, const Subcube&);                                            \
  template InputDistribution<S> condition(const InputDistribution<S>&, const Subcube&);                        \
  template InputDistribution<S> condition(const InputDistribution<S>&, std::span<const Input>);                \
  template bool supported_on_valid(const InputDistribution<S>&, const PartialFn&);                             \
  template std::pair<InputDistribution<S>, InputDistribution<S>> split_by_value(const InputDistribution<S>&, \
                                                                                const PartialFn&);            \
  template S marginal_bit(const InputDistribution<S>&, int, const Subcube&);                                  \
  template S value_mass(const InputDistribution<S>&, const PartialFn&, const Subcube&, int);

QCLAB_INSTANTIATE(Rational)
QCLAB_INSTANTIATE(double)
#undef QCLAB_INSTANTIATE

}  // namespace qclab

#pragma once

#include <bitset>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sectcalc/measure.hpp"
#include "sectcalc/quad.hpp"
#include "sectcalc/types.hpp"

namespace sectcalc {

// Function classes a node can be tagged with. Tags only come from the
// construction rules in functions.cpp; nothing is inferred from sampling
// except the explicit range checks on products and large powers.
enum class Tag { NP, CM, BF, CBF, D0Plus, D0Minus, DInfPlus, DInfMinus, D, E, S };
inline constexpr int kTagCount = 11;

const char* tagName(Tag t);
std::optional<Tag> tagFromName(std::string_view name);

class TagSet {
 public:
  TagSet() = default;
  TagSet(std::initializer_list<Tag> tags) {
    for (Tag t : tags) insert(t);
  }
  bool has(Tag t) const { return bits_.test(std::size_t(t)); }
  void insert(Tag t) { bits_.set(std::size_t(t)); }
  void erase(Tag t) { bits_.reset(std::size_t(t)); }
  bool containsAll(const TagSet& o) const { return (bits_ & o.bits_) == o.bits_; }
  std::vector<Tag> list() const;
  bool operator==(const TagSet&) const = default;

 private:
  std::bitset<kTagCount> bits_;
};

// Extended nonnegative real, or unknown when no limit could be established.
struct LimitValue {
  enum class Kind { Finite, Infinite, Undetermined };
  Kind kind = Kind::Undetermined;
  double value = 0.0;

  static LimitValue finite(double v) { return {Kind::Finite, v}; }
  static LimitValue infinite() { return {Kind::Infinite, kInf}; }
  static LimitValue undetermined() { return {Kind::Undetermined, 0.0}; }
  bool isFinite() const { return kind == Kind::Finite; }
  bool isInfinite() const { return kind == Kind::Infinite; }
  bool isDetermined() const { return kind != Kind::Undetermined; }
};

struct Limits {
  LimitValue atZero;      // f(0+)
  LimitValue atInfinity;  // f(oo)
};

enum class NodeKind {
  Identity,
  Constant,
  Power,
  Log1p,
  OneMinusExp,
  CauchyAtom,
  ExampleG,
  MoebiusSeries,
  FromLevy,
  FromStieltjes,
  FromCauchyMeasure,
  Sum,
  Scale,
  Product,
  Reciprocal,
  Compose,
  PowerOf,
  ArgPower,
  ArgInversion,
  Raw
};

const char* kindName(NodeKind k);
std::optional<NodeKind> kindFromName(std::string_view name);

struct Derivative {
  Complex value;
  bool finiteDifference = false;  // true when no closed form was available
};

namespace detail {
struct FunctionNode;
}

// Immutable expression tree for a function on the right half-plane (or the
// slit plane for complete Bernstein functions). Cheap to copy; children are
// shared. Principal branches throughout, real on (0, oo).
class Function {
 public:
  using ScalarMap = std::function<Complex(Complex)>;

  static Function identity();
  static Function constant(double c);
  static Function power(double alpha);
  static Function log1p();
  static Function oneMinusExp();
  // z (1 + s^2) / (s^2 + z^2)
  static Function cauchyAtom(double s);
  // (z + 2t) / (z + t)^2
  static Function exampleG(double t);
  // 1 - sum_n c_n ((1 - z) / (1 + z))^n, n = 0, 1, ...; needs sum |c_n| <= 1
  static Function moebiusSeries(std::vector<double> coeffs);
  static Function fromLevy(LevyTriple triple, QuadratureConfig quad = {});
  static Function fromStieltjes(StieltjesTriple triple, QuadratureConfig quad = {});
  static Function fromCauchyMeasure(CauchyTriple triple, QuadratureConfig quad = {});
  // Untagged function from plain callables; for experiments and falsification.
  static Function raw(std::string name, ScalarMap eval, ScalarMap derivative = {});

  static Function sum(std::vector<Function> terms);
  static Function scale(double c, Function f);
  static Function product(std::vector<Function> factors);
  static Function reciprocal(Function f);
  // g(f(z))
  static Function compose(Function g, Function f);
  // f(z)^beta
  static Function powerOf(double beta, Function f);
  // f(z^alpha)
  static Function argPower(double alpha, Function f);
  // f(1/z)
  static Function argInversion(Function f);

  Complex operator()(Complex z) const;
  Derivative derivative(Complex z) const;
  // n-th derivative at t > 0 when a closed form exists.
  std::optional<double> derivativeN(double t, int n) const;

  NodeKind kind() const;
  const std::vector<double>& params() const;
  const std::vector<Function>& children() const;
  const TagSet& tags() const;
  const Limits& limits() const;
  bool has(Tag t) const { return tags().has(t); }
  // Levy/Stieltjes/Cauchy data for measure-backed nodes.
  const LevyTriple* levy() const;
  const StieltjesTriple* stieltjes() const;
  const CauchyTriple* cauchy() const;
  const QuadratureConfig& quadrature() const;
  std::string describe() const;

  // Whether z lies where this function is defined: the slit plane for CBF,
  // the open right half-plane otherwise.
  bool inDomain(Complex z) const;

  explicit Function(std::shared_ptr<const detail::FunctionNode> node) : node_(std::move(node)) {}
  const detail::FunctionNode& node() const { return *node_; }

 private:
  std::shared_ptr<const detail::FunctionNode> node_;
};

// Free-function forms of the node operations.
Complex eval(const Function& f, Complex z);
Derivative evalDerivative(const Function& f, Complex z);
Limits limitingValues(const Function& f);
Function buildCombinator(NodeKind kind, std::vector<Function> children, std::vector<double> params = {});

// Limit of t -> f(t) along a geometric grid toward 0 or oo. Finite when eight
// consecutive samples agree to 1e-6 relative.
LimitValue detectLimit(const std::function<double(double)>& f, bool towardZero);

// Named test functions used across tests and the acceptance suite.
struct NamedFunction {
  std::string name;
  Function f;
};
std::vector<NamedFunction> acceptanceCatalog();
// z^{1/2} (1 - e^{-z})^{1/2}
Function sqrtTimesSqrtOneMinusExp();
// Cauchy measure with atoms 2^{-n} at 2^{-n}, n = 0..count-1
MeasureSpec dyadicCauchyMeasure(int count = 160);
// Levy triple of a catalog Bernstein function, when one is known in closed form.
std::optional<LevyTriple> catalogLevyTriple(const Function& f);
std::optional<StieltjesTriple> catalogStieltjesTriple(const Function& f);

}  // namespace sectcalc

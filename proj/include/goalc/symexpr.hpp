#pragma once

// Canonical multivariate polynomials over named uncertainty parameters.
//
// A SymExpr is a sum of terms coeff * monomial with exact rational
// coefficients. The representation is kept canonical after every operation:
// monomials are distinct and ordered, no coefficient is zero, and binary
// parameters (contexts, OPT flags) never carry an exponent above one.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "goalc/naming.hpp"

namespace goalc::sym {

using Rational = boost::multiprecision::cpp_rational;

/// Exact conversion of a finite double (every double is a dyadic rational).
Rational to_rational(double value);

/// Parses "3", "-3/4" or a plain decimal such as "0.125" exactly.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& value);

struct Parameter {
  std::string name;
  ParamKind kind = ParamKind::Free;

  /// Parameter whose kind follows the generated-name prefix convention.
  static Parameter named(std::string name);

  friend bool operator==(const Parameter& a, const Parameter& b) { return a.name == b.name; }
  friend auto operator<=>(const Parameter& a, const Parameter& b) { return a.name <=> b.name; }
};

/// Sorted multiset of parameter names, stored as (name, exponent) pairs.
class Monomial {
 public:
  using Factor = std::pair<std::string, unsigned>;

  Monomial() = default;
  static Monomial of(std::string name, unsigned exponent = 1);

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  bool is_constant() const noexcept { return factors_.empty(); }
  unsigned degree() const noexcept;

  friend auto operator<=>(const Monomial&, const Monomial&) = default;
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  friend class SymExpr;
  std::vector<Factor> factors_;
};

using Bindings = std::unordered_map<std::string, double>;

class SymExpr {
 public:
  using Terms = std::map<Monomial, Rational>;

  SymExpr() = default;

  static SymExpr constant(const Rational& c);
  static SymExpr constant(long long c) { return constant(Rational(c)); }
  static SymExpr param(const Parameter& p);
  static SymExpr param(std::string name) { return param(Parameter::named(std::move(name))); }

  /// Parses the infix grammar produced by render(). Also accepts parentheses,
  /// integer powers (x^2) and decimal literals so hand-written formulae work.
  static SymExpr parse(std::string_view text);

  friend SymExpr operator+(const SymExpr& a, const SymExpr& b);
  friend SymExpr operator-(const SymExpr& a, const SymExpr& b);
  friend SymExpr operator*(const SymExpr& a, const SymExpr& b);
  SymExpr operator-() const;

  SymExpr& operator+=(const SymExpr& other) { return *this = *this + other; }
  SymExpr& operator-=(const SymExpr& other) { return *this = *this - other; }
  SymExpr& operator*=(const SymExpr& other) { return *this = *this * other; }

  /// Canonical equality; parameter kinds are not compared.
  friend bool operator==(const SymExpr& a, const SymExpr& b) { return a.terms_ == b.terms_; }

  /// Double-precision evaluation. Throws MissingBinding or DomainViolation.
  double evaluate(const Bindings& bindings) const;

  /// Replaces the given parameters by exact values and re-normalizes.
  SymExpr substitute(const std::map<std::string, Rational>& partial) const;
  SymExpr substitute(const std::map<std::string, double>& partial) const;

  /// Replaces parameters by whole expressions (polynomial composition).
  SymExpr compose(const std::map<std::string, SymExpr>& replacements) const;

  /// Parameters occurring with a nonzero coefficient, ordered by name.
  std::set<Parameter> parameters() const;
  std::set<std::string> parameter_names() const;

  std::string render() const;
  std::size_t size_bytes() const { return render().size(); }

  const Terms& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  ParamKind kind_of(const std::string& name) const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  void prune_kinds();
  static Monomial multiply(const Monomial& a, const Monomial& b,
                           const std::map<std::string, ParamKind>& kinds);

  Terms terms_;
  std::map<std::string, ParamKind> kinds_;
};

/// Double-coefficient flattening of a SymExpr for repeated evaluation against
/// a fixed variable ordering.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const SymExpr& expr, const std::vector<std::string>& variables);

  /// values[i] is the value of variables[i] passed at construction.
  double evaluate(std::span<const double> values) const;

  struct Factor {
    std::uint32_t var;
    std::uint32_t exponent;
  };
  struct Term {
    double coeff;
    std::uint32_t begin;
    std::uint32_t end;
  };

  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::span<const Factor> factors(const Term& t) const {
    return {factors_.data() + t.begin, factors_.data() + t.end};
  }

 private:
  std::vector<Term> terms_;
  std::vector<Factor> factors_;
};

}  // namespace goalc::sym

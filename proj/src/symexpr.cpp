#include "goalc/symexpr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "goalc/error.hpp"

namespace goalc::sym {

using boost::multiprecision::cpp_int;

Rational to_rational(double value) {
  if (!std::isfinite(value)) {
    throw DomainError("cannot convert non-finite value to a rational");
  }
  if (value == 0.0) return Rational(0);
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);  // value = mantissa * 2^exponent
  // Scale the mantissa to a 53-bit integer.
  auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  cpp_int num = scaled;
  cpp_int den = 1;
  if (exponent >= 0) {
    num <<= exponent;
  } else {
    den <<= -exponent;
  }
  return Rational(num, den);
}

Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw ParseError("invalid number '" + std::string(text) + "'", 0); };
  if (text.empty()) fail();
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    ++i;
  }
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(i, slash - i);
    auto den = text.substr(slash + 1);
    if (num.empty() || den.empty()) fail();
    for (char c : num)
      if (!std::isdigit(static_cast<unsigned char>(c))) fail();
    for (char c : den)
      if (!std::isdigit(static_cast<unsigned char>(c))) fail();
    cpp_int d{std::string(den)};
    if (d == 0) throw DomainError("zero denominator in '" + std::string(text) + "'");
    Rational r = Rational(cpp_int{std::string(num)}) / Rational(d);
    return negative ? Rational(-r) : r;
  }
  cpp_int digits = 0;
  cpp_int scale = 1;
  bool seen_digit = false;
  bool after_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (after_point) scale *= 10;
      seen_digit = true;
    } else if (c == '.' && !after_point) {
      after_point = true;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      fail();
    }
  }
  if (!seen_digit) fail();
  Rational r(digits, scale);
  if (i < text.size()) {
    // Decimal exponent.
    auto rest = text.substr(i + 1);
    if (rest.empty()) fail();
    int e = 0;
    try {
      e = std::stoi(std::string(rest));
    } catch (const std::exception&) {
      fail();
    }
    cpp_int p = boost::multiprecision::pow(cpp_int(10), std::abs(e));
    r = e >= 0 ? Rational(r * p) : Rational(r / p);
  }
  return negative ? Rational(-r) : r;
}

std::string to_string(const Rational& value) {
  const cpp_int& num = boost::multiprecision::numerator(value);
  const cpp_int& den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Parameter Parameter::named(std::string name) {
  ParamKind kind = naming::infer_kind(name);
  return Parameter{std::move(name), kind};
}

Monomial Monomial::of(std::string name, unsigned exponent) {
  Monomial m;
  if (exponent > 0) m.factors_.emplace_back(std::move(name), exponent);
  return m;
}

unsigned Monomial::degree() const noexcept {
  unsigned d = 0;
  for (const auto& [_, e] : factors_) d += e;
  return d;
}

// ---------------------------------------------------------------------------

SymExpr SymExpr::constant(const Rational& c) {
  SymExpr e;
  e.add_term(Monomial{}, c);
  return e;
}

SymExpr SymExpr::param(const Parameter& p) {
  SymExpr e;
  e.kinds_[p.name] = p.kind;
  e.add_term(Monomial::of(p.name), Rational(1));
  return e;
}

void SymExpr::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void SymExpr::prune_kinds() {
  if (kinds_.empty()) return;
  std::set<std::string> used;
  for (const auto& [m, _] : terms_)
    for (const auto& [name, __] : m.factors_) used.insert(name);
  for (auto it = kinds_.begin(); it != kinds_.end();) {
    it = used.count(it->first) ? std::next(it) : kinds_.erase(it);
  }
}

ParamKind SymExpr::kind_of(const std::string& name) const {
  auto it = kinds_.find(name);
  return it == kinds_.end() ? naming::infer_kind(name) : it->second;
}

Monomial SymExpr::multiply(const Monomial& a, const Monomial& b,
                           const std::map<std::string, ParamKind>& kinds) {
  Monomial out;
  out.factors_.reserve(a.factors_.size() + b.factors_.size());
  auto ia = a.factors_.begin();
  auto ib = b.factors_.begin();
  while (ia != a.factors_.end() || ib != b.factors_.end()) {
    if (ib == b.factors_.end() || (ia != a.factors_.end() && ia->first < ib->first)) {
      out.factors_.push_back(*ia++);
    } else if (ia == a.factors_.end() || ib->first < ia->first) {
      out.factors_.push_back(*ib++);
    } else {
      unsigned e = ia->second + ib->second;
      auto k = kinds.find(ia->first);
      if (k != kinds.end() && is_binary(k->second)) e = 1;
      out.factors_.emplace_back(ia->first, e);
      ++ia;
      ++ib;
    }
  }
  return out;
}

namespace {

std::map<std::string, ParamKind> merge_kinds(const std::map<std::string, ParamKind>& a,
                                             const std::map<std::string, ParamKind>& b) {
  std::map<std::string, ParamKind> out = a;
  for (const auto& kv : b) out.insert(kv);
  return out;
}

}  // namespace

SymExpr operator+(const SymExpr& a, const SymExpr& b) {
  SymExpr out = a;
  for (const auto& kv : b.kinds_) out.kinds_.insert(kv);
  for (const auto& [m, c] : b.terms_) out.add_term(m, c);
  out.prune_kinds();
  return out;
}

SymExpr SymExpr::operator-() const {
  SymExpr out = *this;
  for (auto& [_, c] : out.terms_) c = -c;
  return out;
}

SymExpr operator-(const SymExpr& a, const SymExpr& b) { return a + (-b); }

SymExpr operator*(const SymExpr& a, const SymExpr& b) {
  SymExpr out;
  out.kinds_ = merge_kinds(a.kinds_, b.kinds_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      out.add_term(SymExpr::multiply(ma, mb, out.kinds_), ca * cb);
    }
  }
  out.prune_kinds();
  return out;
}

double SymExpr::evaluate(const Bindings& bindings) const {
  // Resolve and domain-check every parameter once.
  std::map<std::string, double> values;
  for (const auto& [m, _] : terms_) {
    for (const auto& [name, __] : m.factors_) {
      if (values.count(name)) continue;
      auto it = bindings.find(name);
      if (it == bindings.end()) throw MissingBinding(name);
      double v = it->second;
      switch (kind_of(name)) {
        case ParamKind::Context:
        case ParamKind::Opt:
          if (v != 0.0 && v != 1.0) throw DomainViolation(name, v, "0 or 1");
          break;
        case ParamKind::Reliability:
        case ParamKind::Frequency:
          if (!(v >= 0.0 && v <= 1.0)) throw DomainViolation(name, v, "a value in [0,1]");
          break;
        case ParamKind::Cost:
          if (!(v >= 0.0)) throw DomainViolation(name, v, "a non-negative value");
          break;
        case ParamKind::Free:
          break;
      }
      values.emplace(name, v);
    }
  }
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c.convert_to<double>();
    for (const auto& [name, e] : m.factors_) {
      double v = values.at(name);
      for (unsigned k = 0; k < e; ++k) term *= v;
    }
    sum += term;
  }
  return sum;
}

SymExpr SymExpr::substitute(const std::map<std::string, Rational>& partial) const {
  if (partial.empty()) return *this;
  SymExpr out;
  out.kinds_ = kinds_;
  for (const auto& [m, c] : terms_) {
    Rational coeff = c;
    Monomial rest;
    for (const auto& [name, e] : m.factors_) {
      auto it = partial.find(name);
      if (it == partial.end()) {
        rest.factors_.emplace_back(name, e);
      } else {
        for (unsigned k = 0; k < e; ++k) coeff *= it->second;
      }
    }
    out.add_term(rest, coeff);
  }
  out.prune_kinds();
  return out;
}

SymExpr SymExpr::substitute(const std::map<std::string, double>& partial) const {
  std::map<std::string, Rational> exact;
  for (const auto& [name, v] : partial) exact.emplace(name, to_rational(v));
  return substitute(exact);
}

SymExpr SymExpr::compose(const std::map<std::string, SymExpr>& replacements) const {
  if (replacements.empty()) return *this;
  SymExpr out;
  for (const auto& [m, c] : terms_) {
    SymExpr term = constant(c);
    Monomial rest;
    for (const auto& [name, e] : m.factors_) {
      auto it = replacements.find(name);
      if (it == replacements.end()) {
        rest.factors_.emplace_back(name, e);
        continue;
      }
      for (unsigned k = 0; k < e; ++k) term = term * it->second;
    }
    if (!rest.is_constant()) {
      SymExpr r;
      for (const auto& [name, _] : rest.factors_) r.kinds_[name] = kind_of(name);
      r.add_term(rest, Rational(1));
      term = term * r;
    }
    out = out + term;
  }
  return out;
}

std::set<Parameter> SymExpr::parameters() const {
  std::set<Parameter> out;
  for (const auto& [m, _] : terms_)
    for (const auto& [name, __] : m.factors_) out.insert(Parameter{name, kind_of(name)});
  return out;
}

std::set<std::string> SymExpr::parameter_names() const {
  std::set<std::string> out;
  for (const auto& [m, _] : terms_)
    for (const auto& [name, __] : m.factors_) out.insert(name);
  return out;
}

std::string SymExpr::render() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    bool negative = c < 0;
    Rational magnitude = negative ? Rational(-c) : c;
    if (first) {
      if (negative) out += '-';
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    bool wrote = false;
    if (m.is_constant() || magnitude != 1) {
      out += to_string(magnitude);
      wrote = true;
    }
    for (const auto& [name, e] : m.factors_) {
      for (unsigned k = 0; k < e; ++k) {
        if (wrote) out += '*';
        out += name;
        wrote = true;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SymExpr run() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    SymExpr e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  SymExpr expr() {
    SymExpr acc = signed_term();
    for (;;) {
      if (accept('+')) {
        acc += signed_term();
      } else if (accept('-')) {
        acc -= signed_term();
      } else {
        return acc;
      }
    }
  }

  SymExpr signed_term() {
    bool negative = false;
    for (;;) {
      if (accept('-')) {
        negative = !negative;
      } else if (!accept('+')) {
        break;
      }
    }
    SymExpr t = term();
    return negative ? -t : t;
  }

  SymExpr term() {
    SymExpr acc = power();
    while (accept('*')) acc *= power();
    return acc;
  }

  SymExpr power() {
    SymExpr base = atom();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) throw ParseError("expected integer exponent", pos_);
      unsigned e = static_cast<unsigned>(std::stoul(std::string(text_.substr(start, pos_ - start))));
      SymExpr out = SymExpr::constant(1);
      for (unsigned k = 0; k < e; ++k) out *= base;
      return out;
    }
    return base;
  }

  SymExpr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      SymExpr e = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        ++pos_;
      }
      // Optional decimal exponent.
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t save = pos_++;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (digits == pos_) pos_ = save;
      }
      std::string literal(text_.substr(start, pos_ - start));
      // Rational literal "n/d": only when the '/' directly follows the number.
      if (pos_ < text_.size() && text_[pos_] == '/') {
        ++pos_;
        std::size_t dstart = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (dstart == pos_) throw ParseError("expected denominator", pos_);
        literal += "/" + std::string(text_.substr(dstart, pos_ - dstart));
      }
      try {
        return SymExpr::constant(parse_rational(literal));
      } catch (const ParseError&) {
        throw ParseError("invalid number '" + literal + "'", start);
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '_' || text_[pos_] == '.')) {
        ++pos_;
      }
      return SymExpr::param(std::string(text_.substr(start, pos_ - start)));
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SymExpr SymExpr::parse(std::string_view text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const SymExpr& expr, const std::vector<std::string>& variables) {
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < variables.size(); ++i) index.emplace(variables[i], i);
  terms_.reserve(expr.term_count());
  for (const auto& [m, c] : expr.terms()) {
    Term t{c.convert_to<double>(), static_cast<std::uint32_t>(factors_.size()), 0};
    for (const auto& [name, e] : m.factors()) {
      auto it = index.find(name);
      if (it == index.end()) throw MissingBinding(name);
      factors_.push_back(Factor{it->second, e});
    }
    t.end = static_cast<std::uint32_t>(factors_.size());
    terms_.push_back(t);
  }
}

double CompiledExpr::evaluate(std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (std::uint32_t k = t.begin; k < t.end; ++k) {
      double x = values[factors_[k].var];
      for (std::uint32_t e = 0; e < factors_[k].exponent; ++e) v *= x;
    }
    sum += v;
  }
  return sum;
}

}  // namespace goalc::sym

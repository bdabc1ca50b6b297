#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <utility>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sklab/errors.hpp"

namespace sklab {

/// Potential V as a sum of terms c * x_0^a_0 * ... * r^m (r the Euclidean
/// norm, or the p-adic norm on Q_p), or a radial step table.
///
/// Text form: "0.5*x^2 + 0.1*x^4", "0.5*r^2", "x*y", "|x|", "harmonic"
/// (= 0.5*r^2), "free" (= 0), "table(0:0, 1:1, 4:2)" (value 0 on [0,1),
/// 1 on [1,4), 2 on [4,inf) as a function of r).
class PotentialSpec {
 public:
  enum class Kind { Polynomial, Radial, Tabulated };

  struct Term {
    double coef = 0.0;
    std::vector<int> powers;  // per coordinate axis
    double radial_power = 0.0;
  };

  PotentialSpec() : kind_(Kind::Radial), text_("free") {}

  static PotentialSpec zero() { return PotentialSpec(); }
  static PotentialSpec constant(double c) { return parse(std::to_string(c)); }
  static PotentialSpec radial_power(double c, double m) {
    detail::require(m >= 0.0, "potential: radial power must be non-negative");
    PotentialSpec v;
    v.kind_ = Kind::Radial;
    v.terms_.push_back(Term{c, {}, m});
    v.text_ = std::to_string(c) + "*r^" + std::to_string(m);
    return v;
  }
  static PotentialSpec harmonic() { return parse("harmonic"); }

  /// Radial step function: value[i] on [breakpoint[i], breakpoint[i+1]).
  static PotentialSpec tabulated(std::vector<double> breakpoints, std::vector<double> values) {
    detail::require(!breakpoints.empty() && breakpoints.size() == values.size(),
                    "potential table: need matching non-empty breakpoints and values");
    detail::require(breakpoints.front() <= 0.0, "potential table: first breakpoint must be <= 0");
    detail::require(std::is_sorted(breakpoints.begin(), breakpoints.end()) &&
                        std::adjacent_find(breakpoints.begin(), breakpoints.end()) == breakpoints.end(),
                    "potential table: breakpoints must be strictly increasing");
    for (double v : values) detail::require(std::isfinite(v), "potential table: non-finite value");
    PotentialSpec v;
    v.kind_ = Kind::Tabulated;
    v.table_r_ = std::move(breakpoints);
    v.table_v_ = std::move(values);
    v.text_ = "table(";
    for (std::size_t i = 0; i < v.table_r_.size(); ++i) {
      if (i) v.text_ += ",";
      v.text_ += std::to_string(v.table_r_[i]) + ":" + std::to_string(v.table_v_[i]);
    }
    v.text_ += ")";
    return v;
  }

  static PotentialSpec parse(std::string_view text);

  Kind kind() const { return kind_; }
  const std::string& text() const { return text_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Highest coordinate axis referenced plus one (0 for radial specs).
  std::size_t required_dim() const {
    std::size_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.powers.size());
    return d;
  }

  bool is_radial() const { return kind_ != Kind::Polynomial; }
  bool is_zero() const { return kind_ == Kind::Radial && terms_.empty(); }

  /// True when V(x) = |x|^2 / 2 in dimension d.
  bool is_harmonic(int d) const {
    if (kind_ == Kind::Radial)
      return terms_.size() == 1 && terms_[0].coef == 0.5 && terms_[0].radial_power == 2.0;
    if (kind_ != Kind::Polynomial || terms_.size() != static_cast<std::size_t>(d)) return false;
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    for (const auto& t : terms_) {
      if (t.coef != 0.5 || t.radial_power != 0.0) return false;
      int axis = -1;
      for (std::size_t i = 0; i < t.powers.size(); ++i) {
        if (t.powers[i] == 0) continue;
        if (t.powers[i] != 2 || axis >= 0) return false;
        axis = static_cast<int>(i);
      }
      if (axis < 0 || axis >= d || seen[static_cast<std::size_t>(axis)]) return false;
      seen[static_cast<std::size_t>(axis)] = true;
    }
    return true;
  }

  double operator()(std::span<const double> x) const {
    if (kind_ == Kind::Tabulated) {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      return table_at(std::sqrt(r2));
    }
    if (x.size() < required_dim())
      throw invalid_argument("potential '" + text_ + "' is not evaluable in dimension " +
                             std::to_string(x.size()));
    double r = 0.0;
    for (double c : x) r += c * c;
    r = std::sqrt(r);
    double v = 0.0;
    for (const auto& t : terms_) {
      double m = t.coef;
      for (std::size_t i = 0; i < t.powers.size(); ++i)
        if (t.powers[i] != 0) m *= std::pow(x[i], t.powers[i]);
      if (t.radial_power != 0.0) m *= std::pow(r, t.radial_power);
      v += m;
    }
    return v;
  }

  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  /// V as a function of the norm only; requires a radial spec.
  double radial(double r) const {
    if (kind_ == Kind::Polynomial)
      throw invalid_argument("potential '" + text_ + "' is not radial");
    if (kind_ == Kind::Tabulated) return table_at(r);
    double v = 0.0;
    for (const auto& t : terms_) v += t.coef * (t.radial_power == 0.0 ? 1.0 : std::pow(r, t.radial_power));
    return v;
  }

 private:
  double table_at(double r) const {
    auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
    if (it == table_r_.begin()) return table_v_.front();
    return table_v_[static_cast<std::size_t>(std::distance(table_r_.begin(), it)) - 1];
  }

  Kind kind_;
  std::vector<Term> terms_;
  std::vector<double> table_r_;
  std::vector<double> table_v_;
  std::string text_;
};

namespace detail {

class PotentialParser {
 public:
  explicit PotentialParser(std::string_view s) : s_(s) {}

  std::vector<PotentialSpec::Term> parse_sum() {
    std::vector<PotentialSpec::Term> terms;
    skip();
    double sign = 1.0;
    if (eat('-')) sign = -1.0;
    else eat('+');
    terms.push_back(parse_term(sign));
    while (true) {
      skip();
      if (eat('+')) terms.push_back(parse_term(1.0));
      else if (eat('-')) terms.push_back(parse_term(-1.0));
      else break;
    }
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return terms;
  }

  std::vector<std::pair<double, double>> parse_table() {
    std::vector<std::pair<double, double>> rows;
    do {
      skip();
      const double r = number();
      skip();
      if (!eat(':')) fail("expected ':' in table");
      skip();
      const double v = signed_number();
      rows.emplace_back(r, v);
      skip();
    } while (eat(','));
    if (!eat(')')) fail("expected ')' closing table");
    skip();
    if (pos_ != s_.size()) fail("trailing characters after table");
    return rows;
  }

 private:
  PotentialSpec::Term parse_term(double sign) {
    PotentialSpec::Term t{sign, {}, 0.0};
    parse_factor(t);
    while (true) {
      skip();
      if (!eat('*')) break;
      parse_factor(t);
    }
    return t;
  }

  void parse_factor(PotentialSpec::Term& t) {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      t.coef *= number();
      return;
    }
    if (c == '|') {
      if (s_.substr(pos_, 3) != "|x|") fail("only '|x|' is accepted between bars");
      pos_ += 3;
      t.radial_power += exponent(false);
      return;
    }
    if (c == 'r') {
      ++pos_;
      t.radial_power += exponent(false);
      return;
    }
    int axis = -1;
    if (c == 'x' || c == 'y' || c == 'z') {
      ++pos_;
      if (c == 'x' && pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        axis = s_[pos_] - '0';
        ++pos_;
      } else {
        axis = c - 'x';
      }
    } else {
      fail("unknown symbol '" + std::string(1, c) + "'");
    }
    const double e = exponent(true);
    if (static_cast<int>(t.powers.size()) <= axis) t.powers.resize(static_cast<std::size_t>(axis) + 1, 0);
    t.powers[static_cast<std::size_t>(axis)] += static_cast<int>(e);
  }

  double exponent(bool integral) {
    skip();
    if (!eat('^')) return 1.0;
    skip();
    const double e = number();
    if (e < 0.0) fail("exponents must be non-negative");
    if (integral && e != std::floor(e)) fail("coordinate exponents must be integers");
    return e;
  }

  double signed_number() {
    double sign = 1.0;
    if (eat('-')) sign = -1.0;
    return sign * number();
  }

  double number() {
    char* end = nullptr;
    const std::string tmp(s_.substr(pos_));
    const double v = std::strtod(tmp.c_str(), &end);
    const auto used = static_cast<std::size_t>(end - tmp.c_str());
    if (used == 0) fail("expected a number");
    pos_ += used;
    return v;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw invalid_argument("potential '" + std::string(s_) + "': " + what + " at position " +
                           std::to_string(pos_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline PotentialSpec PotentialSpec::parse(std::string_view text) {
  std::string trimmed(text);
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.pop_back();
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.erase(0, 1);
  detail::require(!trimmed.empty(), "potential: empty expression");

  if (trimmed == "free") return PotentialSpec();
  if (trimmed == "harmonic") {
    PotentialSpec v;
    v.terms_.push_back(Term{0.5, {}, 2.0});
    v.text_ = "harmonic";
    return v;
  }
  if (trimmed.rfind("table(", 0) == 0) {
    detail::PotentialParser p(std::string_view(trimmed).substr(6));
    std::vector<double> rs, vs;
    for (auto [r, v] : p.parse_table()) {
      rs.push_back(r);
      vs.push_back(v);
    }
    auto spec = tabulated(std::move(rs), std::move(vs));
    spec.text_ = trimmed;
    return spec;
  }

  detail::PotentialParser p(trimmed);
  PotentialSpec v;
  v.terms_ = p.parse_sum();
  v.kind_ = Kind::Radial;
  for (auto& t : v.terms_) {
    while (!t.powers.empty() && t.powers.back() == 0) t.powers.pop_back();
    if (t.radial_power < 0.0) throw invalid_argument("potential '" + trimmed + "': negative radial power");
    if (!t.powers.empty()) v.kind_ = Kind::Polynomial;
  }
  std::erase_if(v.terms_, [](const Term& t) { return t.coef == 0.0; });
  v.text_ = trimmed;
  return v;
}

}  // namespace sklab

#pragma once

// Alphabets, strings and the autoregressive sequence model (ASM) interface.
//
// An ASM maps every finite prefix to a distribution over the alphabet plus a
// distinguished end-of-sequence marker. Distributions are stored as vectors of
// length |alphabet| + 1 with the EOS entry last.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lmtight {

using Symbol = std::size_t;
using Str = std::vector<Symbol>;
using Distribution = std::vector<double>;

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr double kProbSlack = 1e-12;

class UnknownSymbol : public std::invalid_argument {
 public:
  explicit UnknownSymbol(std::string token)
      : std::invalid_argument("unknown symbol '" + token + "'"),
        token_(std::move(token)) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> symbols, std::string eos = "EOS")
      : symbols_(std::move(symbols)), eos_(std::move(eos)) {
    if (symbols_.empty()) throw std::invalid_argument("alphabet must be nonempty");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].empty()) throw std::invalid_argument("empty symbol name");
      if (!index_.emplace(symbols_[i], i).second)
        throw std::invalid_argument("duplicate symbol '" + symbols_[i] + "'");
    }
    if (index_.count(eos_)) throw std::invalid_argument("EOS marker '" + eos_ + "' is also a symbol");
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  /// Size of the alphabet extended with EOS.
  std::size_t extended_size() const noexcept { return symbols_.size() + 1; }
  /// Index of EOS within a Distribution.
  std::size_t eos_index() const noexcept { return symbols_.size(); }
  const std::string& eos() const noexcept { return eos_; }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  const std::string& name(Symbol a) const { return a == eos_index() ? eos_ : symbols_.at(a); }

  Symbol symbol(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw UnknownSymbol(std::string(name));
    return it->second;
  }
  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  /// Parses whitespace-separated symbols. A single token that is not itself a
  /// symbol is split into characters when every symbol is one character long.
  Str parse(std::string_view text) const {
    std::vector<std::string> tokens;
    std::istringstream in{std::string(text)};
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    if (tokens.size() == 1 && !contains(tokens[0]) && all_single_char()) {
      std::string word = tokens[0];
      tokens.clear();
      for (char c : word) tokens.emplace_back(1, c);
    }
    Str out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(symbol(t));
    return out;
  }

  std::string format(const Str& x) const {
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) out += ' ';
      out += name(x[i]);
    }
    return out.empty() ? "ε" : out;
  }

  void check(const Str& x) const {
    for (Symbol a : x)
      if (a >= size()) throw UnknownSymbol("#" + std::to_string(a));
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_ && a.eos_ == b.eos_;
  }

 private:
  bool all_single_char() const {
    for (const auto& s : symbols_)
      if (s.size() != 1) return false;
    return true;
  }

  std::vector<std::string> symbols_;
  std::string eos_;
  std::unordered_map<std::string, std::size_t> index_;
};

class NotADistribution : public std::domain_error {
 public:
  NotADistribution(Str prefix, double sum, std::vector<std::size_t> offending)
      : std::domain_error(describe(sum, offending)),
        prefix_(std::move(prefix)),
        sum_(sum),
        offending_(std::move(offending)) {}

  const Str& prefix() const noexcept { return prefix_; }
  double sum() const noexcept { return sum_; }
  /// Indices of negative or non-finite entries.
  const std::vector<std::size_t>& offending() const noexcept { return offending_; }

 private:
  static std::string describe(double sum, const std::vector<std::size_t>& bad) {
    std::ostringstream os;
    os << "conditional is not a distribution (sum " << sum << ", " << bad.size()
       << " invalid entries)";
    return os.str();
  }

  Str prefix_;
  double sum_;
  std::vector<std::size_t> offending_;
};

/// Raised when a conditional is requested at a prefix the model assigns zero
/// probability and the model cannot define it.
class DeadPrefix : public std::domain_error {
 public:
  explicit DeadPrefix(Str prefix)
      : std::domain_error("conditional undefined at zero-probability prefix"),
        prefix_(std::move(prefix)) {}
  const Str& prefix() const noexcept { return prefix_; }

 private:
  Str prefix_;
};

class Asm;

/// Incremental evaluation state: the conditional after the symbols fed so far.
/// Cursors are owned by the caller and never shared between threads.
class AsmCursor {
 public:
  virtual ~AsmCursor() = default;
  virtual Distribution conditional() const = 0;
  virtual void advance(Symbol a) = 0;
  virtual std::unique_ptr<AsmCursor> clone() const = 0;
};

/// Autoregressive sequence model. The pure prefix form is the contract;
/// start() may return a faster incremental cursor that must agree with it.
class Asm {
 public:
  virtual ~Asm() = default;
  virtual const Alphabet& alphabet() const = 0;
  virtual Distribution conditional(const Str& prefix) const = 0;
  virtual std::unique_ptr<AsmCursor> start() const;
};

namespace detail {

class ReplayCursor final : public AsmCursor {
 public:
  explicit ReplayCursor(const Asm& model) : model_(&model) {}
  Distribution conditional() const override { return model_->conditional(prefix_); }
  void advance(Symbol a) override { prefix_.push_back(a); }
  std::unique_ptr<AsmCursor> clone() const override {
    return std::make_unique<ReplayCursor>(*this);
  }

 private:
  const Asm* model_;
  Str prefix_;
};

}  // namespace detail

inline std::unique_ptr<AsmCursor> Asm::start() const {
  return std::make_unique<detail::ReplayCursor>(*this);
}

/// ASM backed by an arbitrary callable; handy for tests and ad hoc models.
class FunctionAsm final : public Asm {
 public:
  using Fn = std::function<Distribution(const Str&)>;
  FunctionAsm(Alphabet alphabet, Fn fn) : alphabet_(std::move(alphabet)), fn_(std::move(fn)) {}
  const Alphabet& alphabet() const override { return alphabet_; }
  Distribution conditional(const Str& prefix) const override { return fn_(prefix); }

 private:
  Alphabet alphabet_;
  Fn fn_;
};

inline void validate_distribution(const Distribution& p, std::size_t expected_size,
                                  const Str& prefix, double tol = kDefaultTolerance) {
  std::vector<std::size_t> bad;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) bad.push_back(i);
    sum += p[i];
  }
  if (p.size() != expected_size || !bad.empty() || !(std::abs(sum - 1.0) <= tol))
    throw NotADistribution(prefix, sum, std::move(bad));
}

/// Throws NotADistribution unless the conditional at `prefix` is a
/// nonnegative vector summing to one within `tol`.
inline void validate_conditional(const Asm& model, const Str& prefix,
                                 double tol = kDefaultTolerance) {
  model.alphabet().check(prefix);
  validate_distribution(model.conditional(prefix), model.alphabet().extended_size(), prefix, tol);
}

namespace detail {

// Feeds x through a cursor. Returns the prefix probability and the cursor
// positioned after x, or a null cursor once the prefix probability hits zero.
inline std::pair<double, std::unique_ptr<AsmCursor>> walk(const Asm& model, const Str& x,
                                                          double tol) {
  model.alphabet().check(x);
  const std::size_t n = model.alphabet().extended_size();
  auto cur = model.start();
  double p = 1.0;
  Str seen;
  for (Symbol a : x) {
    auto dist = cur->conditional();
    validate_distribution(dist, n, seen, tol);
    p *= dist[a];
    if (p == 0.0) return {0.0, nullptr};
    cur->advance(a);
    seen.push_back(a);
  }
  return {p, std::move(cur)};
}

}  // namespace detail

/// Product of the conditionals of the symbols of `x`. Empty prefix gives 1.
inline double prefix_probability(const Asm& model, const Str& x,
                                 double tol = kDefaultTolerance) {
  return detail::walk(model, x, tol).first;
}

/// p(x): prefix probability of x times the EOS probability after x.
inline double string_probability(const Asm& model, const Str& x,
                                 double tol = kDefaultTolerance) {
  auto [p, cur] = detail::walk(model, x, tol);
  if (!cur) return 0.0;
  auto dist = cur->conditional();
  validate_distribution(dist, model.alphabet().extended_size(), x, tol);
  return p * dist[model.alphabet().eos_index()];
}

}  // namespace lmtight

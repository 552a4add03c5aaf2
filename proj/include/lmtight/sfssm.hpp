#pragma once

// Stochastic finite-state sequence models: per-symbol transition matrices,
// an initial distribution and per-state termination probabilities, locally
// normalized so that t_q + Σ_{q'} P_{qq'} = 1 for every state q.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lmtight/core.hpp"
#include "lmtight/linalg.hpp"
#include "lmtight/verdict.hpp"

namespace lmtight {

class BadInit : public std::domain_error {
 public:
  explicit BadInit(double sum)
      : std::domain_error("initial vector sums to " + std::to_string(sum) + ", expected 1"),
        sum_(sum) {}
  double sum() const noexcept { return sum_; }

 private:
  double sum_;
};

class BadRow : public std::domain_error {
 public:
  BadRow(std::size_t state, double total)
      : std::domain_error("state " + std::to_string(state) + " has outgoing mass " +
                          std::to_string(total) + ", expected 1"),
        state_(state),
        total_(total) {}
  std::size_t state() const noexcept { return state_; }
  double total() const noexcept { return total_; }

 private:
  std::size_t state_;
  double total_;
};

class NegativeEntry : public std::domain_error {
 public:
  explicit NegativeEntry(std::string location)
      : std::domain_error("negative or non-finite entry at " + location),
        location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

class NoUsefulStates : public std::domain_error {
 public:
  NoUsefulStates() : std::domain_error("model has no state that is both accessible and co-accessible") {}
};

class EmptyCorpus : public std::invalid_argument {
 public:
  EmptyCorpus() : std::invalid_argument("corpus is empty") {}
};

/// Membership set over state indices [0, Q).
class StateSet {
 public:
  explicit StateSet(std::size_t num_states = 0) : bits_(num_states, false) {}

  std::size_t universe() const noexcept { return bits_.size(); }
  bool contains(std::size_t q) const { return bits_.at(q); }
  void insert(std::size_t q) { bits_.at(q) = true; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }
  bool empty() const { return count() == 0; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < bits_.size(); ++q)
      if (bits_[q]) out.push_back(q);
    return out;
  }

  bool subset_of(const StateSet& o) const {
    for (std::size_t q = 0; q < bits_.size(); ++q)
      if (bits_[q] && !o.bits_.at(q)) return false;
    return true;
  }

  StateSet intersect(const StateSet& o) const {
    StateSet r(bits_.size());
    for (std::size_t q = 0; q < bits_.size(); ++q) r.bits_[q] = bits_[q] && o.bits_.at(q);
    return r;
  }

  friend bool operator==(const StateSet&, const StateSet&) = default;

 private:
  std::vector<bool> bits_;
};

/// Storage shared by stochastic and trimmed (substochastic) models.
class FiniteStateModel {
 public:
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_states() const noexcept { return init_.size(); }
  const Matrix& trans(Symbol a) const { return trans_.at(a); }
  const std::vector<Matrix>& transitions() const noexcept { return trans_; }
  const Vector& init() const noexcept { return init_; }
  const Vector& term() const noexcept { return term_; }
  const std::vector<std::string>& state_names() const noexcept { return names_; }
  const std::string& state_name(std::size_t q) const { return names_.at(q); }

  /// P = Σ_a P⁽ᵃ⁾.
  Matrix transition_sum() const {
    Matrix p(num_states(), num_states());
    for (const auto& m : trans_) p += m;
    return p;
  }

  friend bool operator==(const FiniteStateModel&, const FiniteStateModel&) = default;

 protected:
  FiniteStateModel(Alphabet alphabet, std::vector<Matrix> trans, Vector init, Vector term,
                   std::vector<std::string> names)
      : alphabet_(std::move(alphabet)),
        trans_(std::move(trans)),
        init_(std::move(init)),
        term_(std::move(term)),
        names_(std::move(names)) {}

  Alphabet alphabet_;
  std::vector<Matrix> trans_;
  Vector init_;
  Vector term_;
  std::vector<std::string> names_;
};

class Sfssm : public FiniteStateModel {
 public:
  friend Sfssm build_sfssm(Alphabet, std::vector<Matrix>, Vector, Vector, std::vector<std::string>,
                           double);

 private:
  using FiniteStateModel::FiniteStateModel;
};

/// A trimmed model: only useful states remain, rows may sum below one.
class SubstochasticFssm : public FiniteStateModel {
 public:
  /// state_map()[q] is the index in the original model of retained state q.
  const std::vector<std::size_t>& state_map() const noexcept { return state_map_; }

  friend SubstochasticFssm trim(const Sfssm&);

 private:
  SubstochasticFssm(Alphabet alphabet, std::vector<Matrix> trans, Vector init, Vector term,
                    std::vector<std::string> names, std::vector<std::size_t> state_map)
      : FiniteStateModel(std::move(alphabet), std::move(trans), std::move(init), std::move(term),
                         std::move(names)),
        state_map_(std::move(state_map)) {}

  std::vector<std::size_t> state_map_;
};

namespace detail {

inline void require_nonnegative(double v, const std::string& where) {
  if (!std::isfinite(v) || v < 0.0) throw NegativeEntry(where);
}

}  // namespace detail

/// Validates and assembles a model. Empty `names` defaults to q0, q1, ...
inline Sfssm build_sfssm(Alphabet alphabet, std::vector<Matrix> trans, Vector init, Vector term,
                         std::vector<std::string> names = {},
                         double tol = kDefaultTolerance) {
  const std::size_t q = init.size();
  if (q == 0) throw std::invalid_argument("model needs at least one state");
  if (term.size() != q) throw std::invalid_argument("termination vector length differs from state count");
  if (trans.size() != alphabet.size())
    throw std::invalid_argument("need one transition matrix per symbol");
  for (const auto& m : trans)
    if (m.rows() != q || m.cols() != q) throw std::invalid_argument("transition matrix shape mismatch");
  if (names.empty())
    for (std::size_t i = 0; i < q; ++i) names.push_back("q" + std::to_string(i));
  if (names.size() != q) throw std::invalid_argument("state name count differs from state count");

  for (std::size_t i = 0; i < q; ++i) {
    detail::require_nonnegative(init[i], "init[" + names[i] + "]");
    detail::require_nonnegative(term[i], "term[" + names[i] + "]");
  }
  for (std::size_t a = 0; a < trans.size(); ++a)
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j)
        detail::require_nonnegative(trans[a](i, j), "trans[" + alphabet.name(a) + "](" + names[i] +
                                                        "," + names[j] + ")");

  const double s = sum(init);
  if (std::abs(s - 1.0) > tol) throw BadInit(s);
  for (std::size_t i = 0; i < q; ++i) {
    double total = term[i];
    for (const auto& m : trans) total += sum(m.row(i));
    if (std::abs(total - 1.0) > tol) throw BadRow(i, total);
  }
  return Sfssm(std::move(alphabet), std::move(trans), std::move(init), std::move(term),
               std::move(names));
}

/// Forward weights sᵀ ∏ P⁽ˣᵗ⁾ (unnormalized).
inline Vector forward(const FiniteStateModel& m, const Str& x) {
  m.alphabet().check(x);
  Vector alpha = m.init();
  for (Symbol a : x) alpha = multiply(alpha, m.trans(a));
  return alpha;
}

/// sᵀ (∏ P⁽ˣᵗ⁾) t
inline double string_probability_fsa(const FiniteStateModel& m, const Str& x) {
  return dot(forward(m, x), m.term());
}

/// sᵀ (∏ P⁽ˣᵗ⁾) 𝟙 for stochastic models; for trimmed models the all-ones
/// vector is replaced by the retained outgoing mass.
inline double prefix_probability_fsa(const Sfssm& m, const Str& x) { return sum(forward(m, x)); }

inline StateSet accessible(const FiniteStateModel& m) {
  const std::size_t q = m.num_states();
  const Matrix p = m.transition_sum();
  StateSet seen(q);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < q; ++i)
    if (m.init()[i] > 0.0) {
      seen.insert(i);
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < q; ++j)
      if (p(i, j) > 0.0 && !seen.contains(j)) {
        seen.insert(j);
        stack.push_back(j);
      }
  }
  return seen;
}

inline StateSet coaccessible(const FiniteStateModel& m) {
  const std::size_t q = m.num_states();
  const Matrix p = m.transition_sum();
  StateSet seen(q);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < q; ++i)
    if (m.term()[i] > 0.0) {
      seen.insert(i);
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    for (std::size_t i = 0; i < q; ++i)
      if (p(i, j) > 0.0 && !seen.contains(i)) {
        seen.insert(i);
        stack.push_back(i);
      }
  }
  return seen;
}

/// Keeps exactly the useful states. Initial weights are not renormalized, so
/// mass placed on removed states is lost rather than redistributed.
inline SubstochasticFssm trim(const Sfssm& m) {
  const auto keep = accessible(m).intersect(coaccessible(m)).indices();
  if (keep.empty()) throw NoUsefulStates();
  const std::size_t k = keep.size();
  std::vector<Matrix> trans;
  trans.reserve(m.alphabet().size());
  for (const auto& full : m.transitions()) {
    Matrix sub(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) sub(i, j) = full(keep[i], keep[j]);
    trans.push_back(std::move(sub));
  }
  Vector init(k), term(k);
  std::vector<std::string> names(k);
  for (std::size_t i = 0; i < k; ++i) {
    init[i] = m.init()[keep[i]];
    term[i] = m.term()[keep[i]];
    names[i] = m.state_name(keep[i]);
  }
  return SubstochasticFssm(m.alphabet(), std::move(trans), std::move(init), std::move(term),
                           std::move(names), keep);
}

/// s′ᵀ (I − P′)⁻¹ t′
inline double termination_probability(const SubstochasticFssm& m) {
  Matrix a = Matrix::identity(m.num_states());
  const Matrix p = m.transition_sum();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= p(i, j);
  return dot(m.init(), solve_linear(std::move(a), m.term()));
}

/// Total mass of finite strings; zero when no state is useful.
inline double termination_probability(const Sfssm& m) {
  try {
    return termination_probability(trim(m));
  } catch (const NoUsefulStates&) {
    return 0.0;
  }
}

inline double check_spectral_radius(const SubstochasticFssm& m) {
  const double rho = spectral_radius_estimate(m.transition_sum()).estimate;
  assert(rho < 1.0 && "trimmed model must have spectral radius below one");
  return rho;
}

/// Tight iff every accessible state is co-accessible. A NonTight verdict names
/// the lowest-index accessible state that cannot terminate and the leaked mass.
inline TightnessVerdict decide_tight(const Sfssm& m) {
  const StateSet acc = accessible(m);
  const StateSet co = coaccessible(m);
  for (std::size_t q = 0; q < m.num_states(); ++q) {
    if (acc.contains(q) && !co.contains(q)) {
      const double leaked = std::clamp(1.0 - termination_probability(m), 0.0, 1.0);
      return TightnessVerdict::non_tight(
          q, leaked, "state " + m.state_name(q) + " is accessible but cannot reach termination");
    }
  }
  return TightnessVerdict::tight(
      {CertificateKind::CoAccessibility, 0.0, "all accessible states are co-accessible"});
}

inline constexpr const char* kBosName = "BOS";

/// Maximum-likelihood n-gram model. States are the (n−1)-symbol histories
/// observed in the corpus, left-padded with BOS, in order of first visit.
inline Sfssm mle_ngram(const Alphabet& alphabet, const std::vector<Str>& corpus, std::size_t n) {
  if (corpus.empty()) throw EmptyCorpus();
  if (n < 1) throw std::invalid_argument("n-gram order must be at least 1");
  const Symbol bos = alphabet.size();  // out-of-alphabet placeholder
  const std::size_t width = n - 1;
  const std::size_t eos = alphabet.size();

  std::map<std::vector<Symbol>, std::size_t> index;
  std::vector<std::vector<Symbol>> histories;
  // counts[h][a] with a == eos meaning termination
  std::vector<std::vector<double>> counts;
  std::vector<std::map<Symbol, std::size_t>> next;
  auto state_of = [&](const std::vector<Symbol>& h) {
    auto [it, fresh] = index.emplace(h, histories.size());
    if (fresh) {
      histories.push_back(h);
      counts.emplace_back(alphabet.size() + 1, 0.0);
      next.emplace_back();
    }
    return it->second;
  };

  const std::vector<Symbol> start(width, bos);
  state_of(start);
  for (const Str& x : corpus) {
    alphabet.check(x);
    std::vector<Symbol> h = start;
    std::size_t q = state_of(h);
    for (Symbol a : x) {
      counts[q][a] += 1.0;
      if (width > 0) {
        h.erase(h.begin());
        h.push_back(a);
      }
      const std::size_t r = state_of(h);
      next[q][a] = r;
      q = r;
    }
    counts[q][eos] += 1.0;
  }

  const std::size_t num = histories.size();
  std::vector<Matrix> trans(alphabet.size(), Matrix(num, num));
  Vector init(num, 0.0), term(num, 0.0);
  init[0] = 1.0;
  for (std::size_t q = 0; q < num; ++q) {
    double total = 0.0;
    for (double c : counts[q]) total += c;
    for (const auto& [a, r] : next[q]) trans[a](q, r) = counts[q][a] / total;
    term[q] = counts[q][eos] / total;
  }

  std::vector<std::string> names(num);
  for (std::size_t q = 0; q < num; ++q) {
    std::string name;
    for (std::size_t i = 0; i < histories[q].size(); ++i) {
      if (i) name += ',';
      name += histories[q][i] == bos ? std::string(kBosName) : alphabet.name(histories[q][i]);
    }
    names[q] = name.empty() ? std::string(kBosName) : name;
  }
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    for (std::size_t q = 0; q < num; ++q) names[q] = "q" + std::to_string(q);

  return build_sfssm(alphabet, std::move(trans), std::move(init), std::move(term), std::move(names));
}

}  // namespace lmtight

#pragma once

// Random model generators and brute-force oracles shared by the test suites.
// The oracles are written with plain loops and do not call into the library
// beyond reading model fields.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lmtight/lmtight.hpp"

namespace lmtight::testing {

inline std::string models_dir() { return LMTIGHT_MODELS_DIR; }

inline Alphabet letters(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(std::string(1, static_cast<char>('a' + i)));
  return Alphabet(std::move(s));
}

struct RandomSfssmConfig {
  std::size_t max_states = 5;
  std::size_t max_symbols = 3;
  double sparsity = 0.55;  // chance an outgoing slot is zeroed
};

/// Row-normalized random model. Slots are dropped at random, so some models
/// have dead-end loops and some have no useful state at all.
inline Sfssm random_sfssm(std::mt19937_64& rng, RandomSfssmConfig cfg = {}) {
  std::uniform_int_distribution<std::size_t> nq(1, cfg.max_states), ns(1, cfg.max_symbols);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::bernoulli_distribution drop(cfg.sparsity);
  const std::size_t q = nq(rng), k = ns(rng);
  std::vector<Matrix> trans(k, Matrix(q, q));
  Vector term(q, 0.0), init(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    std::vector<double> slots(k * q + 1, 0.0);
    double total = 0.0;
    for (auto& s : slots)
      if (!drop(rng)) total += (s = w(rng));
    if (total == 0.0) total = slots[std::uniform_int_distribution<std::size_t>(0, slots.size() - 1)(rng)] = 1.0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t j = 0; j < q; ++j) trans[a](i, j) = slots[a * q + j] / total;
    term[i] = slots.back() / total;
  }
  double z = 0.0;
  for (auto& v : init)
    if (!drop(rng)) z += (v = w(rng));
  if (z == 0.0) z = init[0] = 1.0;
  for (auto& v : init) v /= z;
  return build_sfssm(letters(k), std::move(trans), std::move(init), std::move(term));
}

/// All strings over k symbols with length ≤ max_len, shortest first.
inline std::vector<Str> all_strings(std::size_t k, std::size_t max_len) {
  std::vector<Str> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (Symbol a = 0; a < k; ++a) {
        Str x = out[i];
        x.push_back(a);
        out.push_back(std::move(x));
      }
    begin = end;
  }
  return out;
}

/// Sum over state paths of s_q0 · Π P[x_i](q_{i-1}, q_i) · t_qn, by recursion.
inline double path_sum_probability(const FiniteStateModel& m, const Str& x) {
  const std::size_t q = m.num_states();
  std::function<double(std::size_t, std::size_t)> from = [&](std::size_t state, std::size_t i) {
    if (i == x.size()) return m.term()[state];
    double acc = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      const double p = m.trans(x[i])(state, j);
      if (p != 0.0) acc += p * from(j, i + 1);
    }
    return acc;
  };
  double total = 0.0;
  for (std::size_t s = 0; s < q; ++s)
    if (m.init()[s] != 0.0) total += m.init()[s] * from(s, 0);
  return total;
}

/// sᵀ(Σ_{k=0}^{L} Pᵏ)t with P = Σ_a P⁽ᵃ⁾, by repeated row-vector products.
inline double neumann_mass(const FiniteStateModel& m, std::size_t max_len) {
  const std::size_t q = m.num_states();
  std::vector<std::vector<double>> p(q, std::vector<double>(q, 0.0));
  for (const auto& t : m.transitions())
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) p[i][j] += t(i, j);
  std::vector<double> row(m.init().begin(), m.init().end());
  double total = 0.0;
  for (std::size_t k = 0; k <= max_len; ++k) {
    for (std::size_t i = 0; i < q; ++i) total += row[i] * m.term()[i];
    std::vector<double> next(q, 0.0);
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) next[j] += row[i] * p[i][j];
    row = std::move(next);
  }
  return total;
}

/// p̃_eos(t) for t = 1..T by summing string and prefix probabilities of
/// every string, straight from the definition.
inline std::vector<double> ptilde_by_definition(const FiniteStateModel& m, std::size_t horizon) {
  std::vector<double> out;
  for (std::size_t t = 1; t <= horizon; ++t) {
    double num = 0.0, den = 0.0;
    for (const Str& w : all_strings(m.alphabet().size(), t - 1)) {
      if (w.size() != t - 1) continue;
      // prefix probability sᵀ Π P⁽ʷⁱ⁾ 𝟙
      double prefix = 0.0;
      const std::size_t q = m.num_states();
      std::vector<double> alpha(m.init().begin(), m.init().end());
      for (Symbol a : w) {
        std::vector<double> next(q, 0.0);
        for (std::size_t i = 0; i < q; ++i)
          for (std::size_t j = 0; j < q; ++j) next[j] += alpha[i] * m.trans(a)(i, j);
        alpha = std::move(next);
      }
      for (double v : alpha) prefix += v;
      num += path_sum_probability(m, w);
      den += prefix;
    }
    if (den == 0.0) break;
    out.push_back(num / den);
  }
  return out;
}

/// Corpus of up to max_strings strings of length ≤ max_len over k symbols.
inline std::vector<Str> random_corpus(std::mt19937_64& rng, std::size_t k, std::size_t max_strings,
                                      std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> count(1, max_strings), len(0, max_len), sym(0, k - 1);
  std::vector<Str> corpus(count(rng));
  for (auto& x : corpus) {
    x.resize(len(rng));
    for (auto& a : x) a = sym(rng);
  }
  return corpus;
}

}  // namespace lmtight::testing

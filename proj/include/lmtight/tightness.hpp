#pragma once

// Tightness analysis for general ASMs: the conditional EOS series p̃_eos,
// termination CDFs, lower-bound certificates, the RNN log-norm test, tail
// bounds that certify non-tightness, and Monte Carlo estimation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "lmtight/core.hpp"
#include "lmtight/linalg.hpp"
#include "lmtight/sfssm.hpp"
#include "lmtight/verdict.hpp"
#include "lmtight/zoo.hpp"

namespace lmtight {

inline constexpr double kHitOneThreshold = 1.0 - 1e-12;

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::size_t budget, std::size_t step)
      : std::runtime_error("prefix enumeration exceeded budget of " + std::to_string(budget) +
                           " prefixes at step " + std::to_string(step)),
        budget_(budget),
        step_(step) {}
  std::size_t budget() const noexcept { return budget_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t budget_;
  std::size_t step_;
};

class BoundViolated : public std::domain_error {
 public:
  BoundViolated(std::size_t step, Str prefix, double observed, double bound)
      : std::domain_error(describe(step, observed, bound)),
        step_(step),
        prefix_(std::move(prefix)),
        observed_(observed),
        bound_(bound) {}
  std::size_t step() const noexcept { return step_; }
  const Str& prefix() const noexcept { return prefix_; }
  double observed() const noexcept { return observed_; }
  double bound() const noexcept { return bound_; }

 private:
  static std::string describe(std::size_t t, double observed, double bound) {
    std::ostringstream os;
    os << "EOS bound violated at step " << t << ": observed " << observed << ", bound " << bound;
    return os.str();
  }

  std::size_t step_;
  Str prefix_;
  double observed_;
  double bound_;
};

class EmptyEvidence : public std::invalid_argument {
 public:
  EmptyEvidence() : std::invalid_argument("no hidden-norm evidence at or beyond the threshold index") {}
};

// --- p̃_eos series ------------------------------------------------------------

/// p̃_eos(1..T) with running sums and survival ∏(1 − p̃_eos). All vectors are
/// indexed from 0 for step 1.
struct PtildeSeries {
  std::vector<double> values;
  std::vector<double> partial_sum;
  std::vector<double> survival;
  std::optional<std::size_t> hit_one_at;
  /// First step whose conditioning event has probability zero; the series
  /// stops before it.
  std::optional<std::size_t> exhausted_at;

  std::size_t horizon() const noexcept { return values.size(); }
  double final_survival() const { return survival.empty() ? 1.0 : survival.back(); }
  double final_sum() const { return partial_sum.empty() ? 0.0 : partial_sum.back(); }

  void push(double p) {
    p = std::clamp(p, 0.0, 1.0);
    values.push_back(p);
    partial_sum.push_back(final_sum() + p);
    survival.push_back(final_survival() * (1.0 - p));
    if (!hit_one_at && p >= kHitOneThreshold) hit_one_at = values.size();
  }

  static PtildeSeries from_values(std::span<const double> ps) {
    PtildeSeries s;
    for (double p : ps) s.push(p);
    return s;
  }
};

namespace detail {

struct PrefixNode {
  Str prefix;
  double weight;  // proportional to the prefix probability within its level
  std::unique_ptr<AsmCursor> cursor;
};

// Breadth-first walk over positive-probability prefixes of length 0..T−1.
// visit(t, level, dists) sees the prefixes of length t−1 and their
// conditionals; weights are normalized to sum to one within each level.
// Returns false from visit to stop early.
template <class Visit>
void enumerate_levels(const Asm& model, std::size_t horizon, std::size_t budget, Visit&& visit) {
  const std::size_t n = model.alphabet().extended_size();
  const std::size_t eos = model.alphabet().eos_index();
  std::vector<PrefixNode> level;
  level.push_back({{}, 1.0, model.start()});
  std::size_t enumerated = 1;
  if (enumerated > budget) throw BudgetExceeded(budget, 1);
  for (std::size_t t = 1; t <= horizon; ++t) {
    std::vector<Distribution> dists;
    dists.reserve(level.size());
    for (const auto& node : level) {
      auto d = node.cursor->conditional();
      validate_distribution(d, n, node.prefix);
      dists.push_back(std::move(d));
    }
    if (!visit(t, level, dists) || t == horizon) return;

    std::vector<PrefixNode> next;
    double total = 0.0;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (Symbol a = 0; a < n; ++a) {
        if (a == eos || dists[i][a] <= 0.0) continue;
        const double w = level[i].weight * dists[i][a];
        if (w <= 0.0) continue;
        if (++enumerated > budget) throw BudgetExceeded(budget, t + 1);
        auto cur = level[i].cursor->clone();
        cur->advance(a);
        Str p = level[i].prefix;
        p.push_back(a);
        next.push_back({std::move(p), w, std::move(cur)});
        total += w;
      }
    }
    if (total > 0.0)
      for (auto& node : next) node.weight /= total;
    level = std::move(next);
  }
}

}  // namespace detail

/// p̃_eos(t) = Σ_ω p̄(ω) p̄(EOS|ω) / Σ_ω p̄(ω) over ω ∈ Σ^{t−1}, by exhaustive
/// enumeration of positive-probability prefixes (at most `budget` in total).
inline PtildeSeries ptilde_eos_enumerate(const Asm& model, std::size_t horizon,
                                         std::size_t budget = 1'000'000) {
  PtildeSeries series;
  const std::size_t eos = model.alphabet().eos_index();
  detail::enumerate_levels(model, horizon, budget,
                           [&](std::size_t t, const std::vector<detail::PrefixNode>& level,
                               const std::vector<Distribution>& dists) {
                             if (level.empty()) {
                               series.exhausted_at = t;
                               return false;
                             }
                             double num = 0.0, den = 0.0;
                             for (std::size_t i = 0; i < level.size(); ++i) {
                               num += level[i].weight * dists[i][eos];
                               den += level[i].weight;
                             }
                             series.push(num / den);
                             return true;
                           });
  return series;
}

/// Same series in O(T·Q²) from the forward state distribution α ← αP:
/// p̃_eos(t) = α_{t−1}·t / α_{t−1}·𝟙.
inline PtildeSeries ptilde_eos_fsa(const Sfssm& m, std::size_t horizon) {
  PtildeSeries series;
  const Matrix p = m.transition_sum();
  Vector alpha = m.init();
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double z = sum(alpha);
    if (!(z > 0.0)) {
      series.exhausted_at = t;
      break;
    }
    for (auto& v : alpha) v /= z;
    series.push(dot(alpha, m.term()));
    alpha = multiply(alpha, p);
  }
  return series;
}

/// CDF(T) = 1 − ∏_{t≤T} (1 − p̃_eos(t)).
inline std::vector<double> termination_cdf(const PtildeSeries& s) {
  std::vector<double> cdf(s.survival.size());
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = 1.0 - s.survival[i];
  return cdf;
}

/// Tight when the series shows sure termination, otherwise Inconclusive:
/// finitely many terms never decide divergence.
inline TightnessVerdict series_verdict(const PtildeSeries& s) {
  if (s.hit_one_at)
    return TightnessVerdict::tight({CertificateKind::EosHitsOne, static_cast<double>(*s.hit_one_at),
                                    "p̃_eos reaches 1 at step " + std::to_string(*s.hit_one_at)});
  if (s.exhausted_at) {
    const std::size_t t0 = *s.exhausted_at - 1;
    return TightnessVerdict::tight({CertificateKind::EosHitsOne, static_cast<double>(t0),
                                    "no prefix survives past step " + std::to_string(t0)});
  }
  std::ostringstream os;
  os << "series to T=" << s.horizon() << ": partial sum " << s.final_sum() << ", survival "
     << s.final_survival();
  return TightnessVerdict::inconclusive(os.str());
}

// --- EOS bound families --------------------------------------------------------

enum class SeriesClass { Divergent, Convergent, Unclassified };

/// A per-step bound f(t), t ≥ 1, on EOS probabilities.
class EosBoundFamily {
 public:
  enum class Kind { Constant, Harmonic, LogHarmonic, Geometric, ExplicitTable };

  /// f(t) = ε
  static EosBoundFamily constant(double eps) {
    require(eps > 0.0 && eps <= 1.0, "constant bound needs 0 < ε ≤ 1");
    return EosBoundFamily(Kind::Constant, eps, 0.0, 0.0, {});
  }
  /// f(t) = c / (t + d)
  static EosBoundFamily harmonic(double c, double d) {
    require(c > 0.0 && d > -1.0 && c / (1.0 + d) <= 1.0, "harmonic bound needs c > 0, d > −1, c/(1+d) ≤ 1");
    return EosBoundFamily(Kind::Harmonic, c, d, 0.0, {});
  }
  /// f(t) = c / ((t + d) log(t + d))
  static EosBoundFamily log_harmonic(double c, double d) {
    require(c > 0.0 && d > 0.0 && c / ((1.0 + d) * std::log(1.0 + d)) <= 1.0,
            "log-harmonic bound needs c > 0, d > 0, f(1) ≤ 1");
    return EosBoundFamily(Kind::LogHarmonic, c, d, 0.0, {});
  }
  /// f(t) = c · rᵗ
  static EosBoundFamily geometric(double c, double r) {
    require(c > 0.0 && r > 0.0 && r < 1.0 && c * r <= 1.0, "geometric bound needs c > 0, 0 < r < 1, c·r ≤ 1");
    return EosBoundFamily(Kind::Geometric, c, 0.0, r, {});
  }
  static EosBoundFamily explicit_table(std::vector<double> values) {
    for (double v : values) require(v >= 0.0 && v <= 1.0, "table entries must lie in [0, 1]");
    return EosBoundFamily(Kind::ExplicitTable, 0.0, 0.0, 0.0, std::move(values));
  }

  /// Parses "constant:ε", "harmonic:c,d", "logharmonic:c,d", "geometric:c,r"
  /// or "table:v1,v2,...".
  static EosBoundFamily parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("bound must look like family:params");
    const std::string family(spec.substr(0, colon));
    std::vector<double> nums;
    std::string rest(spec.substr(colon + 1));
    std::replace(rest.begin(), rest.end(), ',', ' ');
    std::istringstream in(rest);
    for (std::string tok; in >> tok;) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw std::invalid_argument("bad number '" + tok + "' in bound");
      nums.push_back(v);
    }
    auto arity = [&](std::size_t k) {
      if (nums.size() != k)
        throw std::invalid_argument(family + " bound takes " + std::to_string(k) + " parameter(s)");
    };
    if (family == "constant") return arity(1), constant(nums[0]);
    if (family == "harmonic") return arity(2), harmonic(nums[0], nums[1]);
    if (family == "logharmonic") return arity(2), log_harmonic(nums[0], nums[1]);
    if (family == "geometric") return arity(2), geometric(nums[0], nums[1]);
    if (family == "table") return explicit_table(std::move(nums));
    throw std::invalid_argument("unknown bound family '" + family + "'");
  }

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& table() const noexcept { return table_; }

  /// f(t); for a table, steps past its end have no bound and yield nullopt.
  std::optional<double> value(std::size_t t) const {
    const double x = static_cast<double>(t);
    switch (kind_) {
      case Kind::Constant: return c_;
      case Kind::Harmonic: return c_ / (x + d_);
      case Kind::LogHarmonic: return c_ / ((x + d_) * std::log(x + d_));
      case Kind::Geometric: return c_ * std::pow(r_, x);
      case Kind::ExplicitTable:
        if (t >= 1 && t <= table_.size()) return table_[t - 1];
        return std::nullopt;
    }
    return std::nullopt;
  }

  SeriesClass classification() const noexcept {
    switch (kind_) {
      case Kind::Constant:
      case Kind::Harmonic:
      case Kind::LogHarmonic: return SeriesClass::Divergent;
      case Kind::Geometric: return SeriesClass::Convergent;
      case Kind::ExplicitTable: return SeriesClass::Unclassified;
    }
    return SeriesClass::Unclassified;
  }

  /// Σ_{t>T} f(t), known in closed form only for geometric families.
  std::optional<double> tail_sum(std::size_t horizon) const {
    if (kind_ != Kind::Geometric) return std::nullopt;
    return c_ * std::pow(r_, static_cast<double>(horizon + 1)) / (1.0 - r_);
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Constant: os << "constant " << c_; break;
      case Kind::Harmonic: os << c_ << "/(t+" << d_ << ")"; break;
      case Kind::LogHarmonic: os << c_ << "/((t+" << d_ << ")log(t+" << d_ << "))"; break;
      case Kind::Geometric: os << c_ << "·" << r_ << "^t"; break;
      case Kind::ExplicitTable: os << "table of " << table_.size() << " values"; break;
    }
    return os.str();
  }

  double eps() const noexcept { return c_; }

 private:
  EosBoundFamily(Kind k, double c, double d, double r, std::vector<double> table)
      : kind_(k), c_(c), d_(d), r_(r), table_(std::move(table)) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }

  Kind kind_;
  double c_, d_, r_;
  std::vector<double> table_;
};

/// Checks p̄(EOS|x) ≥ f(|x|+1) − 1e-12 for every positive-probability prefix
/// shorter than `horizon`; throws BoundViolated on the first failure.
inline void check_lower_bound(const Asm& model, const EosBoundFamily& bound, std::size_t horizon,
                              std::size_t budget = 1'000'000) {
  const std::size_t eos = model.alphabet().eos_index();
  detail::enumerate_levels(model, horizon, budget,
                           [&](std::size_t t, const std::vector<detail::PrefixNode>& level,
                               const std::vector<Distribution>& dists) {
                             const auto f = bound.value(t);
                             if (!f) return true;
                             for (std::size_t i = 0; i < level.size(); ++i)
                               if (dists[i][eos] < *f - kProbSlack)
                                 throw BoundViolated(t, level[i].prefix, dists[i][eos], *f);
                             return true;
                           });
}

/// Tight when the bound family's series diverges. Only the enumerated
/// divergent families certify; a numeric partial sum never does.
inline TightnessVerdict certify_tight_lower_bound(const EosBoundFamily& bound) {
  switch (bound.kind()) {
    case EosBoundFamily::Kind::Constant:
      return TightnessVerdict::tight({CertificateKind::UniformEosBound, bound.eps(),
                                      "EOS probability bounded below by " + bound.describe()});
    case EosBoundFamily::Kind::Harmonic:
    case EosBoundFamily::Kind::LogHarmonic:
      return TightnessVerdict::tight({CertificateKind::DivergentBoundFamily, 0.0,
                                      "EOS probability bounded below by divergent " + bound.describe()});
    case EosBoundFamily::Kind::Geometric:
      return TightnessVerdict::inconclusive("lower bound " + bound.describe() +
                                            " has a convergent series");
    case EosBoundFamily::Kind::ExplicitTable:
      return TightnessVerdict::inconclusive("a finite table of lower bounds says nothing about the tail");
  }
  return TightnessVerdict::inconclusive("unknown bound family");
}

/// As above, after checking the bound against `model` up to `horizon`.
inline TightnessVerdict certify_tight_lower_bound(const EosBoundFamily& bound, const Asm& model,
                                                  std::size_t horizon,
                                                  std::size_t budget = 1'000'000) {
  check_lower_bound(model, bound, horizon, budget);
  return certify_tight_lower_bound(bound);
}

/// Uses an upper bound p̃_eos(t) ≤ c·rᵗ to certify NonTight: the mass that
/// terminates after T is at most survival(T)·Σ_{t>T} c·rᵗ, so at least
/// survival(T)·(1 − tail) leaks. The bound is checked against the series.
inline TightnessVerdict certify_nontight_upper_bound(const PtildeSeries& s,
                                                     const EosBoundFamily& upper) {
  for (std::size_t t = 1; t <= s.horizon(); ++t) {
    const auto f = upper.value(t);
    if (f && s.values[t - 1] > *f + kProbSlack) throw BoundViolated(t, {}, s.values[t - 1], *f);
  }
  const auto tail = upper.tail_sum(s.horizon());
  if (!tail) return TightnessVerdict::inconclusive("only a geometric upper bound has a certified tail");
  const double leaked = s.final_survival() * (1.0 - *tail);
  if (!(leaked > 0.0))
    return TightnessVerdict::inconclusive("tail bound too weak at this horizon");
  std::ostringstream os;
  os << "p̃_eos(t) ≤ " << upper.describe() << " leaves at least " << leaked
     << " of the mass unterminated";
  return TightnessVerdict::non_tight(std::nullopt, leaked, os.str());
}

// --- RNN log-norm test ---------------------------------------------------------

/// Tight if k·‖ĥ_t‖ ≤ log t for every supplied t ≥ N, where hidden_norms[i]
/// is the largest hidden norm over contexts of length t = i + 1.
inline TightnessVerdict rnn_log_norm_test(double k, std::span<const double> hidden_norms,
                                          std::size_t threshold) {
  threshold = std::max<std::size_t>(threshold, 1);
  if (hidden_norms.empty() || threshold > hidden_norms.size()) throw EmptyEvidence();
  for (std::size_t t = threshold; t <= hidden_norms.size(); ++t) {
    if (k * hidden_norms[t - 1] > std::log(static_cast<double>(t)) + kProbSlack) {
      std::ostringstream os;
      os << "k·‖ĥ_t‖ = " << k * hidden_norms[t - 1] << " exceeds log t at t = " << t;
      return TightnessVerdict::inconclusive(os.str());
    }
  }
  return TightnessVerdict::tight({CertificateKind::LogNormBound, static_cast<double>(threshold),
                                  "k·‖ĥ_t‖ ≤ log t for all t ≥ " + std::to_string(threshold) +
                                      " up to " + std::to_string(hidden_norms.size())});
}

/// Largest hidden norm over all contexts of length t, for t = 1..T.
inline std::vector<double> hidden_norm_sup(const RnnAsm& m, std::size_t horizon,
                                           std::size_t budget = 1'000'000) {
  std::vector<double> out;
  std::vector<Vector> level{m.params().h0};
  std::size_t enumerated = 1;
  for (std::size_t t = 1; t <= horizon; ++t) {
    std::vector<Vector> next;
    double best = 0.0;
    for (const auto& h : level)
      for (Symbol a = 0; a < m.alphabet().size(); ++a) {
        if (++enumerated > budget) throw BudgetExceeded(budget, t);
        Vector g = m.step(h, a);
        best = std::max(best, std::sqrt(dot(g, g)));
        next.push_back(std::move(g));
      }
    out.push_back(best);
    level = std::move(next);
  }
  return out;
}

/// Bounded activations keep ‖h_t‖ ≤ √d for t ≥ 1, so the log-norm condition
/// holds from N = ⌈exp(k√d)⌉ on without enumeration.
inline std::optional<TightnessVerdict> bounded_activation_certificate(const RnnAsm& m) {
  const auto act = m.params().activation;
  if (act != Activation::Tanh && act != Activation::Sigmoid) return std::nullopt;
  const double bound = m.output_gap() * std::sqrt(static_cast<double>(m.params().hidden_dim));
  const double n = std::max(1.0, std::ceil(std::exp(bound)));
  return TightnessVerdict::tight({CertificateKind::LogNormBound, n,
                                  std::string(to_string(act)) + " keeps k·‖h_t‖ ≤ " +
                                      std::to_string(bound) + " ≤ log t for t ≥ " +
                                      std::to_string(static_cast<long long>(n))});
}

// --- Monte Carlo ---------------------------------------------------------------

struct MonteCarloEstimate {
  std::size_t samples = 0;
  std::size_t terminated = 0;
  std::size_t truncated = 0;
  double terminated_fraction = 0.0;
  double truncated_fraction = 0.0;
  double mean_length_of_terminated = 0.0;
  /// 95% normal-approximation halfwidth for terminated_fraction.
  double confidence_halfwidth = 0.0;
  /// Counts of terminated lengths by bucket: 0, 1, 2-3, 4-7, ...
  std::map<std::size_t, std::size_t> length_buckets;
  std::size_t min_length = 0;
  std::size_t median_length = 0;
  std::size_t max_length = 0;
};

inline constexpr std::size_t kDefaultMaxLen = 10'000;

namespace detail {

// One substream per sample, keyed by (seed, sample index), so any partition
// of samples over workers draws identical values.
inline std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t bucket_of(std::size_t len) {
  std::size_t b = 0;
  while (len > 0) {
    len >>= 1;
    ++b;
  }
  return b;  // 0 → 0, 1 → 1, 2..3 → 2, 4..7 → 3
}

// Length of the generated string, or nullopt if no EOS within max_len steps.
inline std::optional<std::size_t> sample_one(const Asm& model, std::size_t max_len,
                                             std::mt19937_64& rng) {
  const std::size_t eos = model.alphabet().eos_index();
  auto cur = model.start();
  for (std::size_t step = 1; step <= max_len; ++step) {
    const auto dist = cur->conditional();
    const double u = unit_uniform(rng);
    double acc = 0.0;
    std::size_t pick = dist.size();
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] <= 0.0) continue;
      acc += dist[i];
      pick = i;
      if (u < acc) break;
    }
    if (pick == dist.size()) throw DeadPrefix({});
    if (pick == eos) return step - 1;
    cur->advance(pick);
  }
  return std::nullopt;
}

}  // namespace detail

/// Ancestral sampling. Runs without EOS in max_len steps count as truncated,
/// never as terminated, so terminated_fraction estimates P(|X| < max_len).
inline MonteCarloEstimate monte_carlo_termination(const Asm& model, std::size_t samples,
                                                  std::size_t max_len = kDefaultMaxLen,
                                                  std::uint64_t seed = 0,
                                                  std::size_t workers = 1) {
  if (samples < 1 || max_len < 1) throw std::invalid_argument("samples and max_len must be positive");
  workers = std::clamp<std::size_t>(workers, 1, samples);
  std::vector<std::optional<std::size_t>> outcome(samples);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < samples; i += workers) {
      auto rng = detail::sample_stream(seed, i);
      outcome[i] = detail::sample_one(model, max_len, rng);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  MonteCarloEstimate est;
  est.samples = samples;
  std::vector<std::size_t> lengths;
  for (const auto& o : outcome) {
    if (!o) {
      ++est.truncated;
      continue;
    }
    lengths.push_back(*o);
    ++est.length_buckets[detail::bucket_of(*o)];
  }
  est.terminated = lengths.size();
  const double n = static_cast<double>(samples);
  est.terminated_fraction = static_cast<double>(est.terminated) / n;
  est.truncated_fraction = static_cast<double>(est.truncated) / n;
  const double f = est.terminated_fraction;
  est.confidence_halfwidth = 1.96 * std::sqrt(f * (1.0 - f) / n);
  if (!lengths.empty()) {
    std::uint64_t total = 0;
    for (auto l : lengths) total += l;
    est.mean_length_of_terminated = static_cast<double>(total) / static_cast<double>(lengths.size());
    std::sort(lengths.begin(), lengths.end());
    est.min_length = lengths.front();
    est.median_length = lengths[lengths.size() / 2];
    est.max_length = lengths.back();
  }
  return est;
}

// --- product/sum duality ------------------------------------------------------

struct DualityReport {
  double partial_product = 1.0;
  double partial_sum = 0.0;
};

/// ∏_{n≤T}(1 − p_n) and Σ_{n≤T} p_n for p_n ∈ [0, 1).
inline DualityReport product_sum_duality_check(std::span<const double> p, std::size_t horizon) {
  if (horizon > p.size()) throw std::out_of_range("horizon exceeds sequence length");
  DualityReport r;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (!(p[i] >= 0.0 && p[i] < 1.0))
      throw std::out_of_range("sequence entry " + std::to_string(i + 1) + " outside [0, 1)");
    r.partial_product *= 1.0 - p[i];
    r.partial_sum += p[i];
  }
  return r;
}

}  // namespace lmtight

#pragma once

// Command implementations behind the lmtight tool. Each command returns plain
// data; rendering to text or JSON is separate so the same report can be
// checked in tests and printed by the tool.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "lmtight/core.hpp"
#include "lmtight/model_file.hpp"
#include "lmtight/sfssm.hpp"
#include "lmtight/tightness.hpp"
#include "lmtight/verdict.hpp"
#include "lmtight/zoo.hpp"

namespace lmtight::cli {

struct AnalyzeOptions {
  std::size_t horizon = 50;
  std::size_t budget = 1'000'000;
  /// Monte Carlo runs; unset means none for SFSSMs and 10⁴ otherwise.
  std::optional<std::size_t> samples;
  std::size_t max_len = kDefaultMaxLen;
  std::uint64_t seed = 0;
  std::optional<std::string> bound;        // lower bound family on EOS probability
  std::optional<std::string> upper_bound;  // geometric upper bound on p̃_eos
  std::size_t workers = 1;
};

inline constexpr std::size_t kDefaultAsmSamples = 10'000;

struct Provenance {
  std::string model;
  std::string digest;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::size_t budget = 0;
  std::size_t samples = 0;
  std::size_t max_len = 0;
};

struct Report {
  std::string model_kind;
  TightnessVerdict verdict = TightnessVerdict::inconclusive("not analyzed");
  std::optional<std::string> witness_name;
  std::optional<double> termination_probability;
  std::optional<double> leaked_mass;
  std::optional<double> spectral_radius;
  std::vector<double> ptilde;
  std::vector<double> cdf;
  std::optional<std::size_t> hit_one_at;
  std::optional<std::size_t> exhausted_at;
  std::optional<MonteCarloEstimate> monte_carlo;
  std::vector<std::string> notes;
  Provenance provenance;
};

namespace detail {

inline const Asm& as_asm(const AnyModel& m, std::optional<SfssmAsm>& holder) {
  if (const auto* s = std::get_if<Sfssm>(&m)) {
    holder.emplace(*s);
    return *holder;
  }
  if (const auto* r = std::get_if<RnnAsm>(&m)) return *r;
  return std::get<ParityAsm>(m);
}

inline void fill_series(Report& r, const PtildeSeries& s) {
  r.ptilde = s.values;
  r.cdf = termination_cdf(s);
  r.hit_one_at = s.hit_one_at;
  r.exhausted_at = s.exhausted_at;
}

inline std::string fixed(double v, int digits = 9) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline void analyze_sfssm(Report& r, const Sfssm& m, const AnalyzeOptions& opt) {
  r.verdict = decide_tight(m);
  if (r.verdict.witness()) r.witness_name = m.state_name(*r.verdict.witness());
  try {
    const auto trimmed = trim(m);
    r.termination_probability = termination_probability(trimmed);
    r.spectral_radius = check_spectral_radius(trimmed);
  } catch (const NoUsefulStates&) {
    r.termination_probability = 0.0;
    r.notes.push_back("no useful states: nothing terminates");
  }
  r.leaked_mass = 1.0 - *r.termination_probability;
  fill_series(r, ptilde_eos_fsa(m, opt.horizon));
  if (opt.samples && *opt.samples > 0) {
    const SfssmAsm adapter(m);
    r.monte_carlo = monte_carlo_termination(adapter, *opt.samples, opt.max_len, opt.seed, opt.workers);
  }
}

inline void analyze_asm(Report& r, const LoadedModel& lm, const Asm& model, const AnalyzeOptions& opt) {
  const auto series = ptilde_eos_enumerate(model, opt.horizon, opt.budget);
  fill_series(r, series);
  r.verdict = series_verdict(series);

  if (!r.verdict.is_tight() && opt.bound) {
    const auto bound = EosBoundFamily::parse(*opt.bound);
    try {
      auto v = certify_tight_lower_bound(bound, model, opt.horizon, opt.budget);
      if (v.is_tight()) r.verdict = std::move(v);
      else r.notes.push_back("lower bound " + bound.describe() + ": " + v.evidence());
    } catch (const BoundViolated& e) {
      r.notes.push_back(std::string("supplied lower bound rejected: ") + e.what());
    }
  }

  if (const auto* rnn = std::get_if<RnnAsm>(&lm.model); rnn && !r.verdict.is_tight()) {
    if (auto v = bounded_activation_certificate(*rnn)) {
      r.verdict = std::move(*v);
    } else {
      try {
        const auto norms = hidden_norm_sup(*rnn, opt.horizon, opt.budget);
        const std::size_t from = std::max<std::size_t>(1, opt.horizon / 2);
        auto v = rnn_log_norm_test(rnn->output_gap(), norms, from);
        if (v.is_tight()) r.verdict = std::move(v);
        else r.notes.push_back("log-norm test: " + v.evidence());
      } catch (const BudgetExceeded&) {
        r.notes.push_back("log-norm test skipped: hidden-state enumeration exceeds budget");
      }
    }
  }

  if (!r.verdict.is_tight() && opt.upper_bound) {
    const auto upper = EosBoundFamily::parse(*opt.upper_bound);
    try {
      auto v = certify_nontight_upper_bound(series, upper);
      if (v.is_non_tight()) r.verdict = std::move(v);
      else r.notes.push_back("upper bound " + upper.describe() + ": " + v.evidence());
    } catch (const BoundViolated& e) {
      r.notes.push_back(std::string("supplied upper bound rejected: ") + e.what());
    }
  }

  // Analytic bounds of builtin examples are reported alongside, not used.
  if (lm.known_upper_bound) {
    const auto v = certify_nontight_upper_bound(series, *lm.known_upper_bound);
    if (v.is_non_tight())
      r.notes.push_back("known geometric upper bound p̃_eos(t) ≤ " + lm.known_upper_bound->describe() +
                        " certifies NonTight (leaked ≥ " + fixed(*v.leaked_mass(), 6) +
                        "); pass --upper-bound to use it");
  }
  if (lm.known_lower_bound && !r.verdict.is_tight()) {
    const auto v = certify_tight_lower_bound(*lm.known_lower_bound, model, opt.horizon, opt.budget);
    if (v.is_tight())
      r.notes.push_back("known lower bound p̄(EOS|x) ≥ " + lm.known_lower_bound->describe() +
                        " certifies Tight; pass --bound to use it");
  }

  const std::size_t samples = opt.samples.value_or(kDefaultAsmSamples);
  if (samples > 0)
    r.monte_carlo = monte_carlo_termination(model, samples, opt.max_len, opt.seed, opt.workers);
}

}  // namespace detail

inline Report cmd_analyze(const LoadedModel& lm, const AnalyzeOptions& opt) {
  if (opt.bound) EosBoundFamily::parse(*opt.bound);
  if (opt.upper_bound) EosBoundFamily::parse(*opt.upper_bound);
  Report r;
  r.model_kind = lm.kind();
  std::optional<SfssmAsm> holder;
  if (const auto* s = std::get_if<Sfssm>(&lm.model)) {
    detail::analyze_sfssm(r, *s, opt);
    if (opt.bound || opt.upper_bound) r.notes.push_back("bounds are not needed for finite-state models; ignored");
  } else {
    detail::analyze_asm(r, lm, detail::as_asm(lm.model, holder), opt);
  }
  r.provenance = {lm.name,
                  lm.digest,
                  opt.seed,
                  opt.horizon,
                  opt.budget,
                  r.monte_carlo ? r.monte_carlo->samples : 0,
                  r.monte_carlo ? opt.max_len : 0};
  return r;
}

struct ProbResult {
  double string_probability = 0.0;
  double prefix_probability = 0.0;
};

inline ProbResult cmd_prob(const LoadedModel& lm, const std::string& text) {
  if (const auto* s = std::get_if<Sfssm>(&lm.model)) {
    const Str x = s->alphabet().parse(text);
    return {string_probability_fsa(*s, x), prefix_probability_fsa(*s, x)};
  }
  std::optional<SfssmAsm> holder;
  const Asm& model = detail::as_asm(lm.model, holder);
  const Str x = model.alphabet().parse(text);
  return {string_probability(model, x), prefix_probability(model, x)};
}

inline MonteCarloEstimate cmd_sample(const LoadedModel& lm, std::size_t samples, std::size_t max_len,
                                     std::uint64_t seed, std::size_t workers = 1) {
  std::optional<SfssmAsm> holder;
  return monte_carlo_termination(detail::as_asm(lm.model, holder), samples, max_len, seed, workers);
}

/// One string per line, whitespace-separated symbols. Blank lines are empty
/// strings. The alphabet is the sorted set of observed symbols.
inline std::pair<Alphabet, std::vector<Str>> read_corpus(std::istream& in) {
  std::vector<std::vector<std::string>> lines;
  std::set<std::string> symbols;
  for (std::string raw; std::getline(in, raw);) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::istringstream words(raw);
    std::vector<std::string> toks;
    for (std::string w; words >> w;) {
      symbols.insert(w);
      toks.push_back(std::move(w));
    }
    lines.push_back(std::move(toks));
  }
  if (lines.empty()) throw EmptyCorpus();
  if (symbols.empty()) throw ParseError(1, 1, "corpus contains no symbols");
  Alphabet alphabet(std::vector<std::string>(symbols.begin(), symbols.end()));
  std::vector<Str> corpus;
  corpus.reserve(lines.size());
  for (const auto& toks : lines) {
    Str x;
    for (const auto& t : toks) x.push_back(alphabet.symbol(t));
    corpus.push_back(std::move(x));
  }
  return {std::move(alphabet), std::move(corpus)};
}

/// Estimates an n-gram model from `corpus_path` and writes it to `out_path`.
inline Sfssm cmd_estimate_ngram(const std::string& corpus_path, std::size_t n,
                                const std::string& out_path) {
  std::ifstream in(corpus_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus '" + corpus_path + "'");
  auto [alphabet, corpus] = read_corpus(in);
  Sfssm m = mle_ngram(alphabet, corpus, n);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << "# maximum-likelihood " << n << "-gram model estimated from " << corpus.size() << " strings\n";
  out << write_model(m);
  if (!out) throw std::runtime_error("write to '" + out_path + "' failed");
  return m;
}

// --- rendering ----------------------------------------------------------------

inline nlohmann::ordered_json to_json(const TightnessVerdict& v) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(v.kind());
  if (v.certificate()) {
    j["certificate"] = {{"kind", to_string(v.certificate()->kind)},
                        {"parameter", v.certificate()->parameter},
                        {"detail", v.certificate()->detail}};
  } else {
    j["certificate"] = nullptr;
  }
  j["witness_state"] = v.witness() ? nlohmann::ordered_json(*v.witness()) : nullptr;
  j["leaked_mass"] = v.leaked_mass() ? nlohmann::ordered_json(*v.leaked_mass()) : nullptr;
  j["evidence"] = v.evidence();
  return j;
}

inline nlohmann::ordered_json to_json(const MonteCarloEstimate& e) {
  nlohmann::ordered_json j;
  j["samples"] = e.samples;
  j["terminated"] = e.terminated;
  j["truncated"] = e.truncated;
  j["terminated_fraction"] = e.terminated_fraction;
  j["truncated_fraction"] = e.truncated_fraction;
  j["confidence_halfwidth"] = e.confidence_halfwidth;
  j["mean_length_of_terminated"] = e.mean_length_of_terminated;
  j["min_length"] = e.min_length;
  j["median_length"] = e.median_length;
  j["max_length"] = e.max_length;
  nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
  for (const auto& [b, c] : e.length_buckets) {
    const std::size_t lo = b == 0 ? 0 : (std::size_t{1} << (b - 1));
    const std::size_t hi = b == 0 ? 0 : (std::size_t{1} << b) - 1;
    buckets.push_back({{"min", lo}, {"max", hi}, {"count", c}});
  }
  j["length_buckets"] = buckets;
  return j;
}

template <class T>
nlohmann::ordered_json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["model_kind"] = r.model_kind;
  j["verdict"] = to_json(r.verdict);
  j["witness_name"] = opt_json(r.witness_name);
  j["termination_probability"] = opt_json(r.termination_probability);
  j["leaked_mass"] = opt_json(r.leaked_mass);
  j["spectral_radius"] = opt_json(r.spectral_radius);
  j["series_preview"] = {{"ptilde_eos", r.ptilde},
                         {"termination_cdf", r.cdf},
                         {"hit_one_at", opt_json(r.hit_one_at)},
                         {"exhausted_at", opt_json(r.exhausted_at)}};
  j["monte_carlo"] = r.monte_carlo ? to_json(*r.monte_carlo) : nlohmann::ordered_json(nullptr);
  j["notes"] = r.notes;
  const auto& p = r.provenance;
  j["provenance"] = {{"model", p.model},     {"digest", p.digest},   {"seed", p.seed},
                     {"horizon", p.horizon}, {"budget", p.budget},   {"samples", p.samples},
                     {"max_len", p.max_len}};
  return j;
}

inline std::string render_machine(const Report& r) { return to_json(r).dump(2) + "\n"; }

inline std::string render_text(const MonteCarloEstimate& e) {
  std::ostringstream os;
  os << "  samples:     " << e.samples << "\n"
     << "  terminated:  " << detail::fixed(e.terminated_fraction, 6) << " ± "
     << detail::fixed(e.confidence_halfwidth, 6) << " (95%)\n"
     << "  truncated:   " << detail::fixed(e.truncated_fraction, 6) << "\n";
  if (e.terminated > 0) {
    os << "  lengths:     min " << e.min_length << ", median " << e.median_length << ", max "
       << e.max_length << ", mean " << detail::fixed(e.mean_length_of_terminated, 3) << "\n";
    os << "  histogram:  ";
    for (const auto& [b, c] : e.length_buckets) {
      const std::size_t lo = b == 0 ? 0 : (std::size_t{1} << (b - 1));
      const std::size_t hi = b == 0 ? 0 : (std::size_t{1} << b) - 1;
      os << ' ' << lo;
      if (hi != lo) os << '-' << hi;
      os << ':' << c;
    }
    os << "\n";
  }
  return os.str();
}

inline std::string render_text(const Report& r) {
  std::ostringstream os;
  os << "model:       " << r.provenance.model << " (" << r.model_kind << ")\n";
  os << "digest:      " << r.provenance.digest << "\n";
  os << "verdict:     " << to_string(r.verdict.kind());
  if (r.verdict.certificate()) os << " [" << to_string(r.verdict.certificate()->kind) << "]";
  os << "\n";
  if (r.witness_name) os << "witness:     " << *r.witness_name << "\n";
  if (!r.verdict.evidence().empty()) os << "evidence:    " << r.verdict.evidence() << "\n";
  if (r.verdict.certificate() && !r.verdict.certificate()->detail.empty())
    os << "certificate: " << r.verdict.certificate()->detail << "\n";
  if (r.termination_probability)
    os << "termination: " << detail::fixed(*r.termination_probability) << "\n";
  if (r.leaked_mass) os << "leaked:      " << detail::fixed(*r.leaked_mass) << "\n";
  if (!r.termination_probability && r.verdict.leaked_mass())
    os << "leaked ≥     " << detail::fixed(*r.verdict.leaked_mass()) << "\n";
  if (r.spectral_radius) os << "rho(P'):     " << detail::fixed(*r.spectral_radius, 6) << "\n";
  if (!r.cdf.empty()) {
    os << "series:      T = " << r.cdf.size() << ", CDF(T) = " << detail::fixed(r.cdf.back()) << "\n";
    const std::size_t show = std::min<std::size_t>(r.ptilde.size(), 10);
    auto row = [&](std::size_t t) {
      os << std::setw(6) << t << "   " << detail::fixed(r.ptilde[t - 1]) << "   " << detail::fixed(r.cdf[t - 1])
         << "\n";
    };
    os << "     t   p~eos(t)      CDF(t)\n";
    for (std::size_t t = 1; t <= show; ++t) row(t);
    if (r.ptilde.size() > show) {
      os << "   ...\n";
      row(r.ptilde.size());
    }
  }
  if (r.hit_one_at) os << "p~eos hits 1 at t = " << *r.hit_one_at << "\n";
  if (r.monte_carlo) os << "monte carlo (seed " << r.provenance.seed << ", max_len " << r.provenance.max_len
                        << "):\n" << render_text(*r.monte_carlo);
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace lmtight::cli

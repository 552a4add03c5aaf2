#pragma once

// Concrete sequence models: the bigram fixtures, Elman RNNs with softmax
// output, a parity-scheduled EOS model and an adapter exposing any SFSSM as
// an ASM.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lmtight/core.hpp"
#include "lmtight/linalg.hpp"
#include "lmtight/sfssm.hpp"

namespace lmtight {

// --- bigram fixtures -------------------------------------------------------

namespace detail {

inline Sfssm bigram_fixture(double b_loop, double b_eos) {
  Alphabet ab({"a", "b"});
  enum { BOS = 0, A = 1, B = 2 };
  Matrix pa(3, 3), pb(3, 3);
  pa(BOS, A) = 1.0;
  pa(A, A) = 0.7;
  pb(A, B) = 0.2;
  pb(B, B) = b_loop;
  Vector init{1.0, 0.0, 0.0};
  Vector term{0.0, 0.1, b_eos};
  return build_sfssm(std::move(ab), {pa, pb}, std::move(init), std::move(term), {"BOS", "a", "b"});
}

}  // namespace detail

/// Non-tight bigram: once in b the model loops on b forever.
inline Sfssm make_fig1a() { return detail::bigram_fixture(1.0, 0.0); }

/// Tight bigram: b loops with 0.9 and terminates with 0.1.
inline Sfssm make_fig1b() { return detail::bigram_fixture(0.9, 0.1); }

// --- SFSSM as ASM ----------------------------------------------------------

/// Conditionals from the normalized forward state distribution α:
/// p̄(a|x) = αP⁽ᵃ⁾𝟙 / α𝟙 and p̄(EOS|x) = αt / α𝟙.
class SfssmAsm final : public Asm {
 public:
  explicit SfssmAsm(Sfssm m) : model_(std::move(m)) {}

  const Alphabet& alphabet() const override { return model_.alphabet(); }
  const Sfssm& model() const noexcept { return model_; }

  Distribution conditional(const Str& prefix) const override {
    return from_forward(forward(model_, prefix), prefix);
  }

  std::unique_ptr<AsmCursor> start() const override {
    return std::make_unique<Cursor>(*this);
  }

 private:
  class Cursor final : public AsmCursor {
   public:
    explicit Cursor(const SfssmAsm& owner) : owner_(&owner), alpha_(owner.model_.init()) {}
    Distribution conditional() const override { return owner_->from_forward(alpha_, {}); }
    void advance(Symbol a) override {
      alpha_ = multiply(alpha_, owner_->model_.trans(a));
      const double z = sum(alpha_);
      if (z > 0.0)
        for (auto& v : alpha_) v /= z;
    }
    std::unique_ptr<AsmCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    const SfssmAsm* owner_;
    Vector alpha_;
  };

  Distribution from_forward(const Vector& alpha, const Str& prefix) const {
    const double z = sum(alpha);
    if (!(z > 0.0)) throw DeadPrefix(prefix);
    Distribution out(model_.alphabet().extended_size(), 0.0);
    for (Symbol a = 0; a < model_.alphabet().size(); ++a)
      out[a] = sum(multiply(alpha, model_.trans(a))) / z;
    out[model_.alphabet().eos_index()] = dot(alpha, model_.term()) / z;
    return out;
  }

  Sfssm model_;
};

inline SfssmAsm sfssm_as_asm(Sfssm m) { return SfssmAsm(std::move(m)); }

// --- RNN -------------------------------------------------------------------

enum class Activation { Relu, Softplus, Tanh, Sigmoid };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Softplus: return "softplus";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "softplus") return Activation::Softplus;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

inline double activate(Activation act, double z) {
  switch (act) {
    case Activation::Relu: return std::max(0.0, z);
    case Activation::Softplus: return z > 30.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

struct RnnParams {
  std::size_t hidden_dim = 1;
  Matrix input_embedding;   // |Σ̄| × d, rows in symbol order then EOS
  Matrix output_embedding;  // |Σ̄| × d
  Matrix w;                 // d × d, applied to the input embedding
  Matrix u;                 // d × d, applied to the previous hidden state
  Vector bias;              // d
  Activation activation = Activation::Relu;
  Vector h0;                // d

  friend bool operator==(const RnnParams&, const RnnParams&) = default;
};

/// Elman RNN: h_t = σ(W v_t + U h_{t−1} + b), p̄(·|x_≤t) = softmax(u_yᵀ h_t).
class RnnAsm final : public Asm {
 public:
  RnnAsm(Alphabet alphabet, RnnParams params)
      : alphabet_(std::move(alphabet)), p_(std::move(params)) {
    const std::size_t d = p_.hidden_dim;
    const std::size_t n = alphabet_.extended_size();
    if (d == 0) throw std::invalid_argument("hidden dimension must be positive");
    auto need = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("RNN dimension mismatch: ") + what);
    };
    need(p_.input_embedding.rows() == n && p_.input_embedding.cols() == d, "input embedding");
    need(p_.output_embedding.rows() == n && p_.output_embedding.cols() == d, "output embedding");
    need(p_.w.rows() == d && p_.w.cols() == d, "W");
    need(p_.u.rows() == d && p_.u.cols() == d, "U");
    need(p_.bias.size() == d, "bias");
    need(p_.h0.size() == d, "h0");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  const RnnParams& params() const noexcept { return p_; }

  Vector hidden(const Str& prefix) const {
    alphabet_.check(prefix);
    Vector h = p_.h0;
    for (Symbol a : prefix) h = step(h, a);
    return h;
  }

  Vector step(const Vector& h, Symbol x) const {
    const std::size_t d = p_.hidden_dim;
    if (h.size() != d) throw std::invalid_argument("hidden state dimension mismatch");
    const auto v = p_.input_embedding.row(x);
    Vector wv = multiply(p_.w, v);
    Vector uh = multiply(p_.u, h);
    Vector out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = activate(p_.activation, wv[i] + uh[i] + p_.bias[i]);
    return out;
  }

  Distribution output(const Vector& h) const {
    if (h.size() != p_.hidden_dim) throw std::invalid_argument("hidden state dimension mismatch");
    const std::size_t n = alphabet_.extended_size();
    Distribution logits(n);
    for (std::size_t y = 0; y < n; ++y) logits[y] = dot(p_.output_embedding.row(y), h);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (auto& l : logits) {
      l = std::exp(l - mx);
      z += l;
    }
    for (auto& l : logits) l /= z;
    return logits;
  }

  Distribution conditional(const Str& prefix) const override { return output(hidden(prefix)); }

  std::unique_ptr<AsmCursor> start() const override { return std::make_unique<Cursor>(*this); }

  /// sup over symbols a ∈ Σ of ‖u_a − u_EOS‖₂
  double output_gap() const {
    const auto ue = p_.output_embedding.row(alphabet_.eos_index());
    double k = 0.0;
    for (Symbol a = 0; a < alphabet_.size(); ++a) {
      const auto ua = p_.output_embedding.row(a);
      double s = 0.0;
      for (std::size_t i = 0; i < ua.size(); ++i) s += (ua[i] - ue[i]) * (ua[i] - ue[i]);
      k = std::max(k, std::sqrt(s));
    }
    return k;
  }

 private:
  class Cursor final : public AsmCursor {
   public:
    explicit Cursor(const RnnAsm& owner) : owner_(&owner), h_(owner.p_.h0) {}
    Distribution conditional() const override { return owner_->output(h_); }
    void advance(Symbol a) override { h_ = owner_->step(h_, a); }
    std::unique_ptr<AsmCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    const RnnAsm* owner_;
    Vector h_;
  };

  Alphabet alphabet_;
  RnnParams p_;
};

inline Vector rnn_step(const RnnAsm& m, const Vector& h, Symbol x) { return m.step(h, x); }
inline Distribution rnn_conditional(const RnnAsm& m, const Vector& h) { return m.output(h); }

namespace detail {

inline RnnAsm scalar_rnn(Activation act, double w, double u, double bias) {
  RnnParams p;
  p.hidden_dim = 1;
  p.input_embedding = Matrix{{1.0}, {0.0}};
  p.output_embedding = Matrix{{1.0}, {0.0}};
  p.w = Matrix{{w}};
  p.u = Matrix{{u}};
  p.bias = {bias};
  p.activation = act;
  p.h0 = {0.0};
  return RnnAsm(Alphabet({"a"}), std::move(p));
}

}  // namespace detail

/// One-symbol ReLU RNN with h ← ReLU(h + 1) from h = 0. After t−1 symbols the
/// hidden state is t−1, so EOS at step t has probability 1/(e^{t−1} + 1).
inline RnnAsm make_nontight_relu_rnn() { return detail::scalar_rnn(Activation::Relu, 1.0, 1.0, 0.0); }

/// One-symbol softplus RNN with h ← log(e^h + 1) from h = 0. After t−1
/// symbols the hidden state is log t, so EOS at step t has probability 1/(t+1).
inline RnnAsm make_tight_softplus_rnn() {
  return detail::scalar_rnn(Activation::Softplus, 0.0, 1.0, 0.0);
}

// --- parity ----------------------------------------------------------------

/// EOS has probability p_even at even steps and zero at odd steps; remaining
/// mass is uniform over the alphabet. Generates only odd-length strings.
class ParityAsm final : public Asm {
 public:
  ParityAsm(double eos_prob_even, Alphabet alphabet)
      : alphabet_(std::move(alphabet)), p_even_(eos_prob_even) {
    if (!(eos_prob_even > 0.0 && eos_prob_even < 1.0))
      throw std::out_of_range("parity EOS probability must lie in (0, 1)");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  double eos_prob_even() const noexcept { return p_even_; }

  /// Conditional at generation step t (prefix length t − 1).
  Distribution at_step(std::size_t t) const {
    const double eos = (t % 2 == 0) ? p_even_ : 0.0;
    Distribution out(alphabet_.extended_size(), (1.0 - eos) / static_cast<double>(alphabet_.size()));
    out[alphabet_.eos_index()] = eos;
    return out;
  }

  Distribution conditional(const Str& prefix) const override {
    alphabet_.check(prefix);
    return at_step(prefix.size() + 1);
  }

 private:
  Alphabet alphabet_;
  double p_even_;
};

inline ParityAsm make_parity_asm(double p_even = 0.1, Alphabet alphabet = Alphabet({"a", "b"})) {
  return ParityAsm(p_even, std::move(alphabet));
}

}  // namespace lmtight

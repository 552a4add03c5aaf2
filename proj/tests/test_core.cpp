#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

namespace lmtight {
namespace {

// Bigram table with b absorbing: conditionals depend only on the last symbol.
FunctionAsm bigram_table() {
  Alphabet ab({"a", "b"});
  return FunctionAsm(ab, [](const Str& x) -> Distribution {
    if (x.empty()) return {1.0, 0.0, 0.0};
    if (x.back() == 0) return {0.7, 0.2, 0.1};
    return {0.0, 1.0, 0.0};
  });
}

// Prefix-dependent random conditionals, reproducible per prefix.
FunctionAsm hashed_asm(std::size_t k, std::uint64_t salt) {
  return FunctionAsm(testing::letters(k), [k, salt](const Str& x) {
    std::uint64_t h = salt;
    for (Symbol a : x) h = h * 1000003u + a + 1;
    std::mt19937_64 rng(h);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Distribution d(k + 1);
    double z = 0.0;
    for (auto& v : d) z += (v = u(rng));
    for (auto& v : d) v /= z;
    return d;
  });
}

TEST(Alphabet, RejectsBadSymbolSets) {
  EXPECT_THROW(Alphabet(std::vector<std::string>{}), std::invalid_argument);
  EXPECT_THROW(Alphabet({"a", "a"}), std::invalid_argument);
  EXPECT_THROW(Alphabet({"a", "EOS"}), std::invalid_argument);
  EXPECT_NO_THROW(Alphabet({"a", "EOS"}, "</s>"));
}

TEST(Alphabet, ParsesWordsAndCharacters) {
  Alphabet ab({"a", "b"});
  EXPECT_EQ(ab.parse("a b a"), (Str{0, 1, 0}));
  EXPECT_EQ(ab.parse("aba"), (Str{0, 1, 0}));
  EXPECT_EQ(ab.parse(""), Str{});
  EXPECT_EQ(ab.eos_index(), 2u);
  EXPECT_EQ(ab.extended_size(), 3u);
  EXPECT_THROW(ab.parse("a c"), UnknownSymbol);

  Alphabet words({"the", "cat"});
  EXPECT_EQ(words.parse("the cat"), (Str{0, 1}));
  EXPECT_THROW(words.parse("thecat"), UnknownSymbol);
}

TEST(ValidateConditional, UniformVectorPasses) {
  const Distribution d(4, 0.25);
  EXPECT_NO_THROW(validate_distribution(d, 4, {}, 1e-9));
}

TEST(ValidateConditional, ShortfallIsRejected) {
  const Distribution d{0.3, 0.3, 0.3};
  try {
    validate_distribution(d, 3, Str{0}, 1e-9);
    FAIL() << "expected NotADistribution";
  } catch (const NotADistribution& e) {
    EXPECT_NEAR(e.sum(), 0.9, 1e-12);
    EXPECT_EQ(e.prefix(), Str{0});
  }
}

TEST(ValidateConditional, NegativeEntryIsOffending) {
  const Distribution d{1.2, -0.2, 0.0};
  try {
    validate_distribution(d, 3, {}, 1e-9);
    FAIL() << "expected NotADistribution";
  } catch (const NotADistribution& e) {
    EXPECT_EQ(e.offending(), std::vector<std::size_t>{1});
  }
}

TEST(ValidateConditional, BigramRowAfterA) {
  const auto m = bigram_table();
  EXPECT_NO_THROW(validate_conditional(m, Str{0}, 1e-9));
  const auto d = m.conditional(Str{0});
  EXPECT_DOUBLE_EQ(d[0], 0.7);
  EXPECT_DOUBLE_EQ(d[1], 0.2);
  EXPECT_DOUBLE_EQ(d[2], 0.1);
}

TEST(ValidateConditional, ModelWithBadRowIsCaughtByProbability) {
  FunctionAsm bad(Alphabet({"a"}), [](const Str&) { return Distribution{0.5, 0.4}; });
  EXPECT_THROW(string_probability(bad, Str{0}), NotADistribution);
}

TEST(StringProbability, BigramValues) {
  const auto m = bigram_table();
  EXPECT_NEAR(string_probability(m, Str{0}), 0.1, 1e-15);
  EXPECT_EQ(string_probability(m, Str{0, 1}), 0.0);
  EXPECT_NEAR(string_probability(m, Str{0, 0, 0}), 0.7 * 0.7 * 0.1, 1e-15);
  EXPECT_EQ(string_probability(m, Str{}), 0.0);
}

TEST(StringProbability, EmptyStringIsEosAtStart) {
  const auto m = hashed_asm(2, 7);
  EXPECT_DOUBLE_EQ(string_probability(m, Str{}), m.conditional({})[2]);
}

TEST(StringProbability, UnknownSymbolThrows) {
  const auto m = bigram_table();
  EXPECT_THROW(string_probability(m, Str{5}), UnknownSymbol);
}

TEST(PrefixProbability, Values) {
  const auto m = bigram_table();
  EXPECT_EQ(prefix_probability(m, Str{}), 1.0);
  EXPECT_NEAR(prefix_probability(m, Str{0, 0}), 0.7, 1e-15);
  EXPECT_NEAR(prefix_probability(m, Str{0, 1}), 0.2, 1e-15);
  EXPECT_EQ(prefix_probability(m, Str{1}), 0.0);
  EXPECT_EQ(prefix_probability(m, Str{1, 0, 0}), 0.0);
}

TEST(PrefixProbability, DecompositionOnBigram) {
  const auto m = bigram_table();
  for (const Str& x : testing::all_strings(2, 5)) {
    double rhs = string_probability(m, x);
    for (Symbol a = 0; a < 2; ++a) {
      Str xa = x;
      xa.push_back(a);
      rhs += prefix_probability(m, xa);
    }
    EXPECT_NEAR(prefix_probability(m, x), rhs, 1e-9);
  }
}

TEST(CoreProperties, RandomAsmsSatisfyInvariants) {
  for (std::uint64_t salt = 1; salt <= 12; ++salt) {
    const std::size_t k = 1 + salt % 3;
    const auto m = hashed_asm(k, salt);
    const auto strings = testing::all_strings(k, k == 3 ? 4 : 6);
    double mass = 0.0;
    for (const Str& x : strings) {
      const auto d = m.conditional(x);
      double z = 0.0;
      for (double v : d) z += v;
      EXPECT_NEAR(z, 1.0, 1e-9);

      const double px = prefix_probability(m, x);
      double rhs = string_probability(m, x);
      for (Symbol a = 0; a < k; ++a) {
        Str xa = x;
        xa.push_back(a);
        const double pxa = prefix_probability(m, xa);
        EXPECT_LE(pxa, px + 1e-15);
        rhs += pxa;
      }
      EXPECT_NEAR(px, rhs, 1e-9);
      mass += string_probability(m, x);
      EXPECT_LE(mass, 1.0 + 1e-12);
    }
  }
}

TEST(Cursor, DefaultReplayMatchesConditional) {
  const auto m = hashed_asm(3, 99);
  auto cur = m.start();
  Str x;
  for (Symbol a : Str{2, 0, 1, 1}) {
    cur->advance(a);
    x.push_back(a);
    auto branch = cur->clone();
    EXPECT_EQ(branch->conditional(), m.conditional(x));
  }
}

}  // namespace
}  // namespace lmtight

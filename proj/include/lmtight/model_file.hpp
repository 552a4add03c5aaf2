#pragma once

// Plain-text model files.
//
//   # comment
//   kind = sfssm                 header: key = value lines
//   alphabet = a b
//   states = BOS a b
//
//   [init]                       sections: one entry per line
//   BOS 1
//   [trans a]
//   BOS a 1
//   a a 0.7
//   [trans b]
//   a b 0.2
//   b b 1
//   [term]
//   a 0.1
//
// Kinds: sfssm, rnn, parity, builtin. Absent entries are zero. Written files
// use shortest round-trip decimal literals, so read(write(m)) == m exactly.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <openssl/evp.h>

#include "lmtight/core.hpp"
#include "lmtight/linalg.hpp"
#include "lmtight/sfssm.hpp"
#include "lmtight/tightness.hpp"
#include "lmtight/zoo.hpp"

namespace lmtight {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

using AnyModel = std::variant<Sfssm, RnnAsm, ParityAsm>;

struct LoadedModel {
  AnyModel model;
  std::string name;    // builtin name or file path
  std::string digest;  // SHA-256 of the canonical text, hex
  /// Bounds known analytically for builtin examples; reported as notes.
  std::optional<EosBoundFamily> known_lower_bound;
  std::optional<EosBoundFamily> known_upper_bound;

  bool is_sfssm() const noexcept { return std::holds_alternative<Sfssm>(model); }
  const char* kind() const noexcept {
    switch (model.index()) {
      case 0: return "sfssm";
      case 1: return "rnn";
      default: return "parity";
    }
  }
};

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::logic_error("cannot format number");
  return std::string(buf.data(), end);
}

// --- canonical form and digest -------------------------------------------------

/// Drops comments and blank lines and collapses whitespace.
inline std::string canonicalize(std::string_view text) {
  std::string out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    for (std::size_t i = 0; i < line.size(); ++i)
      if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.resize(i);
        break;
      }
    std::istringstream words(line);
    std::string joined;
    for (std::string w; words >> w;) {
      if (!joined.empty()) joined += ' ';
      joined += w;
    }
    if (joined.empty()) continue;
    out += joined;
    out += '\n';
  }
  return out;
}

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

// --- writing ----------------------------------------------------------------------

namespace detail {

inline void write_alphabet(std::ostringstream& os, const Alphabet& a) {
  os << "alphabet =";
  for (const auto& s : a.symbols()) os << ' ' << s;
  os << '\n';
  if (a.eos() != "EOS") os << "eos = " << a.eos() << '\n';
}

inline void write_rows(std::ostringstream& os, const Alphabet& a, const Matrix& m) {
  for (std::size_t y = 0; y < m.rows(); ++y) {
    os << a.name(y);
    for (double v : m.row(y)) os << ' ' << format_double(v);
    os << '\n';
  }
}

inline void write_dense(std::ostringstream& os, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
    os << '\n';
  }
}

inline void write_vector(std::ostringstream& os, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
  os << '\n';
}

}  // namespace detail

inline std::string write_model(const Sfssm& m) {
  std::ostringstream os;
  os << "kind = sfssm\n";
  detail::write_alphabet(os, m.alphabet());
  os << "states =";
  for (const auto& n : m.state_names()) os << ' ' << n;
  os << "\n\n[init]\n";
  for (std::size_t q = 0; q < m.num_states(); ++q)
    if (m.init()[q] != 0.0) os << m.state_name(q) << ' ' << format_double(m.init()[q]) << '\n';
  for (Symbol a = 0; a < m.alphabet().size(); ++a) {
    os << "\n[trans " << m.alphabet().name(a) << "]\n";
    const Matrix& p = m.trans(a);
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j)
        if (p(i, j) != 0.0)
          os << m.state_name(i) << ' ' << m.state_name(j) << ' ' << format_double(p(i, j)) << '\n';
  }
  os << "\n[term]\n";
  for (std::size_t q = 0; q < m.num_states(); ++q)
    if (m.term()[q] != 0.0) os << m.state_name(q) << ' ' << format_double(m.term()[q]) << '\n';
  return os.str();
}

inline std::string write_model(const RnnAsm& m) {
  const auto& p = m.params();
  std::ostringstream os;
  os << "kind = rnn\n";
  detail::write_alphabet(os, m.alphabet());
  os << "hidden_dim = " << p.hidden_dim << '\n';
  os << "activation = " << to_string(p.activation) << '\n';
  os << "\n[h0]\n";
  detail::write_vector(os, p.h0);
  os << "\n[input_embedding]\n";
  detail::write_rows(os, m.alphabet(), p.input_embedding);
  os << "\n[output_embedding]\n";
  detail::write_rows(os, m.alphabet(), p.output_embedding);
  os << "\n[W]\n";
  detail::write_dense(os, p.w);
  os << "\n[U]\n";
  detail::write_dense(os, p.u);
  os << "\n[bias]\n";
  detail::write_vector(os, p.bias);
  return os.str();
}

inline std::string write_model(const ParityAsm& m) {
  std::ostringstream os;
  os << "kind = parity\n";
  detail::write_alphabet(os, m.alphabet());
  os << "eos_prob_even = " << format_double(m.eos_prob_even()) << '\n';
  return os.str();
}

inline std::string write_model(const AnyModel& m) {
  return std::visit([](const auto& x) { return write_model(x); }, m);
}

// --- reading ----------------------------------------------------------------------

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

struct Line {
  std::size_t number;
  std::vector<Token> tokens;
};

inline std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i >= raw.size() || raw[i] == '#') break;
      const std::size_t start = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      line.tokens.push_back({raw.substr(start, i - start), start + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

inline double parse_number(const Token& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError(line, tok.column, "expected a number, got '" + tok.text + "'");
  return v;
}

struct Section {
  std::size_t line;
  std::vector<Token> header;  // tokens inside the brackets
  std::vector<Line> body;
};

struct Document {
  std::map<std::string, std::pair<Line, std::vector<Token>>> fields;  // key → (line, values)
  std::vector<Section> sections;
  std::size_t last_line = 0;

  const std::vector<Token>& need(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError(last_line + 1, 1, "missing header field '" + key + "'");
    return it->second.second;
  }
  std::size_t line_of(const std::string& key) const { return fields.at(key).first.number; }
  bool has(const std::string& key) const { return fields.count(key) != 0; }
};

inline Document parse_document(std::string_view text) {
  Document doc;
  for (auto& line : tokenize(text)) {
    doc.last_line = line.number;
    const Token& first = line.tokens.front();
    if (first.text.front() == '[') {
      std::string joined;
      for (const auto& t : line.tokens) joined += (joined.empty() ? "" : " ") + t.text;
      if (joined.back() != ']' || joined.size() < 3)
        throw ParseError(line.number, first.column, "malformed section header");
      std::istringstream inner(joined.substr(1, joined.size() - 2));
      Section s{line.number, {}, {}};
      std::size_t col = first.column + 1;
      for (std::string w; inner >> w;) s.header.push_back({w, col++});
      if (s.header.empty()) throw ParseError(line.number, first.column, "empty section header");
      doc.sections.push_back(std::move(s));
      continue;
    }
    if (!doc.sections.empty()) {
      doc.sections.back().body.push_back(std::move(line));
      continue;
    }
    if (line.tokens.size() < 2 || line.tokens[1].text != "=")
      throw ParseError(line.number, first.column, "expected 'key = value' in header");
    std::vector<Token> values(line.tokens.begin() + 2, line.tokens.end());
    if (!doc.fields.emplace(first.text, std::make_pair(line, values)).second)
      throw ParseError(line.number, first.column, "duplicate header field '" + first.text + "'");
  }
  return doc;
}

inline Alphabet read_alphabet(const Document& doc) {
  std::vector<std::string> symbols;
  for (const auto& t : doc.need("alphabet")) symbols.push_back(t.text);
  std::string eos = "EOS";
  if (doc.has("eos")) {
    const auto& v = doc.need("eos");
    if (v.size() != 1) throw ParseError(doc.line_of("eos"), 1, "eos takes one name");
    eos = v[0].text;
  }
  try {
    return Alphabet(std::move(symbols), std::move(eos));
  } catch (const std::invalid_argument& e) {
    throw ParseError(doc.line_of("alphabet"), 1, e.what());
  }
}

inline const Token& single(const Document& doc, const std::string& key) {
  const auto& v = doc.need(key);
  if (v.size() != 1) throw ParseError(doc.line_of(key), 1, key + " takes exactly one value");
  return v[0];
}

inline void expect_arity(const Line& l, std::size_t n) {
  if (l.tokens.size() != n)
    throw ParseError(l.number, l.tokens.front().column,
                     "expected " + std::to_string(n) + " fields, got " + std::to_string(l.tokens.size()));
}

inline Sfssm read_sfssm(const Document& doc) {
  Alphabet alphabet = read_alphabet(doc);
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  for (const auto& t : doc.need("states")) {
    if (!index.emplace(t.text, names.size()).second)
      throw ParseError(doc.line_of("states"), t.column, "duplicate state '" + t.text + "'");
    names.push_back(t.text);
  }
  if (names.empty()) throw ParseError(doc.line_of("states"), 1, "no states declared");
  const std::size_t q = names.size();
  auto state = [&](const Token& t, std::size_t line) {
    auto it = index.find(t.text);
    if (it == index.end()) throw ParseError(line, t.column, "unknown state '" + t.text + "'");
    return it->second;
  };

  Vector init(q, 0.0), term(q, 0.0);
  std::vector<Matrix> trans(alphabet.size(), Matrix(q, q));
  std::set<std::string> seen_sections;
  for (const auto& s : doc.sections) {
    const std::string& kind = s.header[0].text;
    std::string key = kind;
    if (kind == "init" || kind == "term") {
      if (s.header.size() != 1) throw ParseError(s.line, s.header[1].column, "unexpected token in header");
      Vector& v = kind == "init" ? init : term;
      std::set<std::size_t> seen;
      for (const auto& l : s.body) {
        expect_arity(l, 2);
        const std::size_t i = state(l.tokens[0], l.number);
        if (!seen.insert(i).second) throw ParseError(l.number, l.tokens[0].column, "duplicate entry");
        v[i] = parse_number(l.tokens[1], l.number);
      }
    } else if (kind == "trans") {
      if (s.header.size() != 2) throw ParseError(s.line, s.header[0].column, "expected [trans SYMBOL]");
      if (!alphabet.contains(s.header[1].text))
        throw ParseError(s.line, s.header[1].column, "unknown symbol '" + s.header[1].text + "'");
      key += " " + s.header[1].text;
      Matrix& m = trans[alphabet.symbol(s.header[1].text)];
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (const auto& l : s.body) {
        expect_arity(l, 3);
        const std::size_t i = state(l.tokens[0], l.number);
        const std::size_t j = state(l.tokens[1], l.number);
        if (!seen.insert({i, j}).second) throw ParseError(l.number, l.tokens[0].column, "duplicate entry");
        m(i, j) = parse_number(l.tokens[2], l.number);
      }
    } else {
      throw ParseError(s.line, s.header[0].column, "unknown section '" + kind + "'");
    }
    if (!seen_sections.insert(key).second)
      throw ParseError(s.line, s.header[0].column, "duplicate section [" + key + "]");
  }
  const std::size_t at = doc.last_line;
  try {
    return build_sfssm(std::move(alphabet), std::move(trans), std::move(init), std::move(term),
                       std::move(names));
  } catch (const BadInit& e) {
    throw ParseError(at, 1, e.what());
  } catch (const BadRow& e) {
    throw ParseError(at, 1, e.what());
  } catch (const NegativeEntry& e) {
    throw ParseError(at, 1, e.what());
  }
}

inline const Section& find_section(const Document& doc, const std::string& name) {
  for (const auto& s : doc.sections)
    if (s.header[0].text == name) return s;
  throw ParseError(doc.last_line + 1, 1, "missing section [" + name + "]");
}

inline Vector read_row(const Line& l, std::size_t from, std::size_t d) {
  expect_arity(l, from + d);
  Vector v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = parse_number(l.tokens[from + i], l.number);
  return v;
}

inline Matrix read_dense(const Document& doc, const std::string& name, std::size_t d) {
  const auto& s = find_section(doc, name);
  if (s.body.size() != d) throw ParseError(s.line, 1, "[" + name + "] needs " + std::to_string(d) + " rows");
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const Vector row = read_row(s.body[i], 0, d);
    for (std::size_t j = 0; j < d; ++j) m(i, j) = row[j];
  }
  return m;
}

inline Vector read_single_row(const Document& doc, const std::string& name, std::size_t d) {
  const auto& s = find_section(doc, name);
  if (s.body.size() != 1) throw ParseError(s.line, 1, "[" + name + "] needs one row");
  return read_row(s.body[0], 0, d);
}

inline Matrix read_embedding(const Document& doc, const std::string& name, const Alphabet& a,
                             std::size_t d) {
  const auto& s = find_section(doc, name);
  Matrix m(a.extended_size(), d);
  std::set<std::size_t> seen;
  for (const auto& l : s.body) {
    const Token& sym = l.tokens[0];
    std::size_t y = 0;
    if (sym.text == a.eos()) {
      y = a.eos_index();
    } else if (a.contains(sym.text)) {
      y = a.symbol(sym.text);
    } else {
      throw ParseError(l.number, sym.column, "unknown symbol '" + sym.text + "'");
    }
    if (!seen.insert(y).second) throw ParseError(l.number, sym.column, "duplicate embedding row");
    const Vector row = read_row(l, 1, d);
    for (std::size_t j = 0; j < d; ++j) m(y, j) = row[j];
  }
  if (seen.size() != a.extended_size())
    throw ParseError(s.line, 1, "[" + name + "] needs one row per symbol and EOS");
  return m;
}

inline RnnAsm read_rnn(const Document& doc) {
  Alphabet alphabet = read_alphabet(doc);
  const Token& dim = single(doc, "hidden_dim");
  const double dv = parse_number(dim, doc.line_of("hidden_dim"));
  if (dv < 1 || dv != std::floor(dv) || dv > 4096)
    throw ParseError(doc.line_of("hidden_dim"), dim.column, "hidden_dim must be a positive integer");
  const auto d = static_cast<std::size_t>(dv);
  const Token& act = single(doc, "activation");
  RnnParams p;
  p.hidden_dim = d;
  try {
    p.activation = parse_activation(act.text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(doc.line_of("activation"), act.column, e.what());
  }
  p.h0 = read_single_row(doc, "h0", d);
  p.input_embedding = read_embedding(doc, "input_embedding", alphabet, d);
  p.output_embedding = read_embedding(doc, "output_embedding", alphabet, d);
  p.w = read_dense(doc, "W", d);
  p.u = read_dense(doc, "U", d);
  p.bias = read_single_row(doc, "bias", d);
  return RnnAsm(std::move(alphabet), std::move(p));
}

inline ParityAsm read_parity(const Document& doc) {
  Alphabet alphabet = read_alphabet(doc);
  const Token& t = single(doc, "eos_prob_even");
  const double p = parse_number(t, doc.line_of("eos_prob_even"));
  try {
    return ParityAsm(p, std::move(alphabet));
  } catch (const std::out_of_range& e) {
    throw ParseError(doc.line_of("eos_prob_even"), t.column, e.what());
  }
}

}  // namespace detail

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"fig1a", "fig1b", "relu-rnn", "softplus-rnn", "parity"};
  return names;
}

inline LoadedModel load_builtin(const std::string& name) {
  const std::string canonical = "kind = builtin\nname = " + name + "\n";
  auto make = [&](AnyModel m) { return LoadedModel{std::move(m), "builtin:" + name, sha256_hex(canonical), {}, {}}; };
  if (name == "fig1a") return make(make_fig1a());
  if (name == "fig1b") return make(make_fig1b());
  if (name == "relu-rnn") {
    auto m = make(make_nontight_relu_rnn());
    // p̃_eos(t) = 1/(e^{t−1}+1) ≤ e·e^{−t}
    m.known_upper_bound = EosBoundFamily::geometric(std::numbers::e, 1.0 / std::numbers::e);
    return m;
  }
  if (name == "softplus-rnn") {
    auto m = make(make_tight_softplus_rnn());
    m.known_lower_bound = EosBoundFamily::harmonic(1.0, 1.0);
    return m;
  }
  if (name == "parity") return make(make_parity_asm());
  throw std::invalid_argument("unknown builtin model '" + name + "'");
}

/// Parses a model document. `name` labels the result.
inline LoadedModel parse_model(std::string_view text, std::string name = "<string>") {
  const auto doc = detail::parse_document(text);
  const auto& kind_tok = detail::single(doc, "kind");
  const std::string& kind = kind_tok.text;
  if (kind == "builtin") {
    const auto& n = detail::single(doc, "name");
    try {
      return load_builtin(n.text);
    } catch (const std::invalid_argument& e) {
      throw ParseError(doc.line_of("name"), n.column, e.what());
    }
  }
  const std::string digest = sha256_hex(canonicalize(text));
  if (kind == "sfssm") return {detail::read_sfssm(doc), std::move(name), digest, {}, {}};
  if (kind == "rnn") return {detail::read_rnn(doc), std::move(name), digest, {}, {}};
  if (kind == "parity") return {detail::read_parity(doc), std::move(name), digest, {}, {}};
  throw ParseError(doc.line_of("kind"), kind_tok.column, "unknown model kind '" + kind + "'");
}

/// Loads "builtin:NAME" or a model file from disk.
inline LoadedModel load_model(const std::string& path) {
  constexpr std::string_view prefix = "builtin:";
  if (path.rfind(prefix, 0) == 0) return load_builtin(path.substr(prefix.size()));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

}  // namespace lmtight

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace lmtight {

enum class VerdictKind { Tight, NonTight, Inconclusive };

enum class CertificateKind {
  CoAccessibility,       // every accessible state can reach termination
  UniformEosBound,       // EOS probability ≥ ε > 0 at every prefix
  DivergentBoundFamily,  // EOS probability ≥ f(t) with Σ f(t) = ∞
  EosHitsOne,            // p̃_eos(t₀) = 1: generation surely stops by t₀
  LogNormBound,          // k‖ĥ_t‖ ≤ log t for all t ≥ N
};

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Tight: return "Tight";
    case VerdictKind::NonTight: return "NonTight";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::CoAccessibility: return "CoAccessibility";
    case CertificateKind::UniformEosBound: return "UniformEosBound";
    case CertificateKind::DivergentBoundFamily: return "DivergentBoundFamily";
    case CertificateKind::EosHitsOne: return "EosHitsOne";
    case CertificateKind::LogNormBound: return "LogNormBound";
  }
  return "?";
}

struct Certificate {
  CertificateKind kind;
  /// ε for UniformEosBound, t₀ for EosHitsOne, N for LogNormBound; unused otherwise.
  double parameter = 0.0;
  std::string detail;
};

/// Outcome of a tightness analysis. NonTight always carries a witness state or
/// a positive leaked mass; Tight always carries a certificate.
class TightnessVerdict {
 public:
  static TightnessVerdict tight(Certificate cert) {
    TightnessVerdict v(VerdictKind::Tight);
    v.certificate_ = std::move(cert);
    return v;
  }

  static TightnessVerdict non_tight(std::optional<std::size_t> witness,
                                    std::optional<double> leaked_mass, std::string evidence = {}) {
    if (!witness && !(leaked_mass && *leaked_mass > 0.0))
      throw std::logic_error("NonTight verdict needs a witness state or positive leaked mass");
    TightnessVerdict v(VerdictKind::NonTight);
    v.witness_ = witness;
    v.leaked_mass_ = leaked_mass;
    v.evidence_ = std::move(evidence);
    return v;
  }

  static TightnessVerdict inconclusive(std::string evidence) {
    TightnessVerdict v(VerdictKind::Inconclusive);
    v.evidence_ = std::move(evidence);
    return v;
  }

  VerdictKind kind() const noexcept { return kind_; }
  bool is_tight() const noexcept { return kind_ == VerdictKind::Tight; }
  bool is_non_tight() const noexcept { return kind_ == VerdictKind::NonTight; }
  bool is_inconclusive() const noexcept { return kind_ == VerdictKind::Inconclusive; }

  const std::optional<Certificate>& certificate() const noexcept { return certificate_; }
  const std::optional<std::size_t>& witness() const noexcept { return witness_; }
  /// For NonTight from a tail bound this is a certified lower bound on the leak.
  const std::optional<double>& leaked_mass() const noexcept { return leaked_mass_; }
  const std::string& evidence() const noexcept { return evidence_; }

 private:
  explicit TightnessVerdict(VerdictKind k) : kind_(k) {}

  VerdictKind kind_;
  std::optional<Certificate> certificate_;
  std::optional<std::size_t> witness_;
  std::optional<double> leaked_mass_;
  std::string evidence_;
};

}  // namespace lmtight

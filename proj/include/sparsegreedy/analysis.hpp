#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "sparsegreedy/dictionary.hpp"

namespace sparsegreedy {

enum class Method { exact, sampled };

const char* to_string(Method method);

/// A dictionary constant. `sampled` values are lower bounds over the
/// supports (or sign patterns, ascent starts) actually visited; `seed`
/// identifies the sample. An infinite value flags a linearly dependent support.
struct ConstantEstimate {
  double value = 0.0;
  Method method = Method::exact;
  std::uint64_t seed = 0;
  /// Support attaining the value (A, and B where the constant has one).
  std::vector<int> witness_a;
  std::vector<int> witness_b;

  bool infinite() const noexcept;
};

struct AnalysisConfig {
  /// Exhaustive enumeration when the number of supports (A, B) is at most this.
  std::uint64_t cap = 200'000;
  /// Sign patterns are enumerated exactly for |A| ≤ this many bits.
  int max_sign_bits = 10;
  /// Supports drawn when enumeration exceeds `cap`.
  std::size_t samples = 2'000;
  /// Multi-start ascent for ratio constants without a convex reformulation.
  int ascent_starts = 20;
  int ascent_iters = 500;
  std::size_t ascent_supports = 32;
  double kkt_tol = 1e-10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// max_{i≠j} |⟨g_i, g_j⟩| / (‖g_i‖₂‖g_j‖₂) in the weighted p = 2 pairing.
double coherence(const Dictionary& dict);

/// Smallest δ with (1−δ)‖a‖² ≤ ‖Σ aᵢgᵢ‖² ≤ (1+δ)‖a‖² over all s-element supports (p = 2 pairing).
ConstantEstimate rip_delta(const Dictionary& dict, int s, const AnalysisConfig& cfg = {});

/// ((1+δ)/(1−δ))^{1/2}: the unconditionality constant implied by a Riesz dictionary.
double riesz_U_from_delta(double delta);

/// Smallest U with ‖Σ_A cᵢgᵢ‖ ≤ U‖Σ_B cᵢgᵢ‖ for A ⊂ B, |A| ≤ K, |B| ≤ D.
/// Exact at p = 2; multi-start ascent lower bound otherwise.
ConstantEstimate unconditionality_U(const Dictionary& dict, int K, int D, const AnalysisConfig& cfg = {});

/// Smallest C1 with Σ_A|xᵢ| ≤ C1|A|^r ‖Σ_A xᵢgᵢ‖ for |A| ≤ K.
ConstantEstimate nikolskii_C1(const Dictionary& dict, int K, double r, const AnalysisConfig& cfg = {});

/// Smallest V with Σ_A|cᵢ| ≤ V|A|^r ‖Σ_B cᵢgᵢ‖ for A ⊂ B, |A| ≤ K, |B| ≤ D.
ConstantEstimate ell1_incoherence_V(const Dictionary& dict, int K, int D, double r, const AnalysisConfig& cfg = {});

/// Smallest B with ‖Σ_Λ cᵢg¹ᵢ‖ ≤ B‖Σ_Λ cᵢg²ᵢ‖ over |Λ| ≤ D, both sides
/// measured in the space of `d1`. Exact when that space has p = 2.
ConstantEstimate check_domination(const Dictionary& d1, const Dictionary& d2, int D, const AnalysisConfig& cfg = {});

/// Constants of d2 inherited from d1 through domination / equivalence.
double transfer_nikolskii(double c1_of_d1, double domination);
double transfer_ell1_incoherence(double v_of_d1, double domination);
double transfer_unconditionality(double u_of_d1, double e1, double e2);

/// E1, E2 with E1·d1 ≤ d2 ≤ E2·d1; E1 = 1/B(d1 ≤ B·d2), E2 = B(d2 ≤ B·d1).
struct Equivalence {
  ConstantEstimate lower;  // E1
  ConstantEstimate upper;  // E2
};
Equivalence equivalence_constants(const Dictionary& d1, const Dictionary& d2, int D, const AnalysisConfig& cfg = {});

struct PropertyReport {
  double coherence = 0.0;
  std::map<int, ConstantEstimate> rip;
  std::map<std::pair<int, int>, ConstantEstimate> unconditionality;      // (K, D)
  std::map<std::pair<int, double>, ConstantEstimate> nikolskii;          // (K, r)
  std::map<std::tuple<int, int, double>, ConstantEstimate> ell1_incoherence;  // (K, D, r)
};

struct AnalysisRequest {
  std::vector<int> rip_sparsities;
  std::vector<int> K;
  std::vector<int> D;
  std::vector<double> r;
  bool unconditionality = true;
  bool nikolskii = true;
  bool ell1_incoherence = true;
};

PropertyReport analyze(const Dictionary& dict, const AnalysisRequest& request, const AnalysisConfig& cfg = {});

nlohmann::json to_json(const ConstantEstimate& c);
nlohmann::json to_json(const PropertyReport& report);

}  // namespace sparsegreedy

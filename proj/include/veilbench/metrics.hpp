#pragma once

// Divergence measures between a clean summary and an injected one: ROUGE-L
// F1 over token sequences and cosine similarity over embeddings, plus the
// embedding provider interface with an offline fallback.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "veilbench/common.hpp"

namespace veilbench::metrics {

// ---------------------------------------------------------------------------
// tokenization
// ---------------------------------------------------------------------------

// Lowercase word-split: ASCII alphanumerics and any non-ASCII byte are token
// characters (UTF-8 sequences stay intact), everything else is a boundary.
// ASCII letters are lowercased; no empty tokens are produced. ROUGE values
// depend on this scheme, so it is fixed and documented here.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    bool word = (u >= 0x80) || (c >= '0' && c <= '9') ||
                (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (word) {
      cur.push_back(ascii_lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// ---------------------------------------------------------------------------
// ROUGE-L
// ---------------------------------------------------------------------------

struct RougeConfig {
  double beta = 1.0;
};

struct RougeScore {
  int lcs_len = 0;
  int ref_len = 0;   // m
  int cand_len = 0;  // n
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// classic two-row DP; O(|a|*|b|) time, O(min(|a|,|b|)) space
inline int lcs_length(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
  const std::vector<std::string>& rows = a.size() >= b.size() ? a : b;
  const std::vector<std::string>& cols = a.size() >= b.size() ? b : a;
  if (cols.empty()) return 0;

  std::vector<int> prev(cols.size() + 1, 0), cur(cols.size() + 1, 0);
  for (const std::string& r : rows) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      cur[j + 1] = r == cols[j] ? prev[j] + 1 : std::max(prev[j + 1], cur[j]);
    }
    std::swap(prev, cur);
  }
  return prev[cols.size()];
}

// R = LCS/m, P = LCS/n, F1 = (1+beta^2)*R*P / (R + beta^2*P); all components
// are zero when either sequence is empty or the LCS is, so degenerate input
// never divides by zero.
inline RougeScore rouge_l_f1(const std::vector<std::string>& reference,
                             const std::vector<std::string>& candidate,
                             const RougeConfig& cfg = {}) {
  RougeScore s;
  s.ref_len = static_cast<int>(reference.size());
  s.cand_len = static_cast<int>(candidate.size());
  if (s.ref_len == 0 || s.cand_len == 0) return s;
  s.lcs_len = lcs_length(reference, candidate);
  if (s.lcs_len == 0) return s;
  s.recall = static_cast<double>(s.lcs_len) / s.ref_len;
  s.precision = static_cast<double>(s.lcs_len) / s.cand_len;
  double b2 = cfg.beta * cfg.beta;
  s.f1 = (1.0 + b2) * s.recall * s.precision / (s.recall + b2 * s.precision);
  return s;
}

inline RougeScore rouge_l_f1(std::string_view reference,
                             std::string_view candidate,
                             const RougeConfig& cfg = {}) {
  return rouge_l_f1(tokenize(reference), tokenize(candidate), cfg);
}

// ---------------------------------------------------------------------------
// embeddings
// ---------------------------------------------------------------------------

inline constexpr std::size_t kEmbeddingDims = 384;

struct EmbeddingVector {
  std::vector<double> dims;
  std::string provider_id;
};

inline double cosine_similarity(const EmbeddingVector& u,
                                const EmbeddingVector& v) {
  if (u.dims.size() != v.dims.size())
    throw EmbeddingMismatch("dimension mismatch: " +
                            std::to_string(u.dims.size()) + " vs " +
                            std::to_string(v.dims.size()));
  if (u.provider_id != v.provider_id)
    throw EmbeddingMismatch("provider mismatch: " + u.provider_id + " vs " +
                            v.provider_id);
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.dims.size(); ++i) {
    dot += u.dims[i] * v.dims[i];
    nu += u.dims[i] * u.dims[i];
    nv += v.dims[i] * v.dims[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw DegenerateEmbedding("cosine over zero-magnitude vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual const std::string& id() const = 0;
};

// Offline stand-in: hashed term frequencies. Each token lands in one of 384
// buckets via fnv1a64, counts are L2-normalized. Deterministic and platform
// independent, but its scores are not comparable to any neural provider;
// downstream reports carry provider_id next to every number for that reason.
class FallbackEmbedder final : public EmbeddingProvider {
public:
  EmbeddingVector embed(std::string_view text) override {
    std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty())
      throw DegenerateEmbedding("cannot embed text with no tokens");
    EmbeddingVector v;
    v.provider_id = id();
    v.dims.assign(kEmbeddingDims, 0.0);
    for (const std::string& t : tokens)
      v.dims[fnv1a64(t) % kEmbeddingDims] += 1.0;
    double norm = 0.0;
    for (double d : v.dims) norm += d * d;
    norm = std::sqrt(norm);
    for (double& d : v.dims) d /= norm;
    return v;
  }

  const std::string& id() const override {
    static const std::string kId = "fallback-tf-384";
    return kId;
  }
};

inline EmbeddingVector embed(std::string_view text,
                             EmbeddingProvider& provider) {
  return provider.embed(text);
}

}  // namespace veilbench::metrics

#pragma once

// Shared plumbing: error types, deterministic RNG, hashing, base64,
// string/file helpers. Everything here is locale- and time-independent
// unless the name says otherwise.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace veilbench {

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// filesystem / OS failures; carries the offending path in the message
class IoError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class SchemaMismatch : public Error {
public:
  using Error::Error;
};

class CorruptManifest : public Error {
public:
  using Error::Error;
};

class AnchorMissing : public Error {
public:
  using Error::Error;
};

class DegenerateEmbedding : public Error {
public:
  using Error::Error;
};

class EmbeddingMismatch : public Error {
public:
  using Error::Error;
};

class NotFound : public Error {
public:
  using Error::Error;
};

// states that the library guarantees unreachable
class InternalError : public Error {
public:
  using Error::Error;
};

class BindError : public IoError {
public:
  using IoError::IoError;
};

// transport / upstream-service failure; retryable distinguishes transient
// faults (timeouts, 5xx, 408/429) from hard ones
class ProviderError : public Error {
public:
  ProviderError(const std::string& msg, int status, bool retryable)
      : Error(msg), status_(status), retryable_(retryable) {}
  int status() const { return status_; }
  bool retryable() const { return retryable_; }

private:
  int status_;
  bool retryable_;
};

// ---------------------------------------------------------------------------
// hashing & deterministic rng
// ---------------------------------------------------------------------------

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// stable per-item seed; resizing a corpus never reshuffles earlier pages
constexpr std::uint64_t derive_seed(std::uint64_t global, std::string_view tag,
                                    std::uint64_t index) {
  return mix64(mix64(global ^ fnv1a64(tag)) ^ index);
}

// mt19937_64 gives a standard-fixed sequence; the bounded draw below avoids
// std::uniform_int_distribution, whose output is implementation-defined
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  std::uint64_t below(std::uint64_t bound) {
    // multiply-shift; bound must be > 0
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

  // inclusive range
  int range(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // any indexable container (vector, array, C array)
  template <class C>
  const auto& pick(const C& c) {
    return c[below(std::size(c))];
  }

  template <class C>
  void shuffle(C& c) {
    for (std::size_t i = std::size(c); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(c[i - 1], c[j]);
    }
  }

  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

private:
  std::mt19937_64 eng_;
};

inline std::string to_hex(const unsigned char* data, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1)
    throw InternalError("sha256 digest failed");
  return to_hex(md, n);
}

// ---------------------------------------------------------------------------
// base64 (RFC 4648, with padding)
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace detail

inline std::string base64_encode(std::string_view in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= in.size()) {
    std::uint32_t v = (static_cast<unsigned char>(in[i]) << 16) |
                      (static_cast<unsigned char>(in[i + 1]) << 8) |
                      static_cast<unsigned char>(in[i + 2]);
    out.push_back(detail::kB64Alphabet[(v >> 18) & 63]);
    out.push_back(detail::kB64Alphabet[(v >> 12) & 63]);
    out.push_back(detail::kB64Alphabet[(v >> 6) & 63]);
    out.push_back(detail::kB64Alphabet[v & 63]);
    i += 3;
  }
  std::size_t rem = in.size() - i;
  if (rem == 1) {
    std::uint32_t v = static_cast<unsigned char>(in[i]) << 16;
    out.push_back(detail::kB64Alphabet[(v >> 18) & 63]);
    out.push_back(detail::kB64Alphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rem == 2) {
    std::uint32_t v = (static_cast<unsigned char>(in[i]) << 16) |
                      (static_cast<unsigned char>(in[i + 1]) << 8);
    out.push_back(detail::kB64Alphabet[(v >> 18) & 63]);
    out.push_back(detail::kB64Alphabet[(v >> 12) & 63]);
    out.push_back(detail::kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

// strict: length multiple of 4, valid alphabet, padding only at the end
inline std::optional<std::string> base64_decode(std::string_view in) {
  if (in.empty() || in.size() % 4 != 0) return std::nullopt;
  std::string out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      char c = in[i + k];
      if (c == '=') {
        if (i + 4 != in.size() || k < 2) return std::nullopt;
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) return std::nullopt;  // data after padding
      int d = detail::b64_value(c);
      if (d < 0) return std::nullopt;
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// strings
// ---------------------------------------------------------------------------

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

inline bool contains_ci(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return true;
  if (needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() && ascii_lower(hay[i + k]) == ascii_lower(needle[k]))
      ++k;
    if (k == needle.size()) return true;
  }
  return false;
}

// whitespace runs -> single space, trimmed
inline std::string collapse_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_ws(c)) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

inline std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

// write-temp-then-rename; safe against concurrent writers of the same key
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view content) {
  namespace fs = std::filesystem;
  static std::atomic<std::uint64_t> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory: " +
                          path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp.string() + " -> " +
                        path.string() + ": " + ec.message());
}

inline std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

// ---------------------------------------------------------------------------
// time
// ---------------------------------------------------------------------------

inline std::string utc_now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::int64_t steady_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace veilbench

// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hotproof {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

/// A SHA-256 digest. Also used for every other fixed 32-byte value
/// (txids, block hashes, measurements, report data, nonces).
struct Hash32 {
  std::array<std::uint8_t, 32> bytes{};

  ByteView view() const { return bytes; }
  auto operator<=>(const Hash32&) const = default;
};

Hash32 sha256(ByteView data);
inline Hash32 sha256(std::string_view s) { return sha256(as_bytes(s)); }

std::string to_hex(ByteView data);
inline std::string to_hex(const Hash32& h) { return to_hex(h.view()); }
/// Throws Error(ParseError) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);
/// Throws Error(ParseError) unless the input decodes to exactly 32 bytes.
Hash32 hash_from_hex(std::string_view hex);
Hash32 hash_from_bytes(ByteView data);

std::string to_base64(ByteView data);
inline std::string to_base64(std::string_view s) { return to_base64(as_bytes(s)); }
/// Strict decoding: rejects non-canonical padding bits.
Bytes from_base64(std::string_view b64);

Bytes random_bytes(std::size_t n);

/// Ed25519 public key.
struct PublicKey {
  std::array<std::uint8_t, 32> bytes{};

  ByteView view() const { return bytes; }
  std::string hex() const { return to_hex(view()); }
  /// Short fingerprint: first 8 bytes of SHA-256(key), hex.
  std::string key_id() const;
  auto operator<=>(const PublicKey&) const = default;

  static PublicKey from_hex(std::string_view hex);
  static PublicKey from_bytes(ByteView data);
};

/// Ed25519 signing key. Signatures are deterministic, so the same key and
/// message always yield the same 64 bytes.
class SigningKey {
public:
  /// Derives the key from SHA-256(seed). Reproducible fixtures depend on this.
  static SigningKey from_seed(std::string_view seed);
  static SigningKey generate();

  const PublicKey& public_key() const { return public_; }
  Bytes sign(ByteView message) const;

private:
  SigningKey() = default;

  std::array<std::uint8_t, 64> secret_{};
  PublicKey public_;
};

/// False for any signature that is not exactly 64 bytes.
bool verify_signature(const PublicKey& key, ByteView message, ByteView signature);

/// Big-endian, length-prefixed binary encoder for signed tuples.
class ByteWriter {
public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& raw(ByteView data);
  ByteWriter& raw(const Hash32& h) { return raw(h.view()); }
  /// u32 length followed by the bytes.
  ByteWriter& prefixed(ByteView data);
  ByteWriter& prefixed(std::string_view s) { return prefixed(as_bytes(s)); }

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

private:
  Bytes out_;
};

} // namespace hotproof

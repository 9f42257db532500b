// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/crypto.hpp"

#include "hotproof/error.hpp"

#include <sodium.h>

#include <cstring>

namespace hotproof {

namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0)
      throw std::runtime_error("libsodium initialization failed");
    return true;
  }();
  (void)ready;
}

} // namespace

Hash32 sha256(ByteView data) {
  ensure_sodium();
  Hash32 out;
  crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
  return out;
}

std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9')
      return c - '0';
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
      return c - 'A' + 10;
    throw Error(ErrorCode::ParseError, "invalid hex character");
  };
  if (hex.size() % 2 != 0)
    throw Error(ErrorCode::ParseError, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

Hash32 hash_from_bytes(ByteView data) {
  if (data.size() != 32)
    throw Error(ErrorCode::ParseError, "expected 32 bytes, got " + std::to_string(data.size()));
  Hash32 h;
  std::memcpy(h.bytes.data(), data.data(), 32);
  return h;
}

Hash32 hash_from_hex(std::string_view hex) {
  return hash_from_bytes(from_hex(hex));
}

std::string to_base64(ByteView data) {
  ensure_sodium();
  const auto variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_encoded_len(data.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
  out.resize(std::strlen(out.c_str()));
  return out;
}

Bytes from_base64(std::string_view b64) {
  ensure_sodium();
  Bytes out(b64.size() / 4 * 3 + 3);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), b64.data(), b64.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != b64.data() + b64.size())
    throw Error(ErrorCode::ParseError, "invalid base64");
  out.resize(len);
  return out;
}

Bytes random_bytes(std::size_t n) {
  ensure_sodium();
  Bytes out(n);
  randombytes_buf(out.data(), n);
  return out;
}

std::string PublicKey::key_id() const {
  auto h = sha256(view());
  return to_hex(ByteView(h.bytes).first(8));
}

PublicKey PublicKey::from_bytes(ByteView data) {
  if (data.size() != crypto_sign_PUBLICKEYBYTES)
    throw Error(ErrorCode::ParseError, "public key must be 32 bytes");
  PublicKey k;
  std::memcpy(k.bytes.data(), data.data(), data.size());
  return k;
}

PublicKey PublicKey::from_hex(std::string_view hex) {
  return from_bytes(hotproof::from_hex(hex));
}

SigningKey SigningKey::from_seed(std::string_view seed) {
  ensure_sodium();
  auto digest = sha256(seed);
  SigningKey k;
  crypto_sign_seed_keypair(k.public_.bytes.data(), k.secret_.data(), digest.bytes.data());
  return k;
}

SigningKey SigningKey::generate() {
  ensure_sodium();
  SigningKey k;
  crypto_sign_keypair(k.public_.bytes.data(), k.secret_.data());
  return k;
}

Bytes SigningKey::sign(ByteView message) const {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

bool verify_signature(const PublicKey& key, ByteView message, ByteView signature) {
  ensure_sodium();
  if (signature.size() != crypto_sign_BYTES)
    return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                     key.bytes.data()) == 0;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::raw(ByteView data) {
  out_.insert(out_.end(), data.begin(), data.end());
  return *this;
}

ByteWriter& ByteWriter::prefixed(ByteView data) {
  u32(static_cast<std::uint32_t>(data.size()));
  return raw(data);
}

} // namespace hotproof

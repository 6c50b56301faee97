#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voice::gateway {

std::string base64_encode(const std::uint8_t* data, std::size_t size);
std::string base64_encode(std::string_view bytes);

/// Strict RFC 4648 decode; nullopt on malformed input.
std::optional<std::string> base64_decode(std::string_view text);

std::string encode_pcm16(const std::vector<std::int16_t>& samples);
/// Little-endian PCM16. nullopt when the payload is not valid base64 or
/// has an odd byte count.
std::optional<std::vector<std::int16_t>> decode_pcm16(std::string_view b64);

}  // namespace voice::gateway

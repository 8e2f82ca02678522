#include "hdrx/anonymizer.hpp"

#include <sodium.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace hdrx {

namespace {

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

}  // namespace

AnonymizerKey AnonymizerKey::random() {
    ensure_sodium();
    std::array<std::uint8_t, kSize> bytes;
    randombytes_buf(bytes.data(), bytes.size());
    return AnonymizerKey(bytes);
}

AnonymizerKey load_key_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open key file " + path.string());
    std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

    std::array<std::uint8_t, AnonymizerKey::kSize> bytes{};
    if (content.size() == AnonymizerKey::kSize) {
        std::copy(content.begin(), content.end(), bytes.begin());
        return AnonymizerKey(bytes);
    }

    auto first = content.find_first_not_of(" \t\r\n");
    auto last = content.find_last_not_of(" \t\r\n");
    std::string hex = first == std::string::npos ? std::string{}
                                                 : content.substr(first, last - first + 1);
    if (hex.size() != 2 * AnonymizerKey::kSize) {
        throw std::runtime_error("key file " + path.string() +
                                 " must hold 16 raw bytes or 32 hex digits");
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw std::runtime_error("key file " + path.string() + " contains non-hex characters");
        }
        bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return AnonymizerKey(bytes);
}

std::optional<AnonymizerKey> key_from_environment() {
    const char* path = std::getenv(kKeyFileEnvVar);
    if (path == nullptr || *path == '\0') return std::nullopt;
    return load_key_file(path);
}

std::uint32_t KeyedAnonymizer::anonymize(std::uint32_t ip) const {
    return hdrx::anonymize(ip, key_);
}

std::uint32_t anonymize(std::uint32_t ip, const AnonymizerKey& key) {
    static_assert(crypto_shorthash_siphash24_KEYBYTES == AnonymizerKey::kSize);
    const std::uint8_t msg[4] = {static_cast<std::uint8_t>(ip >> 24),
                                 static_cast<std::uint8_t>(ip >> 16),
                                 static_cast<std::uint8_t>(ip >> 8),
                                 static_cast<std::uint8_t>(ip)};
    std::uint8_t out[crypto_shorthash_siphash24_BYTES];
    crypto_shorthash_siphash24(out, msg, sizeof msg, key.data());
    // Low 32 bits of the little-endian 64-bit tag.
    return std::uint32_t{out[0]} | (std::uint32_t{out[1]} << 8) | (std::uint32_t{out[2]} << 16) |
           (std::uint32_t{out[3]} << 24);
}

}  // namespace hdrx

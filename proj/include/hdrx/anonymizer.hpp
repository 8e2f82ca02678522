#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>

namespace hdrx {

inline constexpr const char* kKeyFileEnvVar = "HDRX_KEY_FILE";

// 16-byte secret for the keyed address pseudonymization. Deliberately has no
// stream or string conversion.
class AnonymizerKey {
public:
    static constexpr std::size_t kSize = 16;

    AnonymizerKey() = default;
    explicit AnonymizerKey(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

    static AnonymizerKey random();

    const std::uint8_t* data() const noexcept { return bytes_.data(); }
    bool operator==(const AnonymizerKey&) const = default;

private:
    std::array<std::uint8_t, kSize> bytes_{};
};

/// Reads a key file holding either exactly 16 raw bytes or 32 hex digits
/// (surrounding whitespace allowed). Throws std::runtime_error otherwise.
AnonymizerKey load_key_file(const std::filesystem::path& path);

/// Key file named by $HDRX_KEY_FILE, if set.
std::optional<AnonymizerKey> key_from_environment();

// Address pseudonymization strategy. Implementations must be pure and
// thread-safe.
class Anonymizer {
public:
    virtual ~Anonymizer() = default;
    virtual std::uint32_t anonymize(std::uint32_t ip) const = 0;
};

// SipHash-2-4 keyed PRF over the big-endian address, truncated to 32 bits.
class KeyedAnonymizer final : public Anonymizer {
public:
    explicit KeyedAnonymizer(const AnonymizerKey& key) : key_(key) {}
    std::uint32_t anonymize(std::uint32_t ip) const override;

private:
    AnonymizerKey key_;
};

std::uint32_t anonymize(std::uint32_t ip, const AnonymizerKey& key);

}  // namespace hdrx

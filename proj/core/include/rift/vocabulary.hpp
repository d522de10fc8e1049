#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rift {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Token inventory with a fixed special-token layout: id 0 is PAD, 1 is BOS,
/// 2 is EOS, 3 is the answer delimiter "=". Content tokens follow, then any
/// filler tokens. The fixed layout lets response verification work without a
/// vocabulary in hand.
class Vocabulary {
public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kBos = 1;
    static constexpr TokenId kEos = 2;
    static constexpr TokenId kEquals = 3;

    Vocabulary() = default;

    /// [PAD, BOS, EOS, =, content..., filler...].
    static Vocabulary standard(std::vector<std::string> content, std::size_t filler = 0);

    /// Plain token list without the special layout; for oracle universes that
    /// never touch task verification.
    static Vocabulary raw(std::vector<std::string> tokens);

    std::size_t size() const { return tokens_.size(); }
    const std::string& text(TokenId id) const;
    std::optional<TokenId> find(const std::string& text) const;
    bool contains(TokenId id) const {
        return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
    }
    void require(const TokenSeq& seq) const;

    /// Space-joined token texts; PAD tokens are dropped.
    std::string render(const TokenSeq& seq) const;

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);

    bool operator==(const Vocabulary& other) const {
        return tokens_ == other.tokens_ && has_specials_ == other.has_specials_;
    }

private:
    std::vector<std::string> tokens_;
    bool has_specials_ = true;
};

}  // namespace rift

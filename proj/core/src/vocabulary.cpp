#include "rift/vocabulary.hpp"

#include "rift/errors.hpp"

namespace rift {

Vocabulary Vocabulary::standard(std::vector<std::string> content, std::size_t filler) {
    Vocabulary v;
    v.tokens_ = {"<pad>", "<bos>", "<eos>", "="};
    for (auto& t : content) {
        v.tokens_.push_back(std::move(t));
    }
    for (std::size_t i = 0; i < filler; ++i) {
        v.tokens_.push_back("<u" + std::to_string(i) + ">");
    }
    return v;
}

Vocabulary Vocabulary::raw(std::vector<std::string> tokens) {
    if (tokens.empty()) {
        throw InputError("vocabulary requires at least one token");
    }
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    v.has_specials_ = false;
    return v;
}

const std::string& Vocabulary::text(TokenId id) const {
    if (!contains(id)) {
        throw InputError("unknown token id " + std::to_string(id));
    }
    return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(const std::string& text) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i] == text) return static_cast<TokenId>(i);
    }
    return std::nullopt;
}

void Vocabulary::require(const TokenSeq& seq) const {
    for (TokenId t : seq) {
        if (!contains(t)) {
            throw InputError("unknown token id " + std::to_string(t));
        }
    }
}

std::string Vocabulary::render(const TokenSeq& seq) const {
    std::string out;
    for (TokenId t : seq) {
        if (has_specials_ && t == kPad) continue;
        if (!out.empty()) out += ' ';
        out += text(t);
    }
    return out;
}

nlohmann::json Vocabulary::to_json() const {
    return nlohmann::json{{"tokens", tokens_}, {"specials", has_specials_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    Vocabulary v;
    v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
    v.has_specials_ = j.value("specials", true);
    if (v.tokens_.empty() || (v.has_specials_ && v.tokens_.size() < 4)) {
        throw InputError("vocabulary token list is too small");
    }
    return v;
}

}  // namespace rift

#include "rift/tasks.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "rift/errors.hpp"
#include "rift/rng.hpp"

namespace rift {

namespace {

// First content token id; the four specials occupy [0, 4).
constexpr TokenId kContentBase = 4;

TokenId letter_token(int letter) {
    // Letters sit after the "+" token in copy/reverse vocabularies; for the
    // modular task digits start right at the content base + 1 ("+" first).
    return kContentBase + 1 + letter;
}

}  // namespace

std::string task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::modular_addition: return "modular_addition";
        case TaskKind::copy_sequence: return "copy";
        case TaskKind::reverse_sequence: return "reverse";
    }
    return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "modular_addition") return TaskKind::modular_addition;
    if (name == "copy") return TaskKind::copy_sequence;
    if (name == "reverse") return TaskKind::reverse_sequence;
    throw InputError("unknown task kind: " + name);
}

Vocabulary TaskSpec::vocabulary() const {
    std::vector<std::string> content;
    content.push_back("+");
    if (kind == TaskKind::modular_addition) {
        for (int d = 0; d < modulus; ++d) {
            content.push_back(std::to_string(d));
        }
    } else {
        for (int a = 0; a < alphabet; ++a) {
            content.push_back(std::string(1, static_cast<char>('a' + a)));
        }
    }
    return Vocabulary::standard(std::move(content), static_cast<std::size_t>(vocab_padding));
}

std::uint64_t TaskSpec::universe_size() const {
    if (kind == TaskKind::modular_addition) {
        if (modulus < 2) {
            throw InputError("modular_addition requires modulus >= 2");
        }
        return static_cast<std::uint64_t>(modulus) * static_cast<std::uint64_t>(modulus);
    }
    if (alphabet < 1 || length < 1) {
        throw InputError("copy/reverse require alphabet >= 1 and length >= 1");
    }
    std::uint64_t n = 1;
    for (int i = 0; i < length; ++i) {
        if (n > (UINT64_MAX / static_cast<std::uint64_t>(alphabet))) {
            throw CapacityError("task universe overflows");
        }
        n *= static_cast<std::uint64_t>(alphabet);
    }
    return n;
}

std::size_t TaskSpec::answer_length() const {
    return kind == TaskKind::modular_addition ? 1 : static_cast<std::size_t>(length);
}

nlohmann::json TaskSpec::to_json() const {
    return nlohmann::json{
        {"kind", task_kind_name(kind)}, {"modulus", modulus},
        {"alphabet", alphabet},         {"length", length},
        {"vocab_padding", vocab_padding},
    };
}

TaskSpec TaskSpec::from_json(const nlohmann::json& j) {
    TaskSpec s;
    s.kind = task_kind_from_name(j.at("kind").get<std::string>());
    s.modulus = j.value("modulus", 5);
    s.alphabet = j.value("alphabet", 2);
    s.length = j.value("length", 3);
    s.vocab_padding = j.value("vocab_padding", 0);
    return s;
}

Problem problem_from_id(const TaskSpec& spec, std::uint64_t id) {
    Problem p;
    p.id = static_cast<int>(id);
    if (spec.kind == TaskKind::modular_addition) {
        int m = spec.modulus;
        int a = static_cast<int>(id) / m;
        int b = static_cast<int>(id) % m;
        int c = (a + b) % m;
        TokenId digit_base = kContentBase + 1;
        p.prompt = {Vocabulary::kBos, digit_base + a, kContentBase /* + */, digit_base + b,
                    Vocabulary::kEquals};
        p.answer = {digit_base + c};
    } else {
        std::vector<int> letters(static_cast<std::size_t>(spec.length));
        std::uint64_t rest = id;
        for (int i = spec.length - 1; i >= 0; --i) {
            letters[static_cast<std::size_t>(i)] = static_cast<int>(rest % spec.alphabet);
            rest /= static_cast<std::uint64_t>(spec.alphabet);
        }
        p.prompt.push_back(Vocabulary::kBos);
        for (int l : letters) p.prompt.push_back(letter_token(l));
        p.prompt.push_back(Vocabulary::kEquals);
        if (spec.kind == TaskKind::reverse_sequence) {
            std::reverse(letters.begin(), letters.end());
        }
        for (int l : letters) p.answer.push_back(letter_token(l));
    }
    p.gold_solution = p.answer;
    p.gold_solution.push_back(Vocabulary::kEos);
    return p;
}

std::vector<Problem> generate_problems(const TaskSpec& spec,
                                       std::size_t n,
                                       std::uint64_t seed,
                                       std::size_t offset) {
    if (n < 1) {
        throw InputError("generate_problems requires n >= 1");
    }
    std::uint64_t universe = spec.universe_size();
    if (offset + n > universe) {
        throw CapacityError("requested problems exceed the task universe (" +
                            std::to_string(universe) + ")");
    }
    Rng rng = Rng(seed).derive(RngTag::problems);
    std::unordered_set<std::uint64_t> seen;
    std::vector<Problem> out;
    out.reserve(n);
    std::size_t drawn = 0;
    while (drawn < offset + n) {
        std::uint64_t id = rng.next_below(universe);
        if (!seen.insert(id).second) continue;
        ++drawn;
        if (drawn > offset) {
            out.push_back(problem_from_id(spec, id));
        }
    }
    return out;
}

bool verify_response(const Problem& problem, const TokenSeq& response) {
    // Region before the first EOS (whole response when none).
    std::size_t end = response.size();
    for (std::size_t i = 0; i < response.size(); ++i) {
        if (response[i] == Vocabulary::kEos) {
            end = i;
            break;
        }
    }
    // Answer segment starts after the last delimiter inside the region.
    std::size_t begin = 0;
    for (std::size_t i = 0; i < end; ++i) {
        if (response[i] == Vocabulary::kEquals) {
            begin = i + 1;
        }
    }
    std::size_t len = end - begin;
    if (len != problem.answer.size() || len == 0) {
        return false;
    }
    return std::equal(response.begin() + static_cast<std::ptrdiff_t>(begin),
                      response.begin() + static_cast<std::ptrdiff_t>(end),
                      problem.answer.begin());
}

std::string problems_to_jsonl(std::span<const Problem> problems, const Vocabulary& vocab) {
    std::ostringstream out;
    for (const Problem& p : problems) {
        nlohmann::json j{
            {"id", p.id},
            {"prompt", p.prompt},
            {"answer", p.answer},
            {"gold_solution", p.gold_solution},
            {"prompt_text", vocab.render(p.prompt)},
            {"answer_text", vocab.render(p.answer)},
            {"gold_text", vocab.render(p.gold_solution)},
        };
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace rift

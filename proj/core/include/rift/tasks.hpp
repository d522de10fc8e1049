#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rift/vocabulary.hpp"

namespace rift {

enum class TaskKind {
    modular_addition,
    copy_sequence,
    reverse_sequence,
};

std::string task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(const std::string& name);

/// Synthetic verifiable-reward problem family. Correctness of a response is
/// decided purely by a final-answer check, so rewards never need a judge.
struct TaskSpec {
    TaskKind kind = TaskKind::modular_addition;
    int modulus = 5;       // modular_addition
    int alphabet = 2;      // copy/reverse letter count
    int length = 3;        // copy/reverse content length
    int vocab_padding = 0; // extra unused tokens appended to the vocabulary

    Vocabulary vocabulary() const;
    std::uint64_t universe_size() const;
    std::size_t answer_length() const;
    /// Longest gold response (answer + EOS) for this task.
    std::size_t gold_response_length() const { return answer_length() + 1; }

    nlohmann::json to_json() const;
    static TaskSpec from_json(const nlohmann::json& j);
};

struct Problem {
    int id = 0;
    TokenSeq prompt;
    TokenSeq answer;
    TokenSeq gold_solution;  // a response: the answer segment followed by EOS
};

/// n distinct problems drawn without replacement from the task universe,
/// deterministic in (spec, seed). `offset` skips the first draws of the same
/// stream, so disjoint train/test splits come from one seed with offsets.
std::vector<Problem> generate_problems(const TaskSpec& spec,
                                       std::size_t n,
                                       std::uint64_t seed,
                                       std::size_t offset = 0);

/// Problem with a given canonical universe id.
Problem problem_from_id(const TaskSpec& spec, std::uint64_t id);

/// Final-answer check: the tokens after the last "=" delimiter (from the
/// start when no delimiter appears), up to the first EOS, must equal the
/// problem's answer. Total function; malformed responses are simply false.
bool verify_response(const Problem& problem, const TokenSeq& response);

std::string problems_to_jsonl(std::span<const Problem> problems, const Vocabulary& vocab);

}  // namespace rift

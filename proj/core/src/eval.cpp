#include "rift/eval.hpp"

#include <sstream>

#include "rift/errors.hpp"

namespace rift {

std::pair<double, double> mean_pass_at_k(const std::vector<std::vector<bool>>& correct,
                                         std::size_t threshold) {
    if (correct.empty()) {
        throw InputError("mean_pass_at_k requires at least one row");
    }
    std::size_t k = correct.front().size();
    if (k == 0) {
        throw InputError("mean_pass_at_k requires k >= 1");
    }
    double mean_sum = 0.0;
    std::size_t passed = 0;
    for (const auto& row : correct) {
        if (row.size() != k) {
            throw InputError("mean_pass_at_k: ragged correctness matrix");
        }
        std::size_t hits = 0;
        for (bool c : row) {
            if (c) ++hits;
        }
        mean_sum += static_cast<double>(hits) / static_cast<double>(k);
        if (hits >= threshold) ++passed;
    }
    double mean = mean_sum / static_cast<double>(correct.size());
    double pass = static_cast<double>(passed) / static_cast<double>(correct.size());
    return {mean, pass};
}

EvalReport evaluate(const Policy& policy,
                    std::span<const Problem> problems,
                    std::size_t k,
                    double temperature,
                    std::uint64_t seed,
                    std::size_t max_new_tokens,
                    std::size_t pass_threshold) {
    if (k < 1) {
        throw InputError("evaluate requires k >= 1");
    }
    if (problems.empty()) {
        throw InputError("evaluate requires at least one problem");
    }
    EvalReport report;
    report.k = k;
    report.temperature = temperature;
    report.seed = seed;
    report.pass_threshold = pass_threshold;
    Rng root(seed);
    for (const Problem& p : problems) {
        Rng stream = root.derive(RngTag::eval, static_cast<std::uint64_t>(p.id));
        auto responses =
            policy.sample_responses(p.prompt, static_cast<int>(k), temperature, max_new_tokens, stream);
        std::vector<bool> row;
        row.reserve(k);
        for (const SampledResponse& r : responses) {
            row.push_back(verify_response(p, r.tokens));
        }
        report.problem_ids.push_back(p.id);
        report.correct.push_back(std::move(row));
    }
    auto [mean, pass] = mean_pass_at_k(report.correct, pass_threshold);
    report.mean_at_k = mean;
    report.pass_at_k = pass;
    return report;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < problem_ids.size(); ++i) {
        std::vector<int> flags(correct[i].begin(), correct[i].end());
        rows.push_back(nlohmann::json{{"problem_id", problem_ids[i]}, {"correct", flags}});
    }
    return nlohmann::json{
        {"k", k},
        {"temperature", temperature},
        {"seed", seed},
        {"pass_threshold", pass_threshold},
        {"mean_at_k", mean_at_k},
        {"pass_at_k", pass_at_k},
        {"per_problem", std::move(rows)},
    };
}

std::string EvalReport::to_csv(const std::string& task_label) const {
    std::ostringstream out;
    out << "metric," << task_label << ",Avg.\n";
    char line[128];
    std::snprintf(line, sizeof(line), "mean@%zu,%.4f,%.4f\n", k, mean_at_k, mean_at_k);
    out << line;
    std::snprintf(line, sizeof(line), "pass@%zu,%.4f,%.4f\n", k, pass_at_k, pass_at_k);
    out << line;
    return out.str();
}

}  // namespace rift

#include "rift/checkpoint.hpp"

#include <fstream>

#include "rift/errors.hpp"
#include "rift/tabular_policy.hpp"
#include "rift/transformer_policy.hpp"

namespace rift {

void save_checkpoint(const Policy& policy, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot open checkpoint file for writing: " + path.string());
    }
    out << policy.to_json().dump() << '\n';
}

std::unique_ptr<Policy> policy_from_json(const nlohmann::json& j) {
    int version = j.value("version", 0);
    if (version != 1) {
        throw InputError("unsupported checkpoint version " + std::to_string(version));
    }
    std::string family = j.at("family").get<std::string>();
    if (family == "tabular") {
        return TabularPolicy::from_json(j);
    }
    if (family == "transformer") {
        return TransformerPolicy::from_json(j);
    }
    throw InputError("unknown policy family: " + family);
}

std::unique_ptr<Policy> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open checkpoint file: " + path.string());
    }
    nlohmann::json j;
    in >> j;
    return policy_from_json(j);
}

}  // namespace rift

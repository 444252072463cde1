#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace sparseloc {

/// Global CLI options; the seed overrides the config's seed when present.
struct CliOptions {
    std::optional<uint64_t> seed;
    std::string out_dir = ".";
    int threads = 1;
};

nlohmann::json load_config(const std::string& path);

void cmd_simulate(const nlohmann::json& config, const CliOptions& opts);
void cmd_solve(const nlohmann::json& config, const CliOptions& opts);
void cmd_train(const nlohmann::json& config, const CliOptions& opts);
void cmd_infer(const nlohmann::json& config, const CliOptions& opts);
void cmd_eval(const nlohmann::json& config, const CliOptions& opts);
void cmd_render(const nlohmann::json& config, const CliOptions& opts);

}  // namespace sparseloc

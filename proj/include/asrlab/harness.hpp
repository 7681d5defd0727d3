#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace asrlab::harness {

// FNV-1a 64 over the canonical JSON dump / raw file bytes; hex string.
std::string content_hash(const std::string& bytes);
std::string file_hash(const std::string& path);

// Dispatch one subcommand. Loads the JSON config, runs the experiment into
// out_dir, writes manifest.json on success or error.json on failure, and
// returns the process exit code.
int run(const std::string& command, const std::string& config_path,
        const std::string& out_dir, std::optional<std::uint64_t> seed_override);

const std::vector<std::string>& command_names();

}  // namespace asrlab::harness

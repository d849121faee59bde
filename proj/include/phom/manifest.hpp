#pragma once

// Run manifest written next to every data file, with content hashes and
// stage timings.

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace phom {

inline constexpr const char* kVersion = "0.1.0";

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

/// Version string of every library module.
std::map<std::string, std::string> module_versions();

struct StageTime {
    std::string name;
    double seconds = 0.0;
};

class StageTimer {
public:
    explicit StageTimer(std::vector<StageTime>& sink, std::string name);
    ~StageTimer();
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    std::vector<StageTime>& sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string config_hash;   // sha256 of the config file bytes
    std::string payload_hash;  // sha256 of the emitted data
    std::string output_path;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<StageTime> stages;
    std::vector<std::string> warnings;
    int exit_code = 0;

    nlohmann::json to_json() const;
};

}  // namespace phom

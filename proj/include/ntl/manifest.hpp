#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ntl/error.hpp"
#include "ntl/version.hpp"

namespace ntl {

// Run manifest: everything needed to reproduce a run byte-for-byte given the
// same input files — the resolved configuration, the master seed, and input
// digests. Timestamps are informational and the only non-reproducible field.
class RunManifest {
public:
    explicit RunManifest(std::string command) {
        json_["command"] = std::move(command);
        json_["tool_version"] = kVersion;
        json_["started_at"] = now_iso();
    }

    nlohmann::ordered_json& config() { return json_["config"]; }
    nlohmann::ordered_json& inputs() { return json_["inputs"]; }
    nlohmann::ordered_json& outputs() { return json_["outputs"]; }
    nlohmann::ordered_json& stats() { return json_["stats"]; }

    void set_seed(std::uint64_t seed) { json_["seed"] = seed; }

    void write(const std::string& path) {
        json_["finished_at"] = now_iso();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::file_unwritable, path);
        out << json_.dump(2) << '\n';
    }

private:
    static std::string now_iso() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return buf;
    }

    nlohmann::ordered_json json_;
};

}  // namespace ntl

#pragma once

// Run manifests: the resolved parameters of a CLI run plus where its
// outputs went. Replaying the manifest reruns the command bitwise.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "got/config.hpp"
#include "got/errors.hpp"
#include "got/experiments.hpp"
#include "got/io.hpp"

namespace got {

struct RunManifest {
    std::string command;
    KeyValues config;
    std::uint64_t seed = 0;
    std::string started, finished;
    std::string version = kArtifactVersion;
    std::map<std::string, std::string> outputs;  // role -> path
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["config"] = m.config;
    // Seeds are 64-bit; a string survives JSON readers that use doubles.
    j["seed"] = std::to_string(m.seed);
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

inline RunManifest parse_manifest(std::string_view text) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.config = j.at("config").get<KeyValues>();
        m.seed = std::stoull(j.at("seed").get<std::string>());
        m.started = j.value("started", "");
        m.finished = j.value("finished", "");
        m.version = j.value("version", "");
        m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("manifest: ") + e.what());
    } catch (const std::logic_error& e) {
        throw SchemaError(std::string("manifest: bad seed: ") + e.what());
    }
    return m;
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) { atomic_write(path, to_json(m)); }

}  // namespace got

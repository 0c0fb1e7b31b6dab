// Run manifests: every output file gets a sibling <file>.manifest recording
// the full parameter set needed to reproduce it bit-exactly.

#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pcm/common.hpp"

namespace pcm {

struct RunManifest {
    std::string command;                       // subcommand name
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::string> outputs;
    std::string tool_version;
    std::string timestamp;                     // informational only

    void add(const std::string& key, const std::string& value) { params.emplace_back(key, value); }

    // The exact argv (minus program name) that reproduces the run.
    std::string reproduce_args() const {
        std::string s = command;
        for (const auto& [k, v] : params) {
            s += " --" + k;
            if (!v.empty()) s += " " + v;
        }
        return s;
    }
};

inline std::string manifest_path_for(const std::string& output_path) {
    return output_path + ".manifest";
}

inline void write_manifest(const RunManifest& m, const std::string& output_path) {
    std::ofstream os(manifest_path_for(output_path));
    if (!os) throw ParseError("cannot open for writing: " + manifest_path_for(output_path));
    os << "tool=pcm " << m.tool_version << "\n";
    os << "timestamp=" << m.timestamp << "\n";
    os << "command=" << m.command << "\n";
    for (const auto& [k, v] : m.params) os << "param." << k << "=" << v << "\n";
    for (const auto& out : m.outputs) os << "output=" << out << "\n";
    os << "reproduce=" << m.reproduce_args() << "\n";
}

inline std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Reads the reproduce= line back out of a manifest.
inline std::string read_manifest_reproduce(const std::string& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw ParseError("cannot open: " + manifest_path);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind("reproduce=", 0) == 0) return line.substr(10);
    throw ParseError(manifest_path + ": no reproduce line");
}

} // namespace pcm

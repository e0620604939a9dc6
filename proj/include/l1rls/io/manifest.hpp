#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "l1rls/error.hpp"
#include "l1rls/io/config.hpp"
#include "l1rls/io/csv.hpp"

namespace l1rls::io {

/// Record of one successful command. The config snapshot includes every
/// override, so feeding it back through --config reproduces the outputs.
struct RunManifest {
    std::string command;
    std::string output_dir;
    std::string tool_version;
    double duration_s = 0.0;
    json config;                                 ///< null for commands without a configuration
    std::map<std::string, std::string> outputs;  ///< channel -> file name, relative to output_dir

    json to_json() const {
        return {{"command", command},   {"output_dir", output_dir}, {"tool_version", tool_version},
                {"duration_s", duration_s}, {"config", config},      {"outputs", outputs}};
    }
};

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    write_text(tmp.string(), text);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline void write_manifest(const RunManifest& m, const std::string& file = "manifest.json") {
    write_atomic(std::filesystem::path(m.output_dir) / file, m.to_json().dump(2) + "\n");
}

}  // namespace l1rls::io

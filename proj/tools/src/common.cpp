#include "common.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "wgmm/errors.hpp"

namespace wgmmcli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve_out_dir(const std::string& flag_value) {
    std::string dir = flag_value;
    if (dir.empty()) {
        if (const char* env = std::getenv("WGMM_OUT_DIR"); env != nullptr && *env != '\0') {
            dir = env;
        } else {
            dir = ".";
        }
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw wgmm::DataError("cannot create output directory '" + dir + "'");
    }
    return dir;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

namespace {

std::string iso_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
#if defined(_WIN32)
    gmtime_s(&tm_utc, &now);
#else
    gmtime_r(&now, &tm_utc);
#endif
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& resolved_config, const json& outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["resolved_config"] = resolved_config;
    manifest["outputs"] = outputs;
    manifest["meta"] = {{"generated_at", iso_utc_now()}, {"tool_version", WGMM_VERSION}};

    std::string name = command;
    for (char& c : name) {
        if (c == '-' || c == ' ') c = '_';
    }
    const std::string path = join_path(out_dir, name + "_manifest.json");
    std::ofstream out(path);
    if (!out) {
        throw wgmm::DataError("cannot write manifest '" + path + "'");
    }
    out << manifest.dump(2) << '\n';
}

namespace {

std::string trimmed(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquoted(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

}  // namespace

std::vector<std::string> merge_config_args(const std::vector<std::string>& args) {
    std::string config_file;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw std::invalid_argument("--config needs a file path");
            }
            config_file = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_file = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config_file.empty()) {
        return rest;
    }

    std::ifstream in(config_file);
    if (!in) {
        throw std::invalid_argument("cannot read config file '" + config_file + "'");
    }
    std::vector<std::string> synthesized;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trimmed(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        const std::string where =
            config_file + ":" + std::to_string(lineno);
        if (text[0] == '[') {
            throw std::invalid_argument(where + ": config sections are not supported");
        }
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument(where + ": expected key=value, got '" + text + "'");
        }
        const std::string key = trimmed(text.substr(0, eq));
        const std::string value = unquoted(trimmed(text.substr(eq + 1)));
        if (key.find(' ') != std::string::npos) {
            throw std::invalid_argument(where + ": malformed key '" + key + "'");
        }
        // Explicit command-line flags win over the config file.
        const std::string flag = "--" + key;
        bool overridden = false;
        for (const std::string& a : rest) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                overridden = true;
                break;
            }
        }
        if (!overridden) {
            synthesized.push_back(flag + "=" + value);
        }
    }

    // Splice after the leading subcommand names so the tokens land in the
    // right scope.
    std::size_t insert_at = 0;
    while (insert_at < rest.size() && !rest[insert_at].empty() &&
           rest[insert_at][0] != '-') {
        ++insert_at;
    }
    std::vector<std::string> merged(rest.begin(),
                                    rest.begin() + static_cast<std::ptrdiff_t>(insert_at));
    merged.insert(merged.end(), synthesized.begin(), synthesized.end());
    merged.insert(merged.end(), rest.begin() + static_cast<std::ptrdiff_t>(insert_at),
                  rest.end());
    return merged;
}

wgmm::LabeledDataset load_dataset(const std::string& path,
                                  const std::optional<std::string>& label_column,
                                  bool no_labels) {
    wgmm::LabeledDataset data = wgmm::load_csv(path, label_column);
    if (no_labels) {
        data.y.clear();
    }
    return data;
}

struct JsonlWriter::Impl {
    std::ofstream out;
};

JsonlWriter::JsonlWriter(const std::string& path, bool append) : impl_(new Impl) {
    impl_->out.open(path, append ? std::ios::app : std::ios::trunc);
    if (!impl_->out) {
        delete impl_;
        throw wgmm::DataError("cannot open metrics file '" + path + "'");
    }
}

JsonlWriter::~JsonlWriter() { delete impl_; }

void JsonlWriter::write(const json& record) {
    impl_->out << record.dump() << '\n';
    impl_->out.flush();
}

}  // namespace wgmmcli

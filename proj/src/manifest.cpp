#include "barddt/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "barddt/error.hpp"

namespace barddt {

namespace {

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("sha256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("sha256 final failed");
        std::string out;
        char buf[3];
        for (unsigned int k = 0; k < len; ++k) {
            std::snprintf(buf, sizeof buf, "%02x", md[k]);
            out += buf;
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for hashing");
    Digest d;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

std::string sha256_text(const std::string& text) {
    Digest d;
    d.update(text.data(), text.size());
    return d.hex();
}

std::string manifest_key(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (c >= 'A' && c <= 'Z') {
            out += static_cast<char>(c - 'A' + 'a');
        } else {
            out += ok ? c : '_';
        }
    }
    return out;
}

void write_manifest(const std::string& path, const RunConfig& config, const RunManifest& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << render_config(config) << "\n[manifest]\n"
        << "version = " << kVersion << '\n'
        << "command = " << m.command << '\n';
    for (const auto& [k, v] : m.args) out << "arg_" << manifest_key(k) << " = " << v << '\n';
    for (const auto& [k, v] : m.facts) out << manifest_key(k) << " = " << v << '\n';
    for (const auto& [k, v] : m.inputs) out << "input_" << manifest_key(k) << " = " << v << '\n';
    for (const auto& [k, v] : m.outputs) out << "output_" << manifest_key(k) << " = " << v << '\n';
    char buf[40];
    for (const auto& [k, v] : m.timings) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        out << "seconds_" << manifest_key(k) << " = " << buf << '\n';
    }
    if (!out) throw Error("failed writing '" + path + "'");
}

RunManifest read_manifest(const ConfigFile& file) {
    if (!file.has("manifest.command")) throw UsageError(file.source() + ": no [manifest] section with a command");
    RunManifest m;
    m.command = file.get_string("manifest.command");
    for (const auto& [key, entry] : file.entries()) {
        if (key.rfind("manifest.", 0) != 0) continue;
        const auto name = key.substr(9);
        auto strip = [&](const std::string& prefix, auto& into) {
            if (name.rfind(prefix, 0) != 0) return false;
            into.emplace_back(name.substr(prefix.size()), entry.value);
            return true;
        };
        if (strip("arg_", m.args) || strip("input_", m.inputs) || strip("output_", m.outputs)) continue;
        if (name.rfind("seconds_", 0) == 0) continue;
        if (name != "command") m.facts.emplace_back(name, entry.value);
    }
    return m;
}

}  // namespace barddt

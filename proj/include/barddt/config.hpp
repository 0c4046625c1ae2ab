#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "barddt/dgp.hpp"
#include "barddt/evaluation.hpp"
#include "barddt/models.hpp"
#include "barddt/polynomial.hpp"

namespace barddt {

// Flat "key = value" text grouped under [section] headers; '#' starts a comment.
// Keys are addressed as "section.key".
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;  // 0 for values set programmatically
    };

    static ConfigFile parse(std::istream& in, const std::string& source);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_uint64(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma separated

    // Rejects keys outside `known`, except in sections listed in `free_sections`.
    void check_known(const std::vector<std::string>& known, const std::vector<std::string>& free_sections) const;

    const std::map<std::string, Entry>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::string source_ = "command line";
    std::map<std::string, Entry> entries_;
};

struct BenchmarkSettings {
    std::vector<std::string> dgps{"easy1"};
    std::vector<Method> methods{Method::Barddt, Method::TBart, Method::SBart, Method::Polynomial};
    int replications = 10;
    int jobs = 1;
    std::optional<std::size_t> n;  // overrides the per-DGP sample size
};

struct RunConfig {
    std::uint64_t seed = 1;
    ModelConfig model;
    double delta = 0.1;
    std::string dgp_preset;  // empty for a fully custom DGP
    DgpConfig dgp;
    bool calibration_seed_set = false;
    PolySpec poly;
    BenchmarkSettings benchmark;
    int summary_max_depth = 3;
    int summary_min_leaf = 30;

    void validate() const;
};

std::vector<std::string> known_config_keys();

// Defaults, then the DGP preset if named, then explicit keys. Sections listed
// in free_sections (for example "manifest") are not interpreted.
RunConfig run_config_from(const ConfigFile& file);

// Every key with its effective value; parses back to the same RunConfig.
std::string render_config(const RunConfig& config);

// The DGP list a benchmark runs: presets by name, "custom" for the [dgp] section.
BenchmarkConfig benchmark_config(const RunConfig& config);

}  // namespace barddt

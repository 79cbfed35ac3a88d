#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace anderloc::experiment {

// exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 hypothesis-violation verdict (distinguishable from a crash)
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerdict = 4;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "anderloc 0.1.0";

struct Overrides {
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;
    std::string csv_path;
    std::string json_path;
};

RunResult run(const std::string& spec_path, const Overrides& ov = {});

struct Finding {
    bool hard = false;
    std::string message;
};

std::vector<Finding> validate(const std::string& spec_path);

// deterministic shortest-ish double formatting shared by all CSV writers
std::string fmt_double(double v);

} // namespace anderloc::experiment

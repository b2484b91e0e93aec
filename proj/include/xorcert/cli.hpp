// Subcommand entry points of the xorcert binary. Each returns the process
// exit code and writes to the given streams, so tests can drive them.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xorcert/solver.hpp"

namespace xorcert::cli {

constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitLimit = 30;
constexpr int kExitError = 1;
constexpr int kExitVerified = 0;
constexpr int kExitRejected = 2;

int exit_code(SolveStatus s);

// Runtime when the run finished, twice the timeout otherwise.
std::optional<double> par2(SolveStatus s, double seconds, double timeout);

struct RunReport {
    std::string instance;
    std::string mode = "xor";  // "xor" or "no-xor"
    SolveStatus status = SolveStatus::Limit;
    double wall_seconds = 0;
    double timeout = 0;
    uint64_t seed = 0;
    SolveStats stats;
    std::string limit_reason;
    std::optional<bool> verified;  // set when the proof was checked
    double check_seconds = 0;

    nlohmann::json to_json() const;
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xorcert::cli

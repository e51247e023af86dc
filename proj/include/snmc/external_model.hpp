#pragma once

#include <memory>
#include <string>
#include <vector>

#include "snmc/model.hpp"

namespace snmc {

// Couples a user simulator running as a subprocess. Newline-delimited UTF-8
// protocol on the child's stdin/stdout, space-separated fields:
//
//   tool:  HELLO 1
//   model: OK <p>
//   tool:  EVAL <x1> ... <xp> <noise-seed-u64>
//   model: <decimal float>
//
// The tool sends a 64-bit noise seed instead of noise values: the model owns
// its noise distribution and only has to be deterministic given (x, seed).
// NaN or non-numeric replies are protocol errors. Closing the child's stdin
// ends the session.
class ExternalModelSession {
public:
    ExternalModelSession(const std::vector<std::string>& command, double timeout_s);
    ~ExternalModelSession();

    ExternalModelSession(const ExternalModelSession&) = delete;
    ExternalModelSession& operator=(const ExternalModelSession&) = delete;

    int dimension() const { return dimension_; }

    double evaluate(std::span<const double> x, std::uint64_t noise_seed);

private:
    void send_line(const std::string& line);
    std::string read_line(const std::string& context);

    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    double timeout_s_;
    int dimension_ = 0;
    std::string read_buffer_;
};

struct ExternalModelConfig {
    std::vector<std::string> command;
    InputSpec inputs;
    double timeout_s = 60.0;
};

// Wraps the subprocess protocol as a StochasticModel. Each concurrent worker
// gets its own session from an internal pool; sessions are never shared.
StochasticModel make_external_model(const ExternalModelConfig& config);

} // namespace snmc

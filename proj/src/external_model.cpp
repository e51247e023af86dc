#include "snmc/external_model.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "snmc/report_io.hpp"

namespace snmc {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw ProtocolError(what + ": " + std::strerror(errno));
}

} // namespace

ExternalModelSession::ExternalModelSession(const std::vector<std::string>& command,
                                           double timeout_s)
    : timeout_s_(timeout_s) {
    if (command.empty()) throw ProtocolError("external model: empty command line");

    int to_child[2] = {-1, -1};
    int from_child[2] = {-1, -1};
    if (pipe(to_child) != 0) throw_errno("external model: pipe");
    if (pipe(from_child) != 0) {
        close(to_child[0]);
        close(to_child[1]);
        throw_errno("external model: pipe");
    }

    const pid_t pid = fork();
    if (pid < 0) {
        close(to_child[0]); close(to_child[1]);
        close(from_child[0]); close(from_child[1]);
        throw_errno("external model: fork");
    }
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]); close(to_child[1]);
        close(from_child[0]); close(from_child[1]);
        std::vector<char*> argv;
        argv.reserve(command.size() + 1);
        for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }

    child_pid_ = pid;
    to_child_ = to_child[1];
    from_child_ = from_child[0];
    close(to_child[0]);
    close(from_child[1]);

    send_line("HELLO 1");
    const std::string reply = read_line("HELLO 1");
    int p = 0;
    if (sscanf(reply.c_str(), "OK %d", &p) != 1 || p < 1) {
        throw ProtocolError("external model: bad handshake reply '" + reply + "' to request 'HELLO 1'");
    }
    dimension_ = p;
}

ExternalModelSession::~ExternalModelSession() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (child_pid_ > 0) {
        int status = 0;
        // Give the child a moment to exit on EOF, then stop waiting politely.
        const pid_t r = waitpid(child_pid_, &status, WNOHANG);
        if (r == 0) {
            kill(child_pid_, SIGTERM);
            waitpid(child_pid_, &status, 0);
        }
    }
}

void ExternalModelSession::send_line(const std::string& line) {
    const std::string payload = line + "\n";
    std::size_t off = 0;
    while (off < payload.size()) {
        const ssize_t w = write(to_child_, payload.data() + off, payload.size() - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("external model: write failed on request '" + line + "'");
        }
        off += static_cast<std::size_t>(w);
    }
}

std::string ExternalModelSession::read_line(const std::string& context) {
    const double deadline_ms = timeout_s_ * 1000.0;
    double waited_ms = 0.0;
    for (;;) {
        const std::size_t nl = read_buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = read_buffer_.substr(0, nl);
            read_buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int step_ms = 100;
        const int pr = poll(&pfd, 1, step_ms);
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw_errno("external model: poll");
        }
        if (pr == 0) {
            waited_ms += step_ms;
            if (waited_ms >= deadline_ms) {
                throw ProtocolError("external model: timeout after request '" + context + "'");
            }
            continue;
        }
        char buf[4096];
        const ssize_t r = read(from_child_, buf, sizeof(buf));
        if (r < 0) {
            if (errno == EINTR) continue;
            throw_errno("external model: read");
        }
        if (r == 0) {
            throw ProtocolError("external model: pipe closed after request '" + context + "'");
        }
        read_buffer_.append(buf, static_cast<std::size_t>(r));
    }
}

double ExternalModelSession::evaluate(std::span<const double> x, std::uint64_t noise_seed) {
    std::string request = "EVAL";
    for (double v : x) request += " " + format_double(v);
    request += " " + std::to_string(noise_seed);
    send_line(request);
    const std::string reply = read_line(request);

    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(reply.c_str(), &end);
    if (end == reply.c_str() || *end != '\0' || errno == ERANGE) {
        throw ProtocolError("external model: malformed number '" + reply + "' after request '" +
                            request + "'");
    }
    if (std::isnan(value)) {
        throw ProtocolError("external model: NaN output refused after request '" + request + "'");
    }
    return value;
}

namespace {

// Sessions are checked out per evaluation so one subprocess never serves two
// workers at once; idle sessions are kept for reuse.
class SessionPool {
public:
    SessionPool(std::vector<std::string> command, double timeout_s)
        : command_(std::move(command)), timeout_s_(timeout_s) {}

    std::unique_ptr<ExternalModelSession> checkout(int expected_p) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!idle_.empty()) {
                auto session = std::move(idle_.back());
                idle_.pop_back();
                return session;
            }
        }
        auto session = std::make_unique<ExternalModelSession>(command_, timeout_s_);
        if (session->dimension() != expected_p) {
            throw ProtocolError("external model announced dimension " +
                                std::to_string(session->dimension()) + " but the input spec has " +
                                std::to_string(expected_p) + " coordinates");
        }
        return session;
    }

    void give_back(std::unique_ptr<ExternalModelSession> session) {
        std::lock_guard<std::mutex> lock(mutex_);
        idle_.push_back(std::move(session));
    }

private:
    std::vector<std::string> command_;
    double timeout_s_;
    std::mutex mutex_;
    std::vector<std::unique_ptr<ExternalModelSession>> idle_;
};

} // namespace

StochasticModel make_external_model(const ExternalModelConfig& config) {
    auto pool = std::make_shared<SessionPool>(config.command, config.timeout_s);
    const int p = config.inputs.dimension();
    std::string name = "external(";
    for (std::size_t i = 0; i < config.command.size(); ++i) {
        if (i > 0) name += ' ';
        name += config.command[i];
    }
    name += ")";
    StochasticModel model{
        config.inputs,
        [pool, p](std::span<const double> x, NoiseStream& stream) {
            auto session = pool->checkout(p);
            const double value = session->evaluate(x, stream.key());
            pool->give_back(std::move(session));
            return value;
        },
        std::move(name),
    };
    return model;
}

} // namespace snmc

#include "featsig/adapter.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "featsig/errors.hpp"

namespace featsig {

using json = nlohmann::ordered_json;

namespace {

std::once_flag sigpipe_once;

// A dying child must surface as a protocol error on the next write, not as
// a process-killing SIGPIPE.
void ignore_sigpipe() {
    std::call_once(sigpipe_once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void throw_child_gone(const std::string& context, long pid) {
    // EOF usually means the child is mid-exit; give it a moment so the exit
    // status can be reported instead of a generic message.
    int status = 0;
    std::string detail = "adapter produced no output";
    if (pid > 0) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            const pid_t reaped = waitpid(static_cast<pid_t>(pid), &status, WNOHANG);
            if (reaped == static_cast<pid_t>(pid)) {
                if (WIFEXITED(status)) {
                    detail = "adapter exited with status " +
                             std::to_string(WEXITSTATUS(status));
                } else if (WIFSIGNALED(status)) {
                    detail = "adapter was killed by signal " +
                             std::to_string(WTERMSIG(status));
                }
                break;
            }
            if (reaped < 0) break;
            usleep(10000);
        }
    }
    throw protocol_error(detail + " (" + context + ")");
}

json parse_json_line(const std::string& line, const std::string& context) {
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        std::string preview = line.substr(0, 120);
        throw protocol_error("adapter sent malformed JSON (" + context + "): " + preview);
    }
    return doc;
}

}  // namespace

ExternalAdapterModel::ExternalAdapterModel(const std::string& command) : command_(command) {
    ignore_sigpipe();

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
        throw internal_error("pipe() failed: " + std::string(std::strerror(errno)));
    }

    const pid_t pid = fork();
    if (pid < 0) {
        throw internal_error("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    pid_ = pid;
    close(to_child[0]);
    close(from_child[1]);
    to_child_ = fdopen(to_child[1], "w");
    from_child_ = fdopen(from_child[0], "r");
    if (to_child_ == nullptr || from_child_ == nullptr) {
        shutdown();
        throw internal_error("fdopen() failed");
    }

    try {
        const std::string line = read_line("handshake");
        const json handshake = parse_json_line(line, "handshake");
        if (!handshake.contains("arity") || !handshake["arity"].is_number_unsigned() ||
            handshake["arity"].get<std::uint64_t>() == 0) {
            throw protocol_error("adapter handshake must carry a positive integer \"arity\"");
        }
        arity_ = handshake["arity"].get<std::size_t>();
        if (handshake.contains("transfer")) {
            if (!handshake["transfer"].is_string()) {
                throw protocol_error("adapter handshake \"transfer\" must be a string");
            }
            try {
                transfer_ = transfer_from_name(handshake["transfer"].get<std::string>());
            } catch (const Error& e) {
                throw protocol_error(std::string("adapter handshake: ") + e.what());
            }
        }
        if (handshake.contains("supports_g")) {
            if (!handshake["supports_g"].is_boolean()) {
                throw protocol_error("adapter handshake \"supports_g\" must be a boolean");
            }
            supports_g_ = handshake["supports_g"].get<bool>();
        }
    } catch (...) {
        shutdown();
        throw;
    }
}

ExternalAdapterModel::~ExternalAdapterModel() { shutdown(); }

void ExternalAdapterModel::shutdown() noexcept {
    if (to_child_ != nullptr) {
        fclose(to_child_);
        to_child_ = nullptr;
    }
    if (from_child_ != nullptr) {
        fclose(from_child_);
        from_child_ = nullptr;
    }
    if (pid_ > 0) {
        int status = 0;
        waitpid(static_cast<pid_t>(pid_), &status, 0);
        pid_ = -1;
    }
}

std::string ExternalAdapterModel::read_line(const std::string& context) const {
    char* buffer = nullptr;
    std::size_t capacity = 0;
    const ssize_t got = getline(&buffer, &capacity, from_child_);
    if (got < 0) {
        free(buffer);
        throw_child_gone(context, pid_);
    }
    std::string line(buffer, static_cast<std::size_t>(got));
    free(buffer);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    return line;
}

std::vector<double> ExternalAdapterModel::request(const char* op, const Matrix& X) const {
    if (X.cols() != arity_) {
        throw data_error("data arity " + std::to_string(X.cols()) +
                         " does not match adapter arity " + std::to_string(arity_));
    }
    std::lock_guard<std::mutex> lock(io_mutex_);
    const std::uint64_t id = next_id_++;
    const std::string context = "request " + std::to_string(id) + " (op " + op + ")";

    json rows = json::array();
    for (std::size_t i = 0; i < X.rows(); ++i) {
        json row = json::array();
        for (double v : X.row(i)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    json req;
    req["id"] = id;
    req["op"] = op;
    req["X"] = std::move(rows);
    const std::string payload = req.dump();
    if (std::fwrite(payload.data(), 1, payload.size(), to_child_) != payload.size() ||
        std::fputc('\n', to_child_) == EOF || std::fflush(to_child_) != 0) {
        throw_child_gone(context, pid_);
    }

    const std::string line = read_line(context);
    const json resp = parse_json_line(line, context);
    if (!resp.contains("id") || !resp["id"].is_number() ||
        resp["id"].get<std::uint64_t>() != id) {
        throw protocol_error("adapter response id does not match " + context);
    }
    if (!resp.contains("values") || !resp["values"].is_array()) {
        throw protocol_error("adapter response lacks a \"values\" array (" + context + ")");
    }
    const json& values = resp["values"];
    if (values.size() != X.rows()) {
        throw protocol_error("adapter returned " + std::to_string(values.size()) +
                             " values for " + std::to_string(X.rows()) + " rows (" + context +
                             ")");
    }
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_number()) {
            throw protocol_error("adapter returned a non-numeric value (" + context + ")");
        }
        out[i] = values[i].get<double>();
    }
    return out;
}

std::vector<double> ExternalAdapterModel::predict(const Matrix& X) const {
    return request("predict", X);
}

std::vector<double> ExternalAdapterModel::g(const Matrix& X) const {
    if (!supports_g_) {
        throw invalid_argument_error("adapter did not declare supports_g");
    }
    return request("g", X);
}

std::shared_ptr<ExternalAdapterModel> make_adapter_model(const std::string& command) {
    return std::make_shared<ExternalAdapterModel>(command);
}

}  // namespace featsig

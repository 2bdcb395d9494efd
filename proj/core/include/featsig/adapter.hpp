#ifndef FEATSIG_ADAPTER_HPP
#define FEATSIG_ADAPTER_HPP

#include <cstdint>
#include <cstdio>
#include <memory>
#include <mutex>
#include <string>

#include "featsig/model.hpp"

namespace featsig {

// Model served by a child process speaking newline-delimited JSON on
// stdin/stdout.  On startup the child prints one handshake line:
//   {"arity": N, "transfer": "identity"|"logistic", "supports_g": bool}
// and then answers requests
//   {"id": k, "op": "predict"|"g", "X": [[...], ...]}
// with
//   {"id": k, "values": [...]}
// Requests are serialized; at most one is in flight.  Malformed output,
// mismatched ids, wrong value counts, or child exit all raise protocol
// errors naming the request id.
class ExternalAdapterModel final : public ModelHandle {
public:
    // Launches `command` through /bin/sh and performs the handshake.
    explicit ExternalAdapterModel(const std::string& command);
    ~ExternalAdapterModel() override;

    ExternalAdapterModel(const ExternalAdapterModel&) = delete;
    ExternalAdapterModel& operator=(const ExternalAdapterModel&) = delete;

    std::size_t arity() const override { return arity_; }
    Transfer transfer() const override { return transfer_; }
    bool supports_g() const override { return supports_g_; }
    std::vector<double> predict(const Matrix& X) const override;
    std::vector<double> g(const Matrix& X) const override;

private:
    std::vector<double> request(const char* op, const Matrix& X) const;
    std::string read_line(const std::string& context) const;
    void shutdown() noexcept;

    std::string command_;
    std::size_t arity_ = 0;
    Transfer transfer_ = Transfer::identity;
    bool supports_g_ = false;

    mutable std::mutex io_mutex_;
    mutable std::uint64_t next_id_ = 1;
    mutable std::FILE* to_child_ = nullptr;
    mutable std::FILE* from_child_ = nullptr;
    long pid_ = -1;
};

std::shared_ptr<ExternalAdapterModel> make_adapter_model(const std::string& command);

}  // namespace featsig

#endif  // FEATSIG_ADAPTER_HPP

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vf/policy.hpp"
#include "vf/render.hpp"
#include "vf/scenario.hpp"

namespace vf {

constexpr const char* kProtocolVersion = "vf/1";

std::string base64_encode(const std::uint8_t* data, size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Wire form of an observation: a 4-field shape header plus base64 of the
// row-major 3*84*180 class-id tensor. Round-trips byte-exactly.
std::string encode_observation(const ObservationStack& stack);
ObservationStack decode_observation(const std::string& obs_json);

// Newline-delimited JSON transport. recv_line returns nullopt on EOF and
// throws ProtocolError on timeout.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send_line(const std::string& line) = 0;
    virtual std::optional<std::string> recv_line(double timeout_sec) = 0;
};

// Child process speaking the protocol on its stdin/stdout.
class SubprocessTransport final : public Transport {
public:
    explicit SubprocessTransport(const std::string& command);
    ~SubprocessTransport() override;
    void send_line(const std::string& line) override;
    std::optional<std::string> recv_line(double timeout_sec) override;

private:
    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

// Accepts a single client on a local TCP port (bridge-serve).
class TcpServerTransport final : public Transport {
public:
    explicit TcpServerTransport(int port);
    ~TcpServerTransport() override;
    void send_line(const std::string& line) override;
    std::optional<std::string> recv_line(double timeout_sec) override;

private:
    int listen_fd_ = -1;
    int client_fd_ = -1;
    std::string buffer_;
};

// Adapts a connected transport to the Policy interface. One bridge session
// per episode: reset -> (obs -> act)* -> terminal obs. A malformed or
// missing reply raises ProtocolError, which aborts the episode.
class BridgePolicy final : public Policy {
public:
    explicit BridgePolicy(Transport& transport, double action_timeout_sec = 10.0)
        : transport_(transport), timeout_(action_timeout_sec) {}

    std::string name() const override { return "bridge"; }
    bool needs_pixels() const override { return true; }
    bool parallel_safe() const override { return false; }

    void on_reset(const std::string& scenario, std::uint64_t seed,
                  const ObservationStack* obs) override;
    Action act(const PolicyInput& input) override;
    void on_step_result(const PolicyInput& input, const StepOutcome& outcome) override;

private:
    Action read_action();
    Transport& transport_;
    double timeout_;
    bool awaiting_first_act_ = false;
    double turn_alpha_ = 35.0;
    long step_ = 0;
};

}  // namespace vf

#include "vf/bridge.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <json.hpp>

namespace vf {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kB64 =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

void ignore_sigpipe() {
    static const bool once = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)once;
}

json observation_json(const ObservationStack& stack) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(3 * LabelImage::width * LabelImage::height);
    for (const auto& frame : stack.frames)
        bytes.insert(bytes.end(), frame.data.begin(), frame.data.end());
    json j;
    j["shape"] = {{"frames", 3},
                  {"height", LabelImage::height},
                  {"width", LabelImage::width},
                  {"dtype", "u8"}};
    j["data"] = base64_encode(bytes.data(), bytes.size());
    return j;
}

ObservationStack observation_from_json(const json& j) {
    if (!j.contains("shape") || !j.contains("data"))
        throw ProtocolError("obs: missing shape/data");
    const json& s = j["shape"];
    if (s.value("frames", 0) != 3 || s.value("height", 0) != LabelImage::height ||
        s.value("width", 0) != LabelImage::width || s.value("dtype", std::string{}) != "u8")
        throw ProtocolError("obs: unexpected shape header");
    const auto bytes = base64_decode(j["data"].get<std::string>());
    if (bytes.size() != size_t(3 * LabelImage::width * LabelImage::height))
        throw ProtocolError("obs: payload size mismatch");
    ObservationStack stack;
    for (int f = 0; f < 3; ++f)
        std::memcpy(stack.frames[f].data.data(), bytes.data() + f * LabelImage::width * LabelImage::height,
                    LabelImage::width * LabelImage::height);
    return stack;
}

}  // namespace

std::string base64_encode(const std::uint8_t* data, size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (size_t i = 0; i < len; i += 3) {
        std::uint32_t v = std::uint32_t(data[i]) << 16;
        if (i + 1 < len) v |= std::uint32_t(data[i + 1]) << 8;
        if (i + 2 < len) v |= std::uint32_t(data[i + 2]);
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64[v & 63] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw ProtocolError("base64: length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = value_of(c);
                if (vals[k] < 0) throw ProtocolError("base64: invalid character");
            }
        }
        const std::uint32_t v = (std::uint32_t(vals[0]) << 18) | (std::uint32_t(vals[1]) << 12) |
                                (std::uint32_t(vals[2]) << 6) | std::uint32_t(vals[3]);
        out.push_back((v >> 16) & 0xff);
        if (pad < 2) out.push_back((v >> 8) & 0xff);
        if (pad < 1) out.push_back(v & 0xff);
    }
    return out;
}

std::string encode_observation(const ObservationStack& stack) {
    return observation_json(stack).dump();
}

ObservationStack decode_observation(const std::string& obs_json) {
    json j;
    try {
        j = json::parse(obs_json);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("obs: ") + e.what());
    }
    return observation_from_json(j);
}

// ---------------------------------------------------------------------------
// Transports

namespace {

void write_all(int fd, const std::string& line) {
    ignore_sigpipe();
    size_t off = 0;
    while (off < line.size()) {
        const ssize_t n = ::write(fd, line.data() + off, line.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("bridge write failed: ") + std::strerror(errno));
        }
        off += size_t(n);
    }
}

std::optional<std::string> read_line(int fd, std::string& buffer, double timeout_sec) {
    for (;;) {
        const auto nl = buffer.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            return line;
        }
        struct pollfd pfd{fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, int(timeout_sec * 1000.0));
        if (rc == 0) throw ProtocolError("bridge: timed out waiting for reply");
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("bridge poll failed: ") + std::strerror(errno));
        }
        char chunk[4096];
        const ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("bridge read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (buffer.empty()) return std::nullopt;  // clean EOF
            std::string line = std::move(buffer);
            buffer.clear();
            return line;
        }
        buffer.append(chunk, size_t(n));
    }
}

}  // namespace

SubprocessTransport::SubprocessTransport(const std::string& command) {
    ignore_sigpipe();
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
        throw ProtocolError("bridge: pipe() failed");
    const int pid = ::fork();
    if (pid < 0) throw ProtocolError("bridge: fork() failed");
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    child_pid_ = pid;
    to_child_ = to_child[1];
    from_child_ = from_child[0];
}

SubprocessTransport::~SubprocessTransport() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (child_pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(child_pid_, &status, WNOHANG) != 0) return;
            ::usleep(10 * 1000);
        }
        ::kill(child_pid_, SIGKILL);
        ::waitpid(child_pid_, &status, 0);
    }
}

void SubprocessTransport::send_line(const std::string& line) { write_all(to_child_, line + "\n"); }

std::optional<std::string> SubprocessTransport::recv_line(double timeout_sec) {
    return read_line(from_child_, buffer_, timeout_sec);
}

TcpServerTransport::TcpServerTransport(int port) {
    ignore_sigpipe();
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw ProtocolError("bridge: socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(std::uint16_t(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw ProtocolError("bridge: bind() failed");
    if (::listen(listen_fd_, 1) != 0) throw ProtocolError("bridge: listen() failed");
    client_fd_ = ::accept(listen_fd_, nullptr, nullptr);
    if (client_fd_ < 0) throw ProtocolError("bridge: accept() failed");
}

TcpServerTransport::~TcpServerTransport() {
    if (client_fd_ >= 0) ::close(client_fd_);
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServerTransport::send_line(const std::string& line) { write_all(client_fd_, line + "\n"); }

std::optional<std::string> TcpServerTransport::recv_line(double timeout_sec) {
    return read_line(client_fd_, buffer_, timeout_sec);
}

// ---------------------------------------------------------------------------
// BridgePolicy

void BridgePolicy::on_reset(const std::string& scenario, std::uint64_t seed,
                            const ObservationStack* obs) {
    if (!obs) throw ProtocolError("bridge: observation missing at reset");
    json msg;
    msg["type"] = "reset";
    msg["version"] = kProtocolVersion;
    msg["scenario"] = scenario;
    msg["seed"] = seed;
    msg["obs"] = observation_json(*obs);
    transport_.send_line(msg.dump());
    awaiting_first_act_ = true;
    step_ = 0;
}

Action BridgePolicy::read_action() {
    const auto line = transport_.recv_line(timeout_);
    if (!line) throw ProtocolError("bridge: connection closed");
    json j;
    try {
        j = json::parse(*line);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("bridge: malformed reply: ") + e.what());
    }
    if (j.value("type", std::string{}) != "act")
        throw ProtocolError("bridge: expected act message");
    const std::string kind = j.value("kind", std::string{});
    if (!j.contains("alpha_sign") || !j["alpha_sign"].is_number_integer())
        throw ProtocolError("bridge: alpha_sign missing or not an integer");
    const int sign = j["alpha_sign"].get<int>();
    if (sign < -1 || sign > 1) throw ProtocolError("bridge: alpha_sign out of range");
    if (kind == "NOOP") {
        if (sign != 0) throw ProtocolError("bridge: NOOP must carry alpha_sign 0");
        return Action::noop();
    }
    if (kind == "TURN") {
        if (sign == 0) throw ProtocolError("bridge: TURN requires alpha_sign +/-1");
        return Action::turn(double(sign) * turn_alpha_);
    }
    throw ProtocolError("bridge: invalid action kind '" + kind + "'");
}

Action BridgePolicy::act(const PolicyInput& input) {
    turn_alpha_ = input.turn_alpha;
    awaiting_first_act_ = false;
    return read_action();
}

void BridgePolicy::on_step_result(const PolicyInput& input, const StepOutcome& outcome) {
    if (!input.observation) throw ProtocolError("bridge: observation missing on step");
    ++step_;
    json msg;
    msg["type"] = "obs";
    msg["step"] = step_;
    msg["obs"] = observation_json(*input.observation);
    msg["reward"] = outcome.reward;
    msg["done"] = outcome.terminated;
    if (outcome.cause) msg["cause"] = cause_name(*outcome.cause);
    else msg["cause"] = nullptr;
    transport_.send_line(msg.dump());
}

}  // namespace vf

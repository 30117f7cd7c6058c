#include <doctest.h>

#include <deque>
#include <random>

#include <json.hpp>

#include "vf/bridge.hpp"
#include "vf/rng.hpp"

using namespace vf;

namespace {

// Scripted in-process transport.
class ScriptTransport final : public Transport {
public:
    std::vector<std::string> sent;
    std::deque<std::string> replies;

    void send_line(const std::string& line) override { sent.push_back(line); }
    std::optional<std::string> recv_line(double) override {
        if (replies.empty()) return std::nullopt;
        std::string r = replies.front();
        replies.pop_front();
        return r;
    }
};

ObservationStack random_stack(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ObservationStack stack;
    for (auto& frame : stack.frames)
        for (auto& px : frame.data) px = std::uint8_t(rng() % 7);
    return stack;
}

}  // namespace

TEST_CASE("base64 round trip") {
    std::mt19937_64 rng(77);
    for (int len = 0; len < 40; ++len) {
        auto data = std::vector<std::uint8_t>(size_t(len));
        for (auto& b : data) b = std::uint8_t(rng());
        const std::string text = base64_encode(data.data(), data.size());
        CHECK(base64_decode(text) == data);
    }
    CHECK(base64_encode(nullptr, 0) == "");
    CHECK_THROWS_AS(base64_decode("abc"), ProtocolError);     // bad length
    CHECK_THROWS_AS(base64_decode("ab!!"), ProtocolError);    // bad character
}

TEST_CASE("observation serialization round-trips byte-exactly") {
    const ObservationStack stack = random_stack(3);
    const std::string encoded = encode_observation(stack);
    const ObservationStack back = decode_observation(encoded);
    for (int f = 0; f < 3; ++f) CHECK(back.frames[f] == stack.frames[f]);
    // Serialize-parse-reserialize is the identity on bytes.
    CHECK(encode_observation(back) == encoded);
}

TEST_CASE("observation decode validates the shape header") {
    const ObservationStack stack = random_stack(4);
    std::string encoded = encode_observation(stack);
    nlohmann::json j = nlohmann::json::parse(encoded);
    j["shape"]["height"] = 32;
    CHECK_THROWS_AS(decode_observation(j.dump()), ProtocolError);
    nlohmann::json j2 = nlohmann::json::parse(encoded);
    j2["data"] = "AAAA";
    CHECK_THROWS_AS(decode_observation(j2.dump()), ProtocolError);
}

TEST_CASE("bridge policy message sequence") {
    ScriptTransport transport;
    BridgePolicy policy(transport);
    const ObservationStack stack = random_stack(5);

    transport.replies.push_back(R"({"type":"act","kind":"NOOP","alpha_sign":0})");
    transport.replies.push_back(R"({"type":"act","kind":"TURN","alpha_sign":-1})");

    policy.on_reset("s-turn", 7, &stack);
    REQUIRE(transport.sent.size() == 1);
    const auto reset = nlohmann::json::parse(transport.sent[0]);
    CHECK(reset["type"] == "reset");
    CHECK(reset["version"] == kProtocolVersion);
    CHECK(reset["scenario"] == "s-turn");
    CHECK(reset["seed"] == 7);
    CHECK(reset["obs"]["shape"]["frames"] == 3);

    PolicyInput input;
    input.observation = &stack;
    input.turn_alpha = 35.0;
    const Action first = policy.act(input);
    CHECK(first.kind == ActionKind::NOOP);

    StepOutcome outcome;
    outcome.reward = 0.0;
    policy.on_step_result(input, outcome);
    REQUIRE(transport.sent.size() == 2);
    const auto obs = nlohmann::json::parse(transport.sent[1]);
    CHECK(obs["type"] == "obs");
    CHECK(obs["step"] == 1);
    CHECK(obs["done"] == false);
    CHECK(obs["cause"].is_null());

    const Action second = policy.act(input);
    CHECK(second.kind == ActionKind::TURN);
    CHECK(second.alpha_signed == doctest::Approx(-35.0));

    StepOutcome done;
    done.reward = 10.0;
    done.terminated = true;
    done.cause = Cause::success;
    policy.on_step_result(input, done);
    const auto last = nlohmann::json::parse(transport.sent.back());
    CHECK(last["done"] == true);
    CHECK(last["cause"] == "success");
}

TEST_CASE("bridge policy rejects malformed replies") {
    const ObservationStack stack = random_stack(6);
    PolicyInput input;
    input.observation = &stack;

    auto expect_protocol_error = [&](const std::string& reply) {
        ScriptTransport transport;
        BridgePolicy policy(transport);
        policy.on_reset("s", 1, &stack);
        transport.replies.push_back(reply);
        CHECK_THROWS_AS(policy.act(input), ProtocolError);
    };
    expect_protocol_error("this is not json");
    expect_protocol_error(R"({"type":"act","kind":"SPIN","alpha_sign":0})");
    expect_protocol_error(R"({"type":"act","kind":"TURN","alpha_sign":0})");
    expect_protocol_error(R"({"type":"act","kind":"TURN","alpha_sign":5})");
    expect_protocol_error(R"({"type":"act","kind":"NOOP","alpha_sign":1})");
    expect_protocol_error(R"({"type":"obs","kind":"NOOP","alpha_sign":0})");
    expect_protocol_error(R"({"type":"act","kind":"NOOP"})");

    SUBCASE("EOF is a protocol error") {
        ScriptTransport transport;
        BridgePolicy policy(transport);
        policy.on_reset("s", 1, &stack);
        CHECK_THROWS_AS(policy.act(input), ProtocolError);
    }
}

TEST_CASE("subprocess transport round trip") {
    SubprocessTransport cat("cat");
    cat.send_line("hello");
    const auto echo = cat.recv_line(5.0);
    REQUIRE(echo);
    CHECK(*echo == "hello");
    cat.send_line("world");
    CHECK(*cat.recv_line(5.0) == "world");
}

TEST_CASE("subprocess transport times out on a silent child") {
    SubprocessTransport sleeper("sleep 30");
    sleeper.send_line("ping");
    CHECK_THROWS_AS(sleeper.recv_line(0.1), ProtocolError);
}

#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "specplan/model_client_http.hpp"

using namespace specplan;
using nlohmann::json;

namespace {

// Local chat-completions stand-in for exercising the wire protocol.
struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

GenerationRequest simple_request() {
    GenerationRequest req;
    req.messages = {{Role::System, "be terse"}, {Role::User, "say hello"}};
    req.call_kind = CallKind::Main;
    return req;
}

HttpClientConfig config_for(const LocalServer& server) {
    HttpClientConfig cfg;
    cfg.endpoint = server.endpoint();
    cfg.api_key = "test-key";
    cfg.timeout_ms = 5000;
    return cfg;
}

}  // namespace

TEST_SUITE("http_client") {

TEST_CASE("completed requests prefer upstream usage accounting") {
    LocalServer server([](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        CHECK(body["messages"].size() == 2);
        CHECK(body["temperature"].get<double>() == doctest::Approx(0.6));
        CHECK(req.get_header_value("Authorization") == "Bearer test-key");
        json out{{"choices", json::array({{{"message", {{"role", "assistant"},
                                                        {"content", "hello there friend"}}}}})},
                 {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 99}}}};
        res.set_content(out.dump(), "application/json");
    });

    WallClock clock;
    HttpModelClient client(clock, config_for(server));
    GenerationResult res = client.generate(simple_request());
    CHECK(res.content == "hello there friend");
    CHECK(res.completion_tokens == 99);  // upstream value, not the local count of 3
    CHECK(res.prompt_tokens == 11);
    CHECK(!res.aborted);
    CHECK(!res.tokens_estimated);
}

TEST_CASE("missing usage falls back to approximate counting") {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
        json out{{"choices",
                  json::array({{{"message", {{"role", "assistant"}, {"content", "one two"}}}}})}};
        res.set_content(out.dump(), "application/json");
    });

    WallClock clock;
    HttpModelClient client(clock, config_for(server));
    GenerationResult res = client.generate(simple_request());
    CHECK(res.completion_tokens == 2);
    CHECK(res.tokens_estimated);
}

TEST_CASE("abort terminates the request at the transport level") {
    std::atomic<bool> handler_entered{false};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        handler_entered.store(true);
        std::this_thread::sleep_for(std::chrono::milliseconds(1500));
        res.set_content("{}", "application/json");
    });

    WallClock clock;
    HttpModelClient client(clock, config_for(server));

    FlagAbort abort;
    std::thread trigger([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        abort.trigger();
    });
    GenerationResult res = client.generate(simple_request(), abort);
    trigger.join();

    CHECK(res.aborted);
    CHECK(res.tokens_estimated);
    CHECK(res.duration_ms < 1000);  // bounded by one request-abort round trip
    CHECK(handler_entered.load());
}

TEST_CASE("transport failures and bad payloads raise distinct errors") {
    WallClock clock;

    HttpClientConfig dead;
    dead.endpoint = "http://127.0.0.1:9/v1/chat/completions";  // discard port, refused
    dead.timeout_ms = 1000;
    HttpModelClient unreachable(clock, dead);
    CHECK_THROWS_AS((void)unreachable.generate(simple_request()), ModelError);

    LocalServer bad_json([](const httplib::Request&, httplib::Response& res) {
        res.set_content("this is not json", "application/json");
    });
    HttpModelClient client(clock, config_for(bad_json));
    try {
        (void)client.generate(simple_request());
        FAIL("expected bad-response error");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelErrorKind::BadResponse);
    }

    LocalServer error_status([](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("{}", "application/json");
    });
    HttpModelClient client500(clock, config_for(error_status));
    try {
        (void)client500.generate(simple_request());
        FAIL("expected transport error");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelErrorKind::Transport);
    }
}

TEST_CASE("environment construction requires an endpoint") {
    WallClock clock;
    unsetenv("MODEL_ENDPOINT");
    CHECK_THROWS_AS(HttpModelClient::from_env(clock), ModelError);

    setenv("MODEL_ENDPOINT", "http://127.0.0.1:1234/v1/chat/completions", 1);
    setenv("MODEL_API_KEY", "k", 1);
    CHECK_NOTHROW(HttpModelClient::from_env(clock));
    unsetenv("MODEL_ENDPOINT");
    unsetenv("MODEL_API_KEY");
}

TEST_CASE("endpoints must carry a scheme") {
    WallClock clock;
    HttpClientConfig cfg;
    cfg.endpoint = "localhost:8000/v1/chat/completions";
    CHECK_THROWS_AS(HttpModelClient(clock, cfg), ModelError);
}

}  // TEST_SUITE

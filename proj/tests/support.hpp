#pragma once

// Shared test scaffolding: temp directories, a deterministic mock chat
// endpoint, and a mock embeddings endpoint. The mock model "complies" with
// a hidden payload iff the payload text (or its base64 form) appears in the
// request content, which makes leak detection exactly decidable in tests.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "veilbench/veilbench.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::string tmpl =
        (fs::temp_directory_path() / (tag + ".XXXXXX")).string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!::mkdtemp(buf.data()))
      throw veilbench::IoError("mkdtemp failed for " + tmpl);
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
  fs::path path_;
};

// Deterministic stand-in for a chat model: a short digest of the content,
// plus a pirate-styled sentence with the canary whenever a known payload is
// present in the input.
inline std::string mock_summary(
    const std::string& content,
    const std::vector<veilbench::inject::Payload>& payloads) {
  std::vector<std::string> toks = veilbench::metrics::tokenize(content);
  std::string s = "This page covers";
  std::size_t limit = toks.size() < 12 ? toks.size() : 12;
  for (std::size_t i = 0; i < limit; ++i) s += " " + toks[i];
  s += ".";
  for (const veilbench::inject::Payload& p : payloads) {
    if (content.find(p.instruction) != std::string::npos ||
        content.find(veilbench::base64_encode(p.instruction)) !=
            std::string::npos) {
      s = "Avast ye, matey! " + s + " Arr, " + p.marker + ".";
      break;
    }
  }
  return s;
}

class MockLlm {
public:
  explicit MockLlm(std::vector<veilbench::inject::Payload> payloads = {})
      : payloads_(std::move(payloads)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handle_chat(req, res);
                 });
    server_.Post("/v1/embeddings",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handle_embed(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockLlm() { stop(); }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
  }

  veilbench::runner::ModelEndpoint endpoint(
      const std::string& model_id = "mock") const {
    veilbench::runner::ModelEndpoint ep;
    ep.model_id = model_id;
    ep.base_url = base_url();
    ep.model_name = "mock-small";
    ep.api_key_env = "MOCK_API_KEY";
    ep.backoff_base_ms = 1;
    return ep;
  }

  // every chat call fails with |status| until |n| calls have been burned
  void fail_first(int n, int status) {
    fail_remaining_ = n;
    fail_status_ = status;
  }
  // reply with syntactically broken JSON bodies
  void set_garbage_replies(bool on) { garbage_ = on; }
  // require this bearer token; otherwise 401
  void require_token(const std::string& token) { required_token_ = token; }

  int chat_calls() const { return chat_calls_.load(); }
  int embed_calls() const { return embed_calls_.load(); }
  int max_inflight() const { return max_inflight_.load(); }

private:
  void handle_chat(const httplib::Request& req, httplib::Response& res) {
    chat_calls_.fetch_add(1);
    int now = inflight_.fetch_add(1) + 1;
    int seen = max_inflight_.load();
    while (now > seen && !max_inflight_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));

    if (!required_token_.empty() &&
        req.get_header_value("Authorization") != "Bearer " + required_token_) {
      res.status = 401;
      res.set_content("{\"error\":\"bad token\"}", "application/json");
      inflight_.fetch_sub(1);
      return;
    }
    if (fail_remaining_.load() > 0) {
      fail_remaining_.fetch_sub(1);
      res.status = fail_status_.load();
      res.set_content("{\"error\":\"induced\"}", "application/json");
      inflight_.fetch_sub(1);
      return;
    }
    if (garbage_.load()) {
      res.set_content("{not json", "application/json");
      inflight_.fetch_sub(1);
      return;
    }

    nlohmann::json body = nlohmann::json::parse(req.body);
    std::string content = body.at("messages").at(1).at("content");
    nlohmann::json reply{
        {"choices",
         {{{"message", {{"role", "assistant"},
                        {"content", mock_summary(content, payloads_)}}}}}}};
    res.set_content(reply.dump(), "application/json");
    inflight_.fetch_sub(1);
  }

  void handle_embed(const httplib::Request& req, httplib::Response& res) {
    embed_calls_.fetch_add(1);
    if (fail_remaining_.load() > 0) {
      fail_remaining_.fetch_sub(1);
      res.status = fail_status_.load();
      res.set_content("{\"error\":\"induced\"}", "application/json");
      return;
    }
    nlohmann::json body = nlohmann::json::parse(req.body);
    std::string text = body.at("input").at(0);
    veilbench::metrics::FallbackEmbedder fb;
    veilbench::metrics::EmbeddingVector v = fb.embed(text);
    nlohmann::json reply{{"data", {{{"embedding", v.dims}}}}};
    res.set_content(reply.dump(), "application/json");
  }

  std::vector<veilbench::inject::Payload> payloads_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> chat_calls_{0};
  std::atomic<int> embed_calls_{0};
  std::atomic<int> inflight_{0};
  std::atomic<int> max_inflight_{0};
  std::atomic<int> fail_remaining_{0};
  std::atomic<int> fail_status_{500};
  std::atomic<bool> garbage_{false};
  std::string required_token_;
};

}  // namespace testsupport

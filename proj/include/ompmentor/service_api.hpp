#pragma once

// HTTP/JSON service over conversations, the knowledge base and the snippet
// advisor. Wire shapes are documented in docs/api.md.
//
// Service holds the application logic and is callable without a socket;
// HttpServer binds it to cpp-httplib routes.

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include "ompmentor/conversation.hpp"

namespace httplib {
class Server;
}

namespace ompmentor::service {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Directory of dialog documents; unset means documents built from the
  /// catalog compiled into the binary.
  std::optional<std::filesystem::path> content_dir;
  std::string default_language = "EN";
  std::optional<bool> autolearn_override;
  /// Every conversation is seeded with this value; unset draws a fresh seed
  /// per conversation.
  std::optional<std::uint64_t> fixed_seed;
  std::optional<std::filesystem::path> unmatched_log;
  std::string cors_origin = "*";
  std::size_t max_advise_bytes = 256 * 1024;

  /// Throws ConfigError for a port outside [1, 65535].
  void validate() const;
};

/// "host:port", ":port" or "port".
void apply_bind(ServiceConfig& config, std::string_view bind);
/// "entropy" or a non-negative integer.
std::optional<std::uint64_t> parse_seed(std::string_view text);

using EnvLookup = std::function<const char*(const char*)>;
/// Overrides `base` with BIND, CONTENT_DIR, DEFAULT_LANG, SEED, UNMATCHED_LOG,
/// AUTOLEARN and CORS_ORIGIN when set. Throws ConfigError on bad values.
ServiceConfig config_from_env(ServiceConfig base, const EnvLookup& lookup);

struct Response {
  int status = 200;
  std::string body;  // JSON
};

Response error_response(int status, std::string_view code, std::string_view message);

class Service {
 public:
  /// Loads content; throws kb::ContentError when it cannot, ConfigError for a
  /// bad configuration.
  explicit Service(ServiceConfig config);
  ~Service();

  Response create_conversation(std::string_view body);
  Response post_message(std::string_view conversation_id, std::string_view body);
  Response advise(std::string_view body) const;
  Response knowledge_base(std::optional<std::string_view> language) const;
  Response unmatched(std::optional<std::string_view> limit) const;
  Response health() const;
  Response reload();

  const ServiceConfig& config() const noexcept { return config_; }
  std::shared_ptr<const conversation::LanguageIndexes> indexes() const;
  std::size_t conversation_count() const;

 private:
  struct Session;

  conversation::LanguageIndexes load() const;
  std::uint64_t next_seed();

  ServiceConfig config_;
  std::shared_ptr<conversation::UnmatchedLog> log_;
  mutable std::mutex index_mutex_;
  std::shared_ptr<const conversation::LanguageIndexes> indexes_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::mutex seed_mutex_;
};

class HttpServer {
 public:
  HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to the configured address; port 0 picks a free port. Returns the bound port.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  /// bind() plus listen() on a background thread.
  int start();
  void stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace ompmentor::service

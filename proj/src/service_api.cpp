#include "ompmentor/service_api.hpp"

#include <charconv>
#include <random>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "ompmentor/knowledge_base.hpp"
#include "ompmentor/snippet_advisor.hpp"

namespace ompmentor::service {

using json = nlohmann::ordered_json;

namespace {

std::string dump(const json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace); }

Response ok(int status, const json& body) { return Response{status, dump(body)}; }

json reply_json(const conversation::Reply& reply) {
  json j;
  j["kind"] = conversation::to_string(reply.kind);
  j["text"] = reply.text;
  if (reply.node_id) j["node_id"] = *reply.node_id;
  return j;
}

// Parses a request body that must be a JSON object; an empty body counts as {}.
std::optional<json> object_body(std::string_view body, Response& error) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    error = error_response(400, "bad_request", "request body must be a JSON object");
    return std::nullopt;
  }
  return j;
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string status_code_name(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 405: return "method_not_allowed";
    case 413: return "payload_too_large";
    case 503: return "unavailable";
    default: return status >= 500 ? "internal_error" : "error";
  }
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw ConfigError("port " + std::to_string(port) + " is outside [1, 65535] (0 picks a free port)");
  if (default_language.empty()) throw ConfigError("default language is empty");
}

void apply_bind(ServiceConfig& config, std::string_view bind) {
  auto colon = bind.rfind(':');
  std::string_view host = colon == std::string_view::npos ? std::string_view() : bind.substr(0, colon);
  std::string_view port = colon == std::string_view::npos ? bind : bind.substr(colon + 1);
  auto value = parse_int(port);
  if (!value || *value < 1 || *value > 65535) {
    throw ConfigError("bind address '" + std::string(bind) + "' needs a port in [1, 65535]");
  }
  if (!host.empty()) config.host = std::string(host);
  config.port = *value;
}

std::optional<std::uint64_t> parse_seed(std::string_view text) {
  if (text == "entropy") return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("seed must be 'entropy' or a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

ServiceConfig config_from_env(ServiceConfig base, const EnvLookup& lookup) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    const char* v = lookup(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  if (auto v = get("BIND")) apply_bind(base, *v);
  if (auto v = get("CONTENT_DIR")) base.content_dir = *v;
  if (auto v = get("DEFAULT_LANG")) base.default_language = *v;
  if (auto v = get("SEED")) base.fixed_seed = parse_seed(*v);
  if (auto v = get("UNMATCHED_LOG")) base.unmatched_log = *v;
  if (auto v = get("AUTOLEARN")) {
    auto b = dialog::parse_bool(*v);
    if (!b) throw ConfigError("AUTOLEARN must be true or false");
    base.autolearn_override = *b;
  }
  if (auto v = get("CORS_ORIGIN")) base.cors_origin = *v;
  return base;
}

Response error_response(int status, std::string_view code, std::string_view message) {
  json j;
  j["error"] = {{"code", code}, {"message", message}};
  return ok(status, j);
}

struct Service::Session {
  explicit Session(conversation::Conversation c) : conv(std::move(c)) {}
  conversation::Conversation conv;
  // Ticket lock: requests for one conversation are answered in arrival order.
  std::mutex mutex;
  std::condition_variable turn;
  std::uint64_t next_ticket = 0;
  std::uint64_t serving = 0;
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  config_.validate();
  log_ = config_.unmatched_log ? std::make_shared<conversation::UnmatchedLog>(*config_.unmatched_log)
                               : std::make_shared<conversation::UnmatchedLog>();
  auto loaded = load();
  if (loaded.empty()) throw kb::ContentError({"no dialog documents found"});
  if (!loaded.count(config_.default_language)) {
    throw ConfigError("default language " + config_.default_language + " has no document");
  }
  indexes_ = std::make_shared<const conversation::LanguageIndexes>(std::move(loaded));
}

Service::~Service() = default;

conversation::LanguageIndexes Service::load() const {
  if (config_.content_dir) return kb::load_content_dir(*config_.content_dir);
  return kb::shipped_indexes();
}

std::shared_ptr<const conversation::LanguageIndexes> Service::indexes() const {
  std::lock_guard lock(index_mutex_);
  return indexes_;
}

std::size_t Service::conversation_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::uint64_t Service::next_seed() {
  if (config_.fixed_seed) return *config_.fixed_seed;
  std::lock_guard lock(seed_mutex_);
  static std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

Response Service::create_conversation(std::string_view body) {
  Response error;
  auto request = object_body(body, error);
  if (!request) return error;
  std::string language = config_.default_language;
  if (auto it = request->find("language"); it != request->end()) {
    if (!it->is_string()) return error_response(400, "bad_request", "language must be a string");
    language = it->get<std::string>();
  }
  auto current = indexes();
  if (current->empty()) return error_response(503, "unavailable", "no dialog content is loaded");
  conversation::ConversationOptions options;
  options.autolearn_override = config_.autolearn_override;
  options.unmatched_log = log_;
  try {
    auto [conv, welcome] = conversation::start_conversation(*current, language, next_seed(), options);
    json j;
    j["conversation_id"] = conv.id();
    j["language"] = conv.language();
    j["welcome"] = reply_json(welcome);
    auto session = std::make_shared<Session>(std::move(conv));
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(session->conv.id(), std::move(session));
    return ok(201, j);
  } catch (const conversation::UnsupportedLanguage& e) {
    return error_response(400, "unsupported_language", e.what());
  }
}

Response Service::post_message(std::string_view conversation_id, std::string_view body) {
  std::shared_ptr<Session> session;
  {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(conversation_id);
    if (it == sessions_.end()) {
      return error_response(404, "not_found", "no conversation '" + std::string(conversation_id) + "'");
    }
    session = it->second;
  }
  Response error;
  auto request = object_body(body, error);
  if (!request) return error;
  auto text = request->find("text");
  if (text == request->end() || !text->is_string()) {
    return error_response(400, "bad_request", "field 'text' (string) is required");
  }

  std::unique_lock lock(session->mutex);
  const auto ticket = session->next_ticket++;
  session->turn.wait(lock, [&] { return session->serving == ticket; });
  lock.unlock();
  conversation::Reply reply;
  try {
    reply = session->conv.post_message(text->get<std::string>());
  } catch (...) {
    lock.lock();
    ++session->serving;
    session->turn.notify_all();
    throw;
  }
  lock.lock();
  ++session->serving;
  session->turn.notify_all();
  return ok(200, reply_json(reply));
}

Response Service::advise(std::string_view body) const {
  if (body.size() > config_.max_advise_bytes) {
    return error_response(400, "payload_too_large",
                          "request body exceeds " + std::to_string(config_.max_advise_bytes) + " bytes");
  }
  Response error;
  auto request = object_body(body, error);
  if (!request) return error;
  auto code = request->find("code");
  if (code == request->end() || !code->is_string()) {
    return error_response(400, "bad_request", "field 'code' (string) is required");
  }
  std::string language = config_.default_language;
  if (auto it = request->find("language"); it != request->end() && it->is_string()) {
    language = it->get<std::string>();
  }
  static const auto entries = kb::list_entries();
  json findings = json::array();
  for (const auto& f : advisor::scan_snippet(code->get<std::string>())) {
    json j;
    j["rule_id"] = f.rule_id;
    j["entry_id"] = f.entry_id;
    j["line"] = f.line;
    j["excerpt"] = f.excerpt;
    j["severity"] = advisor::to_string(f.severity);
    j["message"] = f.message;
    const auto* entry = kb::find_entry(entries, f.entry_id);
    const auto* loc = entry ? entry->localized(language) : nullptr;
    if (loc == nullptr && entry) loc = entry->localized(config_.default_language);
    j["title"] = entry ? entry->title : std::string();
    j["answer"] = loc ? loc->answer : std::string();
    findings.push_back(std::move(j));
  }
  json out;
  out["findings"] = std::move(findings);
  return ok(200, out);
}

Response Service::knowledge_base(std::optional<std::string_view> language) const {
  std::string lang(language.value_or(config_.default_language));
  auto current = indexes();
  auto it = current->find(lang);
  if (it == current->end()) return error_response(400, "unsupported_language", "unsupported language '" + lang + "'");
  const auto& index = *it->second;
  json items = json::array();
  for (const auto& e : kb::list_entries()) {
    const auto* node = index.node(e.id);
    if (node == nullptr) continue;
    const auto* loc = e.localized(lang);
    json j;
    j["id"] = e.id;
    j["category"] = kb::to_string(e.category);
    j["title"] = e.title;
    j["reason"] = e.reason;
    j["primary_variation"] = node->primary_variation;
    j["answer"] = loc ? loc->answer : (node->output.items.empty() ? std::string() : node->output.items.front());
    items.push_back(std::move(j));
  }
  json out;
  out["language"] = lang;
  out["entries"] = std::move(items);
  return ok(200, out);
}

Response Service::unmatched(std::optional<std::string_view> limit) const {
  std::size_t n = 100;
  if (limit) {
    auto v = parse_int(*limit);
    if (!v || *v < 0) return error_response(400, "bad_request", "limit must be a non-negative integer");
    n = static_cast<std::size_t>(*v);
  }
  json records = json::array();
  for (const auto& r : log_->recent(n)) {
    records.push_back(json::parse(conversation::to_json_line(r)));
  }
  json out;
  out["records"] = std::move(records);
  return ok(200, out);
}

Response Service::health() const {
  auto current = indexes();
  json j;
  std::set<std::string> entry_ids;
  json languages = json::array();
  for (const auto& [lang, index] : *current) {
    languages.push_back(lang);
    for (const auto& node : index->nodes()) {
      if (node.folder == dialog::FolderLabel::Library) entry_ids.insert(node.id);
    }
  }
  j["status"] = current->empty() ? "unavailable" : "ok";
  j["languages"] = std::move(languages);
  j["entry_count"] = entry_ids.size();
  if (current->empty()) {
    j["error"] = {{"code", "unavailable"}, {"message", "no dialog content is loaded"}};
    return ok(503, j);
  }
  return ok(200, j);
}

Response Service::reload() {
  conversation::LanguageIndexes loaded;
  try {
    loaded = load();
  } catch (const kb::ContentError& e) {
    json j;
    j["error"] = {{"code", "invalid_content"}, {"message", e.what()}, {"problems", e.problems()}};
    return ok(422, j);
  }
  auto fresh = std::make_shared<const conversation::LanguageIndexes>(std::move(loaded));
  {
    std::lock_guard lock(index_mutex_);
    indexes_ = fresh;
  }
  if (fresh->empty()) return error_response(503, "unavailable", "content directory holds no dialog documents");
  json langs = json::array();
  for (const auto& [lang, index] : *fresh) langs.push_back(lang);
  json j;
  j["status"] = "ok";
  j["languages"] = std::move(langs);
  return ok(200, j);
}

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  // Bodies above the advise limit still reach the handler so it can answer 400.
  s.set_payload_max_length(std::max<std::size_t>(service_.config().max_advise_bytes * 8, 8u << 20));

  s.Post("/v1/conversations", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.create_conversation(req.body));
  });
  s.Post(R"(/v1/conversations/([^/]+)/messages)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.post_message(req.matches[1].str(), req.body));
  });
  s.Post("/v1/advise", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.advise(req.body));
  });
  s.Get("/v1/kb", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> lang;
    if (req.has_param("lang")) lang = req.get_param_value("lang");
    send(res, service_.knowledge_base(lang ? std::optional<std::string_view>(*lang) : std::nullopt));
  });
  s.Get("/v1/unmatched", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> limit;
    if (req.has_param("limit")) limit = req.get_param_value("limit");
    send(res, service_.unmatched(limit ? std::optional<std::string_view>(*limit) : std::nullopt));
  });
  s.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, service_.health()); });
  s.Post("/v1/reload", [this, send](const httplib::Request&, httplib::Response& res) { send(res, service_.reload()); });
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", service_.config().cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    auto message = res.status == 404 ? "no route for " + req.method + " " + req.path
                                     : std::string(httplib::status_message(res.status));
    auto r = error_response(res.status, status_code_name(res.status), message);
    res.set_content(r.body, "application/json");
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    auto r = error_response(500, "internal_error", message);
    res.status = 500;
    res.set_content(r.body, "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const auto& cfg = service_.config();
  if (cfg.port == 0) {
    int port = server_->bind_to_any_port(cfg.host);
    if (port < 0) throw ConfigError("cannot bind " + cfg.host);
    return port;
  }
  if (!server_->bind_to_port(cfg.host, cfg.port)) {
    throw ConfigError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  }
  return cfg.port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

int HttpServer::start() {
  int port = bind();
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return port;
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace ompmentor::service

#include "ompmentor/conversation.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ompmentor/text.hpp"

namespace ompmentor::conversation {

namespace {

std::string next_conversation_id() {
  static std::atomic<std::uint64_t> counter{0};
  return "conv-" + std::to_string(++counter);
}

}  // namespace

std::string_view to_string(ReplyKind kind) {
  switch (kind) {
    case ReplyKind::Answer: return "answer";
    case ReplyKind::Suggestion: return "suggestion";
    case ReplyKind::Default: return "default";
    case ReplyKind::Welcome: return "welcome";
  }
  return "?";
}

std::string format_rfc3339(std::chrono::system_clock::time_point tp) {
  auto secs = std::chrono::time_point_cast<std::chrono::seconds>(tp);
  auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(tp - secs).count();
  std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(millis));
  return out;
}

std::string to_json_line(const UnmatchedRecord& record) {
  nlohmann::ordered_json j;
  j["conversation_id"] = record.conversation_id;
  j["language"] = record.language;
  j["text"] = record.text;
  j["timestamp"] = record.timestamp;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

UnmatchedRecord record_from_json_line(std::string_view line) {
  auto j = nlohmann::json::parse(line);
  return UnmatchedRecord{j.at("conversation_id").get<std::string>(), j.at("language").get<std::string>(),
                         j.at("text").get<std::string>(), j.at("timestamp").get<std::string>()};
}

UnmatchedLog::UnmatchedLog(std::filesystem::path file) : file_(std::move(file)) {}

void UnmatchedLog::append(UnmatchedRecord record) {
  std::lock_guard lock(mutex_);
  if (file_) {
    std::ofstream out(*file_, std::ios::app | std::ios::binary);
    out << to_json_line(record) << '\n';
    out.flush();
  }
  records_.push_back(std::move(record));
}

std::vector<UnmatchedRecord> UnmatchedLog::recent(std::size_t limit) const {
  std::lock_guard lock(mutex_);
  std::vector<UnmatchedRecord> out;
  for (auto it = records_.rbegin(); it != records_.rend() && out.size() < limit; ++it) {
    out.push_back(*it);
  }
  return out;
}

std::size_t UnmatchedLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::size_t UnmatchedLog::count_for(std::string_view conversation_id) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : records_) n += r.conversation_id == conversation_id ? 1 : 0;
  return n;
}

std::size_t ReplyRng::pick(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = n;
  // Reject the low (2^64 mod n) values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = engine_();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

std::pair<std::string, int> select_output(const dialog::Output& out, ReplyRng& rng) {
  if (out.items.size() == 1) return {out.items.front(), 0};
  auto index = rng.pick(out.items.size());
  return {out.items[index], static_cast<int>(index)};
}

UnsupportedLanguage::UnsupportedLanguage(std::string language)
    : std::invalid_argument("unsupported language '" + language + "'"), language_(std::move(language)) {}

std::string suggestion_text(std::string_view language, std::string_view primary_variation) {
  auto body = text::trim(primary_variation);
  auto strip_prefix = [&](std::string_view p) {
    if (body.substr(0, p.size()) == p) body.remove_prefix(p.size());
  };
  strip_prefix("\xC2\xBF");  // ¿
  while (!body.empty() && (body.back() == '?' || body.back() == ' ')) body.remove_suffix(1);
  if (language == "ES") return "\xC2\xBFQuisiste decir: " + std::string(body) + "?";
  return "Did you mean: " + std::string(body) + "?";
}

Conversation::Conversation(std::shared_ptr<const match::CompiledIndex> index, std::string language,
                           std::uint64_t seed, ConversationOptions options)
    : index_(std::move(index)),
      id_(options.id.empty() ? next_conversation_id() : std::move(options.id)),
      language_(std::move(language)),
      rng_(seed),
      autolearn_(options.autolearn_override.value_or(index_->autolearn())),
      log_(std::move(options.unmatched_log)),
      created_at_(std::chrono::system_clock::now()) {}

std::pair<Conversation, Reply> start_conversation(const LanguageIndexes& indexes,
                                                  std::string_view language, std::uint64_t seed,
                                                  ConversationOptions options) {
  auto it = indexes.find(language);
  if (it == indexes.end() || !it->second) throw UnsupportedLanguage(std::string(language));
  Conversation conv(it->second, std::string(language), seed, std::move(options));

  const auto& index = *conv.index_;
  std::string welcome_id;
  for (const auto& node : index.nodes()) {
    if (node.folder == dialog::FolderLabel::Main) {
      welcome_id = node.id;
      break;
    }
  }
  auto [text, item] = select_output(index.welcome_output(), conv.rng_);
  conv.welcome_ = Reply{ReplyKind::Welcome, std::move(text), welcome_id, item};
  Reply welcome = conv.welcome_;
  return {std::move(conv), std::move(welcome)};
}

Reply Conversation::post_message(std::string_view text) {
  const auto& index = *index_;
  auto tokens = match::normalize(text, index.concepts());
  Reply reply;
  if (auto hit = match::best_match(index, tokens)) {
    const auto* node = index.node(hit->node_id);
    auto [answer, item] = select_output(node->output, rng_);
    reply = Reply{ReplyKind::Answer, std::move(answer), node->id, item};
  } else if (auto suggestion = autolearn_ ? match::suggest(index, tokens) : std::nullopt) {
    reply = Reply{ReplyKind::Suggestion, suggestion_text(language_, suggestion->primary_variation),
                  suggestion->node_id, std::nullopt};
  } else {
    auto [fallback, item] = select_output(index.default_output(), rng_);
    reply = Reply{ReplyKind::Default, std::move(fallback), std::nullopt, item};
    if (log_) {
      log_->append(UnmatchedRecord{id_, language_, std::string(text),
                                   format_rfc3339(std::chrono::system_clock::now())});
    }
  }
  history_.push_back(Turn{std::string(text), reply});
  return reply;
}

}  // namespace ompmentor::conversation

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ompmentor/match_engine.hpp"

namespace ompmentor::conversation {

enum class ReplyKind { Answer, Suggestion, Default, Welcome };
std::string_view to_string(ReplyKind kind);

struct Reply {
  ReplyKind kind = ReplyKind::Default;
  std::string text;
  std::optional<std::string> node_id;
  std::optional<int> item_index_chosen;
  bool operator==(const Reply&) const = default;
};

struct UnmatchedRecord {
  std::string conversation_id;
  std::string language;
  std::string text;
  std::string timestamp;  // RFC 3339, UTC
  bool operator==(const UnmatchedRecord&) const = default;
};

std::string to_json_line(const UnmatchedRecord& record);
UnmatchedRecord record_from_json_line(std::string_view line);

/// Shared log of questions that fell through to the default reply. Appends
/// are serialized; with a file attached each record is written as one JSON
/// line and flushed before append() returns.
class UnmatchedLog {
 public:
  UnmatchedLog() = default;
  explicit UnmatchedLog(std::filesystem::path file);

  void append(UnmatchedRecord record);
  /// Newest first, at most `limit` records.
  std::vector<UnmatchedRecord> recent(std::size_t limit) const;
  std::size_t size() const;
  std::size_t count_for(std::string_view conversation_id) const;

 private:
  mutable std::mutex mutex_;
  std::vector<UnmatchedRecord> records_;
  std::optional<std::filesystem::path> file_;
};

/// Deterministic generator behind RANDOM prompt selection. The engine is
/// std::mt19937_64, whose output sequence is fixed by the standard; index
/// reduction is done here so it does not depend on the standard library's
/// distribution implementation.
class ReplyRng {
 public:
  explicit ReplyRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform index in [0, n). n must be positive.
  std::size_t pick(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Uniform choice over `out.items`; a single item is returned without
/// consuming randomness.
std::pair<std::string, int> select_output(const dialog::Output& out, ReplyRng& rng);

using LanguageIndexes = std::map<std::string, std::shared_ptr<const match::CompiledIndex>, std::less<>>;

class UnsupportedLanguage : public std::invalid_argument {
 public:
  explicit UnsupportedLanguage(std::string language);
  const std::string& language() const noexcept { return language_; }

 private:
  std::string language_;
};

struct ConversationOptions {
  std::string id;  // empty: a process-unique id is generated
  std::optional<bool> autolearn_override;
  std::shared_ptr<UnmatchedLog> unmatched_log;
};

struct Turn {
  std::string user_text;
  Reply reply;
};

/// One chat session. Not internally synchronized: callers drive a single
/// conversation one message at a time.
class Conversation {
 public:
  Reply post_message(std::string_view text);

  const std::string& id() const noexcept { return id_; }
  const std::string& language() const noexcept { return language_; }
  const std::vector<Turn>& history() const noexcept { return history_; }
  const Reply& welcome() const noexcept { return welcome_; }
  std::chrono::system_clock::time_point created_at() const noexcept { return created_at_; }
  bool autolearn() const noexcept { return autolearn_; }

 private:
  friend std::pair<Conversation, Reply> start_conversation(const LanguageIndexes&, std::string_view,
                                                           std::uint64_t, ConversationOptions);
  Conversation(std::shared_ptr<const match::CompiledIndex> index, std::string language,
               std::uint64_t seed, ConversationOptions options);

  std::shared_ptr<const match::CompiledIndex> index_;
  std::string id_;
  std::string language_;
  ReplyRng rng_;
  bool autolearn_ = false;
  std::shared_ptr<UnmatchedLog> log_;
  std::vector<Turn> history_;
  Reply welcome_;
  std::chrono::system_clock::time_point created_at_;
};

/// Throws UnsupportedLanguage when `indexes` has no entry for `language`.
std::pair<Conversation, Reply> start_conversation(const LanguageIndexes& indexes,
                                                  std::string_view language, std::uint64_t seed,
                                                  ConversationOptions options = {});

std::string suggestion_text(std::string_view language, std::string_view primary_variation);

std::string format_rfc3339(std::chrono::system_clock::time_point tp);

}  // namespace ompmentor::conversation

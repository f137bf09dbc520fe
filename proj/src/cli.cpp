#include "ompmentor/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ompmentor/eval_harness.hpp"
#include "ompmentor/knowledge_base.hpp"
#include "ompmentor/service_api.hpp"
#include "ompmentor/snippet_advisor.hpp"
#include "ompmentor/text.hpp"

namespace ompmentor::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::string dump(const json& j) { return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace); }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

conversation::LanguageIndexes indexes_for(const std::string& content_dir) {
  if (content_dir.empty()) return kb::shipped_indexes();
  return kb::load_content_dir(content_dir);
}

std::optional<bool> autolearn_flag(const std::string& value) {
  if (value.empty()) return std::nullopt;
  auto b = dialog::parse_bool(value);
  if (!b) throw UsageError("--autolearn must be true or false");
  return b;
}

json reply_json(const conversation::Reply& r) {
  json j;
  j["kind"] = conversation::to_string(r.kind);
  j["text"] = r.text;
  if (r.node_id) j["node_id"] = *r.node_id;
  return j;
}

struct ChatOptions {
  std::string lang = "EN";
  std::optional<std::uint64_t> seed;
  std::string content;
  std::string autolearn;
  bool json = false;
};

int run_chat(const ChatOptions& o, std::istream& in, std::ostream& out) {
  auto indexes = indexes_for(o.content);
  conversation::ConversationOptions options;
  options.autolearn_override = autolearn_flag(o.autolearn);
  std::uint64_t seed = o.seed ? *o.seed : std::random_device{}();
  std::optional<std::pair<conversation::Conversation, conversation::Reply>> started;
  try {
    started.emplace(conversation::start_conversation(indexes, o.lang, seed, options));
  } catch (const conversation::UnsupportedLanguage& e) {
    throw UsageError(e.what());
  }
  auto& [conv, welcome] = *started;
  json transcript = json::array();
  if (o.json) {
    transcript.push_back({{"user", nullptr}, {"reply", reply_json(welcome)}});
  } else {
    out << welcome.text << '\n' << std::flush;
  }
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line) == ":quit") break;
    if (text::trim(line).empty()) continue;
    auto reply = conv.post_message(line);
    if (o.json) {
      transcript.push_back({{"user", line}, {"reply", reply_json(reply)}});
    } else {
      out << reply.text << '\n' << std::flush;
    }
  }
  if (o.json) out << dump(json{{"language", o.lang}, {"seed", seed}, {"turns", transcript}}) << '\n';
  return kOk;
}

struct FileReport {
  std::string file;
  std::vector<dialog::ValidationIssue> issues;
  std::vector<kb::CoverageIssue> coverage;
  bool parse_failed = false;
};

int run_validate(const std::string& target, bool strict, bool as_json, std::ostream& out) {
  std::vector<std::string> files;
  std::error_code ec;
  if (std::filesystem::is_directory(target, ec)) {
    for (const auto& item : std::filesystem::directory_iterator(target)) {
      if (item.is_regular_file() && item.path().extension() == ".xml") files.push_back(item.path().string());
    }
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(target, ec)) {
    files.push_back(target);
  } else {
    throw UsageError(target + ": no such file or directory");
  }

  const auto entries = kb::list_entries();
  std::vector<FileReport> reports;
  for (const auto& file : files) {
    FileReport r{file, {}, {}, false};
    try {
      auto doc = dialog::load_document(file);
      r.issues = dialog::validate_document(doc);
      r.coverage = kb::check_coverage(doc, entries);
    } catch (const dialog::ParseError& e) {
      r.parse_failed = true;
      r.issues.push_back({dialog::Severity::Error, {}, e.line(), e.what()});
    }
    reports.push_back(std::move(r));
  }

  bool failed = false;
  json j = json::array();
  for (const auto& r : reports) {
    bool errors = dialog::has_errors(r.issues) || (strict && !r.coverage.empty());
    failed = failed || errors;
    if (as_json) {
      json issues = json::array();
      for (const auto& i : r.issues) {
        issues.push_back({{"severity", dialog::to_string(i.severity)},
                          {"line", i.line},
                          {"path", i.path},
                          {"message", i.message}});
      }
      json coverage = json::array();
      for (const auto& c : r.coverage) {
        coverage.push_back({{"kind", kb::to_string(c.kind)}, {"id", c.id}, {"message", c.message}});
      }
      j.push_back({{"file", r.file}, {"ok", !errors}, {"issues", issues}, {"coverage", coverage}});
      continue;
    }
    for (const auto& i : r.issues) {
      out << r.file << ':' << i.line << ": " << dialog::to_string(i.severity) << ": ";
      if (!i.path.empty()) out << i.path << ": ";
      out << i.message << '\n';
    }
    for (const auto& c : r.coverage) {
      out << r.file << ": " << (strict ? "Error" : "Warning") << ": coverage: " << c.message << '\n';
    }
    out << r.file << ": " << (errors ? "FAILED" : "ok") << '\n';
  }
  if (as_json) out << dump(json{{"ok", !failed}, {"files", j}}) << '\n';
  return failed ? kFailed : kOk;
}

int run_eval_cmd(const std::string& corpus_file, const std::vector<std::string>& langs, double threshold,
                 const std::string& content, bool as_json, std::ostream& out) {
  std::vector<eval::CorpusRow> rows;
  for (auto& row : eval::load_corpus(corpus_file)) {
    if (langs.empty() || std::find(langs.begin(), langs.end(), row.language) != langs.end()) {
      rows.push_back(std::move(row));
    }
  }
  auto indexes = indexes_for(content);
  auto report = eval::run_eval(indexes, rows);
  const bool pass = report.accuracy >= threshold;
  if (as_json) {
    auto j = json::parse(eval::report_to_json(report));
    j["threshold"] = threshold;
    j["pass"] = pass;
    out << dump(j) << '\n';
  } else {
    out << "rows: " << report.total << '\n';
    out << "correct: " << report.correct << '\n';
    std::ostringstream acc;
    acc.setf(std::ios::fixed);
    acc.precision(4);
    acc << report.accuracy;
    out << "accuracy: " << acc.str() << " (threshold " << threshold << ")\n";
    for (const auto& [id, a] : report.per_entry) {
      out << "  " << id << ": " << a.correct << '/' << a.total << '\n';
    }
    for (const auto& c : report.confusion) {
      out << "miss " << corpus_file << ':' << c.line << ": [" << c.language << "] \"" << c.question
          << "\" expected " << c.expected << ", got " << c.got << '\n';
    }
    out << (pass ? "PASS" : "FAIL") << '\n';
  }
  return pass ? kOk : kFailed;
}

std::string read_all(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_advise(const std::string& file, const std::string& lang, bool as_json, std::istream& in,
               std::ostream& out) {
  std::string code;
  if (file == "-") {
    code = read_all(in);
  } else {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw UsageError(file + ": cannot read");
    code = read_all(f);
  }
  const auto entries = kb::list_entries();
  auto findings = advisor::scan_snippet(code);
  json j = json::array();
  for (const auto& f : findings) {
    const auto* entry = kb::find_entry(entries, f.entry_id);
    const auto* loc = entry ? entry->localized(lang) : nullptr;
    std::string answer = loc ? loc->answer : std::string();
    if (as_json) {
      j.push_back({{"rule_id", f.rule_id},
                   {"entry_id", f.entry_id},
                   {"line", f.line},
                   {"excerpt", f.excerpt},
                   {"severity", advisor::to_string(f.severity)},
                   {"message", f.message},
                   {"title", entry ? entry->title : std::string()},
                   {"answer", answer}});
      continue;
    }
    out << file << ':' << f.line << ": " << advisor::to_string(f.severity) << ": " << f.rule_id << ": "
        << f.message << '\n';
    out << "    " << f.excerpt << '\n';
    if (entry) out << "    see \"" << entry->title << "\" (" << f.entry_id << "): " << answer << '\n';
  }
  if (as_json) {
    out << dump(json{{"findings", j}}) << '\n';
  } else if (findings.empty()) {
    out << "no known mistake patterns found\n";
  }
  return kOk;
}

struct ServeOptions {
  std::string bind, content, default_lang, seed, unmatched_log, autolearn, cors_origin;
};

int run_serve(const ServeOptions& o, std::ostream& out) {
  service::ServiceConfig config = service::config_from_env({}, [](const char* name) { return std::getenv(name); });
  try {
    if (!o.bind.empty()) service::apply_bind(config, o.bind);
    if (!o.content.empty()) config.content_dir = o.content;
    if (!o.default_lang.empty()) config.default_language = o.default_lang;
    if (!o.seed.empty()) config.fixed_seed = service::parse_seed(o.seed);
    if (!o.unmatched_log.empty()) config.unmatched_log = o.unmatched_log;
    if (!o.cors_origin.empty()) config.cors_origin = o.cors_origin;
    if (auto a = autolearn_flag(o.autolearn)) config.autolearn_override = a;
  } catch (const service::ConfigError& e) {
    throw UsageError(e.what());
  }
  service::Service svc(config);
  service::HttpServer server(svc);
  int port = server.bind();
  out << "listening on http://" << config.host << ':' << port << '\n' << std::flush;
  server.listen();
  return kOk;
}

int run_generate(const std::string& dir, std::ostream& out) {
  for (const auto& path : kb::write_documents(dir)) out << "wrote " << path.string() << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"OpenMP mistakes assistant: chat, content validation, corpus evaluation, snippet advice"};
  app.name("ompmentor");
  app.require_subcommand(1);

  ChatOptions chat;
  auto* chat_cmd = app.add_subcommand("chat", "Interactive Q&A; one question per line, :quit to leave");
  chat_cmd->add_option("--lang", chat.lang, "Conversation language")->check(CLI::IsMember({"EN", "ES"}));
  chat_cmd->add_option("--seed", chat.seed, "Seed for reply selection (default: random)");
  chat_cmd->add_option("--content", chat.content, "Directory of dialog documents (default: built-in catalog)");
  chat_cmd->add_option("--autolearn", chat.autolearn, "Override the AUTOLEARN setting (true|false)");
  chat_cmd->add_flag("--json", chat.json, "Print the whole transcript as one JSON document at the end");

  std::string validate_target;
  bool validate_strict = false, validate_json = false;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate dialog documents");
  validate_cmd->add_option("target", validate_target, "Document file or directory of *.xml")->required();
  validate_cmd->add_flag("--strict", validate_strict, "Treat catalog coverage issues as errors");
  validate_cmd->add_flag("--json", validate_json, "Machine-readable output");

  std::string corpus, eval_content;
  std::vector<std::string> eval_langs;
  double threshold = 0.9;
  bool eval_json = false;
  auto* eval_cmd = app.add_subcommand("eval", "Measure matcher accuracy on a paraphrase corpus");
  eval_cmd->add_option("--corpus", corpus, "Corpus TSV file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--lang", eval_langs, "Only rows in these languages")->delimiter(',');
  eval_cmd->add_option("--threshold", threshold, "Minimum accuracy for exit status 0")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--content", eval_content, "Directory of dialog documents (default: built-in catalog)");
  eval_cmd->add_flag("--json", eval_json, "Machine-readable output");

  std::string advise_file, advise_lang = "EN";
  bool advise_json = false;
  auto* advise_cmd = app.add_subcommand("advise", "Point out known OpenMP mistake patterns in a source file");
  advise_cmd->add_option("file", advise_file, "Source file, or - for standard input")->required();
  advise_cmd->add_option("--lang", advise_lang, "Language of the linked answers")->check(CLI::IsMember({"EN", "ES"}));
  advise_cmd->add_flag("--json", advise_json, "Machine-readable output");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service (flags override environment)");
  serve_cmd->add_option("--bind", serve.bind, "host:port (env BIND, default 127.0.0.1:8080)");
  serve_cmd->add_option("--content", serve.content, "Directory of dialog documents (env CONTENT_DIR)");
  serve_cmd->add_option("--default-lang", serve.default_lang, "Default conversation language (env DEFAULT_LANG)");
  serve_cmd->add_option("--seed", serve.seed, "entropy or a fixed integer seed (env SEED)");
  serve_cmd->add_option("--unmatched-log", serve.unmatched_log, "JSON-lines file for unmatched questions (env UNMATCHED_LOG)");
  serve_cmd->add_option("--autolearn", serve.autolearn, "Override AUTOLEARN: true|false (env AUTOLEARN)");
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Access-Control-Allow-Origin value (env CORS_ORIGIN)");

  std::string generate_dir;
  auto* generate_cmd = app.add_subcommand("generate", "Write the dialog documents built from the catalog");
  generate_cmd->add_option("dir", generate_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*chat_cmd) return run_chat(chat, in, out);
    if (*validate_cmd) return run_validate(validate_target, validate_strict, validate_json, out);
    if (*eval_cmd) return run_eval_cmd(corpus, eval_langs, threshold, eval_content, eval_json, out);
    if (*advise_cmd) return run_advise(advise_file, advise_lang, advise_json, in, out);
    if (*serve_cmd) return run_serve(serve, out);
    if (*generate_cmd) return run_generate(generate_dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const eval::CorpusError& e) {
    for (const auto& p : e.problems()) err << corpus << ": " << p << '\n';
    return kFailed;
  } catch (const kb::ContentError& e) {
    for (const auto& p : e.problems()) err << "error: " << p << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace ompmentor::cli

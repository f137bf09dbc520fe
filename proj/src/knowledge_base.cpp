#include "ompmentor/knowledge_base.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <yaml-cpp/yaml.h>

#include "ompmentor/match_engine.hpp"

namespace ompmentor::kb {

namespace detail {
extern const std::string_view kCatalogYaml;
}

namespace {

std::vector<std::string> string_list(const YAML::Node& node) {
  std::vector<std::string> out;
  if (!node) return out;
  if (!node.IsSequence()) throw ContentError({"expected a list at line " + std::to_string(node.Mark().line + 1)});
  for (const auto& item : node) out.push_back(item.as<std::string>());
  return out;
}

std::string scalar(const YAML::Node& node, const char* key) {
  auto value = node[key];
  return value ? value.as<std::string>() : std::string();
}

bool has_wildcard(const std::string& item) { return item.find_first_of("$*") != std::string::npos; }

std::string with_note(const std::string& answer, const std::string& note) {
  return note.empty() ? answer : answer + " " + note;
}

dialog::Output random_output(std::vector<std::string> items) {
  dialog::Output out;
  out.items = std::move(items);
  return out;
}

}  // namespace

std::string_view to_string(Category category) {
  return category == Category::Performance ? "Performance" : "Logical";
}

std::optional<Category> category_from_string(std::string_view text) {
  if (text == "Performance") return Category::Performance;
  if (text == "Logical") return Category::Logical;
  return std::nullopt;
}

const LocalizedContent* MistakeEntry::localized(std::string_view language) const {
  auto it = content.find(language);
  return it == content.end() ? nullptr : &it->second;
}

ContentError::ContentError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "content error";
        for (const auto& p : problems) msg += "; " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

Catalog parse_catalog(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ContentError({std::string("catalog is not valid YAML: ") + e.what()});
  }
  Catalog catalog;
  std::vector<std::string> problems;
  try {
    for (const auto& lang : root["languages"]) {
      auto code = lang.first.as<std::string>();
      const auto& body = lang.second;
      LanguagePack pack;
      pack.display_name = scalar(body, "display_name");
      pack.welcome_variants = string_list(body["welcome"]["variants"]);
      pack.welcome_prompts = string_list(body["welcome"]["prompts"]);
      pack.default_prompts = string_list(body["default"]);
      for (const auto& note : body["category_notes"]) {
        auto cat = category_from_string(note.first.as<std::string>());
        if (!cat) {
          problems.push_back(code + ": unknown category '" + note.first.as<std::string>() + "' in notes");
          continue;
        }
        pack.category_notes[*cat] = note.second.as<std::string>();
      }
      for (const auto& group : body["concepts"]) {
        dialog::ConceptGroup g;
        g.canonical = scalar(group, "canonical");
        g.synonyms = string_list(group["synonyms"]);
        pack.concepts.push_back(std::move(g));
      }
      catalog.languages.emplace(code, std::move(pack));
    }
    for (const auto& node : root["entries"]) {
      MistakeEntry entry;
      entry.id = scalar(node, "id");
      auto category = scalar(node, "category");
      if (auto cat = category_from_string(category)) {
        entry.category = *cat;
      } else {
        problems.push_back(entry.id + ": unknown category '" + category + "'");
      }
      entry.title = scalar(node, "title");
      entry.reason = scalar(node, "reason");
      entry.advisor_rules = string_list(node["advisor_rules"]);
      for (const auto& [code, pack] : catalog.languages) {
        auto loc = node[code];
        if (!loc) continue;
        LocalizedContent content;
        content.variants = string_list(loc["variants"]);
        content.answer = scalar(loc, "answer");
        entry.content.emplace(code, std::move(content));
      }
      catalog.entries.push_back(std::move(entry));
    }
  } catch (const YAML::Exception& e) {
    problems.push_back(std::string("catalog structure: ") + e.what());
  }
  if (!problems.empty()) throw ContentError(std::move(problems));
  return catalog;
}

const Catalog& shipped_catalog() {
  static const Catalog catalog = parse_catalog(detail::kCatalogYaml);
  return catalog;
}

std::vector<MistakeEntry> list_entries() {
  auto entries = shipped_catalog().entries;
  std::sort(entries.begin(), entries.end(), [](const MistakeEntry& a, const MistakeEntry& b) {
    return std::tie(a.category, a.id) < std::tie(b.category, b.id);
  });
  return entries;
}

const MistakeEntry* find_entry(const std::vector<MistakeEntry>& entries, std::string_view id) {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
  return it == entries.end() ? nullptr : &*it;
}

std::vector<std::string> check_entries(const std::vector<MistakeEntry>& entries,
                                       const std::map<std::string, LanguagePack, std::less<>>& packs) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& e : entries) {
    std::string who = e.id.empty() ? std::string("<unnamed entry>") : e.id;
    if (e.id.empty()) problems.push_back(who + ": missing id");
    if (!ids.insert(e.id).second) problems.push_back(who + ": duplicate id");
    if (e.title.empty()) problems.push_back(who + ": missing title");
    if (e.reason.empty()) problems.push_back(who + ": missing reason");
    for (const auto& [lang, pack] : packs) {
      const auto* loc = e.localized(lang);
      if (loc == nullptr) {
        problems.push_back(who + ": missing " + lang + " content");
        continue;
      }
      if (loc->answer.empty()) problems.push_back(who + ": missing " + lang + " answer");
      if (loc->variants.empty()) {
        problems.push_back(who + ": no " + lang + " variants");
        continue;
      }
      if (has_wildcard(loc->variants.front())) {
        problems.push_back(who + ": " + lang + " primary variation contains a wildcard");
      }
      auto wildcards = std::count_if(loc->variants.begin(), loc->variants.end(), has_wildcard);
      if (wildcards < 2) problems.push_back(who + ": fewer than two " + lang + " wildcard variations");
      for (const auto& v : loc->variants) {
        try {
          match::compile_pattern(v, e.id, 0);
        } catch (const match::PatternError& err) {
          problems.push_back(who + ": " + lang + " variant '" + v + "': " + err.what());
        }
      }
    }
  }
  return problems;
}

std::map<std::string, dialog::DialogDocument> build_documents(
    const std::vector<MistakeEntry>& entries,
    const std::map<std::string, LanguagePack, std::less<>>& packs) {
  if (auto problems = check_entries(entries, packs); !problems.empty()) {
    throw ContentError(std::move(problems));
  }
  std::map<std::string, dialog::DialogDocument> docs;
  for (const auto& [lang, pack] : packs) {
    dialog::DialogDocument doc;
    doc.root_attributes = {{"xmlns:xsi", "http://www.w3.org/2001/XMLSchema-instance"},
                           {"xsi:noNamespaceSchemaLocation", "WatsonDialogDocument_1.0.xsd"}};
    doc.settings = {{"DISPLAYNAME", "USER", pack.display_name, {}},
                    {"LANGUAGE", "USER", lang, {}},
                    {"AUTOLEARN", "USER", "false", {}}};

    dialog::Folder main;
    main.label = dialog::FolderLabel::Main;
    dialog::InputNode welcome;
    welcome.id = "welcome";
    welcome.declared_id = true;
    welcome.grammar = pack.welcome_variants;
    welcome.output = random_output(pack.welcome_prompts);
    main.nodes.push_back(std::move(welcome));
    doc.folders.push_back(std::move(main));

    dialog::Folder library;
    library.label = dialog::FolderLabel::Library;
    for (const auto& e : entries) {
      const auto* loc = e.localized(lang);
      dialog::InputNode node;
      node.id = e.id;
      node.declared_id = true;
      node.grammar = loc->variants;
      std::string note;
      if (auto it = pack.category_notes.find(e.category); it != pack.category_notes.end()) note = it->second;
      node.output = random_output({loc->answer, with_note(loc->answer, note)});
      library.nodes.push_back(std::move(node));
    }
    doc.folders.push_back(std::move(library));

    if (!pack.concepts.empty()) {
      dialog::Folder concepts;
      concepts.label = dialog::FolderLabel::Concepts;
      concepts.concepts = pack.concepts;
      doc.folders.push_back(std::move(concepts));
    }

    doc.default_node = dialog::DefaultNode{random_output(pack.default_prompts), {}};
    docs.emplace(lang, std::move(doc));
  }
  return docs;
}

conversation::LanguageIndexes compile_documents(const std::map<std::string, dialog::DialogDocument>& docs) {
  conversation::LanguageIndexes out;
  for (const auto& [lang, doc] : docs) {
    out.emplace(lang, std::make_shared<const match::CompiledIndex>(match::CompiledIndex::build(doc)));
  }
  return out;
}

const conversation::LanguageIndexes& shipped_indexes() {
  static const conversation::LanguageIndexes indexes = compile_documents(build_documents(list_entries()));
  return indexes;
}

conversation::LanguageIndexes load_content_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw ContentError({dir.string() + " is not a directory"});
  std::vector<std::filesystem::path> files;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (item.is_regular_file() && item.path().extension() == ".xml") files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());
  conversation::LanguageIndexes out;
  std::vector<std::string> problems;
  for (const auto& file : files) {
    try {
      auto doc = dialog::load_document(file.string());
      auto index = std::make_shared<const match::CompiledIndex>(match::CompiledIndex::build(doc));
      auto lang = index->language();
      if (!out.emplace(lang, std::move(index)).second) {
        problems.push_back(file.string() + ": second document for language " + lang);
      }
    } catch (const dialog::ParseError& e) {
      problems.push_back(file.string() + ": " + e.what());
    } catch (const match::LoadError& e) {
      for (const auto& issue : e.issues()) {
        if (issue.severity == dialog::Severity::Error) {
          problems.push_back(file.string() + ":" + std::to_string(issue.line) + ": " + issue.message);
        }
      }
    }
  }
  if (!problems.empty()) throw ContentError(std::move(problems));
  return out;
}

std::string document_file_name(std::string_view language) {
  std::string name;
  for (char c : language) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return name + ".xml";
}

std::vector<std::filesystem::path> write_documents(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [lang, doc] : build_documents(list_entries())) {
    auto path = dir / document_file_name(lang);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << dialog::serialize_document(doc);
    if (!out) throw ContentError({"cannot write " + path.string()});
    written.push_back(path);
  }
  return written;
}

std::string_view to_string(CoverageKind kind) {
  switch (kind) {
    case CoverageKind::MissingNode: return "missing node";
    case CoverageKind::OrphanNode: return "node without entry";
    case CoverageKind::SelfMatchFailure: return "primary variation does not answer itself";
  }
  return "?";
}

std::vector<CoverageIssue> check_coverage(const dialog::DialogDocument& doc,
                                          const std::vector<MistakeEntry>& entries) {
  std::vector<CoverageIssue> issues;
  const auto lang = doc.language();
  const auto* library = doc.folder(dialog::FolderLabel::Library);
  std::set<std::string> node_ids;
  if (library != nullptr) {
    for (const auto& node : library->nodes) node_ids.insert(node.id);
  }
  for (const auto& e : entries) {
    if (!node_ids.count(e.id)) {
      issues.push_back({CoverageKind::MissingNode, e.id, "entry '" + e.id + "' has no Library node"});
    }
  }
  for (const auto& id : node_ids) {
    if (find_entry(entries, id) == nullptr) {
      issues.push_back({CoverageKind::OrphanNode, id, "Library node '" + id + "' has no catalog entry"});
    }
  }

  std::optional<match::CompiledIndex> index;
  try {
    index = match::CompiledIndex::build(doc);
  } catch (const match::LoadError&) {
    return issues;  // the validator reports why
  }
  for (const auto& e : entries) {
    const auto* loc = e.localized(lang);
    if (loc == nullptr || loc->variants.empty() || !node_ids.count(e.id)) continue;
    auto hit = match::best_match(*index, match::normalize(loc->variants.front(), index->concepts()));
    if (!hit || hit->node_id != e.id) {
      issues.push_back({CoverageKind::SelfMatchFailure, e.id,
                        "primary variation of '" + e.id + "' matches " +
                            (hit ? "'" + hit->node_id + "'" : std::string("nothing"))});
    }
  }
  return issues;
}

}  // namespace ompmentor::kb

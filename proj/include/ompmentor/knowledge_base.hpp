#pragma once

// The catalog of common OpenMP mistakes and the dialog documents generated
// from it. The catalog lives in content/catalog.yaml (format described in
// docs/catalog-format.md) and is compiled into the library.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ompmentor/conversation.hpp"
#include "ompmentor/dialog_document.hpp"

namespace ompmentor::kb {

enum class Category { Performance, Logical };
std::string_view to_string(Category category);
std::optional<Category> category_from_string(std::string_view text);

struct LocalizedContent {
  /// Grammar items; the first is the literal primary variation.
  std::vector<std::string> variants;
  std::string answer;
};

struct MistakeEntry {
  std::string id;
  Category category = Category::Logical;
  std::string title;
  std::string reason;
  std::map<std::string, LocalizedContent, std::less<>> content;  // keyed by language code
  std::vector<std::string> advisor_rules;

  const LocalizedContent* localized(std::string_view language) const;
};

/// Per-language material that is not tied to one entry.
struct LanguagePack {
  std::string display_name;
  std::vector<std::string> welcome_variants;
  std::vector<std::string> welcome_prompts;
  std::vector<std::string> default_prompts;
  std::map<Category, std::string> category_notes;
  std::vector<dialog::ConceptGroup> concepts;
};

struct Catalog {
  std::map<std::string, LanguagePack, std::less<>> languages;
  std::vector<MistakeEntry> entries;
};

class ContentError : public std::runtime_error {
 public:
  explicit ContentError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

Catalog parse_catalog(std::string_view yaml_text);
const Catalog& shipped_catalog();

/// Shipped entries sorted by category (Performance first), then id.
std::vector<MistakeEntry> list_entries();
const MistakeEntry* find_entry(const std::vector<MistakeEntry>& entries, std::string_view id);

/// Problems with `entries` against the languages in `packs`; empty when valid.
std::vector<std::string> check_entries(const std::vector<MistakeEntry>& entries,
                                       const std::map<std::string, LanguagePack, std::less<>>& packs);

/// One document per language in `packs`. Throws ContentError naming every
/// entry that breaks the catalog invariants.
std::map<std::string, dialog::DialogDocument> build_documents(
    const std::vector<MistakeEntry>& entries,
    const std::map<std::string, LanguagePack, std::less<>>& packs = shipped_catalog().languages);

conversation::LanguageIndexes compile_documents(const std::map<std::string, dialog::DialogDocument>& docs);

/// Indexes compiled from the shipped catalog; built once.
const conversation::LanguageIndexes& shipped_indexes();

/// Every *.xml file in `dir`, keyed by its LANGUAGE setting. Throws
/// ContentError naming each file that fails to parse or validate, or a
/// language defined twice. A directory without documents yields an empty map.
conversation::LanguageIndexes load_content_dir(const std::filesystem::path& dir);

/// File name used for a language's generated document, e.g. "en.xml".
std::string document_file_name(std::string_view language);

/// Writes the documents built from the shipped catalog into `dir`; returns the paths written.
std::vector<std::filesystem::path> write_documents(const std::filesystem::path& dir);

enum class CoverageKind { MissingNode, OrphanNode, SelfMatchFailure };
std::string_view to_string(CoverageKind kind);

struct CoverageIssue {
  CoverageKind kind;
  std::string id;
  std::string message;
};

std::vector<CoverageIssue> check_coverage(const dialog::DialogDocument& doc,
                                          const std::vector<MistakeEntry>& entries);

}  // namespace ompmentor::kb

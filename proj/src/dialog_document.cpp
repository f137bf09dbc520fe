#include "ompmentor/dialog_document.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "ompmentor/match_engine.hpp"
#include "ompmentor/text.hpp"

namespace ompmentor::dialog {

namespace {

constexpr std::string_view kLabels[] = {"Main", "Library", "Global", "Concepts"};

class Reader {
 public:
  DialogDocument read(const xml::Element& root) {
    if (root.name != "dialog") {
      throw ParseError("root element must be <dialog>, found <" + root.name + ">", root.name,
                       root.line.value);
    }
    DialogDocument doc;
    doc.root_attributes = root.attributes;
    const xml::Element* flow = nullptr;
    for (const auto& child : root.children) {
      if (child.name == "settings") {
        read_settings(doc, child);
      } else if (child.name == "flow") {
        if (flow != nullptr) throw ParseError("more than one <flow>", "dialog/flow", child.line.value);
        flow = &child;
      } else if (child.name == "default") {
        read_default(doc, child, "dialog/default");
      } else {
        warn("dialog/" + child.name, child.line.value, "unknown element <" + child.name + "> ignored");
      }
    }
    if (flow == nullptr) throw ParseError("missing mandatory <flow>", "dialog", root.line.value);

    for (const auto& child : flow->children) {
      if (child.name == "folder") {
        read_folder(doc, child);
      } else if (child.name == "default") {
        read_default(doc, child, "dialog/flow/default");
      } else {
        warn("dialog/flow/" + child.name, child.line.value,
             "unknown element <" + child.name + "> ignored");
      }
    }
    if (doc.folder(FolderLabel::Main) == nullptr) {
      throw ParseError("missing Main folder", "dialog/flow", flow->line.value);
    }
    if (doc.folder(FolderLabel::Library) == nullptr) {
      throw ParseError("missing Library folder", "dialog/flow", flow->line.value);
    }
    doc.parse_warnings = std::move(warnings_);
    return doc;
  }

 private:
  std::vector<ValidationIssue> warnings_;

  void warn(std::string path, int line, std::string message) {
    warnings_.push_back(ValidationIssue{Severity::Warning, std::move(path), line, std::move(message)});
  }

  void read_settings(DialogDocument& doc, const xml::Element& el) {
    for (const auto& child : el.children) {
      if (child.name != "setting") {
        warn("dialog/settings/" + child.name, child.line.value,
             "unknown element <" + child.name + "> ignored");
        continue;
      }
      const auto* name = child.attribute("name");
      if (name == nullptr || name->empty()) {
        warn("dialog/settings/setting", child.line.value, "setting without a name ignored");
        continue;
      }
      const auto* scope = child.attribute("type");
      doc.settings.push_back(Setting{*name, scope ? *scope : std::string(), child.text, child.line});
    }
  }

  void read_default(DialogDocument& doc, const xml::Element& el, const std::string& path) {
    if (doc.default_node) throw ParseError("more than one <default> node", path, el.line.value);
    DefaultNode def;
    def.line = el.line;
    bool have_output = false;
    for (const auto& child : el.children) {
      if (child.name == "output" && !have_output) {
        def.output = read_output(child, path + "/output");
        have_output = true;
      } else {
        warn(path + "/" + child.name, child.line.value, "unexpected element <" + child.name + "> ignored");
      }
    }
    doc.default_node = std::move(def);
  }

  void read_folder(DialogDocument& doc, const xml::Element& el) {
    const auto* label_attr = el.attribute("label");
    auto label = label_attr ? folder_label_from_string(*label_attr) : std::nullopt;
    if (!label) {
      warn("dialog/flow/folder", el.line.value,
           "folder with unknown label '" + (label_attr ? *label_attr : std::string()) + "' ignored");
      return;
    }
    Folder folder;
    folder.label = *label;
    folder.line = el.line;
    std::string path = "dialog/flow/folder[" + std::string(to_string(*label)) + "]";
    switch (*label) {
      case FolderLabel::Main:
      case FolderLabel::Library: {
        for (const auto& child : el.children) {
          if (child.name == "input") {
            std::string synthesized = std::string(to_string(*label)) + "/" +
                                      std::to_string(folder.nodes.size());
            folder.nodes.push_back(read_input(child, synthesized, path));
          } else {
            warn(path + "/" + child.name, child.line.value,
                 "unknown element <" + child.name + "> ignored");
          }
        }
        break;
      }
      case FolderLabel::Concepts: {
        for (const auto& child : el.children) {
          if (child.name != "concept") {
            warn(path + "/" + child.name, child.line.value,
                 "unknown element <" + child.name + "> ignored");
            continue;
          }
          ConceptGroup group;
          group.line = child.line;
          const auto* canonical = child.attribute("canonical");
          group.canonical = canonical ? *canonical : std::string();
          for (const auto& syn : child.children) {
            if (syn.name == "synonym") {
              group.synonyms.push_back(syn.text);
            } else {
              warn(path + "/concept/" + syn.name, syn.line.value,
                   "unknown element <" + syn.name + "> ignored");
            }
          }
          folder.concepts.push_back(std::move(group));
        }
        break;
      }
      case FolderLabel::Global:
        folder.opaque_content = el.children;
        break;
    }
    doc.folders.push_back(std::move(folder));
  }

  InputNode read_input(const xml::Element& el, const std::string& synthesized_id,
                       const std::string& parent_path) {
    InputNode node;
    node.line = el.line;
    if (const auto* id = el.attribute("id"); id != nullptr && !id->empty()) {
      node.id = *id;
      node.declared_id = true;
    } else {
      node.id = synthesized_id;
    }
    std::string path = parent_path + "/input[" + node.id + "]";
    bool have_grammar = false;
    bool have_output = false;
    for (const auto& child : el.children) {
      if (child.name == "grammar") {
        if (have_grammar) {
          warn(path + "/grammar", child.line.value, "additional <grammar> ignored");
          continue;
        }
        have_grammar = true;
        for (const auto& item : child.children) {
          if (item.name == "item") {
            node.grammar.push_back(item.text);
          } else {
            warn(path + "/grammar/" + item.name, item.line.value,
                 "unknown element <" + item.name + "> ignored");
          }
        }
      } else if (child.name == "output") {
        if (have_output) {
          warn(path + "/output", child.line.value, "additional <output> ignored");
          continue;
        }
        have_output = true;
        node.output = read_output(child, path + "/output");
      } else if (child.name == "input") {
        std::string child_id = node.id + "/" + std::to_string(node.children.size());
        node.children.push_back(read_input(child, child_id, path));
      } else {
        warn(path + "/" + child.name, child.line.value, "unknown element <" + child.name + "> ignored");
      }
    }
    if (node.grammar.empty()) {
      throw ParseError("input node has no grammar items", path, el.line.value);
    }
    return node;
  }

  Output read_output(const xml::Element& el, const std::string& path) {
    Output out;
    out.line = el.line;
    bool have_prompt = false;
    for (const auto& child : el.children) {
      if (child.name != "prompt") {
        warn(path + "/" + child.name, child.line.value, "unknown element <" + child.name + "> ignored");
        continue;
      }
      if (have_prompt) {
        warn(path + "/prompt", child.line.value, "additional <prompt> ignored");
        continue;
      }
      have_prompt = true;
      if (const auto* sel = child.attribute("selectionType"); sel != nullptr && *sel != "RANDOM") {
        throw ParseError("unsupported selectionType '" + *sel + "'", path + "/prompt", child.line.value);
      }
      for (const auto& item : child.children) {
        if (item.name == "item") {
          out.items.push_back(item.text);
        } else {
          warn(path + "/prompt/" + item.name, item.line.value,
               "unknown element <" + item.name + "> ignored");
        }
      }
    }
    return out;
  }
};

xml::Element text_element(std::string name, std::string text) {
  xml::Element el;
  el.name = std::move(name);
  el.text = std::move(text);
  return el;
}

xml::Element output_element(const Output& output) {
  xml::Element prompt;
  prompt.name = "prompt";
  prompt.attributes.push_back({"selectionType", "RANDOM"});
  for (const auto& item : output.items) prompt.children.push_back(text_element("item", item));
  xml::Element out;
  out.name = "output";
  out.children.push_back(std::move(prompt));
  return out;
}

xml::Element input_element(const InputNode& node) {
  xml::Element input;
  input.name = "input";
  if (node.declared_id) input.attributes.push_back({"id", node.id});
  xml::Element grammar;
  grammar.name = "grammar";
  for (const auto& item : node.grammar) grammar.children.push_back(text_element("item", item));
  input.children.push_back(std::move(grammar));
  input.children.push_back(output_element(node.output));
  for (const auto& child : node.children) input.children.push_back(input_element(child));
  return input;
}

class Validator {
 public:
  explicit Validator(const DialogDocument& doc) : doc_(doc) {}

  std::vector<ValidationIssue> run() {
    check_settings();
    check_folders();
    concepts_ = match::synonym_map(doc_);
    for (const auto& folder : doc_.folders) {
      std::string path = "dialog/flow/folder[" + std::string(to_string(folder.label)) + "]";
      for (const auto& node : folder.nodes) check_node(node, path);
    }
    if (doc_.default_node) {
      check_output(doc_.default_node->output, "dialog/default/output",
                   doc_.default_node->line.value, /*warn_single=*/false);
    }
    issues_.insert(issues_.end(), doc_.parse_warnings.begin(), doc_.parse_warnings.end());
    std::stable_sort(issues_.begin(), issues_.end(), [](const auto& a, const auto& b) {
      return std::tie(a.line, a.path) < std::tie(b.line, b.path);
    });
    return std::move(issues_);
  }

 private:
  const DialogDocument& doc_;
  std::vector<ValidationIssue> issues_;
  std::map<std::string, int> ids_;
  match::SynonymMap concepts_;

  void error(std::string path, int line, std::string message) {
    issues_.push_back({Severity::Error, std::move(path), line, std::move(message)});
  }
  void warning(std::string path, int line, std::string message) {
    issues_.push_back({Severity::Warning, std::move(path), line, std::move(message)});
  }

  void check_settings() {
    for (const auto& s : doc_.settings) {
      std::string path = "dialog/settings/setting[" + s.name + "]";
      bool upper_ident = !s.name.empty() && std::all_of(s.name.begin(), s.name.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
      });
      if (!upper_ident) warning(path, s.line.value, "setting name is not an uppercase identifier");
      if (s.name == "LANGUAGE") {
        bool two_upper = s.value.size() == 2 && std::all_of(s.value.begin(), s.value.end(),
                                                            [](char c) { return c >= 'A' && c <= 'Z'; });
        if (!two_upper) {
          error(path, s.line.value, "LANGUAGE must be a two-letter uppercase code");
        } else if (s.value != "EN" && s.value != "ES") {
          warning(path, s.line.value, "LANGUAGE '" + s.value + "' has no shipped content");
        }
      } else if (s.name == "AUTOLEARN") {
        if (!parse_bool(s.value)) error(path, s.line.value, "AUTOLEARN must be true or false");
      }
    }
  }

  void check_folders() {
    std::map<FolderLabel, int> counts;
    for (const auto& folder : doc_.folders) {
      std::string path = "dialog/flow/folder[" + std::string(to_string(folder.label)) + "]";
      if (++counts[folder.label] == 2) {
        error(path, folder.line.value, "duplicate folder '" + std::string(to_string(folder.label)) + "'");
      }
      if (folder.label == FolderLabel::Concepts) check_concepts(folder, path);
    }
    const auto* main = doc_.folder(FolderLabel::Main);
    if (main != nullptr && main->nodes.empty()) {
      error("dialog/flow/folder[Main]", main->line.value, "Main folder has no welcome node");
    }
  }

  void check_concepts(const Folder& folder, const std::string& path) {
    std::map<std::string, std::string> owner;
    for (const auto& group : folder.concepts) {
      std::string gpath = path + "/concept[" + group.canonical + "]";
      auto canonical = match::normalize(group.canonical).tokens;
      if (canonical.size() != 1) {
        error(gpath, group.line.value, "concept canonical must be a single token");
        continue;
      }
      std::set<std::string> seen;
      std::vector<std::string> tokens{canonical[0]};
      for (const auto& syn : group.synonyms) {
        auto toks = match::normalize(syn).tokens;
        if (toks.size() != 1) {
          error(gpath, group.line.value, "synonym '" + syn + "' is not a single token");
          continue;
        }
        if (!seen.insert(toks[0]).second) {
          error(gpath, group.line.value, "duplicate synonym '" + syn + "'");
          continue;
        }
        if (toks[0] != canonical[0]) tokens.push_back(toks[0]);
      }
      for (const auto& tok : tokens) {
        auto [it, inserted] = owner.emplace(tok, canonical[0]);
        if (!inserted && it->second != canonical[0]) {
          error(gpath, group.line.value,
                "token '" + tok + "' already belongs to concept '" + it->second + "'");
        }
      }
    }
  }

  void check_node(const InputNode& node, const std::string& parent_path) {
    std::string path = parent_path + "/input[" + node.id + "]";
    int line = node.line.value;
    if (!ids_.emplace(node.id, line).second) error(path, line, "duplicate node id '" + node.id + "'");
    if (node.grammar.empty()) error(path + "/grammar", line, "grammar has no items");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < node.grammar.size(); ++i) {
      const auto& item = node.grammar[i];
      std::string ipath = path + "/grammar/item[" + std::to_string(i) + "]";
      if (i == 0 && item.find_first_of("$*") != std::string::npos) {
        warning(ipath, line, "wildcard in primary variation");
      }
      if (!seen.insert(item).second) warning(ipath, line, "duplicate grammar item");
      try {
        match::compile_pattern(item, node.id, static_cast<int>(i), concepts_);
      } catch (const match::PatternError& e) {
        error(ipath, line, std::string("invalid grammar item: ") + e.what());
      }
    }
    check_output(node.output, path + "/output", node.output.line.value ? node.output.line.value : line,
                 /*warn_single=*/true);
    for (const auto& child : node.children) check_node(child, path);
  }

  // Default nodes are exempt from the single-item warning: a fixed fallback
  // sentence is the normal case there.
  void check_output(const Output& out, const std::string& path, int line, bool warn_single) {
    if (out.items.empty()) {
      error(path, line, "output has no prompt items");
    } else if (warn_single && out.items.size() == 1) {
      warning(path, line, "RANDOM output with a single item");
    }
  }
};

}  // namespace

std::string_view to_string(FolderLabel label) { return kLabels[static_cast<int>(label)]; }

std::optional<FolderLabel> folder_label_from_string(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    std::string_view label = kLabels[i];
    if (text.size() == label.size() && text::starts_with_ci(text, label)) {
      return static_cast<FolderLabel>(i);
    }
  }
  return std::nullopt;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

const Folder* DialogDocument::folder(FolderLabel label) const {
  for (const auto& f : folders) {
    if (f.label == label) return &f;
  }
  return nullptr;
}

Folder* DialogDocument::folder(FolderLabel label) {
  for (auto& f : folders) {
    if (f.label == label) return &f;
  }
  return nullptr;
}

std::optional<std::string> DialogDocument::setting(std::string_view name) const {
  for (const auto& s : settings) {
    if (s.name == name) return s.value;
  }
  return std::nullopt;
}

std::string DialogDocument::language() const { return setting("LANGUAGE").value_or(""); }

bool DialogDocument::autolearn() const {
  auto value = setting("AUTOLEARN");
  return value && parse_bool(*value).value_or(false);
}

ParseError::ParseError(const std::string& message, std::string path, int line)
    : std::runtime_error(message), path_(std::move(path)), line_(line) {}

DialogDocument parse_document(std::string_view xml_text) {
  xml::Element root;
  try {
    root = xml::parse(xml_text);
  } catch (const xml::Error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what() + " (column " +
                         std::to_string(e.column()) + ")",
                     "", e.line());
  }
  return Reader{}.read(root);
}

DialogDocument load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, "", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

std::string serialize_document(const DialogDocument& doc) {
  xml::Element root;
  root.name = "dialog";
  root.attributes = doc.root_attributes;
  if (!doc.settings.empty()) {
    xml::Element settings;
    settings.name = "settings";
    for (const auto& s : doc.settings) {
      xml::Element el = text_element("setting", s.value);
      el.attributes.push_back({"name", s.name});
      el.attributes.push_back({"type", s.scope});
      settings.children.push_back(std::move(el));
    }
    root.children.push_back(std::move(settings));
  }
  xml::Element flow;
  flow.name = "flow";
  for (const auto& folder : doc.folders) {
    xml::Element el;
    el.name = "folder";
    el.attributes.push_back({"label", std::string(to_string(folder.label))});
    for (const auto& node : folder.nodes) el.children.push_back(input_element(node));
    for (const auto& group : folder.concepts) {
      xml::Element concept_el;
      concept_el.name = "concept";
      concept_el.attributes.push_back({"canonical", group.canonical});
      for (const auto& syn : group.synonyms) concept_el.children.push_back(text_element("synonym", syn));
      el.children.push_back(std::move(concept_el));
    }
    for (const auto& opaque : folder.opaque_content) el.children.push_back(opaque);
    flow.children.push_back(std::move(el));
  }
  root.children.push_back(std::move(flow));
  if (doc.default_node) {
    xml::Element def;
    def.name = "default";
    def.children.push_back(output_element(doc.default_node->output));
    root.children.push_back(std::move(def));
  }
  return xml::write_document(root);
}

std::vector<ValidationIssue> validate_document(const DialogDocument& doc) {
  return Validator(doc).run();
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
  return std::any_of(issues.begin(), issues.end(),
                     [](const auto& i) { return i.severity == Severity::Error; });
}

namespace {

const InputNode* find_in(const std::vector<InputNode>& nodes, std::string_view id) {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
    if (const auto* hit = find_in(node.children, id)) return hit;
  }
  return nullptr;
}

void visit_nodes(const Folder& folder, const std::vector<InputNode>& nodes,
                 const std::function<void(const Folder&, const InputNode&)>& visit) {
  for (const auto& node : nodes) {
    visit(folder, node);
    visit_nodes(folder, node.children, visit);
  }
}

}  // namespace

const InputNode* lookup_node(const DialogDocument& doc, std::string_view node_id) {
  for (const auto& folder : doc.folders) {
    if (const auto* hit = find_in(folder.nodes, node_id)) return hit;
  }
  return nullptr;
}

void for_each_node(const DialogDocument& doc,
                   const std::function<void(const Folder&, const InputNode&)>& visit) {
  for (const auto& folder : doc.folders) visit_nodes(folder, folder.nodes, visit);
}

std::optional<bool> parse_bool(std::string_view text) {
  auto t = text::to_lower(text::trim(text));
  if (t == "true") return true;
  if (t == "false") return false;
  return std::nullopt;
}

}  // namespace ompmentor::dialog

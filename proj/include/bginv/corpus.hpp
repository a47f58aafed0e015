#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bginv/common.hpp"

namespace bginv {

using KeywordId = std::uint32_t;
using KeywordSet = std::vector<KeywordId>;  // sorted, unique

enum class Role { target, background };

inline std::string_view to_string(Role r) { return r == Role::target ? "target" : "background"; }

/// Lowercase, trim, collapse internal whitespace runs to one space.
/// Multi-word keywords stay a single token.
inline std::string normalize_keyword(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

struct ImageRecord {
  std::string image_id;
  Role role = Role::background;
  KeywordSet keywords;
  std::optional<KeywordId> foreground;

  bool has_keyword(KeywordId k) const { return std::binary_search(keywords.begin(), keywords.end(), k); }
};

/// Interned, immutable-after-load collection of target and background records.
class Corpus {
 public:
  const std::vector<std::string>& keyword_table() const { return keywords_; }
  const std::vector<ImageRecord>& records() const { return records_; }

  std::size_t keyword_count() const { return keywords_.size(); }
  std::size_t target_count() const { return targets_; }
  std::size_t background_count() const { return records_.size() - targets_; }

  const std::string& keyword(KeywordId id) const { return keywords_.at(id); }

  std::optional<KeywordId> find_keyword(std::string_view raw) const {
    auto it = index_.find(normalize_keyword(raw));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const ImageRecord* find(std::string_view image_id) const {
    auto it = by_id_.find(std::string(image_id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  const ImageRecord& record(std::string_view image_id) const {
    const auto* r = find(image_id);
    if (!r) throw Error("unknown image id '" + std::string(image_id) + "'");
    return *r;
  }

  /// Interns a keyword, returning its existing id when already present.
  KeywordId intern(std::string_view raw) {
    std::string norm = normalize_keyword(raw);
    if (norm.empty()) throw Error("empty keyword");
    auto [it, inserted] = index_.emplace(norm, static_cast<KeywordId>(keywords_.size()));
    if (inserted) keywords_.push_back(std::move(norm));
    return it->second;
  }

  /// Adds a record given raw keyword strings. Validates the record invariants.
  const ImageRecord& add(std::string image_id, Role role, const std::vector<std::string>& raw_keywords,
                         const std::optional<std::string>& raw_foreground = std::nullopt) {
    if (image_id.empty()) throw Error("empty image id");
    if (by_id_.count(image_id)) throw Error("duplicate image id '" + image_id + "'");
    if (raw_keywords.empty()) throw Error("record '" + image_id + "' has no keywords");
    ImageRecord rec;
    rec.image_id = std::move(image_id);
    rec.role = role;
    for (const auto& k : raw_keywords) rec.keywords.push_back(intern(k));
    std::sort(rec.keywords.begin(), rec.keywords.end());
    rec.keywords.erase(std::unique(rec.keywords.begin(), rec.keywords.end()), rec.keywords.end());
    if (role == Role::target) {
      if (!raw_foreground) throw Error("target '" + rec.image_id + "' has no foreground keyword");
      const KeywordId fg = intern(*raw_foreground);
      if (!rec.has_keyword(fg))
        throw Error("target '" + rec.image_id + "' foreground '" + keywords_[fg] + "' is not among its keywords");
      rec.foreground = fg;
      ++targets_;
    } else if (raw_foreground) {
      throw Error("background '" + rec.image_id + "' must not carry a foreground keyword");
    }
    by_id_.emplace(rec.image_id, records_.size());
    records_.push_back(std::move(rec));
    return records_.back();
  }

  std::vector<const ImageRecord*> with_role(Role role) const {
    std::vector<const ImageRecord*> out;
    for (const auto& r : records_)
      if (r.role == role) out.push_back(&r);
    return out;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    if (a.keywords_ != b.keywords_ || a.records_.size() != b.records_.size()) return false;
    for (std::size_t i = 0; i < a.records_.size(); ++i) {
      const auto& x = a.records_[i];
      const auto& y = b.records_[i];
      if (x.image_id != y.image_id || x.role != y.role || x.keywords != y.keywords || x.foreground != y.foreground)
        return false;
    }
    return true;
  }

 private:
  std::vector<std::string> keywords_;
  std::unordered_map<std::string, KeywordId> index_;
  std::vector<ImageRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t targets_ = 0;
};

inline const KeywordSet& keyword_set(const Corpus& corpus, std::string_view image_id) {
  return corpus.record(image_id).keywords;
}

inline Role parse_role(const std::string& s) {
  if (s == "target") return Role::target;
  if (s == "background") return Role::background;
  throw Error("unknown role '" + s + "'");
}

/// Reads a line-delimited corpus. `role_filter` drops records of the other role
/// after validation.
inline Corpus load_corpus(std::istream& in, std::optional<Role> role_filter = std::nullopt) {
  Corpus corpus;
  std::size_t seen = 0;
  for_each_jsonl(in, [&](const json& j, std::size_t lineno) {
    ++seen;
    try {
      const std::string id = j.at("id").get<std::string>();
      const Role role = parse_role(j.at("role").get<std::string>());
      const auto kws = j.at("keywords").get<std::vector<std::string>>();
      std::optional<std::string> fg;
      if (j.contains("foreground") && !j["foreground"].is_null()) fg = j["foreground"].get<std::string>();
      if (role_filter && role != *role_filter) {
        // Still intern so ids match the unfiltered corpus.
        for (const auto& k : kws) corpus.intern(k);
        return;
      }
      corpus.add(id, role, kws, fg);
    } catch (const json::exception& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  if (seen == 0) throw Error("empty corpus");
  return corpus;
}

inline Corpus load_corpus_file(const std::string& path, std::optional<Role> role_filter = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return load_corpus(in, role_filter);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

inline Corpus load_corpus_string(const std::string& text) {
  std::istringstream in(text);
  return load_corpus(in);
}

/// Canonical serialization: records in load order, keywords in interning order
/// so that a reload reproduces identical ids.
inline std::string save_corpus(const Corpus& corpus) {
  std::vector<json> rows;
  // Emit keywords in id order per record; first-seen order across records is
  // preserved because records are written in the order they were interned.
  for (const auto& r : corpus.records()) {
    json j;
    j["id"] = r.image_id;
    j["role"] = to_string(r.role);
    std::vector<std::string> kws;
    for (KeywordId k : r.keywords) kws.push_back(corpus.keyword(k));
    j["keywords"] = kws;
    if (r.foreground) j["foreground"] = corpus.keyword(*r.foreground);
    rows.push_back(std::move(j));
  }
  return to_jsonl(rows);
}

}  // namespace bginv

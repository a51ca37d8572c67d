#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bayeslex {

class Vocabulary {
 public:
  Vocabulary() = default;

  int add_or_get(const std::string& token) {
    auto it = ids_.find(token);
    if (it != ids_.end()) return it->second;
    const int id = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    ids_.emplace(token, id);
    return id;
  }

  std::optional<int> lookup(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct DocumentCounts {
  std::string id;
  std::map<int, std::int64_t> counts;  // word id -> positive count
  std::int64_t total = 0;
};

struct Corpus {
  std::vector<DocumentCounts> documents;
  Vocabulary vocabulary;

  std::size_t size() const { return documents.size(); }
};

struct LexiconPair {
  std::vector<int> w0;  // sorted, disjoint from w1
  std::vector<int> w1;
  std::vector<std::pair<std::string, std::string>> dropped;  // (token, reason)
};

// Lowercase and split on any non-alphanumeric byte.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Count tokens through an existing vocabulary; unknown tokens are dropped and
// do not contribute to the total.
inline DocumentCounts count_document(const std::vector<std::string>& tokens,
                                     const Vocabulary& vocab) {
  DocumentCounts doc;
  for (const auto& tok : tokens) {
    if (auto id = vocab.lookup(tok)) {
      ++doc.counts[*id];
      ++doc.total;
    }
  }
  return doc;
}

// Count tokens, growing the vocabulary as new tokens appear.
inline DocumentCounts count_document_building(const std::vector<std::string>& tokens,
                                              Vocabulary& vocab) {
  DocumentCounts doc;
  for (const auto& tok : tokens) {
    ++doc.counts[vocab.add_or_get(tok)];
    ++doc.total;
  }
  return doc;
}

enum class CorpusFormat { RawTextJsonl, PrecountedJsonl };

namespace detail {

inline std::runtime_error corpus_error(std::size_t line_no, const std::string& what) {
  std::ostringstream os;
  os << "corpus line " << line_no << ": " << what;
  return std::runtime_error(os.str());
}

template <typename CountFn>
Corpus load_corpus_impl(const std::string& path, CorpusFormat format, CountFn count_tokens) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw corpus_error(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string())
      throw corpus_error(line_no, "expected object with string \"id\"");
    const std::string doc_id = obj["id"].get<std::string>();
    if (!seen_ids.insert(doc_id).second)
      throw corpus_error(line_no, "duplicate doc-id \"" + doc_id + "\"");

    DocumentCounts doc;
    if (format == CorpusFormat::RawTextJsonl) {
      if (!obj.contains("text") || !obj["text"].is_string())
        throw corpus_error(line_no, "expected string \"text\"");
      doc = count_tokens(tokenize(obj["text"].get<std::string>()), corpus.vocabulary);
    } else {
      if (!obj.contains("counts") || !obj["counts"].is_object())
        throw corpus_error(line_no, "expected object \"counts\"");
      std::vector<std::string> expanded;
      for (auto it = obj["counts"].begin(); it != obj["counts"].end(); ++it) {
        if (!it.value().is_number_integer() || it.value().get<std::int64_t>() <= 0)
          throw corpus_error(line_no, "count for \"" + it.key() + "\" must be a positive integer");
        const auto n = it.value().get<std::int64_t>();
        std::string tok = it.key();
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        for (std::int64_t k = 0; k < n; ++k) expanded.push_back(tok);
      }
      doc = count_tokens(expanded, corpus.vocabulary);
    }
    doc.id = doc_id;
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) throw std::runtime_error("empty corpus: " + path);
  return corpus;
}

}  // namespace detail

// Load a corpus, building its vocabulary from the file contents.
inline Corpus load_corpus(const std::string& path, CorpusFormat format) {
  return detail::load_corpus_impl(path, format,
                                  [](const std::vector<std::string>& toks, Vocabulary& vocab) {
                                    return count_document_building(toks, vocab);
                                  });
}

// Load a corpus against a fixed vocabulary; out-of-vocabulary tokens dropped.
inline Corpus load_corpus(const std::string& path, CorpusFormat format,
                          const Vocabulary& vocab) {
  Corpus corpus = detail::load_corpus_impl(
      path, format,
      [&vocab](const std::vector<std::string>& toks, Vocabulary&) {
        return count_document(toks, vocab);
      });
  corpus.vocabulary = vocab;
  return corpus;
}

// One token per line; '#' comment lines and blanks skipped; lowercased.
inline std::vector<std::string> read_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    std::transform(line.begin(), line.end(), line.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(line);
  }
  return tokens;
}

inline LexiconPair make_lexicon(const std::vector<std::string>& tokens0,
                                const std::vector<std::string>& tokens1,
                                const Vocabulary& vocab) {
  std::set<std::string> set0(tokens0.begin(), tokens0.end());
  for (const auto& tok : tokens1)
    if (set0.count(tok)) throw std::runtime_error("lexicon overlap on token \"" + tok + "\"");

  LexiconPair lex;
  std::set<int> ids0, ids1;
  for (const auto& tok : tokens0) {
    if (auto id = vocab.lookup(tok))
      ids0.insert(*id);
    else
      lex.dropped.emplace_back(tok, "not-in-vocab");
  }
  for (const auto& tok : tokens1) {
    if (auto id = vocab.lookup(tok))
      ids1.insert(*id);
    else
      lex.dropped.emplace_back(tok, "not-in-vocab");
  }
  lex.w0.assign(ids0.begin(), ids0.end());
  lex.w1.assign(ids1.begin(), ids1.end());
  if (lex.w0.empty() && lex.w1.empty())
    throw std::runtime_error("both lexicons empty after dropping unknown tokens");
  return lex;
}

inline LexiconPair load_lexicon(const std::string& path0, const std::string& path1,
                                const Vocabulary& vocab) {
  return make_lexicon(read_lexicon_file(path0), read_lexicon_file(path1), vocab);
}

}  // namespace bayeslex

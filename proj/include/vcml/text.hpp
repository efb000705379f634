#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace vcml {

enum class TextKind { manual10, bow, word_avg, doc_embedding };

const char* to_string(TextKind k);
TextKind text_kind_from_string(const std::string& s);

struct TextRepresentation {
  TextKind kind = TextKind::manual10;
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

// Lowercased unigrams, split on any non-alphanumeric byte (non-ASCII bytes
// count as separators). Empty tokens dropped.
std::vector<std::string> tokenize(const std::string& text);

// Pinned English stop-word list (175 entries, sorted). Checked by checksum
// in the test suite; do not edit casually.
const std::vector<std::string>& stop_words();
std::uint64_t stop_words_checksum();

// Pinned gazetteer of lowercase country and major-city names.
const std::set<std::string>& default_gazetteer();

// Rule-based suffix stripper standing in for lemmatization. Single pass,
// first matching rule wins:
//   -ing  (length >= 6)                 building -> build
//   -ed   (length >= 5)                 founded  -> found
//   -es   (length >= 5)                 services -> servic
//   -s    (length >= 4, not -ss)        platforms -> platform
//   -ly   (length >= 5)                 quickly  -> quick
std::string stem(const std::string& token);

// Ten fixed-order surface features of a description:
//   0 character length (verbatim, including spaces)
//   1 word count (tokenize())
//   2 mean word length in characters
//   3 sentence count (split on . ! ?)
//   4 mean sentence length in words
//   5 type-token ratio
//   6 digit-character fraction
//   7 uppercase-character fraction (before lowercasing)
//   8 gazetteer hit count
//   9 comma count
// Ratios on empty text are 0.
TextRepresentation manual_features(const std::string& text, const std::set<std::string>& gazetteer);

struct BowVocabulary {
  std::vector<std::string> terms;  // unique, sorted
  std::vector<double> idf;         // aligned to terms
  double min_doc_fraction = 0.05;

  std::size_t size() const { return terms.size(); }
};

// Stop-word removal and stemming applied to each document, then terms kept
// iff document frequency >= min_doc_fraction of the corpus. idf(t) =
// ln((1+N)/(1+df(t))) + 1. Throws on an empty corpus or a vocabulary that
// prunes to nothing ("degenerate corpus").
BowVocabulary fit_bow(const std::vector<std::vector<std::string>>& corpus_tokens,
                      double min_doc_fraction = 0.05);

// tf-idf encoding of one tokenized document against a fitted vocabulary.
// Out-of-vocabulary terms are ignored; nonzero vectors are scaled to unit
// Euclidean norm when l2_normalize is set.
TextRepresentation bow_encode(const std::vector<std::string>& tokens, const BowVocabulary& vocab,
                              bool l2_normalize = true);

struct WordVectorTable {
  std::size_t dim = 50;
  std::vector<std::string> words;
  std::vector<std::vector<double>> vectors;

  const std::vector<double>* find(const std::string& word) const;
  void insert(const std::string& word, std::vector<double> v);
  static WordVectorTable load(const std::string& path);  // "word v1 .. vdim" per line
};

struct WordAverageResult {
  TextRepresentation rep;       // kind word_avg
  bool empty_coverage = false;  // no token found in the table
};

WordAverageResult word_average(const std::vector<std::string>& tokens, const WordVectorTable& table);

}  // namespace vcml

#include "vcml/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "vcml/common.hpp"

namespace vcml {

const char* to_string(TextKind k) {
  switch (k) {
    case TextKind::manual10: return "manual10";
    case TextKind::bow: return "bow";
    case TextKind::word_avg: return "word_avg";
    case TextKind::doc_embedding: return "doc_embedding";
  }
  return "manual10";
}

TextKind text_kind_from_string(const std::string& s) {
  if (s == "manual10") return TextKind::manual10;
  if (s == "bow") return TextKind::bow;
  if (s == "word_avg") return TextKind::word_avg;
  if (s == "doc_embedding") return TextKind::doc_embedding;
  throw Error("unknown text representation kind '" + s + "'");
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words = {
      "a", "about", "above", "across", "after", "again", "against", "all", "almost", "along",
      "already", "also", "although", "always", "am", "among", "an", "and", "another", "any",
      "anyone", "anything", "anywhere", "are", "around", "as", "at", "away", "be",
      "because", "become", "becomes", "been", "before", "behind", "being", "below",
      "besides", "between", "beyond", "both", "but", "by", "came", "can", "cannot", "come",
      "could", "did", "do", "does", "doing", "down", "during", "each", "either", "else",
      "elsewhere", "enough", "ever", "every", "everyone", "everything", "few", "for", "from",
      "further", "get", "gets", "give", "goes", "going", "gone", "got", "had", "has", "have",
      "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
      "however", "i", "if", "in", "indeed", "instead", "into", "is", "it", "its", "itself",
      "just", "least", "less", "let", "like", "made", "make", "many", "may", "me", "more",
      "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
      "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
      "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
      "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
      "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
      "yourself", "yourselves"};
  return words;
}

std::uint64_t stop_words_checksum() {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& w : stop_words()) {
    h = fnv1a64(w, h);
    h = fnv1a64(std::string_view("\n"), h);
  }
  return h;
}

const std::set<std::string>& default_gazetteer() {
  static const std::set<std::string> names = {
      // countries and common country shorthands
      "afghanistan", "albania", "algeria", "america", "argentina", "armenia", "australia",
      "austria", "azerbaijan", "bangladesh", "belarus", "belgium", "bolivia", "brazil",
      "bulgaria", "cambodia", "cameroon", "canada", "chile", "china", "colombia", "croatia",
      "cuba", "cyprus", "czechia", "denmark", "ecuador", "egypt", "england", "estonia",
      "ethiopia", "finland", "france", "georgia", "germany", "ghana", "greece", "guatemala",
      "honduras", "hungary", "iceland", "india", "indonesia", "iran", "iraq", "ireland",
      "israel", "italy", "jamaica", "japan", "jordan", "kazakhstan", "kenya", "korea",
      "kuwait", "latvia", "lebanon", "lithuania", "luxembourg", "malaysia", "mexico",
      "morocco", "myanmar", "nepal", "netherlands", "nigeria", "norway", "pakistan", "panama",
      "paraguay", "peru", "philippines", "poland", "portugal", "qatar", "romania", "russia",
      "rwanda", "scotland", "senegal", "serbia", "singapore", "slovakia", "slovenia",
      "somalia", "spain", "sweden", "switzerland", "syria", "taiwan", "tanzania", "thailand",
      "tunisia", "turkey", "uganda", "uk", "ukraine", "uruguay", "usa", "uzbekistan",
      "venezuela", "vietnam", "wales", "yemen", "zambia", "zimbabwe",
      // major cities
      "amsterdam", "athens", "atlanta", "auckland", "austin", "baltimore", "bangalore",
      "bangkok", "barcelona", "beijing", "berlin", "bogota", "boston", "brussels", "bucharest",
      "budapest", "cairo", "calgary", "chennai", "chicago", "cleveland", "copenhagen",
      "dallas", "delhi", "denver", "detroit", "dubai", "dublin", "edinburgh", "frankfurt",
      "geneva", "hamburg", "hanoi", "helsinki", "houston", "istanbul", "jakarta",
      "johannesburg", "karachi", "kiev", "kyoto", "lagos", "lima", "lisbon", "london",
      "madrid", "manila", "melbourne", "miami", "milan", "minneapolis", "montreal", "moscow",
      "mumbai", "munich", "nairobi", "nashville", "oakland", "orlando", "oslo", "ottawa",
      "paris", "philadelphia", "phoenix", "pittsburgh", "portland", "prague", "pune",
      "rome", "sacramento", "santiago", "seattle", "seoul", "shanghai", "shenzhen",
      "stockholm", "sydney", "taipei", "tokyo", "toronto", "vancouver", "vienna", "warsaw",
      "wellington", "zurich"};
  return names;
}

std::string stem(const std::string& token) {
  const std::size_t n = token.size();
  auto ends_with = [&](const char* suffix, std::size_t len) {
    return n >= len && token.compare(n - len, len, suffix) == 0;
  };
  if (ends_with("ing", 3) && n >= 6) return token.substr(0, n - 3);
  if (ends_with("ed", 2) && n >= 5) return token.substr(0, n - 2);
  if (ends_with("es", 2) && n >= 5) return token.substr(0, n - 2);
  if (ends_with("s", 1) && n >= 4 && !ends_with("ss", 2)) return token.substr(0, n - 1);
  if (ends_with("ly", 2) && n >= 5) return token.substr(0, n - 2);
  return token;
}

TextRepresentation manual_features(const std::string& text, const std::set<std::string>& gazetteer) {
  TextRepresentation rep;
  rep.kind = TextKind::manual10;
  rep.values.assign(10, 0.0);
  if (text.empty()) return rep;

  const auto tokens = tokenize(text);
  const double char_count = static_cast<double>(text.size());
  const double word_count = static_cast<double>(tokens.size());

  double token_chars = 0.0;
  std::unordered_set<std::string> types;
  double gazetteer_hits = 0.0;
  for (const auto& t : tokens) {
    token_chars += static_cast<double>(t.size());
    types.insert(t);
    if (gazetteer.count(t)) gazetteer_hits += 1.0;
  }

  double sentence_count = 0.0;
  bool segment_has_content = false;
  double digits = 0.0, uppers = 0.0, commas = 0.0;
  for (unsigned char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      if (segment_has_content) sentence_count += 1.0;
      segment_has_content = false;
      continue;
    }
    if (c < 0x80 && !std::isspace(c)) segment_has_content = true;
    if (std::isdigit(c)) digits += 1.0;
    if (c < 0x80 && std::isupper(c)) uppers += 1.0;
    if (c == ',') commas += 1.0;
  }
  if (segment_has_content) sentence_count += 1.0;

  rep.values[0] = char_count;
  rep.values[1] = word_count;
  rep.values[2] = word_count > 0 ? token_chars / word_count : 0.0;
  rep.values[3] = sentence_count;
  rep.values[4] = sentence_count > 0 ? word_count / sentence_count : 0.0;
  rep.values[5] = word_count > 0 ? static_cast<double>(types.size()) / word_count : 0.0;
  rep.values[6] = digits / char_count;
  rep.values[7] = uppers / char_count;
  rep.values[8] = gazetteer_hits;
  rep.values[9] = commas;
  return rep;
}

namespace {

std::vector<std::string> normalize_tokens(const std::vector<std::string>& tokens) {
  static const std::unordered_set<std::string> stops(stop_words().begin(), stop_words().end());
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (stops.count(t)) continue;
    out.push_back(stem(t));
  }
  return out;
}

}  // namespace

BowVocabulary fit_bow(const std::vector<std::vector<std::string>>& corpus_tokens,
                      double min_doc_fraction) {
  if (corpus_tokens.empty()) throw Error("fit_bow: empty corpus");
  const double n_docs = static_cast<double>(corpus_tokens.size());
  std::map<std::string, std::size_t> doc_freq;
  for (const auto& doc : corpus_tokens) {
    const auto terms = normalize_tokens(doc);
    std::unordered_set<std::string> seen(terms.begin(), terms.end());
    for (const auto& t : seen) doc_freq[t] += 1;
  }
  BowVocabulary vocab;
  vocab.min_doc_fraction = min_doc_fraction;
  for (const auto& [term, df] : doc_freq) {
    if (static_cast<double>(df) + 1e-9 < min_doc_fraction * n_docs) continue;
    vocab.terms.push_back(term);
    vocab.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df))) + 1.0);
  }
  if (vocab.terms.empty()) throw Error("fit_bow: degenerate corpus (vocabulary empty after pruning)");
  return vocab;
}

TextRepresentation bow_encode(const std::vector<std::string>& tokens, const BowVocabulary& vocab,
                              bool l2_normalize) {
  TextRepresentation rep;
  rep.kind = TextKind::bow;
  rep.values.assign(vocab.size(), 0.0);
  const auto terms = normalize_tokens(tokens);
  for (const auto& t : terms) {
    const auto it = std::lower_bound(vocab.terms.begin(), vocab.terms.end(), t);
    if (it == vocab.terms.end() || *it != t) continue;
    const auto idx = static_cast<std::size_t>(it - vocab.terms.begin());
    rep.values[idx] += vocab.idf[idx];
  }
  if (l2_normalize) {
    double norm_sq = 0.0;
    for (double v : rep.values) norm_sq += v * v;
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& v : rep.values) v *= inv;
    }
  }
  return rep;
}

const std::vector<double>* WordVectorTable::find(const std::string& word) const {
  const auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return nullptr;
  return &vectors[static_cast<std::size_t>(it - words.begin())];
}

void WordVectorTable::insert(const std::string& word, std::vector<double> v) {
  if (!vectors.empty() && v.size() != dim) throw Error("WordVectorTable: inconsistent vector dimension");
  dim = v.size();
  const auto it = std::lower_bound(words.begin(), words.end(), word);
  const auto idx = static_cast<std::size_t>(it - words.begin());
  if (it != words.end() && *it == word) {
    vectors[idx] = std::move(v);
    return;
  }
  words.insert(it, word);
  vectors.insert(vectors.begin() + static_cast<std::ptrdiff_t>(idx), std::move(v));
}

WordVectorTable WordVectorTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word-vector table '" + path + "'");
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (v.empty()) throw Error("word-vector table line " + std::to_string(line_no) + ": no values");
    if (!table.vectors.empty() && v.size() != table.dim)
      throw Error("word-vector table line " + std::to_string(line_no) + ": dimension mismatch");
    table.insert(word, std::move(v));
  }
  if (table.vectors.empty()) throw Error("word-vector table '" + path + "' is empty");
  return table;
}

WordAverageResult word_average(const std::vector<std::string>& tokens, const WordVectorTable& table) {
  WordAverageResult out;
  out.rep.kind = TextKind::word_avg;
  out.rep.values.assign(table.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (const auto* v = table.find(t)) {
      for (std::size_t i = 0; i < table.dim; ++i) out.rep.values[i] += (*v)[i];
      ++hits;
    }
  }
  if (hits == 0) {
    out.empty_coverage = true;
    return out;
  }
  const double inv = 1.0 / static_cast<double>(hits);
  for (double& v : out.rep.values) v *= inv;
  return out;
}

}  // namespace vcml

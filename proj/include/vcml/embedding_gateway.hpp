#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "vcml/profile.hpp"
#include "vcml/text.hpp"

namespace vcml {

// Document embeddings are produced outside this repo. The gateway either
// reads a JSONL cache ({"id": ..., "dim": 768, "values": [...]}) or calls
// an embedding service (POST {base_url}/embed, {"texts": [...]}) and writes
// responses through to the cache.
struct EmbeddingGatewayConfig {
  enum class Mode { file_cache, service };

  Mode mode = Mode::file_cache;
  std::string cache_path;
  std::string base_url;
  std::size_t expected_dim = 768;
  std::string expected_model = "bert-base-uncased";
  double timeout_seconds = 30.0;
  int max_retries = 3;
  double backoff_seconds = 0.25;  // doubled per retry
  std::size_t request_batch_size = 64;
  unsigned max_in_flight = 1;
};

struct EmbeddingBatch {
  std::vector<TextRepresentation> embeddings;  // kind doc_embedding, input order
  std::vector<Diagnostic> diagnostics;
};

// One embedding per id, order preserved. Cache misses are errors in
// file_cache mode; in service mode missing ids are fetched and appended to
// the cache. Dimension mismatches against expected_dim are errors.
EmbeddingBatch get_document_embeddings(const std::vector<std::string>& ids,
                                       const std::vector<std::string>& texts,
                                       const EmbeddingGatewayConfig& config);

using EmbeddingStore = std::map<std::string, std::vector<double>>;

EmbeddingStore load_embedding_cache(const std::string& path, std::size_t expected_dim = 768);
void append_embedding_cache(const std::string& path, const std::vector<std::string>& ids,
                            const std::vector<std::vector<double>>& vectors);

}  // namespace vcml

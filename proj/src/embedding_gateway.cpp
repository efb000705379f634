#include "vcml/embedding_gateway.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vcml/common.hpp"

namespace vcml {

using nlohmann::json;

EmbeddingStore load_embedding_cache(const std::string& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding cache '" + path + "'");
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("embedding cache line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("id") || !j.contains("values"))
      throw Error("embedding cache line " + std::to_string(line_no) + ": missing id/values");
    std::vector<double> values = j["values"].get<std::vector<double>>();
    if (values.size() != expected_dim)
      throw Error("embedding cache line " + std::to_string(line_no) + ": dimension " +
                  std::to_string(values.size()) + ", expected " + std::to_string(expected_dim));
    store[j["id"].get<std::string>()] = std::move(values);
  }
  return store;
}

void append_embedding_cache(const std::string& path, const std::vector<std::string>& ids,
                            const std::vector<std::vector<double>>& vectors) {
  if (ids.size() != vectors.size()) throw Error("append_embedding_cache: ids/vectors size mismatch");
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open embedding cache '" + path + "' for append");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    json j;
    j["id"] = ids[i];
    j["dim"] = vectors[i].size();
    j["values"] = vectors[i];
    out << j.dump() << "\n";
  }
}

namespace {

struct ServiceResponse {
  std::vector<std::vector<double>> embeddings;
  std::vector<std::size_t> truncated;  // indices within the request batch
  std::string model;
};

ServiceResponse post_embed_batch(const EmbeddingGatewayConfig& config,
                                 const std::vector<std::string>& texts) {
  httplib::Client client(config.base_url);
  const auto timeout = std::chrono::duration<double>(config.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));

  json body;
  body["texts"] = texts;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      const double sleep_s = config.backoff_seconds * static_cast<double>(1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
    }
    auto res = client.Post("/embed", payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    json j;
    try {
      j = json::parse(res->body);
    } catch (const json::parse_error& e) {
      last_error = std::string("invalid JSON response: ") + e.what();
      continue;
    }
    if (!j.contains("embeddings") || !j.contains("dim"))
      throw Error("embedding service response missing 'embeddings'/'dim'");
    const auto dim = j["dim"].get<std::size_t>();
    if (dim != config.expected_dim)
      throw Error("embedding service returned dim " + std::to_string(dim) + ", expected " +
                  std::to_string(config.expected_dim));
    ServiceResponse out;
    out.embeddings = j["embeddings"].get<std::vector<std::vector<double>>>();
    if (out.embeddings.size() != texts.size())
      throw Error("embedding service returned " + std::to_string(out.embeddings.size()) +
                  " vectors for " + std::to_string(texts.size()) + " texts");
    for (const auto& v : out.embeddings) {
      if (v.size() != config.expected_dim)
        throw Error("embedding service returned vector of dim " + std::to_string(v.size()) +
                    ", expected " + std::to_string(config.expected_dim));
    }
    if (j.contains("truncated")) out.truncated = j["truncated"].get<std::vector<std::size_t>>();
    if (j.contains("model")) out.model = j["model"].get<std::string>();
    return out;
  }
  throw Error("embedding service unreachable after " + std::to_string(config.max_retries + 1) +
              " attempts (" + last_error + ")");
}

}  // namespace

EmbeddingBatch get_document_embeddings(const std::vector<std::string>& ids,
                                       const std::vector<std::string>& texts,
                                       const EmbeddingGatewayConfig& config) {
  if (ids.size() != texts.size()) throw Error("get_document_embeddings: ids/texts size mismatch");
  EmbeddingBatch out;
  out.embeddings.resize(ids.size());
  if (ids.empty()) return out;

  EmbeddingStore cache;
  if (!config.cache_path.empty()) {
    std::ifstream probe(config.cache_path);
    if (probe) cache = load_embedding_cache(config.cache_path, config.expected_dim);
  }

  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = cache.find(ids[i]);
    if (it != cache.end()) {
      out.embeddings[i] = TextRepresentation{TextKind::doc_embedding, it->second};
    } else {
      missing.push_back(i);
    }
  }
  if (missing.empty()) return out;

  if (config.mode == EmbeddingGatewayConfig::Mode::file_cache) {
    throw Error("embedding cache miss for id '" + ids[missing.front()] + "' (" +
                std::to_string(missing.size()) + " ids missing from '" + config.cache_path + "')");
  }

  const std::size_t batch = std::max<std::size_t>(1, config.request_batch_size);
  const std::size_t n_batches = (missing.size() + batch - 1) / batch;
  std::vector<std::vector<std::vector<double>>> batch_vectors(n_batches);
  std::vector<std::vector<Diagnostic>> batch_diags(n_batches);

  parallel_for(n_batches, std::max(1u, config.max_in_flight), [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t end = std::min(missing.size(), begin + batch);
    std::vector<std::string> request_texts;
    request_texts.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) request_texts.push_back(texts[missing[k]]);
    auto response = post_embed_batch(config, request_texts);
    for (std::size_t t : response.truncated) {
      if (t < end - begin)
        batch_diags[b].push_back({0, "text for id '" + ids[missing[begin + t]] + "' truncated by service"});
    }
    if (!response.model.empty() && response.model != config.expected_model) {
      batch_diags[b].push_back({0, "service model '" + response.model + "' differs from expected '" +
                                       config.expected_model + "'"});
    }
    batch_vectors[b] = std::move(response.embeddings);
  });

  std::vector<std::string> fetched_ids;
  std::vector<std::vector<double>> fetched_vectors;
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t begin = b * batch;
    for (std::size_t k = 0; k < batch_vectors[b].size(); ++k) {
      const std::size_t i = missing[begin + k];
      out.embeddings[i] = TextRepresentation{TextKind::doc_embedding, batch_vectors[b][k]};
      fetched_ids.push_back(ids[i]);
      fetched_vectors.push_back(std::move(batch_vectors[b][k]));
    }
    for (auto& d : batch_diags[b]) out.diagnostics.push_back(std::move(d));
  }
  if (!config.cache_path.empty()) append_embedding_cache(config.cache_path, fetched_ids, fetched_vectors);
  return out;
}

}  // namespace vcml

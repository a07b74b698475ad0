#pragma once

#include "edckit/dataset.hpp"
#include "edckit/kernels.hpp"

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace edckit {

enum class Transport { child_process, http };

// Configuration for an external embedding service. endpoint is a command
// template (child_process) or a URL (http).
struct ProviderConfig {
    std::string provider_id;
    Transport transport = Transport::child_process;
    std::string endpoint;
    std::chrono::milliseconds timeout{60000};
    std::optional<std::size_t> expected_dim;
};

void validate_provider_config(const ProviderConfig& config);

// Uniform access to embedding backends. Implementations guarantee one
// vector per input text, in input order, all sharing one dimension, and a
// deterministic text -> vector mapping for a fixed provider.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual const std::string& id() const = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                               InputKind kind) = 0;
};

// Deterministic built-in embedder backed by kernels::hash_embed. Lets the
// whole statistics pipeline run without any external model.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim);
    const std::string& id() const override { return id_; }
    std::size_t dim() const { return dim_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       InputKind kind) override;

private:
    std::size_t dim_;
    std::string id_;
};

// On-disk vector cache: one file per (provider, kind, text) digest, little
// endian 32-bit dim header followed by the float64 components. Readers may
// run concurrently; writes go through a temp file and an atomic rename.
class VectorCache {
public:
    explicit VectorCache(std::string dir);
    std::optional<EmbeddingVector> get(const std::string& digest) const;
    void put(const std::string& digest, const EmbeddingVector& vec) const;

private:
    std::string dir_;
};

std::string embedding_digest(const std::string& provider_id, InputKind kind,
                             const std::string& text);

// Remote provider speaking the newline-delimited JSON protocol over either
// transport. Access to the provider is serialized; results are memoized in
// memory and, when cache_dir is nonempty, in a VectorCache.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(ProviderConfig config, const std::string& cache_dir = "");
    const std::string& id() const override { return config_.provider_id; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       InputKind kind) override;

private:
    std::vector<EmbeddingVector> exchange(const std::vector<std::string>& texts);

    ProviderConfig config_;
    std::unique_ptr<VectorCache> disk_cache_;
    std::unordered_map<std::string, EmbeddingVector> memory_cache_;
    std::optional<std::size_t> seen_dim_;
    std::mutex mutex_;
};

std::unique_ptr<Embedder> make_embedder(const ProviderConfig& config,
                                        const std::string& cache_dir = "");

// Spec strings accepted by the CLI: "hash:<dim>", "cmd:<command template>",
// or an http(s) URL. timeout/expected_dim apply to the remote transports.
std::unique_ptr<Embedder> make_embedder_from_spec(const std::string& spec,
                                                  std::chrono::milliseconds timeout,
                                                  std::optional<std::size_t> expected_dim,
                                                  const std::string& cache_dir = "");

// The embed_batch operation: one vector per text, order preserved, repeated
// texts embedded once.
std::vector<EmbeddingVector> embed_batch(const ProviderConfig& provider,
                                         const std::vector<std::string>& texts,
                                         InputKind kind = InputKind::text,
                                         const std::string& cache_dir = "");

} // namespace edckit

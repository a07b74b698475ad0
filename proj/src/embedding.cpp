#include "edckit/embedding.hpp"

#include "edckit/error.hpp"
#include "edckit/subprocess.hpp"
#include "edckit/util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace edckit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "vector cache files are little-endian; big-endian hosts need byte swaps");

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    return to_hex(std::vector<std::uint8_t>(digest, digest + len));
}

// Requests and responses are one JSON object per LF-terminated line.
// Responses may arrive in any order; every id must be answered exactly once.
std::string build_request_lines(const std::vector<std::string>& texts) {
    std::string body;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        nlohmann::ordered_json j;
        j["id"] = std::to_string(i);
        j["text"] = texts[i];
        body += j.dump();
        body += '\n';
    }
    return body;
}

std::vector<EmbeddingVector> parse_response_lines(const std::string& body, std::size_t expected,
                                                  const std::string& provider_id) {
    std::vector<EmbeddingVector> out(expected);
    std::vector<bool> seen(expected, false);
    std::size_t answered = 0;
    for (const std::string& line : split_lines(body)) {
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("provider \"" + provider_id + "\" protocol violation: bad JSON line: " +
                        e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("vector"))
            throw Error("provider \"" + provider_id +
                        "\" protocol violation: response line missing id/vector");
        std::size_t idx = 0;
        try {
            idx = std::stoull(j.at("id").get<std::string>());
        } catch (...) {
            throw Error("provider \"" + provider_id + "\" protocol violation: unknown id");
        }
        if (idx >= expected)
            throw Error("provider \"" + provider_id + "\" protocol violation: unknown id " +
                        std::to_string(idx));
        if (seen[idx])
            throw Error("provider \"" + provider_id + "\" protocol violation: id " +
                        std::to_string(idx) + " answered twice");
        const auto& vec = j.at("vector");
        if (!vec.is_array() || vec.empty())
            throw Error("provider \"" + provider_id + "\" protocol violation: vector must be a "
                        "nonempty array");
        EmbeddingVector v;
        v.reserve(vec.size());
        for (const auto& x : vec) {
            if (!x.is_number())
                throw Error("provider \"" + provider_id +
                            "\" protocol violation: non-numeric vector component");
            v.push_back(x.get<double>());
        }
        for (double x : v)
            if (!std::isfinite(x))
                throw Error("provider \"" + provider_id + "\" returned a non-finite component");
        out[idx] = std::move(v);
        seen[idx] = true;
        ++answered;
    }
    if (answered != expected)
        throw Error("provider \"" + provider_id + "\" protocol violation: " +
                    std::to_string(expected - answered) + " request(s) unanswered at end of stream");
    return out;
}

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("bad provider URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

void validate_provider_config(const ProviderConfig& config) {
    if (config.provider_id.empty()) throw Error("provider_id must be nonempty");
    if (config.timeout.count() <= 0) throw Error("provider timeout must be positive");
    if (config.endpoint.empty()) throw Error("provider endpoint must be nonempty");
    if (config.expected_dim && *config.expected_dim == 0)
        throw Error("expected_dim must be positive");
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim), id_("hash:" + std::to_string(dim)) {
    if (dim < 2) throw Error("hash embedder needs dim >= 2");
}

std::vector<EmbeddingVector> HashEmbedder::embed(const std::vector<std::string>& texts,
                                                 InputKind) {
    if (texts.empty()) throw Error("embed: texts must be nonempty");
    EmbeddingMatrix m = kernels::hash_embed_many(texts, dim_);
    std::vector<EmbeddingVector> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto r = m.row(i);
        out[i].assign(r.begin(), r.end());
    }
    return out;
}

VectorCache::VectorCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<EmbeddingVector> VectorCache::get(const std::string& digest) const {
    std::filesystem::path p = std::filesystem::path(dir_) / (digest + ".vec");
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    if (!in || dim == 0 || dim > (1u << 24)) return std::nullopt; // reject corrupt headers
    EmbeddingVector v(dim);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in) return std::nullopt;
    return v;
}

void VectorCache::put(const std::string& digest, const EmbeddingVector& vec) const {
    std::string blob;
    auto dim = static_cast<std::uint32_t>(vec.size());
    blob.append(reinterpret_cast<const char*>(&dim), sizeof dim);
    blob.append(reinterpret_cast<const char*>(vec.data()), vec.size() * sizeof(double));
    std::filesystem::path p = std::filesystem::path(dir_) / (digest + ".vec");
    write_file_atomic(p.string(), blob);
}

std::string embedding_digest(const std::string& provider_id, InputKind kind,
                             const std::string& text) {
    std::string key;
    key.reserve(provider_id.size() + text.size() + 16);
    key += provider_id;
    key += '\x1f';
    key += to_string(kind);
    key += '\x1f';
    key += text;
    return sha256_hex(key);
}

RemoteEmbedder::RemoteEmbedder(ProviderConfig config, const std::string& cache_dir)
    : config_(std::move(config)) {
    validate_provider_config(config_);
    if (!cache_dir.empty()) disk_cache_ = std::make_unique<VectorCache>(cache_dir);
}

std::vector<EmbeddingVector> RemoteEmbedder::exchange(const std::vector<std::string>& texts) {
    std::string request = build_request_lines(texts);
    std::string response;
    if (config_.transport == Transport::child_process) {
        std::vector<std::string> argv = split_command(config_.endpoint);
        if (argv.empty()) throw Error("provider \"" + config_.provider_id + "\": empty command");
        RunResult r = run_process(argv, request, config_.timeout);
        if (r.timed_out)
            throw Error("provider \"" + config_.provider_id + "\" timed out after " +
                        std::to_string(config_.timeout.count()) + " ms");
        if (!r.ok())
            throw Error("provider \"" + config_.provider_id + "\" exited with status " +
                        std::to_string(r.exit_code) +
                        (r.err.empty() ? "" : ": " + trim(r.err).substr(0, 500)));
        response = std::move(r.out);
    } else {
        ParsedUrl url = parse_url(config_.endpoint);
        httplib::Client client(url.base);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        time_t s = secs.count() > 0 ? secs.count() : 1;
        client.set_connection_timeout(s, 0);
        client.set_read_timeout(s, 0);
        client.set_write_timeout(s, 0);
        auto res = client.Post(url.path, request, "application/x-ndjson");
        if (!res) {
            auto err = res.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write)
                throw Error("provider \"" + config_.provider_id + "\" timed out after " +
                            std::to_string(config_.timeout.count()) + " ms");
            throw Error("provider \"" + config_.provider_id +
                        "\" HTTP request failed: " + httplib::to_string(err));
        }
        if (res->status != 200)
            throw Error("provider \"" + config_.provider_id + "\" returned HTTP status " +
                        std::to_string(res->status));
        response = res->body;
    }
    return parse_response_lines(response, texts.size(), config_.provider_id);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts,
                                                   InputKind kind) {
    if (texts.empty()) throw Error("embed: texts must be nonempty");
    std::lock_guard<std::mutex> lock(mutex_);

    std::vector<std::string> digests(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
        digests[i] = embedding_digest(config_.provider_id, kind, texts[i]);

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::size_t> missing;
    std::unordered_map<std::string, std::size_t> pending; // digest -> index in miss batch
    std::vector<std::string> miss_texts;

    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto mem = memory_cache_.find(digests[i]);
        if (mem != memory_cache_.end()) {
            out[i] = mem->second;
            continue;
        }
        if (disk_cache_) {
            if (auto v = disk_cache_->get(digests[i])) {
                memory_cache_[digests[i]] = *v;
                out[i] = std::move(*v);
                continue;
            }
        }
        missing.push_back(i);
        if (pending.emplace(digests[i], miss_texts.size()).second)
            miss_texts.push_back(texts[i]);
    }

    if (!miss_texts.empty()) {
        std::vector<EmbeddingVector> fresh = exchange(miss_texts);
        for (std::size_t i = 0; i < fresh.size(); ++i) validate_embedding(fresh[i]);
        for (std::size_t i : missing) {
            const EmbeddingVector& v = fresh[pending.at(digests[i])];
            out[i] = v;
        }
        for (const auto& [digest, slot] : pending) {
            memory_cache_[digest] = fresh[slot];
            if (disk_cache_) disk_cache_->put(digest, fresh[slot]);
        }
    }

    for (const EmbeddingVector& v : out) {
        std::size_t want = seen_dim_ ? *seen_dim_
                                     : config_.expected_dim ? *config_.expected_dim : v.size();
        if (v.size() != want)
            throw Error("provider \"" + config_.provider_id + "\" dimension mismatch: got " +
                        std::to_string(v.size()) + ", expected " + std::to_string(want));
        seen_dim_ = want;
    }
    return out;
}

std::unique_ptr<Embedder> make_embedder(const ProviderConfig& config,
                                        const std::string& cache_dir) {
    return std::make_unique<RemoteEmbedder>(config, cache_dir);
}

std::unique_ptr<Embedder> make_embedder_from_spec(const std::string& spec,
                                                  std::chrono::milliseconds timeout,
                                                  std::optional<std::size_t> expected_dim,
                                                  const std::string& cache_dir) {
    if (spec.rfind("hash:", 0) == 0) {
        std::size_t dim = 0;
        try {
            dim = std::stoull(spec.substr(5));
        } catch (...) {
            throw Error("bad hash embedder spec: \"" + spec + "\" (want hash:<dim>)");
        }
        return std::make_unique<HashEmbedder>(dim);
    }
    ProviderConfig config;
    config.timeout = timeout;
    config.expected_dim = expected_dim;
    if (spec.rfind("cmd:", 0) == 0) {
        config.transport = Transport::child_process;
        config.endpoint = spec.substr(4);
        config.provider_id = "cmd:" + config.endpoint;
    } else if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        config.transport = Transport::http;
        config.endpoint = spec;
        config.provider_id = spec;
    } else {
        throw Error("unrecognized provider spec: \"" + spec +
                    "\" (want hash:<dim>, cmd:<command>, or an http(s) URL)");
    }
    return make_embedder(config, cache_dir);
}

std::vector<EmbeddingVector> embed_batch(const ProviderConfig& provider,
                                         const std::vector<std::string>& texts, InputKind kind,
                                         const std::string& cache_dir) {
    RemoteEmbedder embedder(provider, cache_dir);
    return embedder.embed(texts, kind);
}

} // namespace edckit

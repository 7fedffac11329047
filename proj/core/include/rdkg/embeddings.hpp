#pragma once

#include "rdkg/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace rdkg::embed {

/// Row-major batch of embedding vectors. Construction rejects zero-norm rows
/// and non-finite entries, so every row is usable in a cosine.
class EmbeddingMatrix {
public:
    using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    EmbeddingMatrix() = default;
    explicit EmbeddingMatrix(Storage data);

    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index dim() const { return data_.cols(); }
    const Storage& data() const { return data_; }
    std::span<const double> row(Eigen::Index i) const;

    EmbeddingMatrix select_rows(std::span<const std::size_t> indices) const;
    /// Stack rows of a and b; dims must agree.
    static EmbeddingMatrix concat(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

private:
    Storage data_;
};

/// clip(1 - cos(u, v), 0, 2). Bitwise-identical inputs give exactly 0.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// N x M cross cost c(i, j) = cosine_distance(a_i, b_j), entries in [0, 2].
/// Not normalized: it is an absolute cost.
Matrix feature_cost(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

/// Square self cost with an exact-zero diagonal, entries in [0, 2].
Matrix pairwise_cosine_distance(const EmbeddingMatrix& e);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// One row per text, in input order. Same texts and parameters give the
    /// same rows. Throws InputError on empty batches or empty texts.
    virtual EmbeddingMatrix embed(std::span<const std::string> texts) const = 0;
    virtual std::string describe() const = 0;
};

/// Offline provider: lowercase word tokens (stopwords removed) hashed into a
/// signed bag of words, plus a small whole-text signature component so that
/// distinct texts never collapse onto the same row.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDim = 256;
    static constexpr std::uint64_t kDefaultSeed = 0x5eedULL;

    explicit HashEmbeddingProvider(std::size_t dim = kDefaultDim, std::uint64_t seed = kDefaultSeed);

    EmbeddingMatrix embed(std::span<const std::string> texts) const override;
    std::string describe() const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Vectors read from a JSON file { dim, keys: [sha256-hex], vectors: [[...]] }.
/// Texts are looked up by the SHA-256 of their exact bytes.
class PrecomputedEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit PrecomputedEmbeddingProvider(const nlohmann::json& doc);
    static PrecomputedEmbeddingProvider from_file(const std::filesystem::path& path);

    EmbeddingMatrix embed(std::span<const std::string> texts) const override;
    std::string describe() const override;
    std::size_t size() const { return index_.size(); }

private:
    std::size_t dim_ = 0;
    std::map<std::string, std::vector<double>> index_;
};

nlohmann::json precomputed_document(std::span<const std::string> texts, const EmbeddingMatrix& vectors);
void write_precomputed_file(const std::filesystem::path& path, std::span<const std::string> texts,
                            const EmbeddingMatrix& vectors);

struct HttpEmbeddingConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080/v1/embed
    std::string model;
    double timeout_seconds = 30.0;
    int retries = 2;
    std::size_t batch_size = 64;
    std::string api_key_env = "RDKG_EMBEDDING_API_KEY";
    int backoff_ms = 200;
};

/// POSTs {model, inputs: [text]} and expects {embeddings: [[...]]}. Responses
/// are cached by content hash for the lifetime of the provider.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);

    EmbeddingMatrix embed(std::span<const std::string> texts) const override;
    std::string describe() const override;

private:
    std::vector<std::vector<double>> fetch(std::span<const std::string> batch) const;

    HttpEmbeddingConfig config_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::vector<double>> cache_;
};

/// Memoizes another provider per text. Used by the refinement loop, which
/// re-embeds the same node texts after every edit.
class CachingProvider final : public EmbeddingProvider {
public:
    explicit CachingProvider(const EmbeddingProvider& inner) : inner_(inner) {}

    EmbeddingMatrix embed(std::span<const std::string> texts) const override;
    std::string describe() const override { return inner_.describe(); }

private:
    const EmbeddingProvider& inner_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::vector<double>> memo_;
};

enum class ProviderKind { Hash, PrecomputedFile, Http };

struct ProviderSpec {
    ProviderKind kind = ProviderKind::Hash;
    std::size_t dim = HashEmbeddingProvider::kDefaultDim;
    std::uint64_t seed = HashEmbeddingProvider::kDefaultSeed;
    std::filesystem::path file;
    HttpEmbeddingConfig http;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec);

}  // namespace rdkg::embed

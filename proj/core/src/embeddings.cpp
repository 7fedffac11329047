#include "rdkg/embeddings.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rdkg::embed {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require_texts(std::span<const std::string> texts) {
    if (texts.empty()) throw InputError("embed: empty text batch");
    for (const auto& t : texts) {
        if (t.empty()) throw InputError("embed: empty text in batch");
    }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Storage data) : data_(std::move(data)) {
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
        if (!data_.row(i).allFinite()) throw InputError("embedding row " + std::to_string(i) + " is not finite");
        if (data_.row(i).squaredNorm() == 0.0) throw InputError("degenerate embedding: zero-norm row " + std::to_string(i));
    }
}

std::span<const double> EmbeddingMatrix::row(Eigen::Index i) const {
    return {data_.data() + i * data_.cols(), static_cast<std::size_t>(data_.cols())};
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> indices) const {
    Storage out(static_cast<Eigen::Index>(indices.size()), data_.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = data_.row(static_cast<Eigen::Index>(indices[k]));
    }
    return EmbeddingMatrix(std::move(out));
}

EmbeddingMatrix EmbeddingMatrix::concat(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.dim() != b.dim()) throw InputError("embedding dimension mismatch");
    Storage out(a.rows() + b.rows(), a.dim());
    out.topRows(a.rows()) = a.data_;
    out.bottomRows(b.rows()) = b.data_;
    return EmbeddingMatrix(std::move(out));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InputError("cosine: dimension mismatch");
    double uv = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        uv += u[k] * v[k];
        uu += u[k] * u[k];
        vv += v[k] * v[k];
    }
    if (uu == 0.0 || vv == 0.0) throw InputError("degenerate embedding");
    if (std::equal(u.begin(), u.end(), v.begin())) return 1.0;
    return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    return std::clamp(1.0 - cosine_similarity(u, v), 0.0, 2.0);
}

Matrix feature_cost(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    if (a.dim() != b.dim()) throw InputError("feature_cost: dimension mismatch");
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = cosine_distance(a.row(i), b.row(j));
    }
    return out;
}

Matrix pairwise_cosine_distance(const EmbeddingMatrix& e) {
    const Eigen::Index n = e.rows();
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = cosine_distance(e.row(i), e.row(j));
            out(i, j) = d;
            out(j, i) = d;
        }
    }
    return out;
}

// --- hash provider ---------------------------------------------------------

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw InputError("hash embedding dimension must be positive");
}

EmbeddingMatrix HashEmbeddingProvider::embed(std::span<const std::string> texts) const {
    require_texts(texts);
    EmbeddingMatrix::Storage out = EmbeddingMatrix::Storage::Zero(static_cast<Eigen::Index>(texts.size()),
                                                                  static_cast<Eigen::Index>(dim_));
    for (std::size_t r = 0; r < texts.size(); ++r) {
        auto row = out.row(static_cast<Eigen::Index>(r));
        for (const auto& tok : text::tokenize(texts[r])) {
            if (text::is_stopword(tok)) continue;
            const std::uint64_t h = splitmix64(fnv1a(tok, seed_));
            const auto bucket = static_cast<Eigen::Index>(h % dim_);
            row(bucket) += (h >> 63) != 0 ? -1.0 : 1.0;
        }
        const std::uint64_t sig = splitmix64(fnv1a(texts[r], ~seed_));
        const auto bucket = static_cast<Eigen::Index>(sig % dim_);
        const double frac = static_cast<double>(sig >> 11) * 0x1.0p-53;
        if (row.squaredNorm() == 0.0) {
            row(bucket) = 1.0;
        } else {
            row(bucket) += 1e-3 * (1.0 + frac);
        }
    }
    return EmbeddingMatrix(std::move(out));
}

std::string HashEmbeddingProvider::describe() const {
    return "hash(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

// --- precomputed file ------------------------------------------------------

PrecomputedEmbeddingProvider::PrecomputedEmbeddingProvider(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("dim") || !doc.contains("keys") || !doc.contains("vectors")) {
        throw InputError("embeddings file must contain dim, keys and vectors");
    }
    dim_ = doc.at("dim").get<std::size_t>();
    const auto& keys = doc.at("keys");
    const auto& vectors = doc.at("vectors");
    if (!keys.is_array() || !vectors.is_array() || keys.size() != vectors.size()) {
        throw InputError("dimension/count mismatch: keys and vectors differ in length");
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto vec = vectors[i].get<std::vector<double>>();
        if (vec.size() != dim_) {
            throw InputError("dimension/count mismatch: vector " + std::to_string(i) + " has length " +
                             std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
        }
        index_.emplace(keys[i].get<std::string>(), std::move(vec));
    }
}

PrecomputedEmbeddingProvider PrecomputedEmbeddingProvider::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("file not found: " + path.string());
    try {
        return PrecomputedEmbeddingProvider(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed embeddings file " + path.string() + ": " + e.what());
    }
}

EmbeddingMatrix PrecomputedEmbeddingProvider::embed(std::span<const std::string> texts) const {
    require_texts(texts);
    EmbeddingMatrix::Storage out(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(dim_));
    for (std::size_t r = 0; r < texts.size(); ++r) {
        const auto it = index_.find(text::sha256_hex(texts[r]));
        if (it == index_.end()) {
            throw InputError("dimension/count mismatch: no precomputed vector for text " + std::to_string(r) +
                             " (file holds " + std::to_string(index_.size()) + " vectors for " +
                             std::to_string(texts.size()) + " texts)");
        }
        for (std::size_t k = 0; k < dim_; ++k) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = it->second[k];
    }
    return EmbeddingMatrix(std::move(out));
}

std::string PrecomputedEmbeddingProvider::describe() const {
    return "precomputed(dim=" + std::to_string(dim_) + ",count=" + std::to_string(index_.size()) + ")";
}

nlohmann::json precomputed_document(std::span<const std::string> texts, const EmbeddingMatrix& vectors) {
    if (static_cast<Eigen::Index>(texts.size()) != vectors.rows()) {
        throw InputError("dimension/count mismatch: texts and vectors differ in length");
    }
    nlohmann::json doc;
    doc["dim"] = vectors.dim();
    doc["keys"] = nlohmann::json::array();
    doc["vectors"] = nlohmann::json::array();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        doc["keys"].push_back(text::sha256_hex(texts[i]));
        const auto row = vectors.row(static_cast<Eigen::Index>(i));
        doc["vectors"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    return doc;
}

void write_precomputed_file(const std::filesystem::path& path, std::span<const std::string> texts,
                            const EmbeddingMatrix& vectors) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << precomputed_document(texts, vectors).dump() << '\n';
}

// --- caching wrapper -------------------------------------------------------

EmbeddingMatrix CachingProvider::embed(std::span<const std::string> texts) const {
    require_texts(texts);
    std::vector<std::string> missing;
    {
        std::lock_guard lock(mutex_);
        for (const auto& t : texts) {
            if (!memo_.contains(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) {
                missing.push_back(t);
            }
        }
    }
    if (!missing.empty()) {
        const EmbeddingMatrix fresh = inner_.embed(missing);
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < missing.size(); ++i) {
            const auto row = fresh.row(static_cast<Eigen::Index>(i));
            memo_.emplace(missing[i], std::vector<double>(row.begin(), row.end()));
        }
    }
    std::lock_guard lock(mutex_);
    const auto dim = static_cast<Eigen::Index>(memo_.at(texts[0]).size());
    EmbeddingMatrix::Storage out(static_cast<Eigen::Index>(texts.size()), dim);
    for (std::size_t r = 0; r < texts.size(); ++r) {
        const auto& v = memo_.at(texts[r]);
        for (Eigen::Index k = 0; k < dim; ++k) out(static_cast<Eigen::Index>(r), k) = v[static_cast<std::size_t>(k)];
    }
    return EmbeddingMatrix(std::move(out));
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
    switch (spec.kind) {
        case ProviderKind::Hash:
            return std::make_unique<HashEmbeddingProvider>(spec.dim, spec.seed);
        case ProviderKind::PrecomputedFile:
            return std::make_unique<PrecomputedEmbeddingProvider>(PrecomputedEmbeddingProvider::from_file(spec.file));
        case ProviderKind::Http:
            return std::make_unique<HttpEmbeddingProvider>(spec.http);
    }
    throw InputError("unknown embedding provider kind");
}

}  // namespace rdkg::embed

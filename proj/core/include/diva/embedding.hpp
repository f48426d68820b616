#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diva/corpus.hpp"

namespace diva {

using Vector = std::vector<double>;

// Token -> dense vector, all of one dimension. Immutable once built.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  // Throws ShapeError on a length mismatch, ValidationError on a duplicate.
  void add(std::string token, Vector vector);

  // Empty optional for out-of-vocabulary tokens.
  std::optional<std::span<const double>> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Tokens in insertion order.
  const std::vector<std::string>& tokens() const noexcept { return order_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::size_t dim_;
  std::unordered_map<std::string, Vector, Hash, std::equal_to<>> vectors_;
  std::vector<std::string> order_;
};

// Text word-vector format: a "count dim" header, then one token followed by
// dim floats per line.
EmbeddingTable read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable load_embeddings(const std::string& path);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

// Table lookup. An empty optional is the out-of-vocabulary signal.
std::optional<std::span<const double>> embed_label(std::string_view label,
                                                   const EmbeddingTable& table);

// Mean of the vectors of every in-vocabulary token occurrence. Throws
// EmptyDocumentError when no token has a vector.
Vector embed_document(const Song& song, const EmbeddingTable& table);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

// u.v / (|u||v|) clamped to [-1, 1]. Throws DegenerateVectorError on a zero
// norm and ShapeError on a length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// Seeded table covering every word of the synthetic vocabulary. Labels of a
// topic cluster around the topic direction; user labels lean towards a
// second per-topic direction; noise words are isotropic. All rows unit-norm.
EmbeddingTable synthetic_embeddings(const SyntheticConfig& config, std::size_t dim,
                                    std::uint64_t seed);

}  // namespace diva

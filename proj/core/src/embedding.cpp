#include "diva/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "diva/error.hpp"
#include "diva/rng.hpp"

namespace diva {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string token, Vector vector) {
  if (vector.size() != dim_) {
    throw ShapeError("vector for '" + token + "' has length " + std::to_string(vector.size()) +
                     ", expected " + std::to_string(dim_));
  }
  if (vectors_.contains(token)) {
    throw ValidationError("duplicate embedding token '" + token + "'");
  }
  order_.push_back(token);
  vectors_.emplace(std::move(token), std::move(vector));
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(token);
  if (it == vectors_.end()) return std::nullopt;
  return std::span<const double>(it->second);
}

namespace {

double parse_double(std::string_view field, const std::string& source, std::size_t row) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError(source, row, "invalid number '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

EmbeddingTable read_embeddings(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing 'count dim' header");
  const auto header = split_fields(line);
  if (header.size() != 2) throw ParseError(source, 1, "header must be 'count dim'");
  std::size_t count = 0, dim = 0;
  for (auto [field, out] : {std::pair{header[0], &count}, std::pair{header[1], &dim}}) {
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), *out);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ParseError(source, 1, "header must hold two non-negative integers");
    }
  }
  if (dim == 0) throw ParseError(source, 1, "dimension must be positive");

  EmbeddingTable table(dim);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError(source, row,
                       "expected " + std::to_string(dim) + " values, found " +
                           std::to_string(fields.size() - 1));
    }
    Vector v(dim);
    for (std::size_t k = 0; k < dim; ++k) v[k] = parse_double(fields[k + 1], source, row);
    table.add(std::string(fields[0]), std::move(v));
  }
  if (table.size() != count) {
    throw ParseError(source, row,
                     "header announces " + std::to_string(count) + " rows, found " +
                         std::to_string(table.size()));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return read_embeddings(in, path);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (const auto& token : table.tokens()) {
    out << token;
    const std::span<const double> row = *table.find(token);
    for (double x : row) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

std::optional<std::span<const double>> embed_label(std::string_view label,
                                                   const EmbeddingTable& table) {
  return table.find(label);
}

Vector embed_document(const Song& song, const EmbeddingTable& table) {
  Vector mean(table.dim(), 0.0);
  std::size_t n = 0;
  // Iterating distinct tokens keeps the sum independent of token order.
  for (const auto& [token, count] : song.token_counts) {
    auto v = table.find(token);
    if (!v) continue;
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += count * (*v)[k];
    n += count;
  }
  if (n == 0) throw EmptyDocumentError(song.id);
  for (double& x : mean) x /= static_cast<double>(n);
  return mean;
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine of vectors with different lengths");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw DegenerateVectorError();
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

namespace {

constexpr double kExpertSpread = 0.45;
constexpr double kUserTopicWeight = 1.0;
constexpr double kUserNovelWeight = 0.2;
constexpr double kUserSpread = 0.3;

Vector gaussian(Rng& rng, std::size_t dim) {
  Vector v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

Vector normalized(Vector v) {
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

}  // namespace

EmbeddingTable synthetic_embeddings(const SyntheticConfig& config, std::size_t dim,
                                    std::uint64_t seed) {
  const SyntheticVocabulary vocab = synthetic_vocabulary(config);
  EmbeddingTable table(dim);
  const Rng root(seed);
  for (std::size_t t = 0; t < vocab.topics.size(); ++t) {
    Rng rng = root.derive("topic", t);
    const Vector center = normalized(gaussian(rng, dim));
    const Vector novel = normalized(gaussian(rng, dim));
    for (const auto& y : vocab.topics[t].expert_labels) {
      Vector g = normalized(gaussian(rng, dim));
      Vector v(dim);
      for (std::size_t k = 0; k < dim; ++k) v[k] = center[k] + kExpertSpread * g[k];
      table.add(y, normalized(std::move(v)));
    }
    for (const auto& y : vocab.topics[t].user_labels) {
      Vector g = normalized(gaussian(rng, dim));
      Vector v(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        v[k] = kUserTopicWeight * center[k] + kUserNovelWeight * novel[k] + kUserSpread * g[k];
      }
      table.add(y, normalized(std::move(v)));
    }
  }
  Rng rng = root.derive("filler");
  for (const auto& w : vocab.noise_words) table.add(w, normalized(gaussian(rng, dim)));
  for (const auto& w : vocab.stopwords) table.add(w, normalized(gaussian(rng, dim)));
  return table;
}

}  // namespace diva

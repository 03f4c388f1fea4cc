/// @file embedding.hpp
/// @brief EmbeddingSet and the embedio loaders/writers (NPY, CSV, EMBV1).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftscope {

/// Immutable n x d matrix of embedding vectors, row-major, with optional
/// non-negative integer class labels. Every value is finite.
class EmbeddingSet {
 public:
  EmbeddingSet(std::vector<double> data, std::size_t rows, std::size_t dim,
               std::optional<std::vector<std::int64_t>> labels = std::nullopt,
               std::string name = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  bool has_labels() const noexcept { return labels_.has_value(); }
  /// Empty span when the set is unlabeled.
  std::span<const std::int64_t> labels() const noexcept {
    return labels_ ? std::span<const std::int64_t>(*labels_)
                   : std::span<const std::int64_t>();
  }

  /// Rows `indices` in the given order; labels travel with their rows.
  EmbeddingSet select(std::span<const std::size_t> indices) const;

  EmbeddingSet with_name(std::string name) const;
  EmbeddingSet with_labels(std::vector<std::int64_t> labels) const;
  EmbeddingSet without_labels() const;

  /// Bitwise equality of shape, values, and labels. Names are ignored.
  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b);

 private:
  std::vector<double> data_;
  std::size_t rows_;
  std::size_t dim_;
  std::optional<std::vector<std::int64_t>> labels_;
  std::string name_;
};

namespace embedio {

// In-memory codecs. Loaders on top of these only add file I/O.
EmbeddingSet decode_npy(std::span<const std::byte> bytes, std::string name = {});
std::vector<std::byte> encode_npy(const EmbeddingSet& set);
/// 1-D integer NPY (i1/i2/i4/i8/u1/u2/u4/u8) as labels.
std::vector<std::int64_t> decode_npy_labels(std::span<const std::byte> bytes);

EmbeddingSet decode_embv1(std::span<const std::byte> bytes, std::string name = {});
std::vector<std::byte> encode_embv1(const EmbeddingSet& set);

EmbeddingSet parse_csv(std::string_view text,
                       const std::optional<std::string>& label_column = std::nullopt,
                       std::string name = {});
/// Header is d0..d{d-1}, plus a trailing `label` column when labeled.
std::string format_csv(const EmbeddingSet& set);

EmbeddingSet load_npy(const std::filesystem::path& path);
void save_npy(const EmbeddingSet& set, const std::filesystem::path& path);
std::vector<std::int64_t> load_npy_labels(const std::filesystem::path& path);

EmbeddingSet load_csv(const std::filesystem::path& path,
                      const std::optional<std::string>& label_column = std::nullopt);
void save_csv(const EmbeddingSet& set, const std::filesystem::path& path);

EmbeddingSet load_embv1(const std::filesystem::path& path);
void save_embv1(const EmbeddingSet& set, const std::filesystem::path& path);

/// Dispatch on extension: .npy, .csv, .embv1 (case-insensitive).
/// `label_column` only applies to CSV; for CSV without it, a column named
/// `label` is used when present.
EmbeddingSet load(const std::filesystem::path& path,
                  const std::optional<std::string>& label_column = std::nullopt);
void save(const EmbeddingSet& set, const std::filesystem::path& path);

struct NormalizeResult {
  EmbeddingSet set;
  std::size_t zero_rows = 0;
};

/// Divides each row by its Euclidean norm. All-zero rows are kept as-is and
/// counted.
NormalizeResult l2_normalize(const EmbeddingSet& set);

}  // namespace embedio
}  // namespace shiftscope

#include "shiftscope/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "shiftscope/error.hpp"

namespace shiftscope {

namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::vector<double> data, std::size_t rows,
                           std::size_t dim,
                           std::optional<std::vector<std::int64_t>> labels,
                           std::string name)
    : data_(std::move(data)),
      rows_(rows),
      dim_(dim),
      labels_(std::move(labels)),
      name_(std::move(name)) {
  if (rows_ == 0 || dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding set needs at least one row and one dimension");
  }
  if (data_.size() != rows_ * dim_) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding data has " + std::to_string(data_.size()) +
                    " values, expected " + std::to_string(rows_ * dim_));
  }
  if (!all_finite(data_)) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding data contains NaN or Inf");
  }
  if (labels_) {
    if (labels_->size() != rows_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label count " + std::to_string(labels_->size()) +
                      " does not match row count " + std::to_string(rows_));
    }
    if (std::any_of(labels_->begin(), labels_->end(),
                    [](std::int64_t l) { return l < 0; })) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be non-negative");
    }
  }
}

EmbeddingSet EmbeddingSet::select(std::span<const std::size_t> indices) const {
  std::vector<double> out(indices.size() * dim_);
  std::optional<std::vector<std::int64_t>> out_labels;
  if (labels_) out_labels.emplace(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= rows_) {
      throw Error(ErrorCode::kInvalidArgument, "row index out of range");
    }
    std::copy_n(data_.data() + i * dim_, dim_, out.data() + k * dim_);
    if (labels_) (*out_labels)[k] = (*labels_)[i];
  }
  return EmbeddingSet(std::move(out), indices.size(), dim_, std::move(out_labels),
                      name_);
}

EmbeddingSet EmbeddingSet::with_name(std::string name) const {
  EmbeddingSet copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

EmbeddingSet EmbeddingSet::with_labels(std::vector<std::int64_t> labels) const {
  return EmbeddingSet(data_, rows_, dim_, std::move(labels), name_);
}

EmbeddingSet EmbeddingSet::without_labels() const {
  EmbeddingSet copy = *this;
  copy.labels_.reset();
  return copy;
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.rows_ != b.rows_ || a.dim_ != b.dim_) return false;
  if (std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) != 0) {
    return false;
  }
  return a.labels_ == b.labels_;
}

namespace embedio {

namespace {

// ---------------------------------------------------------------------------
// Little-endian byte helpers

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  using U = std::make_unsigned_t<
      std::conditional_t<std::is_floating_point_v<T>,
                         std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>,
                         T>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::byte* p) {
  using U = std::make_unsigned_t<
      std::conditional_t<std::is_floating_point_v<T>,
                         std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>,
                         T>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(std::to_integer<unsigned>(p[i])) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::string extension_of(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// ---------------------------------------------------------------------------
// NPY

constexpr std::string_view kNpyMagic = "\x93NUMPY";

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::uint64_t> shape;
  std::size_t data_offset = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Value text following `'key':` in the header dict, up to the next
// top-level comma or closing brace.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  const std::string quoted_single = "'" + std::string(key) + "'";
  const std::string quoted_double = "\"" + std::string(key) + "\"";
  std::size_t pos = dict.find(quoted_single);
  std::size_t len = quoted_single.size();
  if (pos == std::string_view::npos) {
    pos = dict.find(quoted_double);
    len = quoted_double.size();
  }
  if (pos == std::string_view::npos) {
    throw Error(ErrorCode::kFormat, "NPY header lacks '" + std::string(key) + "'");
  }
  std::size_t colon = dict.find(':', pos + len);
  if (colon == std::string_view::npos) throw Error(ErrorCode::kFormat, "malformed NPY header");
  std::size_t start = colon + 1;
  int depth = 0;
  std::size_t end = start;
  for (; end < dict.size(); ++end) {
    const char c = dict[end];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth == 0 && (c == ',' || c == '}')) break;
    if (depth < 0) break;
  }
  return trim(dict.substr(start, end - start));
}

NpyHeader parse_npy_header(std::span<const std::byte> bytes) {
  if (bytes.size() < 10 ||
      std::memcmp(bytes.data(), kNpyMagic.data(), kNpyMagic.size()) != 0) {
    throw Error(ErrorCode::kFormat, "not an NPY file (bad magic)");
  }
  const auto major = std::to_integer<unsigned>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t prefix = 0;
  if (major == 1) {
    header_len = get_le<std::uint16_t>(bytes.data() + 8);
    prefix = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw Error(ErrorCode::kFormat, "truncated NPY header");
    header_len = get_le<std::uint32_t>(bytes.data() + 8);
    prefix = 12;
  } else {
    throw Error(ErrorCode::kFormat, "unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < prefix + header_len) {
    throw Error(ErrorCode::kFormat, "truncated NPY header");
  }
  std::string_view dict(reinterpret_cast<const char*>(bytes.data() + prefix), header_len);

  NpyHeader header;
  header.data_offset = prefix + header_len;

  std::string_view descr = dict_value(dict, "descr");
  if (descr.size() < 2 || (descr.front() != '\'' && descr.front() != '"')) {
    throw Error(ErrorCode::kUnsupportedArray, "NPY descr is not a simple dtype");
  }
  header.descr = std::string(descr.substr(1, descr.size() - 2));

  std::string_view fortran = dict_value(dict, "fortran_order");
  if (fortran == "True") {
    header.fortran_order = true;
  } else if (fortran != "False") {
    throw Error(ErrorCode::kFormat, "malformed fortran_order in NPY header");
  }

  std::string_view shape = dict_value(dict, "shape");
  if (shape.size() < 2 || shape.front() != '(' || shape.back() != ')') {
    throw Error(ErrorCode::kFormat, "malformed shape in NPY header");
  }
  shape = shape.substr(1, shape.size() - 2);
  while (!shape.empty()) {
    std::size_t comma = shape.find(',');
    std::string_view item = trim(shape.substr(0, comma));
    if (!item.empty()) {
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw Error(ErrorCode::kFormat, "malformed shape in NPY header");
      }
      header.shape.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    shape.remove_prefix(comma + 1);
  }
  return header;
}

// '<f8' -> ('<', 'f', 8). '|' and '=' are treated as native little-endian.
struct Dtype {
  char order;
  char kind;
  std::size_t size;
};

Dtype parse_dtype(const std::string& descr) {
  if (descr.size() < 3) throw Error(ErrorCode::kUnsupportedArray, "unsupported dtype " + descr);
  Dtype t{descr[0], descr[1], 0};
  auto [ptr, ec] = std::from_chars(descr.data() + 2, descr.data() + descr.size(), t.size);
  if (ec != std::errc() || ptr != descr.data() + descr.size()) {
    throw Error(ErrorCode::kUnsupportedArray, "unsupported dtype " + descr);
  }
  if (t.order == '=' || t.order == '|') t.order = '<';
  return t;
}

}  // namespace

EmbeddingSet decode_npy(std::span<const std::byte> bytes, std::string name) {
  const NpyHeader header = parse_npy_header(bytes);
  const Dtype dtype = parse_dtype(header.descr);
  if (dtype.kind != 'f' || (dtype.size != 4 && dtype.size != 8) || dtype.order != '<') {
    throw Error(ErrorCode::kUnsupportedArray,
                "expected little-endian float32/float64 array, got " + header.descr);
  }
  if (header.shape.size() != 2) {
    throw Error(ErrorCode::kUnsupportedArray,
                "expected a 2-D array, got " + std::to_string(header.shape.size()) + "-D");
  }
  if (header.fortran_order) {
    throw Error(ErrorCode::kUnsupportedArray, "Fortran-order arrays are not supported");
  }
  const std::size_t rows = header.shape[0];
  const std::size_t dim = header.shape[1];
  if (rows == 0 || dim == 0) {
    throw Error(ErrorCode::kUnsupportedArray, "array has an empty dimension");
  }
  const std::size_t count = rows * dim;
  if (bytes.size() - header.data_offset < count * dtype.size) {
    throw Error(ErrorCode::kFormat, "NPY payload is truncated");
  }
  std::vector<double> data(count);
  const std::byte* p = bytes.data() + header.data_offset;
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = dtype.size == 8 ? get_le<double>(p + 8 * i)
                              : static_cast<double>(get_le<float>(p + 4 * i));
  }
  if (!all_finite(data)) throw Error(ErrorCode::kFormat, "NPY array contains NaN or Inf");
  return EmbeddingSet(std::move(data), rows, dim, std::nullopt, std::move(name));
}

std::vector<std::int64_t> decode_npy_labels(std::span<const std::byte> bytes) {
  const NpyHeader header = parse_npy_header(bytes);
  const Dtype dtype = parse_dtype(header.descr);
  if ((dtype.kind != 'i' && dtype.kind != 'u') || dtype.order != '<' ||
      (dtype.size != 1 && dtype.size != 2 && dtype.size != 4 && dtype.size != 8)) {
    throw Error(ErrorCode::kUnsupportedArray, "labels must be an integer array, got " + header.descr);
  }
  if (header.shape.size() != 1) {
    throw Error(ErrorCode::kUnsupportedArray, "labels must be a 1-D array");
  }
  const std::size_t count = header.shape[0];
  if (bytes.size() - header.data_offset < count * dtype.size) {
    throw Error(ErrorCode::kFormat, "NPY payload is truncated");
  }
  std::vector<std::int64_t> labels(count);
  const std::byte* p = bytes.data() + header.data_offset;
  for (std::size_t i = 0; i < count; ++i) {
    const std::byte* q = p + i * dtype.size;
    const bool s = dtype.kind == 'i';
    switch (dtype.size) {
      case 1: labels[i] = s ? get_le<std::int8_t>(q) : get_le<std::uint8_t>(q); break;
      case 2: labels[i] = s ? get_le<std::int16_t>(q) : get_le<std::uint16_t>(q); break;
      case 4: labels[i] = s ? get_le<std::int32_t>(q) : get_le<std::uint32_t>(q); break;
      default: labels[i] = static_cast<std::int64_t>(get_le<std::uint64_t>(q)); break;
    }
  }
  return labels;
}

std::vector<std::byte> encode_npy(const EmbeddingSet& set) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                     std::to_string(set.rows()) + ", " + std::to_string(set.dim()) +
                     "), }";
  // Pad so magic + version + length + dict + '\n' is a multiple of 64.
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');

  std::vector<std::byte> out;
  out.reserve(10 + dict.size() + set.data().size() * 8);
  for (char c : kNpyMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(dict.size()));
  for (char c : dict) out.push_back(static_cast<std::byte>(c));
  for (double v : set.data()) put_le<double>(out, v);
  return out;
}

// ---------------------------------------------------------------------------
// EMBV1: "EMBV" | u32 version=1 | u32 n | u32 d | u8 has_labels |
//        n*d f64 row-major | (has_labels) n i64

namespace {
constexpr std::string_view kEmbvMagic = "EMBV";
constexpr std::size_t kEmbvHeaderSize = 4 + 4 + 4 + 4 + 1;
}  // namespace

std::vector<std::byte> encode_embv1(const EmbeddingSet& set) {
  if (set.rows() > UINT32_MAX || set.dim() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "set too large for EMBV1");
  }
  std::vector<std::byte> out;
  out.reserve(kEmbvHeaderSize + set.data().size() * 8 + set.labels().size() * 8);
  for (char c : kEmbvMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim()));
  out.push_back(std::byte{set.has_labels() ? std::uint8_t{1} : std::uint8_t{0}});
  for (double v : set.data()) put_le<double>(out, v);
  for (std::int64_t l : set.labels()) put_le<std::int64_t>(out, l);
  return out;
}

EmbeddingSet decode_embv1(std::span<const std::byte> bytes, std::string name) {
  if (bytes.size() < kEmbvHeaderSize ||
      std::memcmp(bytes.data(), kEmbvMagic.data(), kEmbvMagic.size()) != 0) {
    throw Error(ErrorCode::kFormat, "not an EMBV1 file (bad magic or truncated header)");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != 1) {
    throw Error(ErrorCode::kFormat, "unsupported EMBV version " + std::to_string(version));
  }
  const std::size_t rows = get_le<std::uint32_t>(bytes.data() + 8);
  const std::size_t dim = get_le<std::uint32_t>(bytes.data() + 12);
  const auto has_labels = std::to_integer<unsigned>(bytes[16]);
  if (has_labels > 1) throw Error(ErrorCode::kFormat, "bad has_labels flag");
  if (rows == 0 || dim == 0) throw Error(ErrorCode::kFormat, "EMBV1 set is empty");
  const std::size_t expected =
      kEmbvHeaderSize + rows * dim * 8 + (has_labels ? rows * 8 : 0);
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kFormat, "EMBV1 size mismatch: " + std::to_string(bytes.size()) +
                                        " bytes, expected " + std::to_string(expected));
  }
  std::vector<double> data(rows * dim);
  const std::byte* p = bytes.data() + kEmbvHeaderSize;
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = get_le<double>(p + 8 * i);
  if (!all_finite(data)) throw Error(ErrorCode::kFormat, "EMBV1 data contains NaN or Inf");
  std::optional<std::vector<std::int64_t>> labels;
  if (has_labels) {
    labels.emplace(rows);
    p += data.size() * 8;
    for (std::size_t i = 0; i < rows; ++i) {
      (*labels)[i] = get_le<std::int64_t>(p + 8 * i);
      if ((*labels)[i] < 0) throw Error(ErrorCode::kFormat, "negative label in EMBV1 file");
    }
  }
  return EmbeddingSet(std::move(data), rows, dim, std::move(labels), std::move(name));
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

namespace {

// Splits into records of fields, honoring quotes, "" escapes, CRLF and
// newlines inside quoted fields.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kFormat, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

EmbeddingSet parse_csv(std::string_view text, const std::optional<std::string>& label_column,
                       std::string name) {
  const auto records = split_csv(text);
  if (records.empty()) throw Error(ErrorCode::kFormat, "CSV has no header row");
  const auto& header = records.front();
  const std::size_t width = header.size();

  std::optional<std::size_t> label_index;
  if (label_column) {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
      return trim(h) == *label_column;
    });
    if (it == header.end()) {
      throw Error(ErrorCode::kFormat, "label column '" + *label_column + "' not in CSV header");
    }
    label_index = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t dim = width - (label_index ? 1 : 0);
  if (dim == 0) throw Error(ErrorCode::kFormat, "CSV has no data columns");
  if (records.size() < 2) throw Error(ErrorCode::kFormat, "CSV has no data rows");

  const std::size_t rows = records.size() - 1;
  std::vector<double> data;
  data.reserve(rows * dim);
  std::optional<std::vector<std::int64_t>> labels;
  if (label_index) labels.emplace();

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != width) {
      throw Error(ErrorCode::kFormat, "ragged CSV: row " + std::to_string(r + 1) + " has " +
                                          std::to_string(rec.size()) + " fields, header has " +
                                          std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (label_index && c == *label_index) {
        std::string_view cell = trim(rec[c]);
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || value < 0) {
          throw ParseError(r + 1, c + 1,
                           "row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                               ": label '" + rec[c] + "' is not a non-negative integer");
        }
        labels->push_back(value);
        continue;
      }
      double value = 0.0;
      if (!parse_double(rec[c], value)) {
        throw ParseError(r + 1, c + 1,
                         "row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                             ": '" + rec[c] + "' is not a finite number");
      }
      data.push_back(value);
    }
  }
  return EmbeddingSet(std::move(data), rows, dim, std::move(labels), std::move(name));
}

std::string format_csv(const EmbeddingSet& set) {
  std::string out;
  for (std::size_t c = 0; c < set.dim(); ++c) {
    if (c) out.push_back(',');
    out += "d" + std::to_string(c);
  }
  if (set.has_labels()) out += ",label";
  out.push_back('\n');
  char buf[32];
  for (std::size_t r = 0; r < set.rows(); ++r) {
    const auto row = set.row(r);
    for (std::size_t c = 0; c < set.dim(); ++c) {
      if (c) out.push_back(',');
      // Shortest representation that round-trips exactly.
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[c]);
      out.append(buf, ptr);
    }
    if (set.has_labels()) out += "," + std::to_string(set.labels()[r]);
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// File front-ends

EmbeddingSet load_npy(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_npy(bytes, path.filename().string());
}

void save_npy(const EmbeddingSet& set, const std::filesystem::path& path) {
  write_file(path, encode_npy(set));
}

std::vector<std::int64_t> load_npy_labels(const std::filesystem::path& path) {
  return decode_npy_labels(read_file(path));
}

EmbeddingSet load_csv(const std::filesystem::path& path,
                      const std::optional<std::string>& label_column) {
  const auto bytes = read_file(path);
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return parse_csv(text, label_column, path.filename().string());
}

void save_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
  const std::string text = format_csv(set);
  write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

EmbeddingSet load_embv1(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_embv1(bytes, path.filename().string());
}

void save_embv1(const EmbeddingSet& set, const std::filesystem::path& path) {
  write_file(path, encode_embv1(set));
}

EmbeddingSet load(const std::filesystem::path& path,
                  const std::optional<std::string>& label_column) {
  const std::string ext = extension_of(path);
  if (ext == ".npy") return load_npy(path);
  if (ext == ".embv1" || ext == ".embv") return load_embv1(path);
  if (ext == ".csv") {
    if (label_column) return load_csv(path, label_column);
    const auto bytes = read_file(path);
    std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const auto first_line = text.substr(0, text.find_first_of("\r\n"));
    const auto header = split_csv(first_line);
    const bool has_label = !header.empty() &&
                           std::any_of(header.front().begin(), header.front().end(),
                                       [](const std::string& h) { return trim(h) == "label"; });
    return parse_csv(text, has_label ? std::optional<std::string>("label") : std::nullopt,
                     path.filename().string());
  }
  throw Error(ErrorCode::kFormat, "unknown embedding file extension '" + ext +
                                      "' (expected .npy, .csv or .embv1)");
}

void save(const EmbeddingSet& set, const std::filesystem::path& path) {
  const std::string ext = extension_of(path);
  if (ext == ".npy") return save_npy(set, path);
  if (ext == ".embv1" || ext == ".embv") return save_embv1(set, path);
  if (ext == ".csv") return save_csv(set, path);
  throw Error(ErrorCode::kFormat, "unknown embedding file extension '" + ext + "'");
}

NormalizeResult l2_normalize(const EmbeddingSet& set) {
  std::vector<double> data(set.data().begin(), set.data().end());
  std::size_t zero_rows = 0;
  const std::size_t d = set.dim();
  for (std::size_t r = 0; r < set.rows(); ++r) {
    double* row = data.data() + r * d;
    // Scaled norm so huge components cannot overflow the sum of squares.
    double scale = 0.0;
    for (std::size_t c = 0; c < d; ++c) scale = std::max(scale, std::abs(row[c]));
    if (scale == 0.0) {
      ++zero_rows;
      continue;
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double v = row[c] / scale;
      sum += v * v;
    }
    const double norm = scale * std::sqrt(sum);
    for (std::size_t c = 0; c < d; ++c) row[c] /= norm;
  }
  std::optional<std::vector<std::int64_t>> labels;
  if (set.has_labels()) labels.emplace(set.labels().begin(), set.labels().end());
  return {EmbeddingSet(std::move(data), set.rows(), d, std::move(labels), set.name()),
          zero_rows};
}

}  // namespace embedio

}  // namespace shiftscope

// Temp files and a hand-rolled NPY writer for the tests.
#pragma once

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace testfs {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("shiftscope_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// NPY v1.0 writer written straight from the format description: magic,
// version, u16 header length, dict padded with spaces to a multiple of 64
// bytes total and ending in '\n', then raw little-endian data.
inline std::string npy_bytes(const std::string& descr, const std::string& shape,
                             const void* data, std::size_t nbytes, bool fortran = false) {
  std::string dict = "{'descr': '" + descr + "', 'fortran_order': " +
                     (fortran ? "True" : "False") + ", 'shape': " + shape + ", }";
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');
  std::string out = "\x93NUMPY";
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<char>(len & 0xff));
  out.push_back(static_cast<char>(len >> 8));
  out += dict;
  out.append(static_cast<const char*>(data), nbytes);
  return out;
}

template <class T>
std::string npy_matrix(const std::string& descr, const std::vector<T>& v, std::size_t rows,
                       std::size_t cols) {
  return npy_bytes(descr, "(" + std::to_string(rows) + ", " + std::to_string(cols) + ")",
                   v.data(), v.size() * sizeof(T));
}

template <class T>
std::string npy_vector(const std::string& descr, const std::vector<T>& v) {
  return npy_bytes(descr, "(" + std::to_string(v.size()) + ",)", v.data(), v.size() * sizeof(T));
}

}  // namespace testfs

#include "framealign/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "framealign/error.hpp"

namespace framealign {

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos, const std::filesystem::path& path) {
  if (pos + sizeof(T) > in.size()) throw Error("truncated tensor file " + path.string());
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(v);
}

std::vector<double> parse_csv_row(const std::string& line, const std::filesystem::path& path,
                                  std::size_t line_no) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    if (first == std::string::npos) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": empty CSV cell");
    }
    const std::string s = cell.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": not a number: " + s);
    }
    row.push_back(v);
  }
  return row;
}

Tensor read_csv(const std::string& text, const std::filesystem::path& path) {
  Tensor t;
  std::vector<std::size_t> declared;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind("#", 0) == 0) {
      const auto at = line.find("shape=");
      if (at != std::string::npos) {
        for (double d : parse_csv_row(line.substr(at + 6), path, line_no)) {
          if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
            throw Error(path.string() + ": invalid shape declaration");
          }
          declared.push_back(static_cast<std::size_t>(d));
        }
      }
      continue;
    }
    auto row = parse_csv_row(line, path, line_no);
    if (rows == 0) cols = row.size();
    if (row.size() != cols) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": ragged CSV row");
    }
    t.data.insert(t.data.end(), row.begin(), row.end());
    ++rows;
  }
  if (declared.empty()) {
    t.shape = {rows, cols};
  } else {
    t.shape = declared;
    if (t.numel() != t.data.size()) {
      throw Error(path.string() + ": declared shape does not match the number of values");
    }
  }
  return t;
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open tensor file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 8) != 0) {
    return read_csv(bytes, path);
  }
  std::size_t pos = 8;
  Tensor t;
  const auto rank = get_le<std::uint32_t>(bytes, pos, path);
  if (rank == 0 || rank > 8) throw Error("unsupported tensor rank in " + path.string());
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.shape.push_back(static_cast<std::size_t>(get_le<std::uint64_t>(bytes, pos, path)));
  }
  if (get_le<std::uint32_t>(bytes, pos, path) != kTensorFloat64) {
    throw Error("unsupported tensor element type in " + path.string());
  }
  const std::size_t n = t.numel();
  if (bytes.size() - pos != n * 8) throw Error("tensor payload size mismatch in " + path.string());
  t.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos, path));
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  if (tensor.numel() != tensor.data.size()) throw Error("write_tensor: shape/data mismatch");
  std::string out(kTensorMagic, 8);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.shape.size()));
  for (auto d : tensor.shape) put_le<std::uint64_t>(out, d);
  put_le<std::uint32_t>(out, kTensorFloat64);
  for (double v : tensor.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void write_tensor_csv(const std::filesystem::path& path, const Tensor& tensor) {
  if (tensor.shape.empty() || tensor.numel() != tensor.data.size()) {
    throw Error("write_tensor_csv: shape/data mismatch");
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  if (tensor.shape.size() != 2) {
    f << "# shape=";
    for (std::size_t i = 0; i < tensor.shape.size(); ++i) f << (i ? "," : "") << tensor.shape[i];
    f << '\n';
  }
  const std::size_t cols = tensor.shape.back();
  f.precision(17);
  for (std::size_t i = 0; i < tensor.data.size(); ++i) {
    f << tensor.data[i] << ((i + 1) % cols == 0 ? "\n" : ",");
  }
}

Tensor from_matrix(const Matrix& m) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
  t.data.assign(m.data(), m.data() + m.size());
  return t;
}

Matrix to_matrix(const Tensor& t) {
  if (t.shape.size() != 2) throw Error("expected a rank-2 tensor");
  Matrix m(static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1]));
  std::copy(t.data.begin(), t.data.end(), m.data());
  return m;
}

std::vector<Matrix> to_matrices(const Tensor& t) {
  if (t.shape.size() != 3) throw Error("expected a rank-3 tensor");
  const auto rows = static_cast<Eigen::Index>(t.shape[1]);
  const auto cols = static_cast<Eigen::Index>(t.shape[2]);
  std::vector<Matrix> out;
  const std::size_t step = t.shape[1] * t.shape[2];
  for (std::size_t b = 0; b < t.shape[0]; ++b) {
    Matrix m(rows, cols);
    std::copy(t.data.begin() + static_cast<std::ptrdiff_t>(b * step),
              t.data.begin() + static_cast<std::ptrdiff_t>((b + 1) * step), m.data());
    out.push_back(std::move(m));
  }
  return out;
}

Tensor stack(const std::vector<Matrix>& ms) {
  Tensor t;
  if (ms.empty()) throw Error("stack: no matrices");
  t.shape = {ms.size(), static_cast<std::size_t>(ms[0].rows()),
             static_cast<std::size_t>(ms[0].cols())};
  for (const auto& m : ms) {
    if (m.rows() != ms[0].rows() || m.cols() != ms[0].cols()) {
      throw Error("stack: matrices differ in shape");
    }
    t.data.insert(t.data.end(), m.data(), m.data() + m.size());
  }
  return t;
}

}  // namespace framealign

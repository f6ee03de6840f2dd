#pragma once

// File formats: Matrix Market (coordinate and array), CSV with an optional
// header row, one-value-per-line vectors, svmlight/libsvm, and the trace CSV.

#include "hosmooth/accel.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hosmooth {

/// Unreadable or malformed input; the message names the file.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline double parse_double_or_throw(std::string_view s, const std::string& where) {
  double v = 0.0;
  if (!parse_double(s, v)) throw InputError(where + ": not a number: '" + std::string(trim(s)) + "'");
  if (!std::isfinite(v)) throw InputError(where + ": non-finite value");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

inline Matrix read_matrix_market(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  std::getline(in, line);
  std::string lower = line;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto head = split_ws(lower);
  if (head.size() < 5 || head[1] != "matrix")
    throw InputError(path.string() + ": unsupported Matrix Market header");
  const bool coordinate = head[2] == "coordinate";
  if (!coordinate && head[2] != "array") throw InputError(path.string() + ": unknown Matrix Market layout");
  if (head[3] != "real" && head[3] != "integer" && head[3] != "double")
    throw InputError(path.string() + ": only real or integer Matrix Market fields are supported");
  const bool symmetric = head[4] == "symmetric";
  if (!symmetric && head[4] != "general") throw InputError(path.string() + ": unsupported symmetry " + std::string(head[4]));

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (!t.empty() && t.front() != '%') break;
  }
  const auto size_tok = split_ws(line);
  auto to_index = [&](std::string_view s) {
    const double v = parse_double_or_throw(s, where(path, line_no));
    if (v < 0 || v != std::floor(v)) throw InputError(where(path, line_no) + ": bad size or index");
    return static_cast<Eigen::Index>(v);
  };
  if (size_tok.size() < (coordinate ? 3u : 2u)) throw InputError(where(path, line_no) + ": bad size line");
  const Eigen::Index rows = to_index(size_tok[0]);
  const Eigen::Index cols = to_index(size_tok[1]);
  Matrix m = Matrix::Zero(rows, cols);
  if (coordinate) {
    const Eigen::Index nnz = to_index(size_tok[2]);
    Eigen::Index seen = 0;
    while (seen < nnz && std::getline(in, line)) {
      ++line_no;
      const auto t = trim(line);
      if (t.empty() || t.front() == '%') continue;
      const auto tok = split_ws(t);
      if (tok.size() < 3) throw InputError(where(path, line_no) + ": expected 'row col value'");
      const Eigen::Index i = to_index(tok[0]) - 1;
      const Eigen::Index j = to_index(tok[1]) - 1;
      if (i < 0 || j < 0 || i >= rows || j >= cols) throw InputError(where(path, line_no) + ": index out of range");
      const double v = parse_double_or_throw(tok[2], where(path, line_no));
      m(i, j) = v;
      if (symmetric) m(j, i) = v;
      ++seen;
    }
    if (seen != nnz) throw InputError(path.string() + ": expected " + std::to_string(nnz) + " entries");
  } else {
    // column-major; symmetric arrays list the lower triangle only
    Eigen::Index i = 0, j = 0;
    while (j < cols && std::getline(in, line)) {
      ++line_no;
      const auto t = trim(line);
      if (t.empty() || t.front() == '%') continue;
      for (auto tok : split_ws(t)) {
        if (j >= cols) throw InputError(where(path, line_no) + ": too many values");
        const double v = parse_double_or_throw(tok, where(path, line_no));
        m(i, j) = v;
        if (symmetric) m(j, i) = v;
        if (++i == rows) {
          ++j;
          i = symmetric ? j : 0;
        }
      }
    }
    if (j < cols && rows > 0) throw InputError(path.string() + ": too few values");
  }
  return m;
}

inline Matrix read_csv_matrix(std::istream& in, const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const bool comma = t.find(',') != std::string_view::npos;
    const auto cells = comma ? split(t, ',') : split_ws(t);
    std::vector<double> row;
    row.reserve(cells.size());
    bool numeric = true;
    for (auto c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header row
      throw InputError(where(path, line_no) + ": non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(where(path, line_no) + ": expected " + std::to_string(rows.front().size()) + " columns, found " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  return m;
}

}  // namespace detail

/// Reads a Matrix Market file (detected by its banner) or a CSV /
/// whitespace-separated table.
inline Matrix read_matrix(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  const int first = in.peek();
  Matrix m = (first == '%') ? detail::read_matrix_market(in, path) : detail::read_csv_matrix(in, path);
  try {
    require_finite(m, path.string().c_str());
  } catch (const NonFiniteError& e) {
    throw InputError(e.what());
  }
  return m;
}

/// One value per line; also accepts a single-column Matrix Market array.
inline Vector read_vector(const std::filesystem::path& path) {
  const Matrix m = read_matrix(path);
  if (m.cols() != 1) throw InputError(path.string() + ": expected one value per line");
  return m.col(0);
}

/// Matrix Market array format, general real, 17 significant digits.
inline void write_matrix_market(const std::filesystem::path& path, const Matrix& m) {
  auto out = detail::open_out(path);
  out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf << '\n';
    }
}

inline void write_vector(const std::filesystem::path& path, const Vector& v) {
  auto out = detail::open_out(path);
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v(i));
    out << buf << '\n';
  }
}

struct LabeledData {
  Matrix points;  // one row per sample
  Vector labels;  // +-1
};

/// svmlight / libsvm text: `label idx:val ...` with 1-based indices.
/// Labels 0 are read as -1. dim = 0 sizes the matrix by the largest index.
inline LabeledData read_svmlight(const std::filesystem::path& path, Eigen::Index dim = 0) {
  auto in = detail::open_in(path);
  std::vector<double> labels;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  Eigen::Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (const auto hash = t.find('#'); hash != std::string_view::npos) t = detail::trim(t.substr(0, hash));
    if (t.empty()) continue;
    const auto tok = detail::split_ws(t);
    const std::string at = detail::where(path, line_no);
    double label = detail::parse_double_or_throw(tok[0], at);
    if (label == 0.0) label = -1.0;
    if (label != 1.0 && label != -1.0) throw InputError(at + ": label must be +1 or -1");
    std::vector<std::pair<Eigen::Index, double>> row;
    for (std::size_t k = 1; k < tok.size(); ++k) {
      const auto colon = tok[k].find(':');
      if (colon == std::string_view::npos) throw InputError(at + ": expected idx:val, got '" + std::string(tok[k]) + "'");
      if (tok[k].substr(0, colon) == "qid") continue;
      const double idx = detail::parse_double_or_throw(tok[k].substr(0, colon), at);
      if (idx < 1 || idx != std::floor(idx)) throw InputError(at + ": feature index must be a positive integer");
      const double v = detail::parse_double_or_throw(tok[k].substr(colon + 1), at);
      const auto j = static_cast<Eigen::Index>(idx);
      max_index = std::max(max_index, j);
      row.emplace_back(j - 1, v);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no samples");
  if (dim > 0 && max_index > dim)
    throw InputError(path.string() + ": feature index " + std::to_string(max_index) + " exceeds dimension " +
                     std::to_string(dim));
  const Eigen::Index d = dim > 0 ? dim : max_index;
  if (d == 0) throw InputError(path.string() + ": no features");
  LabeledData out{Matrix::Zero(Eigen::Index(rows.size()), d), Vector(Eigen::Index(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.labels(Eigen::Index(i)) = labels[i];
    for (const auto& [j, v] : rows[i]) out.points(Eigen::Index(i), j) = v;
  }
  return out;
}

/// Writes every feature (dense rows), 17 significant digits.
inline void write_svmlight(const std::filesystem::path& path, const Matrix& points, const Vector& labels) {
  require_dim(labels.size(), points.rows(), "write_svmlight labels");
  auto out = detail::open_out(path);
  char buf[48];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out << (labels(i) > 0 ? "+1" : "-1");
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      std::snprintf(buf, sizeof buf, " %td:%.17g", static_cast<std::ptrdiff_t>(j + 1), points(i, j));
      out << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Traces

inline constexpr const char* kTraceHeader = "iter,wall_s,f,f_mu,gap_est,rho,a,A,inner_iters,disp,f_mu_y,f_mu_step,epoch";

inline std::string format_trace_row(const TracePoint& t) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.6f,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%d", t.iter, t.wall_s,
                t.f, t.f_mu, t.gap_est, t.rho, t.a, t.big_a, t.inner_iters, t.disp, t.f_mu_y, t.f_mu_step, t.epoch);
  return buf;
}

/// Appends rows as they arrive and flushes each one.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path) : out_(detail::open_out(path)) {
    out_ << kTraceHeader << '\n';
    out_.flush();
  }
  void operator()(const TracePoint& t) {
    out_ << format_trace_row(t) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

inline std::vector<TracePoint> read_trace(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kTraceHeader)
    throw InputError(path.string() + ": not a trace file");
  std::vector<TracePoint> out;
  std::size_t line_no = 1;
  auto num = [&](std::string_view s) {
    double v = 0.0;
    const auto t = detail::trim(s);
    if (t == "nan" || t == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (!detail::parse_double(t, v)) throw InputError(detail::where(path, line_no) + ": bad trace value");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto c = detail::split(line, ',');
    if (c.size() != 13) throw InputError(detail::where(path, line_no) + ": expected 13 columns");
    TracePoint t;
    t.iter = static_cast<int>(num(c[0]));
    t.wall_s = num(c[1]);
    t.f = num(c[2]);
    t.f_mu = num(c[3]);
    t.gap_est = num(c[4]);
    t.rho = num(c[5]);
    t.a = num(c[6]);
    t.big_a = num(c[7]);
    t.inner_iters = static_cast<int>(num(c[8]));
    t.disp = num(c[9]);
    t.f_mu_y = num(c[10]);
    t.f_mu_step = num(c[11]);
    t.epoch = static_cast<int>(num(c[12]));
    out.push_back(t);
  }
  return out;
}

}  // namespace hosmooth

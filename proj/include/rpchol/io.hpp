/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_IO_HPP
#define RPCHOL_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rpchol/data_matrix.hpp"
#include "rpchol/kernels.hpp"
#include "rpchol/rpcholesky.hpp"

namespace rpchol {

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> buf;
  std::memcpy(buf.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf.begin(), buf.end());
  }
  os.write(reinterpret_cast<const char*>(buf.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> buf;
  is.read(reinterpret_cast<char*>(buf.data()), sizeof(T));
  if (!is) throw std::runtime_error("binary read: unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf.begin(), buf.end());
  }
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  return value;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& token, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    while (pos < token.size() &&
           (token[pos] == ' ' || token[pos] == '\t' || token[pos] == '\r')) {
      ++pos;
    }
    if (pos != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string(what) + ": cannot parse '" + token + "'");
  }
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Point-set CSV (one point per row, comma-separated 64-bit reals).

inline void write_points_csv(const std::string& path, const Eigen::MatrixXd& pts) {
  std::ofstream os = detail::open_out(path);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      if (j > 0) os << ',';
      os << detail::format_double(pts(i, j));
    }
    os << '\n';
  }
}

inline DataMatrix read_points_csv(const std::string& path, bool skip_header = false) {
  std::ifstream is = detail::open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(is, line)) {
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) {
      row.push_back(detail::parse_double(token, "read_points_csv"));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("read_points_csv: ragged row in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_points_csv: no data in " + path);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      pts(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return DataMatrix(std::move(pts));
}

inline Eigen::VectorXd read_vector_csv(const std::string& path,
                                       bool skip_header = false) {
  std::ifstream is = detail::open_in(path);
  std::string line;
  std::vector<double> values;
  bool first = true;
  while (std::getline(is, line)) {
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty() || line == "\r") continue;
    values.push_back(detail::parse_double(line, "read_vector_csv"));
  }
  if (values.empty()) throw std::runtime_error("read_vector_csv: no data in " + path);
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

inline void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream os = detail::open_out(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << detail::format_double(v[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// LIBSVM sparse text format: "label idx:val idx:val ...", 1-based indices.

struct LabeledPoints {
  DataMatrix points;
  Eigen::VectorXd labels;
};

inline LabeledPoints read_libsvm(const std::string& path) {
  std::ifstream is = detail::open_in(path);
  std::string line;
  std::vector<double> labels;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  Eigen::Index max_index = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    labels.push_back(detail::parse_double(token, "read_libsvm label"));
    std::vector<std::pair<Eigen::Index, double>> entries;
    while (ss >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("read_libsvm: malformed pair '" + token + "'");
      }
      const long idx = std::stol(token.substr(0, colon));
      if (idx < 1) throw std::runtime_error("read_libsvm: indices are 1-based");
      const double value =
          detail::parse_double(token.substr(colon + 1), "read_libsvm value");
      entries.emplace_back(static_cast<Eigen::Index>(idx - 1), value);
      max_index = std::max(max_index, static_cast<Eigen::Index>(idx));
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw std::runtime_error("read_libsvm: no data in " + path);
  Eigen::MatrixXd pts =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) {
      pts(static_cast<Eigen::Index>(i), j) = v;
    }
  }
  LabeledPoints out{DataMatrix(std::move(pts)),
                    Eigen::Map<Eigen::VectorXd>(
                        labels.data(), static_cast<Eigen::Index>(labels.size()))};
  return out;
}

// ---------------------------------------------------------------------------
// RPCF factor file: magic "RPCF", u32 version = 1, u64 N, u64 k,
// k*N little-endian f64 column-major, k u64 pivot indices (0-based), u64
// count of packed Cholesky reals (row-wise lower triangle; 0 when absent),
// then that many f64.

inline void write_rpcf(const std::string& path, const LowRankApprox& approx) {
  std::ofstream os = detail::open_out(path, true);
  os.write("RPCF", 4);
  detail::write_le<std::uint32_t>(os, 1);
  const auto n = static_cast<std::uint64_t>(approx.factor.rows());
  const auto k = static_cast<std::uint64_t>(approx.factor.cols());
  if (approx.pivots.size() != k) {
    throw std::invalid_argument("write_rpcf: pivot count must match factor columns");
  }
  detail::write_le<std::uint64_t>(os, n);
  detail::write_le<std::uint64_t>(os, k);
  for (Eigen::Index j = 0; j < approx.factor.cols(); ++j) {
    for (Eigen::Index i = 0; i < approx.factor.rows(); ++i) {
      detail::write_le<double>(os, approx.factor(i, j));
    }
  }
  for (Eigen::Index p : approx.pivots) {
    detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(p));
  }
  const bool has_chol = approx.chol_factor.rows() == approx.factor.cols() &&
                        approx.chol_factor.cols() == approx.factor.cols() &&
                        approx.factor.cols() > 0;
  const std::uint64_t chol_count = has_chol ? k * (k + 1) / 2 : 0;
  detail::write_le<std::uint64_t>(os, chol_count);
  if (has_chol) {
    for (Eigen::Index i = 0; i < approx.chol_factor.rows(); ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        detail::write_le<double>(os, approx.chol_factor(i, j));
      }
    }
  }
  if (!os) throw std::runtime_error("write_rpcf: write failed for " + path);
}

inline LowRankApprox read_rpcf(const std::string& path) {
  std::ifstream is = detail::open_in(path, true);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "RPCF", 4) != 0) {
    throw std::runtime_error("read_rpcf: bad magic in " + path);
  }
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != 1) throw std::runtime_error("read_rpcf: unsupported version");
  const auto n = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(is));
  const auto k = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(is));
  LowRankApprox approx;
  approx.factor.resize(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      approx.factor(i, j) = detail::read_le<double>(is);
    }
  }
  approx.pivots.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    approx.pivots[static_cast<std::size_t>(j)] =
        static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(is));
  }
  const auto chol_count = detail::read_le<std::uint64_t>(is);
  if (chol_count > 0) {
    if (chol_count != static_cast<std::uint64_t>(k) * (k + 1) / 2) {
      throw std::runtime_error("read_rpcf: unexpected Cholesky payload size");
    }
    approx.chol_factor = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        approx.chol_factor(i, j) = detail::read_le<double>(is);
      }
    }
  }
  return approx;
}

// ---------------------------------------------------------------------------
// RPQF dense matrix file: magic "RPQF", u32 version = 1, u64 M, u64 N, M*N
// little-endian f64 column-major.

inline void write_rpqf(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os = detail::open_out(path, true);
  os.write("RPQF", 4);
  detail::write_le<std::uint32_t>(os, 1);
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      detail::write_le<double>(os, m(i, j));
    }
  }
  if (!os) throw std::runtime_error("write_rpqf: write failed for " + path);
}

inline Eigen::MatrixXd read_rpqf(const std::string& path) {
  std::ifstream is = detail::open_in(path, true);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "RPQF", 4) != 0) {
    throw std::runtime_error("read_rpqf: bad magic in " + path);
  }
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != 1) throw std::runtime_error("read_rpqf: unsupported version");
  const auto rows = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(is));
  const auto cols = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(is));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = detail::read_le<double>(is);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Pivot trace CSV: round, proposed, accepted, acceptance_rate.

inline void write_pivot_trace_csv(const std::string& path,
                                  const PivotTrace& trace) {
  std::ofstream os = detail::open_out(path);
  os << "round,proposed,accepted,acceptance_rate\n";
  for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
    const auto& rec = trace.rounds[r];
    const double rate =
        rec.proposed.empty()
            ? 0.0
            : static_cast<double>(rec.accepted.size()) /
                  static_cast<double>(rec.proposed.size());
    os << r << ',' << rec.proposed.size() << ',' << rec.accepted.size() << ','
       << detail::format_double(rate) << '\n';
  }
}

// ---------------------------------------------------------------------------
// KRR model sidecar: key,value metadata block, then one coefficient per line.

struct KrrModelMeta {
  KernelKind kernel = KernelKind::Gaussian;
  double sigma = 1.0;
  double mu = 0.0;
  double target_mean = 0.0;
  Eigen::VectorXd coefficients;
};

inline void write_krr_sidecar(const std::string& path, const KrrModelMeta& meta) {
  std::ofstream os = detail::open_out(path);
  os << "key,value\n";
  os << "kernel," << kernel_kind_name(meta.kernel) << '\n';
  os << "sigma," << detail::format_double(meta.sigma) << '\n';
  os << "mu," << detail::format_double(meta.mu) << '\n';
  os << "target_mean," << detail::format_double(meta.target_mean) << '\n';
  os << "n_coefficients," << meta.coefficients.size() << '\n';
  os << "beta\n";
  for (Eigen::Index i = 0; i < meta.coefficients.size(); ++i) {
    os << detail::format_double(meta.coefficients[i]) << '\n';
  }
}

inline KrrModelMeta read_krr_sidecar(const std::string& path) {
  std::ifstream is = detail::open_in(path);
  KrrModelMeta meta;
  std::string line;
  Eigen::Index n_coeffs = -1;
  if (!std::getline(is, line) || line.rfind("key,value", 0) != 0) {
    throw std::runtime_error("read_krr_sidecar: missing header in " + path);
  }
  while (std::getline(is, line)) {
    if (line == "beta" || line == "beta\r") break;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("read_krr_sidecar: malformed line '" + line + "'");
    }
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (key == "kernel") meta.kernel = kernel_kind_from_name(value);
    else if (key == "sigma") meta.sigma = detail::parse_double(value, "sigma");
    else if (key == "mu") meta.mu = detail::parse_double(value, "mu");
    else if (key == "target_mean") meta.target_mean = detail::parse_double(value, "target_mean");
    else if (key == "n_coefficients") n_coeffs = static_cast<Eigen::Index>(std::stol(value));
  }
  std::vector<double> beta;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    beta.push_back(detail::parse_double(line, "read_krr_sidecar beta"));
  }
  if (n_coeffs >= 0 && n_coeffs != static_cast<Eigen::Index>(beta.size())) {
    throw std::runtime_error("read_krr_sidecar: coefficient count mismatch");
  }
  meta.coefficients = Eigen::Map<Eigen::VectorXd>(
      beta.data(), static_cast<Eigen::Index>(beta.size()));
  return meta;
}

}  // namespace rpchol

#endif  // RPCHOL_IO_HPP

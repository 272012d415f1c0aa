#pragma once

#include "badtime/core.hpp"
#include "badtime/dataset.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace testing {

using badtime::Index;
using badtime::Matrix;
using badtime::Vector;

inline Matrix randn(Index r, Index c, std::mt19937_64& rng, double s = 1.0) {
  return badtime::gaussian_matrix(r, c, s, rng);
}

inline badtime::SeriesMatrix series_from(const Matrix& values, bool normalized = false) {
  badtime::SeriesMatrix m;
  m.values = values;
  for (Index c = 0; c < values.cols(); ++c) m.variable_names.push_back("x" + std::to_string(c));
  m.norm_stats.assign(static_cast<std::size_t>(values.cols()), badtime::NormStats{});
  m.is_normalized = normalized;
  return m;
}

inline double rel_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

// Central differences of f with respect to every entry of x.
template <typename Derived>
Matrix central_diff(Eigen::PlainObjectBase<Derived>& x, const std::function<double()>& f,
                    double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f();
    x.data()[i] = keep - h;
    const double down = f();
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Fresh scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("badtime_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

template <typename F>
badtime::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const badtime::Error& e) {
    return e.kind();
  }
  FAIL("expected a badtime::Error");
  return badtime::ErrorKind::Internal;
}

template <typename F>
std::string error_text(F&& f) {
  try {
    f();
  } catch (const badtime::Error& e) {
    return e.what();
  }
  FAIL("expected a badtime::Error");
  return {};
}

}  // namespace testing

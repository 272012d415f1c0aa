#include "badtime/simsearch.hpp"
#include "helpers.hpp"

#include <set>

using namespace badtime;
using namespace testing;

namespace {

std::vector<WindowIndex> all_anchors(Index T, Index len) {
  std::vector<WindowIndex> out;
  for (Index t = 0; t + len <= T; ++t) out.push_back({t});
  return out;
}

DistanceProfile profile_of(const std::vector<Index>& anchors, const std::vector<double>& d) {
  return {anchors, d};
}

}  // namespace

TEST_CASE("exact match has zero distance") {
  std::mt19937_64 rng(1);
  const auto m = series_from(randn(400, 2, rng));
  const WindowSpec spec{96, 96, 1};
  const Matrix pattern = m.values.block(96, 1, 24, 1);
  const auto w = make_windows(m, spec);
  const auto prof = distance_profile(m, pattern, {1}, w, spec);
  CHECK(prof.anchors.front() == 96);
  CHECK(prof.distances.front() == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("3-4-5 distance") {
  Matrix v(6, 1);
  v << 0, 0, 3, 4, 0, 0;
  const auto m = series_from(v);
  const auto prof = distance_profile(m, Matrix::Zero(2, 1), {0}, {{2}}, WindowSpec{2, 2, 1});
  CHECK(prof.distances[0] == doctest::Approx(5.0));
}

TEST_CASE("FFT profile equals brute force") {
  std::mt19937_64 rng(512);
  const auto m = series_from(randn(512, 2, rng));
  const Matrix pattern = randn(32, 2, rng);
  const auto anchors = all_anchors(512, 32);
  const auto prof = distance_profile(m, pattern, {0, 1}, anchors, WindowSpec{1, 32, 1});
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const double brute = (m.values.middleRows(anchors[k].t, 32) - pattern).norm();
    CHECK(std::abs(prof.distances[k] - brute) <= 1e-6 * brute);
  }
}

TEST_CASE("FFT profile property over random sizes") {
  std::mt19937_64 rng(77);
  for (int inst = 0; inst < 100; ++inst) {
    const Index len = std::uniform_int_distribution<Index>(64, 1024)(rng);
    const Index plen = std::uniform_int_distribution<Index>(4, 64)(rng);
    const auto m = series_from(randn(len, 1, rng));
    const Matrix pattern = randn(plen, 1, rng);
    const Vector dots = sliding_dot_products(m.values.col(0), pattern.col(0));
    REQUIRE(dots.size() == len - plen + 1);
    double worst = 0.0;
    for (Index t = 0; t + plen <= len; ++t) {
      const double brute = m.values.col(0).segment(t, plen).dot(pattern.col(0));
      worst = std::max(worst, std::abs(dots(t) - brute) / std::max(1.0, std::abs(brute)));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("profile argument errors") {
  std::mt19937_64 rng(2);
  const auto m = series_from(randn(300, 3, rng));
  const WindowSpec spec{96, 96, 1};
  const auto w = make_windows(m, spec);
  CHECK(error_kind([&] { distance_profile(m, Matrix::Zero(4, 2), {0}, w, spec); }) ==
        ErrorKind::Shape);
  CHECK(error_kind([&] { distance_profile(m, Matrix::Zero(97, 1), {0}, w, spec); }) ==
        ErrorKind::Length);
}

TEST_CASE("budget arithmetic") {
  const auto b = poison_budget(0.05, 0.5, 100);
  CHECK(b.total == 5);
  CHECK(b.similar == 2);
  CHECK(b.different == 3);
  CHECK(error_kind([] { poison_budget(0.001, 0.5, 100); }) == ErrorKind::Config);
}

TEST_CASE("hybrid selection example") {
  const auto p = profile_of({10, 20, 30, 40, 50}, {5, 1, 9, 3, 7});
  const auto got = select_poisoned_timestamps(p, {0.4, 0.5, 0}, 5);
  CHECK(got == std::vector<Index>{20, 30});
}

TEST_CASE("gamma one takes only the nearest") {
  const auto p = profile_of({1, 2, 3, 4, 5, 6}, {0.6, 0.1, 0.5, 0.2, 0.9, 0.3});
  const auto got = select_poisoned_timestamps(p, {0.5, 1.0, 0}, 6);
  CHECK(got == std::vector<Index>{2, 4, 6});
}

TEST_CASE("selection matches a brute-force sort with ties to the smaller anchor") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Index> anchors;
    std::vector<double> d;
    for (Index t = 0; t < 40; ++t) {
      anchors.push_back(100 + 3 * t);
      d.push_back(static_cast<double>(std::uniform_int_distribution<int>(0, 9)(rng)));
    }
    const double gamma = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const SelectionConfig cfg{0.2, gamma, 0};
    const auto got = select_poisoned_timestamps({anchors, d}, cfg, 40);
    const auto b = poison_budget(0.2, gamma, 40);
    std::vector<std::pair<double, Index>> asc;
    for (std::size_t k = 0; k < d.size(); ++k) asc.push_back({d[k], anchors[k]});
    std::sort(asc.begin(), asc.end());
    std::vector<std::pair<double, Index>> desc;
    for (std::size_t k = 0; k < d.size(); ++k) desc.push_back({-d[k], anchors[k]});
    std::sort(desc.begin(), desc.end());
    std::set<Index> want;
    for (Index k = 0; k < b.similar; ++k) want.insert(asc[static_cast<std::size_t>(k)].second);
    for (std::size_t k = 0; static_cast<Index>(want.size()) < b.total; ++k) want.insert(desc[k].second);
    CHECK(got == std::vector<Index>(want.begin(), want.end()));
  }
}

TEST_CASE("selection cardinality and exclusion gap") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const auto m = series_from(randn(700, 1, rng));
    const WindowSpec spec{24, 24, 1};
    const auto w = make_windows(m, spec);
    const auto prof = distance_profile(m, randn(8, 1, rng), {0}, w, spec);
    const Index radius = std::uniform_int_distribution<Index>(0, 12)(rng);
    const auto got = select_poisoned_timestamps(prof, {0.03, 0.5, radius}, static_cast<Index>(w.size()));
    CHECK(static_cast<Index>(got.size()) == poison_budget(0.03, 0.5, static_cast<Index>(w.size())).total);
    CHECK(std::is_sorted(got.begin(), got.end()));
    for (std::size_t k = 1; k < got.size(); ++k) {
      CHECK(got[k] - got[k - 1] >= std::max<Index>(radius, 1));
    }
  }
}

TEST_CASE("infeasible selection reports how many were found") {
  const auto p = profile_of({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, std::vector<double>(10, 1.0));
  const auto msg = error_text([&] { select_poisoned_timestamps(p, {0.5, 0.5, 4}, 10); });
  CHECK(msg.find("only 3 of 5") != std::string::npos);
  CHECK(error_kind([&] { select_poisoned_timestamps(p, {0.5, 0.5, 4}, 10); }) == ErrorKind::Infeasible);
}

TEST_CASE("larger alpha_t selects a superset for pure strategies") {
  std::mt19937_64 rng(13);
  std::vector<Index> anchors;
  std::vector<double> d;
  for (Index t = 0; t < 200; ++t) {
    anchors.push_back(t);
    d.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }
  for (double gamma : {0.0, 1.0}) {
    std::vector<Index> prev;
    for (double a : {0.01, 0.02, 0.05, 0.1, 0.3}) {
      const auto got = select_poisoned_timestamps({anchors, d}, {a, gamma, 0}, 200);
      CHECK(std::includes(got.begin(), got.end(), prev.begin(), prev.end()));
      prev = got;
    }
  }
}

TEST_CASE("nearest window anchor") {
  std::mt19937_64 rng(21);
  auto m = series_from(randn(400, 1, rng));
  const WindowSpec spec{50, 30, 1};
  const auto w = make_windows(m, spec);
  const Matrix planted = m.values.block(150, 0, 10, 1);
  CHECK(nearest_window_anchor(m, planted, {0}, w, spec) == 150);

  m.values.block(200, 0, 10, 1) = m.values.block(100, 0, 10, 1);
  CHECK(nearest_window_anchor(m, m.values.block(100, 0, 10, 1), {0}, w, spec) == 100);

  const Matrix q = randn(10, 1, rng);
  Index best = -1;
  double best_d = 1e300;
  for (const auto& x : w) {
    const double dd = (m.values.block(x.t, 0, 10, 1) - q).norm();
    if (dd < best_d) {
      best_d = dd;
      best = x.t;
    }
  }
  CHECK(nearest_window_anchor(m, q, {0}, w, spec) == best);
  CHECK(error_kind([&] { nearest_window_anchor(m, q, {0}, {}, spec); }) == ErrorKind::Infeasible);
}

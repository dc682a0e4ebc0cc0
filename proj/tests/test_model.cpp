#include <doctest.h>

#include <cmath>

#include "aoicache/errors.hpp"
#include "aoicache/model.hpp"

using namespace aoicache;

namespace {

Matrix square(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("two-mode chain layout") {
  const auto chain = two_mode_chain(0.9);
  CHECK(chain.probability(0, 0) == 0.9);
  CHECK(chain.probability(0, 1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(chain.probability(1, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(chain.probability(1, 1) == 0.9);

  const auto half = two_mode_chain(0.5);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t s = 0; s < 2; ++s) CHECK(half.probability(r, s) == 0.5);
  }
  const auto low = two_mode_chain(0.2);
  CHECK(low.probability(0, 1) == doctest::Approx(0.8));

  CHECK_THROWS_AS(two_mode_chain(0.0), InvalidParameter);
  CHECK_THROWS_AS(two_mode_chain(1.0), InvalidParameter);
  CHECK_THROWS_AS(two_mode_chain(-0.3), InvalidParameter);
}

TEST_CASE("chain validation") {
  CHECK_THROWS_AS(PopularityChain(Matrix(2, 3)), InvalidParameter);
  CHECK_THROWS_AS(PopularityChain(square({{0.5, 0.6}, {0.5, 0.5}})), InvalidParameter);
  CHECK_THROWS_AS(PopularityChain(square({{1.5, -0.5}, {0.5, 0.5}})), InvalidParameter);
  CHECK_NOTHROW(PopularityChain(square({{1.0}})));
}

TEST_CASE("stationary distributions") {
  for (double q : {0.1, 0.37, 0.5, 0.9}) {
    const auto p = stationary_distribution(two_mode_chain(q));
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(stationary_distribution(PopularityChain(square({{1.0}})))[0] == 1.0);

  const auto p = stationary_distribution(
      PopularityChain(square({{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}})));
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(p[2] == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("reducible and periodic chains are rejected") {
  CHECK_THROWS_AS(stationary_distribution(PopularityChain(square({{1.0, 0.0}, {0.0, 1.0}}))),
                  ModelError);
  CHECK_THROWS_AS(stationary_distribution(PopularityChain(square({{0.0, 1.0}, {1.0, 0.0}}))),
                  ModelError);
  CHECK_THROWS_AS(stationary_distribution(PopularityChain(
                      square({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}))),
                  ModelError);
  // Transient state feeding an absorbing one.
  CHECK_THROWS_AS(stationary_distribution(PopularityChain(square({{0.5, 0.5}, {0.0, 1.0}}))),
                  ModelError);
}

TEST_CASE("file model") {
  CHECK_THROWS_AS(FileModel(two_mode_chain(0.9), {1.0}), InvalidParameter);
  CHECK_THROWS_AS(FileModel(two_mode_chain(0.9), {1.0, 0.0}), InvalidParameter);
  const FileModel file(two_mode_chain(0.9), {0.2, 1.8});
  CHECK(file.min_weight() == 0.2);
  CHECK(mean_weight(file) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zipf weights") {
  CHECK(zipf_weights(1, 0.7)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(zipf_weights(1, 3.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  const auto w = zipf_weights(2, 1.5);
  const double tail = std::pow(2.0, -1.5);
  CHECK(w[0] == doctest::Approx(2.0 / (1.0 + tail)).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(2.0 * tail / (1.0 + tail)).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(1.47759).epsilon(1e-5));
  CHECK(w[1] == doctest::Approx(0.52241).epsilon(1e-4));

  const auto many = zipf_weights(64, 1.5);
  double total = 0.0;
  for (double v : many) total += v;
  CHECK(total == doctest::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("ensembles") {
  const Ensemble zipf = zipf_ensemble(64, 1.5, 0.9, 0.2, 1.8, 8);
  CHECK(zipf.size() == 64);
  CHECK(zipf.bandwidth() == 8);
  for (const FileModel& f : zipf.files()) {
    CHECK(f.weight(1) / f.weight(0) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(f.chain() == two_mode_chain(0.9));
  }
  CHECK_THROWS_AS(zipf_ensemble(4, 1.5, 0.9, 0.2, 1.8, 5), InvalidParameter);
  CHECK_THROWS_AS(zipf_ensemble(4, 1.5, 0.9, 0.2, 1.8, 0), InvalidParameter);

  const FileModel file(two_mode_chain(0.9), {0.2, 1.8});
  const Ensemble one = homogeneous_ensemble(1, 1, file);
  CHECK(one.size() == 1);
  const Ensemble sixteen = homogeneous_ensemble(16, 2, file);
  CHECK(sixteen.size() == 16);
  for (const FileModel& f : sixteen.files()) CHECK(f == file);
  const Ensemble scaled = homogeneous_ensemble(64, 8, file);
  CHECK(scaled.size() / scaled.bandwidth() == 8);
}

}

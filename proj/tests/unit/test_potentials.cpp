#include <doctest.h>

#include <random>

#include "autoedit/potentials.hpp"

using namespace autoedit;

namespace {

Grid row_of(const std::vector<double>& values) {
  Grid g(1, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) g(0, i) = values[i];
  return g;
}

SceneMeta meta_of(int n, std::int64_t frames) {
  SceneMeta meta;
  meta.frame_count = frames;
  meta.fps = {10, 1};
  for (int a = 0; a < n; ++a) meta.actor_ids.push_back(std::string(1, static_cast<char>('A' + a)));
  return meta;
}

TranscriptWord word(double start, double end, std::optional<int> speaker) {
  TranscriptWord w;
  w.text = "w";
  w.start_s = start;
  w.end_s = end;
  w.speaker = speaker;
  return w;
}

}  // namespace

TEST_CASE("saliency ranks") {
  const EditParams p;
  SUBCASE("rank mapping") {
    const auto v = saliency_potential(row_of({0.7, 0.5, 0.1}), p);
    CHECK(v(0, 0) == 1.0);
    CHECK(v(0, 1) == 0.5);
    CHECK(v(0, 2) == 0.0);
  }
  SUBCASE("all zero") {
    const auto v = saliency_potential(row_of({0.0, 0.0, 0.0}), p);
    for (double x : v.data()) CHECK(x == 0.0);
  }
  SUBCASE("tie goes to the first actor") {
    const auto v = saliency_potential(row_of({0.4, 0.4}), p);
    CHECK(v(0, 0) == 1.0);
    CHECK(v(0, 1) == 0.5);
  }
  SUBCASE("normalization") {
    const auto n = normalize_saliency(row_of({0.2, 0.8, 0.4}));
    CHECK(n(0, 1) == 1.0);
    CHECK(n(0, 0) == doctest::Approx(0.25));
  }
}

TEST_CASE("saliency is invariant to positive scaling") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid raw(50, 4);
  for (std::size_t t = 0; t < 50; ++t) {
    for (std::size_t a = 0; a < 4; ++a) raw(t, a) = u(rng) < 0.2 ? 0.0 : u(rng);
  }
  Grid scaled = raw;
  for (std::size_t t = 0; t < 50; ++t) {
    for (std::size_t a = 0; a < 4; ++a) scaled(t, a) *= 37.5;
  }
  const EditParams p;
  const auto v = saliency_potential(raw, p);
  CHECK(v == saliency_potential(scaled, p));
  for (std::size_t t = 0; t < 50; ++t) {
    int top = 0, second = 0;
    for (std::size_t a = 0; a < 4; ++a) {
      top += v(t, a) == p.lambda_sal;
      second += v(t, a) == p.lambda_sal / 2;
    }
    CHECK(top <= 1);
    CHECK(second <= 1);
  }
}

TEST_CASE("speaker potential") {
  const auto meta = meta_of(3, 30);
  const EditParams p;
  const auto s = speaker_potential({word(0.5, 1.0, 1), word(2.0, 2.5, 0), word(2.2, 2.4, 2), word(1.5, 1.8, std::nullopt)},
                                   meta, p);
  CHECK(s(7, 1) == 1.0);
  CHECK(s(7, 0) == 0.0);
  CHECK(s(5, 1) == 1.0);
  CHECK(s(10, 1) == 1.0);
  CHECK(s(11, 1) == 0.0);
  for (std::size_t a = 0; a < 3; ++a) CHECK(s(16, a) == 0.0);
  for (std::size_t a = 0; a < 3; ++a) CHECK(s(13, a) == 0.0);
  CHECK(s(23, 0) == 1.0);
  CHECK(s(23, 2) == 1.0);
}

TEST_CASE("lifting to group shots") {
  SceneMeta meta = meta_of(3, 1);
  const ShotLattice lattice(meta);
  const ScreenOrder order = {{0, 1, 2}};
  auto at = [&](const Grid& g, ActorMask m) { return g(0, static_cast<size_t>(lattice.index_of(ShotId::subset(m)))); };

  const auto a = lift_higher_order(row_of({1.0, 0.5, 0.0}), order, lattice);
  CHECK(at(a, 0b011) == 1.0);
  CHECK(at(a, 0b110) == 0.0);
  CHECK(at(a, 0b111) == 0.0);
  CHECK(a(0, static_cast<size_t>(lattice.master_index())) == 0.0);

  const auto b = lift_higher_order(row_of({0.5, 0.5, 0.5}), order, lattice);
  CHECK(at(b, 0b011) == 1.0);
  CHECK(at(b, 0b110) == 1.0);
  CHECK(at(b, 0b111) == 2.0);
}

TEST_CASE("lifting follows screen order") {
  SceneMeta meta = meta_of(3, 1);
  const ShotLattice lattice(meta);
  // Actor 1 stands on the left, then 2, then 0.
  const ScreenOrder order = {{2, 0, 1}};
  const auto g = lift_higher_order(row_of({0.4, 0.3, 0.9}), order, lattice);
  const auto idx = [&](ActorMask m) { return static_cast<size_t>(lattice.index_of(ShotId::subset(m))); };
  // Full shot drops the leftmost (1) or the rightmost (0): pair(v{0,2}, v{1,2}).
  const double v02 = pair_potential(0.4, 0.9);
  const double v12 = pair_potential(0.3, 0.9);
  CHECK(g(0, idx(0b111)) == pair_potential(v02, v12));
}

TEST_CASE("lifting is monotone") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SceneMeta meta = meta_of(4, 1);
  const ShotLattice lattice(meta);
  const ScreenOrder order = {{0, 1, 2, 3}};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(4);
    for (auto& x : v) x = u(rng);
    auto raised = v;
    const auto which = static_cast<size_t>(trial % 4);
    raised[which] += u(rng);
    const auto lo = lift_higher_order(row_of(v), order, lattice);
    const auto hi = lift_higher_order(row_of(raised), order, lattice);
    for (int s = 0; s < lattice.size(); ++s) {
      if (!lattice[s].is_master() && lattice[s].contains(static_cast<int>(which))) {
        CHECK(hi(0, static_cast<size_t>(s)) >= lo(0, static_cast<size_t>(s)));
      }
    }
  }
}

TEST_CASE("assemble_unary") {
  auto u = assemble_unary(row_of({1.0, 0.0}), row_of({0.5, 0.0}), row_of({1.0, 0.0}));
  CHECK(u.u(0, 0) == 2.5);
  CHECK(u.u(0, 1) == 0.0);
  CHECK_THROWS_AS(assemble_unary(row_of({1.0, 0.0}), Grid(0, 2), row_of({1.0, 0.0})), Error);
}

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "driftsync/learner.hpp"
#include "driftsync/rkhs.hpp"
#include "driftsync/rng.hpp"
#include "oracle.hpp"

using namespace driftsync;

namespace {

std::vector<double> P(std::initializer_list<double> v) { return v; }

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool same_model(const KernelModel& a, const KernelModel& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.coeff(i) != b.coeff(i)) return false;
    if (a.support(i).birth != b.support(i).birth) return false;
    const auto pa = a.point(i), pb = b.point(i);
    for (std::size_t j = 0; j < pa.size(); ++j)
      if (pa[j] != pb[j]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("loss closed forms and the hinge kink") {
  CHECK(loss_value(LossKind::hinge, 2.0, 1.0) == 0.0);
  CHECK(loss_value(LossKind::hinge, 0.0, 1.0) == 1.0);
  CHECK(loss_value(LossKind::hinge, 0.5, -1.0) == 1.5);
  CHECK(loss_value(LossKind::squared, 0.5, 1.0) == 0.25);
  CHECK(loss_value(LossKind::squared, -1.0, 2.0) == 9.0);

  CHECK(loss_subgradient(LossKind::hinge, 0.5, 1.0) == -1.0);
  CHECK(loss_subgradient(LossKind::hinge, -0.2, -1.0) == 1.0);
  CHECK(loss_subgradient(LossKind::hinge, 2.0, 1.0) == 0.0);
  // at the kink the margin is met, so the step must vanish
  CHECK(loss_subgradient(LossKind::hinge, 1.0, 1.0) == 0.0);
  CHECK(loss_subgradient(LossKind::squared, 0.5, 1.0) == -1.0);
  CHECK(loss_subgradient(LossKind::squared, 1.0, 1.0) == 0.0);

  CHECK_NOTHROW(validate_label(LossKind::hinge, 1.0));
  CHECK_NOTHROW(validate_label(LossKind::hinge, -1.0));
  CHECK_THROWS_AS(validate_label(LossKind::hinge, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate_label(LossKind::hinge, 0.0), std::invalid_argument);
  CHECK_NOTHROW(validate_label(LossKind::squared, 0.7));
}

TEST_CASE("learner parameter validation") {
  LearnerParams p;
  CHECK_NOTHROW(p.validate());

  p.learn_rate = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.learn_rate = std::nan("");
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.learn_rate = 0.0;  // degenerate but legal: the learner that never moves
  CHECK_NOTHROW(p.validate());

  p.learn_rate = 0.5;
  p.reg = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.reg = 0.0;

  p.compression.kind = CompressionKind::truncate;
  p.compression.budget = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.compression.budget = 1;
  CHECK_NOTHROW(p.validate());

  p.compression.kind = CompressionKind::project;
  p.compression.tolerance = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.compression.tolerance = -0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.compression.tolerance = 0.5;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("subgradient step: frozen single-step values") {
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  LearnerParams params;
  params.learn_rate = 0.5;
  const LossSpec hinge{LossKind::hinge};

  SUBCASE("first hinge step appends learn_rate * y") {
    KernelModel f{spec};
    auto out = kernel_sgd_update(f, P({0.3, -0.7}), 1.0, params, hinge, {1, 0});
    CHECK(out.prediction == 0.0);
    CHECK(out.loss == 1.0);
    CHECK(out.added_sv);
    CHECK(out.model.size() == 1);
    CHECK(out.model.coeff(0) == 0.5);
    CHECK(out.model.point(0)[0] == 0.3);
    CHECK(out.model.support(0).birth == Birth{1, 0});
    // k(x,x) = 1 makes the drift exactly the new coefficient
    CHECK(out.drift == 0.5);
    CHECK(out.compression_error == 0.0);
  }

  SUBCASE("met margin is a no-op without regularisation") {
    KernelModel f{spec};
    f.add({P({1.0, 2.0}), {1, 0}}, 2.0);
    auto out = kernel_sgd_update(f, P({1.0, 2.0}), 1.0, params, hinge, {2, 0});
    CHECK(out.prediction == 2.0);
    CHECK(out.loss == 0.0);
    CHECK_FALSE(out.added_sv);
    CHECK(same_model(out.model, f));
    CHECK(out.drift == 0.0);
  }

  SUBCASE("met margin with regularisation only shrinks") {
    params.reg = 0.5;  // scale factor 1 - 0.5*0.5 = 0.75 exactly
    KernelModel f{spec};
    f.add({P({1.0, 2.0}), {1, 0}}, 2.0);
    auto out = kernel_sgd_update(f, P({1.0, 2.0}), 1.0, params, hinge, {2, 0});
    CHECK(out.loss == 0.0);
    CHECK_FALSE(out.added_sv);
    CHECK(out.model.size() == 1);
    CHECK(out.model.coeff(0) == 1.5);
    CHECK(out.drift == 0.5);  // |2 - 1.5| * sqrt(k(x,x))
  }

  SUBCASE("regularisation scales the old mass before the append") {
    params.reg = 0.5;
    KernelModel f{spec};
    f.add({P({0.0, 0.0}), {1, 0}}, 1.0);
    // 100 units away the gaussian underflows to exactly 0, so the
    // prediction, loss and subgradient are all exact
    auto out = kernel_sgd_update(f, P({100.0, 0.0}), -1.0, params, hinge, {2, 0});
    CHECK(out.prediction == 0.0);
    CHECK(out.loss == 1.0);
    CHECK(out.added_sv);
    CHECK(out.model.size() == 2);
    CHECK(out.model.coeff(0) == 0.75);
    CHECK(out.model.coeff(1) == -0.5);
  }

  SUBCASE("squared loss step") {
    const LossSpec sq{LossKind::squared};
    KernelModel f{spec};
    auto out = kernel_sgd_update(f, P({0.2, 0.1}), 0.5, params, sq, {1, 0});
    CHECK(out.prediction == 0.0);
    CHECK(out.loss == 0.25);
    // g = 2(0 - 0.5) = -1, coefficient = 0.5
    CHECK(out.model.coeff(0) == 0.5);
    CHECK(out.drift == 0.5);
  }

  SUBCASE("hinge rejects labels off the sign alphabet") {
    KernelModel f{spec};
    CHECK_THROWS_AS(kernel_sgd_update(f, P({0.0, 0.0}), 0.5, params, hinge, {1, 0}),
                    std::invalid_argument);
  }
}

TEST_CASE("a zero coefficient is never appended") {
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const LossSpec hinge{LossKind::hinge};

  SUBCASE("learn_rate 0 leaves even a lossy round untouched") {
    LearnerParams params;
    params.learn_rate = 0.0;
    KernelModel f{spec};
    auto out = kernel_sgd_update(f, P({0.3, 0.4}), 1.0, params, hinge, {1, 0});
    CHECK(out.loss == 1.0);  // the loss is still charged
    CHECK(out.model.empty());
    CHECK_FALSE(out.added_sv);
    CHECK(out.drift == 0.0);
  }

  SUBCASE("the kink produces no support vector") {
    LearnerParams params;
    params.learn_rate = 0.5;
    KernelModel f{spec};
    f.add({P({0.5, 0.5}), {1, 0}}, 1.0);
    // prediction exactly 1.0: margin met with equality
    auto out = kernel_sgd_update(f, P({0.5, 0.5}), 1.0, params, hinge, {2, 0});
    CHECK(out.prediction == 1.0);
    CHECK(out.loss == 0.0);
    CHECK(out.model.size() == 1);
    CHECK_FALSE(out.added_sv);
  }
}

TEST_CASE("subgradient step agrees with the dense oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const KernelSpec spec = trial % 3 == 0   ? KernelSpec::linear()
                            : trial % 3 == 1 ? KernelSpec::gaussian(0.9)
                                             : KernelSpec::polynomial(2, 1.0);
    KernelModel f = oracle::random_model(rng, spec, 2 + trial % 9, 3);
    const auto x = oracle::random_point(rng, 3);
    const bool sq = trial % 2 == 0;
    const double y = sq ? rng.uniform(-1.0, 1.0) : (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    LearnerParams params;
    params.learn_rate = rng.uniform(0.05, 0.8);
    params.reg = trial % 4 == 0 ? rng.uniform(0.0, 0.5) : 0.0;
    const LossSpec loss{sq ? LossKind::squared : LossKind::hinge};

    const oracle::Expansion before = oracle::flatten(f);
    auto out = kernel_sgd_update(f, x, y, params, loss, {100, 0});

    CHECK(close(out.prediction, oracle::predict(spec, before, x), 1e-12));
    CHECK(out.loss == loss_value(loss.kind, out.prediction, y));
    const double d2 = oracle::dist_sq(spec, before, oracle::flatten(out.model));
    CHECK(close(out.drift * out.drift, d2 < 0.0 ? 0.0 : d2, 1e-9));
  }
}

TEST_CASE("truncation drops the oldest supports with the exact error") {
  const KernelSpec spec = KernelSpec::gaussian(1.0);

  SUBCASE("within budget nothing happens") {
    KernelModel f{spec};
    f.add({P({0.0, 1.0}), {1, 0}}, 0.8);
    f.add({P({1.0, 0.0}), {2, 0}}, -0.6);
    auto [kept, eps] = truncate(f, 2);
    CHECK(same_model(kept, f));
    CHECK(eps == 0.0);
    auto [kept5, eps5] = truncate(f, 5);
    CHECK(same_model(kept5, f));
    CHECK(eps5 == 0.0);
  }

  SUBCASE("oldest birth goes first, error is the dropped norm") {
    KernelModel f{spec};
    f.add({P({0.0, 1.0}), {1, 0}}, 0.8);
    f.add({P({1.0, 0.0}), {2, 0}}, -0.6);
    auto [kept, eps] = truncate(f, 1);
    CHECK(kept.size() == 1);
    CHECK(kept.point(0)[0] == 1.0);
    CHECK(kept.coeff(0) == -0.6);
    CHECK(eps == 0.8);  // |a| sqrt(k(x,x)) for one dropped point
  }

  SUBCASE("birth order beats stored order") {
    KernelModel f{spec};
    f.add({P({0.0, 0.0}), {9, 0}}, 0.1);
    f.add({P({1.0, 0.0}), {2, 0}}, 0.2);
    f.add({P({2.0, 0.0}), {5, 0}}, 0.3);
    auto [kept, eps] = truncate(f, 2);
    CHECK(kept.size() == 2);
    // births 2 and 5 survive, original stored order preserved
    CHECK(kept.point(0)[0] == 0.0);
    CHECK(kept.point(1)[0] == 2.0);
    CHECK(eps == 0.2);
  }

  SUBCASE("equal births fall back to stored position") {
    KernelModel f{spec};
    f.add({P({0.0, 0.0}), {5, 0}}, 0.4);
    f.add({P({1.0, 0.0}), {5, 0}}, 0.5);
    f.add({P({2.0, 0.0}), {5, 0}}, 0.6);
    auto [kept, eps] = truncate(f, 2);
    CHECK(kept.size() == 2);
    CHECK(kept.point(0)[0] == 1.0);
    CHECK(kept.point(1)[0] == 2.0);
    CHECK(eps == 0.4);
  }

  SUBCASE("error equals the oracle distance between full and trimmed") {
    Rng rng(211);
    for (int trial = 0; trial < 12; ++trial) {
      const KernelSpec k = trial % 2 == 0 ? KernelSpec::gaussian(0.8)
                                          : KernelSpec::polynomial(2, 0.5);
      KernelModel f{k};
      for (int i = 0; i < 30; ++i)  // shuffled births exercise the sort
        f.add({oracle::random_point(rng, 3), Birth{(i * 17) % 31, i % 3}},
              rng.uniform(-1.0, 1.0));
      auto [kept, eps] = truncate(f, 20);
      CHECK(kept.size() == 20);
      const double d2 = oracle::dist_sq(k, oracle::flatten(f), oracle::flatten(kept));
      CHECK(close(eps * eps, d2 < 0.0 ? 0.0 : d2, 1e-10));
    }
  }

  SUBCASE("budget below one is a usage error") {
    KernelModel f{spec};
    f.add({P({0.0, 0.0}), {1, 0}}, 1.0);
    CHECK_THROWS_AS(truncate(f, 0), std::invalid_argument);
  }
}

TEST_CASE("projection folds the newest support onto the rest") {
  SUBCASE("a single support has nothing to fold onto") {
    KernelModel f{KernelSpec::gaussian(1.0)};
    f.add({P({0.2, 0.3}), {1, 0}}, 0.7);
    auto [g, eps] = project_newest(f, 1e9);
    CHECK(same_model(g, f));
    CHECK(eps == 0.0);
  }

  SUBCASE("an empty model is a usage error") {
    KernelModel f{KernelSpec::gaussian(1.0)};
    CHECK_THROWS_AS(project_newest(f, 1.0), std::invalid_argument);
  }

  SUBCASE("errors above tolerance decline the fold") {
    KernelModel f{KernelSpec::gaussian(1.0)};
    f.add({P({0.0, 0.0}), {1, 0}}, 0.5);
    // far away: k to the basis underflows, residual is k(s,s) = 1
    f.add({P({100.0, 0.0}), {2, 0}}, 0.8);
    auto [g, eps] = project_newest(f, 0.4);  // error would be 0.8
    CHECK(same_model(g, f));
    CHECK(eps == 0.0);
  }

  SUBCASE("a point in the span folds exactly") {
    // linear kernel: (2,0) lies in the span of (1,0)
    KernelModel f{KernelSpec::linear()};
    f.add({P({1.0, 0.0}), {1, 0}}, 0.5);
    f.add({P({0.0, 1.0}), {2, 0}}, -0.25);
    f.add({P({2.0, 0.0}), {3, 0}}, 0.3);
    auto [g, eps] = project_newest(f, 1e-3);
    CHECK(g.size() == 2);
    CHECK(close(g.coeff(0), 1.1, 1e-9));  // 0.5 + 0.3 * 2
    CHECK(close(g.coeff(1), -0.25, 1e-12));
    CHECK(eps >= 0.0);
    CHECK(eps < 1e-4);
    for (double t : {-1.0, 0.3, 2.0}) {  // the function itself survives
      const std::vector<double> probe{t, 1.0 - t};
      CHECK(close(predict(g, probe), predict(f, probe), 1e-8));
    }
  }

  SUBCASE("the newest is the largest (birth, position) pair") {
    KernelModel f{KernelSpec::gaussian(1.0)};
    f.add({P({0.0, 0.0}), {5, 0}}, 0.4);
    f.add({P({1.0, 0.0}), {9, 0}}, -0.3);  // newest despite middle position
    f.add({P({0.0, 1.0}), {7, 0}}, 0.2);
    auto [g, eps] = project_newest(f, 1e100);
    CHECK(g.size() == 2);
    CHECK(g.find(P({0.0, 0.0})).has_value());
    CHECK(g.find(P({0.0, 1.0})).has_value());
    CHECK_FALSE(g.find(P({1.0, 0.0})).has_value());
    CHECK(eps > 0.0);
  }

  SUBCASE("fold coefficients and error match the dense solve") {
    Rng rng(307);
    for (int trial = 0; trial < 20; ++trial) {
      const KernelSpec spec =
          trial % 2 == 0 ? KernelSpec::gaussian(1.0) : KernelSpec::linear();
      const int n = trial % 2 == 0 ? 3 + trial % 6 : 3;  // keep linear grams PD
      KernelModel f = oracle::random_model(rng, spec, n, 3);

      oracle::Expansion flat = oracle::flatten(f);
      const double alpha = flat.back().a;
      const std::vector<double> s = flat.back().x;
      oracle::Expansion basis(flat.begin(), flat.end() - 1);
      auto [beta, r2] = oracle::project_system(spec, basis, s, 1e-10);

      auto [g, eps] = project_newest(f, 1e100);  // force the fold
      REQUIRE(g.size() == static_cast<std::size_t>(n) - 1);
      for (int i = 0; i < n - 1; ++i)
        CHECK(close(g.coeff(i), basis[static_cast<std::size_t>(i)].a + alpha * beta(i), 1e-8));
      CHECK(close(eps, std::abs(alpha) * std::sqrt(r2), 1e-8));

      // the reported error is the true distance moved, up to the jitter
      const double true_d2 = oracle::dist_sq(spec, flat, oracle::flatten(g));
      CHECK(std::abs(eps * eps - (true_d2 < 0.0 ? 0.0 : true_d2)) <= 1e-7);
    }
  }
}

TEST_CASE("update with compression") {
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const LossSpec hinge{LossKind::hinge};

  SUBCASE("kind none is exactly the plain step") {
    Rng rng(401);
    for (int trial = 0; trial < 10; ++trial) {
      KernelModel f = oracle::random_model(rng, spec, 4, 2);
      const auto x = oracle::random_point(rng, 2);
      LearnerParams params;
      params.learn_rate = 0.3;
      auto a = kernel_sgd_update(f, x, 1.0, params, hinge, {50, 0});
      auto b = update_with_compression(f, x, 1.0, params, hinge, {50, 0});
      CHECK(same_model(a.model, b.model));
      CHECK(a.loss == b.loss);
      CHECK(a.drift == b.drift);
      CHECK(b.compression_error == 0.0);
    }
  }

  SUBCASE("truncation keeps the budget and reports whole-step drift") {
    LearnerParams params;
    params.learn_rate = 0.4;
    params.compression.kind = CompressionKind::truncate;
    params.compression.budget = 12;
    Rng rng(409);
    KernelModel f{spec};
    oracle::Expansion before;
    for (int t = 1; t <= 200; ++t) {
      const auto x = oracle::random_point(rng, 2);
      const double y = (x[0] * x[1] > 0.0) ? 1.0 : -1.0;
      before = oracle::flatten(f);
      auto out = update_with_compression(f, x, y, params, hinge, {t, 0});
      CHECK(out.model.size() <= 12);
      if (t % 25 == 0) {
        const double d2 = oracle::dist_sq(spec, before, oracle::flatten(out.model));
        CHECK(close(out.drift * out.drift, d2 < 0.0 ? 0.0 : d2, 1e-9));
      }
      f = std::move(out.model);
    }
    CHECK(f.size() == 12);  // this stream overflows the budget quickly
  }

  SUBCASE("a repeated point merges instead of projecting") {
    LearnerParams params;
    params.learn_rate = 0.25;
    params.compression.kind = CompressionKind::project;
    params.compression.tolerance = 1e-12;
    KernelModel f{spec};
    f.add({P({0.4, 0.6}), {1, 0}}, 0.5);
    auto out = update_with_compression(f, P({0.4, 0.6}), 1.0, params, hinge, {2, 0});
    CHECK(out.prediction == 0.5);
    CHECK_FALSE(out.added_sv);  // merged into the existing entry
    CHECK(out.model.size() == 1);
    CHECK(out.model.coeff(0) == 0.75);
    CHECK(out.model.support(0).birth == Birth{1, 0});
    CHECK(out.compression_error == 0.0);
    CHECK(out.drift == 0.25);
  }

  SUBCASE("a redundant new point folds away") {
    LearnerParams params;
    params.learn_rate = 0.5;
    params.compression.kind = CompressionKind::project;
    params.compression.tolerance = 1e-3;
    KernelModel f{KernelSpec::linear()};
    f.add({P({1.0, 0.0}), {1, 0}}, 0.2);
    auto out = update_with_compression(f, P({2.0, 0.0}), 1.0, params, hinge, {2, 0});
    CHECK(out.prediction == 0.4);
    CHECK(out.added_sv);  // appended, then folded back down
    CHECK(out.model.size() == 1);
    CHECK(out.model.point(0)[0] == 1.0);
    CHECK(close(out.model.coeff(0), 1.2, 1e-9));  // 0.2 + 0.5 * 2
    CHECK(out.compression_error > 0.0);
    CHECK(out.compression_error < 1e-4);
  }

  SUBCASE("truncation error shrinks as the budget grows") {
    const LearnerParams base = [] {
      LearnerParams p;
      p.learn_rate = 0.4;
      p.compression.kind = CompressionKind::truncate;
      return p;
    }();
    auto total_error = [&](int budget) {
      LearnerParams params = base;
      params.compression.budget = budget;
      Rng rng(431);
      KernelModel f{spec};
      double total = 0.0;
      for (int t = 1; t <= 200; ++t) {
        const auto x = oracle::random_point(rng, 2);
        const double y = (x[0] * x[1] > 0.0) ? 1.0 : -1.0;
        auto out = update_with_compression(f, x, y, params, hinge, {t, 0});
        total += out.compression_error;
        f = std::move(out.model);
      }
      return total;
    };
    const double e10 = total_error(10), e20 = total_error(20), e40 = total_error(40);
    CHECK(e40 <= e20);
    CHECK(e20 <= e10);
    CHECK(e10 > 0.0);
  }
}

TEST_CASE("linear subgradient step") {
  LearnerParams params;
  params.learn_rate = 1.0;
  const LossSpec hinge{LossKind::hinge};

  SUBCASE("met margin leaves the weights untouched") {
    LinearModel w{{1.0, 0.0}};
    auto out = linear_sgd_update(w, P({2.0, 0.0}), 1.0, params, hinge);
    CHECK(out.prediction == 2.0);
    CHECK(out.loss == 0.0);
    CHECK(out.model.weights == w.weights);
    CHECK(out.drift == 0.0);
  }

  SUBCASE("first step writes learn_rate * y * x") {
    LinearModel w = LinearModel::zeros(2);
    auto out = linear_sgd_update(w, P({1.0, 0.0}), 1.0, params, hinge);
    CHECK(out.loss == 1.0);
    CHECK(out.model.weights[0] == 1.0);
    CHECK(out.model.weights[1] == 0.0);
    CHECK(out.drift == 1.0);
  }

  SUBCASE("squared loss pulls toward the target") {
    params.learn_rate = 0.1;
    LinearModel w{{0.5, 0.0}};
    auto out = linear_sgd_update(w, P({1.0, 0.0}), 2.0, params, {LossKind::squared});
    CHECK(out.prediction == 0.5);
    CHECK(out.loss == 2.25);
    CHECK(close(out.model.weights[0], 0.8, 1e-15));  // g = -3
    CHECK(close(out.drift, 0.3, 1e-15));
  }

  SUBCASE("matches plain vector algebra") {
    Rng rng(503);
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 2 + trial % 5;
      LinearModel w{oracle::random_point(rng, d)};
      const auto x = oracle::random_point(rng, d);
      const double y = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      params.learn_rate = rng.uniform(0.05, 0.9);
      params.reg = trial % 3 == 0 ? rng.uniform(0.0, 0.4) : 0.0;

      auto out = linear_sgd_update(w, x, y, params, hinge);
      const double g = loss_subgradient(LossKind::hinge, predict(w, x), y);
      double drift2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double v = (1.0 - params.learn_rate * params.reg) * w.weights[i] -
                         params.learn_rate * g * x[i];
        CHECK(close(out.model.weights[i], v, 1e-12));
        drift2 += (v - w.weights[i]) * (v - w.weights[i]);
      }
      CHECK(close(out.drift, std::sqrt(drift2), 1e-12));
    }
  }

  SUBCASE("dimension mismatch is a usage error") {
    LinearModel w = LinearModel::zeros(3);
    CHECK_THROWS_AS(linear_sgd_update(w, P({1.0}), 1.0, params, hinge),
                    std::invalid_argument);
  }
}

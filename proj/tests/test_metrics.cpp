#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mimic/error.hpp"
#include "mimic/metrics.hpp"
#include "mimic/report.hpp"
#include "mimic/rng.hpp"
#include "oracles.hpp"

using namespace mimic;
using mimic::test::oracle::mann_whitney;

namespace {

struct Instance {
  std::vector<Label> y_true;
  std::vector<Label> y_pred;
  std::vector<double> scores;
};

Instance random_instance(Rng& rng, std::size_t n) {
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    in.y_true.push_back(static_cast<Label>(i < 2 ? i : rng.uniform_index(2)));
    in.y_pred.push_back(static_cast<Label>(rng.uniform_index(2)));
    in.scores.push_back(static_cast<double>(rng.uniform_index(20)) / 4.0);
  }
  return in;
}

}  // namespace

TEST_CASE("confusion counting") {
  const std::vector<Label> t{1, 1, 0, 0};
  const std::vector<Label> p{1, 0, 0, 0};
  const auto c = confusion(t, p, 1);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 0);
  const auto same = confusion(t, t, 1);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  const std::vector<Label> flipped{0, 0, 1, 1};
  const auto f = confusion(t, flipped, 1);
  CHECK(f.tp == 0);
  CHECK(f.tn == 0);
  const std::vector<Label> short_pred{1};
  CHECK_THROWS_AS(confusion(t, short_pred, 1), Error);
  CHECK_THROWS_AS(confusion({}, {}, 1), Error);
}

TEST_CASE("formula examples") {
  const ConfusionMatrix a{2, 1, 3, 0};
  CHECK(accuracy(a) == doctest::Approx(5.0 / 6.0));
  CHECK(accuracy(ConfusionMatrix{3, 0, 4, 0}) == 1.0);
  CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), Error);

  const ConfusionMatrix b{1, 0, 0, 1};
  CHECK(precision(b) == 1.0);
  CHECK(recall(b) == 0.5);
  CHECK(f1(b) == doctest::Approx(2.0 * 0.5 / 1.5));

  const auto s = class_scores(ConfusionMatrix{0, 0, 5, 2});
  CHECK(s.precision == 0.0);
  CHECK(s.precision_undefined);
  CHECK_FALSE(s.recall_undefined);
  CHECK(s.f1 == 0.0);
}

TEST_CASE("metrics stay in [0,1] and f1 is the harmonic mean") {
  Rng rng(1);
  for (int i = 0; i < 5000; ++i) {
    ConfusionMatrix c{rng.uniform_index(6), rng.uniform_index(6), rng.uniform_index(6), rng.uniform_index(6)};
    if (c.total() == 0) {
      continue;
    }
    const double p = precision(c);
    const double r = recall(c);
    for (const double v : {accuracy(c), p, r, f1(c)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    if (p + r == 0.0) {
      CHECK(f1(c) == 0.0);
    } else {
      CHECK(std::abs(f1(c) - 2.0 * p * r / (p + r)) < 1e-12);
    }
  }
}

TEST_CASE("macro metrics") {
  const std::vector<Label> y{0, 1, 0, 1};
  const auto perfect = macro_metrics(y, y, 2);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro.precision == 1.0);
  CHECK(perfect.macro.recall == 1.0);
  CHECK(perfect.macro.f1 == 1.0);

  const std::vector<Label> ones{1, 1, 1, 1};
  const auto single = macro_metrics(y, ones, 2);
  CHECK(single.macro.recall == 0.5);
  CHECK(single.per_class[0].precision_undefined);

  // Relabeling-symmetric instances: macro equals the positive-class scores.
  for (unsigned t = 0; t < 16; ++t) {
    for (unsigned p = 0; p < 16; ++p) {
      std::vector<Label> yt(4);
      std::vector<Label> yp(4);
      for (int i = 0; i < 4; ++i) {
        yt[i] = static_cast<Label>((t >> i) & 1U);
        yp[i] = static_cast<Label>((p >> i) & 1U);
      }
      std::vector<Label> ft(4);
      std::vector<Label> fp(4);
      for (int i = 0; i < 4; ++i) {
        ft[i] = 1 - yt[i];
        fp[i] = 1 - yp[i];
      }
      const auto r = macro_metrics(yt, yp, 2);
      const auto flipped = macro_metrics(ft, fp, 2);
      if (r.positive_class == flipped.positive_class) {
        CHECK(r.macro.precision == doctest::Approx(r.positive_class.precision));
        CHECK(r.macro.recall == doctest::Approx(r.positive_class.recall));
        CHECK(r.macro.f1 == doctest::Approx(r.positive_class.f1));
      }
    }
  }

  const std::vector<Label> three_t{0, 1, 2, 2};
  const std::vector<Label> three_p{0, 2, 2, 1};
  const auto m = macro_metrics(three_t, three_p, 3);
  CHECK(m.per_class.size() == 3);
  CHECK(m.accuracy == 0.5);
  CHECK(m.macro.recall == doctest::Approx((1.0 + 0.0 + 0.5) / 3.0));
}

TEST_CASE("roc examples") {
  const std::vector<Label> y{0, 0, 1, 1};
  const std::vector<double> perfect{0.1, 0.2, 0.8, 0.9};
  const auto c = roc(perfect, y);
  CHECK(c.auc == 1.0);
  CHECK(std::isinf(c.points.front().threshold));
  CHECK(c.points.front().fpr == 0.0);
  CHECK(c.points.front().tpr == 0.0);
  CHECK(c.points.back().fpr == 1.0);
  CHECK(c.points.back().tpr == 1.0);

  const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
  const auto diag = roc(flat, y);
  CHECK(diag.auc == 0.5);
  CHECK(diag.points.size() == 2);

  const std::vector<Label> one_class{1, 1};
  const std::vector<double> s2{0.1, 0.2};
  CHECK_THROWS_AS(roc(s2, one_class), Error);

  const auto csv = roc_to_csv(c);
  CHECK(csv.rfind("threshold,fpr,tpr\ninf,0,0\n", 0) == 0);
  CHECK(to_json(c)["points"][0][2].is_null());
}

TEST_CASE("roc auc equals the pairwise statistic") {
  Rng rng(2);
  for (int k = 0; k < 300; ++k) {
    const auto in = random_instance(rng, 2 + rng.uniform_index(60));
    const auto c = roc(in.scores, in.y_true);
    CHECK(std::abs(c.auc - mann_whitney(in.scores, in.y_true)) < 1e-9);
    CHECK(std::abs(c.auc - trapezoid_auc(c.points)) < 1e-12);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
      CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
      CHECK(c.points[i].threshold < c.points[i - 1].threshold);
    }
  }
}

TEST_CASE("invariance properties") {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto in = random_instance(rng, 5 + rng.uniform_index(40));
    const auto base = macro_metrics(in.y_true, in.y_pred, 2);
    const auto curve = roc(in.scores, in.y_true);

    // Simultaneous permutation.
    std::vector<std::size_t> perm(in.y_true.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span(perm));
    Instance p;
    for (const auto i : perm) {
      p.y_true.push_back(in.y_true[i]);
      p.y_pred.push_back(in.y_pred[i]);
      p.scores.push_back(in.scores[i]);
    }
    CHECK(macro_metrics(p.y_true, p.y_pred, 2) == base);
    CHECK(roc(p.scores, p.y_true) == curve);

    // Strictly increasing transform of scores.
    std::vector<double> t;
    for (const double s : in.scores) {
      t.push_back(std::exp(3.0 * s) - 7.0);
    }
    const auto moved = roc(t, in.y_true);
    CHECK(moved.auc == curve.auc);
    REQUIRE(moved.points.size() == curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      CHECK(moved.points[i].fpr == curve.points[i].fpr);
      CHECK(moved.points[i].tpr == curve.points[i].tpr);
    }
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mcorr/data.hpp"
#include "mcorr/generators.hpp"

using namespace mcorr;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mcorr::Error thrown";
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(EvalTransform, InterpolatesBetweenKnots) {
  const EmpiricalTransform t({{0, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(eval_transform(t, 0.5), 0.5);
  const EmpiricalTransform u({{0, 0}, {2, 4}});
  EXPECT_DOUBLE_EQ(eval_transform(u, 1.0), 2.0);
}

TEST(EvalTransform, ExtrapolationRules) {
  const EmpiricalTransform hold({{0, 0}, {1, 1}}, Extrapolation::constant);
  EXPECT_DOUBLE_EQ(hold(2.0), 1.0);
  EXPECT_DOUBLE_EQ(hold(-3.0), 0.0);
  const EmpiricalTransform lin = hold.with_extrapolation(Extrapolation::linear);
  EXPECT_DOUBLE_EQ(lin(2.0), 2.0);
  EXPECT_DOUBLE_EQ(lin(-3.0), -3.0);
}

TEST(EvalTransform, KnotInputsReturnKnotOutputsExactly) {
  const EmpiricalTransform t({{-1.3, 0.1}, {0.7, 0.30000000000000004}, {2.9, -7.25}});
  for (const Knot& k : t.knots()) EXPECT_EQ(t(k.input), k.output);
}

TEST(EvalTransform, NeedsTwoKnots) {
  const EmpiricalTransform t({{0, 1}});
  EXPECT_EQ(kind_of([&] { (void)eval_transform(t, 0.0); }), ErrorKind::TooFewKnots);
}

TEST(EmpiricalTransform, RejectsUnsortedKnots) {
  EXPECT_EQ(kind_of([] { EmpiricalTransform({{1, 0}, {1, 1}}); }), ErrorKind::NotSorted);
  EXPECT_EQ(kind_of([] { EmpiricalTransform({{2, 0}, {1, 1}}); }), ErrorKind::NotSorted);
}

TEST(EmpiricalTransform, FromPairsMergesTiesByAveraging) {
  const std::vector<double> in{3, 1, 1, 2}, out{9, 0, 2, 5};
  const auto t = EmpiricalTransform::from_pairs(in, out);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.knots()[0].input, 1.0);
  EXPECT_EQ(t.knots()[0].output, 1.0);
  EXPECT_EQ(t.knots()[1].output, 5.0);
  EXPECT_EQ(t.knots()[2].output, 9.0);
}

TEST(EmpiricalTransform, MonotoneOutputsGiveMonotoneEvaluation) {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Knot> knots;
    double x = 0.0, y = 0.0;
    for (int i = 0; i < 8; ++i) {
      x += 0.1 + rng.uniform01();
      y += rng.uniform01() < 0.3 ? 0.0 : rng.uniform01();
      knots.push_back({x, y});
    }
    const EmpiricalTransform t(knots, rep % 2 ? Extrapolation::linear : Extrapolation::constant);
    double prev = t(-1.0);
    for (double v = -1.0; v <= x + 1.0; v += 0.01) {
      const double cur = t(v);
      EXPECT_LE(prev, cur + 1e-15);
      prev = cur;
    }
  }
}

TEST(Standardize, CentersAndScalesToUnitRms) {
  const std::vector<double> v{1, 2, 3};
  const auto s = standardize(v);
  EXPECT_NEAR(s[0], -std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
  EXPECT_NEAR(s[2], std::sqrt(1.5), 1e-12);
}

TEST(Standardize, IsIdempotent) {
  Rng rng(11);
  std::vector<double> v(1000);
  for (double& x : v) x = 40.0 + 3.0 * rng.normal();
  const auto once = standardize(v);
  const auto twice = standardize(once);
  EXPECT_NEAR(mean(once), 0.0, 1e-12);
  EXPECT_NEAR(mean_square(once), 1.0, 1e-12);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-12);
}

TEST(Standardize, RejectsConstantInput) {
  const std::vector<double> v{5, 5, 5};
  EXPECT_EQ(kind_of([&] { (void)standardize(v); }), ErrorKind::ConstantInput);
}

TEST(SampleTable, ValidatesOnConstruction) {
  EXPECT_EQ(kind_of([] { SampleTable({1, 2}, {{1, 2}}); }), ErrorKind::TooFewSamples);
  EXPECT_EQ(kind_of([] { SampleTable({1, 2, 3}, {{4, 4, 4}}); }), ErrorKind::ConstantColumn);
  EXPECT_EQ(kind_of([] { SampleTable({1, 2, NAN}, {{1, 2, 3}}); }), ErrorKind::NonFinite);
  EXPECT_EQ(kind_of([] { SampleTable({1, 2, 3}, {{1, 2}}); }), ErrorKind::LengthMismatch);
  EXPECT_EQ(kind_of([] { SampleTable({1, 2, 3}, {}); }), ErrorKind::MissingColumn);
}

TEST(SampleTable, DefaultNamesAndSelection) {
  const SampleTable t({1, 2, 3}, {{1, 3, 2}, {0, 1, 5}});
  EXPECT_EQ(t.predictor_names(), (std::vector<std::string>{"x1", "x2"}));
  const SampleTable only = t.select(1);
  EXPECT_EQ(only.p(), 1u);
  EXPECT_EQ(only.predictor_names()[0], "x2");
  const SampleTable sw = t.swapped(0);
  EXPECT_EQ(sw.response_name(), "x1");
  EXPECT_EQ(sw.y()[1], 3.0);
}

TEST(AceConfig, Validation) {
  AceConfig c;
  EXPECT_NO_THROW(c.validate());
  c.kappa = 1.5;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidKappa);
  c = {};
  c.tol = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(MeasureKind, NamesRoundTrip) {
  for (auto k : {MeasureKind::pearson, MeasureKind::corr_ratio, MeasureKind::maxcorr, MeasureKind::monotone_monotone,
                 MeasureKind::semi_monotone_0, MeasureKind::semi_monotone_kappa})
    EXPECT_EQ(parse_measure_kind(to_string(k)), k);
  EXPECT_FALSE(parse_measure_kind("spearman").has_value());
}

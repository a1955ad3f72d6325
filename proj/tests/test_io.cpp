#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "bernstein/io.hpp"
#include "generators.hpp"

using namespace bernstein;

TEST(FormatNumber, RoundTrips) {
  gen::Source g(71);
  for (int c = 0; c < 2000; ++c) {
    const double v = g.uniform(-1.0, 1.0) * std::pow(10.0, g.integer(-300, 300));
    EXPECT_EQ(parse_number(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_TRUE(std::isnan(parse_number(format_number(std::nan("")))));
  EXPECT_THROW(parse_number("1,5"), ValidationError);
  EXPECT_THROW(parse_number(""), ValidationError);
}

TEST(Table, CsvRoundTrip) {
  Table t({"t", "P", "flag"});
  t.add_row({format_number(0.25), format_number(1.0 / 3.0), "NA"});
  t.add_row({format_number(1e-300), format_number(-2.5), "increasing"});
  std::stringstream ss;
  t.write_csv(ss);
  const Table back = read_csv(ss);
  EXPECT_EQ(back.columns(), t.columns());
  EXPECT_EQ(back.rows(), t.rows());
  EXPECT_EQ(parse_number(back.rows()[0][1]), 1.0 / 3.0);
  EXPECT_THROW(t.add_row({"1"}), ValidationError);
}

TEST(Table, JsonKeepsNumbersNumeric) {
  Table t({"x", "label"});
  t.add_row({"0.5", "NA"});
  const auto j = t.to_json();
  ASSERT_EQ(j.size(), 1u);
  EXPECT_TRUE(j[0]["x"].is_number());
  EXPECT_EQ(j[0]["x"].get<double>(), 0.5);
  EXPECT_EQ(j[0]["label"], "NA");
}

TEST(SpecJson, RoundTripAllKinds) {
  const Datum data[] = {Datum::gaussian(2.0, {1.0, -0.5}), Datum::hat_product(0.7, {0.0, 0.3}),
                        Datum::hat_isotropic(1.2, {0.1, 0.1}), Datum::dirac(2)};
  for (const auto& phi : data)
    for (const auto& psi : data) {
      const auto spec = ProcessSpec::create(2, 1.5, phi, psi);
      const auto back = spec_from_json(nlohmann::json::parse(spec_to_json(spec).dump()));
      EXPECT_EQ(back.phi0(), phi);
      EXPECT_EQ(back.psiT(), psi);
      EXPECT_EQ(back.horizon(), 1.5);
      EXPECT_NEAR(back.normalization(), spec.normalization(), 1e-14 * spec.normalization());
    }
}

TEST(SpecJson, FileRoundTrip) {
  const auto spec = ProcessSpec::create(1, 2.0, Datum::dirac(1), Datum::gaussian(1.0, {0.0}));
  const std::string path = ::testing::TempDir() + "spec.json";
  save_spec(spec, path);
  const auto back = load_spec(path);
  EXPECT_EQ(back.process_case(), ProcessCase::pinned_start);
  std::remove(path.c_str());
  EXPECT_THROW(load_spec(path), ValidationError);
}

TEST(SpecJson, InvalidInputIsValidationError) {
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"d": 1})")), ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"d": 1, "T": 1, "phi0": {"kind": "box"}, "psiT": {"kind": "dirac"}})")),
               ValidationError);
  EXPECT_THROW(
      spec_from_json(nlohmann::json::parse(R"({"d": 2, "T": 1, "phi0": {"kind": "gaussian", "sigma": 1, "a": [0]}, "psiT": {"kind": "dirac"}})")),
      ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"d": 1, "T": -1, "phi0": {"kind": "dirac"}, "psiT": {"kind": "dirac"}})")),
               ValidationError);
}

TEST(Tables, CoefficientAndBatchSchemas) {
  const auto spec = ProcessSpec::create(2, 1.0, Datum::gaussian(1.0, {0.0, 0.0}), Datum::gaussian(1.0, {0.0, 0.0}));
  const Table c = coefficient_table(GalerkinTruncation(spec, 3));
  EXPECT_EQ(c.columns(), (std::vector<std::string>{"n1", "n2", "E_n", "alpha", "beta"}));
  EXPECT_EQ(c.rows().size(), 9u);
  const SampleBatch b = sample_paths(gaussian_case(spec, {0.2, 0.4}), 3, 1);
  const Table t = batch_table(b);
  EXPECT_EQ(t.columns(), (std::vector<std::string>{"path", "time", "x1", "x2"}));
  EXPECT_EQ(t.rows().size(), 6u);
  EXPECT_EQ(parse_number(t.rows()[1][2]), b.value(0, 1, 0));
}

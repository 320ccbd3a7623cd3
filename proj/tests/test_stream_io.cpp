#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "earlywarn/stream_io.hpp"
#include "earlywarn/synthgen.hpp"
#include "test_support.hpp"

namespace ew = earlywarn;
using ew::testing::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTwoCases =
    "{\"format\":\"earlywarn-stream/1\",\"A\":0.5}\n"
    "{\"case_id\":\"a\",\"y\":1.0,\"deviation\":true,\"points\":"
    "[{\"j\":1,\"delta\":0.2,\"rho\":0.9},{\"j\":2,\"delta\":0.4,\"rho\":1.0}]}\n"
    "{\"case_id\":\"b\",\"y\":0.0,\"deviation\":false,\"points\":[{\"j\":1,\"delta\":-0.3,\"rho\":0.6}]}\n";

}  // namespace

TEST(LoadStream, WellFormedJsonl) {
  TempDir dir("io");
  write_file(dir.file("s.jsonl"), kTwoCases);
  const auto s = ew::load_stream(dir.file("s.jsonl"));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].case_id, "a");
  EXPECT_EQ(s[1].case_id, "b");
  EXPECT_EQ(s[0].points[0].tau, 0.5);
  EXPECT_EQ(s[0].points[1].tau, 1.0);
  EXPECT_EQ(s[1].points[0].rho, 0.6);
  EXPECT_EQ(s.expected_outcome(), 0.5);
}

TEST(LoadStream, WellFormedCsv) {
  TempDir dir("io");
  write_file(dir.file("s.csv"),
             "case_id,j,l,delta,rho,y,deviation\n"
             "a,1,2,0.2,0.9,1,true\n"
             "a,2,2,0.4,1,1,true\n"
             "b,1,1,-0.3,0.6,0,false\n");
  const auto s = ew::load_stream(dir.file("s.csv"));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].length(), 2);
  EXPECT_TRUE(s[0].deviation);
  EXPECT_EQ(s.expected_outcome(), 0.5);
}

TEST(LoadStream, CsvCommentCarriesExpectedOutcome) {
  TempDir dir("io");
  write_file(dir.file("s.csv"),
             "# earlywarn-stream/1 A=20\n"
             "case_id,j,l,delta,rho,y,deviation\n"
             "a,1,1,0.5,1,30,true\n");
  EXPECT_EQ(ew::load_stream(dir.file("s.csv")).expected_outcome(), 20.0);
}

TEST(LoadStream, GapInPrefixesNamesCase) {
  TempDir dir("io");
  write_file(dir.file("s.csv"),
             "case_id,j,l,delta,rho,y,deviation\n"
             "gappy,1,2,0.2,0.9,1,true\n"
             "gappy,3,2,0.4,1,1,true\n");
  try {
    ew::load_stream(dir.file("s.csv"));
    FAIL() << "expected ValidationError";
  } catch (const ew::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("gappy"), std::string::npos);
  }
}

TEST(LoadStream, EmptyFileIsEmptyStream) {
  TempDir dir("io");
  write_file(dir.file("e.jsonl"), "");
  write_file(dir.file("e.csv"), "");
  for (const auto* name : {"e.jsonl", "e.csv"}) {
    try {
      ew::load_stream(dir.file(name));
      FAIL() << "expected ValidationError";
    } catch (const ew::ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find("empty stream"), std::string::npos);
    }
  }
}

TEST(LoadStream, MalformedRowReportsLine) {
  TempDir dir("io");
  write_file(dir.file("s.csv"),
             "case_id,j,l,delta,rho,y,deviation\n"
             "a,1,1,0.2,0.9,1,true\n"
             "b,1,1,oops,0.9,1,true\n");
  try {
    ew::load_stream(dir.file("s.csv"));
    FAIL() << "expected ParseError";
  } catch (const ew::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_file(dir.file("s.jsonl"), std::string(kTwoCases) + "{not json\n");
  try {
    ew::load_stream(dir.file("s.jsonl"));
    FAIL() << "expected ParseError";
  } catch (const ew::ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(LoadStream, HeaderAndShapeErrors) {
  TempDir dir("io");
  write_file(dir.file("noheader.jsonl"),
             "{\"case_id\":\"a\",\"y\":1.0,\"deviation\":true,\"points\":[]}\n");
  EXPECT_THROW(ew::load_stream(dir.file("noheader.jsonl")), ew::ParseError);
  write_file(dir.file("cols.csv"), "case_id,j,l,delta,rho,y,deviation\na,1,1,0.2\n");
  EXPECT_THROW(ew::load_stream(dir.file("cols.csv")), ew::ParseError);
  write_file(dir.file("hdr.csv"), "id,j\n");
  EXPECT_THROW(ew::load_stream(dir.file("hdr.csv")), ew::ParseError);
  write_file(dir.file("len.csv"), "case_id,j,l,delta,rho,y,deviation\na,1,3,0.2,0.9,1,true\n");
  EXPECT_THROW(ew::load_stream(dir.file("len.csv")), ew::ValidationError);
  EXPECT_THROW(ew::load_stream(dir.file("missing.csv")), ew::IoError);
}

TEST(LoadStream, MissingFileNamesPath) {
  try {
    ew::load_stream("/nonexistent/dir/stream.jsonl");
    FAIL() << "expected IoError";
  } catch (const ew::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/stream.jsonl"), std::string::npos);
  }
}

TEST(WriteStream, RoundTripBothFormats) {
  TempDir dir("io");
  ew::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = ew::testing::random_stream(rng, ew::uniform_int(rng, 1, 30), 12);
    ew::write_stream(s, dir.file("r.jsonl"));
    ew::write_stream(s, dir.file("r.csv"));
    EXPECT_EQ(ew::load_stream(dir.file("r.jsonl")), s);
    EXPECT_EQ(ew::load_stream(dir.file("r.csv")), s);
  }
}

TEST(WriteStream, RoundTripKeepsNonCategoricalExpectation) {
  TempDir dir("io");
  auto c = ew::testing::make_case("x", {0.25, -0.5}, {0.75, 1.0}, true);
  c.outcome = 12.5;
  const ew::PredictionStream s({c}, 10.0);
  for (const auto* name : {"n.jsonl", "n.csv"}) {
    ew::write_stream(s, dir.file(name));
    EXPECT_EQ(ew::load_stream(dir.file(name)), s);
  }
}

TEST(WriteStream, ByteDeterministic) {
  TempDir dir("io");
  ew::Rng rng(12);
  const auto s = ew::testing::random_stream(rng, 25, 9);
  for (const auto* ext : {".jsonl", ".csv"}) {
    ew::write_stream(s, dir.file(std::string("a") + ext));
    ew::write_stream(s, dir.file(std::string("b") + ext));
    EXPECT_EQ(read_file(dir.file(std::string("a") + ext)), read_file(dir.file(std::string("b") + ext)));
  }
}

TEST(WriteStream, UnwritablePathIsIoError) {
  ew::Rng rng(1);
  const auto s = ew::testing::random_stream(rng, 2, 2);
  EXPECT_THROW(ew::write_stream(s, "/nonexistent/dir/out.jsonl"), ew::IoError);
}

TEST(WriteStream, CsvRejectsSeparatorInCaseId) {
  const ew::PredictionStream s({ew::testing::make_case("a,b", {0.1}, {}, true)});
  std::ostringstream out;
  EXPECT_THROW(ew::write_stream(s, out, ew::StreamFormat::kCsv), ew::ValidationError);
}

TEST(StreamFormat, Detection) {
  EXPECT_EQ(ew::format_for_path("x.csv"), ew::StreamFormat::kCsv);
  EXPECT_EQ(ew::format_for_path("x.jsonl"), ew::StreamFormat::kJsonl);
  EXPECT_EQ(ew::parse_stream_format("csv"), ew::StreamFormat::kCsv);
  EXPECT_THROW(ew::parse_stream_format("xml"), ew::ConfigError);
}

TEST(BaseMatrices, RoundTripAndAggregate) {
  TempDir dir("io");
  ew::synth::GeneratorConfig cfg;
  cfg.n_cases = 40;
  cfg.ensemble_size = 5;
  const auto set = ew::synth::generate(cfg);
  ew::write_base_matrices(set, dir.file("m.csv"), dir.file("t.csv"));
  const auto loaded = ew::load_base_matrices(dir.file("m.csv"), dir.file("t.csv"));
  ASSERT_EQ(loaded.matrices.size(), set.matrices.size());
  for (std::size_t k = 0; k < set.matrices.size(); ++k) {
    EXPECT_EQ(loaded.matrices[k].case_id, set.matrices[k].case_id);
    EXPECT_EQ(loaded.matrices[k].predictions, set.matrices[k].predictions);
    EXPECT_EQ(loaded.truths[k].deviation, set.truths[k].deviation);
  }
  EXPECT_EQ(ew::aggregate_stream(loaded), ew::aggregate_stream(set));
}

TEST(BaseMatrices, IncompleteEnsembleIsRejected) {
  TempDir dir("io");
  write_file(dir.file("t.csv"), "case_id,y,deviation,l\nc1,1,true,2\n");
  write_file(dir.file("m.csv"),
             "case_id,j,model_index,y_hat\n"
             "c1,1,0,0.6\nc1,1,1,0.7\nc1,2,0,0.8\n");
  EXPECT_THROW(ew::load_base_matrices(dir.file("m.csv"), dir.file("t.csv")), ew::ValidationError);
  write_file(dir.file("m.csv"), "case_id,j,model_index,y_hat\nc1,1,0,0.6\n");
  EXPECT_THROW(ew::load_base_matrices(dir.file("m.csv"), dir.file("t.csv")), ew::ValidationError);
  write_file(dir.file("m.csv"), "case_id,j,model_index,y_hat\nzz,1,0,0.6\n");
  EXPECT_THROW(ew::load_base_matrices(dir.file("m.csv"), dir.file("t.csv")), ew::ValidationError);
}

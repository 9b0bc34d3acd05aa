#include "support/synthetic.hpp"

#include "xsim/dataio.hpp"
#include "xsim/error.hpp"
#include "xsim/forecaster.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace xsim;
using xsim::testing::make_record;

namespace {

std::vector<CorpusRecord> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in, "mem.csv");
}

std::string error_of(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("xsim_test_" + name);
}

std::vector<double> ramp(std::size_t n, double start = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
    return v;
}

}  // namespace

TEST(Corpus, ParsesOneSeries) {
    const auto recs = parse("series_id,frequency,index,value\na,yearly,1,1\na,yearly,2,2\na,yearly,3,3\n");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(recs[0].horizon, 6);
    EXPECT_EQ(recs[0].period, 1);
}

TEST(Corpus, DuplicateIndexReportsLine) {
    const auto msg = error_of("series_id,frequency,index,value\na,yearly,1,1\na,yearly,2,2\na,yearly,2,3\n");
    EXPECT_NE(msg.find("mem.csv:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(Corpus, DefaultHorizons) {
    const auto recs = parse(
        "series_id,frequency,index,value\nm,monthly,1,1\nm,monthly,2,2\nq,quarterly,1,5\ny,yearly,1,3\n");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].horizon, 18);
    EXPECT_EQ(recs[0].period, 12);
    EXPECT_EQ(recs[1].horizon, 8);
    EXPECT_EQ(recs[2].horizon, 6);
}

TEST(Corpus, ExplicitHorizonAndOtherPeriod) {
    const auto recs = parse("series_id,frequency,index,value,horizon\nw,other:52,1,1,13\nw,other:52,2,2,13\n");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].period, 52);
    EXPECT_EQ(recs[0].horizon, 13);
    EXPECT_FALSE(error_of("series_id,frequency,index,value\nw,other:52,1,1\n").empty());
}

TEST(Corpus, ValidationErrors) {
    EXPECT_FALSE(error_of("").empty());
    EXPECT_FALSE(error_of("id,v\n").empty());
    EXPECT_NE(error_of("series_id,frequency,index,value\na,hourly,1,1\n").find("unknown frequency"),
              std::string::npos);
    EXPECT_NE(error_of("series_id,frequency,index,value\na,yearly,1,1\na,yearly,3,1\n").find("mem.csv:3"),
              std::string::npos);
    EXPECT_NE(error_of("series_id,frequency,index,value\na,yearly,1,nan\n").find("mem.csv:2"), std::string::npos);
    EXPECT_NE(error_of("series_id,frequency,index,value\na,yearly,1,x\n").find("malformed"), std::string::npos);
    EXPECT_FALSE(error_of("series_id,frequency,index,value\na,yearly,1,1\nb,yearly,1,1\na,yearly,2,1\n").empty());
}

TEST(Corpus, WriteThenParseRoundTrip) {
    std::mt19937_64 rng(157);
    std::vector<CorpusRecord> recs;
    recs.push_back(make_record("a", 12, xsim::testing::ets_series(rng, 40, 12), 18));
    recs.push_back(make_record("b", 1, xsim::testing::ets_series(rng, 9, 1), 6));
    recs.push_back({"c", "other:7", 7, {0.1, -2.5, 1e-300}, 14});
    std::ostringstream out;
    write_corpus(out, recs);
    EXPECT_EQ(parse(out.str()), recs);
}

TEST(HistoryCut, Examples) {
    const TimeSeries monthly("m", Frequency(12), ramp(132), 18);
    const auto cut = apply_history_cut(monthly, 3);
    ASSERT_EQ(cut.size(), 36u);
    EXPECT_EQ(cut.values().front(), 97.0);
    const TimeSeries yearly("y", Frequency(1), ramp(9), 6);
    EXPECT_EQ(apply_history_cut(yearly, 34), yearly);
    const TimeSeries quarterly("q", Frequency(4), ramp(44), 8);
    EXPECT_EQ(apply_history_cut(quarterly, 5).size(), 20u);
    EXPECT_THROW((void)apply_history_cut(yearly, 0), std::invalid_argument);
}

TEST(BuildReference, TruncationRule) {
    std::vector<CorpusRecord> corpus{make_record("a", 1, ramp(10), 5), make_record("b", 1, ramp(20), 5),
                                     make_record("c", 1, ramp(30), 5)};
    const auto built = build_reference_set(corpus, 15, 5, Frequency(1), PreprocessConfig::scaling_only());
    ASSERT_EQ(built.set.size(), 2u);
    EXPECT_EQ(built.dropped_short, 1u);
    EXPECT_EQ(built.set[0].id, "b");
    EXPECT_EQ(built.set[0].history, ramp(15));
    EXPECT_EQ(built.set[0].future_path, ramp(5, 16.0));
    EXPECT_EQ(built.set[1].id, "c");
    EXPECT_EQ(built.set[1].history, ramp(15, 11.0));
    EXPECT_EQ(built.set[1].future_path, ramp(5, 26.0));
    for (const auto& e : built.set.entries()) {
        EXPECT_EQ(e.preprocessed.scaled.size(), 15u);
        EXPECT_DOUBLE_EQ(e.preprocessed.scaled.back(), 1.0);
    }
}

TEST(BuildReference, AllTooShort) {
    std::vector<CorpusRecord> corpus{make_record("a", 1, ramp(10), 5)};
    try {
        (void)build_reference_set(corpus, 15, 5, Frequency(1), PreprocessConfig{});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("empty reference set"), std::string::npos);
    }
}

TEST(BuildReference, FiltersOtherFrequencies) {
    std::vector<CorpusRecord> corpus{make_record("a", 1, ramp(30), 6), make_record("b", 12, ramp(30), 18)};
    const auto built = build_reference_set(corpus, 10, 6, Frequency(1), PreprocessConfig{});
    EXPECT_EQ(built.set.size(), 1u);
    EXPECT_EQ(built.dropped_frequency, 1u);
}

TEST(BuildReference, DeterministicAcrossThreads) {
    std::mt19937_64 rng(163);
    std::vector<CorpusRecord> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back(make_record("m" + std::to_string(i), 12, xsim::testing::ets_series(rng, 80, 12), 18));
    const auto cfg = PreprocessConfig::for_frequency(Frequency(12));
    const auto a = build_reference_set(corpus, 40, 18, Frequency(12), cfg, 1);
    const auto b = build_reference_set(corpus, 40, 18, Frequency(12), cfg, 4);
    EXPECT_EQ(a.set, b.set);
}

TEST(BuildReference, RebuildMatchesDirectBuildOnStoredWindows) {
    std::mt19937_64 rng(167);
    std::vector<CorpusRecord> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(make_record("y" + std::to_string(i), 1, xsim::testing::ets_series(rng, 26, 1), 6));
    const auto cfg = PreprocessConfig::for_frequency(Frequency(1));
    const auto outer = build_reference_set(corpus, 20, 6, Frequency(1), cfg);
    const auto inner = rebuild_reference_set(outer.set, 14);
    const auto direct = build_reference_set(corpus, 14, 6, Frequency(1), cfg);
    // Every corpus series is exactly n + h long, so the stored windows hold everything.
    EXPECT_EQ(inner, direct.set);
}

TEST(ReferenceFile, SaveLoadRoundTrip) {
    std::mt19937_64 rng(173);
    std::vector<CorpusRecord> corpus;
    for (int i = 0; i < 25; ++i) corpus.push_back(make_record("m" + std::to_string(i), 12, xsim::testing::ets_series(rng, 70, 12), 18));
    const auto cfg = PreprocessConfig::for_frequency(Frequency(12));
    const auto built = build_reference_set(corpus, 48, 18, Frequency(12), cfg);
    const auto path = temp_path("roundtrip.bin");
    save_reference_set(built.set, path);
    const auto loaded = load_reference_set(path, cfg);
    EXPECT_EQ(loaded, built.set);
    EXPECT_EQ(encode_reference_set(loaded), encode_reference_set(built.set));
    std::filesystem::remove(path);
}

TEST(ReferenceFile, ConfigMismatch) {
    std::vector<CorpusRecord> corpus{make_record("a", 1, ramp(30), 6)};
    const auto built = build_reference_set(corpus, 10, 6, Frequency(1), PreprocessConfig{});
    const auto bytes = encode_reference_set(built.set);
    PreprocessConfig other;
    other.span_factor = 1.3;
    try {
        (void)decode_reference_set(bytes, other);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("config mismatch"), std::string::npos);
    }
    EXPECT_NO_THROW((void)decode_reference_set(bytes, PreprocessConfig{}));
}

TEST(ReferenceFile, TruncatedOrCorruptedFails) {
    std::vector<CorpusRecord> corpus{make_record("a", 1, ramp(30), 6), make_record("b", 1, ramp(30, 5.0), 6)};
    const auto built = build_reference_set(corpus, 10, 6, Frequency(1), PreprocessConfig{});
    auto bytes = encode_reference_set(built.set);
    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 9);
    try {
        (void)decode_reference_set(truncated);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
    }
    bytes[40] ^= 0x10;
    EXPECT_THROW((void)decode_reference_set(bytes), DataError);
    EXPECT_THROW((void)load_reference_set(temp_path("does_not_exist.bin")), DataError);
}

TEST(Json, ForecastRoundTrip) {
    ForecastResult r;
    r.series_id = "x";
    r.point = {1.0, 2.5};
    r.lower = {0.5, 1.0};
    r.upper = {2.0, 4.0};
    r.neighbor_ids = {"a", "b"};
    r.neighbor_distances = {0.1, 0.30000000000000004};
    r.delta_star = 0.07;
    r.dropped_paths = 1;
    EXPECT_EQ(forecast_from_json(to_json(r)), r);
    EXPECT_THROW((void)forecast_from_json(nlohmann::json{{"series_id", 3}}), DataError);
}

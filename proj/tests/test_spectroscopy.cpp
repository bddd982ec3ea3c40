#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "crx/spectroscopy.hpp"
#include "oracles.hpp"

namespace {

using crx::HalfUnits;

crx::Dataset with_year_counts(const std::vector<std::pair<int, std::int64_t>>& counts) {
  crx::Dataset ds;
  crx::RefId id = 1;
  for (const auto& [year, n] : counts) {
    crx::CitedReference r;
    r.id = id++;
    r.parsed = crx::parse_cited_reference("Author A, " + std::to_string(year) + ", J X");
    r.n_cr = n;
    r.cluster = {r.id, r.id};
    ds.references.push_back(std::move(r));
  }
  return crx::recompute_statistics(std::move(ds));
}

std::vector<std::int64_t> halves_of(const std::vector<HalfUnits>& v) {
  std::vector<std::int64_t> out;
  for (const auto& h : v) out.push_back(h.halves);
  return out;
}

TEST(HalfUnits, Rendering) {
  EXPECT_EQ(HalfUnits::whole(4).to_string(), "4");
  EXPECT_EQ(HalfUnits{-1}.to_string(), "-0.5");
  EXPECT_EQ(HalfUnits{5}.to_string(), "2.5");
  EXPECT_EQ(HalfUnits{-6}.to_string(), "-3");
  EXPECT_EQ(HalfUnits{0}.to_string(), "0");
}

TEST(MedianDeviation, FiveYearExample) {
  const std::vector<std::int64_t> counts = {1, 5, 2, 1, 1};
  const auto dev = crx::median_deviation(counts, 2);
  EXPECT_EQ(dev[1], HalfUnits::whole(4));
  EXPECT_EQ(dev[2], HalfUnits::whole(1));
  EXPECT_EQ(halves_of(dev), oracle::doubled_deviation(counts, 2));
}

TEST(MedianDeviation, SingleYear) {
  const auto s = crx::year_series(with_year_counts({{1926, 5}}));
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].deviation, HalfUnits::whole(5));
}

TEST(MedianDeviation, ConstantSeriesIsFlatInside) {
  const std::vector<std::int64_t> counts(40, 7);
  const auto dev = crx::median_deviation(counts, 2);
  // two padded zeros never reach the middle of a five-year window
  for (const auto& d : dev) EXPECT_EQ(d, HalfUnits::whole(0));
}

TEST(MedianDeviation, EvenWindowAtEdgesAveragesMiddles) {
  EXPECT_EQ(crx::median_of({1, 2, 3, 10}), HalfUnits{5});
  EXPECT_EQ(crx::median_of({}), HalfUnits{0});
}

TEST(MedianDeviation, AgreesWithOracle) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::int64_t> counts(std::uniform_int_distribution<std::size_t>(1, 235)(rng));
    for (auto& c : counts) c = std::uniform_int_distribution<std::int64_t>(0, 500)(rng);
    const int half = 1 + t % 4;
    ASSERT_EQ(halves_of(crx::median_deviation(counts, half)), oracle::doubled_deviation(counts, half));
  }
}

TEST(MedianDeviation, RejectsDegenerateWindow) {
  EXPECT_THROW(crx::median_deviation({1, 2}, 0), crx::InvalidArgument);
}

TEST(YearSeries, FillsGapsAndSkipsUndated) {
  auto ds = with_year_counts({{2000, 1}, {2003, 4}});
  crx::CitedReference undated;
  undated.id = 9;
  undated.parsed = crx::parse_cited_reference("NO YEAR HERE");
  undated.n_cr = 50;
  undated.cluster = {9, 9};
  ds.references.push_back(undated);
  ds = crx::recompute_statistics(std::move(ds));

  const auto s = crx::year_series(ds);
  ASSERT_EQ(s.points.size(), 4u);
  EXPECT_EQ(s.points[1].year, 2001);
  EXPECT_EQ(s.points[1].n_cr, 0);
  EXPECT_EQ(s.points[3].n_cr, 4);
  EXPECT_TRUE(crx::year_series(crx::Dataset{}).empty());
}

TEST(YearSeries, SliceKeepsFullSeriesDeviations) {
  const auto full = crx::year_series(with_year_counts({{2000, 1}, {2001, 5}, {2002, 2}, {2003, 1}, {2004, 1}}));
  const auto part = crx::slice(full, 2001, 2002);
  ASSERT_EQ(part.points.size(), 2u);
  EXPECT_EQ(part.points[0], full.points[1]);
  EXPECT_EQ(crx::slice(full, std::nullopt, std::nullopt).points, full.points);
  EXPECT_TRUE(crx::slice(full, 1990, 1995).empty());
}

TEST(ChartCsv, Format) {
  const auto s = crx::year_series(with_year_counts({{2000, 1}, {2001, 5}, {2002, 2}, {2003, 1}, {2004, 1}}));
  EXPECT_EQ(crx::export_chart_csv(s),
            "Year,N_CR,Median Deviation\n"
            "2000,1,0\n2001,5,4\n2002,2,1\n2003,1,0\n2004,1,0\n");
  EXPECT_EQ(crx::export_chart_csv(crx::YearSeries{}), "Year,N_CR,Median Deviation\n");
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(ChartSvg, CurvesFollowOptions) {
  const auto s = crx::year_series(with_year_counts({{1990, 3}, {1995, 9}, {2000, 4}}));
  crx::ChartOptions opt;
  opt.title = "Spectrum <&>";
  const std::string both = crx::render_chart_svg(s, opt);
  EXPECT_EQ(both.rfind("<svg", 0) == 0 || both.rfind("<?xml", 0) == 0, true);
  EXPECT_EQ(count_of(both, "<polyline"), 2u);
  EXPECT_NE(both.find("class=\"n-cr\""), std::string::npos);
  EXPECT_NE(both.find("class=\"median-deviation\""), std::string::npos);
  EXPECT_NE(both.find("Spectrum &lt;&amp;&gt;"), std::string::npos);
  EXPECT_NE(both.find(">1990<"), std::string::npos);
  EXPECT_NE(both.find(">2000<"), std::string::npos);

  opt.show_deviation = false;
  EXPECT_EQ(count_of(crx::render_chart_svg(s, opt), "<polyline"), 1u);
  opt.show_count = false;
  EXPECT_EQ(count_of(crx::render_chart_svg(s, opt), "<polyline"), 0u);
}

TEST(ChartSvg, EmptySeriesStillRenders) {
  const std::string svg = crx::render_chart_svg(crx::YearSeries{});
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count_of(svg, "<polyline"), 0u);
}

TEST(ChartSvg, Deterministic) {
  const auto s = crx::year_series(with_year_counts({{1781, 1}, {1900, 30}, {2015, 400}}));
  EXPECT_EQ(crx::render_chart_svg(s), crx::render_chart_svg(s));
}

}  // namespace

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "opmi/report.hpp"

using namespace opmi;

TEST(Csv, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 2.299808484297132e-4, 1e300, -0.0, 12345678.0}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_number(std::nan("")), "");
  EXPECT_EQ(format_number(std::optional<double>{}), "");
}

TEST(Csv, TableRoundTrip) {
  CsvTable t = curve_table();
  t.rows.push_back({"a", "10", "2", "0.25", "0.01", "", "3.5"});
  t.rows.push_back({"b", "20", "4", "0.5", "", "0.4", ""});
  std::stringstream buf;
  write_csv(buf, t);
  EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')),
            "series,grid,gamma,mean_adv,stderr_adv,theory_adv,gen_error");
  const CsvTable back = read_csv(buf);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.number(0, "mean_adv"), 0.25);
  EXPECT_TRUE(std::isnan(back.number(0, "theory_adv")));
  EXPECT_EQ(back.text(1, "series"), "b");
  EXPECT_THROW(back.column("nope"), std::out_of_range);
}

TEST(Csv, RejectsRaggedRowsAndSeparators) {
  std::stringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), std::invalid_argument);
  CsvTable t{{"a"}, {{"x,y"}}};
  std::stringstream out;
  EXPECT_THROW(write_csv(out, t), std::invalid_argument);
}

TEST(Csv, CurveRowsFromResult) {
  CurveResult r;
  r.p_grid = {100, 300};
  r.gamma = {1.0, 3.0};
  r.empirical = {AdvantageEstimate::from_values({0.2, 0.4}), AdvantageEstimate::from_values({0.1})};
  r.theory_overlay = {std::nan(""), 0.15};
  ExperimentConfig c;
  c.n = 100;
  c.D = 3000;
  CsvTable t = curve_table();
  append_curve(t, "lin", r, c);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][5], "");
  EXPECT_EQ(t.rows[0][6], "");
  EXPECT_NEAR(t.number(1, "gen_error"), 2.921440536013400, 1e-13);
  EXPECT_NEAR(t.number(0, "mean_adv"), 0.3, 1e-15);
}

TEST(Svg, DeterministicAndWellFormed) {
  CsvTable t = curve_table();
  t.rows.push_back({"a", "10", "1.5", "0.25", "0.01", "0.3", ""});
  t.rows.push_back({"a", "20", "3", "0.5", "0.02", "", ""});
  t.rows.push_back({"b<&>", "20", "3", "0.1", "", "", ""});
  PlotSpec spec;
  spec.title = "t";
  spec.x_column = "gamma";
  spec.y_column = "mean_adv";
  spec.error_column = "stderr_adv";
  spec.overlay_column = "theory_adv";
  spec.log_x = true;
  const std::string svg = render_svg(t, spec);
  EXPECT_EQ(svg, render_svg(t, spec));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("b&lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

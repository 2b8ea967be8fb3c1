#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "renyikey/pipeline.hpp"
#include "renyikey/report_io.hpp"
#include "renyikey/run_config.hpp"

using namespace renyikey;

TEST_SUITE("config_io") {
  TEST_CASE("defaults validate") {
    const RunConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK_FALSE(c.alpha.has_value());
    CHECK(c.grid().size() == 25);
    CHECK(c.finite_size().m() == 10000);
  }

  TEST_CASE("strict parsing") {
    const RunConfig c = parse_run_config(R"({"depol_p": 0.02, "N": 1e6, "alpha": 1.3, "statistics": "coarse"})");
    CHECK(c.depol_p == 0.02);
    CHECK(c.n_total == 1000000);
    CHECK(c.alpha.value() == 1.3);
    CHECK(c.protocol_options().statistics == StatisticsMode::Coarse);
    CHECK_FALSE(parse_run_config(R"({"alpha": "scan"})").alpha.has_value());

    CHECK_THROWS_AS(parse_run_config(R"({"alpah": 1.3})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"alpha": 0.9})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"alpha": "best"})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"N": 1.5})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"N": "100"})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"protocol": "e91"})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"f_EC": 0.9})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"p_gen": 1.0})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"([1, 2])"), Error);
    CHECK_THROWS_AS(parse_run_config("{not json"), Error);
    try {
      parse_run_config(R"({"typo": 1})");
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
  }

  TEST_CASE("apply_config_value and JSON round trip") {
    RunConfig c;
    apply_config_value(c, "alpha", "1.25");
    apply_config_value(c, "statistics", "coarse");
    apply_config_value(c, "alpha_grid", "[1.1, 1.2, 1.3]");
    apply_config_value(c, "warm_start", "false");
    apply_config_value(c, "output_path", "out.csv");
    CHECK(c.alpha.value() == 1.25);
    CHECK(c.statistics == "coarse");
    CHECK(c.grid() == std::vector<double>{1.1, 1.2, 1.3});
    CHECK_FALSE(c.warm_start);
    CHECK(c.output_path == "out.csv");
    CHECK_THROWS_AS(apply_config_value(c, "nope", "1"), Error);
    CHECK_THROWS_AS(apply_config_value(c, "warm_start", "yes"), Error);

    const RunConfig back = parse_run_config(run_config_to_json(c));
    CHECK(run_config_to_json(back) == run_config_to_json(c));
    apply_config_value(c, "alpha", "scan");
    CHECK_FALSE(parse_run_config(run_config_to_json(c)).alpha.has_value());

    for (const auto& key : run_config_keys()) CHECK(run_config_to_json(RunConfig{}).find(key) != std::string::npos);
  }

  TEST_CASE("CSV layout") {
    CHECK(csv_header() ==
          "alpha,beta,N,p_gen,depol,loss,min_f,lambda_EC,g_alpha,key_length,key_rate,fw_iters,fw_gap,dual_residual,"
          "status");
    KeyRateReport r;
    r.alpha = 1.1;
    r.beta = 1.0 / 1.1;
    r.n_total = 100000;
    r.p_gen = 0.9;
    r.depolarization = 0.01;
    r.key_rate = 0.1;
    r.fw_iters = 7;
    r.status = "converged";
    const std::string row = csv_row(r);
    CHECK(row.rfind("1.1,0.9090909090909091,100000,0.9,0.01,0,", 0) == 0);
    CHECK(row.size() > 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 14);
    CHECK(row.substr(row.size() - 9) == "converged");
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(INFINITY) == "inf");
  }

  TEST_CASE("run log is one JSON object per line") {
    const ProtocolInstance inst = bb84_pm_instance(0.01, 0.0);
    const KeyRatePipeline pipe(inst, FiniteSizeParams{}, SecurityParams{});
    const PointRun p = pipe.run(1.2);
    std::ostringstream os;
    write_run_log(os, p.report, p.fw, p.bound);
    std::istringstream in(os.str());
    std::string line;
    int iterations = 0;
    nlohmann::json last;
    while (std::getline(in, line)) {
      last = nlohmann::json::parse(line);
      if (last["type"] == "iteration") {
        CHECK(last.contains("f"));
        CHECK(last.contains("gap"));
        CHECK(last.contains("step"));
        CHECK(last.contains("solver_status"));
        ++iterations;
      }
    }
    CHECK(iterations == static_cast<int>(p.fw.log.size()));
    CHECK(last["type"] == "bound");
    CHECK(last["certified_bound"].get<double>() == p.bound.value);
  }

  TEST_CASE("reruns are bit-identical") {
    const RunConfig c = parse_run_config(R"({"alpha": 1.15})");
    auto row = [&] {
      const KeyRatePipeline pipe(c.instance(), c.finite_size(), c.security(), c.pipeline_options());
      return csv_row(pipe.run(*c.alpha).report);
    };
    CHECK(row() == row());
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mimoee/config_io.hpp"

using namespace mimoee;

TEST_CASE("empty file yields the documented defaults") {
    const SystemConfig cfg = parse_config("");
    const SystemConfig def;
    CHECK(cfg.M == def.M);
    CHECK(cfg.N == def.N);
    CHECK(cfg.T_s == def.T_s);
    CHECK(cfg.t_s == def.t_s);
    CHECK(cfg.S_d == def.S_d);
    CHECK(cfg.L == def.L);
    CHECK(cfg.R == def.R);
    CHECK(cfg.xi == def.xi);
    CHECK(cfg.sigma2 == def.sigma2);
    CHECK(cfg.P_max == def.P_max);
}

TEST_CASE("key parsing, comments, and units") {
    const SystemConfig cfg = parse_config(
        "# comment line\n"
        "M = 2\n"
        "N = 2\n"
        "t_s = 2   # inline comment\n"
        "T_s = 100\n"
        "b_mW = 10\n"
        "P_max_dBm = 40\n"
        "sigma2_mW = 1\n"
        "R = 800\n"
        "R0 = 100\n"
        "xi = 8\n");
    CHECK(cfg.M == 2);
    CHECK(cfg.b == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(cfg.P_max == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(cfg.sigma2 == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(cfg.xi == 8.0);
}

TEST_CASE("xi is derived from R/R0 when omitted") {
    const SystemConfig cfg = parse_config("R = 400\nR0 = 100\n");
    CHECK(cfg.xi == doctest::Approx(4.0));
    const SystemConfig cfg2 = parse_config("xi = 4\n");
    CHECK(cfg2.R == doctest::Approx(4.0 * cfg2.R0));
}

TEST_CASE("unknown keys and invariant violations are rejected") {
    CHECK_THROWS_WITH_AS(parse_config("bogus = 1\n"),
                         doctest::Contains("unknown key"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("M = 4\nt_s = 2\n"),
                         doctest::Contains("t_s"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("M = garbage\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("M 4\n"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("xi = 3\n R = 800\n R0 = 100\n"),
                         doctest::Contains("xi"), std::invalid_argument);
}

TEST_CASE("save/load round trip is bit-identical") {
    SystemConfig cfg = parse_config("b_mW = 10\nS_d = 1.5e-05\n");
    cfg.b0 = 0.25e-3;
    cfg.validate();
    const SystemConfig back = parse_config(save_config(cfg));
    CHECK(back.M == cfg.M);
    CHECK(back.N == cfg.N);
    CHECK(back.T_s == cfg.T_s);
    CHECK(back.t_s == cfg.t_s);
    CHECK(back.t_f_s == cfg.t_f_s);
    CHECK(back.S_d == cfg.S_d);
    CHECK(back.L == cfg.L);
    CHECK(back.R == cfg.R);
    CHECK(back.R0 == cfg.R0);
    CHECK(back.xi == cfg.xi);
    CHECK(back.a == cfg.a);
    CHECK(back.b == cfg.b);
    CHECK(back.b0.has_value());
    CHECK(*back.b0 == *cfg.b0);
    CHECK(back.sigma2 == cfg.sigma2);
    CHECK(back.P_max == cfg.P_max);
    CHECK(save_config(back) == save_config(cfg));
}

TEST_CASE("file round trip through disk") {
    const std::string path = "config_io_test.tmp";
    SystemConfig cfg;
    cfg.b = 0.7e-3;
    save_config(cfg, path);
    const SystemConfig back = load_config(path);
    CHECK(back.b == cfg.b);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("does_not_exist.cfg"), std::runtime_error);
}

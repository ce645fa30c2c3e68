#include <doctest.h>

#include "liapcert/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

using liapcert::cli::format_float;
using liapcert::cli::run;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char ch : text) {
        if (ch == '\n') ++n;
    }
    return n;
}

std::string write_temp(const std::string& contents) {
    static int counter = 0;
    const std::string path = "liapcert_cli_test_" +
                             std::to_string(counter++) + ".json";
    std::ofstream file(path);
    file << contents;
    return path;
}

} // namespace

TEST_CASE("format_float round-trips doubles bit-exactly") {
    for (double x : {1.0, -0.1, 3.14159265358979, 1e-300, 123456.789,
                     0.14270128819181283, 2.2250738585072014e-308}) {
        const std::string s = format_float(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("cli: roots reports four rows and honors the domain") {
    const auto good = invoke({"roots", "--lambda", "1", "--c", "0.5"});
    CHECK(good.code == 0);
    CHECK(good.out.find("has_real_root,0") != std::string::npos);
    CHECK(count_lines(good.out) == 5 + 1 + 5); // record, blank, header + 4 rows

    const auto onset = invoke({"roots", "--lambda", "1", "--c", "0.999"});
    CHECK(onset.code == 0);
    CHECK(onset.out.find("has_real_root,1") != std::string::npos);

    const auto bad = invoke({"roots", "--lambda", "1", "--c", "1.5"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("|c| < lambda") != std::string::npos);
}

TEST_CASE("cli: scan output is deterministic and ordered") {
    const std::vector<std::string> args = {"scan",     "--grid-lambda", "3",
                                           "--grid-c", "3",             "--lambda-min",
                                           "0.5",      "--lambda-max",  "5"};
    const auto first = invoke(args);
    const auto second = invoke(args);
    CHECK(first.code == 0);
    CHECK(first.out == second.out);
    CHECK(count_lines(first.out) == 1 + 9);

    // identical bytes with a worker pool
    auto parallel_args = args;
    parallel_args.push_back("--jobs");
    parallel_args.push_back("2");
    CHECK(invoke(parallel_args).out == first.out);

    // lambda outer, c inner: the lambda column is non-decreasing
    std::istringstream rows(first.out);
    std::string line;
    std::getline(rows, line); // header
    double prev_lambda = 0.0;
    while (std::getline(rows, line)) {
        const double lambda = std::strtod(line.c_str(), nullptr);
        CHECK(lambda >= prev_lambda);
        prev_lambda = lambda;
    }
}

TEST_CASE("cli: scan grid must be at least 2x2") {
    const auto result = invoke({"scan", "--grid-lambda", "1", "--grid-c", "3"});
    CHECK(result.code == 1);
}

TEST_CASE("cli: scan rows on the strong-coupling ray certify above 0.2") {
    // lambda = 1e6 with c = lambda^(3/4), i.e. c/lambda = lambda^(-1/4)
    const auto result = invoke({"scan", "--lambda-min", "1e6", "--lambda-max",
                                "1e6", "--cfrac-min", "0.0316227766016838",
                                "--cfrac-max", "0.0316227766016838",
                                "--grid-lambda", "2", "--grid-c", "2",
                                "--jobs", "2"});
    REQUIRE(result.code == 0);
    std::istringstream rows(result.out);
    std::string line;
    std::getline(rows, line); // header
    int checked = 0;
    while (std::getline(rows, line)) {
        // certified_norm_rate is the fifth column
        const char* p = line.c_str();
        char* next = nullptr;
        double value = 0.0;
        for (int col = 0; col < 5; ++col) {
            value = std::strtod(p, &next);
            p = next + 1;
        }
        CHECK(value >= 0.2);
        ++checked;
    }
    CHECK(checked == 4);
}

TEST_CASE("cli: certify exit codes") {
    const auto ok = invoke({"certify", "--variant", "strong", "--example",
                            "wave", "--modes", "8", "--gamma", "0.5"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("certificate_valid,1") != std::string::npos);

    const auto cond11 = invoke({"certify", "--variant", "weak", "--modes", "4",
                                "--c", "0.5", "--p", "2"});
    CHECK(cond11.code == 2);
    CHECK(cond11.err.find("admissible p") != std::string::npos);

    const auto string_beyond =
        invoke({"certify", "--variant", "strong", "--example", "string",
                "--modes", "4", "--L", "6.283185307179586", "--gamma", "1.5"});
    CHECK(string_beyond.code == 2);
    CHECK(string_beyond.err.find("admissible |gamma|") != std::string::npos);
}

TEST_CASE("cli: simulate emits the documented schema and guards rk4") {
    const auto scalar = invoke({"simulate", "--system", "scalar", "--lambda",
                                "1", "--c", "0.5", "--T", "1", "--dt", "0.5"});
    CHECK(scalar.code == 0);
    CHECK(scalar.out.rfind("t,E,H_eps,norm_sq\n", 0) == 0);
    CHECK(count_lines(scalar.out) == 1 + 3);

    const auto weak = invoke({"simulate", "--system", "weak", "--modes", "4",
                              "--c", "0.2", "--T", "1", "--dt", "0.5"});
    CHECK(weak.code == 0);
    CHECK(weak.out.rfind("t,E,H_eps,K,norm_sq\n", 0) == 0);

    const auto unstable =
        invoke({"simulate", "--system", "scalar", "--lambda", "100", "--c",
                "50", "--method", "rk4", "--T", "1", "--dt", "0.5"});
    CHECK(unstable.code == 3);
    CHECK(unstable.err.find("suggested dt") != std::string::npos);
}

TEST_CASE("cli: simulated energy is non-increasing") {
    const auto result = invoke({"simulate", "--system", "wave", "--modes", "4",
                                "--gamma", "0.5", "--T", "5", "--dt", "0.1"});
    CHECK(result.code == 0);
    std::istringstream rows(result.out);
    std::string line;
    std::getline(rows, line);
    double prev = std::numeric_limits<double>::infinity();
    while (std::getline(rows, line)) {
        const char* p = line.c_str();
        char* next = nullptr;
        std::strtod(p, &next); // t
        const double E = std::strtod(next + 1, nullptr);
        CHECK(E <= prev * (1.0 + 1e-12));
        prev = E;
    }
}

TEST_CASE("cli: pde examples and the unknown-example contract") {
    const auto wave = invoke({"pde", "--example", "wave", "--modes", "8",
                              "--gamma", "0.5", "--T", "10"});
    CHECK(wave.code == 0);
    CHECK(wave.out.find("decay_envelope_ok,1") != std::string::npos);

    const auto unknown = invoke({"pde", "--example", "drum"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("unknown example") != std::string::npos);

    const auto plate_domain =
        invoke({"pde", "--example", "plate", "--gamma", "2", "--L",
                "3.14159265358979"});
    CHECK(plate_domain.code == 1);
    CHECK(plate_domain.err.find("(0, lambda_1)") != std::string::npos);
}

TEST_CASE("cli: weak table has one row per mode count") {
    const auto result = invoke({"weak", "--modes", "4,8", "--c", "0.2", "--p",
                                "2", "--T", "50"});
    CHECK(result.code == 0);
    CHECK(result.out.find("rows,2") != std::string::npos);
    CHECK(count_lines(result.out) == 3 + 1 + 3); // record, blank, header + 2

    const auto all_fail = invoke({"weak", "--modes", "4,8", "--c", "0.9",
                                  "--p", "10", "--T", "50"});
    CHECK(all_fail.code == 2);
}

TEST_CASE("cli: json format carries the same rows") {
    const auto result = invoke({"roots", "--lambda", "1", "--c", "0.5",
                                "--format", "json"});
    CHECK(result.code == 0);
    CHECK(result.out.find("\"decrement\"") != std::string::npos);
    CHECK(result.out.find("\"rows\"") != std::string::npos);

    const auto bad = invoke({"roots", "--format", "yaml"});
    CHECK(bad.code == 1);
}

TEST_CASE("cli: config file fills options and flags win") {
    const std::string path = write_temp(
        R"({"roots": {"lambda": 4.0, "c": 1.0}, "format": "json"})");
    const auto from_file = invoke({"roots", "--config", path});
    CHECK(from_file.code == 0);
    CHECK(from_file.out.find("\"lambda\"") != std::string::npos);
    CHECK(from_file.out.find(format_float(4.0)) != std::string::npos);

    // the command line overrides the file
    const auto overridden =
        invoke({"roots", "--config", path, "--lambda", "9", "--format", "csv"});
    CHECK(overridden.code == 0);
    CHECK(overridden.out.find("lambda," + format_float(9.0)) !=
          std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("cli: unknown config keys are rejected") {
    const std::string path =
        write_temp(R"({"roots": {"lambda": 1.0, "spin": 2}})");
    const auto result = invoke({"roots", "--config", path});
    CHECK(result.code == 1);
    CHECK(result.err.find("unknown key") != std::string::npos);
    std::remove(path.c_str());

    const std::string top = write_temp(R"({"rots": {}})");
    CHECK(invoke({"roots", "--config", top}).code == 1);
    std::remove(top.c_str());
}

TEST_CASE("cli: --output writes the report to a file") {
    const std::string path = "liapcert_cli_test_out.csv";
    const auto result =
        invoke({"roots", "--lambda", "1", "--c", "0.5", "--output", path});
    CHECK(result.code == 0);
    CHECK(result.out.empty());
    std::ifstream file(path);
    REQUIRE(file.good());
    std::stringstream body;
    body << file.rdbuf();
    CHECK(body.str().find("decrement") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("cli: csv floats parse back to the computed doubles") {
    const auto result = invoke({"scan", "--grid-lambda", "2", "--grid-c", "2"});
    REQUIRE(result.code == 0);
    std::istringstream rows(result.out);
    std::string line;
    std::getline(rows, line);
    std::getline(rows, line);
    // first column of the first row is lambda-min = 0.5 by default
    CHECK(std::strtod(line.c_str(), nullptr) == 0.5);
}

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rankforge/cli.hpp"
#include "rankforge/forms_json.hpp"
#include "rankforge/partition_rank.hpp"

using namespace rankforge;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "rankforge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string data(const char* name) { return std::string(RANKFORGE_DATA_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
    const std::string path = std::string(RANKFORGE_TEST_TMP) + "/" + name;
    std::ofstream(path) << content;
    return path;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("arank on xyz reports bias 3/4") {
    const Run r = invoke({"arank", "--map", data("xyz.json")});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["bias_exact"]["num"] == 3);
    CHECK(doc["result"]["bias_exact"]["den"] == 4);
    CHECK(doc["result"]["vanishing_count"] == 3);
    CHECK(doc["provenance"]["command"] == "arank");
    CHECK(doc["provenance"]["version"] == cli::kVersion);
    CHECK(doc["provenance"]["config"]["map"]["p"] == 2);
    CHECK(doc["ok"] == true);
}

TEST_CASE("malformed and oversized inputs") {
    CHECK(invoke({"arank", "--map", temp_file("bad.json", "{\"p\":2,")}).code == 2);
    CHECK(invoke({"arank", "--map", temp_file("odd.json", R"({"p":4,"dims":[1],"parts":[]})")}).code == 2);
    CHECK(invoke({"arank", "--map", data("missing.json")}).code == 2);
    const Run big = invoke({"arank", "--map", temp_file("big.json", R"({"p":2,"dims":[40,1],"parts":[]})")});
    CHECK(big.code == 3);
    CHECK(big.err.find("requires") != std::string::npos);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"arank"}).code == 2);
    CHECK(invoke({"arank", "--map", data("xyz.json"), "--format", "csv"}).code == 2);
    CHECK(invoke({"arrange"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("prank witness reconstructs the form") {
    const Run r = invoke({"prank", "--map", data("dot3.json")});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["lo"] == 3);
    CHECK(doc["result"]["hi"] == 3);
    CHECK(doc["result"]["exact"] == true);
    CHECK(doc["result"]["witness"].size() == 3);
    const MultilinearMap alpha = map_from_json(read_json_file(data("dot3.json"))).top_part();
    MultilinearMap sum(alpha.shape(), 1);
    for (const auto& s : doc["result"]["witness"]) {
        PartitionSummand ps;
        ps.subset = subset_from_json(s["subset"], 2);
        ps.beta = map_from_json(s["beta"]).top_part();
        ps.gamma = map_from_json(s["gamma"]).top_part();
        sum = sum + summand_form(alpha.shape(), ps);
    }
    CHECK(sum == alpha);
    const Run cut = invoke({"prank", "--map", data("dot3.json"), "--rmax", "1"});
    CHECK(cut.code == 0);
    // Lovett and flattening bounds meet at 3, so no search is needed.
    CHECK(json::parse(cut.out)["result"]["exact"] == true);
    CHECK(json::parse(cut.out)["result"]["nodes"] == 0);
}

TEST_CASE("boxnorm identity on xyz") {
    const Run r = invoke({"boxnorm", "--map", data("xyz.json")});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["box_norm_power"].get<double>() == doctest::Approx(0.75));
    CHECK(doc["result"]["identity_holds"] == true);
}

TEST_CASE("variety subcommands") {
    const json density = json::parse(invoke({"variety", "density", "--map", data("xyz.json")}).out);
    CHECK(density["result"]["density"]["num"] == 7);
    CHECK(density["result"]["density"]["den"] == 8);
    CHECK(density["result"]["holds"] == true);
    const json layer = json::parse(invoke({"variety", "density", "--map", data("xyz.json"), "--layer", "1"}).out);
    CHECK(layer["result"]["size"] == 1);

    const Run conn = invoke({"variety", "connect", "--map", data("dot3.json"), "--nonzero"});
    REQUIRE(conn.code == 0);
    const json c = json::parse(conn.out);
    CHECK(c["result"]["size"] == 28);
    CHECK(c["result"]["connected"] == true);

    const Run bohr = invoke({"variety", "bohr", "--map", data("dot3.json"), "--s", "2", "--seed", "7"});
    REQUIRE(bohr.code == 0);
    const json b = json::parse(bohr.out);
    CHECK(b["result"]["contained"] == true);
    CHECK(b["provenance"]["config"]["seed"] == 7);
    CHECK(bohr.out == invoke({"variety", "bohr", "--map", data("dot3.json"), "--s", "2", "--seed", "7"}).out);
    CHECK(invoke({"variety", "bohr", "--map", data("dot3.json"), "--s", "0"}).code == 2);
    CHECK(invoke({"variety", "shrink", "--map", data("dot3.json")}).code == 2);
}

TEST_CASE("conv chain on xy = 0 over F_2") {
    const Run r = invoke({"conv", "--map", data("xy_f2.json"), "--chain", "1,2", "--table"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["density"]["num"] == 3);
    CHECK(doc["result"]["mean"]["num"] == 13);
    CHECK(doc["result"]["mean"]["den"] == 32);
    CHECK(doc["result"]["table"]["num"].size() == 4);
    const json one = json::parse(invoke({"conv", "--map", data("xy_f2.json"), "--chain", "1"}).out);
    CHECK(one["result"]["mean"]["num"] == 5);
    CHECK(one["result"]["mean"]["den"] == 8);
    CHECK(invoke({"conv", "--map", data("xy_f2.json"), "--chain", "3"}).code == 2);
    CHECK(invoke({"conv", "--map", data("xy_f2.json"), "--chain", "1,x"}).code == 2);
}

TEST_CASE("arrange check suite") {
    const Run r = invoke({"arrange", "--check", "--count", "50", "--seed", "3"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["result"]["holds"] == true);
}

TEST_CASE("polarize with substitution") {
    const Run r = invoke({"polarize", "--poly", data("x1x2x3_f5.json"), "--substitute"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["degree"] == 3);
    CHECK(doc["result"]["symmetric"] == true);
    CHECK(doc["result"]["round_trip"] == true);
    CHECK(doc["result"]["amplification"]["first_holds"] == true);
    CHECK(doc["result"]["substitution"]["verified"] == true);
    const std::string f2 = temp_file("f2.json", R"({"p":2,"n":2,"terms":[{"exp":[1,1],"c":1}]})");
    CHECK(invoke({"polarize", "--poly", f2}).code == 2);
    const std::string extra = temp_file("extra.json", R"({"p":5,"n":2,"terms":[],"q":1})");
    CHECK(invoke({"polarize", "--poly", extra}).code == 2);
}

TEST_CASE("scatter exhaustive over (2,2,2)") {
    const Run r = invoke({"scatter", "--p", "2", "--dims", "2,2,2", "--exhaustive"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 258);
    CHECK(rows[0].rfind("# rankforge", 0) == 0);
    CHECK(rows[1] == "index,seed,bias_num,bias_den,arank,lovett_lower,prank_lo,prank_hi,exact,witness_size,nodes");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        std::vector<std::string> cells;
        std::istringstream in(rows[i]);
        for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
        REQUIRE(cells.size() == 11);
        CHECK(std::stoul(cells[5]) <= std::stoul(cells[7]));
        CHECK(cells[8] == "1");
    }
    CHECK(r.out == invoke({"scatter", "--p", "2", "--dims", "2,2,2", "--exhaustive"}).out);
}

TEST_CASE("scatter random ensemble, empty ensemble and file output") {
    const Run empty = invoke({"scatter", "--count", "0"});
    REQUIRE(empty.code == 0);
    CHECK(lines(empty.out).size() == 2);

    const Run a = invoke({"scatter", "--p", "3", "--dims", "2,2", "--count", "20", "--seed", "11"});
    const Run b = invoke({"scatter", "--p", "3", "--dims", "2,2", "--count", "20", "--seed", "11"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out).size() == 22);
    CHECK(a.out != invoke({"scatter", "--p", "3", "--dims", "2,2", "--count", "20", "--seed", "12"}).out);

    const std::string path = std::string(RANKFORGE_TEST_TMP) + "/scatter.json";
    const Run j = invoke({"scatter", "--count", "5", "--format", "json", "--out", path});
    REQUIRE(j.code == 0);
    CHECK(j.out.empty());
    const json doc = read_json_file(path);
    CHECK(doc["result"]["records"].size() == 5);
    CHECK(doc["provenance"]["config"]["count"] == 5);
}

TEST_CASE("scatter timing column") {
    const Run r = invoke({"scatter", "--count", "3", "--timing"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[1].size() > std::string(",millis").size());
    CHECK(rows[1].substr(rows[1].size() - 7) == ",millis");
}

// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dicl/error.hpp"
#include "dicl/pipeline.hpp"
#include "support.hpp"

using namespace dicl;
using namespace dicl::pipeline;
using namespace dicl::testing;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_count(const fs::path& p) {
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path write_script(const fs::path& dir, const std::string& name, const llm::MockScript& script) {
    const auto p = dir / name;
    std::ofstream(p) << script.to_json().dump(2);
    return p;
}

RunConfig mock_config(const fs::path& script, const fs::path& run_dir) {
    RunConfig c;
    c.dataset = kFixture.string();
    for (auto* p : {&c.generator, &c.rater1, &c.rater2}) {
        p->kind = "mock";
        p->mock_script = script.string();
    }
    c.run_dir = run_dir.string();
    return c;
}

Runtime quiet() {
    Runtime r;
    r.sleeper = [](std::chrono::milliseconds) {};
    return r;
}

/// Concatenated demos, results and eval.json of a run directory.
std::map<std::string, std::string> outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const char* sub : {files::kDemos, files::kResults}) {
        if (!fs::exists(dir / sub)) continue;
        for (const auto& e : fs::directory_iterator(dir / sub)) {
            out[std::string(sub) + "/" + e.path().filename().string()] = slurp(e.path());
        }
    }
    out[files::kEval] = slurp(dir / files::kEval);
    return out;
}

}  // namespace

TEST_CASE("a perfect model scores one on every metric") {
    TempDir dir("pipe-oracle");
    const auto script = write_script(dir.path(), "oracle.json", oracle_script(dataset::load_dataset(kFixture)));
    Pipeline p(mock_config(script, dir / "run"), quiet());
    const auto r = p.run_all();
    CHECK(r.precision == Rational(1));
    CHECK(r.recall == Rational(1));
    CHECK(r.coverage == Rational(1));
    CHECK(r.sessions == 3);
    for (const auto& e : fs::directory_iterator(p.path(files::kDemos))) {
        const auto d = read_json(e.path());
        CHECK(d.at("rounds").at("bundle_feedback") == 0);
        CHECK(d.at("rounds").at("intent_feedback") == 0);
    }
    const auto eval = read_json(p.path(files::kEval));
    CHECK(eval.at("precision").at("exact") == "1");
    CHECK(fs::exists(p.path(files::kManifest)));
}

TEST_CASE("stages need their inputs") {
    TempDir dir("pipe-prereq");
    const auto script = write_script(dir.path(), "s.json", never_repair_script());
    Pipeline p(mock_config(script, dir / "run"), quiet());
    CHECK_THROWS_AS(p.evaluate(), PrerequisiteError);
    CHECK_THROWS_AS(p.embed(), PrerequisiteError);
    p.ingest();
    CHECK_THROWS_AS(p.retrieve(), PrerequisiteError);
    p.embed();
    CHECK_THROWS_AS(p.demo(), PrerequisiteError);
    p.retrieve();
    CHECK_THROWS_AS(p.infer(), PrerequisiteError);
    p.demo();
    CHECK_THROWS_AS(p.evaluate(), PrerequisiteError);
    p.infer();
    CHECK_NOTHROW(p.evaluate());
}

TEST_CASE("a run directory belongs to one config and one process") {
    TempDir dir("pipe-lock");
    const auto script = write_script(dir.path(), "s.json", never_repair_script());
    const auto config = mock_config(script, dir / "run");
    {
        Pipeline p(config, quiet());
        CHECK_THROWS_AS(Pipeline(config, quiet()), LockError);
    }
    auto other = config;
    other.seed = 7;
    CHECK_THROWS_AS(Pipeline(other, quiet()), ConfigMismatchError);
    auto moved = config;
    moved.run_dir = (dir / "run").string();
    CHECK_NOTHROW(Pipeline(moved, quiet()));
    CHECK(LockError("x").code() == ExitCode::kLocked);
    CHECK(ConfigMismatchError("x").code() == ExitCode::kConfigMismatch);
    CHECK(PrerequisiteError("x").code() == ExitCode::kMissingPrerequisite);
}

TEST_CASE("rerunning reuses finished stages") {
    TempDir dir("pipe-rerun");
    const auto script = write_script(dir.path(), "s.json", never_repair_script());
    const auto config = mock_config(script, dir / "run");
    Pipeline(config, quiet()).run_all();
    const auto log = dir / "run" / files::kLlmLog;
    const auto calls = line_count(log);
    const auto before = outputs(dir / "run");
    CHECK(calls > 0);
    Pipeline(config, quiet()).run_all();
    CHECK(line_count(log) == calls);
    CHECK(outputs(dir / "run") == before);
}

TEST_CASE("identical configs give identical files and replay reproduces them") {
    TempDir dir("pipe-determinism");
    const auto script = write_script(dir.path(), "s.json", never_repair_script());
    Runtime two_workers = quiet();
    two_workers.workers = 2;
    Pipeline(mock_config(script, dir / "a"), quiet()).run_all();
    Pipeline(mock_config(script, dir / "b"), two_workers).run_all();
    const auto a = outputs(dir / "a");
    CHECK(a.size() == 7);
    CHECK(a == outputs(dir / "b"));

    auto replay = mock_config(script, dir / "c");
    for (auto* p : {&replay.generator, &replay.rater1, &replay.rater2}) {
        p->kind = "replay";
        p->mock_script.clear();
        p->replay_log = (dir / "a" / files::kLlmLog).string();
    }
    Pipeline(replay, quiet()).run_all();
    const auto c = outputs(dir / "c");
    REQUIRE(c.size() == a.size());
    for (const auto& [name, text] : a) CHECK_MESSAGE(c.at(name) == text, name);
}

TEST_CASE("few-shot and zero-shot runs") {
    TempDir dir("pipe-modes");
    const auto script = write_script(dir.path(), "oracle.json", oracle_script(dataset::load_dataset(kFixture)));
    auto few = mock_config(script, dir / "few");
    few.inference.mode = infer::Mode::kFewShotRandom;
    const auto rf = Pipeline(few, quiet()).run_all();
    CHECK(rf.precision == Rational(1));
    const auto demos = dir / "few" / files::kDemos;
    const bool no_demos = !fs::exists(demos) || fs::is_empty(demos);
    CHECK(no_demos);

    auto zero = mock_config(script, dir / "zero");
    zero.inference.mode = infer::Mode::kZeroShot;
    const auto rz = Pipeline(zero, quiet()).run_all();
    CHECK(rz.recall == Rational(1));
    for (const auto& e : fs::directory_iterator(dir / "zero" / files::kResults)) {
        CHECK(read_json(e.path()).at("sources").empty());
    }
    const auto table = report({dir / "few", dir / "zero"});
    CHECK(table.find("few") != std::string::npos);
    CHECK(table.find("zero") != std::string::npos);
}

TEST_CASE("configs round-trip and validate") {
    RunConfig c = mock_config("script.json", "/tmp/x");
    c.loops = {2, 3, 0};
    c.inference.flags.use_rules = false;
    c.hit_counting = eval::HitCounting::kUniqueGroundTruth;
    CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());
    auto bad = c;
    bad.generator.mock_script.clear();
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.rater1.kind = "replay";
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("session ids map to distinct safe file names") {
    CHECK(safe_name("s01") == "s01");
    const auto a = safe_name("a/b");
    const auto b = safe_name("a_b");
    CHECK(a != b);
    CHECK(a.find('/') == std::string::npos);
    CHECK(safe_name("..") != "..");
}

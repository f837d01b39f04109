#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lpeval/cli/commands.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace lpeval;
using namespace lpeval::cli;

namespace {

const fs::path kData = LPEVAL_TEST_DATA;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lpeval_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Result {
  int code;
  std::string err;
};

// Runs the tool with stderr captured.
Result run_tool(const std::string& args, const fs::path& dir) {
  static int calls = 0;
  const auto err = dir / ("stderr_" + std::to_string(++calls) + ".txt");
  const std::string cmd = std::string("\"") + LPEVAL_BINARY + "\" " + args + " > /dev/null 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), read_file(err)};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string evaluate_fixture(const fs::path& out, const std::string& extra = "") {
  const auto r = run_tool("--config \"" + (kData / "fixture.ini").string() + "\" --out \"" +
                              out.string() + "\" " + extra + " evaluate",
                          out.parent_path());
  EXPECT_EQ(r.code, 0) << r.err;
  return read_file(out / "evaluation.csv");
}

// Candidate pairs, distances, labels and CN/PA scores straight from the event file.
struct FixtureOracle {
  std::map<std::string, int> ids;
  oracle::DenseGraph feature{0};
  std::set<std::pair<int, int>> label_edges;

  FixtureOracle() {
    std::istringstream in(read_file(kData / "fixture_events.tsv"));
    std::string line;
    std::vector<std::tuple<std::string, std::string, long>> events;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ss(line);
      std::string u, v;
      long t;
      ss >> u >> v >> t;
      events.emplace_back(u, v, t);
    }
    for (const auto& [u, v, t] : events)
      if (t <= 7)
        for (const auto& name : {u, v}) ids.emplace(name, static_cast<int>(ids.size()));
    feature = oracle::DenseGraph(ids.size());
    for (const auto& [u, v, t] : events) {
      if (t <= 7) feature.add(ids.at(u), ids.at(v), 1.0);
      if (t >= 8 && t <= 9 && ids.count(u) && ids.count(v))
        label_edges.insert(std::minmax(ids.at(u), ids.at(v)));
    }
  }

  double common_neighbors(int a, int b) const {
    double n = 0;
    for (std::size_t z = 0; z < feature.n; ++z) n += feature.w[a][z] > 0 && feature.w[b][z] > 0;
    return n;
  }
  double degree(int a) const {
    double d = 0;
    for (std::size_t z = 0; z < feature.n; ++z) d += feature.w[a][z] > 0;
    return d;
  }
};

std::string bucket_name(int hops) { return hops >= 4 ? "beyond" : std::to_string(hops); }

}  // namespace

TEST(Cli, EvaluateMatchesGoldenFile) {
  const auto dir = scratch("golden");
  EXPECT_EQ(evaluate_fixture(dir / "out"), read_file(kData / "golden_evaluation.csv"));
}

TEST(Cli, GoldenCandidateSetAndScoresMatchOracle) {
  const auto dir = scratch("candidates");
  const auto r = run_tool("--config \"" + (kData / "fixture.ini").string() + "\" --out \"" +
                              (dir / "out").string() + "\" score",
                          dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const FixtureOracle o;
  const auto hops = oracle::all_pairs_hops(o.feature);
  std::set<std::pair<int, int>> expected;
  for (std::size_t a = 0; a < o.feature.n; ++a)
    for (std::size_t b = a + 1; b < o.feature.n; ++b)
      if (hops[a][b] >= 2) expected.insert({int(a), int(b)});

  for (const std::string name : {"cn", "pa"}) {
    std::set<std::pair<int, int>> seen;
    for (const auto& row : read_csv(dir / "out" / ("scores_" + name + ".csv"))) {
      const auto key = std::minmax(o.ids.at(row[0]), o.ids.at(row[1]));
      seen.insert(key);
      const auto h = hops[key.first][key.second];
      EXPECT_EQ(row[2], h == oracle::kInf ? "disconnected" : bucket_name(int(h))) << row[0] << row[1];
      EXPECT_EQ(row[3], o.label_edges.count(key) ? "1" : "0");
      const double want = name == "cn" ? o.common_neighbors(key.first, key.second)
                                       : o.degree(key.first) * o.degree(key.second);
      EXPECT_EQ(std::stod(row[4]), want);
    }
    EXPECT_EQ(seen, expected);
  }
}

TEST(Cli, GoldenAreasMatchOracles) {
  const auto dir = scratch("areas");
  const auto r = run_tool("--config \"" + (kData / "fixture.ini").string() + "\" --out \"" +
                              (dir / "out").string() + "\" score",
                          dir);
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t checked = 0;
  for (const auto& row : read_csv(kData / "golden_evaluation.csv")) {
    const auto& predictor = row[0];
    const auto& bucket = row[1];
    std::vector<oracle::Scored> items;
    const auto stem = predictor == "propflow:3" ? std::string("propflow-3") : predictor;
    for (const auto& s : read_csv(dir / "out" / ("scores_" + stem + ".csv")))
      if (bucket == "all" || s[2] == bucket) items.push_back({std::stod(s[4]), s[3] == "1"});
    EXPECT_EQ(std::to_string(items.size()),
              std::to_string(std::stoul(row[2]) + std::stoul(row[3])));
    if (row[4] == "undefined") {
      EXPECT_EQ(row[2], "0");
      continue;
    }
    EXPECT_NEAR(std::stod(row[4]), oracle::pair_count_auroc(items), 1e-12) << predictor << bucket;
    EXPECT_NEAR(std::stod(row[5]), oracle::interpolated_aupr(items), 1e-9) << predictor << bucket;
    ++checked;
  }
  EXPECT_EQ(checked, 12u);
}

TEST(Cli, ManifestDigestsMatchFiles) {
  const auto dir = scratch("manifest");
  evaluate_fixture(dir / "out");
  const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["input_sha256"], sha256_hex(read_file(kData / "fixture_events.tsv")));
  EXPECT_EQ(manifest["seed"], 42);
  EXPECT_EQ(manifest["command"], "evaluate");
  ASSERT_GE(manifest["artifacts"].size(), 17u);
  for (const auto& [name, digest] : manifest["artifacts"].items())
    EXPECT_EQ(digest, sha256_hex(read_file(dir / "out" / name))) << name;
  for (const auto& entry : fs::directory_iterator(dir / "out"))
    EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST(Cli, OutputIdenticalAcrossThreadCounts) {
  const auto dir = scratch("threads");
  evaluate_fixture(dir / "one", "--threads 1");
  evaluate_fixture(dir / "eight", "--threads 8");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "one")) {
    EXPECT_EQ(read_file(entry.path()), read_file(dir / "eight" / entry.path().filename()))
        << entry.path().filename();
    ++files;
  }
  EXPECT_GT(files, 0u);
}

TEST(Cli, ConfigErrorExitsTwoWithFieldPath) {
  const auto dir = scratch("config_error");
  std::ofstream(dir / "bad.ini") << "[dataset]\npath = " << (kData / "fixture_events.tsv").string()
                                 << "\n[window]\ntrain_feature = 0:5\ntrain_label = 6:7\n"
                                 << "test_feature = 0:7\ntest_label = 8:9\n[stratify]\nlmax = 1\n";
  auto r = run_tool("--config \"" + (dir / "bad.ini").string() + "\" --out \"" +
                        (dir / "out").string() + "\" evaluate",
                    dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stratify.lmax"), std::string::npos) << r.err;

  std::ofstream(dir / "unknown.ini") << "[predictors]\nflavour = cn\n";
  r = run_tool("--config \"" + (dir / "unknown.ini").string() + "\" evaluate", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("predictors.flavour"), std::string::npos) << r.err;

  r = run_tool("--no-such-flag evaluate", dir);
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, DataErrorExitsThreeWithLineNumber) {
  const auto dir = scratch("data_error");
  std::ofstream(dir / "events.tsv") << "a\tb\t0\nb\tc\t1\nc\td\n";
  std::ofstream(dir / "run.ini") << "[dataset]\npath = events.tsv\n"
                                 << "[window]\ntrain_feature = 0:0\ntrain_label = 1:1\n"
                                 << "test_feature = 0:1\ntest_label = 2:2\n";
  const auto r = run_tool("--config \"" + (dir / "run.ini").string() + "\" --out \"" +
                              (dir / "out").string() + "\" snapshot",
                          dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, ExternalScoresEvaluateWithoutDataset) {
  const auto dir = scratch("external");
  std::ofstream(dir / "scores.csv") << "u,v,distance,label,score\n"
                                    << "a,b,2,1,0.9\nc,d,2,0,0.8\ne,f,3,1,0.7\ng,h,3,0,0.1\n";
  const auto r = run_tool("--scores \"" + (dir / "scores.csv").string() + "\" --out \"" +
                              (dir / "out").string() + "\" evaluate",
                          dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir / "out" / "evaluation.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2][0], "external");
  EXPECT_EQ(rows[2][4], "0.75");
}

TEST(Config, LoadsSectionsAndRebasesPaths) {
  RunConfig c;
  std::istringstream in(
      "[dataset]\npath = events.tsv\nformat = clique\nweight_rule = unit\n"
      "[predictors]\nlist = aa, propflow:4\npolicy = max\n"
      "[stratify]\nlmax = 5\nmode = query\nbeyond = false\n"
      "[window]\ntrain_feature = 0:3\ntrain_label = 4:4\ntest_feature = 0:4\ntest_label = 5:5\n"
      "[sampling]\nmode = fair\nrate = 0.25\n"
      "[run]\nseed = 7\n");
  load_config(c, in, "/data/run");
  EXPECT_EQ(c.dataset, fs::path("/data/run/events.tsv"));
  EXPECT_EQ(c.format, EventFormat::clique);
  ASSERT_EQ(c.predictors.size(), 2u);
  EXPECT_EQ(c.predictors[1].name(), "propflow:4");
  EXPECT_EQ(c.lmax, 5u);
  EXPECT_EQ(c.mode, GenerationMode::from_testing);
  EXPECT_FALSE(c.include_beyond);
  EXPECT_EQ(c.sampling.rate, 0.25);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_NO_THROW(c.validate(true));
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](const std::string& key, const std::string& value) {
    RunConfig c;
    try {
      apply_setting(c, key, value);
      c.validate(false);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  EXPECT_EQ(field_of("window.test_label", "9-3"), "window.test_label");
  EXPECT_EQ(field_of("sampling.rate", "abc"), "sampling.rate");
  EXPECT_EQ(field_of("predictors.list", "cn, katz"), "predictors.list");
  EXPECT_EQ(field_of("nothing.here", "1"), "nothing.here");
  RunConfig c;
  EXPECT_THROW(c.validate(true), ConfigError);
}

TEST(Config, EchoRoundTripsThroughSettings) {
  RunConfig c;
  apply_setting(c, "predictors.list", "cn,pa");
  apply_setting(c, "variance.rates", "0.1, 0.5");
  const auto echo = c.echo();
  EXPECT_EQ(echo["predictors"]["list"], (nlohmann::ordered_json{"cn", "pa"}));
  EXPECT_EQ(echo["tie_policy"], "tie-groups-atomic");
  EXPECT_FALSE(echo.contains("threads"));
}

TEST(Manifest, AtomicWriteAndDigest) {
  const auto dir = scratch("atomic");
  atomic_write(dir / "a.txt", "abc");
  EXPECT_EQ(read_file(dir / "a.txt"), "abc");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(read_file(dir / "missing"), DataError);
}

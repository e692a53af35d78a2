#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stochhom/campaign.hpp"
#include "stochhom/error.hpp"

using namespace stochhom;
namespace fs = std::filesystem;

namespace {

// Small fast campaign; `overrides` holds "key = value" lines that replace
// the defaults.
CampaignConfig small_config(const std::string& overrides = "") {
  std::map<std::string, std::string> kv{{"f_sp", "0.1"},
                                        {"n_sp", "5"},
                                        {"resolution", "16"},
                                        {"samples_per_point", "3"},
                                        {"max_samples_per_point", "5"},
                                        {"base_seed", "9"}};
  std::istringstream is(overrides);
  for (std::string line; std::getline(is, line);) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto key = line.substr(0, eq);
    key.erase(key.find_last_not_of(' ') + 1);
    kv[key] = line.substr(eq + 1);
  }
  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
  return parse_config(text);
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("stochhom_campaign_" + std::to_string(::getpid()) + "_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SampleResult fake_sample(int index, double bulk, double shear) {
  SampleResult r;
  r.sample_index = index;
  r.ok = true;
  r.bulk = bulk;
  r.shear = shear;
  return r;
}

}  // namespace

TEST(Seeds, DistinctAcrossPointsAndSamples) {
  std::set<std::uint64_t> seen;
  for (int p = 0; p < 100; ++p)
    for (int s = 0; s < 20; ++s) seen.insert(sample_seed(1, p, s));
  EXPECT_EQ(seen.size(), 2000u);
  EXPECT_NE(sample_seed(1, 0, 0), sample_seed(2, 0, 0));
  EXPECT_EQ(sample_seed(1, 3, 4), sample_seed(1, 3, 4));
}

TEST(Sample, DeterministicAndWithinBounds) {
  auto cfg = small_config();
  auto p = expand_grid(cfg)[0];
  auto a = run_sample(cfg, p, 1);
  auto b = run_sample(cfg, p, 1);
  ASSERT_TRUE(a.ok) << a.failure_message;
  EXPECT_TRUE(a.same_outcome(b));
  ASSERT_TRUE(a.c_hom && b.c_hom);
  EXPECT_EQ(*a.c_hom, *b.c_hom);
  EXPECT_TRUE(a.within_bounds);
  EXPECT_GT(a.bulk, 1.0);
  EXPECT_GT(a.shear, 1.0);
  EXPECT_GT(a.inclusion_fraction, 0.05);
  EXPECT_FALSE(a.same_outcome(run_sample(cfg, p, 2)));
}

TEST(Sample, BulkModeSkipsShear) {
  auto cfg = small_config("moduli = bulk\n");
  auto r = run_sample(cfg, expand_grid(cfg)[0], 0);
  ASSERT_TRUE(r.ok);
  EXPECT_FALSE(r.c_hom);
  EXPECT_TRUE(std::isnan(r.shear));
  EXPECT_GT(r.bulk, 1.0);
  // Same microstructure as full mode, so the hydrostatic bulk agrees.
  auto full = small_config();
  auto f = run_sample(full, expand_grid(full)[0], 0);
  EXPECT_NEAR(r.bulk / f.bulk, 1.0, 1e-5);
}

TEST(Sample, GenerationFailureIsCaptured) {
  auto cfg = small_config("rsa_max_attempts = 1\nf_sp = 0.55\nn_sp = 30\n");
  auto r = run_sample(cfg, expand_grid(cfg)[0], 0);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.failure_kind, "GenerationStalled");
  EXPECT_FALSE(r.failure_message.empty());
}

TEST(Point, UnitContrastGivesUnitModuli) {
  auto cfg = small_config("contrast = 1\n");
  auto out = run_point(cfg, expand_grid(cfg)[0]);
  ASSERT_EQ(out.samples.size(), 3u);
  for (const auto& s : out.samples) {
    EXPECT_NEAR(s.bulk, 1.0, 1e-8);
    EXPECT_NEAR(s.shear, 1.0, 1e-8);
  }
  ASSERT_TRUE(out.summary.bulk);
  EXPECT_LT(out.summary.bulk->std_dev, 1e-8);
  EXPECT_EQ(out.summary.status, PointStatus::Complete);
}

TEST(Point, SingleSampleHasNoInterval) {
  auto cfg = small_config("samples_per_point = 1\nmax_samples_per_point = 1\n");
  auto out = run_point(cfg, expand_grid(cfg)[0]);
  ASSERT_EQ(out.samples.size(), 1u);
  ASSERT_TRUE(out.summary.bulk);
  EXPECT_FALSE(out.summary.bulk->half_width);
  EXPECT_EQ(out.summary.bulk->mean, out.samples[0].bulk);
  EXPECT_EQ(out.summary.status, PointStatus::Complete);
}

TEST(Point, ConstructedSummary) {
  auto cfg = small_config("samples_per_point = 10\nmax_samples_per_point = 10\n");
  std::vector<SampleResult> v;
  for (int i = 9; i >= 0; --i) v.push_back(fake_sample(i, 1.0 + 0.1 * i, 2.0));
  auto s = summarize_point(cfg, expand_grid(cfg)[0], v);
  ASSERT_TRUE(s.bulk && s.bulk->half_width);
  const double sd = 0.1 * std::sqrt(110.0 / 12.0);
  EXPECT_NEAR(s.bulk->mean, 1.45, 1e-14);
  EXPECT_NEAR(s.bulk->std_dev, sd, 1e-14);
  const double t9 = boost::math::quantile(boost::math::students_t(9), 0.975);
  EXPECT_NEAR(t9, 2.2622, 1e-4);
  EXPECT_NEAR(*s.bulk->half_width, t9 * sd / std::sqrt(10.0), 1e-9);
  EXPECT_EQ(*s.shear->half_width, 0.0);
  EXPECT_EQ(s.samples, 10);
}

TEST(Point, AllFailuresRaisePointFailed) {
  auto cfg = small_config("rsa_max_attempts = 1\nf_sp = 0.55\nn_sp = 30\n");
  try {
    run_point(cfg, expand_grid(cfg)[0]);
    FAIL();
  } catch (const PointFailedError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PointFailed);
    EXPECT_EQ(e.outcome().summary.status, PointStatus::Failed);
    EXPECT_EQ(e.outcome().summary.failures, 3);
  }
}

TEST(Point, EscalatesOnWideInterval) {
  auto cfg = small_config("escalation_threshold = 1e-9\n");
  auto out = run_point(cfg, expand_grid(cfg)[0]);
  EXPECT_EQ(out.samples.size(), 5u);
  EXPECT_TRUE(out.summary.escalated);
  auto relaxed = small_config("escalation_threshold = 10\n");
  auto r = run_point(relaxed, expand_grid(relaxed)[0]);
  EXPECT_EQ(r.samples.size(), 3u);
  EXPECT_FALSE(r.summary.escalated);
}

TEST(Sweep, SinglePointEqualsRunPoint) {
  auto cfg = small_config();
  auto out = run_point(cfg, expand_grid(cfg)[0]);
  auto table = sweep(cfg, std::nullopt);
  ASSERT_EQ(table.points.size(), 1u);
  EXPECT_TRUE(table.complete);
  EXPECT_EQ(table.points[0].bulk->mean, out.summary.bulk->mean);
  EXPECT_EQ(table.points[0].shear->half_width, out.summary.shear->half_width);
  EXPECT_EQ(table.points[0].samples, out.summary.samples);
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  auto one = sweep(small_config("f_sp = [0.05, 0.1]\n"), std::nullopt);
  auto three = sweep(small_config("f_sp = [0.05, 0.1]\nworkers = 3\n"), std::nullopt);
  ASSERT_EQ(one.points.size(), 2u);
  for (int p = 0; p < 2; ++p) {
    EXPECT_EQ(one.points[p].bulk->mean, three.points[p].bulk->mean);
    EXPECT_EQ(one.points[p].shear->std_dev, three.points[p].shear->std_dev);
  }
}

TEST(Sweep, BudgetMarksIncomplete) {
  auto cfg = small_config("f_sp = [0.05, 0.1]\nbudget = 4\n");
  auto table = sweep(cfg, std::nullopt);
  EXPECT_FALSE(table.complete);
  EXPECT_EQ(table.points[0].status, PointStatus::Complete);
  EXPECT_EQ(table.points[1].status, PointStatus::Incomplete);
  auto csv = summary_csv(cfg, table);
  EXPECT_NE(csv.find(",incomplete,"), std::string::npos);
  EXPECT_NE(csv.find("# table incomplete\n"), std::string::npos);
}

TEST(Sweep, ResumeIsIdempotent) {
  TempDir dir("resume");
  auto cfg = small_config("f_sp = [0.05, 0.1]\n");
  auto first = sweep(cfg, dir.path);
  const std::string summary = read_file(dir.path / "summary.csv");
  auto record = sample_record_path(dir.path, 1, 2);
  ASSERT_TRUE(fs::exists(record));
  const auto stamp = fs::last_write_time(record);
  const std::string record_text = read_file(record);

  auto second = sweep(cfg, dir.path);
  EXPECT_EQ(read_file(dir.path / "summary.csv"), summary);
  EXPECT_EQ(fs::last_write_time(record), stamp);
  EXPECT_EQ(read_file(record), record_text);
  EXPECT_EQ(first.points[1].bulk->mean, second.points[1].bulk->mean);

  auto rep = report(dir.path);
  EXPECT_EQ(summary_csv(cfg, rep), summary);
  EXPECT_TRUE(fs::exists(dir.path / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir.path / "config.normalized"));
  EXPECT_TRUE(fs::exists(dir.path / "series" / "bulk_vs_f_sp.csv"));
}

TEST(Sweep, InterruptedRunCompletesOnRestart) {
  TempDir dir("restart");
  auto cfg = small_config("f_sp = [0.05, 0.1]\n");
  auto full = sweep(cfg, std::nullopt);
  auto partial = sweep(small_config("f_sp = [0.05, 0.1]\nbudget = 3\n"), dir.path);
  EXPECT_FALSE(partial.complete);
  EXPECT_FALSE(report(dir.path).complete);
  // Records keyed by point hash are reused even though the budget changed.
  fs::remove(sample_record_path(dir.path, 0, 1));
  auto resumed = sweep(cfg, dir.path);
  EXPECT_TRUE(resumed.complete);
  EXPECT_EQ(summary_csv(cfg, resumed), summary_csv(cfg, full));
}

TEST(Sweep, StaleRecordsAreRecomputed) {
  TempDir dir("stale");
  auto cfg = small_config();
  sweep(cfg, dir.path);
  auto changed = small_config("contrast = 4\n");
  auto t = sweep(changed, dir.path);
  auto direct = sweep(changed, std::nullopt);
  EXPECT_EQ(t.points[0].bulk->mean, direct.points[0].bulk->mean);
}

TEST(Records, RoundTripAndHashCheck) {
  TempDir dir("records");
  fs::create_directories(dir.path);
  auto cfg = small_config();
  auto r = run_sample(cfg, expand_grid(cfg)[0], 0);
  auto path = dir.path / "r.json";
  write_sample_record(path, r, 77);
  auto back = read_sample_record(path, 77);
  ASSERT_TRUE(back);
  EXPECT_TRUE(back->same_outcome(r));
  EXPECT_FALSE(read_sample_record(path, 78));
  EXPECT_FALSE(read_sample_record(dir.path / "missing.json", 77));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "entsac/config.hpp"
#include "entsac/errors.hpp"
#include "entsac/metrics.hpp"
#include "entsac/replay.hpp"
#include "entsac/trainer.hpp"

using namespace entsac;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "entsac_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Transition make_transition(double tag, bool truncated = false) {
    Transition t;
    t.obs = {tag, 0.0, 0.0};
    t.action = {0.1};
    t.reward = -tag;
    t.next_obs = {tag + 1.0, 0.0, 0.0};
    t.terminal = false;
    t.truncated = truncated;
    return t;
}

// Small, fast config for smoke/determinism runs.
RunConfig tiny_config() {
    RunConfig cfg;
    cfg.total_steps = 1200;
    cfg.warmup_steps = 300;
    cfg.batch_size = 32;
    cfg.replay_capacity = 2000;
    cfg.hidden = {16, 16};
    cfg.eval_interval = 0;  // only the final eval
    cfg.eval_episodes = 2;
    return cfg;
}

}  // namespace

TEST_CASE("replay: uniform sampling frequencies within 5 sigma") {
    ReplayBuffer buffer(1000);
    for (int i = 0; i < 1000; ++i) buffer.push(make_transition(i));
    Rng rng(3);
    constexpr int kSamples = 1000000;
    std::vector<int> counts(1000, 0);
    for (int i = 0; i < kSamples; ++i) {
        SacBatch batch = buffer.sample(1, rng);
        counts[static_cast<int>(batch.obs.at(0, 0))] += 1;
    }
    double p = 1.0 / 1000.0;
    double sigma = std::sqrt(kSamples * p * (1.0 - p));
    for (int c : counts) CHECK(std::abs(c - kSamples * p) <= 5.0 * sigma);
}

TEST_CASE("replay: overwrite drops the oldest entries and keeps order") {
    ReplayBuffer buffer(10);
    for (int i = 0; i < 17; ++i) buffer.push(make_transition(i));
    CHECK(buffer.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(buffer.at(i).obs[0] == doctest::Approx(7.0 + i));
}

TEST_CASE("replay: rejects terminal+truncated and empty sampling") {
    ReplayBuffer buffer(4);
    Transition bad = make_transition(1.0);
    bad.terminal = true;
    bad.truncated = true;
    CHECK_THROWS_AS(buffer.push(bad), ContractError);
    Rng rng(5);
    CHECK_THROWS_AS(buffer.sample(1, rng), ContractError);
}

TEST_CASE("config: round-trip, unknown field, missing field, bad values") {
    RunConfig cfg;
    cfg.seed = 42;
    cfg.target_entropy = 0.5;
    RunConfig loaded = RunConfig::from_json_string(cfg.to_json_string());
    CHECK(loaded.to_json_string() == cfg.to_json_string());
    CHECK(loaded.seed == 42);
    CHECK(loaded.variant == BackupVariant::kCorrected);

    CHECK_THROWS_AS(RunConfig::from_json_string("{\"bogus\": 1}"), ConfigError);

    std::string with_unknown = cfg.to_json_string();
    with_unknown.insert(1, "\"mystery\": 3,");
    CHECK_THROWS_AS(RunConfig::from_json_string(with_unknown), ConfigError);

    RunConfig bad = cfg;
    bad.tau = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.alpha0 = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("metrics: header is exact; round-trip through the reader") {
    CHECK(std::string(kMetricsHeader) ==
          "env_step,episode_return,alpha,log_alpha,mean_batch_entropy,critic_loss,actor_loss,"
          "temperature_loss,eval_return_mean,eval_return_std");

    fs::path dir = fresh_dir("metrics_roundtrip");
    fs::path file = dir / "metrics.csv";
    {
        MetricsWriter writer(file);
        MetricsRow row;
        row.env_step = 1000;
        row.alpha = 0.5;
        row.log_alpha = std::log(0.5);
        row.critic_loss = 12.25;
        writer.write(row);
        MetricsRow ep;
        ep.env_step = 1200;
        ep.episode_return = -321.5;
        ep.alpha = 0.25;
        writer.write(ep);
    }
    MetricsTable table = read_metrics_csv(file);
    REQUIRE(table.columns.size() == 10);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][0] == 1000.0);
    CHECK(table.rows[0][2] == 0.5);
    CHECK_FALSE(table.rows[0][1].has_value());
    CHECK(table.rows[1][1] == -321.5);
    auto alpha_series = table.series("alpha");
    CHECK(alpha_series.size() == 2);
    CHECK_THROWS_AS(table.column_index("nope"), ConfigError);
}

TEST_CASE("train: zero steps emits only the initial checkpoint and a bare metrics header") {
    fs::path dir = fresh_dir("train_zero");
    RunConfig cfg = tiny_config();
    cfg.total_steps = 0;
    TrainOutcome outcome = train(cfg, dir);
    CHECK_FALSE(outcome.aborted);
    CHECK(fs::exists(dir / "config.json"));
    CHECK(fs::exists(dir / "checkpoint_final.json"));
    CHECK(slurp(dir / "metrics.csv") == std::string(kMetricsHeader) + "\n");
    CHECK(outcome.final_alpha == doctest::Approx(1.0));
}

TEST_CASE("train: identical config and seed give bit-identical artifacts") {
    RunConfig cfg = tiny_config();
    cfg.seed = 7;
    fs::path dir1 = fresh_dir("repro_a");
    fs::path dir2 = fresh_dir("repro_b");
    train(cfg, dir1);
    train(cfg, dir2);
    CHECK(slurp(dir1 / "metrics.csv") == slurp(dir2 / "metrics.csv"));
    CHECK(slurp(dir1 / "checkpoint_final.json") == slurp(dir2 / "checkpoint_final.json"));
    CHECK(slurp(dir1 / "config.json") == slurp(dir2 / "config.json"));
}

TEST_CASE("train: no loss columns before updates start; episode rows appear") {
    RunConfig cfg = tiny_config();
    cfg.total_steps = 250;  // ends inside warmup
    cfg.warmup_steps = 300;
    fs::path dir = fresh_dir("train_warmup_only");
    train(cfg, dir);
    MetricsTable table = read_metrics_csv(dir / "metrics.csv");
    std::size_t critic_col = table.column_index("critic_loss");
    std::size_t ep_col = table.column_index("episode_return");
    bool saw_episode = false;
    for (const auto& row : table.rows) {
        CHECK_FALSE(row[critic_col].has_value());
        if (row[ep_col]) saw_episode = true;
    }
    CHECK(saw_episode);  // the 200-step truncation lands before 250
}

TEST_CASE("train: env steps are monotone in the metrics log, one row per step") {
    RunConfig cfg = tiny_config();
    fs::path dir = fresh_dir("train_monotone");
    train(cfg, dir);
    MetricsTable table = read_metrics_csv(dir / "metrics.csv");
    REQUIRE(!table.rows.empty());
    double prev = 0.0;
    for (const auto& row : table.rows) {
        REQUIRE(row[0].has_value());
        CHECK(*row[0] > prev);
        prev = *row[0];
    }
}

TEST_CASE("train: checkpoints appear every 10k steps") {
    RunConfig cfg = tiny_config();
    cfg.total_steps = 20000;
    cfg.warmup_steps = 19900;  // keep it cheap: almost no updates
    cfg.eval_interval = 0;
    fs::path dir = fresh_dir("train_checkpoints");
    train(cfg, dir);
    CHECK(fs::exists(dir / "checkpoint_000010000.json"));
    CHECK(fs::exists(dir / "checkpoint_000020000.json"));
    CHECK(fs::exists(dir / "checkpoint_final.json"));
}

TEST_CASE("train: infeasible target entropy is rejected unless overridden") {
    RunConfig cfg = tiny_config();
    cfg.target_entropy = 2.0;  // log|A| = log 4 ~ 1.386
    fs::path dir = fresh_dir("train_infeasible");
    CHECK_THROWS_AS(train(cfg, dir), InfeasibleError);

    cfg.override_entropy_bound = true;
    cfg.total_steps = 50;
    cfg.warmup_steps = 50;
    TrainOutcome outcome = train(cfg, fresh_dir("train_infeasible_override"));
    CHECK_FALSE(outcome.aborted);
}

TEST_CASE("train: numeric divergence aborts but saves the checkpoint and a final row") {
    RunConfig cfg = tiny_config();
    cfg.total_steps = 600;
    cfg.warmup_steps = 100;
    cfg.actor_lr = 1e100;
    cfg.critic_lr = 1e100;
    cfg.temperature_lr = 1e100;
    fs::path dir = fresh_dir("train_divergence");
    TrainOutcome outcome = train(cfg, dir);
    CHECK(outcome.aborted);
    CHECK(!outcome.abort_reason.empty());
    CHECK(fs::exists(dir / "checkpoint_final.json"));
    MetricsTable table = read_metrics_csv(dir / "metrics.csv");
    CHECK(!table.rows.empty());
}

TEST_CASE("evaluate: n = 1 gives zero stddev; repeated eval is identical") {
    RunConfig cfg = tiny_config();
    cfg.total_steps = 400;
    cfg.warmup_steps = 350;
    fs::path dir = fresh_dir("eval_repeat");
    train(cfg, dir);

    EvalStats one = evaluate_run(dir, 1, 99);
    CHECK(one.episodes == 1);
    CHECK(one.stddev == 0.0);
    CHECK(one.min == one.max);

    EvalStats a = evaluate_run(dir, 3, 123);
    EvalStats b = evaluate_run(dir, 3, 123);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
    CHECK(a.min == b.min);
    CHECK(a.max == b.max);
}

TEST_CASE("evaluate: random-init deterministic policy lands in the known pendulum band") {
    RunConfig cfg = tiny_config();
    cfg.total_steps = 0;
    fs::path dir = fresh_dir("eval_random_init");
    train(cfg, dir);
    EvalStats stats = evaluate_run(dir, 10, 7);
    // sanity band, intentionally loose
    CHECK(stats.mean <= -300.0);
    CHECK(stats.mean >= -2000.0);
}

TEST_CASE("evaluate: trajectory dump produces the documented CSV") {
    RunConfig cfg = tiny_config();
    cfg.total_steps = 0;
    fs::path dir = fresh_dir("eval_dump");
    train(cfg, dir);
    fs::path csv = dir / "trajectory.csv";
    evaluate_run(dir, 1, 3, csv);
    std::string text = slurp(csv);
    CHECK(text.rfind("step,theta,theta_dot,action,reward\n", 0) == 0);
    // 200 steps + header
    CHECK(std::count(text.begin(), text.end(), '\n') == 201);
}

TEST_CASE("fig1: warmup trajectory identical across variants; artifacts in place") {
    RunConfig base = tiny_config();
    base.total_steps = 450;
    base.warmup_steps = 250;  // first episode (200 steps) is pure warmup
    base.seed = 11;
    fs::path dir = fresh_dir("fig1_smoke");
    Fig1Outcome outcome = fig1_experiment(base, dir);

    CHECK(fs::exists(outcome.corrected_dir / "metrics.csv"));
    CHECK(fs::exists(outcome.missing_dir / "metrics.csv"));
    CHECK(fs::exists(outcome.summary_path));
    CHECK(fs::exists(outcome.chart_path));

    // Both runs share the H0=0.5/alpha0=1 contract in their persisted configs.
    RunConfig c = RunConfig::load((outcome.corrected_dir / "config.json").string());
    RunConfig m = RunConfig::load((outcome.missing_dir / "config.json").string());
    CHECK(c.target_entropy == 0.5);
    CHECK(m.target_entropy == 0.5);
    CHECK(c.alpha0 == 1.0);
    CHECK(c.variant == BackupVariant::kCorrected);
    CHECK(m.variant == BackupVariant::kMissingTarget);

    // Episode 1 ends at step 200, inside warmup: identical return for both.
    MetricsTable tc = read_metrics_csv(outcome.corrected_dir / "metrics.csv");
    MetricsTable tm = read_metrics_csv(outcome.missing_dir / "metrics.csv");
    auto ep_c = tc.series("episode_return");
    auto ep_m = tm.series("episode_return");
    REQUIRE(!ep_c.empty());
    REQUIRE(!ep_m.empty());
    CHECK(ep_c.front().first == 200.0);
    CHECK(ep_c.front() == ep_m.front());

    CHECK(outcome.summary_json.find("alpha_ordering_missing_gt_corrected") != std::string::npos);
}

TEST_CASE("fig1: sequential execution under ENTROPIC_SAC_THREADS=1 matches the layout") {
    setenv("ENTROPIC_SAC_THREADS", "1", 1);
    RunConfig base = tiny_config();
    base.total_steps = 250;
    base.warmup_steps = 250;
    fs::path dir = fresh_dir("fig1_sequential");
    Fig1Outcome outcome = fig1_experiment(base, dir);
    unsetenv("ENTROPIC_SAC_THREADS");
    CHECK(fs::exists(outcome.summary_path));
    CHECK(fs::exists(outcome.chart_path));
}

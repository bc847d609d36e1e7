#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "multicod/synth.hpp"
#include "multicod/trainer.hpp"

using namespace multicod;

namespace {

std::vector<ExecutionResult> passes(std::initializer_list<bool> flags) {
    std::vector<ExecutionResult> out;
    for (bool f : flags) {
        ExecutionResult r;
        r.passed = f;
        r.tests_run = 1;
        out.push_back(r);
    }
    return out;
}

Experience make_exp(double reward, std::uint64_t salt) {
    std::mt19937_64 rng(salt);
    std::normal_distribution<double> dist(0.0, 1.0);
    Experience e;
    e.state.candidates.resize(3);
    for (auto& fv : e.state.candidates) {
        for (int i = 0; i < kFeatureCount; ++i) fv[i] = dist(rng);
    }
    e.reward = reward;
    return e;
}

}  // namespace

TEST_CASE("reward branches, exhaustively for k=3") {
    // adherences: candidate 2 is strictly best
    const std::vector<double> adh = {0.6, 0.8, 1.0};
    for (int mask = 0; mask < 8; ++mask) {
        const auto exec = passes({(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0});
        int first_pass = -1;
        for (int i = 0; i < 3; ++i) {
            if (exec[static_cast<std::size_t>(i)].passed && first_pass < 0) first_pass = i;
        }
        for (int action = 0; action < 3; ++action) {
            double expect;
            if (exec[static_cast<std::size_t>(action)].passed) {
                expect = 1.0;
                if (action == first_pass) expect += 0.5;
                if (action == 2) expect += 0.2;  // best adherence is always index 2
            } else if (first_pass >= 0) {
                expect = -0.5;
            } else {
                expect = -0.1;
            }
            CHECK(compute_reward(exec, adh, action) == doctest::Approx(expect));
        }
    }
}

TEST_CASE("reward special cases") {
    SUBCASE("lone passer with best adherence earns 1.7") {
        const auto exec = passes({false, false, false, false, true});
        const std::vector<double> adh = {0.9, 0.9, 0.9, 0.9, 1.0};
        CHECK(compute_reward(exec, adh, 4) == doctest::Approx(1.7));
        CHECK(compute_reward(exec, adh, 0) == doctest::Approx(-0.5));
    }
    SUBCASE("adherence tie goes to the lowest index") {
        const auto exec = passes({true, true});
        const std::vector<double> adh = {1.0, 1.0};
        CHECK(compute_reward(exec, adh, 0) == doctest::Approx(1.7));
        CHECK(compute_reward(exec, adh, 1) == doctest::Approx(1.0));  // no bonuses
    }
    SUBCASE("all fail") {
        CHECK(compute_reward(passes({false, false}), {1.0, 1.0}, 1) == doctest::Approx(-0.1));
    }
    SUBCASE("bad inputs throw") {
        CHECK_THROWS_AS(compute_reward({}, {}, 0), std::invalid_argument);
        CHECK_THROWS_AS(compute_reward(passes({true}), {1.0, 1.0}, 0), std::invalid_argument);
        CHECK_THROWS_AS(compute_reward(passes({true}), {1.0}, 1), std::invalid_argument);
    }
}

TEST_CASE("replay buffer push, eviction, and priority floor") {
    ReplayBuffer buf(3, 1.0);
    CHECK(buf.capacity() == 3);

    buf.push(make_exp(0.1, 1));
    CHECK(buf.priority(0) == doctest::Approx(1.0));  // optimism default

    buf.push_with_td_error(make_exp(0.2, 2), 4.0);
    buf.push(make_exp(0.3, 3));
    CHECK(buf.priority(2) == doctest::Approx(4.0));  // new entries get the max priority
    CHECK(buf.size() == 3);

    SUBCASE("oldest entry is evicted first") {
        buf.push_with_td_error(make_exp(0.4, 4), 0.5);
        CHECK(buf.size() == 3);
        CHECK(buf.at(0).reward == doctest::Approx(0.4));  // slot 0 was the oldest
        buf.push_with_td_error(make_exp(0.5, 5), 0.5);
        CHECK(buf.at(1).reward == doctest::Approx(0.5));
    }
    SUBCASE("priority floor clamps zero TD errors") {
        buf.update_priority(0, 0.0);
        CHECK(buf.priority(0) == doctest::Approx(kDefaultPriorityFloor));
        buf.push_with_td_error(make_exp(0.9, 9), 0.0);
        CHECK(buf.priority(0) == doctest::Approx(kDefaultPriorityFloor));
    }
    SUBCASE("sampling more than stored throws") {
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(buf.sample_batch(4, 0.4, rng), InsufficientBuffer);
    }
    SUBCASE("zero capacity is rejected") {
        CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
    }
}

TEST_CASE("proportional sampling frequencies match priorities") {
    std::mt19937_64 rng(99);
    const int draws = 100000;

    SUBCASE("priorities (1,3) with exponent 1 sample at (0.25, 0.75)") {
        ReplayBuffer buf(10, 1.0);
        buf.push_with_td_error(make_exp(0.0, 1), 1.0);
        buf.push_with_td_error(make_exp(1.0, 2), 3.0);
        int count1 = 0;
        for (int i = 0; i < draws; ++i) {
            const auto s = buf.sample_batch(1, 0.0, rng);
            if (s[0].index == 1) ++count1;
        }
        const double f1 = static_cast<double>(count1) / draws;
        CHECK(f1 == doctest::Approx(0.75).epsilon(0.015));
    }
    SUBCASE("priorities (1,1,2) sample at (0.25, 0.25, 0.5)") {
        ReplayBuffer buf(10, 1.0);
        buf.push_with_td_error(make_exp(0.0, 1), 1.0);
        buf.push_with_td_error(make_exp(1.0, 2), 1.0);
        buf.push_with_td_error(make_exp(2.0, 3), 2.0);
        int counts[3] = {0, 0, 0};
        for (int i = 0; i < draws; ++i) {
            counts[buf.sample_batch(1, 0.0, rng)[0].index]++;
        }
        CHECK(static_cast<double>(counts[0]) / draws == doctest::Approx(0.25).epsilon(0.05));
        CHECK(static_cast<double>(counts[1]) / draws == doctest::Approx(0.25).epsilon(0.05));
        CHECK(static_cast<double>(counts[2]) / draws == doctest::Approx(0.50).epsilon(0.03));
    }
    SUBCASE("exponent reshapes the distribution") {
        ReplayBuffer buf(10, 0.6);
        buf.push_with_td_error(make_exp(0.0, 1), 1.0);
        buf.push_with_td_error(make_exp(1.0, 2), 4.0);
        int count1 = 0;
        for (int i = 0; i < draws; ++i) {
            if (buf.sample_batch(1, 0.0, rng)[0].index == 1) ++count1;
        }
        const double expect = std::pow(4.0, 0.6) / (1.0 + std::pow(4.0, 0.6));
        CHECK(static_cast<double>(count1) / draws == doctest::Approx(expect).epsilon(0.02));
    }
}

TEST_CASE("importance sampling weights") {
    std::mt19937_64 rng(7);
    ReplayBuffer buf(10, 1.0);
    buf.push_with_td_error(make_exp(0.0, 1), 1.0);
    buf.push_with_td_error(make_exp(1.0, 2), 3.0);

    SUBCASE("beta 0 disables correction") {
        const auto s = buf.sample_batch(2, 0.0, rng);
        for (const auto& x : s) CHECK(x.is_weight == 1.0);
    }
    SUBCASE("beta 1 weights are normalized by the batch max") {
        // draw until both entries appear in one batch
        for (int tries = 0; tries < 200; ++tries) {
            const auto s = buf.sample_batch(2, 1.0, rng);
            bool has0 = false, has1 = false;
            for (const auto& x : s) {
                has0 = has0 || x.index == 0;
                has1 = has1 || x.index == 1;
            }
            if (!has0 || !has1) continue;
            for (const auto& x : s) {
                // w_i = (N p_i)^-1; rarer entry 0 has the larger weight -> 1.0
                if (x.index == 0) CHECK(x.is_weight == doctest::Approx(1.0));
                if (x.index == 1) CHECK(x.is_weight == doctest::Approx(1.0 / 3.0));
            }
            return;
        }
        FAIL("never sampled both entries");
    }
}

TEST_CASE("epsilon schedule") {
    SUBCASE("ungated decay is exactly max(min, start * decay^t)") {
        ExplorationSchedule s;
        for (int t = 1; t <= 800; ++t) {
            s = epsilon_step(s);
            const double expect = std::max(0.05, 0.3 * std::pow(0.995, t));
            CHECK(s.epsilon == doctest::Approx(expect).epsilon(1e-12));
        }
        CHECK(s.epsilon == doctest::Approx(0.05));  // floor reached
    }
    SUBCASE("gated schedule never decays without improvement") {
        ExplorationSchedule s;
        s.performance_gated = true;
        const double before = s.epsilon;
        s = epsilon_step(s, /*rolling_reward_improved=*/false);
        CHECK(s.epsilon == before);
        s = epsilon_step(s, true);
        CHECK(s.epsilon == doctest::Approx(before * 0.995));
    }
}

TEST_CASE("train config validation and json") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());

    SUBCASE("bad values throw ConfigInvalid") {
        TrainConfig bad = c;
        bad.epochs = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
        bad = c;
        bad.gamma = 1.0;
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
        bad = c;
        bad.lr_network = 0.0;
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
        bad = c;
        bad.pri_floor = 0.0;
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
    }
    SUBCASE("json round trip preserves every field") {
        c.epochs = 50;
        c.exploration.performance_gated = true;
        c.network.encoder_dim = 16;
        c.normalize.zscore_meta = false;
        const TrainConfig back = json(c).get<TrainConfig>();
        CHECK(back.epochs == 50);
        CHECK(back.batch_size == 32);
        CHECK(back.target_sync_every == 10);
        CHECK(back.lr_network == doctest::Approx(0.001));
        CHECK(back.lr_alpha == doctest::Approx(0.01));
        CHECK(back.exploration.performance_gated);
        CHECK(back.network.encoder_dim == 16);
        CHECK_FALSE(back.normalize.zscore_meta);
        CHECK(back.exploration.epsilon == doctest::Approx(back.exploration.epsilon_start));
    }
    SUBCASE("defaults match the published hyperparameters") {
        const TrainConfig d;
        CHECK(d.epochs == 200);
        CHECK(d.batch_size == 32);
        CHECK(d.target_sync_every == 10);
        CHECK(d.lr_network == doctest::Approx(0.001));
        CHECK(d.lr_alpha == doctest::Approx(0.01));
        CHECK(d.gamma == 0.0);
        CHECK(d.lambda_l2 == doctest::Approx(1e-4));
        CHECK(d.pri_exponent == doctest::Approx(0.6));
        CHECK(d.is_beta_start == doctest::Approx(0.4));
        CHECK(d.buffer_capacity == 10000);
        CHECK(d.exploration.epsilon_start == doctest::Approx(0.3));
        CHECK(d.exploration.epsilon_min == doctest::Approx(0.05));
        CHECK(d.exploration.decay == doctest::Approx(0.995));
        CHECK(d.network.encoder_dim == 128);
        CHECK(d.network.value_hidden == 64);
        CHECK(d.network.adv_hidden == 64);
    }
}

TEST_CASE("training is deterministic per seed and learns a simple signal") {
    SynthPoolSpec spec;
    spec.k = 4;
    spec.n_tasks = 60;
    spec.pass_rate = 0.3;
    spec.seed = 12;
    SynthPoolGenerator gen(spec);
    std::vector<LabeledPool> pools;
    for (int t = 0; t < spec.n_tasks; ++t) pools.push_back(gen.labeled_pool(t));

    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 16;
    cfg.seed = 5;
    cfg.network.encoder_dim = 16;
    cfg.network.value_hidden = 8;
    cfg.network.adv_hidden = 8;

    const auto a = train(pools, cfg);
    const auto b = train(pools, cfg);
    CHECK(a.params.w_f == b.params.w_f);
    CHECK(a.params.alpha == b.params.alpha);
    REQUIRE(a.report.epochs.size() == 15);
    for (std::size_t i = 0; i < a.report.epochs.size(); ++i) {
        CHECK(a.report.epochs[i].mean_reward ==
              doctest::Approx(b.report.epochs[i].mean_reward));
    }

    cfg.seed = 6;
    const auto c = train(pools, cfg);
    CHECK(a.params.w_f != c.params.w_f);

    // epsilon trace in the report follows the ungated schedule
    for (std::size_t i = 0; i < a.report.epochs.size(); ++i) {
        const double expect = std::max(0.05, 0.3 * std::pow(0.995, static_cast<double>(i)));
        CHECK(a.report.epochs[i].epsilon == doctest::Approx(expect));
    }

    // the learned policy should beat uniform selection on its training pools
    std::mt19937_64 rng(3);
    VadnPolicy policy;
    policy.params = &a.params;
    policy.stats = &a.feature_stats;
    const auto learned = run_policy(PolicyKind::vadn, pools, rng, &policy);
    const auto random = run_policy(PolicyKind::random, pools, rng);
    CHECK(learned.mean_reward > random.mean_reward);

    SUBCASE("empty pools throw") {
        CHECK_THROWS_AS(train({}, cfg), ConfigInvalid);
    }
}

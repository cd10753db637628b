#include "doctest.h"
#include "smartsnap/error.hpp"
#include "smartsnap/reward.hpp"
#include "smartsnap/verifier.hpp"

using namespace smartsnap;

namespace {

FormatReport fmt(bool ok) { return ok ? FormatReport{} : FormatReport{false, {"bad"}}; }
Verdict verdict(bool valid, bool success) { return {valid, success ? Outcome::kSuccess : Outcome::kFailure, "", false}; }

}  // namespace

TEST_SUITE("reward") {
  TEST_CASE("constants") {
    const RewardConfig cfg;
    CHECK(compute_reward(cfg, fmt(false), verdict(true, true), 2).total == -1.0);
    CHECK(compute_reward(cfg, fmt(true), verdict(true, true), 2).total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(compute_reward(cfg, fmt(true), verdict(true, false), 2).total == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(compute_reward(cfg, fmt(true), verdict(false, false), 2).total == 0.0);
    CHECK(compute_reward(cfg, fmt(true), verdict(true, true), 5).total == doctest::Approx(0.9).epsilon(1e-12));
  }

  TEST_CASE("format failure short-circuits") {
    auto b = compute_reward(RewardConfig{}, fmt(false), verdict(true, true), 6);
    CHECK(b == RewardBreakdown{-1.0, 0.0, 0.0, 0.0, -1.0});
  }

  TEST_CASE("exhaustive table") {
    const RewardConfig cfg;
    for (int ok = 0; ok < 2; ++ok) {
      for (int valid = 0; valid < 2; ++valid) {
        for (int success = 0; success < 2; ++success) {
          double prev = 1e9;
          for (int n = 0; n <= 6; ++n) {
            CAPTURE(ok);
            CAPTURE(valid);
            CAPTURE(success);
            CAPTURE(n);
            // Independent restatement of the shaping rule.
            double expect = -1.0;
            if (ok) {
              const double credit = (valid ? 0.2 : 0.0) + (success ? 0.8 : 0.0);
              const double pen = (valid || success) ? 0.05 * std::max(0, n - 3) : 0.0;
              expect = credit - std::min(pen, credit);
            }
            const auto b = compute_reward(cfg, fmt(ok), verdict(valid, success), n);
            CHECK(b.total == doctest::Approx(expect).epsilon(1e-12));
            CHECK(b.total == doctest::Approx(b.format + b.validity + b.complete + b.concise).epsilon(1e-12));
            CHECK(b.total <= prev + 1e-12);
            CHECK(b.total >= -1.0);
            CHECK(b.total <= 1.0 + 1e-12);
            prev = b.total;
            if (ok && success == 0) {
              const auto win = compute_reward(cfg, fmt(true), verdict(valid, true), n);
              CHECK(win.total > b.total);
            }
          }
        }
      }
    }
  }

  TEST_CASE("threshold zero gives the linear form") {
    RewardConfig cfg;
    cfg.concise_threshold = 0;
    CHECK(compute_reward(cfg, fmt(true), verdict(true, true), 2).total == doctest::Approx(0.9).epsilon(1e-12));
  }

  TEST_CASE("validation") {
    RewardConfig cfg;
    cfg.lambda_concise = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(compute_reward(RewardConfig{}, fmt(true), verdict(true, true), -1), InvalidArgument);
  }
}

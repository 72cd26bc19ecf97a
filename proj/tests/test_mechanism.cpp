#include <doctest.h>

#include <cmath>

#include "pricesim/mechanism.hpp"
#include "test_support.hpp"

using namespace pricesim;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

MechanismConfig config2(double epsilon, double delta = 0.0, bool use_reserve = true) {
    MechanismConfig c;
    c.dim = 2;
    c.knowledge_radius = 1.0;
    c.feature_norm_bound = 1.5;
    c.epsilon = epsilon;
    c.delta = delta;
    c.use_reserve = use_reserve;
    c.total_rounds_hint = 100;
    return c;
}

} // namespace

TEST_CASE("new state") {
    MechanismConfig c = config2(0.1);
    MechanismState s = new_state(c);
    CHECK_FALSE(s.is_interval());
    CHECK(s.ellipsoid().shape().isApprox(Matrix::Identity(2, 2)));
    CHECK(s.round == 0);

    MechanismConfig c1;
    c1.dim = 1;
    c1.knowledge_radius = 2.0;
    c1.epsilon = 0.1;
    MechanismState s1 = new_state(c1);
    CHECK(s1.is_interval());
    CHECK(s1.interval().lower == -2.0);
    CHECK(s1.interval().upper == 2.0);

    MechanismConfig bad = c;
    bad.dim = 0;
    CHECK_THROWS_AS(new_state(bad), ConfigError);
    bad = c;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(new_state(bad), ConfigError);
}

TEST_CASE("decide: skip, exploratory, conservative") {
    MechanismConfig c = config2(0.1);
    MechanismState s = new_state(c);

    SUBCASE("reserve above the maximum possible value skips") {
        auto d = decide_price(c, s, vec2(1, 0), 5.0);
        CHECK(d.kind == DecisionKind::Skip);
        CHECK(std::isnan(d.posted_price));
        CHECK(d.bounds.upper == doctest::Approx(1.0));
    }
    SUBCASE("wide knowledge explores at the reserve-clamped midpoint") {
        auto d = decide_price(c, s, vec2(1, 0), 0.3);
        CHECK(d.kind == DecisionKind::Exploratory);
        CHECK(d.posted_price == doctest::Approx(0.3)); // max(0.3, mid = 0)
        CHECK(d.bounds.lower == doctest::Approx(-1.0));
    }
    SUBCASE("narrow knowledge goes conservative") {
        MechanismConfig wide = config2(3.0); // threshold above the width
        auto d = decide_price(wide, s, vec2(1, 0), 0.0);
        CHECK(d.kind == DecisionKind::Conservative);
        CHECK(d.posted_price == doctest::Approx(0.0)); // max(q = 0, lower = -1)

        MechanismConfig pure = config2(3.0, 0.0, false);
        auto dp = decide_price(pure, s, vec2(1, 0), 0.0);
        CHECK(dp.posted_price == doctest::Approx(-1.0)); // plain lower bound
    }
    SUBCASE("feature norm is enforced") {
        CHECK_THROWS_AS(decide_price(c, s, vec2(2, 0), 0.0), FeatureNormError);
        CHECK_THROWS_AS(decide_price(c, s, vec2(0, 0), 0.0), DegenerateDirection);
    }
    SUBCASE("without reserve the reserve is ignored") {
        MechanismConfig pure = config2(0.1, 0.0, false);
        auto d = decide_price(pure, s, vec2(1, 0), 5.0);
        CHECK(d.kind == DecisionKind::Exploratory);
        CHECK(d.posted_price == doctest::Approx(0.0)); // plain midpoint
    }
}

TEST_CASE("observe applies the expected cut") {
    MechanismConfig c = config2(0.1);
    MechanismState s = new_state(c);

    SUBCASE("rejection inside the guard produces the documented shape") {
        auto d = decide_price(c, s, vec2(1, 0), 0.3);
        MechanismState next = observe(c, s, vec2(1, 0), 0.3, d, Feedback{false});
        // alpha = (0 - 0.3)/1 = -0.3 within [-1/2, 0]
        CHECK(next.ellipsoid().shape()(0, 0) == doctest::Approx(0.751111111).epsilon(1e-8));
        CHECK(next.ellipsoid().shape()(1, 1) == doctest::Approx(1.213333333).epsilon(1e-8));
        CHECK(next.ellipsoid().center()[0] == doctest::Approx(-0.133333333).epsilon(1e-8));
        CHECK(next.round == 1);
        CHECK(next.exploratory_count == 1);
    }
    SUBCASE("rejection outside the narrow guard leaves knowledge unchanged") {
        auto d = decide_price(c, s, vec2(1, 0), 0.8);
        MechanismState next = observe(c, s, vec2(1, 0), 0.8, d, Feedback{false});
        // alpha = -0.8 outside [-1/2, 0]
        CHECK(next.ellipsoid().shape().isApprox(s.ellipsoid().shape()));
        CHECK(next.guard_rejected_cuts == 1);
        CHECK(next.exploratory_count == 1);
    }
    SUBCASE("reserve-forced acceptance cuts deep") {
        auto d = decide_price(c, s, vec2(1, 0), 0.8);
        MechanismState next = observe(c, s, vec2(1, 0), 0.8, d, Feedback{true});
        // -alpha = 0.8 in [-1/2, 1): RetainAbove applies
        CHECK(next.ellipsoid().center()[0] > 0.0);
        CHECK(next.ellipsoid().shape()(0, 0) < 1.0);
        CHECK(next.guard_rejected_cuts == 0);
    }
    SUBCASE("skip and conservative rounds leave knowledge unchanged") {
        auto skip = decide_price(c, s, vec2(1, 0), 5.0);
        MechanismState after_skip = observe(c, s, vec2(1, 0), 5.0, skip, Feedback{false});
        CHECK(after_skip.round == 1);
        CHECK(after_skip.exploratory_count == 0);
        CHECK(after_skip.ellipsoid().shape().isApprox(s.ellipsoid().shape()));

        MechanismConfig wide = config2(3.0);
        auto cons = decide_price(wide, s, vec2(1, 0), 0.0);
        MechanismState after_cons = observe(wide, s, vec2(1, 0), 0.0, cons, Feedback{true});
        CHECK(after_cons.ellipsoid().shape().isApprox(s.ellipsoid().shape()));
    }
    SUBCASE("mismatched replay raises ProtocolError") {
        auto d = decide_price(c, s, vec2(1, 0), 0.3);
        MechanismState next = observe(c, s, vec2(1, 0), 0.3, d, Feedback{false});
        CHECK_THROWS_AS(observe(c, next, vec2(1, 0), 0.3, d, Feedback{false}), ProtocolError);
        CHECK_THROWS_AS(observe(c, s, vec2(1, 0), 5.0, d, Feedback{false}), ProtocolError);
    }
}

TEST_CASE("one-dimensional bisection walkthrough") {
    MechanismConfig c;
    c.dim = 1;
    c.knowledge_radius = 2.0;
    c.epsilon = 0.001;
    c.total_rounds_hint = 100;
    MechanismState s = new_state(c);
    const Vector x = vec1(1.0);

    // Interval [0, 2], reserve 1: the exploratory price is 1.
    s.knowledge = IntervalKnowledge{0.0, 2.0};
    auto d = decide_price(c, s, x, 1.0);
    CHECK(d.kind == DecisionKind::Exploratory);
    CHECK(d.posted_price == doctest::Approx(1.0));

    // Accepted: the interval refines to [1, 2].
    s = observe(c, s, x, 1.0, d, Feedback{true});
    CHECK(s.interval().lower == doctest::Approx(1.0));
    CHECK(s.interval().upper == doctest::Approx(2.0));

    // Next midpoint 1.5, rejected: upper bound replaced.
    d = decide_price(c, s, x, 1.0);
    CHECK(d.posted_price == doctest::Approx(1.5));
    s = observe(c, s, x, 1.0, d, Feedback{false});
    CHECK(s.interval().lower == doctest::Approx(1.0));
    CHECK(s.interval().upper == doctest::Approx(1.5));

    SUBCASE("negative feature flips the updated endpoint") {
        MechanismState neg = new_state(c);
        neg.knowledge = IntervalKnowledge{-1.0, 1.0};
        const Vector xm = vec1(-1.0);
        auto dm = decide_price(c, neg, xm, 0.0);
        CHECK(dm.kind == DecisionKind::Exploratory);
        // Support of -theta over [-1,1] is [-1,1]; midpoint price 0.
        MechanismState after = observe(c, neg, xm, 0.0, dm, Feedback{true});
        // Accepted: -theta >= 0, so theta <= 0.
        CHECK(after.interval().upper == doctest::Approx(0.0));
        CHECK(after.interval().lower == doctest::Approx(-1.0));
    }
}

TEST_CASE("uncertainty buffer widens the skip guard and shifts cuts") {
    MechanismConfig c = config2(0.1, 0.05);
    MechanismState s = new_state(c);

    // q between upper and upper + delta must not skip.
    auto d = decide_price(c, s, vec2(1, 0), 1.02);
    CHECK(d.kind == DecisionKind::Exploratory);
    // q beyond upper + delta skips.
    auto d2 = decide_price(c, s, vec2(1, 0), 1.06);
    CHECK(d2.kind == DecisionKind::Skip);

    // Rejected exploratory at the midpoint cuts at alpha = -delta/h.
    auto d3 = decide_price(c, s, vec2(1, 0), 0.0);
    CHECK(d3.posted_price == doctest::Approx(0.0));
    MechanismState next = observe(c, s, vec2(1, 0), 0.0, d3, Feedback{false});
    // Retained halfspace theta_1 <= delta: center moves to the negative side.
    CHECK(next.ellipsoid().center()[0] < 0.0);
    CHECK(next.ellipsoid().contains(vec2(0.04, 0.0)));

    SUBCASE("reserve-forced deep rejection falls outside both guards") {
        auto d4 = decide_price(c, s, vec2(1, 0), 0.8);
        MechanismState after = observe(c, s, vec2(1, 0), 0.8, d4, Feedback{false});
        // alpha = (0 - 0.85)/1 = -0.85 < -1/n: no update, and the round is
        // counted for the metadata log.
        CHECK(after.guard_rejected_cuts == 1);
        CHECK(after.ellipsoid().shape().isApprox(s.ellipsoid().shape()));
    }
}

TEST_CASE("nonlinear link prices post through g") {
    MechanismConfig c = config2(0.1);
    c.link = LinkKind::NaturalExp;
    MechanismState s = new_state(c);
    // Reserve 2 maps to ln 2 in linear space; midpoint 0 < ln 2.
    auto d = decide_price(c, s, vec2(1, 0), 2.0);
    CHECK(d.kind == DecisionKind::Exploratory);
    CHECK(d.linear_price == doctest::Approx(std::log(2.0)));
    CHECK(d.posted_price == doctest::Approx(2.0));

    // Nonpositive reserve never binds under the exp link.
    auto d2 = decide_price(c, s, vec2(1, 0), 0.0);
    CHECK(d2.linear_price == doctest::Approx(0.0));
    CHECK(d2.posted_price == doctest::Approx(1.0));
}

TEST_CASE("Q5 exploratory price dominates conservative, reserve never lowers") {
    Substream rng(31, 400, 0);
    for (int iter = 0; iter < 500; ++iter) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        MechanismConfig c;
        c.dim = n;
        c.knowledge_radius = 2.0;
        c.feature_norm_bound = 1.0;
        c.epsilon = rng.next_uniform(0.01, 1.0);
        c.delta = rng.next_uniform(0.0, 0.1);
        c.total_rounds_hint = 100;
        MechanismState s = new_state(c);
        Vector x = testsupport::random_unit(n, rng);
        const double q = rng.next_uniform(0.0, 1.5);

        auto d = decide_price(c, s, x, q);
        if (d.kind == DecisionKind::Skip) {
            continue;
        }
        const SupportBounds b = d.bounds;
        const double q_lin = q;
        const double exploratory = std::max(q_lin, b.midpoint());
        const double conservative = std::max(q_lin, b.lower - c.delta);
        CHECK(exploratory >= conservative - 1e-12);
        CHECK(d.posted_price >= q - 1e-12); // reserve never lowered a posted price
    }
}

TEST_CASE("Q6 decisions are deterministic") {
    MechanismConfig c = config2(0.1);
    MechanismState s = new_state(c);
    auto d1 = decide_price(c, s, vec2(0.6, 0.8), 0.4);
    auto d2 = decide_price(c, s, vec2(0.6, 0.8), 0.4);
    CHECK(d1.kind == d2.kind);
    CHECK(d1.posted_price == d2.posted_price);
    CHECK(d1.bounds.lower == d2.bounds.lower);
    CHECK(d1.bounds.upper == d2.bounds.upper);
}

TEST_CASE("exploratory round bound") {
    CHECK(exploratory_round_bound(2, 1, 1, 0.1) ==
          doctest::Approx(80.0 * std::log(600.0)).epsilon(1e-12));
    CHECK(exploratory_round_bound(2, 1, 1, 0.1) == doctest::Approx(511.75).epsilon(1e-4));
    CHECK(exploratory_round_bound(2, 1, 1, 60.0) == doctest::Approx(0.0));
    CHECK(exploratory_round_bound(5, 2, 1, 0.01) ==
          doctest::Approx(500.0 * std::log(24000.0)).epsilon(1e-12));
    CHECK_THROWS_AS(exploratory_round_bound(1, 1, 1, 0.1), DomainError);
    CHECK_THROWS_AS(exploratory_round_bound(2, -1, 1, 0.1), DomainError);
}

TEST_CASE("default epsilon") {
    CHECK(default_epsilon(1, 1024, 0.0) == doctest::Approx(10.0 / 1024.0).epsilon(1e-12));
    CHECK(default_epsilon(10, 10000, 0.0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(default_epsilon(10, 10000, 0.01) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(default_epsilon(0, 100, 0.0), DomainError);
    CHECK_THROWS_AS(default_epsilon(2, 1, 0.0), DomainError);
}

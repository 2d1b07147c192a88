#include <gtest/gtest.h>

#include "support.hpp"

using namespace doprd;
using namespace testing_support;

namespace {

ScenarioSolution with_route(std::vector<Node> r) {
    ScenarioSolution s;
    s.route0 = std::move(r);
    return s;
}

std::vector<Node> sorted(std::vector<Node> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Look-ahead optimum by enumeration: every route 0 subset with its best
// tour, every executable prefix of batches, known leftovers in spare slots.
double enumerate_lookahead(const State& s, const BatchPlan& plan, const TravelMatrix& d, Time deadline, double gamma) {
    const int n = static_cast<int>(s.known.size());
    double best = -1;
    for (unsigned m = 0; m < (1u << n); ++m) {
        std::vector<Node> r;
        for (int j = 0; j < n; ++j)
            if (m >> j & 1u) r.push_back(s.known[static_cast<std::size_t>(j)]);
        const Duration dur = brute_tsp(r, d);
        if (s.t_e + dur > deadline) continue;
        for (int pre = 0; pre <= plan.size(); ++pre) {
            bool ok = true;
            int fill = 0, spare = 0;
            for (int k = 0; k < pre; ++k) {
                const auto& b = plan.batches[static_cast<std::size_t>(k)];
                ok &= b.tau_start >= s.t_e + dur;
                fill += b.rho_k;
                spare += plan.rho - b.rho_k;
            }
            if (!ok) continue;
            const int left = n - static_cast<int>(r.size());
            best = std::max(best, static_cast<double>(r.size()) + gamma * (fill + std::min(left, spare)));
        }
    }
    return best;
}

}  // namespace

TEST(PcCheck, NoUnknownsDispatchesEverything) {
    const auto inst = line_instance({1, 2}, {0, 0}, 10);
    const auto s = make_state(0, {1, 2});
    const auto r = pc_check(s, inst.travel, 10, PolicyConfig{});
    ASSERT_TRUE(r.action);
    EXPECT_EQ(sorted(r.action->route), (std::vector<Node>{1, 2}));
    EXPECT_EQ(r.record.ell, 2);
    EXPECT_TRUE(r.record.fired);
}

TEST(PcCheck, ReachableUnknownBlocksDispatch) {
    const auto inst = make_instance({0, 0}, {{1, 0}, {0, 1}}, {0, 5}, 10);
    PolicyConfig cfg;
    cfg.pc_known_frac = 0;
    const auto r = pc_check(make_state(0, {1}, {{2, 5}}), inst.travel, 10, cfg);
    EXPECT_FALSE(r.action);
    EXPECT_TRUE(r.record.evaluated);
}

TEST(PcCheck, UnreachableUnknownAllowsDispatch) {
    const auto inst = line_instance({1, 2}, {0, 5}, 20);
    PolicyConfig cfg;
    cfg.pc_known_frac = 0;
    const auto r = pc_check(make_state(18, {1}, {{2, 19}}), inst.travel, 20, cfg);
    ASSERT_TRUE(r.action);
    EXPECT_EQ(r.action->route, (std::vector<Node>{1}));
    EXPECT_EQ(r.record.ell, 1);
    EXPECT_EQ(r.ell_known, 1);
}

TEST(PcCheck, SkipRuleAndDisable) {
    const auto inst = line_instance({1, 2, 3, 4, 5}, {0, 5, 5, 5, 5}, 100);
    const auto s = make_state(0, {1}, {{2, 5}, {3, 5}, {4, 5}, {5, 5}});
    const auto r = pc_check(s, inst.travel, 100, PolicyConfig{});
    EXPECT_FALSE(r.record.evaluated);
    PolicyConfig off;
    off.pc_enabled = false;
    EXPECT_FALSE(pc_check(make_state(0, {1, 2}), inst.travel, 100, off).record.evaluated);
}

TEST(DetIlp, DispatchNowBeatsWaiting) {
    const auto inst = make_instance({0, 0}, {{1, 0}, {0, 1}}, {0, 8}, 10);
    const auto s = make_state(0, {1}, {{2, 8}});
    const auto plan = build_batches(0, s.known, {{2, 8}}, 10, 2, 2.0);
    ASSERT_EQ(plan.size(), 1);
    EXPECT_EQ(plan.batches[0].tau_start, 8);
    EXPECT_EQ(plan.batches[0].rho_k, 1);
    const auto prof = known_profile(s, inst.travel, 10, 10);
    const auto sol = det_ilp_solve(s, plan, prof, 0.9);
    EXPECT_EQ(sol.route0, (std::vector<Node>{1}));
    EXPECT_NEAR(sol.objective, 1.9, 1e-12);
    EXPECT_NEAR(enumerate_lookahead(s, plan, inst.travel, 10, 0.9), 1.9, 1e-12);
}

TEST(DetIlp, NoKnownParcels) {
    const auto inst = line_instance({1, 2}, {5, 6}, 20);
    const auto s = make_state(0, {}, {{1, 5}, {2, 6}});
    const auto plan = build_batches(0, {}, {{1, 5}, {2, 6}}, 20, 2, 3.0);
    const auto sol = det_ilp_solve(s, plan, known_profile(s, inst.travel, 20, 10), 0.9);
    EXPECT_TRUE(sol.route0.empty());
    EXPECT_NEAR(sol.objective, 0.9 * 2, 1e-12);
}

TEST(DetIlp, TiesPreferServingNow) {
    // Known 1 fits a spare slot of the only batch and can also go now
    // without blocking it.
    const auto inst = line_instance({1, 2}, {0, 9}, 12);
    const auto s = make_state(0, {1}, {{2, 9}});
    const auto plan = build_batches(0, s.known, {{2, 9}}, 12, 3, 2.0);
    const auto sol = det_ilp_solve(s, plan, known_profile(s, inst.travel, 12, 10), 1.0);
    EXPECT_EQ(sol.route0, (std::vector<Node>{1}));
    EXPECT_NEAR(sol.objective, enumerate_lookahead(s, plan, inst.travel, 12, 1.0), 1e-12);
}

TEST(DetIlp, MatchesEnumerationOnRandomStates) {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const auto pts = random_points(n, rng, 15);
        const auto inst = make_instance(pts[0], {pts.begin() + 1, pts.end()}, {}, 120);
        const Time t_e = static_cast<Time>(rng() % 30);
        std::vector<Node> known;
        std::vector<std::pair<Node, Time>> unknown;
        for (Node v = 1; v <= n; ++v) {
            if (rng() % 2)
                known.push_back(v);
            else
                unknown.emplace_back(v, t_e + 1 + static_cast<Time>(rng() % 80));
        }
        const auto s = make_state(t_e, known, unknown);
        const int rho = 1 + static_cast<int>(rng() % 3);
        const double td = 5.0 + static_cast<double>(rng() % 20);
        const Time deadline = 60 + static_cast<Time>(rng() % 60);
        const double gamma = (rng() % 2) ? 0.9 : 1.0;
        const auto plan = build_batches(t_e, known, unknown, deadline, rho, td);
        const auto sol = det_ilp_solve(s, plan, known_profile(s, inst.travel, deadline, 10), gamma);
        EXPECT_NEAR(sol.objective, enumerate_lookahead(s, plan, inst.travel, deadline, gamma), 1e-9) << "rep " << rep;
        EXPECT_LE(t_e + inst.travel.route_duration(sol.tour.nodes), deadline);
        EXPECT_EQ(sorted(sol.tour.nodes), sol.route0);
        for (std::size_t k = 1; k < sol.z.size(); ++k) EXPECT_LE(sol.z[k], sol.z[k - 1]);
    }
}

TEST(Consensus, Examples) {
    const auto inst = line_instance({1, 2, 3}, {0, 0, 0}, 100);
    auto a = consensus({with_route({1, 2}), with_route({1, 2}), with_route({1}), with_route({3})}, inst.travel, 0, 100);
    EXPECT_EQ(sorted(a.route), (std::vector<Node>{1, 2}));
    EXPECT_TRUE(consensus({with_route({}), with_route({})}, inst.travel, 0, 100).is_wait());
    a = consensus({with_route({1}), with_route({2})}, inst.travel, 0, 100);
    EXPECT_EQ(sorted(a.route), (std::vector<Node>{1, 2}));
    EXPECT_THROW(consensus({}, inst.travel, 0, 100), ParameterError);
}

TEST(Consensus, RepairsOverlongUnion) {
    // Each scenario alone fits; together they do not.
    const auto inst = make_instance({0, 0}, {{5, 0}, {-5, 0}}, {}, 12);
    const auto a = consensus({with_route({1}), with_route({2})}, inst.travel, 0, 12);
    ASSERT_EQ(a.route.size(), 1u);
    EXPECT_LE(inst.travel.route_duration(a.route), 12);
}

TEST(StoSolve, IdenticalScenariosCollapseToDeterministic) {
    const auto inst = make_instance({0, 0}, {{1, 0}, {0, 1}, {2, 2}}, {0, 0, 8}, 14);
    const auto s = make_state(0, {1, 2}, {{3, 8}});
    const auto plan = build_batches(0, s.known, {{3, 8}}, 14, 2, 3.0);
    const auto prof = known_profile(s, inst.travel, 14, 10);
    const auto det = det_ilp_solve(s, plan, prof, 0.9);
    const auto sto = sto_solve(s, {plan, plan, plan}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, prof, 0.9);
    EXPECT_EQ(sto.route0, det.route0);
    EXPECT_NEAR(sto.objective, det.objective, 1e-12);
}

TEST(StoSolve, TwoScenarioToyMatchesEnumeration) {
    const auto inst = make_instance({0, 0}, {{1, 0}, {0, 1}}, {0, 8}, 10);
    const auto s = make_state(0, {1}, {{2, 8}});
    const auto late = build_batches(0, s.known, {{2, 8}}, 10, 2, 2.0);
    const auto early = build_batches(0, s.known, {{2, 3}}, 10, 2, 2.0);
    const auto prof = known_profile(s, inst.travel, 10, 10);
    const auto sto = sto_solve(s, {late, early}, {0.5, 0.5}, prof, 0.9);
    double best = -1;
    std::vector<Node> arg;
    for (const std::vector<Node>& r : {std::vector<Node>{}, std::vector<Node>{1}}) {
        const Duration dur = brute_tsp(r, inst.travel);
        double ev = 0;
        for (const auto* p : {&late, &early}) {
            double v = 0;
            for (int pre = 0; pre <= p->size(); ++pre) {
                bool ok = true;
                int fill = 0, spare = 0;
                for (int k = 0; k < pre; ++k) {
                    ok &= p->batches[static_cast<std::size_t>(k)].tau_start >= dur;
                    fill += p->batches[static_cast<std::size_t>(k)].rho_k;
                    spare += p->rho - p->batches[static_cast<std::size_t>(k)].rho_k;
                }
                if (ok) v = std::max(v, static_cast<double>(fill + std::min(1 - static_cast<int>(r.size()), spare)));
            }
            ev += 0.5 * v;
        }
        const double total = static_cast<double>(r.size()) + 0.9 * ev;
        if (total > best + 1e-9 || (std::abs(total - best) <= 1e-9 && r.size() > arg.size())) {
            best = total;
            arg = r;
        }
    }
    EXPECT_NEAR(sto.objective, best, 1e-12);
    EXPECT_EQ(sto.route0, arg);
}

TEST(Policies, VfaAndPfaAgreeWithOneScenario) {
    std::mt19937_64 rng(5);
    PolicyConfig cfg;
    cfg.n_scenarios = 1;
    cfg.rho = 2;
    cfg.pc_enabled = false;
    PfaPolicy pfa(cfg);
    VfaPolicy vfa(cfg);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 3 + static_cast<int>(rng() % 6);
        const auto pts = random_points(n, rng, 20);
        const auto inst = make_instance(pts[0], {pts.begin() + 1, pts.end()}, {}, 100);
        std::vector<Node> known;
        std::vector<std::pair<Node, Time>> unknown;
        for (Node v = 1; v <= n; ++v) {
            if (v == 1 || rng() % 2)
                known.push_back(v);
            else
                unknown.emplace_back(v, 10 + static_cast<Time>(rng() % 60));
        }
        const auto s = make_state(5, known, unknown);
        Rng a = make_rng(rep, Stream::scenario_sampling), b = make_rng(rep, Stream::scenario_sampling);
        const auto dp = pfa.decide(s, public_view(inst), a);
        const auto dv = vfa.decide(s, public_view(inst), b);
        EXPECT_EQ(sorted(dp.action.route), sorted(dv.action.route)) << "rep " << rep;
    }
}

TEST(Policies, PcShortcutTakesPrecedence) {
    const auto inst = line_instance({1, 2}, {0, 0}, 10);
    const auto s = make_state(0, {1, 2});
    PfaPolicy pfa{PolicyConfig{}};
    Rng rng = make_rng(1, Stream::scenario_sampling);
    const auto d = pfa.decide(s, public_view(inst), rng);
    EXPECT_TRUE(d.pc.fired);
    EXPECT_EQ(sorted(d.action.route), (std::vector<Node>{1, 2}));
}

TEST(Myopic, MeExamples) {
    const auto inst = line_instance({1, 2, 3}, {0, 0, 0}, 100);
    EXPECT_TRUE(me_decide(make_state(0, {}), inst.travel, 100).is_wait());
    EXPECT_EQ(sorted(me_decide(make_state(0, {1, 2}), inst.travel, 100).route), (std::vector<Node>{1, 2}));
    EXPECT_EQ(sorted(me_decide(make_state(96, {1, 2, 3}), inst.travel, 100).route), (std::vector<Node>{1, 2}));
}

TEST(Myopic, MhExamples) {
    auto inst = line_instance({1, 3}, {0, 0}, 8);
    EXPECT_TRUE(mh_decide(make_state(0, {}), inst.travel, 8).is_wait());
    auto a = mh_decide(make_state(0, {1, 2}), inst.travel, 8);
    EXPECT_EQ(a.route, (std::vector<Node>{1, 2}));
    EXPECT_EQ(inst.travel.route_duration(a.route), 6);
    inst = line_instance({1, 5}, {0, 0}, 4);
    EXPECT_EQ(mh_decide(make_state(0, {1, 2}), inst.travel, 4).route, (std::vector<Node>{1}));
}

TEST(Myopic, MeServesAtLeastMhPerDecision) {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const auto pts = random_points(n, rng, 25);
        const auto inst = make_instance(pts[0], {pts.begin() + 1, pts.end()}, {}, 200);
        std::vector<Node> known(n);
        std::iota(known.begin(), known.end(), 1);
        const Time t_e = 200 - static_cast<Time>(rng() % 80);
        const auto s = make_state(t_e, known);
        const auto me = me_decide(s, inst.travel, 200);
        const auto mh = mh_decide(s, inst.travel, 200);
        EXPECT_GE(me.route.size(), mh.route.size());
        EXPECT_EQ(static_cast<int>(me.route.size()), brute_op(n, inst.travel, 200 - t_e));
        EXPECT_LE(t_e + inst.travel.route_duration(mh.route), 200);
    }
}

TEST(PolicyConfig, Validation) {
    PolicyConfig c;
    EXPECT_NO_THROW(c.validate());
    c.gamma = 0;
    EXPECT_THROW(c.validate(), ParameterError);
    c = {};
    c.rho = 0;
    EXPECT_THROW(PfaPolicy{c}, ParameterError);
    EXPECT_THROW(make_policy("nope", PolicyConfig{}), ParameterError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace doprd;

namespace {

const char* kHeader =
    "TOY\n\nVEHICLE\nNUMBER     CAPACITY\n  25         200\n\nCUSTOMER\n"
    "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n\n";

std::string solomon_text(const std::vector<std::array<double, 3>>& rows) {
    std::ostringstream o;
    o << kHeader;
    for (const auto& r : rows)
        o << "    " << r[0] << "      " << r[1] << "         " << r[2] << "          10        0       1000         90\n";
    return o.str();
}

SolomonData from_text(const std::string& text, std::optional<int> limit = std::nullopt) {
    std::istringstream in(text);
    return parse_customers(in, limit);
}

SolomonData r101(int n) {
    std::ifstream in(std::string(DOPRD_SOURCE_DIR) + "/data/r101_25.txt");
    return parse_customers(in, n);
}

}  // namespace

TEST(ParseCustomers, ReadsDepotAndCustomersFromWrittenLayout) {
    const auto data = from_text(solomon_text({{0, 40, 50}, {1, 45, 68}, {2, 45, 70}}));
    EXPECT_EQ(data.depot, (Point{40, 50}));
    ASSERT_EQ(data.customers.size(), 2u);
    EXPECT_EQ(data.customers[0], (Site{1, {45, 68}}));
    EXPECT_EQ(data.customers[1], (Site{2, {45, 70}}));
    EXPECT_DOUBLE_EQ(data.depot_due, 1000.0);
    EXPECT_EQ(data.name, "TOY");
}

TEST(ParseCustomers, BodyWithoutHeaderIsAccepted) {
    const auto data = from_text("0 0 0 0 0 100 0\n1 3 4 1 0 100 10\n");
    ASSERT_EQ(data.customers.size(), 1u);
    EXPECT_EQ(data.customers[0].pos, (Point{3, 4}));
}

TEST(ParseCustomers, DepotOnlyIsEmpty) {
    EXPECT_THROW(from_text(solomon_text({{0, 40, 50}})), EmptyInstanceError);
}

TEST(ParseCustomers, LimitTruncates) {
    std::vector<std::array<double, 3>> rows{{0, 0, 0}};
    for (int i = 1; i <= 25; ++i) rows.push_back({static_cast<double>(i), static_cast<double>(i), 1.0});
    EXPECT_EQ(from_text(solomon_text(rows), 1).customers.size(), 1u);
    EXPECT_EQ(from_text(solomon_text(rows)).customers.size(), 25u);
}

TEST(ParseCustomers, MalformedRowNamesItsLine) {
    std::string text = solomon_text({{0, 40, 50}, {1, 45, 68}});
    text += "    2      45\n";
    try {
        from_text(text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 12);
        EXPECT_NE(std::string(e.what()).find("line 12"), std::string::npos);
    }
}

TEST(ParseCustomers, NonNumericFieldRejected) {
    EXPECT_THROW(from_text("0 0 0 0 0 100 0\n1 3 x 1 0 100 10\n"), ParseError);
}

TEST(ParseCustomers, BundledFilesParse) {
    for (const char* f : {"r101_25.txt", "c101_25.txt", "rc101_25.txt", "c201_25.txt"}) {
        std::ifstream in(std::string(DOPRD_SOURCE_DIR) + "/data/" + f);
        const auto d = parse_customers(in);
        EXPECT_EQ(d.customers.size(), 25u) << f;
        EXPECT_GT(d.depot_due, 0.0) << f;
    }
}

TEST(TravelMatrix, ExactAndCeiledDistances) {
    const auto m = travel_matrix({0, 0}, std::vector<Point>{{3, 4}, {1, 1}});
    EXPECT_EQ(m(0, 1), 5);
    EXPECT_EQ(m(0, 2), 2);
    EXPECT_EQ(m(1, 1), 0);
    EXPECT_EQ(m(1, 2), m(2, 1));
}

TEST(TravelMatrix, FloorFlag) {
    const auto m = travel_matrix({0, 0}, std::vector<Point>{{1, 1}}, DistanceRounding::floor);
    EXPECT_EQ(m(0, 1), 1);
}

TEST(TravelMatrix, CoincidentNodesRejected) {
    EXPECT_THROW(travel_matrix({0, 0}, std::vector<Point>{{1, 1}, {1, 1}}), DuplicateLocationError);
    EXPECT_THROW(travel_matrix({0, 0}, std::vector<Point>{{0, 0}}), DuplicateLocationError);
}

TEST(TravelMatrix, CeilingKeepsTriangleInequalityOnRandomPoints) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Point> pts;
        for (int i = 0; i < 8; ++i) pts.push_back({u(rng), u(rng)});
        const auto m = travel_matrix({u(rng), u(rng)}, pts);
        EXPECT_TRUE(satisfies_triangle_inequality(m));
    }
}

TEST(GenerateInstance, DeadlineIsRoundedFactorOfLatestRelease) {
    GenerationParams gp;
    gp.c = 0.8;
    gp.seed = 4;
    const auto inst = generate_instance(r101(20), gp);
    Time latest = 0;
    for (const auto& c : inst.customers) latest = std::max(latest, c.true_release);
    EXPECT_DOUBLE_EQ(inst.meta.t_standard, latest);
    EXPECT_DOUBLE_EQ(inst.deadline, std::round(0.8 * latest));
}

TEST(GenerateInstance, DeadlineRuleOnRoundNumbers) {
    // t_standard = 100, c = 0.8 gives 80.
    EXPECT_DOUBLE_EQ(std::round(0.8 * 100.0), 80.0);
    SolomonData d;
    d.depot = {0, 0};
    d.depot_due = 100;
    d.customers = {{1, {1, 0}}};
    GenerationParams gp;
    gp.beta = 0.0;  // zero spread: release = mean = 0
    gp.c = 0.8;
    const auto inst = generate_instance(d, gp);
    EXPECT_DOUBLE_EQ(inst.deadline, 0.0);
    EXPECT_EQ(inst.customers[0].mode, ReleaseMode::available_at_start);
}

TEST(GenerateInstance, DeltaZeroHasNoDynamicCustomers) {
    GenerationParams gp;
    gp.delta = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        gp.seed = seed;
        for (const auto& c : generate_instance(r101(25), gp).customers) EXPECT_NE(c.mode, ReleaseMode::dynamic_estimate);
    }
}

TEST(GenerateInstance, DynamicFractionIsExact) {
    for (double delta : {0.0, 0.3, 0.5, 1.0}) {
        GenerationParams gp;
        gp.delta = delta;
        gp.seed = 9;
        const auto inst = generate_instance(r101(25), gp);
        int dyn = 0;
        for (const auto& c : inst.customers) dyn += c.mode == ReleaseMode::dynamic_estimate;
        EXPECT_EQ(dyn, std::lround(delta * 25)) << delta;
    }
}

TEST(GenerateInstance, DeltaOutOfRangeRejected) {
    GenerationParams gp;
    gp.delta = 1.5;
    EXPECT_THROW(generate_instance(r101(5), gp), ParameterError);
    gp.delta = -0.1;
    EXPECT_THROW(generate_instance(r101(5), gp), ParameterError);
}

TEST(GenerateInstance, ReleasesWithinRangeAndLatestAttained) {
    for (double beta : {0.5, 1.0, 1.5}) {
        GenerationParams gp;
        gp.beta = beta;
        gp.seed = 3;
        const auto inst = generate_instance(r101(25), gp);
        bool attained = false;
        for (const auto& c : inst.customers) {
            EXPECT_GE(c.true_release, 0.0);
            EXPECT_LE(c.true_release, inst.meta.t_standard);
            attained |= c.true_release == inst.meta.t_standard;
            EXPECT_EQ(c.mode == ReleaseMode::available_at_start, c.true_release == 0.0);
            if (c.mode != ReleaseMode::available_at_start) EXPECT_GT(c.estimate_std, 0.0);
        }
        EXPECT_TRUE(attained);
        EXPECT_NO_THROW(validate(inst));
    }
}

TEST(GenerateInstance, SameSeedIsBitIdentical) {
    GenerationParams gp;
    gp.beta = 1.5;
    gp.delta = 0.5;
    gp.c = 1.2;
    gp.seed = 42;
    const auto a = generate_instance(r101(20), gp);
    const auto b = generate_instance(r101(20), gp);
    EXPECT_EQ(a, b);
    EXPECT_EQ(write_instance_string(a), write_instance_string(b));
    gp.seed = 43;
    EXPECT_NE(write_instance_string(a), write_instance_string(generate_instance(r101(20), gp)));
}

TEST(GenerateInstance, LargerBetaSpreadsReleasesMore) {
    auto spread = [](double beta) {
        std::vector<double> xs;
        for (std::uint64_t seed = 1; xs.size() < 1000; ++seed) {
            GenerationParams gp;
            gp.beta = beta;
            gp.seed = seed;
            for (const auto& c : generate_instance(r101(25), gp).customers) xs.push_back(c.true_release);
        }
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double var = 0;
        for (double x : xs) var += (x - mean) * (x - mean);
        return std::sqrt(var / (xs.size() - 1));
    };
    EXPECT_GT(spread(1.5), spread(0.5));
}

TEST(GenerateInstance, OffGridParametersFlagged) {
    GenerationParams gp;
    gp.beta = 0.7;
    EXPECT_TRUE(generate_instance(r101(5), gp).meta.nonstandard);
    gp.beta = 1.0;
    EXPECT_FALSE(generate_instance(r101(5), gp).meta.nonstandard);
}

TEST(InstanceFile, RoundTripIsExact) {
    GenerationParams gp;
    gp.beta = 1.5;
    gp.delta = 1.0;
    gp.c = 0.6;
    gp.seed = 11;
    const auto inst = generate_instance(r101(25), gp);
    const auto text = write_instance_string(inst);
    const auto back = read_instance_string(text);
    EXPECT_EQ(back, inst);
    EXPECT_EQ(write_instance_string(back), text);
}

TEST(InstanceFile, RejectsGarbage) {
    EXPECT_THROW(read_instance_string("{not json"), ParseError);
    EXPECT_THROW(read_instance_string(R"({"format":"other","version":1})"), ParseError);
}

TEST(InstanceFile, RejectsInconsistentMode) {
    auto inst = testing_support::line_instance({1, 2}, {0, 5}, 10);
    auto j = to_json(inst);
    j["customers"][1]["mode"] = "available_at_start";
    EXPECT_THROW(instance_from_json(j), ParseError);
}

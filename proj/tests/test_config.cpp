#include "fixtures.hpp"

#include "hawkes/config.hpp"
#include "hawkes/error.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/toml_lite.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace hawkes;

namespace {

const char* kPriceModel = R"(
# bivariate price model
[model]
horizons = [1.0, 1.0]

[baseline]
family = "exponential_time"
level = ["m", "m"]
growth = ["kappa", "kappa"]

[kernel]
family = "exponential"
adjacency = [["gamma1", "alpha"],
             ["alpha", "gamma2"]]
decay = [["beta", "beta"], ["beta", "beta"]]

[marks]
weight = "identity"
distribution = "half_normal_offset"
offset = 0.01

[bounds]
beta = [10.0, 10.0]

[theta]
m = 5.0
kappa = 2.0
gamma1 = 0.0
gamma2 = 0.0
alpha = 0.5
beta = 10.0

[fit]
n_starts = 3
zero_threshold = 1e-5
)";

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST(Config, ParsesEverySection) {
    const auto cfg = parse_model_config(kPriceModel);
    const auto& spec = cfg.spec;
    EXPECT_EQ(spec.dimension(), 2u);
    EXPECT_EQ(spec.baseline_family(), BaselineFamily::exponential_time);
    EXPECT_EQ(spec.marks().weight, MarkWeight::identity);
    EXPECT_EQ(spec.num_params(), 6u);
    EXPECT_TRUE(spec.slot(spec.slot_index("beta")).fixed());
    ASSERT_TRUE(cfg.theta.has_value());
    EXPECT_EQ(cfg.theta->values[static_cast<Eigen::Index>(spec.slot_index("alpha"))], 0.5);
    ASSERT_TRUE(cfg.fit.n_starts.has_value());
    EXPECT_EQ(*cfg.fit.n_starts, 3u);
}

TEST(Config, RoundTripsBitExactly) {
    Rng rng(21);
    const auto base = parse_model_config(kPriceModel);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd v = base.theta->values;
        for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = std::ldexp(rng.uniform(), static_cast<int>(rng.below(40)) - 20);
        v[static_cast<Eigen::Index>(base.spec.slot_index("beta"))] = 10.0;
        ParamVector theta{v, {}};
        const std::string text = serialize_model_config(base.spec, theta, base.fit);
        const auto again = parse_model_config(text);
        ASSERT_TRUE(again.theta.has_value());
        for (Eigen::Index j = 0; j < v.size(); ++j) EXPECT_TRUE(same_bits(again.theta->values[j], v[j]));
        EXPECT_EQ(serialize_model_config(again.spec, again.theta, again.fit), text);
    }
}

TEST(Config, FormatDoubleIsShortestRoundTrip) {
    EXPECT_EQ(toml::format_double(0.1), "0.1");
    EXPECT_EQ(toml::format_double(10.0), "10.0");
    Rng rng(22);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::ldexp(1.0, static_cast<int>(rng.below(200)) - 100);
        const auto doc = toml::parse("[a]\nx = " + toml::format_double(x) + "\n");
        EXPECT_TRUE(same_bits(doc.find("a")->at("x", "a").as_number("x"), x));
    }
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse_model_config("[model]\nhorizons = [1.0]\n"), InvalidInput);
    EXPECT_THROW(parse_model_config("[model\n"), InvalidInput);
    std::string bad = kPriceModel;
    bad.replace(bad.find("\"exponential\""), 13, "\"weibull\"");
    EXPECT_THROW(parse_model_config(bad), InvalidInput);
    std::string unknown = kPriceModel;
    unknown += "zeta = 1.0\n";
    EXPECT_THROW(parse_model_config(unknown), InvalidInput);
}

TEST(Config, InlineTheta) {
    const auto spec = fixtures::univariate(KernelFamily::exponential);
    const auto theta = parse_inline_theta(spec, "mu=4,alpha=0.5,beta=3");
    EXPECT_EQ(theta.values[static_cast<Eigen::Index>(spec.slot_index("alpha"))], 0.5);
    EXPECT_THROW(parse_inline_theta(spec, "mu=4,alpha=0.5"), InvalidInput);
    EXPECT_THROW(parse_inline_theta(spec, "mu=4,alpha=x,beta=3"), InvalidInput);
}

TEST(Config, MissingFileIsInvalidInput) {
    EXPECT_THROW(load_model_config("/nonexistent/model.toml"), InvalidInput);
}

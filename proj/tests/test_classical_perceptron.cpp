#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "photoperceptron/classical_perceptron.hpp"

using namespace photoperceptron;
namespace cp = photoperceptron::classical;

TEST_CASE("activation is the sign product") {
    CHECK(cp::activation(0.0, 1) == 0.0);
    CHECK(cp::activation(0.0, -1) == 0.0);
    CHECK(cp::activation(-1.0, -1) == 1.0);
    CHECK(cp::activation(0.5, 1) == 0.5);
}

TEST_CASE("switch probability: symmetry, saturation, stability") {
    CHECK(cp::switch_probability(1.0, 0.0) == 0.5);
    CHECK(cp::switch_probability(1.0, std::log(3.0)) == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(cp::switch_probability(1.0, 1000.0) == 1.0);
    CHECK(cp::switch_probability(1.0, -1000.0) == 0.0);
    CHECK(cp::switch_probability(300.0, 5.0) == 1.0);  // beta*A = 1500, no overflow
    CHECK_THROWS_AS(cp::switch_probability(1.0, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(cp::switch_probability(-1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sample_switch endpoints and balance") {
    rng::Stream s(3, 3);
    for (int i = 0; i < 500; ++i) {
        REQUIRE(cp::sample_switch(s, 1.0) == 1);
        REQUIRE(cp::sample_switch(s, 0.0) == -1);
    }
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += cp::sample_switch(s, 0.5);
    CHECK(std::abs(sum / n) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK_THROWS_AS(cp::sample_switch(s, 1.5), std::invalid_argument);
}

TEST_CASE("epoch statistics at degenerate switch probabilities") {
    const rng::Key key = rng::root_key(5, "epoch-test");
    // w strongly positive, x=+1: p ~ 1
    auto aligned = cp::epoch(key.child(0), 50.0, cp::Datum{1, 1}, 500, 2.0);
    CHECK(aligned.eps_sampled == 0.0);
    CHECK(aligned.eps_exact == Catch::Approx(0.0).margin(1e-12));
    auto anti = cp::epoch(key.child(1), 50.0, cp::Datum{1, -1}, 500, 2.0);
    CHECK(anti.eps_sampled == 1.0);
    CHECK(anti.eps_exact == Catch::Approx(1.0).margin(1e-12));

    // w = 0: A = 0, exact error exactly 1/2 for any datum, no heat
    for (int x : {-1, 1})
        for (int nt : {-1, 1}) {
            auto st = cp::epoch(key.child(10 + x + 2 * nt), 0.0, cp::Datum{x, nt}, 100, 1.0);
            CHECK(st.eps_exact == 0.5);
            CHECK(st.heat == 0.0);
        }
}

TEST_CASE("sampled mean tracks exact mean at CLT rate") {
    const rng::Key key = rng::root_key(2718, "clt");
    rng::Stream ws(2718, 99);
    const std::int64_t trials = 4000;
    int ok = 0, total = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const double w = 2.0 * ws.normal();
        const cp::Datum d{ws.bernoulli(0.5) ? 1 : -1, ws.bernoulli(0.5) ? 1 : -1};
        auto st = cp::epoch(key.child(rep), w, d, trials, 1.5);
        const double bound = 5.0 * std::sqrt((1.0 - st.n_exact * st.n_exact) / trials);
        if (std::abs(st.n_sampled - st.n_exact) <= bound) ++ok;
        ++total;
    }
    CHECK(static_cast<double>(ok) / total >= 0.99);
}

TEST_CASE("weight update rule") {
    CHECK(cp::weight_update(1.0, 1, -1, 1.0) == 0.0);
    CHECK(cp::weight_update(1.0, 1, -1, -1.0) == 0.0);
    CHECK(cp::weight_update(1.0, 1, -1, 0.0) == Catch::Approx(-0.25));
    CHECK(cp::weight_update(1.0, -1, 1, 0.0) == Catch::Approx(-0.25));
    CHECK_THROWS_AS(cp::weight_update(1.0, 1, 1, 1.5), std::invalid_argument);

    // NOT data (nT x = -1): the weights always decrease
    rng::Stream s(1, 1);
    for (int rep = 0; rep < 200; ++rep) {
        const double nbar = 2.0 * s.uniform01() - 1.0;
        const int x = s.bernoulli(0.5) ? 1 : -1;
        CHECK(cp::weight_update(2.0, x, -x, nbar) <= 0.0);
    }
}

TEST_CASE("predicted error change is non-positive") {
    CHECK(cp::predicted_error_change(1.0, 1.0) == 0.0);
    CHECK(cp::predicted_error_change(1.0, -1.0) == 0.0);
    CHECK(cp::predicted_error_change(1.0, 0.0) == Catch::Approx(-1.0 / 16.0));
    for (int i = 0; i <= 100; ++i) {
        const double nbar = -1.0 + 0.02 * i;
        CHECK(cp::predicted_error_change(2.0, nbar) <= 0.0);
    }
}

TEST_CASE("boolean dataset definitions") {
    rng::Stream s(31, 0);
    for (const auto& d : cp::boolean_dataset(cp::BooleanTask::Not, 500, s))
        REQUIRE(d.x * d.n_target == -1);
    for (const auto& d : cp::boolean_dataset(cp::BooleanTask::Copy, 500, s))
        REQUIRE(d.x * d.n_target == 1);

    const auto ds = cp::boolean_dataset(cp::BooleanTask::Not, 1000, s);
    double mean = 0.0;
    for (const auto& d : ds) mean += d.x;
    mean /= ds.size();
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(1000.0));
    CHECK_THROWS_AS(cp::boolean_dataset(cp::BooleanTask::Not, 0, s), std::invalid_argument);
}

TEST_CASE("exact backend: NOT error is strictly decreasing") {
    cp::TrainingConfig cfg;
    cfg.beta = 2.0;
    cfg.sigma_init = 1.0;
    cfg.epochs = 150;
    cfg.trials_per_epoch = 1;
    cfg.seed = 4242;
    auto res = cp::train(cfg, cp::SwitchBackend::ExactSigmoid);
    REQUIRE(res.trace.size() == 150);
    for (std::size_t e = 1; e < res.trace.size(); ++e)
        REQUIRE(res.trace[e].eps_exact < res.trace[e - 1].eps_exact);
}

TEST_CASE("small beta stalls learning: |dw| <= beta/4") {
    cp::TrainingConfig cfg;
    cfg.beta = 1e-4;
    cfg.epochs = 50;
    cfg.trials_per_epoch = 200;
    cfg.seed = 7;
    auto res = cp::train(cfg, cp::SwitchBackend::SampledSigmoid);
    for (const auto& st : res.trace) REQUIRE(std::abs(st.delta_w) <= cfg.beta / 4.0);
}

TEST_CASE("first-order error-change prediction holds for small beta") {
    for (double beta : {0.01, 0.05, 0.1}) {
        for (double w : {-2.0, -0.7, 0.0, 0.4, 1.3, 2.0}) {
            const cp::Datum d{1, -1};  // NOT pair
            const double nbar = cp::exact_mean_output(beta, w, d.x);
            const double dw = cp::weight_update(beta, d.x, d.n_target, nbar);
            const double measured =
                cp::exact_mean_error(beta, w + dw, d) - cp::exact_mean_error(beta, w, d);
            const double predicted = cp::predicted_error_change(beta, nbar);
            REQUIRE(std::abs(measured - predicted) <= 0.05 * std::abs(predicted));
        }
    }
}

TEST_CASE("constant Boolean targets receive zero expected update") {
    // n_target = +1 regardless of x: the two balanced inputs cancel exactly
    for (double beta : {0.5, 1.0, 3.0})
        for (double w : {-1.5, -0.2, 0.0, 0.8, 2.0}) {
            const double up_plus =
                cp::weight_update(beta, 1, 1, cp::exact_mean_output(beta, w, 1));
            const double up_minus =
                cp::weight_update(beta, -1, 1, cp::exact_mean_output(beta, w, -1));
            CHECK(std::abs(up_plus + up_minus) <= 1e-15 * beta);
        }
}

TEST_CASE("cooling via feedback narrows the weight distribution") {
    const int restarts = 60;
    std::vector<double> finals(restarts);
    for (int r = 0; r < restarts; ++r) {
        cp::TrainingConfig cfg;
        cfg.beta = 2.0;
        cfg.sigma_init = 1.0;
        cfg.epochs = 200;
        cfg.trials_per_epoch = 2000;
        cfg.seed = rng::derive(1000, r);
        finals[r] = cp::train(cfg, cp::SwitchBackend::SampledSigmoid).final_w;
    }
    double mean = 0.0;
    for (double w : finals) mean += w;
    mean /= restarts;
    double var = 0.0;
    for (double w : finals) var += (w - mean) * (w - mean);
    var /= (restarts - 1);
    CHECK(mean < 0.0);
    CHECK(var < 0.1);  // 0.1 * sigma_init^2
}

TEST_CASE("training is reproducible for a fixed seed") {
    cp::TrainingConfig cfg;
    cfg.beta = 2.0;
    cfg.epochs = 40;
    cfg.trials_per_epoch = 500;
    cfg.seed = 90210;
    auto a = cp::train(cfg, cp::SwitchBackend::SampledSigmoid);
    auto b = cp::train(cfg, cp::SwitchBackend::SampledSigmoid);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t e = 0; e < a.trace.size(); ++e) {
        REQUIRE(a.trace[e].w == b.trace[e].w);
        REQUIRE(a.trace[e].eps_sampled == b.trace[e].eps_sampled);
        REQUIRE(a.trace[e].heat == b.trace[e].heat);
    }
    CHECK(a.ledger.heat_kbt == b.ledger.heat_kbt);
}

TEST_CASE("heat accounting: favored-well landings pay |A|") {
    const rng::Key key = rng::root_key(8, "heat");
    // strong bias: every trial lands favored, heat = trials * beta * |A|
    auto st = cp::epoch(key.child(0), 30.0, cp::Datum{1, 1}, 200, 2.0);
    CHECK(st.heat == Catch::Approx(2.0 * 30.0 * 200).epsilon(1e-12));
    // ledger accumulates epoch heat in training
    cp::TrainingConfig cfg;
    cfg.beta = 1.0;
    cfg.epochs = 20;
    cfg.trials_per_epoch = 100;
    cfg.seed = 5;
    auto res = cp::train(cfg, cp::SwitchBackend::SampledSigmoid);
    double total = 0.0;
    for (const auto& e : res.trace) total += e.heat;
    CHECK(res.ledger.heat_kbt == Catch::Approx(total));
    CHECK(res.ledger.trials == 20 * 100);
}

TEST_CASE("langevin backend trains and dissipates") {
    cp::TrainingConfig cfg;
    cfg.beta = 2.0;
    cfg.sigma_init = 1.0;
    cfg.epochs = 10;
    cfg.trials_per_epoch = 40;
    cfg.seed = 61;
    cp::LangevinBackendConfig lb;
    lb.spec = langevin::DoubleWellSpec{1.0, 1.0, 1.0, 2.0};
    lb.window = 4.0;
    auto res = cp::train(cfg, cp::SwitchBackend::LangevinDoubleWell, lb);
    REQUIRE(res.trace.size() == 10);
    for (const auto& st : res.trace) {
        REQUIRE(std::isfinite(st.n_sampled));
        REQUIRE(st.eps_sampled >= 0.0);
        REQUIRE(st.eps_sampled <= 1.0);
        REQUIRE(std::isfinite(st.heat));
    }
}

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "rlhedge/errors.hpp"
#include "rlhedge/nn/adam.hpp"
#include "rlhedge/nn/checkpoint.hpp"
#include "rlhedge/nn/mlp.hpp"
#include "rlhedge/nn/replay_buffer.hpp"

using namespace rlhedge;
using namespace rlhedge::nn;

namespace {

// Pre-activations of every hidden unit, recomputed naively to spot ReLU kinks.
double min_hidden_preactivation(const Mlp<double>& net, const std::vector<double>& x) {
    auto p = net.parameters();
    const auto& sizes = net.layer_sizes();
    std::vector<double> a = x;
    double closest = 1e300;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l], out = sizes[l + 1];
        std::vector<double> z(out);
        for (std::size_t j = 0; j < out; ++j) {
            z[j] = p[off + in * out + j];
            for (std::size_t i = 0; i < in; ++i) z[j] += a[i] * p[off + i * out + j];
        }
        off += (in + 1) * out;
        if (l + 2 < sizes.size()) {
            for (auto& v : z) {
                closest = std::min(closest, std::abs(v));
                v = std::max(v, 0.0);
            }
        }
        a = z;
    }
    return closest;
}

Transition item(double tag) {
    Transition t;
    t.action = tag;
    return t;
}

}  // namespace

TEST_CASE("nn: parameter count and shape errors") {
    Mlp<double> net({3, 64, 64, 64, 1}, OutputActivation::logistic);
    CHECK(net.parameter_count() == 4 * 64 + 65 * 64 * 2 + 65);
    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(Mlp<double>({3}, OutputActivation::identity), ValidationError);
}

TEST_CASE("nn: zero weights give the activation of the bias") {
    Mlp<double> net({2, 4, 3}, OutputActivation::identity);
    auto p = net.parameters();
    std::fill(p.begin(), p.end(), 0.0);
    const std::size_t out_bias = 2 * 4 + 4 + 4 * 3;
    p[out_bias] = 0.7;
    p[out_bias + 1] = -1.2;
    const auto y = net.forward(std::vector<double>{3.0, -5.0});
    CHECK(y == std::vector<double>{0.7, -1.2, 0.0});

    Mlp<double> act({2, 1}, OutputActivation::logistic);
    std::fill(act.parameters().begin(), act.parameters().end(), 0.0);
    act.parameters()[2] = 0.4;
    CHECK(act.forward(std::vector<double>{9.0, 9.0})[0] == doctest::Approx(1.0 / (1.0 + std::exp(-0.4))));
}

TEST_CASE("nn: single linear layer is W x + b and its gradient is an outer product") {
    Mlp<double> net({3, 2}, OutputActivation::identity);
    const std::vector<double> w = {1, 2, 3, 4, 5, 6};  // 3x2 row-major
    std::copy(w.begin(), w.end(), net.parameters().begin());
    net.parameters()[6] = 0.5;
    net.parameters()[7] = -0.5;
    const std::vector<double> x = {1.0, -1.0, 2.0};
    const auto y = net.forward(x);
    CHECK(y[0] == doctest::Approx(1 - 3 + 10 + 0.5));
    CHECK(y[1] == doctest::Approx(2 - 4 + 12 - 0.5));

    const std::vector<double> up = {2.0, -3.0};
    const auto g = net.backward(x, up);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(g[i * 2 + j] == doctest::Approx(up[j] * x[i]));
    CHECK(g[6] == 2.0);
    CHECK(g[7] == -3.0);

    const auto zero = net.backward(x, std::vector<double>{0.0, 0.0});
    for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("nn: backward matches central finite differences") {
    CounterRng rng(2024);
    for (auto act : {OutputActivation::identity, OutputActivation::logistic}) {
        Mlp<double> net({4, 7, 5, 2}, act);
        net.initialize(rng, 0.5);
        std::vector<double> x(4);
        for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
        REQUIRE(min_hidden_preactivation(net, x) > 1e-6);
        const std::vector<double> up = {0.3, -1.1};
        const auto g = net.backward(x, up);
        int checked = 0;
        for (std::size_t k = 0; k < net.parameter_count(); ++k) {
            const double orig = net.parameters()[k];
            const double h = 1e-5 * std::max(1.0, std::abs(orig));
            net.parameters()[k] = orig + h;
            const bool kink_plus = min_hidden_preactivation(net, x) < 1e-6;
            const auto yp = net.forward(x);
            net.parameters()[k] = orig - h;
            const bool kink_minus = min_hidden_preactivation(net, x) < 1e-6;
            const auto ym = net.forward(x);
            net.parameters()[k] = orig;
            if (kink_plus || kink_minus) continue;
            const double fd = (up[0] * (yp[0] - ym[0]) + up[1] * (yp[1] - ym[1])) / (2 * h);
            CHECK(std::abs(fd - g[k]) <= 1e-4 * std::max(std::abs(g[k]), 1e-6));
            ++checked;
        }
        CHECK(checked > static_cast<int>(net.parameter_count()) - 5);
    }
}

TEST_CASE("nn: batched input gradient agrees with single-sample gradients") {
    CounterRng rng(5);
    Mlp<double> net({3, 8, 1}, OutputActivation::identity);
    net.initialize(rng, 0.3);
    std::vector<double> xs(12);
    for (auto& v : xs) v = rng.uniform() - 0.5;
    Mlp<double>::Workspace ws;
    net.forward_batch(xs, 4, ws);
    std::vector<double> up(4, 1.0), pg(net.parameter_count()), ig(12);
    net.backward_batch(ws, up, pg, ig);
    std::vector<double> sum(net.parameter_count(), 0.0);
    for (int b = 0; b < 4; ++b) {
        const std::vector<double> x(xs.begin() + 3 * b, xs.begin() + 3 * b + 3);
        const auto g = net.backward(x, std::vector<double>{1.0});
        for (std::size_t k = 0; k < g.size(); ++k) sum[k] += g[k];
        for (int i = 0; i < 3; ++i) {
            auto xp = x, xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            CHECK(ig[3 * b + i] == doctest::Approx((net.forward(xp)[0] - net.forward(xm)[0]) / 2e-6).epsilon(1e-5));
        }
    }
    for (std::size_t k = 0; k < sum.size(); ++k) CHECK(pg[k] == doctest::Approx(sum[k]).epsilon(1e-12));
}

TEST_CASE("nn: identical inputs give identical outputs") {
    CounterRng rng(8);
    Mlp<float> net({3, 64, 64, 64, 1}, OutputActivation::logistic);
    net.initialize(rng);
    const std::vector<float> x = {0.1f, 0.5f, 0.3f};
    CHECK(net.forward(x) == net.forward(x));
    // Small final layer puts the initial output near the middle of the range.
    CHECK(std::abs(net.forward(x)[0] - 0.5f) < 0.01f);
}

TEST_CASE("nn: Adam recursion") {
    AdamState<double> s(3, {0.1, 0.9, 0.999, 1e-8});
    std::vector<double> p = {1.0, 2.0, 3.0};
    adam_step(s, std::span<double>(p), std::span<const double>(std::vector<double>{0, 0, 0}));
    CHECK(p == std::vector<double>{1.0, 2.0, 3.0});

    AdamState<double> t(2, {0.1, 0.9, 0.999, 1e-8});
    std::vector<double> q = {0.0, 0.0};
    adam_step(t, std::span<double>(q), std::span<const double>(std::vector<double>{2.0, -0.5}));
    // With bias correction the first step moves by lr * g / (|g| + eps).
    CHECK(q[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(q[1] == doctest::Approx(0.1).epsilon(1e-6));

    AdamState<double> a(2, {}), b(2, {});
    std::vector<double> pa = {1, 1}, pb = {1, 1};
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> g = {std::sin(i), std::cos(i)};
        adam_step(a, std::span<double>(pa), std::span<const double>(g));
        adam_step(b, std::span<double>(pb), std::span<const double>(g));
    }
    CHECK(pa == pb);
    CHECK(a.step == 20);
    CHECK_THROWS_AS(adam_step(a, std::span<double>(pa), std::span<const double>(std::vector<double>{1.0})),
                    ValidationError);
}

TEST_CASE("nn: soft target updates") {
    std::vector<double> target = {0, 0, 0};
    const std::vector<double> source = {1, 1, 1};
    soft_update<double>(target, source, 0.5);
    CHECK(target == std::vector<double>{0.5, 0.5, 0.5});
    soft_update<double>(target, source, 1.0);
    CHECK(target == source);
    std::vector<double> slow = {0, 0, 0};
    for (int i = 0; i < 100; ++i) soft_update<double>(slow, source, 0.1);
    CHECK(1.0 - slow[0] == doctest::Approx(std::pow(0.9, 100)).epsilon(1e-9));
    CHECK_THROWS_AS(soft_update<double>(slow, source, 0.0), ValidationError);
}

TEST_CASE("nn: checkpoints round-trip exactly and reject corrupted input") {
    CounterRng rng(3);
    Mlp<float> net({3, 16, 16, 1}, OutputActivation::logistic);
    net.initialize(rng);
    std::stringstream buf;
    write_mlp(buf, net);
    const auto back = read_mlp<float>(buf);
    CHECK(back.layer_sizes() == net.layer_sizes());
    CHECK(back.output_activation() == OutputActivation::logistic);
    CHECK(std::equal(back.parameters().begin(), back.parameters().end(), net.parameters().begin()));

    std::string bytes;
    {
        std::stringstream s;
        write_mlp(s, net);
        bytes = s.str();
    }
    auto bad = bytes;
    bad[0] = 'X';
    std::stringstream bs(bad);
    CHECK_THROWS_AS(read_mlp<float>(bs), ValidationError);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(read_mlp<float>(truncated), ValidationError);
    CHECK_THROWS_AS(load_mlp<float>("/nonexistent/net.ckpt"), ValidationError);
}

TEST_CASE("replay: FIFO eviction and capacity") {
    ReplayBuffer buf(3, 0.6);
    for (int i = 0; i < 5; ++i) buf.push(item(i));
    CHECK(buf.size() == 3);
    std::vector<double> tags;
    for (std::size_t i = 0; i < 3; ++i) tags.push_back(buf.at(i).action);
    std::sort(tags.begin(), tags.end());
    CHECK(tags == std::vector<double>{2, 3, 4});
    CounterRng rng(1);
    CHECK_THROWS_AS(ReplayBuffer(4, 0.6).sample(2, 0.4, rng), StateError);
}

TEST_CASE("replay: new items get the running maximum priority") {
    ReplayBuffer buf(10, 1.0);
    buf.push(item(0));
    CHECK(buf.priority(0) == 1.0);
    const std::vector<std::size_t> idx{0};
    buf.update_priorities(idx, std::vector<double>{5.0});
    buf.push(item(1));
    CHECK(buf.priority(1) == 5.0);
    CHECK_THROWS_AS(buf.update_priorities(idx, std::vector<double>{0.0}), ValidationError);
}

TEST_CASE("replay: equal priorities or alpha = 0 sample uniformly") {
    for (double alpha : {0.6, 0.0}) {
        ReplayBuffer buf(10, alpha);
        for (int i = 0; i < 10; ++i) buf.push(item(i), alpha == 0.0 ? 1.0 + i : 2.0);
        CounterRng rng(42);
        std::vector<int> counts(10, 0);
        const int n = 100000;
        const auto batch = buf.sample(n, 1.0, rng);
        for (auto i : batch.indices) ++counts[i];
        const double sd = std::sqrt(n * 0.1 * 0.9);
        for (int c : counts) CHECK(std::abs(c - n * 0.1) < 3.0 * sd);
        if (alpha == 0.0)
            for (double w : batch.weights) CHECK(w == doctest::Approx(1.0));
    }
}

TEST_CASE("replay: priorities 3:1 with alpha = 1 sample 3:1") {
    ReplayBuffer buf(2, 1.0);
    buf.push(item(0), 3.0);
    buf.push(item(1), 1.0);
    CHECK(buf.probability(0) == doctest::Approx(0.75));
    CounterRng rng(7);
    const int n = 100000;
    int first = 0;
    const auto batch = buf.sample(n, 0.4, rng);
    for (auto i : batch.indices) first += buf.at(i).action == 0.0 ? 1 : 0;
    CHECK(std::abs(first - 0.75 * n) < 3.0 * std::sqrt(n * 0.75 * 0.25));
    for (double w : batch.weights) CHECK(w <= 1.0);
}

TEST_CASE("replay: sampling distribution passes a chi-square test") {
    ReplayBuffer buf(20, 0.6);
    for (int i = 0; i < 20; ++i) buf.push(item(i), 0.1 + i * i * 0.05);
    CounterRng rng(99);
    const int n = 100000;
    std::vector<int> counts(20, 0);
    for (auto i : buf.sample(n, 0.4, rng).indices) ++counts[i];
    double stat = 0.0, total_p = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double e = n * buf.probability(i);
        total_p += buf.probability(i);
        stat += (counts[i] - e) * (counts[i] - e) / e;
    }
    CHECK(total_p == doctest::Approx(1.0).epsilon(1e-12));
    const boost::math::chi_squared dist(19);
    CHECK(stat < boost::math::quantile(dist, 0.999));
}

TEST_CASE("replay: importance weights are normalised by the buffer maximum") {
    ReplayBuffer buf(50, 0.6);
    CounterRng fill(1);
    for (int i = 0; i < 50; ++i) buf.push(item(i), 0.01 + fill.uniform());
    CounterRng rng(2);
    for (double beta : {0.4, 0.7, 1.0}) {
        const auto b = buf.sample(256, beta, rng);
        for (std::size_t k = 0; k < b.indices.size(); ++k) {
            CHECK(b.weights[k] <= 1.0 + 1e-12);
            CHECK(b.weights[k] > 0.0);
            double max_w = 0.0;
            for (std::size_t j = 0; j < 50; ++j) max_w = std::max(max_w, std::pow(50 * buf.probability(j), -beta));
            CHECK(b.weights[k] == doctest::Approx(std::pow(50 * buf.probability(b.indices[k]), -beta) / max_w));
        }
    }
}

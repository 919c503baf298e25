#include <doctest.h>

#include "sacl/kernels.hpp"
#include "sacl/rng.hpp"
#include "sacl/tensor.hpp"

using namespace sacl;
using kernels::i64;

namespace {

template <class T>
Tensor<T> random_tensor(std::vector<i64> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<T> t(std::move(shape));
    for (auto& v : t.v) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE_TEMPLATE("conv1d omp matches serial reference bitwise", T, float, double) {
    Rng rng(42);
    for (const auto& [B, Cin, Cout, L, K] :
         {std::tuple<i64, i64, i64, i64, i64>{2, 3, 5, 17, 7}, {1, 1, 1, 4, 1}, {3, 8, 4, 33, 3},
          {4, 2, 6, 9, 5}}) {
        auto x = random_tensor<T>({B, Cin, L}, rng);
        auto w = random_tensor<T>({Cout, Cin, K}, rng);
        auto bias = random_tensor<T>({Cout}, rng);

        Tensor<T> y_omp({B, Cout, L}), y_ser({B, Cout, L});
        kernels::conv1d_forward(x.data(), w.data(), bias.data(), y_omp.data(), B, Cin, Cout, L, K);
        kernels::serial::conv1d_forward(x.data(), w.data(), bias.data(), y_ser.data(), B, Cin, Cout, L, K);
        REQUIRE(y_omp.v == y_ser.v);

        auto gy = random_tensor<T>({B, Cout, L}, rng);
        Tensor<T> gx_omp({B, Cin, L}), gx_ser({B, Cin, L});
        kernels::conv1d_backward_input(gy.data(), w.data(), gx_omp.data(), B, Cin, Cout, L, K);
        kernels::serial::conv1d_backward_input(gy.data(), w.data(), gx_ser.data(), B, Cin, Cout, L, K);
        REQUIRE(gx_omp.v == gx_ser.v);

        Tensor<T> gw_omp({Cout, Cin, K}), gw_ser({Cout, Cin, K}), gb_omp({Cout}), gb_ser({Cout});
        kernels::conv1d_backward_params(x.data(), gy.data(), gw_omp.data(), gb_omp.data(), B, Cin, Cout,
                                        L, K);
        kernels::serial::conv1d_backward_params(x.data(), gy.data(), gw_ser.data(), gb_ser.data(), B, Cin,
                                                Cout, L, K);
        REQUIRE(gw_omp.v == gw_ser.v);
        REQUIRE(gb_omp.v == gb_ser.v);
    }
}

TEST_CASE_TEMPLATE("linear omp matches serial reference bitwise", T, float, double) {
    Rng rng(43);
    for (const auto& [B, I, O] : {std::tuple<i64, i64, i64>{1, 1, 1}, {4, 7, 3}, {8, 32, 16}}) {
        auto x = random_tensor<T>({B, I}, rng);
        auto w = random_tensor<T>({O, I}, rng);
        auto bias = random_tensor<T>({O}, rng);

        Tensor<T> y_omp({B, O}), y_ser({B, O});
        kernels::linear_forward(x.data(), w.data(), bias.data(), y_omp.data(), B, I, O);
        kernels::serial::linear_forward(x.data(), w.data(), bias.data(), y_ser.data(), B, I, O);
        REQUIRE(y_omp.v == y_ser.v);

        auto gy = random_tensor<T>({B, O}, rng);
        Tensor<T> gx_omp({B, I}), gx_ser({B, I});
        kernels::linear_backward_input(gy.data(), w.data(), gx_omp.data(), B, I, O);
        kernels::serial::linear_backward_input(gy.data(), w.data(), gx_ser.data(), B, I, O);
        REQUIRE(gx_omp.v == gx_ser.v);

        Tensor<T> gw_omp({O, I}), gw_ser({O, I}), gb_omp({O}), gb_ser({O});
        kernels::linear_backward_params(x.data(), gy.data(), gw_omp.data(), gb_omp.data(), B, I, O);
        kernels::serial::linear_backward_params(x.data(), gy.data(), gw_ser.data(), gb_ser.data(), B, I, O);
        REQUIRE(gw_omp.v == gw_ser.v);
        REQUIRE(gb_omp.v == gb_ser.v);
    }
}

TEST_CASE("conv1d same padding keeps length and matches a hand-computed stencil") {
    // x = [1 2 3 4], w = [1 0 -1] (pad 1): y[t] = x[t-1] - x[t+1]
    Tensor<double> x({1, 1, 4});
    x.v = {1, 2, 3, 4};
    Tensor<double> w({1, 1, 3});
    w.v = {1, 0, -1};
    Tensor<double> b({1});
    Tensor<double> y({1, 1, 4});
    kernels::conv1d_forward(x.data(), w.data(), b.data(), y.data(), 1, 1, 1, 4, 3);
    // y[0] = 0*?; with zero padding: y[0] = 0 - x[1] ... careful with orientation:
    // y[t] = sum_k w[k] * x[t + k - 1] = x[t+1] * w[2]? verify against serial definition
    Tensor<double> y_ser({1, 1, 4});
    kernels::serial::conv1d_forward(x.data(), w.data(), b.data(), y_ser.data(), 1, 1, 1, 4, 3);
    REQUIRE(y.v == y_ser.v);
    // direct evaluation of the serial definition
    CHECK(y.v[0] == doctest::Approx(1 * 0 + 0 * 1 + (-1) * 2));
    CHECK(y.v[1] == doctest::Approx(1 * 1 + 0 * 2 + (-1) * 3));
    CHECK(y.v[2] == doctest::Approx(1 * 2 + 0 * 3 + (-1) * 4));
    CHECK(y.v[3] == doctest::Approx(1 * 3 + 0 * 4 + (-1) * 0));
}

TEST_CASE("maxpool picks the window maximum and routes gradient to it") {
    Tensor<double> x({1, 1, 8});
    x.v = {1, 5, 2, 2, 9, 0, 3, 3};
    Tensor<double> y({1, 1, 2});
    Tensor<std::int32_t> am({1, 1, 2});
    kernels::maxpool1d_forward(x.data(), y.data(), am.data(), 1, 1, 8, 4);
    CHECK(y.v[0] == 5);
    CHECK(y.v[1] == 9);
    CHECK(am.v[0] == 1);
    CHECK(am.v[1] == 4);

    Tensor<double> gy({1, 1, 2});
    gy.v = {1.0, 2.0};
    Tensor<double> gx({1, 1, 8});
    kernels::maxpool1d_backward(gy.data(), am.data(), gx.data(), 1, 1, 8, 4);
    CHECK(gx.v[1] == 1.0);
    CHECK(gx.v[4] == 2.0);
    double total = 0;
    for (double v : gx.v) total += v;
    CHECK(total == 3.0);
}

TEST_CASE("global average pool forward/backward") {
    Tensor<double> x({1, 2, 4});
    x.v = {1, 2, 3, 4, 10, 10, 10, 10};
    Tensor<double> y({1, 2});
    kernels::global_avgpool_forward(x.data(), y.data(), 1, 2, 4);
    CHECK(y.v[0] == doctest::Approx(2.5));
    CHECK(y.v[1] == doctest::Approx(10.0));

    Tensor<double> gy({1, 2});
    gy.v = {4.0, 8.0};
    Tensor<double> gx({1, 2, 4});
    kernels::global_avgpool_backward(gy.data(), gx.data(), 1, 2, 4);
    CHECK(gx.v[0] == doctest::Approx(1.0));
    CHECK(gx.v[7] == doctest::Approx(2.0));
}

} // TEST_SUITE

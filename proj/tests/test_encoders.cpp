#include <doctest.h>

#include <cmath>

#include "qfl/encoders.hpp"
#include "qfl/rng.hpp"

using namespace qfl;
using namespace qfl::encoders;

TEST_CASE("angle encoding emits one RX per qubit in index order") {
    const auto prefix = angle_encode({0.1, 0.2, 0.3}, 3);
    REQUIRE(prefix.gates.size() == 3);
    for (int q = 0; q < 3; ++q) {
        CHECK(prefix.gates[q].kind == qsim::GateKind::RX);
        CHECK(prefix.gates[q].target == q);
    }
    CHECK_THROWS_AS(angle_encode({0.1, 0.2}, 3), ValidationError);
    CHECK_THROWS_AS(angle_encode({0.1, std::nan("")}, 2), ValidationError);
}

TEST_CASE("all-zero angles leave the ground state unchanged") {
    const auto prefix = angle_encode({0.0, 0.0}, 2);
    const auto out = qsim::run_circuit(prefix, qsim::Statevector::zero(2));
    CHECK(std::abs(out.amplitude(0) - qsim::Complex(1, 0)) < 1e-12);
}

TEST_CASE("an RX(pi) encoding flips the z expectation") {
    const auto prefix = angle_encode({3.14159265358979323846}, 1);
    const auto out = qsim::run_circuit(prefix, qsim::Statevector::zero(1));
    CHECK(qsim::expectation_z(out, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("angle-encoding prefixes preserve the norm") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        FeatureVector f(4);
        for (auto& v : f) v = rng.uniform(-3.14, 3.14);
        const auto out = qsim::run_circuit(angle_encode(f, 4), qsim::Statevector::zero(4));
        CHECK(std::abs(out.norm_squared() - 1.0) < 1e-10);
    }
}

TEST_CASE("amplitude encoding pads and normalizes") {
    SUBCASE("basis vector input") {
        const auto s = amplitude_encode({1, 0, 0, 0}, 2);
        CHECK(std::abs(s.amplitude(0) - qsim::Complex(1, 0)) < 1e-12);
    }
    SUBCASE("uniform input") {
        const auto s = amplitude_encode({1, 1, 1, 1}, 2);
        for (int i = 0; i < 4; ++i)
            CHECK(s.amplitude(i).real() == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("3-4-5 normalization with zero padding") {
        const auto s = amplitude_encode({3, 4}, 2);
        CHECK(s.amplitude(0).real() == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(s.amplitude(1).real() == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(std::abs(s.amplitude(2)) == 0.0);
        CHECK(std::abs(s.amplitude(3)) == 0.0);
    }
    SUBCASE("all-zero input has no normalizable state") {
        CHECK_THROWS_AS(amplitude_encode({0, 0, 0}, 2), ValidationError);
    }
    SUBCASE("too many features") {
        CHECK_THROWS_AS(amplitude_encode({1, 2, 3, 4, 5}, 2), ValidationError);
    }
}

TEST_CASE("amplitude encoding is scale invariant") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        FeatureVector f(5);
        for (auto& v : f) v = rng.uniform(-2.0, 2.0);
        if (std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; })) continue;
        const double c = std::exp(rng.uniform(-3.0, 3.0));
        FeatureVector scaled = f;
        for (auto& v : scaled) v *= c;
        const auto a = amplitude_encode(f, 3);
        const auto b = amplitude_encode(scaled, 3);
        for (std::size_t i = 0; i < a.dim(); ++i)
            CHECK(std::abs(a.amplitude(i) - b.amplitude(i)) < 1e-12);
    }
}

TEST_CASE("basis encoding places the amplitude at the bit-weighted index") {
    CHECK(std::abs(basis_encode({1, 0, 1}).amplitude(5) - qsim::Complex(1, 0)) < 1e-15);
    CHECK(std::abs(basis_encode({0}).amplitude(0) - qsim::Complex(1, 0)) < 1e-15);
    CHECK(std::abs(basis_encode({1, 1, 1}).amplitude(7) - qsim::Complex(1, 0)) < 1e-15);
    CHECK_THROWS_AS(basis_encode({}), ValidationError);
    CHECK_THROWS_AS(basis_encode({2}), ValidationError);
}

TEST_CASE("sampling a basis-encoded state returns the input bitstring") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::uint8_t> bits(4);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
        const auto state = basis_encode(bits);
        const auto counts = qsim::sample_counts(state, 64, 100 + trial);
        REQUIRE(counts.size() == 1);
        const auto index = counts.begin()->first;
        for (int q = 0; q < 4; ++q) CHECK(((index >> q) & 1ULL) == bits[q]);
    }
}

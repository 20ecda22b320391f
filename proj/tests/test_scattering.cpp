#include <doctest.h>

#include <algorithm>

#include "qlis/scattering.hpp"

using namespace qlis;

namespace {

struct Fixture {
    FrequencyGrid grid;
    TimeGrid tg;
    TwoModeState state;
    MatterSystem matter = v_system(1.0, 0.6, 0.5, 1.0, 0.8);

    explicit Fixture(int n, double dw)
        : grid(FrequencyGrid::centered(n, 1.0, dw)), tg(conjugate_time_grid(grid)),
          state(TwoModeState::from_amplitude(product_amplitude(gaussian_envelope(grid, 1.0, 0.8, -0.5),
              gaussian_envelope(grid, 0.9, 0.7, 0.6))))
    {
        // A small bunched-in-reverse component so every input block is exercised.
        state.block[1][0] = 0.3 * state.block[0][1].transpose();
    }
};

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double max_abs(const std::vector<cplx>& a)
{
    double d = 0.0;
    for (const auto& x : a)
        d = std::max(d, std::abs(x));
    return d;
}

} // namespace

TEST_CASE("channel maps")
{
    CHECK(ChannelMap::identity().is_identity());
    const double dt = 0.25;
    ChannelMap m = ChannelMap::from_transform(delayed_balanced_bs(3 * dt), dt);
    CHECK(m.shift[0][1] == 3);
    CHECK(m.shift[1][0] == -3);
    CHECK_THROWS_AS(ChannelMap::from_transform(delayed_balanced_bs(0.3), dt), ValidationError);
    CHECK_THROWS_AS(ChannelMap::from_transform(squeezer(0.1, 0.0), dt), KindMismatchError);
}

TEST_CASE("prefix-table kernel matches the direct reference")
{
    Fixture f(16, 0.6);
    ScatteringSetup s = make_scattering_setup(f.state, delayed_balanced_bs(2 * f.tg.dt),
        ScatteringRoute::interaction_order, 12);
    GridAmplitudes fast = scatter_grid(s, f.matter);
    GridAmplitudes ref = scatter_grid_reference(s, f.matter);
    CHECK(max_diff(fast.a0, ref.a0) <= 1e-13 * max_abs(ref.a0));
    CHECK(max_diff(fast.a2, ref.a2) <= 1e-12 * max_abs(ref.a2));
    CHECK(max_diff(fast.a4, ref.a4) <= 1e-12 * max_abs(ref.a4));
    CHECK(max_abs(ref.a4) > 1e-6);

    ScatteringSetup arr = make_scattering_setup(f.state, delayed_balanced_bs(2 * f.tg.dt),
        ScatteringRoute::arrival_order, 12);
    CHECK_THROWS_AS(scatter_grid(arr, f.matter), CapabilityError);
}

TEST_CASE("detection routes agree on a well-covered grid")
{
    Fixture f(40, 0.45);
    const ModeTransform bs = delayed_balanced_bs(2 * f.tg.dt);
    ScatteringSetup a = make_scattering_setup(f.state, bs, ScatteringRoute::interaction_order, 36);
    ScatteringSetup b = make_scattering_setup(f.state, bs, ScatteringRoute::arrival_order, 36);
    for (int p : {5, 10, 14})
        for (int q : {7, 13, 20}) {
            PointAmplitudes x = scatter_point(a, f.matter, p, q), y = scatter_point(b, f.matter, p, q);
            CHECK((x.a0[0] - y.a0[0]).norm() < 1e-12);
            CHECK((x.a2_total(0) - y.a2_total(0)).norm() < 1e-9);
            CHECK((x.a4_total(0) - y.a4_total(0)).norm() < 1e-9);
        }
}

TEST_CASE("decoupled matter scatters nothing")
{
    Fixture f(16, 0.6);
    ScatteringSetup s = make_scattering_setup(f.state, identity_transform(), ScatteringRoute::interaction_order, 15);
    GridAmplitudes g = scatter_grid(s, f.matter.decoupled());
    CHECK(max_abs(g.a2) == 0.0);
    CHECK(max_abs(g.a4) == 0.0);
    CHECK(max_abs(g.a0) > 0.01);

    DensityParts d = coincidence_density(g, f.matter.ensemble_weights(), 0.1);
    CHECK((d.total - d.background).norm() < 1e-15);
    CHECK(d.order2.norm() == 0.0);
    CHECK_THROWS_AS(coincidence_density(g, {0.5, 0.5}, 0.1), ValidationError);
}

TEST_CASE("density parts add up to the total through fourth order")
{
    Fixture f(16, 0.6);
    ScatteringSetup s = make_scattering_setup(f.state, delayed_balanced_bs(f.tg.dt),
        ScatteringRoute::interaction_order, 14);
    GridAmplitudes g = scatter_grid(s, f.matter);
    const double l = 1e-2;
    DensityParts d = coincidence_density(g, f.matter.ensemble_weights(), l);
    Eigen::MatrixXd rest = d.total - d.background - d.order2 - d.order4;
    // What remains is of order lambda^6, a factor ~lambda^2 below the fourth order.
    CHECK(rest.cwiseAbs().maxCoeff() < 1e-3 * d.order4.cwiseAbs().maxCoeff());
    CHECK(d.order4.cwiseAbs().maxCoeff() > 0.0);
    CMatrix c = cross_density(g, g, f.matter.ensemble_weights(), l);
    CHECK((c.real() - d.total).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(c.imag().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("fourth-order class labels")
{
    const auto& l = a4_class_labels();
    CHECK(l.size() == 6);
    for (const auto& s : l) {
        CHECK(std::count(s.begin(), s.end(), 'X') == 2);
        CHECK(std::count(s.begin(), s.end(), 'Y') == 2);
    }
}

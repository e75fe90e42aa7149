#include "oracles.hpp"
#include "vwave/diagnostics.hpp"
#include "vwave/integrator.hpp"
#include "vwave/kernels.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace vwave;

namespace {

SimState vortices_only(std::vector<MassiveVortex> vs) {
  SimState s;
  s.cloud = ParticleCloud(Eigen::Matrix2Xd(2, 0), Eigen::VectorXd(0), 0.05);
  s.vortices = std::move(vs);
  return s;
}

SimState disc_state(double R, double level, double density) {
  InitialData init;
  init.support_radius = R;
  init.patches.push_back({Vec2(0, 0), R, level});
  SimConfig cfg;
  cfg.particle_density = density;
  cfg.blob_sigma = 0.05;
  return initial_state(init, cfg);
}

constexpr std::array<double, 3> kPs = {1.0, 2.0, std::numeric_limits<double>::infinity()};

}  // namespace

TEST_CASE("energy_H0 examples") {
  SUBCASE("two unit vortices at distance e") {
    const SimState s = vortices_only({{Vec2(0, 0), Vec2::Zero(), 0, 1}, {Vec2(std::exp(1.0), 0), Vec2::Zero(), 0, 1}});
    CHECK(energy_H0(s, 1e-3) == doctest::Approx(1.0 / oracle::pi));
  }
  SUBCASE("kinetic term enters with a minus sign") {
    const SimState s = vortices_only({{Vec2(0, 0), Vec2(1, 2), 3.0, 1}});
    CHECK(energy_H0(s, 1e-3) == doctest::Approx(-15.0));
  }
  SUBCASE("uniform disc self-energy") {
    const double R = 0.5, level = 2.0;
    const SimState s = disc_state(R, level, 1.5e4);
    const double expect = level * level * oracle::disc_log_self_energy(R) / (2 * oracle::pi);
    CHECK(energy_H0(s, 1e-4) == doctest::Approx(expect).epsilon(1e-2));
  }
  SUBCASE("disc plus a far vortex") {
    const double R = 0.4;
    SimState s = disc_state(R, 1.0, 1e4);
    const double self = energy_H0(s, 1e-4);
    s.vortices = {{Vec2(3, 0), Vec2::Zero(), 0, 1.5}};
    // outside a disc the log potential is that of its total circulation
    const double cross = 1.5 / oracle::pi * s.cloud.weights.sum() * std::log(3.0);
    CHECK(energy_H0(s, 1e-4) - self == doctest::Approx(cross).epsilon(1e-3));
  }
  SUBCASE("coincident vortices") {
    const SimState s = vortices_only({{Vec2(0, 0), Vec2::Zero(), 0, 1}, {Vec2(0, 0), Vec2::Zero(), 0, 1}});
    CHECK_THROWS_AS(energy_H0(s, 1e-3), CollisionError);
  }
}

TEST_CASE("momentum_I0 examples") {
  CHECK(momentum_I0(vortices_only({{Vec2(1, 0), Vec2(0, 1), 1.0, 1.0}})) == doctest::Approx(-1.0));
  CHECK(momentum_I0(vortices_only({{Vec2(0, 0), Vec2::Zero(), 1.0, 1.0}})) == 0.0);
  CHECK(momentum_I0(disc_state(1.0, 1.0, 1e4)) == doctest::Approx(oracle::pi / 2).epsilon(1e-2));
}

TEST_CASE("vortex functional and its rate") {
  const std::vector<MassiveVortex> vs = {{Vec2(0, 0), Vec2(1, 0), 2.0, 1.0}, {Vec2(1, 0), Vec2::Zero(), 0.0, 3.0}};
  CHECK(vortex_functional_H(vs) == doctest::Approx(-2.0));
  const std::vector<Vec2> u = {Vec2(0, 1), Vec2(5, 5)};
  CHECK(vortex_functional_H_rate(vs, u) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(vortex_functional_H_rate(vs, std::vector<Vec2>{Vec2(0, 1)}), Error);
}

TEST_CASE("property: pair distance bound holds for same-sign vortices") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1), pos(0.1, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<MassiveVortex> vs;
    for (int k = 0; k < 4; ++k) vs.push_back({Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), pos(rng), pos(rng)});
    for (std::size_t j = 0; j < vs.size(); ++j)
      for (std::size_t k = j + 1; k < vs.size(); ++k)
        CHECK(pair_distance_lower_bound(vs, j, k) <= (vs[j].h - vs[k].h).norm());
  }
}

TEST_CASE("local energy examples") {
  const SimState s = vortices_only({{Vec2(0, 0), Vec2::Zero(), 1.0, 2 * oracle::pi}});
  CHECK(local_energy_Fk(s, Vec2(std::exp(1.0), 0), 0, 1e-3) == doctest::Approx(1.0));
  SimState moving = s;
  moving.vortices[0].hdot = Vec2(0, 1);
  CHECK(local_energy_Fk(moving, Vec2(1, 0), 0, 1e-3) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(local_energy_Fk(s, Vec2(0, 0), 0, 1e-3), SingularEvaluation);
  CHECK_THROWS_AS(local_energy_Fk(s, Vec2(1, 0), 3, 1e-3), Error);
}

TEST_CASE("property: local energy rate matches finite differences") {
  // Tracers carry no vorticity, so phi vanishes and F_k changes only through
  // the vortex motion and the tracer motion.
  SimState s = vortices_only({{Vec2(0, 0), Vec2(0.2, 0.1), 1.0, 1.0}, {Vec2(1.5, 0), Vec2::Zero(), 2.0, 0.5}});
  Eigen::Matrix2Xd x(2, 2);
  x << 0.3, -0.2, 0.1, 0.4;
  s.cloud.append_tracers(x);
  SimConfig cfg;
  cfg.dt = 1e-4;
  const double eps = 1e-3;
  SimState prev = s, cur = step(s, cfg).state;
  for (int n = 0; n < 10; ++n) {
    const SimState next = step(cur, cfg).state;
    const StateDerivative d = rhs(cur, cfg);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) {
        const double fd = (local_energy_Fk(next, next.cloud.positions.col(i), k, eps) -
                           local_energy_Fk(prev, prev.cloud.positions.col(i), k, eps)) /
                          (2 * cfg.dt);
        const double an = local_energy_rate(cur, d, cur.cloud.positions.col(i), Vec2::Zero(), k, eps);
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
      }
    prev = cur;
    cur = next;
  }
  SimState massless = s;
  massless.vortices[0].mass = 0.0;
  CHECK_THROWS_AS(local_energy_rate(massless, rhs(massless, cfg), Vec2(0.3, 0.1), Vec2::Zero(), 0, eps), Error);
}

TEST_CASE("dphi_eps_dt matches a finite difference") {
  SimState s = disc_state(0.3, 1.0, 4000);
  Eigen::Matrix2Xd v(2, s.cloud.size());
  for (Eigen::Index i = 0; i < v.cols(); ++i) v.col(i) = Vec2(1.0 + s.cloud.positions(1, i), -0.5);
  const Vec2 X(0.7, 0.2);
  const double h = 1e-6;
  ParticleCloud a = s.cloud, b = s.cloud;
  a.positions += h * v;
  b.positions -= h * v;
  const double fd = (stream_phi_eps(a, X, 1e-3) - stream_phi_eps(b, X, 1e-3)) / (2 * h);
  CHECK(dphi_eps_dt(s.cloud, v, X, 1e-3) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("Lp norms") {
  const SimState s = disc_state(0.5, 2.0, 1e4);
  const LpReport r = lp_norms(s.cloud, kPs);
  const double area = static_cast<double>(s.cloud.size()) * s.cloud.cell_area;
  REQUIRE(r.weight_based.size() == 3);
  CHECK(r.weight_based[0].value == doctest::Approx(2.0 * area));
  CHECK(r.weight_based[1].value == doctest::Approx(2.0 * std::sqrt(area)));
  CHECK(r.weight_based[2].value == doctest::Approx(2.0));
  CHECK(r.histogram[0].value == doctest::Approx(2.0 * area).epsilon(1e-9));
  CHECK(r.histogram[2].value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.histogram[1].value <= r.weight_based[1].value * (1 + 1e-12));
  CHECK_THROWS_AS(lp_norms(s.cloud, std::array<double, 1>{0.5}), Error);

  SUBCASE("tracers are ignored") {
    ParticleCloud c = s.cloud;
    Eigen::Matrix2Xd far(2, 1);
    far << 10, 10;
    c.append_tracers(far);
    const LpReport t = lp_norms(c, kPs);
    CHECK(t.histogram[0].value == doctest::Approx(r.histogram[0].value));
  }
}

TEST_CASE("measure preservation defect") {
  const Eigen::Matrix2Xd lat = tracer_lattice(Vec2(-1, -1), Vec2(1, 1), 0.02);
  CHECK(measure_preservation_defect(lat, lat, 16) == 0.0);
  CHECK(measure_preservation_defect(lat, lat.colwise() + Vec2(0.1, 0.0), 16) == 0.0);
  Eigen::Matrix2Xd squeezed = lat * 0.5;
  CHECK(measure_preservation_defect(lat, squeezed, 8) >= 1.0);
  CHECK(std::isnan(measure_preservation_defect(lat, lat.colwise() + Vec2(1.5, 0.0), 8)));
  CHECK_THROWS_AS(measure_preservation_defect(lat, squeezed.leftCols(3), 8), Error);
}

TEST_CASE("constancy check") {
  InitialData init;
  init.support_radius = 1.0;
  init.patches = {{Vec2(0, 0), 0.2, 3.0}, {Vec2(0.6, 0), 0.2, 1.0}};
  init.vortices = {{Vec2(0, 0), Vec2::Zero(), 1.0, 0.5}};
  SimConfig cfg;
  cfg.particle_density = 1e4;
  SimState s = initial_state(init, cfg);
  ConstancyReport r = constancy_check(s, init, 0, 0.05);
  CHECK(r.samples >= 50);
  CHECK(r.violations == 0);
  CHECK(r.max_abs_deviation == 0.0);
  CHECK(r.delta0 == 0.2);
  CHECK(r.alpha == 3.0);

  SUBCASE("a foreign particle is detected") {
    for (Eigen::Index i = 0; i < s.cloud.size(); ++i)
      if ((Vec2(s.cloud.positions.col(i)) - Vec2(0.6, 0)).norm() < 0.01) {
        s.cloud.positions.col(i) = Vec2(0.001, 0.001);
        break;
      }
    r = constancy_check(s, init, 0, 0.05);
    CHECK(r.violations == 1);
    CHECK(r.max_abs_deviation == 2.0);
  }
  SUBCASE("no samples") {
    s.vortices[0].h = Vec2(5, 5);
    r = constancy_check(s, init, 0, 0.05);
    CHECK(r.no_samples);
    CHECK(std::isnan(r.max_abs_deviation));
  }
  SUBCASE("vortex without a centered patch") {
    init.vortices[0].h0 = Vec2(0.1, 0);
    CHECK_THROWS_AS(constancy_check(s, init, 0, 0.05), Error);
  }
}

TEST_CASE("solution distance") {
  const SimState a = disc_state(0.4, 1.0, 3000);
  SimState b = a;
  b.cloud.positions.row(0).array() += 0.01;
  CHECK(solution_distance_D(a, a, 64) == 0.0);
  CHECK(solution_distance_D(a, b, 64) == doctest::Approx(solution_distance_D(b, a, 64)));
  CHECK(solution_distance_D(a, b, 64) > 0.0);
  const SimState va = vortices_only({{Vec2(0, 0), Vec2(1, 0), 1, 1}});
  const SimState vb = vortices_only({{Vec2(3, 4), Vec2(1, 1), 1, 1}});
  CHECK(solution_distance_D(va, vb) == doctest::Approx(26.0));
  CHECK_THROWS_AS(solution_distance_D(va, vortices_only({})), Error);

  SUBCASE("property: refining the discretization shrinks D") {
    // smooth bump sampled on a grid, vanishing on the box edges
    SampledField bump;
    bump.origin = Vec2(-0.5, -0.5);
    bump.spacing = 1.0 / 64;
    bump.values.resize(65, 65);
    for (int i = 0; i <= 64; ++i)
      for (int j = 0; j <= 64; ++j) {
        const double x = -0.5 + i / 64.0, y = -0.5 + j / 64.0;
        bump.values(i, j) = std::pow(1 - 4 * x * x, 2) * std::pow(1 - 4 * y * y, 2);
      }
    auto patch = [&](double density) {
      InitialData init;
      init.support_radius = 0.5;
      init.background = bump;
      SimConfig cfg;
      cfg.particle_density = density;
      cfg.blob_sigma = 0.1;
      return initial_state(init, cfg);
    };
    const SimState ref = patch(3.2e4);
    const double d1 = solution_distance_D(patch(1000), ref, 64);
    const double d2 = solution_distance_D(patch(4000), ref, 64);
    CHECK(d2 < 0.5 * d1);
  }
}

TEST_CASE("support radius and confinement") {
  SimState s = disc_state(0.5, 1.0, 2000);
  const double r0 = support_radius(s.cloud);
  CHECK(r0 <= 0.5);
  CHECK(r0 > 0.45);
  Eigen::Matrix2Xd far(2, 1);
  far << 4, 0;
  s.cloud.append_tracers(far);
  CHECK(support_radius(s.cloud) == r0);

  const std::vector<std::vector<MassiveVortex>> series = {
      {{Vec2(1, 0), Vec2(0, 2), 1, 1}, {Vec2(-1, 0), Vec2::Zero(), 1, 1}},
      {{Vec2(0, 3), Vec2(0, 1), 1, 1}, {Vec2(0, 2), Vec2(0, 0.5), 1, 1}}};
  const ConfinementReport c = confinement_report(series);
  CHECK(c.max_h == 3.0);
  CHECK(c.max_hdot == 2.0);
  CHECK(c.min_pair_dist == 1.0);
}

TEST_CASE("property: vortex energy drift shrinks at fourth order") {
  const SimState s = vortices_only({{Vec2(0.4, 0), Vec2(0.1, 0.3), 1.0, 1.0},
                                    {Vec2(-0.4, 0.1), Vec2(0, -0.2), 0.5, 1.0},
                                    {Vec2(0, -0.5), Vec2(0.2, 0), 0.8, 1.0}});
  auto drift = [&](double dt) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.diag_stride = 1;
    double h0 = NAN, i0 = NAN, dh = 0, di = 0;
    RunObserver obs;
    obs.on_record = [&](const SimState& st) {
      const double h = energy_H0(st, cfg.mollifier_eps), i = momentum_I0(st);
      if (std::isnan(h0)) h0 = h, i0 = i;
      dh = std::max(dh, std::abs(h - h0));
      di = std::max(di, std::abs(i - i0));
    };
    REQUIRE(run(s, cfg, obs).termination == Termination::completed);
    return std::pair{dh, di};
  };
  const auto fine = drift(1e-3);
  CHECK(fine.first <= 1e-6);
  CHECK(fine.second <= 1e-6);
  const auto c1 = drift(0.04), c2 = drift(0.02);
  CHECK(c1.first / c2.first >= 8.0);
}

TEST_CASE("diagnostics recorder") {
  InitialData init;
  init.support_radius = 0.5;
  init.patches.push_back({Vec2(0, 0), 0.4, 1.0});
  init.vortices = {{Vec2(0.8, 0), Vec2(0, 0.1), 1.0, 0.5}, {Vec2(-0.8, 0), Vec2::Zero(), 0.0, 0.5}};
  SimConfig cfg;
  cfg.particle_density = 2000;
  const SimState s = initial_state(init, cfg);
  DiagnosticsRecorder rec(cfg, 20);
  rec(s);
  REQUIRE(rec.rows().size() == 1);
  const DiagnosticsRecord& r = rec.rows().front();
  CHECK(r.t == 0.0);
  CHECK(r.H0 == doctest::Approx(energy_H0(s, cfg.mollifier_eps)));
  CHECK(r.I0 == doctest::Approx(momentum_I0(s)));
  CHECK(r.Hn == doctest::Approx(vortex_functional_H(s.vortices)));
  CHECK(r.Fk.size() == 2);
  CHECK(std::isfinite(r.Fk[0]));
  CHECK(r.Lp.size() == 3);
  CHECK(r.min_vortex_dist == doctest::Approx(1.6));
  CHECK(r.support_radius <= 0.4);
}

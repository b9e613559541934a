#include "catch_amalgamated.hpp"

#include <random>

#include "qdiv/models.hpp"
#include "qdiv/propagation.hpp"
#include "oracles.hpp"

using namespace qdiv;
using namespace qdiv::models;

namespace {

MapTrajectory pauli_trajectory(const PauliRates& r, double t_end, int steps) {
  return tabulate([&](double t) { return pauli_map(r, t).map; },
                  TimeGrid::uniform(t_end, steps));
}

}  // namespace

TEST_CASE("expm fixed points and oracle agreement") {
  REQUIRE((expm(ComplexMatrix(3)) - ComplexMatrix::identity(3)).max_abs() < 1e-15);

  ComplexMatrix d(2);
  d(0, 0) = cxd(1.0, 0.0);
  d(1, 1) = cxd(-2.0, 0.5);
  const ComplexMatrix ed = expm(d);
  REQUIRE(std::abs(ed(0, 0) - std::exp(cxd(1.0, 0.0))) < 1e-14);
  REQUIRE(std::abs(ed(1, 1) - std::exp(cxd(-2.0, 0.5))) < 1e-14);
  REQUIRE(std::abs(ed(0, 1)) < 1e-15);

  ComplexMatrix nil(2);
  nil(0, 1) = 1.0;
  const ComplexMatrix en = expm(nil);
  REQUIRE(std::abs(en(0, 0) - 1.0) < 1e-15);
  REQUIRE(std::abs(en(0, 1) - 1.0) < 1e-15);
  REQUIRE(std::abs(en(1, 0)) < 1e-15);

  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    const int dim = 2 + 2 * (rep % 2);
    const ComplexMatrix a = oracle::random_matrix(rng, dim, rep % 3 == 0 ? 3.0 : 0.6);
    const ComplexMatrix diff = expm(a) - oracle::expm_taylor(a);
    REQUIRE(diff.max_abs() < 1e-11 * std::max(1.0, oracle::expm_taylor(a).max_abs()));
  }

  // exponential of i * Hermitian is unitary
  const ComplexMatrix h = oracle::random_hermitian(rng, 4);
  ComplexMatrix ih(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ih(i, j) = cxd(0.0, 1.0) * h(i, j);
  const ComplexMatrix u = expm(ih);
  REQUIRE((u.adjoint() * u - ComplexMatrix::identity(4)).max_abs() < 1e-13);
}

TEST_CASE("time grid indexing") {
  const TimeGrid g = TimeGrid::uniform(5.0, 1000);
  REQUIRE(g.size() == 1001);
  REQUIRE(g.dt() == Catch::Approx(0.005));
  REQUIRE(g.index_of(0.0) == 0);
  REQUIRE(g.index_of(5.0) == 1000);
  REQUIRE(g.index_of(2.5) == 500);
  REQUIRE_THROWS_AS(g.index_of(2.5001), Error);
  REQUIRE_THROWS_AS(TimeGrid::uniform(-1.0, 10), Error);
}

TEST_CASE("integrate: zero generator gives identity trajectory") {
  const auto zero = [](double) { return Superoperator(); };
  const MapTrajectory traj = integrate(zero, TimeGrid::uniform(1.0, 20));
  for (const Superoperator& m : traj.maps)
    REQUIRE((m.matrix() - ComplexMatrix::identity(4)).max_abs() < 1e-14);
}

TEST_CASE("integrate matches the Pauli closed form") {
  PauliRates r{Rate::constant(1.0), Rate::constant(1.0), Rate::constant(1.0)};
  const TimeGrid grid = TimeGrid::uniform(5.0, 1000);
  const MapTrajectory traj =
      integrate([&](double t) { return pauli_generator(r, t); }, grid);
  REQUIRE(traj.source == TrajectorySource::Integrated);

  double worst = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const ComplexMatrix exact = pauli_map(r, grid.time(k)).map.matrix();
    worst = std::max(worst, (traj.at(k).matrix() - exact).max_abs());
  }
  REQUIRE(worst < 1e-6);
}

TEST_CASE("integrate matches the Maniscalco closed form and converges at order 4") {
  ManiscalcoParams m;
  m.omega = Rate::constant(1.0);
  m.gplus = Rate::tanh_shape(1.0);
  m.gminus = Rate::constant(0.8);
  m.g3 = Rate::sin_shape(0.5, 1.0);

  const auto gen = [&](double t) { return maniscalco_generator(m, t); };
  const auto exact_at = [&](double t) { return maniscalco_map(m, t); };

  const double t_end = 2.0;
  const auto deviation = [&](int steps) {
    const MapTrajectory traj = integrate(gen, TimeGrid::uniform(t_end, steps));
    double worst = 0.0;
    for (int k = 0; k <= steps; k += steps / 10) {
      const double t = traj.grid.time(k);
      worst = std::max(worst, (traj.at(k).matrix() - exact_at(t).matrix()).max_abs());
    }
    return worst;
  };

  const double coarse = deviation(100);
  const double fine = deviation(200);
  REQUIRE(fine < 1e-6);
  REQUIRE(coarse / fine > 10.0);  // 4th order would give ~16
}

TEST_CASE("integrate regenerates the composition map below t_star") {
  CompositionParams c;
  c.p = PFun::smoothstep(2.0);
  const TimeGrid grid = TimeGrid::uniform(1.8, 360);
  const MapTrajectory traj =
      integrate([&](double t) { return composition_generator(c, t); }, grid);
  double worst = 0.0;
  for (int k = 0; k < grid.size(); ++k)
    worst = std::max(worst,
                     (traj.at(k).matrix() - composition_map(c, grid.time(k)).matrix()).max_abs());
  REQUIRE(worst < 1e-6);
}

TEST_CASE("integrate error paths") {
  // trace-destroying drift: a generator whose diagonal leaks trace
  const auto bad = [](double) {
    ComplexMatrix m(4);
    m(0, 0) = -0.5;  // shrinks the rho_00 population without moving it anywhere
    return Superoperator(m);
  };
  REQUIRE_THROWS_AS(integrate(bad, TimeGrid::uniform(1.0, 10)), Error);
  try {
    integrate(bad, TimeGrid::uniform(1.0, 10));
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NonTPDrift);
  }

  // rate blow-up strictly inside a step
  PauliRates r{Rate::blowup(1.0, 2.0), Rate::constant(0.0), Rate::constant(0.0)};
  const auto gen = [&](double t) { return pauli_generator(r, t); };
  try {
    integrate(gen, TimeGrid::uniform(3.0, 10));
    FAIL("expected RateBlowUpInsideStep");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::RateBlowUpInsideStep);
  }
}

TEST_CASE("tabulate validates the identity start") {
  PauliRates r{Rate::constant(0.5), Rate::constant(0.2), Rate::constant(0.0)};
  const MapTrajectory traj = pauli_trajectory(r, 2.0, 50);
  REQUIRE(traj.maps.size() == 51);
  REQUIRE((traj.at(0).matrix() - ComplexMatrix::identity(4)).max_abs() < 1e-15);

  const auto shifted = [&](double t) { return pauli_map(r, t + 0.5).map; };
  REQUIRE_THROWS_AS(tabulate(shifted, TimeGrid::uniform(1.0, 10)), Error);
}

TEST_CASE("propagator on an invertible trajectory") {
  PauliRates r{Rate::constant(1.0), Rate::tanh_shape(0.5), Rate::constant(0.3)};
  const MapTrajectory traj = pauli_trajectory(r, 3.0, 60);

  const PropagatorResult same = propagator(traj, 17, 17);
  REQUIRE((same.v.matrix() - ComplexMatrix::identity(4)).max_abs() == 0.0);

  // V_{t,s} composed with Lambda_s reproduces Lambda_t
  const PropagatorResult v = propagator(traj, 20, 45);
  REQUIRE(v.kernel_ok);
  REQUIRE(v.domain.rank == 4);
  REQUIRE(((v.v * traj.at(20)).matrix() - traj.at(45).matrix()).max_abs() < 1e-10);

  // composition law V_{t,s} V_{s,r} = V_{t,r}
  const PropagatorResult a = propagator(traj, 10, 30);
  const PropagatorResult b = propagator(traj, 30, 55);
  const PropagatorResult c = propagator(traj, 10, 55);
  REQUIRE(((b.v * a.v).matrix() - c.v.matrix()).max_abs() < 1e-8);

  // trace preservation on the domain, every consecutive interval
  for (int k = 0; k + 1 < traj.grid.size(); ++k) {
    const PropagatorResult step = propagator(traj, k, k + 1);
    for (const ComplexMatrix& img : step.domain.image_basis) {
      const ComplexMatrix out = step.v.apply(img);
      REQUIRE(std::abs(out.trace() - img.trace()) < 1e-8);
    }
  }
}

TEST_CASE("propagator across a Pauli blow-up instant") {
  // Gamma_1 diverges at t = 2, killing lambda_2 and lambda_3 there
  PauliRates r{Rate::blowup(1.0, 2.0), Rate::constant(0.0), Rate::constant(0.0)};
  const MapTrajectory traj = pauli_trajectory(r, 4.0, 200);
  const int k_star = traj.grid.index_of(2.0);

  REQUIRE(rank_profile(traj.at(k_star - 1)).rank == 4);
  REQUIRE(rank_profile(traj.at(k_star)).rank == 2);

  // across the drop: source still invertible
  const PropagatorResult across = propagator(traj, k_star - 1, k_star);
  REQUIRE(across.kernel_ok);
  REQUIRE(across.domain.rank == 4);

  // after the drop: pinv route, true propagator on the image
  const PropagatorResult after = propagator(traj, k_star, k_star + 40);
  REQUIRE(after.kernel_ok);
  REQUIRE(after.domain.rank == 2);
  REQUIRE((after.v.apply(ComplexMatrix::identity(2)) - ComplexMatrix::identity(2)).max_abs() <
          1e-9);
  REQUIRE((after.v.apply(pauli(1)) - pauli(1)).max_abs() < 1e-9);  // lambda_1 stays 1 here

  // V_{t,t} at the drop is the orthogonal projector onto the image
  const PropagatorResult vtt = propagator(traj, k_star, k_star);
  const Superoperator proj = bloch_scaling_map(1.0, 0.0, 0.0);
  REQUIRE((vtt.v.matrix() - proj.matrix()).max_abs() < 1e-9);
}

TEST_CASE("propagator raises NotDivisible when the kernel shrinks") {
  // sigma_2 direction is crushed at t = 1 and revives afterwards
  const auto map_at = [](double t) {
    const double f = (1.0 - t) * (1.0 - t);
    return bloch_scaling_map(1.0, f, 1.0);
  };
  const MapTrajectory traj = tabulate(map_at, TimeGrid::uniform(2.0, 20));
  const int k1 = traj.grid.index_of(1.0);
  REQUIRE(rank_profile(traj.at(k1)).rank == 3);

  const PropagatorResult bad = try_propagator(traj, k1, k1 + 2);
  REQUIRE_FALSE(bad.kernel_ok);
  REQUIRE(bad.kernel_leak > 1e-3);
  REQUIRE_THROWS_AS(propagator(traj, k1, k1 + 2), Error);
  try {
    propagator(traj, k1, k1 + 2);
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NotDivisible);
  }
}

TEST_CASE("limit projector at the Pauli blow-up is a CP projector onto the image") {
  PauliRates r{Rate::blowup(1.0, 2.0), Rate::constant(0.0), Rate::constant(0.0)};
  const auto map_at = [&](double t) { return pauli_map(r, t).map; };

  const LimitProjector lim = limit_projector(map_at, 2.0);
  REQUIRE(lim.extrapolation_residual < 1e-8);
  REQUIRE(lim.idempotency < 1e-8);
  REQUIRE(lim.cp.cp);
  REQUIRE((lim.projector.matrix() - bloch_scaling_map(1.0, 0.0, 0.0).matrix()).max_abs() < 1e-8);
}

TEST_CASE("classify: CP-divisible Pauli semigroup") {
  PauliRates r{Rate::constant(1.0), Rate::constant(1.0), Rate::constant(1.0)};
  const MapTrajectory traj = pauli_trajectory(r, 3.0, 120);
  const DivisibilityReport rep = classify(traj);
  REQUIRE(rep.verdict == Verdict::CPDivisible);
  REQUIRE(rep.intervals.size() == 120);
  for (const IntervalRecord& rec : rep.intervals) {
    REQUIRE(rec.kernel_ok);
    REQUIRE(rec.cp);
    REQUIRE(rec.p_div);
    REQUIRE(rec.min_choi_eig > -tol::cp);
  }
}

TEST_CASE("classify: eternal witness is P-divisible only") {
  PauliRates r{Rate::constant(1.0), Rate::constant(1.0), Rate::neg_tanh(1.0)};
  const MapTrajectory traj = pauli_trajectory(r, 5.0, 500);
  const DivisibilityReport rep = classify(traj);
  REQUIRE(rep.verdict == Verdict::PDivisibleOnly);

  double most_negative = 0.0;
  for (const IntervalRecord& rec : rep.intervals) {
    REQUIRE(rec.kernel_ok);
    REQUIRE(rec.p_div);
    most_negative = std::min(most_negative, rec.min_choi_eig);
  }
  REQUIRE(most_negative < -1e-6);
}

TEST_CASE("classify: composition model stays CP-divisible across t_star") {
  CompositionParams c;
  c.p = PFun::smoothstep(2.0);
  const MapTrajectory traj =
      tabulate([&](double t) { return composition_map(c, t); }, TimeGrid::uniform(4.0, 200));
  const DivisibilityReport rep = classify(traj);
  REQUIRE(rep.verdict == Verdict::CPDivisible);

  bool saw_rank2 = false;
  for (const IntervalRecord& rec : rep.intervals) {
    REQUIRE(rec.cp);
    if (rec.rank_s == 2) {
      saw_rank2 = true;
      REQUIRE(rec.au_margin >= -1e-9);
      REQUIRE(rec.note.find("extendability") != std::string::npos);
    }
  }
  REQUIRE(saw_rank2);

  const ImageProfile prof = image_profile(traj);
  REQUIRE_FALSE(prof.image_non_increasing);
  for (const ImageProfile::Point& pt : prof.points)
    REQUIRE((pt.dim == 4 || pt.dim == 2));
}

TEST_CASE("classify: decreasing p gives divisible-not-P") {
  CompositionParams c;
  c.p = PFun::bump(0.9, 1.0, 0.18);  // rises then falls back; never reaches 1
  const MapTrajectory traj =
      tabulate([&](double t) { return composition_map(c, t); }, TimeGrid::uniform(2.0, 80));
  const DivisibilityReport rep = classify(traj);
  REQUIRE(rep.verdict == Verdict::DivisibleNotP);

  bool saw_violation = false;
  for (const IntervalRecord& rec : rep.intervals) {
    REQUIRE(rec.kernel_ok);
    if (!rec.p_div) saw_violation = true;
  }
  REQUIRE(saw_violation);
}

TEST_CASE("classify: rank-1 collapse stays CP-divisible") {
  ManiscalcoParams m;
  m.omega = Rate::constant(0.0);
  m.gplus = Rate::blowup(1.0, 2.0);
  m.gminus = Rate::constant(0.5);
  m.g3 = Rate::constant(0.0);
  const MapTrajectory traj =
      tabulate([&](double t) { return maniscalco_map(m, t); }, TimeGrid::uniform(3.0, 150));

  const int k_star = traj.grid.index_of(2.0);
  REQUIRE(rank_profile(traj.at(k_star)).rank == 1);

  const DivisibilityReport rep = classify(traj);
  REQUIRE(rep.verdict == Verdict::CPDivisible);

  const ImageProfile prof = image_profile(traj);
  REQUIRE(prof.image_non_increasing);
  for (const ImageProfile::Point& pt : prof.points)
    REQUIRE((pt.dim == 4 || pt.dim == 1));
}

TEST_CASE("image profile of the Pauli blow-up is non-increasing") {
  PauliRates r{Rate::blowup(1.0, 2.0), Rate::constant(0.0), Rate::constant(0.0)};
  const MapTrajectory traj = pauli_trajectory(r, 4.0, 100);
  const ImageProfile prof = image_profile(traj);
  REQUIRE(prof.image_non_increasing);
  REQUIRE(prof.points.front().dim == 4);
  REQUIRE(prof.points.back().dim == 2);
}

TEST_CASE("classical chains: powers of a positive stochastic matrix divide") {
  ComplexMatrix m(3);
  const double entries[3][3] = {{0.6, 0.2, 0.1}, {0.3, 0.5, 0.3}, {0.1, 0.3, 0.6}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = entries[i][j];

  std::vector<ComplexMatrix> chain = {ComplexMatrix::identity(3)};
  for (int k = 0; k < 6; ++k) chain.push_back(chain.back() * m);

  const ClassicalReport rep = classical_pdiv(chain);
  REQUIRE(rep.p_div);
  REQUIRE(rep.contraction_ok);
  REQUIRE(rep.worst_entry > -1e-12);
}

TEST_CASE("classical chains: hand-built violation fails both verdicts") {
  ComplexMatrix t1(2);
  t1(0, 0) = 0.75;
  t1(0, 1) = 0.25;
  t1(1, 0) = 0.25;
  t1(1, 1) = 0.75;
  const std::vector<ComplexMatrix> chain = {ComplexMatrix::identity(2), t1,
                                            ComplexMatrix::identity(2)};
  const ClassicalReport rep = classical_pdiv(chain);
  REQUIRE_FALSE(rep.p_div);
  REQUIRE_FALSE(rep.contraction_ok);
  REQUIRE(rep.worst_entry < -0.4);      // S = T1^{-1} has entries -1/2
  REQUIRE(rep.worst_increase > 0.4);    // distinguishability is restored
  REQUIRE(rep.first_bad_step == 1);
}

TEST_CASE("classical chains: input validation") {
  ComplexMatrix bad(2);
  bad(0, 0) = 1.1;
  bad(0, 1) = 0.0;
  bad(1, 0) = -0.1;
  bad(1, 1) = 1.0;
  REQUIRE_THROWS_AS(classical_pdiv({ComplexMatrix::identity(2), bad}), Error);

  ComplexMatrix wrong_sum(2);
  wrong_sum(0, 0) = 0.6;
  wrong_sum(0, 1) = 0.3;
  wrong_sum(1, 0) = 0.6;
  wrong_sum(1, 1) = 0.3;
  REQUIRE_THROWS_AS(classical_pdiv({ComplexMatrix::identity(2), wrong_sum}), Error);

  REQUIRE_THROWS_AS(classical_pdiv({ComplexMatrix::identity(4), ComplexMatrix::identity(4)}),
                    Error);
  REQUIRE_THROWS_AS(classical_pdiv({ComplexMatrix::identity(3)}), Error);
}

TEST_CASE("classical chains: agreement on random power chains") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int rep_i = 0; rep_i < 20; ++rep_i) {
    ComplexMatrix m(3);
    for (int j = 0; j < 3; ++j) {
      double col = 0.0;
      std::array<double, 3> raw;
      for (int i = 0; i < 3; ++i) {
        raw[i] = u(rng);
        col += raw[i];
      }
      for (int i = 0; i < 3; ++i) m(i, j) = raw[i] / col;
    }
    std::vector<ComplexMatrix> chain = {ComplexMatrix::identity(3)};
    for (int k = 0; k < 4; ++k) chain.push_back(chain.back() * m);
    const ClassicalReport r = classical_pdiv(chain);
    REQUIRE(r.p_div == r.contraction_ok);
    REQUIRE(r.p_div);
  }
}

#include <gtest/gtest.h>

#include <cmath>

#include "mlstirap/analysis.hpp"
#include "mlstirap/dynamics.hpp"
#include "mlstirap/spectral.hpp"
#include "oracles.hpp"

using namespace mlstirap;

namespace {

MultiLambdaSystem sys(std::vector<double> a, std::vector<double> b, std::vector<double> d) {
  return MultiLambdaSystem::create(std::move(a), std::move(b), std::move(d));
}

int numeric_zero_count(const MultiLambdaSystem& s) {
  const RealMatrix h = build_hamiltonian(s, PulsePair::gaussian(1, 30), 0.0);
  const Eigensystem es = eigendecompose(h);
  int count = 0;
  for (double x : es.eigenvalues)
    if (std::abs(x) < 1e-8 * h.norm()) ++count;
  return count;
}

}  // namespace

TEST(Classify, Fig5Solid) {
  const auto c = classify(sys({1, 2}, {1, 0.5}, {0.5, 1.5}));
  EXPECT_EQ(c.regime, Regime::OffResonant);
  EXPECT_EQ(c.at_state, AtState::ExistsGeneral);
  EXPECT_EQ(c.reason, Reason::AtConditionHolds);
  EXPECT_EQ(c.zero_eigenvalue, ZeroEigenvalue::None);
  EXPECT_NEAR(c.sums->s_a2 * c.sums->s_b2, 91.0 / 9, 1e-13);
  EXPECT_NEAR(c.sums->gram(), 3.0, 1e-13);
}

TEST(Classify, Fig5Dashed) {
  const auto c = classify(sys({1, 2}, {1, 0.5}, {-0.5, 0.5}));
  EXPECT_EQ(c.at_state, AtState::NotExists);
  EXPECT_EQ(c.reason, Reason::AtConditionViolated);
  EXPECT_DOUBLE_EQ(c.sums->s_a2, 6.0);
  EXPECT_DOUBLE_EQ(c.sums->s_b2, -1.5);
}

TEST(Classify, ProportionalIsDarkState) {
  for (const auto& d : {std::vector<double>{0.3, 2}, {-1, -0.2}, {1.5, -4}}) {
    const auto c = classify(sys({1, 1.7}, {1, 1.7}, d));
    EXPECT_EQ(c.at_state, AtState::ExistsDarkState);
    EXPECT_EQ(c.zero_eigenvalue, ZeroEigenvalue::Simple);
  }
}

TEST(Classify, VanishingSums) {
  const auto a = classify(sys({1, 2}, {1, 0.5}, {-0.2, 0.8}));
  EXPECT_EQ(a.at_state, AtState::NotExists);
  EXPECT_EQ(a.reason, Reason::VanishingSumA2);
  const auto b = classify(sys({1, 2}, {1, 0.5}, {1, -0.25}));
  EXPECT_EQ(b.reason, Reason::VanishingSumB2);
  const auto dbl = classify(sys({1, 1, 1}, {1, 1, 1}, {-0.5, 1, 1}));
  EXPECT_EQ(dbl.zero_eigenvalue, ZeroEigenvalue::Double);
  EXPECT_EQ(dbl.at_state, AtState::NotExists);
  EXPECT_EQ(dbl.reason, Reason::DoubleZeroEigenvalue);
}

TEST(Classify, MarginalNearBoundary) {
  const auto c = classify(sys({1, 2}, {1, 0.5}, {-0.2 * (1 + 1e-12), 0.8}));
  EXPECT_EQ(c.reason, Reason::VanishingSumA2);
  const auto m = classify(sys({1, 2}, {1, 0.5}, {-0.2 - 3.4e-10, 0.8 - 3.4e-10}));
  EXPECT_EQ(m.reason, Reason::Marginal);
}

TEST(Classify, SingleResonanceAlwaysExists) {
  const auto general = classify(sys({1, 2}, {1, 0.5}, {0, 1}));
  EXPECT_EQ(general.regime, Regime::SingleResonant);
  EXPECT_EQ(general.at_state, AtState::ExistsGeneral);
  EXPECT_EQ(general.reason, Reason::SingleResonance);
  const auto dark = classify(sys({1, 0.5}, {1, 0.5}, {0, 1}));
  EXPECT_EQ(dark.at_state, AtState::ExistsDarkState);
  EXPECT_EQ(dark.zero_eigenvalue, ZeroEigenvalue::Simple);
  oracle::RandomSystems rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto base = rng.system(rng.integer(1, 5), 0.1, 3, 0.1, 3);
    std::vector<double> d(base.detunings().begin(), base.detunings().end());
    d[static_cast<std::size_t>(rng.integer(0, static_cast<int>(d.size()) - 1))] = 0.0;
    EXPECT_TRUE(classify(base.with_detunings(d)).at_exists());
  }
}

TEST(Classify, DegenerateRegime) {
  const auto prop = classify(sys({1, 2, 0.5}, {1, 2, 0.7}, {0, 0, 1}));
  EXPECT_EQ(prop.regime, Regime::DegenerateResonant);
  EXPECT_EQ(prop.zero_eigenvalue, ZeroEigenvalue::Simple);
  EXPECT_EQ(prop.at_state, AtState::ExistsGeneral);
  EXPECT_EQ(prop.reason, Reason::DegenerateProportional);

  const auto notprop = classify(sys({1, 2, 0.5}, {1, 1, 0.7}, {0, 0, 1}));
  EXPECT_EQ(notprop.zero_eigenvalue, ZeroEigenvalue::None);
  EXPECT_EQ(notprop.at_state, AtState::NotExists);
  EXPECT_EQ(notprop.reason, Reason::DegenerateNotProportional);

  const auto three = classify(sys({1, 2, 0.5}, {1, 1, 0.7}, {0, 0, 0}));
  EXPECT_EQ(three.zero_eigenvalue, ZeroEigenvalue::Structural);
  EXPECT_EQ(three.at_state, AtState::NotExists);

  const auto all_prop = classify(sys({1, 2, 3}, {1, 2, 3}, {0, 0, 0}));
  EXPECT_EQ(all_prop.at_state, AtState::ExistsDarkState);
}

TEST(Classify, OffResonantExistenceMatchesSumProduct) {
  oracle::RandomSystems rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = rng.system(rng.integer(1, 5), 0.1, 3, 0.05, 3, trial % 4 == 0);
    const auto c = classify(s);
    const SSums sums = s_sums(s);
    if (c.reason == Reason::Marginal) continue;
    EXPECT_EQ(c.at_exists(), sums.s_a2 * sums.s_b2 > 0 && sums.s_a2 != 0 && sums.s_b2 != 0);
    EXPECT_EQ(c.at_state == AtState::ExistsDarkState, c.at_exists() && couplings_proportional(s));
  }
}

TEST(Classify, ZeroEigenvalueVerdictMatchesEigensolver) {
  oracle::RandomSystems rng(43);
  std::vector<MultiLambdaSystem> cases{
      sys({1, 1.2, 0.8}, {1, 0.8, 1.2}, {-1.0 / 3, 1.0 / 6, 7.0 / 6}),
      sys({1, 1, 1}, {1, 1, 1}, {-0.5, 1, 1}),
      sys({1, 2, 0.5}, {1, 2, 0.7}, {0, 0, 1}),
      sys({1, 2, 0.5}, {1, 1, 0.7}, {0, 0, 0}),
      sys({1, 2, 0.5}, {1, 1, 0.7}, {0, 0, 2}),
  };
  for (int trial = 0; trial < 200; ++trial) {
    auto s = rng.system(rng.integer(1, 5), 0.1, 3, 1e-3, 3, trial % 4 == 0);
    if (trial % 5 == 1) {
      std::vector<double> d(s.detunings().begin(), s.detunings().end());
      d[0] = 0.0;
      s = s.with_detunings(d);
    }
    cases.push_back(s);
  }
  for (const auto& s : cases) {
    const auto c = classify(s);
    const int zeros = numeric_zero_count(s);
    EXPECT_EQ(c.zero_eigenvalue != ZeroEigenvalue::None, zeros >= 1);
    if (c.zero_eigenvalue == ZeroEigenvalue::Double) EXPECT_GE(zeros, 2);
  }
}

TEST(Windows, Fig7Boundaries) {
  const auto b = at_window_boundaries(sys({1, 2}, {1, 0.5}, {0, 1}), -2, 1);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_NEAR(b[0].shift, -0.8, 1e-12);
  EXPECT_EQ(b[0].kind, SumKind::B2);
  EXPECT_NEAR(b[1].shift, -0.2, 1e-12);
  EXPECT_EQ(b[1].kind, SumKind::A2);
  const auto w = no_at_windows(sys({1, 2}, {1, 0.5}, {0, 1}), -2, 1);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NEAR(w[0].first, -0.8, 1e-12);
  EXPECT_NEAR(w[0].second, -0.2, 1e-12);
}

TEST(Windows, ProportionalRootsCoincide) {
  const auto base = sys({1, 1.5, 0.7}, {1, 1.5, 0.7}, {0, 1, 2.5});
  const auto b = at_window_boundaries(base, -4, 2);
  ASSERT_EQ(b.size() % 2, 0u);
  for (std::size_t j = 0; j < b.size(); j += 2) EXPECT_EQ(b[j].shift, b[j + 1].shift);
  EXPECT_TRUE(no_at_windows(base, -4, 2).empty());
}

TEST(Windows, RootsAreSignChanges) {
  oracle::RandomSystems rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const auto base = rng.system(rng.integer(2, 5), 0.2, 2, 0.1, 3);
    for (const auto& r : at_window_boundaries(base, -4, 4)) {
      double scale = 0.0;
      for (std::size_t k = 0; k < base.size(); ++k) {
        const double c = r.kind == SumKind::A2 ? base.alpha(k) : base.beta(k);
        scale += c * c / std::abs(base.detuning(k) + r.shift);
      }
      EXPECT_LT(std::abs(shifted_sum(base, r.kind, r.shift)), 1e-12 * scale);
      const double h = 1e-7;
      EXPECT_GT(shifted_sum(base, r.kind, r.shift - h), 0.0);
      EXPECT_LT(shifted_sum(base, r.kind, r.shift + h), 0.0);
    }
  }
}

TEST(Windows, EquidistantCombHasAtMostNMinusOneWindows) {
  oracle::RandomSystems rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a{1}, b{1};
    for (int k = 1; k < 5; ++k) {
      a.push_back(rng.uniform(0.2, 2));
      b.push_back(rng.uniform(0.2, 2));
    }
    const auto base = sys(a, b, {0, 1, 2, 3, 4});
    const auto w = no_at_windows(base, -8, 4);
    EXPECT_LE(w.size(), 4u);
    for (const auto& [lo, hi] : w) {
      EXPECT_GT(lo, -4.0);
      EXPECT_LT(hi, 0.0);
    }
  }
}

TEST(Windows, EmptyWhenNoRoots) {
  EXPECT_TRUE(at_window_boundaries(sys({1, 2}, {1, 0.5}, {0, 1}), 0.5, 3).empty());
}

TEST(Reduce, MuValues) {
  const auto r = reduce_degenerate(sys({1, 0.5, 2}, {1, 0.5, 3}, {0, 0, 1}), std::vector<std::size_t>{0, 1});
  EXPECT_NEAR(r.mu, std::sqrt(1.25), 1e-15);
  EXPECT_EQ(r.system.size(), 2u);
  EXPECT_DOUBLE_EQ(r.system.alpha(0), std::sqrt(1.25));
  EXPECT_EQ(r.system.detuning(1), 1.0);

  const auto single = reduce_degenerate(sys({1, 2}, {1, 3}, {0, 1}), std::vector<std::size_t>{0});
  EXPECT_EQ(single.mu, 1.0);
  EXPECT_EQ(single.system.alpha(1), 2.0);

  const auto four = reduce_degenerate(sys({1, 1, 1, 1}, {1, 1, 1, 1}, {0, 0, 0, 0}),
                                      std::vector<std::size_t>{0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(four.mu, 2.0);
  EXPECT_EQ(four.system.size(), 1u);
}

TEST(Reduce, Errors) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ValidationError;
  };
  EXPECT_EQ(code([] { reduce_degenerate(sys({1, 2}, {1, 1}, {0, 0}), std::vector<std::size_t>{0, 1}); }),
            ErrorCode::NotProportional);
  EXPECT_EQ(code([] { reduce_degenerate(sys({1, 2}, {1, 2}, {0, 1}), std::vector<std::size_t>{0, 1}); }),
            ErrorCode::InvalidArgument);
}

TEST(Reduce, PropagationIsExact) {
  const auto original = sys({1, 0.6, 1.5, 0.8}, {1, 0.6, 1.5, 1.3}, {0, 0, 0, 0.7});
  const auto reduced = reduce_degenerate(original, resonant_indices(original));
  const auto p = PulsePair::gaussian(1, 20);
  const double a = propagate(original, p, {}).final_pf;
  const double b = propagate(reduced.system, p, {}).final_pf;
  EXPECT_LT(std::abs(a - b), 1e-6);
}

TEST(Eliminate, TwoStateForms) {
  const auto s = sys({1, 2}, {1, 0.5}, {0.5, 1.5});
  const RealMatrix m = adiabatic_eliminate(s, 1.0, 1.0);
  EXPECT_NEAR(m(0, 0), 14.0 / 3, 1e-14);
  EXPECT_NEAR(m(0, 1), 8.0 / 3, 1e-14);
  EXPECT_NEAR(m(1, 0), 8.0 / 3, 1e-14);
  EXPECT_NEAR(m(1, 1), 13.0 / 6, 1e-14);
  const RealMatrix off = adiabatic_eliminate(s, 0.0, 0.7);
  EXPECT_EQ(off(0, 0), 0.0);
  EXPECT_EQ(off(0, 1), 0.0);
  EXPECT_NEAR(off(1, 1), 0.49 * 13.0 / 6, 1e-14);
  const auto zero_ab = sys({1, 0.6, 1.2}, {1, 1, 0.6}, {-1, 1, 1.8});
  EXPECT_NEAR(effective_two_state(zero_ab).coupling(0.8, 0.9), 0.0, 1e-15);
}

TEST(Eliminate, ThreeStateForm) {
  const auto s = sys({1, 2, 0.5}, {1, 0.5, 2}, {1, 0, 4});
  const RealMatrix m = adiabatic_eliminate(s, 0.3, 0.6);
  const SSums ex = s_sums(s, 1);
  EXPECT_DOUBLE_EQ(m(0, 0), 0.09 * ex.s_a2);
  EXPECT_DOUBLE_EQ(m(2, 2), 0.36 * ex.s_b2);
  EXPECT_DOUBLE_EQ(m(0, 2), 0.18 * ex.s_ab);
  EXPECT_DOUBLE_EQ(m(0, 1), 0.6);
  EXPECT_DOUBLE_EQ(m(1, 2), 0.3);
  EXPECT_EQ(m(1, 1), 0.0);
}

TEST(Eliminate, ApproximatesVanishingEigenvaluesForLargeDetunings) {
  const auto s = sys({1, 2}, {1, 0.5}, {50, 80});
  const RealMatrix full = build_hamiltonian(s, 0.7, 0.4);
  const Eigensystem ef = eigendecompose(full);
  const Eigensystem ee = eigendecompose(-adiabatic_eliminate(s, 0.7, 0.4));
  // The two smallest eigenvalues of H sit near the eliminated ones.
  EXPECT_NEAR(ef.eigenvalues(0), ee.eigenvalues(0), 1e-3);
  EXPECT_NEAR(ef.eigenvalues(1), ee.eigenvalues(1), 1e-3);
}

TEST(Eliminate, WrongResonanceCount) {
  try {
    adiabatic_eliminate(sys({1, 2}, {1, 1}, {0, 0}), 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongResonanceCount);
  }
  EXPECT_THROW(effective_two_state(sys({1}, {1}, {0})), Error);
  EXPECT_THROW(effective_three_state(sys({1}, {1}, {2}), 1, 1), Error);
}

TEST(Lz, Fig5SolidValues) {
  const auto lz = lz_estimate(sys({1, 2}, {1, 0.5}, {0.5, 1.5}), PulsePair::gaussian(1, 20));
  EXPECT_NEAR(lz.xi, 0.630, 5e-4);
  EXPECT_NEAR(lz.t_c / 20, -0.192, 5e-4);
  EXPECT_NEAR(lz.pf_estimate, 1 - std::exp(-M_PI * 400 * lz.xi), 1e-15);
}

TEST(Lz, SymmetricSumsCrossAtCentre) {
  const auto lz = lz_estimate(sys({1, 2}, {1, 2}, {0.5, 1.5}), PulsePair::gaussian(1, 20));
  EXPECT_EQ(lz.t_c, 0.0);
}

TEST(Lz, VanishingMixedSum) {
  const auto lz = lz_estimate(sys({1, 0.6, 1.2}, {1, 1, 0.6}, {-1, 1, 1.8}), PulsePair::gaussian(1, 20));
  EXPECT_EQ(lz.xi, 0.0);
  EXPECT_EQ(lz.pf_estimate, 0.0);
}

TEST(Lz, NoCrossing) {
  try {
    lz_estimate(sys({1, 2}, {1, 0.5}, {-0.5, 0.5}), PulsePair::gaussian(1, 20));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCrossing);
  }
  EXPECT_THROW(lz_estimate(sys({1, 2}, {1, 0.5}, {0, 0.5}), PulsePair::gaussian(1, 20)), Error);
}

TEST(Lz, LargerXiTransfersFaster) {
  const auto p = PulsePair::gaussian(1, 20);
  double prev_xi = -1, prev_pf = -1;
  for (const auto& d : {std::vector<double>{-1, 1, 1.8}, {-1, -1.5, 2}, {-0.5, -2, -0.25}}) {
    const auto s = sys({1, 0.6, 1.2}, {1, 1, 0.6}, d);
    const double xi = lz_estimate(s, p).xi;
    const double pf = propagate(s, p, {}).final_pf;
    EXPECT_GT(xi, prev_xi);
    EXPECT_GT(pf, prev_pf);
    prev_xi = xi;
    prev_pf = pf;
  }
}

// Classification agrees with the adiabatic-limit outcome on random systems
// away from the window boundaries.
TEST(Consistency, ClassificationPredictsTransfer) {
  oracle::RandomSystems rng(46);
  const auto p = PulsePair::gaussian(1, 80);
  int checked = 0;
  while (checked < 50) {
    const auto s = rng.system(rng.integer(1, 4), 0.5, 2, 0.3, 3);
    const SSums sums = s_sums(s), scale = s_sum_scales(s);
    if (std::abs(sums.s_a2) < 0.05 || std::abs(sums.s_b2) < 0.05) continue;
    if (std::abs(sums.s_a2) < 0.15 * scale.s_a2 || std::abs(sums.s_b2) < 0.15 * scale.s_b2) continue;
    ++checked;
    const double pf = propagate(s, p, {}).final_pf;
    if (classify(s).at_exists())
      EXPECT_GT(pf, 0.8);
    else
      EXPECT_LT(pf, 0.2);
  }
}

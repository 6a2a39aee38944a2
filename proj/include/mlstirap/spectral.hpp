#pragma once

// Instantaneous spectrum of the real symmetric Hamiltonian: a cyclic Jacobi
// eigensolver, continuity-based labelling of eigenpairs along a time grid,
// and the leading-order early/late asymptotics of the vanishing eigenvalues.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mlstirap/error.hpp"
#include "mlstirap/model.hpp"

namespace mlstirap {

struct Eigensystem {
  RealVector eigenvalues;   // ascending
  RealMatrix eigenvectors;  // column m pairs with eigenvalues(m)
};

/// Cyclic Jacobi diagonalisation. Sweeps stop once the off-diagonal
/// Frobenius norm drops below 1e-13 of the full Frobenius norm.
inline Eigensystem eigendecompose(const RealMatrix& h) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n) throw Error(ErrorCode::NonSymmetricInput, "matrix is not square");

  const double scale = h.cwiseAbs().maxCoeff();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = r + 1; c < n; ++c)
      if (std::abs(h(r, c) - h(c, r)) > 1e-12 * scale)
        throw Error(ErrorCode::NonSymmetricInput,
                    "element (" + std::to_string(r) + "," + std::to_string(c) + ") is not mirrored");

  RealMatrix a = 0.5 * (h + h.transpose());
  RealMatrix v = RealMatrix::Identity(n, n);
  const double frob = a.norm();
  const double threshold = 1e-13 * frob;

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = r + 1; c < n; ++c) s += 2.0 * a(r, c) * a(r, c);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && frob > 0.0 && off_norm() >= threshold; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_norm() >= threshold)
    throw Error(ErrorCode::ToleranceNotMet, "Jacobi sweeps did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  Eigensystem out{RealVector(n), RealMatrix(n, n)};
  for (Eigen::Index m = 0; m < n; ++m) {
    out.eigenvalues(m) = a(order[static_cast<std::size_t>(m)], order[static_cast<std::size_t>(m)]);
    out.eigenvectors.col(m) = v.col(order[static_cast<std::size_t>(m)]);
  }
  return out;
}

/// Eigenpairs at one instant. track_ids[m] is the persistent label of the
/// pair stored in column m.
struct SpectralSnapshot {
  double t = 0.0;
  RealVector eigenvalues;
  RealMatrix eigenvectors;
  std::vector<int> track_ids;

  Eigen::Index column_of(int track_id) const {
    const auto it = std::find(track_ids.begin(), track_ids.end(), track_id);
    if (it == track_ids.end())
      throw Error(ErrorCode::InvalidArgument, "unknown track id " + std::to_string(track_id));
    return static_cast<Eigen::Index>(it - track_ids.begin());
  }
  double eigenvalue_of(int track_id) const { return eigenvalues(column_of(track_id)); }
  RealVector eigenvector_of(int track_id) const { return eigenvectors.col(column_of(track_id)); }
};

/// Track whose eigenvector has the largest weight on basis state `state`
/// (0 = i, N+1 = f).
inline int track_dominated_by(const SpectralSnapshot& snap, Eigen::Index state) {
  Eigen::Index best = 0;
  snap.eigenvectors.row(state).cwiseAbs().maxCoeff(&best);
  return snap.track_ids[static_cast<std::size_t>(best)];
}

/// Basis state carrying the largest weight in the eigenvector of a track.
inline Eigen::Index dominant_state(const SpectralSnapshot& snap, int track_id) {
  Eigen::Index best = 0;
  snap.eigenvectors.col(snap.column_of(track_id)).cwiseAbs().maxCoeff(&best);
  return best;
}

namespace detail {

inline void fix_initial_gauge(RealMatrix& vectors) {
  for (Eigen::Index m = 0; m < vectors.cols(); ++m) {
    Eigen::Index r = 0;
    vectors.col(m).cwiseAbs().maxCoeff(&r);
    if (vectors(r, m) < 0.0) vectors.col(m) *= -1.0;
  }
}

}  // namespace detail

/// Diagonalises H(t) on every grid point and labels eigenpairs by greedy
/// maximal |overlap| with the previous snapshot. Eigenvector signs follow a
/// continuous gauge (positive overlap with the predecessor). Throws
/// AmbiguousTracking when any matched overlap falls below 0.5.
inline std::vector<SpectralSnapshot> track_spectrum(const MultiLambdaSystem& sys,
                                                    const PulsePair& pulses,
                                                    std::span<const double> time_grid) {
  for (std::size_t j = 1; j < time_grid.size(); ++j)
    if (!(time_grid[j] > time_grid[j - 1]))
      throw Error(ErrorCode::InvalidArgument, "time grid must be strictly increasing");

  std::vector<SpectralSnapshot> out;
  out.reserve(time_grid.size());
  const auto n = static_cast<Eigen::Index>(sys.dimension());

  for (const double t : time_grid) {
    Eigensystem es = eigendecompose(build_hamiltonian(sys, pulses, t));
    SpectralSnapshot snap{t, std::move(es.eigenvalues), std::move(es.eigenvectors),
                          std::vector<int>(static_cast<std::size_t>(n), -1)};
    if (out.empty()) {
      detail::fix_initial_gauge(snap.eigenvectors);
      std::iota(snap.track_ids.begin(), snap.track_ids.end(), 0);
      out.push_back(std::move(snap));
      continue;
    }

    const SpectralSnapshot& prev = out.back();
    const RealMatrix overlap = prev.eigenvectors.transpose() * snap.eigenvectors;
    std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
    cand.reserve(static_cast<std::size_t>(n * n));
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) cand.emplace_back(std::abs(overlap(r, c)), r, c);
    std::sort(cand.begin(), cand.end(),
              [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });

    std::vector<bool> row_used(static_cast<std::size_t>(n), false);
    std::vector<bool> col_used(static_cast<std::size_t>(n), false);
    Eigen::Index assigned = 0;
    for (const auto& [mag, r, c] : cand) {
      if (row_used[static_cast<std::size_t>(r)] || col_used[static_cast<std::size_t>(c)]) continue;
      if (mag < 0.5)
        throw Error(ErrorCode::AmbiguousTracking,
                    "best eigenvector overlap " + std::to_string(mag) + " at t=" +
                        std::to_string(t) + "; refine the time grid");
      row_used[static_cast<std::size_t>(r)] = true;
      col_used[static_cast<std::size_t>(c)] = true;
      snap.track_ids[static_cast<std::size_t>(c)] = prev.track_ids[static_cast<std::size_t>(r)];
      if (overlap(r, c) < 0.0) snap.eigenvectors.col(c) *= -1.0;
      if (++assigned == n) break;
    }
    out.push_back(std::move(snap));
  }
  return out;
}

enum class AsymptoticSide { Early, Late };

struct AsymptoticEigenvalues {
  AsymptoticSide side = AsymptoticSide::Early;
  double small = 0.0;
  std::vector<double> large;
};

/// Whether the leading-order asymptotics are in their documented validity
/// regime: pump/Stokes below `max_ratio` early, Stokes/pump below it late.
inline bool asymptotic_regime_valid(double pump, double stokes, AsymptoticSide side,
                                    double max_ratio = 0.1) {
  if (side == AsymptoticSide::Early) return stokes > 0.0 && pump / stokes < max_ratio;
  return pump > 0.0 && stokes / pump < max_ratio;
}

/// Leading-order small and large vanishing eigenvalues with all detunings
/// nonzero. Early: small = -G/S_b2 P^2, large = -S_b2 S^2; late:
/// small = -G/S_a2 S^2, large = -S_a2 P^2, where G = S_a2 S_b2 - S_ab^2.
inline AsymptoticEigenvalues asymptotic_eigenvalues_offres(const MultiLambdaSystem& sys,
                                                           double pump, double stokes,
                                                           AsymptoticSide side) {
  const SSums s = s_sums(sys);
  AsymptoticEigenvalues out;
  out.side = side;
  if (side == AsymptoticSide::Early) {
    if (s.s_b2 == 0.0)
      throw Error(ErrorCode::DegenerateSums, "S_b2 vanishes: no isolated early small eigenvalue");
    out.small = -s.gram() / s.s_b2 * pump * pump;
    out.large = {-s.s_b2 * stokes * stokes};
  } else {
    if (s.s_a2 == 0.0)
      throw Error(ErrorCode::DegenerateSums, "S_a2 vanishes: no isolated late small eigenvalue");
    out.small = -s.gram() / s.s_a2 * stokes * stokes;
    out.large = {-s.s_a2 * pump * pump};
  }
  return out;
}

/// Leading-order vanishing eigenvalues when state n alone is resonant: one
/// small eigenvalue quadratic in the weaker field and a symmetric pair
/// linear in the stronger one.
inline AsymptoticEigenvalues asymptotic_eigenvalues_res(const MultiLambdaSystem& sys,
                                                        std::size_t n, double pump, double stokes,
                                                        AsymptoticSide side) {
  const auto res = resonant_indices(sys);
  if (res.size() != 1 || res[0] != n)
    throw Error(ErrorCode::NotSingleResonance,
                "state " + std::to_string(n + 1) + " must be the only resonant state");
  const double bracket = resonant_bracket(sys, n);
  const double a = sys.alpha(n), b = sys.beta(n);
  AsymptoticEigenvalues out;
  out.side = side;
  if (side == AsymptoticSide::Early) {
    out.small = -bracket * pump * pump / (b * b);
    out.large = {-b * stokes, b * stokes};
  } else {
    out.small = -bracket * stokes * stokes / (a * a);
    out.large = {-a * pump, a * pump};
  }
  return out;
}

}  // namespace mlstirap

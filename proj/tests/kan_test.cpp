#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "pikan/error.hpp"
#include "pikan/kan.hpp"

namespace pikan::kan {
namespace {

// Textbook Cox-de Boor on an explicit knot vector, right-closed at the last
// knot so that the clamped end evaluates to the final basis function.
double cox_de_boor(const std::vector<double>& t, int i, int k, double x) {
  if (k == 0) {
    const double hi_end = t.back();
    if (x == hi_end) return (t[i] < x && t[i + 1] == x) ? 1.0 : 0.0;
    return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  }
  double a = 0.0, b = 0.0;
  if (t[i + k] != t[i]) a = (x - t[i]) / (t[i + k] - t[i]) * cox_de_boor(t, i, k - 1, x);
  if (t[i + k + 1] != t[i + 1]) b = (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * cox_de_boor(t, i + 1, k - 1, x);
  return a + b;
}

std::vector<double> expected_knots(int k, int g, double lo, double hi) {
  std::vector<double> t;
  for (int i = 0; i < k; ++i) t.push_back(lo);
  for (int i = 0; i <= g; ++i) t.push_back(lo + (hi - lo) * i / g);
  for (int i = 0; i < k; ++i) t.push_back(hi);
  return t;
}

// Greville abscissae: coefficients that make a clamped spline reproduce x.
std::vector<double> identity_coefficients(const SplineGrid& grid) {
  const int k = grid.order;
  std::vector<double> c(grid.basis_size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += grid.knots[i + j];
    c[i] = s / k;
  }
  return c;
}

// Dense least squares through the normal equations.
std::vector<double> least_squares(const std::vector<std::vector<double>>& a, const std::vector<double>& y) {
  const std::size_t n = a[0].size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m[i][j] += a[r][i] * a[r][j];
      m[i][n] += a[r][i] * y[r];
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

TEST(SplineGridTest, ClampedKnotVector) {
  for (int k = 0; k <= 4; ++k) {
    for (int g = 1; g <= 7; ++g) {
      const SplineGrid grid = SplineGrid::clamped(k, g, -2.0, 2.0);
      ASSERT_EQ(grid.knots.size(), static_cast<std::size_t>(g + 2 * k + 1));
      const auto want = expected_knots(k, g, -2.0, 2.0);
      for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(grid.knots[i], want[i], 1e-15);
      EXPECT_EQ(grid.basis_size(), static_cast<std::size_t>(g + k));
    }
  }
  EXPECT_THROW(SplineGrid::clamped(3, 5, 1.0, 1.0), ValidationError);
}

TEST(BasisTest, PartitionOfUnity) {
  for (int k = 1; k <= 4; ++k) {
    const SplineGrid grid = SplineGrid::clamped(k, 6, -2.0, 2.0);
    for (int s = 0; s <= 400; ++s) {
      const double x = -2.0 + 4.0 * s / 400.0;
      const auto b = bspline_basis(grid, x);
      double sum = 0.0;
      for (double v : b) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12) << "k=" << k << " x=" << x;
    }
  }
}

TEST(BasisTest, DegreeZeroIsIndicator) {
  const SplineGrid grid = SplineGrid::clamped(0, 4, 0.0, 4.0);
  const auto b = bspline_basis(grid, 2.0);
  EXPECT_EQ(b, (std::vector<double>{0, 0, 1, 0}));
}

TEST(BasisTest, MatchesScalarCoxDeBoor) {
  const SplineGrid grid = SplineGrid::clamped(3, 5, -2.0, 2.0);
  const auto t = expected_knots(3, 5, -2.0, 2.0);
  for (int i = 0; i < 5; ++i) {
    const double mid = -2.0 + 0.8 * i + 0.4;
    for (double x : {mid, mid - 0.13, -2.0, 2.0}) {
      const auto b = bspline_basis(grid, x);
      for (std::size_t j = 0; j < b.size(); ++j) {
        EXPECT_NEAR(b[j], cox_de_boor(t, static_cast<int>(j), 3, x), 1e-14) << "x=" << x << " j=" << j;
      }
    }
  }
}

TEST(BasisTest, InputsClampedToGrid) {
  const SplineGrid grid = SplineGrid::clamped(3, 5, -2.0, 2.0);
  EXPECT_EQ(bspline_basis(grid, 7.5), bspline_basis(grid, 2.0));
  EXPECT_EQ(bspline_basis(grid, -9.0), bspline_basis(grid, -2.0));
  const BasisWindow w = basis_window(grid, 3.0);
  for (int j = 0; j < w.count; ++j) EXPECT_EQ(w.derivative[j], 0.0);
}

TEST(EdgeTest, ZeroAndBaseOnly) {
  const SplineGrid grid = SplineGrid::clamped(3, 5, -2.0, 2.0);
  KanEdge zero{std::vector<double>(grid.basis_size(), 0.0), 0.0, 1.0};
  EXPECT_EQ(edge_eval(zero, grid, 0.7), 0.0);
  KanEdge base{std::vector<double>(grid.basis_size(), 0.3), 1.0, 0.0};
  for (double x : {-3.0, -0.5, 0.0, 1.2}) EXPECT_DOUBLE_EQ(edge_eval(base, grid, x), silu(x));
}

TEST(EdgeTest, LeastSquaresFitOfSquare) {
  const SplineGrid grid = SplineGrid::clamped(3, 5, -2.0, 2.0);
  std::vector<std::vector<double>> a;
  std::vector<double> y;
  for (int s = 0; s <= 80; ++s) {
    const double x = -2.0 + 4.0 * s / 80.0;
    a.push_back(bspline_basis(grid, x));
    y.push_back(x * x);
  }
  const KanEdge edge{least_squares(a, y), 0.0, 1.0};
  for (int i = 0; i < 5; ++i) {
    const double mid = -2.0 + 0.8 * i + 0.4;
    EXPECT_NEAR(edge_eval(edge, grid, mid, false), mid * mid, 1e-9);
  }
}

TEST(NetworkTest, ZeroNetworkGivesZeros) {
  const KanNetwork net({3, 2});
  const auto out = net.forward(std::vector<double>{0.3, -1.0, 1.5});
  EXPECT_EQ(out, (std::vector<double>{0.0, 0.0}));
}

TEST(NetworkTest, IdentitySplineForwardAndGradient) {
  KanOptions opts;
  opts.use_base = false;
  KanNetwork net({1, 1}, opts);
  const SplineGrid& grid = net.layers()[0].grid();
  net.layers()[0].set_edge(0, 0, KanEdge{identity_coefficients(grid), 0.0, 1.0});
  for (double x : {-1.7, -0.3, 0.0, 0.9, 1.8}) {
    const std::vector<double> in{x};
    EXPECT_NEAR(net.forward(in)[0], x, 1e-12);
    const KanGradients g = kan_gradients(net, in, std::vector<double>{1.0});
    EXPECT_NEAR(g.input[0], 1.0, 1e-12);
  }
}

TEST(NetworkTest, CompositionMatchesLayerByLayer) {
  std::mt19937_64 rng(4);
  KanNetwork net({4, 3, 2});
  net.initialize(rng);
  const std::vector<double> x{0.1, -0.4, 1.1, -1.6};
  const auto h = net.layers()[0].forward(x);
  const auto y = net.layers()[1].forward(h);
  EXPECT_EQ(net.forward(x), y);
}

TEST(NetworkTest, WrongInputLengthRejected) {
  const KanNetwork net({3, 2});
  EXPECT_THROW(net.forward(std::vector<double>{1.0}), DimensionMismatch);
  EXPECT_THROW(kan_gradients(net, std::vector<double>{1, 2, 3}, std::vector<double>{1.0}), DimensionMismatch);
}

TEST(NetworkTest, InitializationStatistics) {
  std::mt19937_64 rng(17);
  KanNetwork net({40, 30});
  net.initialize(rng);
  const auto& layer = net.layers()[0];
  const double sd = 0.1 / std::sqrt(static_cast<double>(layer.grid().basis_size()));
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t o = 0; o < 30; ++o) {
    for (std::size_t i = 0; i < 40; ++i) {
      const KanEdge e = layer.edge(o, i);
      EXPECT_EQ(e.spline_scale, 1.0);
      EXPECT_LE(std::abs(e.base_scale), 1.0 / std::sqrt(40.0));
      for (double c : e.coefficients) {
        ss += c * c;
        ++n;
      }
    }
  }
  EXPECT_NEAR(std::sqrt(ss / n), sd, 0.05 * sd);
}

TEST(GradientTest, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(1);
  KanNetwork net({3, 4, 2});
  net.initialize(rng);
  const KanGradients g = kan_gradients(net, std::vector<double>{0.2, 0.5, -1.0}, std::vector<double>{0.0, 0.0});
  for (double v : g.input) EXPECT_EQ(v, 0.0);
  for (double v : g.parameters) EXPECT_EQ(v, 0.0);
}

TEST(GradientTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  for (int trial = 0; trial < 10; ++trial) {
    KanNetwork net({3, 4, 2});
    net.initialize(rng);
    std::vector<double> x(3), up{u(rng), u(rng)};
    for (auto& v : x) v = u(rng);
    const KanGradients g = kan_gradients(net, x, up);
    auto objective = [&](const KanNetwork& n, const std::vector<double>& in) {
      const auto o = n.forward(in);
      return up[0] * o[0] + up[1] * o[1];
    };
    const double h = 1e-5;
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      EXPECT_NEAR(g.input[i], (objective(net, xp) - objective(net, xm)) / (2 * h), 1e-7);
    }
    const auto theta = net.flat_parameters();
    for (std::size_t p = 0; p < theta.size(); p += 7) {
      auto tp = theta, tm = theta;
      tp[p] += h;
      tm[p] -= h;
      KanNetwork a = net, b = net;
      a.set_flat_parameters(tp);
      b.set_flat_parameters(tm);
      EXPECT_NEAR(g.parameters[p], (objective(a, x) - objective(b, x)) / (2 * h), 1e-7);
    }
  }
}

TEST(GradientTest, BitReproducible) {
  std::mt19937_64 rng(5);
  KanNetwork net({5, 3, 2});
  net.initialize(rng);
  const std::vector<double> x{0.1, 0.2, -0.3, 1.4, -1.1}, up{1.0, -0.5};
  const KanGradients a = kan_gradients(net, x, up);
  const KanGradients b = kan_gradients(net, x, up);
  EXPECT_EQ(a.input, b.input);
  EXPECT_EQ(a.parameters, b.parameters);
}

TEST(GradientTest, AffineInOneEdgeCoefficients) {
  std::mt19937_64 rng(8);
  KanNetwork net({2, 1});
  net.initialize(rng);
  const std::vector<double> x{0.4, -0.9};
  KanEdge e0 = net.layers()[0].edge(0, 1);
  KanEdge e1 = e0;
  for (auto& c : e1.coefficients) c += 0.3;
  auto eval_with = [&](const KanEdge& e) {
    KanNetwork n = net;
    n.layers()[0].set_edge(0, 1, e);
    return n.forward(x)[0];
  };
  KanEdge mid = e0;
  for (std::size_t i = 0; i < mid.coefficients.size(); ++i) {
    mid.coefficients[i] = 0.25 * e0.coefficients[i] + 0.75 * e1.coefficients[i];
  }
  EXPECT_NEAR(eval_with(mid), 0.25 * eval_with(e0) + 0.75 * eval_with(e1), 1e-14);
}

TEST(PolyakTest, Cases) {
  KanNetwork online({2, 1}), target({2, 1});
  auto op = online.flat_parameters();
  for (auto& v : op) v = 2.0;
  online.set_flat_parameters(op);
  KanNetwork frozen = target;
  polyak_update(frozen, online, 0.0);
  EXPECT_EQ(frozen.flat_parameters(), target.flat_parameters());
  KanNetwork half = target;
  polyak_update(half, online, 0.5);
  for (double v : half.flat_parameters()) EXPECT_EQ(v, 1.0);
  KanNetwork copy = target;
  polyak_update(copy, online, 1.0);
  EXPECT_EQ(copy.flat_parameters(), online.flat_parameters());
  KanNetwork other({3, 1});
  EXPECT_THROW(polyak_update(other, online, 0.5), ShapeMismatch);
}

TEST(SerializationTest, JsonRoundTripIsBitExact) {
  std::mt19937_64 rng(21);
  KanOptions opts;
  opts.order = 2;
  opts.num_intervals = 7;
  opts.lo = -3.0;
  opts.hi = 1.5;
  KanNetwork net({4, 6, 3}, opts);
  net.initialize(rng);
  const KanNetwork back = network_from_json(nlohmann::json::parse(to_json(net).dump()));
  ASSERT_TRUE(back.same_shape(net));
  EXPECT_EQ(back.flat_parameters(), net.flat_parameters());
  const std::vector<double> x{0.3, -2.2, 1.0, 0.01};
  EXPECT_EQ(back.forward(x), net.forward(x));
}

}  // namespace
}  // namespace pikan::kan

#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pikan::kan {

inline constexpr int kMaxOrder = 5;

// Clamped (open-uniform) knot vector over [lo, hi]: order + 1 copies of
// each endpoint around num_intervals equal intervals, G + 2k + 1 knots in
// total and G + k basis functions.
struct SplineGrid {
  int order = 3;
  int num_intervals = 5;
  double lo = -2.0;
  double hi = 2.0;
  std::vector<double> knots;

  static SplineGrid clamped(int order, int num_intervals, double lo, double hi);

  std::size_t basis_size() const noexcept { return static_cast<std::size_t>(num_intervals + order); }
  void validate() const;
};

// The order + 1 basis functions that can be non-zero at one point, with
// their derivatives. Inputs are clamped to [lo, hi] first; outside the grid
// the derivatives are zero.
struct BasisWindow {
  std::size_t first = 0;
  int count = 0;
  std::array<double, kMaxOrder + 1> value{};
  std::array<double, kMaxOrder + 1> derivative{};
};

BasisWindow basis_window(const SplineGrid& grid, double x);

// Dense basis vector of length G + k.
std::vector<double> bspline_basis(const SplineGrid& grid, double x);

double silu(double x);
double silu_derivative(double x);

struct KanEdge {
  std::vector<double> coefficients;
  double base_scale = 1.0;
  double spline_scale = 1.0;
};

// base_scale * silu(x) + spline_scale * <coefficients, basis(x)>. The base
// term is dropped when `use_base` is false.
double edge_eval(const KanEdge& edge, const SplineGrid& grid, double x, bool use_base = true);

struct LayerCache {
  std::vector<double> input;
  std::vector<BasisWindow> basis;
  std::vector<double> silu;
  std::vector<double> dsilu;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  std::vector<double> output;
};

// out_i = sum_j psi_ij(x_j). Parameters are stored edge-major: edge (i, j)
// owns [coefficients..., base_scale, spline_scale].
class KanLayer {
 public:
  KanLayer() = default;
  KanLayer(std::size_t in_dim, std::size_t out_dim, SplineGrid grid, bool use_base = true);

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  const SplineGrid& grid() const noexcept { return grid_; }
  bool use_base() const noexcept { return use_base_; }
  std::size_t edge_stride() const noexcept { return grid_.basis_size() + 2; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  KanEdge edge(std::size_t out, std::size_t in) const;
  void set_edge(std::size_t out, std::size_t in, const KanEdge& edge);

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::vector<double> forward(std::span<const double> x, LayerCache* cache = nullptr) const;
  // Adds d<upstream, out>/dparams into param_grad; returns d<upstream, out>/dx.
  std::vector<double> backward(const LayerCache& cache, std::span<const double> upstream,
                               std::span<double> param_grad) const;

 private:
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  SplineGrid grid_;
  bool use_base_ = true;
  std::vector<double> params_;
};

struct KanOptions {
  int order = 3;
  int num_intervals = 5;
  double lo = -2.0;
  double hi = 2.0;
  bool use_base = true;
};

class KanNetwork {
 public:
  KanNetwork() = default;
  // dims = {in, hidden..., out}; parameters start at zero.
  KanNetwork(const std::vector<std::size_t>& dims, const KanOptions& options = {});

  // Coefficients ~ N(0, 0.1 / sqrt(G + k)), spline_scale = 1,
  // base_scale ~ U(-1/sqrt(in), 1/sqrt(in)).
  void initialize(std::mt19937_64& rng);

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  std::size_t parameter_count() const noexcept;
  const std::vector<KanLayer>& layers() const noexcept { return layers_; }
  std::vector<KanLayer>& layers() noexcept { return layers_; }

  std::vector<double> forward(std::span<const double> input) const;
  std::vector<double> forward(std::span<const double> input, ForwardCache& cache) const;
  std::vector<double> backward(const ForwardCache& cache, std::span<const double> upstream,
                               std::span<double> param_grad) const;

  // Flat view in layer order, matching the gradient layout.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

  bool same_shape(const KanNetwork& other) const;

 private:
  std::vector<KanLayer> layers_;
};

struct KanGradients {
  std::vector<double> input;
  std::vector<double> parameters;
};

// Exact reverse-mode derivatives of <upstream, net(input)>.
KanGradients kan_gradients(const KanNetwork& net, std::span<const double> input,
                           std::span<const double> upstream);

// theta_target <- tau * theta_online + (1 - tau) * theta_target
void polyak_update(KanNetwork& target, const KanNetwork& online, double tau);

nlohmann::json to_json(const KanNetwork& net);
KanNetwork network_from_json(const nlohmann::json& j);

}  // namespace pikan::kan

#include "pikan/kan.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "pikan/error.hpp"

namespace pikan::kan {

SplineGrid SplineGrid::clamped(int order, int num_intervals, double lo, double hi) {
  SplineGrid g;
  g.order = order;
  g.num_intervals = num_intervals;
  g.lo = lo;
  g.hi = hi;
  if (order < 0 || order > kMaxOrder || num_intervals < 1 || !(lo < hi)) g.validate();
  const double h = (hi - lo) / num_intervals;
  g.knots.reserve(static_cast<std::size_t>(num_intervals + 2 * order + 1));
  for (int i = 0; i < order; ++i) g.knots.push_back(lo);
  for (int i = 0; i <= num_intervals; ++i) g.knots.push_back(i == num_intervals ? hi : lo + i * h);
  for (int i = 0; i < order; ++i) g.knots.push_back(hi);
  return g;
}

void SplineGrid::validate() const {
  if (order < 0 || order > kMaxOrder) throw ValidationError("spline order out of range");
  if (num_intervals < 1) throw ValidationError("spline grid needs at least one interval");
  if (!(lo < hi)) throw ValidationError("spline grid needs lo < hi");
  if (knots.size() != static_cast<std::size_t>(num_intervals + 2 * order + 1)) {
    throw ValidationError("knot count must equal G + 2k + 1");
  }
  if (!std::is_sorted(knots.begin(), knots.end())) throw ValidationError("knots must be non-decreasing");
}

// Cox-de Boor in the triangular form: only the order + 1 functions that are
// non-zero on the knot span containing x are evaluated.
BasisWindow basis_window(const SplineGrid& grid, double x) {
  const int k = grid.order;
  const auto& t = grid.knots;
  const bool inside = x >= grid.lo && x <= grid.hi;
  const double xc = std::clamp(x, grid.lo, grid.hi);

  // Span s with t[s] <= xc < t[s+1]; the right endpoint belongs to the last span.
  const auto span_begin = t.begin() + k;
  const auto span_end = t.begin() + k + grid.num_intervals;
  auto it = std::upper_bound(span_begin, span_end, xc);
  const std::size_t s = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
      (it - t.begin()) - 1, k, k + grid.num_intervals - 1));

  BasisWindow w;
  w.first = s - static_cast<std::size_t>(k);
  w.count = k + 1;

  std::array<double, kMaxOrder + 1> n{};
  std::array<double, kMaxOrder + 1> lower{};  // degree k - 1 values
  std::array<double, kMaxOrder + 2> left{}, right{};
  n[0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    if (j == k) lower = n;
    left[j] = xc - t[s + 1 - j];
    right[j] = t[s + j] - xc;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  w.value = n;

  if (k > 0 && inside) {
    // dN_{i,k}/dx = k * (N_{i,k-1} / (t[i+k] - t[i]) - N_{i+1,k-1} / (t[i+k+1] - t[i+1])),
    // with N_{.,k-1} non-zero only for i in [s-k+1, s] (stored at lower[0..k-1]).
    for (int r = 0; r <= k; ++r) {
      const std::size_t i = w.first + static_cast<std::size_t>(r);
      double d = 0.0;
      if (r >= 1) {
        const double denom = t[i + k] - t[i];
        if (denom > 0.0) d += lower[r - 1] / denom;
      }
      if (r <= k - 1) {
        const double denom = t[i + k + 1] - t[i + 1];
        if (denom > 0.0) d -= lower[r] / denom;
      }
      w.derivative[r] = k * d;
    }
  }
  return w;
}

std::vector<double> bspline_basis(const SplineGrid& grid, double x) {
  std::vector<double> out(grid.basis_size(), 0.0);
  const auto w = basis_window(grid, x);
  for (int r = 0; r < w.count; ++r) out[w.first + static_cast<std::size_t>(r)] = w.value[r];
  return out;
}

double silu(double x) {
  const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return x * sig;
}

double silu_derivative(double x) {
  const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return sig * (1.0 + x * (1.0 - sig));
}

double edge_eval(const KanEdge& edge, const SplineGrid& grid, double x, bool use_base) {
  if (edge.coefficients.size() != grid.basis_size()) throw DimensionMismatch("edge coefficient count");
  const auto w = basis_window(grid, x);
  double spline = 0.0;
  for (int r = 0; r < w.count; ++r) spline += edge.coefficients[w.first + static_cast<std::size_t>(r)] * w.value[r];
  return (use_base ? edge.base_scale * silu(x) : 0.0) + edge.spline_scale * spline;
}

KanLayer::KanLayer(std::size_t in_dim, std::size_t out_dim, SplineGrid grid, bool use_base)
    : in_dim_(in_dim), out_dim_(out_dim), grid_(std::move(grid)), use_base_(use_base) {
  grid_.validate();
  if (in_dim_ == 0 || out_dim_ == 0) throw DimensionMismatch("KAN layer dimensions must be positive");
  params_.assign(in_dim_ * out_dim_ * edge_stride(), 0.0);
}

KanEdge KanLayer::edge(std::size_t out, std::size_t in) const {
  const std::size_t nb = grid_.basis_size();
  const double* p = params_.data() + (out * in_dim_ + in) * edge_stride();
  return KanEdge{std::vector<double>(p, p + nb), p[nb], p[nb + 1]};
}

void KanLayer::set_edge(std::size_t out, std::size_t in, const KanEdge& edge) {
  const std::size_t nb = grid_.basis_size();
  if (edge.coefficients.size() != nb) throw DimensionMismatch("edge coefficient count");
  double* p = params_.data() + (out * in_dim_ + in) * edge_stride();
  std::copy(edge.coefficients.begin(), edge.coefficients.end(), p);
  p[nb] = edge.base_scale;
  p[nb + 1] = edge.spline_scale;
}

std::vector<double> KanLayer::forward(std::span<const double> x, LayerCache* cache) const {
  if (x.size() != in_dim_) throw DimensionMismatch("KAN layer input has wrong length");
  const std::size_t nb = grid_.basis_size();
  const std::size_t stride = edge_stride();

  std::vector<BasisWindow> local_basis;
  std::vector<double> local_silu;
  std::vector<BasisWindow>& basis = cache ? cache->basis : local_basis;
  std::vector<double>& act = cache ? cache->silu : local_silu;
  basis.resize(in_dim_);
  act.resize(in_dim_);
  for (std::size_t j = 0; j < in_dim_; ++j) {
    basis[j] = basis_window(grid_, x[j]);
    act[j] = use_base_ ? silu(x[j]) : 0.0;
  }
  if (cache) {
    cache->input.assign(x.begin(), x.end());
    cache->dsilu.resize(in_dim_);
    for (std::size_t j = 0; j < in_dim_; ++j) cache->dsilu[j] = use_base_ ? silu_derivative(x[j]) : 0.0;
  }

  std::vector<double> out(out_dim_, 0.0);
  for (std::size_t i = 0; i < out_dim_; ++i) {
    double acc = 0.0;
    const double* row = params_.data() + i * in_dim_ * stride;
    for (std::size_t j = 0; j < in_dim_; ++j) {
      const double* p = row + j * stride;
      const BasisWindow& w = basis[j];
      const double* c = p + w.first;
      double spline = 0.0;
      for (int r = 0; r < w.count; ++r) spline += c[r] * w.value[r];
      acc += p[nb] * act[j] + p[nb + 1] * spline;
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> KanLayer::backward(const LayerCache& cache, std::span<const double> upstream,
                                       std::span<double> param_grad) const {
  if (upstream.size() != out_dim_) throw DimensionMismatch("KAN layer upstream has wrong length");
  if (param_grad.size() != params_.size()) throw DimensionMismatch("KAN layer gradient buffer has wrong length");
  const std::size_t nb = grid_.basis_size();
  const std::size_t stride = edge_stride();
  std::vector<double> dx(in_dim_, 0.0);
  for (std::size_t i = 0; i < out_dim_; ++i) {
    const double g = upstream[i];
    if (g == 0.0) continue;
    for (std::size_t j = 0; j < in_dim_; ++j) {
      const std::size_t off = (i * in_dim_ + j) * stride;
      const double* p = params_.data() + off;
      double* gp = param_grad.data() + off;
      const BasisWindow& w = cache.basis[j];
      double spline = 0.0, dspline = 0.0;
      for (int r = 0; r < w.count; ++r) {
        const double c = p[w.first + static_cast<std::size_t>(r)];
        spline += c * w.value[r];
        dspline += c * w.derivative[r];
      }
      const double spline_scale = p[nb + 1];
      for (int r = 0; r < w.count; ++r) gp[w.first + static_cast<std::size_t>(r)] += g * spline_scale * w.value[r];
      if (use_base_) gp[nb] += g * cache.silu[j];
      gp[nb + 1] += g * spline;
      dx[j] += g * (p[nb] * cache.dsilu[j] + spline_scale * dspline);
    }
  }
  return dx;
}

KanNetwork::KanNetwork(const std::vector<std::size_t>& dims, const KanOptions& options) {
  if (dims.size() < 2) throw DimensionMismatch("KAN network needs at least input and output dimensions");
  const auto grid = SplineGrid::clamped(options.order, options.num_intervals, options.lo, options.hi);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers_.emplace_back(dims[l], dims[l + 1], grid, options.use_base);
  }
}

void KanNetwork::initialize(std::mt19937_64& rng) {
  for (auto& layer : layers_) {
    const std::size_t nb = layer.grid().basis_size();
    std::normal_distribution<double> coef(0.0, 0.1 / std::sqrt(static_cast<double>(nb)));
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim()));
    std::uniform_real_distribution<double> base(-bound, bound);
    auto p = layer.parameters();
    const std::size_t stride = layer.edge_stride();
    for (std::size_t e = 0; e < layer.in_dim() * layer.out_dim(); ++e) {
      for (std::size_t r = 0; r < nb; ++r) p[e * stride + r] = coef(rng);
      p[e * stride + nb] = layer.use_base() ? base(rng) : 0.0;
      p[e * stride + nb + 1] = 1.0;
    }
  }
}

std::size_t KanNetwork::in_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t KanNetwork::out_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t KanNetwork::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.parameter_count();
  return n;
}

std::vector<double> KanNetwork::forward(std::span<const double> input) const {
  if (input.size() != in_dim()) throw DimensionMismatch("KAN input has wrong length");
  std::vector<double> x(input.begin(), input.end());
  for (const auto& layer : layers_) x = layer.forward(x);
  return x;
}

std::vector<double> KanNetwork::forward(std::span<const double> input, ForwardCache& cache) const {
  if (input.size() != in_dim()) throw DimensionMismatch("KAN input has wrong length");
  cache.layers.resize(layers_.size());
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) x = layers_[l].forward(x, &cache.layers[l]);
  cache.output = x;
  return x;
}

std::vector<double> KanNetwork::backward(const ForwardCache& cache, std::span<const double> upstream,
                                         std::span<double> param_grad) const {
  if (upstream.size() != out_dim()) throw DimensionMismatch("KAN upstream has wrong length");
  if (param_grad.size() != parameter_count()) throw DimensionMismatch("KAN gradient buffer has wrong length");
  std::vector<std::size_t> offsets(layers_.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = off;
    off += layers_[l].parameter_count();
  }
  std::vector<double> g(upstream.begin(), upstream.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    g = layers_[l].backward(cache.layers[l], g, param_grad.subspan(offsets[l], layers_[l].parameter_count()));
  }
  return g;
}

std::vector<std::span<double>> KanNetwork::parameter_blocks() {
  std::vector<std::span<double>> blocks;
  for (auto& l : layers_) blocks.push_back(l.parameters());
  return blocks;
}

std::vector<double> KanNetwork::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) flat.insert(flat.end(), l.parameters().begin(), l.parameters().end());
  return flat;
}

void KanNetwork::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw DimensionMismatch("flat parameter vector has wrong length");
  std::size_t off = 0;
  for (auto& l : layers_) {
    auto p = l.parameters();
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + p.size()), p.begin());
    off += p.size();
  }
}

bool KanNetwork::same_shape(const KanNetwork& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() || a.grid().knots != b.grid().knots ||
        a.use_base() != b.use_base()) {
      return false;
    }
  }
  return true;
}

KanGradients kan_gradients(const KanNetwork& net, std::span<const double> input, std::span<const double> upstream) {
  ForwardCache cache;
  net.forward(input, cache);
  KanGradients g;
  g.parameters.assign(net.parameter_count(), 0.0);
  g.input = net.backward(cache, upstream, g.parameters);
  return g;
}

void polyak_update(KanNetwork& target, const KanNetwork& online, double tau) {
  if (!target.same_shape(online)) throw ShapeMismatch("polyak_update: target and online networks differ in shape");
  for (std::size_t l = 0; l < target.layers().size(); ++l) {
    auto t = target.layers()[l].parameters();
    const auto o = online.layers()[l].parameters();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tau * o[i] + (1.0 - tau) * t[i];
  }
}

nlohmann::json to_json(const KanNetwork& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    const auto& g = l.grid();
    layers.push_back({{"in", l.in_dim()},
                      {"out", l.out_dim()},
                      {"order", g.order},
                      {"intervals", g.num_intervals},
                      {"lo", g.lo},
                      {"hi", g.hi},
                      {"knots", g.knots},
                      {"use_base", l.use_base()},
                      {"params", std::vector<double>(l.parameters().begin(), l.parameters().end())}});
  }
  return {{"format", "pikan-kan"}, {"version", 1}, {"layers", std::move(layers)}};
}

KanNetwork network_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "pikan-kan" || j.value("version", 0) != 1) {
    throw ValidationError("unsupported KAN checkpoint format");
  }
  const auto& layers = j.at("layers");
  if (layers.empty()) throw ValidationError("KAN checkpoint has no layers");
  std::vector<std::size_t> dims{layers.front().at("in").get<std::size_t>()};
  for (const auto& l : layers) dims.push_back(l.at("out").get<std::size_t>());
  const auto& first = layers.front();
  KanOptions opt{first.at("order").get<int>(), first.at("intervals").get<int>(), first.at("lo").get<double>(),
                 first.at("hi").get<double>(), first.at("use_base").get<bool>()};
  KanNetwork net(dims, opt);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& lj = layers[l];
    auto& layer = net.layers()[l];
    SplineGrid grid = SplineGrid::clamped(lj.at("order").get<int>(), lj.at("intervals").get<int>(),
                                          lj.at("lo").get<double>(), lj.at("hi").get<double>());
    grid.knots = lj.at("knots").get<std::vector<double>>();
    layer = KanLayer(lj.at("in").get<std::size_t>(), lj.at("out").get<std::size_t>(), grid,
                     lj.at("use_base").get<bool>());
    const auto params = lj.at("params").get<std::vector<double>>();
    if (params.size() != layer.parameter_count()) throw ValidationError("KAN checkpoint parameter count mismatch");
    std::copy(params.begin(), params.end(), layer.parameters().begin());
  }
  for (std::size_t l = 1; l < net.layers().size(); ++l) {
    if (net.layers()[l].in_dim() != net.layers()[l - 1].out_dim()) {
      throw ValidationError("KAN checkpoint layer dimensions do not compose");
    }
  }
  return net;
}

}  // namespace pikan::kan

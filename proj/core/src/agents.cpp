#include "pikan/agents.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agent_detail.hpp"
#include "pikan/error.hpp"
#include "pikan/rng.hpp"

namespace pikan::agents {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::size_t> dims(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

// Shrinks the output layer so a fresh policy starts near the uniform
// allocation. spline_scale is left at 1 so the coefficients keep learning.
void shrink_output_layer(kan::KanNetwork& net, double factor) {
  auto& layer = net.layers().back();
  auto p = layer.parameters();
  const std::size_t stride = layer.edge_stride();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k % stride != stride - 1) p[k] *= factor;
  }
}

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_state(const std::string& s) {
  std::istringstream is(s);
  std::mt19937_64 rng;
  is >> rng;
  if (!is) throw ValidationError("checkpoint: unreadable RNG state");
  return rng;
}

json ema_json(const physics::EmaTracker& t) {
  return {{"mean", t.mean}, {"var", t.var}, {"initialized", t.initialized}};
}

physics::EmaTracker ema_from_json(const json& j) {
  return {j.at("mean").get<double>(), j.at("var").get<double>(), j.at("initialized").get<bool>()};
}

std::string mode_name(physics::VelocityMode m) {
  return m == physics::VelocityMode::kPrice ? "price" : "feature_mean";
}

}  // namespace

std::string Variant::name() const {
  std::string base;
  switch (algorithm) {
    case Algorithm::kDdpg: base = "ddpg"; break;
    case Algorithm::kTd3: base = "td3"; break;
    case Algorithm::kPpo: base = "ppo"; break;
    case Algorithm::kA2c: base = "a2c"; break;
  }
  return physics ? base + "_pinn" : base;
}

std::string Variant::display_name() const {
  std::string n = name();
  for (char& c : n) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return n;
}

Variant Variant::parse(std::string_view name) {
  std::string n = lower(name);
  Variant v;
  v.physics = false;
  const std::string suffix = "_pinn";
  if (n.size() > suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0) {
    v.physics = true;
    n.resize(n.size() - suffix.size());
  }
  if (n == "ddpg") v.algorithm = Algorithm::kDdpg;
  else if (n == "td3") v.algorithm = Algorithm::kTd3;
  else if (n == "ppo") v.algorithm = Algorithm::kPpo;
  else if (n == "a2c") v.algorithm = Algorithm::kA2c;
  else throw ConfigError("unknown algorithm '" + std::string(name) + "'");
  return v;
}

AgentConfig AgentConfig::defaults(Variant v) {
  AgentConfig c;
  c.variant = v;
  c.physics_enabled = v.physics;
  switch (v.algorithm) {
    case Algorithm::kDdpg:
      c.policy_delay = 1;
      c.target_noise = 0.0;
      c.target_noise_clip = 0.0;
      c.max_grad_norm = 10.0;
      c.physics.mode = physics::VelocityMode::kPrice;
      c.physics.loss_clamp = {0.0, 10.0};
      break;
    case Algorithm::kTd3:
      c.policy_delay = 2;
      c.max_grad_norm = 10.0;
      c.physics.mode = physics::VelocityMode::kPrice;
      c.physics.loss_clamp = {0.0, 10.0};
      break;
    case Algorithm::kPpo:
      c.max_grad_norm = 0.5;
      c.n_steps = 256;
      c.n_epochs = 10;
      c.normalize_advantage = true;
      c.physics.mode = physics::VelocityMode::kFeatureMean;
      c.physics.loss_clamp = {0.0, 10.0};
      break;
    case Algorithm::kA2c:
      c.max_grad_norm = 0.5;
      c.n_steps = 32;
      c.n_epochs = 1;
      c.normalize_advantage = false;
      c.physics.mode = physics::VelocityMode::kFeatureMean;
      c.physics.loss_clamp = {-10.0, 10.0};
      break;
  }
  return c;
}

void AgentConfig::validate() const {
  auto req = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("agent." + what);
  };
  req(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  req(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  req(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  req(max_grad_norm > 0.0, "max_grad_norm must be positive");
  for (std::size_t h : actor_hidden) req(h > 0, "actor_hidden entries must be positive");
  for (std::size_t h : critic_hidden) req(h > 0, "critic_hidden entries must be positive");
  req(kan.order >= 1 && kan.order <= kan::kMaxOrder, "kan.order must lie in [1, 5]");
  req(kan.num_intervals >= 1, "kan.num_intervals must be positive");
  req(kan.lo < kan.hi, "kan range must be ordered");
  if (variant.off_policy()) {
    req(policy_delay >= 1, "policy_delay must be at least 1");
    req(exploration_noise >= 0.0 && target_noise >= 0.0 && target_noise_clip >= 0.0, "noise scales must be >= 0");
    req(batch_size >= 2, "batch_size must be at least 2");
    req(buffer_size >= batch_size, "buffer_size must hold one batch");
    req(train_freq >= 1 && gradient_steps >= 1, "train_freq and gradient_steps must be positive");
  } else {
    req(n_steps >= 1 && n_epochs >= 1 && minibatch_size >= 1, "n_steps, n_epochs and minibatch_size must be positive");
    req(clip_range > 0.0, "clip_range must be positive");
    req(vf_coef >= 0.0 && ent_coef >= 0.0, "vf_coef and ent_coef must be >= 0");
    req(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda must lie in [0, 1]");
  }
  try {
    physics.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

json to_json(const AgentConfig& c) {
  return {
      {"algorithm", c.variant.name()},
      {"actor_hidden", c.actor_hidden},
      {"critic_hidden", c.critic_hidden},
      {"kan_order", c.kan.order},
      {"kan_intervals", c.kan.num_intervals},
      {"kan_lo", c.kan.lo},
      {"kan_hi", c.kan.hi},
      {"kan_use_base", c.kan.use_base},
      {"actor_lr", c.actor_lr},
      {"critic_lr", c.critic_lr},
      {"gamma", c.gamma},
      {"tau", c.tau},
      {"max_grad_norm", c.max_grad_norm},
      {"policy_delay", c.policy_delay},
      {"exploration_noise", c.exploration_noise},
      {"target_noise", c.target_noise},
      {"target_noise_clip", c.target_noise_clip},
      {"batch_size", c.batch_size},
      {"buffer_size", c.buffer_size},
      {"learning_starts", c.learning_starts},
      {"train_freq", c.train_freq},
      {"gradient_steps", c.gradient_steps},
      {"n_steps", c.n_steps},
      {"n_epochs", c.n_epochs},
      {"minibatch_size", c.minibatch_size},
      {"clip_range", c.clip_range},
      {"clip_range_vf", c.clip_range_vf},
      {"vf_coef", c.vf_coef},
      {"ent_coef", c.ent_coef},
      {"gae_lambda", c.gae_lambda},
      {"target_kl", c.target_kl},
      {"normalize_advantage", c.normalize_advantage},
      {"log_std_init", c.log_std_init},
      {"physics_action_source",
       c.physics_action_source == PhysicsActionSource::kPolicyMean ? "policy_mean" : "rollout"},
      {"seed", c.seed},
      {"physics",
       {{"enabled", c.physics_enabled},
        {"mass", c.physics.mass},
        {"dt", c.physics.dt},
        {"lambda_base", c.physics.lambda_base},
        {"loss_clamp", {c.physics.loss_clamp.lo, c.physics.loss_clamp.hi}},
        {"lambda_clamp", {c.physics.lambda_clamp.lo, c.physics.lambda_clamp.hi}},
        {"ema_beta", c.physics.ema_beta},
        {"vol_beta", c.physics.vol_beta},
        {"epsilon", c.physics.epsilon},
        {"mode", mode_name(c.physics.mode)}}},
  };
}

AgentConfig agent_config_from_json(const json& agent, const json& physics_section) {
  if (!agent.is_object()) throw ConfigError("agent section must be a table");
  if (!agent.contains("algorithm")) throw ConfigError("agent.algorithm is required");
  AgentConfig c = AgentConfig::defaults(Variant::parse(agent.at("algorithm").get<std::string>()));

  auto get = [](const json& j, const std::string& key, auto& out) {
    try {
      out = j.get<std::remove_reference_t<decltype(out)>>();
    } catch (const json::exception&) {
      throw ConfigError("agent." + key + " has the wrong type");
    }
  };
  auto get_count = [](const json& j, const std::string& key, std::size_t& out) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
      throw ConfigError(key + " must be a non-negative integer");
    }
    out = j.get<std::size_t>();
  };
  auto get_interval = [](const json& j, const std::string& key, physics::Interval& out) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      throw ConfigError(key + " must be a two-element numeric array");
    }
    out = {j[0].get<double>(), j[1].get<double>()};
  };

  for (const auto& [key, val] : agent.items()) {
    if (key == "algorithm") continue;
    if (key == "actor_hidden" || key == "critic_hidden") {
      auto& dst = key == "actor_hidden" ? c.actor_hidden : c.critic_hidden;
      if (!val.is_array()) throw ConfigError("agent." + key + " must be an array");
      dst.clear();
      for (const auto& e : val) {
        std::size_t n = 0;
        get_count(e, "agent." + key, n);
        dst.push_back(n);
      }
    } else if (key == "kan_order") get(val, key, c.kan.order);
    else if (key == "kan_intervals") get(val, key, c.kan.num_intervals);
    else if (key == "kan_lo") get(val, key, c.kan.lo);
    else if (key == "kan_hi") get(val, key, c.kan.hi);
    else if (key == "kan_use_base") get(val, key, c.kan.use_base);
    else if (key == "actor_lr") get(val, key, c.actor_lr);
    else if (key == "critic_lr") get(val, key, c.critic_lr);
    else if (key == "gamma") get(val, key, c.gamma);
    else if (key == "tau") get(val, key, c.tau);
    else if (key == "max_grad_norm") get(val, key, c.max_grad_norm);
    else if (key == "policy_delay") get_count(val, "agent." + key, c.policy_delay);
    else if (key == "exploration_noise") get(val, key, c.exploration_noise);
    else if (key == "target_noise") get(val, key, c.target_noise);
    else if (key == "target_noise_clip") get(val, key, c.target_noise_clip);
    else if (key == "batch_size") get_count(val, "agent." + key, c.batch_size);
    else if (key == "buffer_size") get_count(val, "agent." + key, c.buffer_size);
    else if (key == "learning_starts") get_count(val, "agent." + key, c.learning_starts);
    else if (key == "train_freq") get_count(val, "agent." + key, c.train_freq);
    else if (key == "gradient_steps") get_count(val, "agent." + key, c.gradient_steps);
    else if (key == "n_steps") get_count(val, "agent." + key, c.n_steps);
    else if (key == "n_epochs") get_count(val, "agent." + key, c.n_epochs);
    else if (key == "minibatch_size") get_count(val, "agent." + key, c.minibatch_size);
    else if (key == "clip_range") get(val, key, c.clip_range);
    else if (key == "clip_range_vf") get(val, key, c.clip_range_vf);
    else if (key == "vf_coef") get(val, key, c.vf_coef);
    else if (key == "ent_coef") get(val, key, c.ent_coef);
    else if (key == "gae_lambda") get(val, key, c.gae_lambda);
    else if (key == "target_kl") get(val, key, c.target_kl);
    else if (key == "normalize_advantage") get(val, key, c.normalize_advantage);
    else if (key == "log_std_init") get(val, key, c.log_std_init);
    else if (key == "physics_action_source") {
      const auto s = val.is_string() ? val.get<std::string>() : std::string();
      if (s == "policy_mean") c.physics_action_source = PhysicsActionSource::kPolicyMean;
      else if (s == "rollout") c.physics_action_source = PhysicsActionSource::kRollout;
      else throw ConfigError("agent.physics_action_source must be \"policy_mean\" or \"rollout\"");
    } else if (key == "seed") {
      if (!val.is_number_integer()) throw ConfigError("agent.seed must be an integer");
      c.seed = val.get<std::uint64_t>();
    } else if (key == "physics") {
      continue;  // nested form handled below
    } else {
      throw ConfigError("unknown key agent." + key);
    }
  }

  json phys = physics_section.is_null() ? json::object() : physics_section;
  if (agent.contains("physics")) phys.update(agent.at("physics"));
  if (!phys.is_object()) throw ConfigError("physics section must be a table");
  for (const auto& [key, val] : phys.items()) {
    auto& p = c.physics;
    if (key == "enabled") get(val, key, c.physics_enabled);
    else if (key == "mass") get(val, key, p.mass);
    else if (key == "dt") get(val, key, p.dt);
    else if (key == "lambda_base") get(val, key, p.lambda_base);
    else if (key == "loss_clamp") get_interval(val, "physics.loss_clamp", p.loss_clamp);
    else if (key == "lambda_clamp") get_interval(val, "physics.lambda_clamp", p.lambda_clamp);
    else if (key == "ema_beta") get(val, key, p.ema_beta);
    else if (key == "vol_beta") get(val, key, p.vol_beta);
    else if (key == "epsilon") get(val, key, p.epsilon);
    else if (key == "mode") {
      const auto s = val.is_string() ? val.get<std::string>() : std::string();
      if (s == "price") p.mode = physics::VelocityMode::kPrice;
      else if (s == "feature_mean") p.mode = physics::VelocityMode::kFeatureMean;
      else throw ConfigError("physics.mode must be \"price\" or \"feature_mean\"");
    } else {
      throw ConfigError("unknown key physics." + key);
    }
  }
  c.validate();
  return c;
}

PhysicsContext PhysicsContext::from_dataset(const marketdata::Dataset& data) {
  PhysicsContext ctx;
  ctx.layout = {data.window, data.num_assets(), data.num_features()};
  ctx.price_column = data.features.empty() ? marketdata::kCloseIndex : data.features[0].price_feature_index;
  for (const auto& s : data.stats) {
    ctx.price_mean.push_back(s.mean.at(ctx.price_column));
    ctx.price_std.push_back(s.std.at(ctx.price_column));
  }
  return ctx;
}

PhysicsContext PhysicsContext::identity(physics::StateLayout layout, std::size_t price_column) {
  PhysicsContext ctx;
  ctx.layout = layout;
  ctx.price_column = price_column;
  ctx.price_mean.assign(layout.assets, 0.0);
  // Decoding is z * (std + 1e-8) + mean; this std makes it exact identity.
  ctx.price_std.assign(layout.assets, 1.0 - 1e-8);
  return ctx;
}

Agent::Agent(AgentConfig config, PhysicsContext context) : config_(std::move(config)), context_(std::move(context)) {
  config_.validate();
  const std::size_t d = context_.layout.size();
  const std::size_t m = context_.layout.assets;
  if (d == 0 || m == 0) throw DimensionMismatch("agent: empty state layout");
  if (context_.price_column >= context_.layout.features) throw DimensionMismatch("agent: price column out of range");
  if (context_.price_mean.size() != m || context_.price_std.size() != m) {
    throw DimensionMismatch("agent: price decoding stats do not match the asset count");
  }

  const SeedSequence seeds(config_.seed);
  auto init = seeds.stream("init");
  explore_rng_ = seeds.stream("exploration");
  noise_rng_ = seeds.stream("target-noise");
  sample_rng_ = seeds.stream("data-shuffle");

  actor_ = kan::KanNetwork(dims(d, config_.actor_hidden, m), config_.kan);
  actor_.initialize(init);
  shrink_output_layer(actor_, 0.01);

  if (config_.variant.off_policy()) {
    const std::size_t twins = config_.variant.algorithm == Algorithm::kTd3 ? 2 : 1;
    std::size_t critic_params = 0;
    for (std::size_t k = 0; k < twins; ++k) {
      kan::KanNetwork q(dims(d + m, config_.critic_hidden, 1), config_.kan);
      q.initialize(init);
      critic_params += q.parameter_count();
      critics_.push_back(q);
    }
    actor_target_ = actor_;
    critic_targets_ = critics_;
    actor_opt_ = optim::Adam(actor_.parameter_count(), config_.actor_lr);
    critic_opt_ = optim::Adam(critic_params, config_.critic_lr);
  } else {
    value_net_ = kan::KanNetwork(dims(d, config_.critic_hidden, 1), config_.kan);
    value_net_.initialize(init);
    log_std_.assign(m, config_.log_std_init);
    actor_opt_ = optim::Adam(actor_.parameter_count() + m + value_net_.parameter_count(), config_.actor_lr);
  }
}

std::vector<double> Agent::actor_logits(std::span<const double> state) const {
  if (state.size() != state_size()) throw DimensionMismatch("agent: state size differs from the actor input");
  return actor_.forward(state);
}

double Agent::value(std::span<const double> state) const {
  if (config_.variant.off_policy()) throw Error("agent: state values exist only for on-policy agents");
  if (state.size() != state_size()) throw DimensionMismatch("agent: state size differs from the value input");
  return value_net_.forward(state)[0];
}

double Agent::log_prob(std::span<const double> state, std::span<const double> raw) const {
  if (config_.variant.off_policy()) throw Error("agent: log-probabilities exist only for on-policy agents");
  const auto mean = actor_logits(state);
  if (raw.size() != mean.size()) throw DimensionMismatch("agent: action size differs from the policy output");
  return detail::gaussian_log_prob(mean, log_std_, raw);
}

ActResult Agent::act_detailed(std::span<const double> state, bool explore) {
  auto z = actor_logits(state);
  ActResult r{env::WeightVector::uniform(z.size()), {}, 0.0, 0.0};
  if (config_.variant.off_policy()) {
    if (explore && config_.exploration_noise > 0.0) {
      std::normal_distribution<double> noise(0.0, config_.exploration_noise);
      for (double& v : z) v += noise(explore_rng_);
    }
  } else {
    const auto mean = z;
    if (explore) {
      std::normal_distribution<double> noise(0.0, 1.0);
      for (std::size_t j = 0; j < z.size(); ++j) z[j] += std::exp(log_std_[j]) * noise(explore_rng_);
    }
    r.value = value_net_.forward(state)[0];
    r.log_prob = detail::gaussian_log_prob(mean, log_std_, z);
  }
  r.weights = env::project_to_simplex(z);
  r.raw = std::move(z);
  return r;
}

env::WeightVector Agent::act(const marketdata::StateTensor& state, bool explore) {
  return act_detailed(state.flat(), explore).weights;
}

std::vector<double> Agent::critic_input(std::span<const double> state, std::span<const double> weights) const {
  return detail::concat(state, weights);
}

Agent::Motion Agent::observed_motion(const Matrix& states, const Matrix& next_states) const {
  const auto& layout = context_.layout;
  const auto& p = config_.physics;
  Motion out;
  if (p.mode == physics::VelocityMode::kPrice) {
    Matrix now = physics::last_step_feature(states, layout, context_.price_column);
    Matrix next = physics::last_step_feature(next_states, layout, context_.price_column);
    for (Matrix* mat : {&now, &next}) {
      for (std::size_t b = 0; b < mat->rows; ++b) {
        for (std::size_t i = 0; i < mat->cols; ++i) {
          (*mat)(b, i) = (*mat)(b, i) * (context_.price_std[i] + 1e-8) + context_.price_mean[i];
        }
      }
    }
    out.velocity = physics::velocity(now, next, p.epsilon);
    out.acceleration = physics::observed_acceleration(out.velocity, p.dt);
  } else {
    out.velocity = physics::feature_mean_velocity(states, next_states, layout, p.dt);
    out.acceleration = out.velocity;
  }
  return out;
}

json Agent::checkpoint() const {
  json j;
  j["format"] = "pikan-agent";
  j["version"] = 1;
  j["config"] = to_json(config_);
  j["layout"] = {{"window", context_.layout.window},
                 {"assets", context_.layout.assets},
                 {"features", context_.layout.features}};
  j["actor"] = kan::to_json(actor_);
  if (config_.variant.off_policy()) {
    j["actor_target"] = kan::to_json(actor_target_);
    j["critics"] = json::array();
    j["critic_targets"] = json::array();
    for (const auto& c : critics_) j["critics"].push_back(kan::to_json(c));
    for (const auto& c : critic_targets_) j["critic_targets"].push_back(kan::to_json(c));
    j["critic_optimizer"] = critic_opt_.to_json();
  } else {
    j["value"] = kan::to_json(value_net_);
    j["log_std"] = log_std_;
  }
  j["actor_optimizer"] = actor_opt_.to_json();
  j["ema"] = {{"actor", ema_json(actor_ema_)}, {"physics", ema_json(physics_ema_)}, {"vol", ema_json(vol_ema_)}};
  j["rng"] = {{"exploration", rng_state(explore_rng_)},
              {"target_noise", rng_state(noise_rng_)},
              {"sampling", rng_state(sample_rng_)}};
  return j;
}

Agent Agent::from_checkpoint(const json& j, PhysicsContext context) {
  if (j.value("format", std::string()) != "pikan-agent") throw ValidationError("checkpoint: not an agent checkpoint");
  const json& cfg = j.at("config");
  AgentConfig config = agent_config_from_json(
      [&] {
        json a = cfg;
        a.erase("physics");
        return a;
      }(),
      cfg.at("physics"));
  const auto& lay = j.at("layout");
  const physics::StateLayout stored{lay.at("window").get<std::size_t>(), lay.at("assets").get<std::size_t>(),
                                    lay.at("features").get<std::size_t>()};
  if (stored.window != context.layout.window || stored.assets != context.layout.assets ||
      stored.features != context.layout.features) {
    throw CheckpointShapeMismatch("checkpoint was trained on a (" + std::to_string(stored.window) + " x " +
                                  std::to_string(stored.assets) + " x " + std::to_string(stored.features) +
                                  ") state, data provides (" + std::to_string(context.layout.window) + " x " +
                                  std::to_string(context.layout.assets) + " x " +
                                  std::to_string(context.layout.features) + ")");
  }
  Agent a(config, std::move(context));
  auto load = [](kan::KanNetwork& dst, const json& src) {
    kan::KanNetwork net = kan::network_from_json(src);
    if (!net.same_shape(dst)) throw CheckpointShapeMismatch("checkpoint network shape differs from the config");
    dst = std::move(net);
  };
  load(a.actor_, j.at("actor"));
  if (config.variant.off_policy()) {
    load(a.actor_target_, j.at("actor_target"));
    const auto& cs = j.at("critics");
    const auto& ts = j.at("critic_targets");
    if (cs.size() != a.critics_.size() || ts.size() != a.critic_targets_.size()) {
      throw CheckpointShapeMismatch("checkpoint critic count differs from the algorithm");
    }
    for (std::size_t k = 0; k < cs.size(); ++k) {
      load(a.critics_[k], cs[k]);
      load(a.critic_targets_[k], ts[k]);
    }
    a.critic_opt_ = optim::Adam::from_json(j.at("critic_optimizer"));
  } else {
    load(a.value_net_, j.at("value"));
    auto ls = j.at("log_std").get<std::vector<double>>();
    if (ls.size() != a.log_std_.size()) throw CheckpointShapeMismatch("checkpoint log_std length differs");
    a.log_std_ = std::move(ls);
  }
  a.actor_opt_ = optim::Adam::from_json(j.at("actor_optimizer"));
  const auto& ema = j.at("ema");
  a.actor_ema_ = ema_from_json(ema.at("actor"));
  a.physics_ema_ = ema_from_json(ema.at("physics"));
  a.vol_ema_ = ema_from_json(ema.at("vol"));
  const auto& rng = j.at("rng");
  a.explore_rng_ = rng_from_state(rng.at("exploration").get<std::string>());
  a.noise_rng_ = rng_from_state(rng.at("target_noise").get<std::string>());
  a.sample_rng_ = rng_from_state(rng.at("sampling").get<std::string>());
  return a;
}

}  // namespace pikan::agents

#pragma once

// JSON checkpoint of an online agent (weights, optimizer moments, curiosity
// windows and, optionally, the random engine) for resuming a run.
//
// {
//   "format": "earlywarn-agent/1",
//   "hyper": {"gamma":1, "clip_epsilon":0.2, ...},
//   "actor":  {"sizes":[5,64,64,2], "params":[...], "adam":{"t":n,"m":[...],"v":[...]}},
//   "critic": {...},
//   "tracker": {"adaptations":[true,...], "silences":[true,...]},
//   "rng": "<std::mt19937_64 state text>"          (optional)
// }

#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "earlywarn/errors.hpp"
#include "earlywarn/random.hpp"
#include "earlywarn/rl/ppo.hpp"
#include "earlywarn/text.hpp"
#include "json.hpp"

namespace earlywarn::rl {

inline constexpr const char* kCheckpointFormatTag = "earlywarn-agent/1";

struct Checkpoint {
  AgentState agent;
  std::optional<Rng> rng;
};

namespace detail {

inline nlohmann::ordered_json network_to_json(const Mlp& net, const Adam& opt) {
  nlohmann::ordered_json j;
  j["sizes"] = net.sizes();
  j["params"] = std::vector<double>(net.params().begin(), net.params().end());
  j["adam"] = {{"t", opt.steps()}, {"m", opt.first_moment()}, {"v", opt.second_moment()}};
  return j;
}

inline std::pair<Mlp, Adam> network_from_json(const nlohmann::json& j) {
  Mlp net(j.at("sizes").get<std::vector<int>>());
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != net.parameter_count()) {
    throw ValidationError("checkpoint parameter count does not match layer sizes");
  }
  std::copy(params.begin(), params.end(), net.params().begin());
  Adam opt(net.parameter_count());
  const auto& a = j.at("adam");
  opt.restore(a.at("t").get<long long>(), a.at("m").get<std::vector<double>>(),
              a.at("v").get<std::vector<double>>());
  return {std::move(net), std::move(opt)};
}

}  // namespace detail

inline std::string checkpoint_to_string(const AgentState& agent, const Rng* rng = nullptr) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormatTag;
  const auto& h = agent.hyper;
  j["hyper"] = {{"gamma", h.gamma},
                {"clip_epsilon", h.clip_epsilon},
                {"learning_rate", h.learning_rate},
                {"update_epochs", h.update_epochs},
                {"hidden_width", h.hidden_width},
                {"hidden_layers", h.hidden_layers},
                {"entropy_coef", h.entropy_coef},
                {"max_grad_norm", h.max_grad_norm}};
  j["actor"] = detail::network_to_json(agent.params.actor, agent.params.actor_optimizer);
  j["critic"] = detail::network_to_json(agent.params.critic, agent.params.critic_optimizer);
  j["tracker"] = {
      {"adaptations", std::vector<bool>(agent.tracker.adaptations().begin(),
                                        agent.tracker.adaptations().end())},
      {"silences",
       std::vector<bool>(agent.tracker.silences().begin(), agent.tracker.silences().end())}};
  if (rng != nullptr) {
    std::ostringstream os;
    os << *rng;
    j["rng"] = os.str();
  }
  return j.dump() + "\n";
}

inline Checkpoint checkpoint_from_string(const std::string& s) {
  try {
    const auto j = nlohmann::json::parse(s);
    if (j.at("format").get<std::string>() != kCheckpointFormatTag) {
      throw ValidationError("unsupported checkpoint format");
    }
    Checkpoint cp;
    const auto& hj = j.at("hyper");
    auto& h = cp.agent.hyper;
    h.gamma = hj.at("gamma").get<double>();
    h.clip_epsilon = hj.at("clip_epsilon").get<double>();
    h.learning_rate = hj.at("learning_rate").get<double>();
    h.update_epochs = hj.at("update_epochs").get<int>();
    h.hidden_width = hj.at("hidden_width").get<int>();
    h.hidden_layers = hj.at("hidden_layers").get<int>();
    h.entropy_coef = hj.at("entropy_coef").get<double>();
    h.max_grad_norm = hj.at("max_grad_norm").get<double>();
    validate(h);
    auto [actor, actor_opt] = detail::network_from_json(j.at("actor"));
    auto [critic, critic_opt] = detail::network_from_json(j.at("critic"));
    if (actor.sizes() != layer_sizes(h, kActionCount) || critic.sizes() != layer_sizes(h, 1)) {
      throw ValidationError("checkpoint network shape disagrees with its hyperparameters");
    }
    cp.agent.params = {std::move(actor), std::move(critic), std::move(actor_opt),
                       std::move(critic_opt)};
    const auto& t = j.at("tracker");
    const auto ad = t.at("adaptations").get<std::vector<bool>>();
    const auto si = t.at("silences").get<std::vector<bool>>();
    cp.agent.tracker.restore({ad.begin(), ad.end()}, {si.begin(), si.end()});
    if (j.contains("rng")) {
      Rng rng;
      std::istringstream is(j.at("rng").get<std::string>());
      is >> rng;
      if (!is) throw ValidationError("corrupt random engine state in checkpoint");
      cp.rng = rng;
    }
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const AgentState& agent,
                            const Rng* rng = nullptr) {
  auto out = text::open_for_write(path);
  out << checkpoint_to_string(agent, rng);
  text::finish_write(out, path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  auto in = text::open_for_read(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace earlywarn::rl

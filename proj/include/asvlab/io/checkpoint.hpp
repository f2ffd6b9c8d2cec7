#pragma once

// Policy checkpoints: a JSON document with the layer layout and a flat
// parameter array. Layout of "params": actor layers (column-major out x in
// weights, then bias, per layer), the action log-std, then the critic layers.

#include <fstream>
#include <string>
#include <vector>

#include "asvlab/io/json_reader.hpp"
#include "asvlab/policy/policy_net.hpp"

namespace asvlab::io {

inline constexpr const char* kCheckpointFormat = "asvlab-policy";
inline constexpr int kCheckpointVersion = 1;

inline Json checkpoint_to_json(const policy::PolicyNet& net, const std::string& config_hash,
                               std::uint64_t seed) {
  Json layers = Json::array();
  auto add = [&](const policy::Mlp& m, const char* name) {
    for (std::size_t i = 0; i < m.layers().size(); ++i) {
      const auto& l = m.layers()[i];
      layers.push_back({{"name", std::string(name) + "." + std::to_string(i)},
                        {"in", l.in},
                        {"out", l.out},
                        {"weight_offset", l.weight_offset},
                        {"bias_offset", l.bias_offset}});
    }
  };
  add(net.actor(), "actor");
  add(net.critic(), "critic");
  std::vector<double> params(net.params().data(), net.params().data() + net.num_params());
  return Json{{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"config_hash", config_hash},
              {"seed", seed},
              {"obs_dim", policy::kObsDim},
              {"act_dim", policy::kActDim},
              {"actor_hidden", net.shape().actor_hidden},
              {"critic_hidden", net.shape().critic_hidden},
              {"log_std_offset", net.log_std_offset()},
              {"layers", layers},
              {"params", params}};
}

inline policy::PolicyNet checkpoint_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw ConfigError("not a policy checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version");
  }
  if (j.value("obs_dim", 0) != policy::kObsDim || j.value("act_dim", 0) != policy::kActDim) {
    throw ConfigError("checkpoint observation/action sizes do not match this build");
  }
  policy::NetShape shape;
  shape.actor_hidden = j.at("actor_hidden").get<std::vector<int>>();
  shape.critic_hidden = j.at("critic_hidden").get<std::vector<int>>();
  policy::PolicyNet net(shape);
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != net.num_params()) {
    throw ConfigError("checkpoint has " + std::to_string(params.size()) +
                      " parameters, layout expects " + std::to_string(net.num_params()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    net.params()[static_cast<Eigen::Index>(i)] = params[i];
  }
  if (!net.finite()) throw ConfigError("checkpoint contains non-finite parameters");
  return net;
}

inline void save_checkpoint(const std::string& path, const policy::PolicyNet& net,
                            const std::string& config_hash, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw SimulationFault("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(net, config_hash, seed).dump() << "\n";
}

inline policy::PolicyNet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace asvlab::io

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/plant.hpp"

namespace asvlab::evaluation {

enum class PolicyVariant { Nominal, NoRateLimiter };

inline const char* to_string(PolicyVariant p) {
  return p == PolicyVariant::Nominal ? "nominal" : "no_rate_limiter";
}

inline PolicyVariant policy_variant_from_string(const std::string& s) {
  if (s == "nominal") return PolicyVariant::Nominal;
  if (s == "no_rate_limiter") return PolicyVariant::NoRateLimiter;
  throw ConfigError("condition.policy must be nominal or no_rate_limiter, got '" + s + "'");
}

struct ConditionSpec {
  std::string id;
  std::string name;
  double localization_delay = 0.0;  // s, applied to the pose the policy sees
  PolicyVariant policy = PolicyVariant::Nominal;
  double loe_right = 0.0;
  std::optional<double> mass;
  std::optional<double> cog_y;
  std::optional<double> dq_u;
  double pixel_radius = 0.0;  // px
  std::vector<std::string> composed_of;

  void validate() const {
    if (!(localization_delay >= 0.0)) {
      throw ConfigError("condition " + id + ": localization_delay must be >= 0");
    }
    if (!(loe_right >= 0.0 && loe_right < 1.0)) {
      throw ConfigError("condition " + id + ": loe_right must be in [0, 1)");
    }
    if (mass && !(*mass > 0.0)) throw ConfigError("condition " + id + ": mass must be > 0");
    if (dq_u && !(*dq_u >= 0.0)) throw ConfigError("condition " + id + ": dq_u must be >= 0");
    if (!(pixel_radius >= 0.0)) {
      throw ConfigError("condition " + id + ": pixel_radius must be >= 0");
    }
  }

  /// Plant used for evaluation under this condition. The MCU limiter is
  /// always present at evaluation time.
  PlantConfig apply(PlantConfig base) const {
    base.limiter_enabled = true;
    base.faults.loe_right = loe_right;
    if (mass) base.vessel.mass = *mass;
    if (cog_y) base.vessel.cog_y = *cog_y;
    if (dq_u) base.vessel.dq_u = *dq_u;
    return base;
  }

  friend bool operator==(const ConditionSpec&, const ConditionSpec&) = default;
};

inline std::vector<ConditionSpec> condition_catalog() {
  std::vector<ConditionSpec> c(14);
  c[0] = {.id = "01", .name = "Ideal"};
  c[1] = {.id = "02", .name = "LocDelay", .localization_delay = 0.1};
  c[2] = {.id = "03", .name = "NoRateLim", .policy = PolicyVariant::NoRateLimiter};
  c[3] = {.id = "04",
          .name = "LDandNRL",
          .localization_delay = 0.1,
          .policy = PolicyVariant::NoRateLimiter,
          .composed_of = {"02", "03"}};
  c[4] = {.id = "05", .name = "ThrLoE10", .loe_right = 0.10};
  c[5] = {.id = "06", .name = "ThrLoE30", .loe_right = 0.30};
  c[6] = {.id = "07", .name = "ThrLoE50", .loe_right = 0.50};
  c[7] = {.id = "08", .name = "DynPert", .mass = 41.25, .cog_y = -0.10, .dq_u = 25.89};
  c[8] = {.id = "09", .name = "DynPertStr", .mass = 41.25, .cog_y = -0.20, .dq_u = 34.52};
  c[9] = {.id = "10", .name = "PNoise05px", .pixel_radius = 5.0};
  c[10] = {.id = "11", .name = "PNoise25px", .pixel_radius = 25.0};
  c[11] = {.id = "12", .name = "PNoise50px", .pixel_radius = 50.0};
  c[12] = {.id = "13",
           .name = "CombPert",
           .loe_right = 0.10,
           .mass = 41.25,
           .cog_y = -0.10,
           .dq_u = 25.89,
           .pixel_radius = 5.0,
           .composed_of = {"05", "08", "10"}};
  c[13] = {.id = "14",
           .name = "CombPertStr",
           .loe_right = 0.30,
           .mass = 41.25,
           .cog_y = -0.20,
           .dq_u = 34.52,
           .pixel_radius = 50.0,
           .composed_of = {"06", "09", "12"}};
  return c;
}

inline ConditionSpec find_condition(const std::string& id) {
  for (const auto& c : condition_catalog()) {
    if (c.id == id || c.id + "-" + c.name == id) return c;
  }
  throw ConfigError("unknown condition '" + id + "'");
}

}  // namespace asvlab::evaluation

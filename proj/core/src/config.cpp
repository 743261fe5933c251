#include "vnoc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vnoc {

using nlohmann::json;

namespace {

[[noreturn]] void schema_err(const std::string& path,
                             const std::string& what) {
  throw SimError(ErrorCode::SchemaError, "at " + path + ": " + what);
}

[[noreturn]] void semantic_err(const std::string& what) {
  throw SimError(ErrorCode::SemanticError, what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      schema_err(path, "unknown key '" + it.key() + "'");
    }
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

uint64_t as_uint(const json& j, const std::string& path, uint64_t max) {
  if (!j.is_number_unsigned()) {
    schema_err(path, "expected an unsigned integer");
  }
  uint64_t v = j.get<uint64_t>();
  if (v > max) {
    schema_err(path, "value " + std::to_string(v) + " exceeds " +
                         std::to_string(max));
  }
  return v;
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) schema_err(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema_err(path, "expected a string");
  return j.get<std::string>();
}

MeshCoordinate as_coord(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    schema_err(path, "expected a [x, y] pair");
  }
  return {static_cast<uint8_t>(as_uint(j[0], path + "[0]", 15)),
          static_cast<uint8_t>(as_uint(j[1], path + "[1]", 15))};
}

ServiceCatalog build_catalog(const SimConfig& cfg) {
  ServiceCatalog catalog = ServiceCatalog::standard(cfg.service);
  for (const auto& t : cfg.extra_types) {
    if (catalog.find(t.name)) {
      semantic_err("service type '" + t.name + "' defined twice");
    }
    catalog.register_type({t.name, t.kernel, t.base, t.per_op});
  }
  return catalog;
}

}  // namespace

SimConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SimError(ErrorCode::SchemaError,
                   std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    schema_err("$", "top level must be an object");
  }
  check_keys(root, "$",
             {"mesh", "mode", "policy", "manager", "hosts", "regions",
              "service", "pe_queue_depth", "workload", "seed", "watchdog",
              "tag_packets", "trace"});

  SimConfig cfg;

  if (const json* mesh = find(root, "mesh")) {
    if (!mesh->is_object()) schema_err("$.mesh", "expected an object");
    check_keys(*mesh, "$.mesh", {"width", "height", "buffer_depth"});
    if (const json* j = find(*mesh, "width")) {
      cfg.width = static_cast<uint8_t>(as_uint(*j, "$.mesh.width", 255));
    }
    if (const json* j = find(*mesh, "height")) {
      cfg.height = static_cast<uint8_t>(as_uint(*j, "$.mesh.height", 255));
    }
    if (const json* j = find(*mesh, "buffer_depth")) {
      cfg.buffer_depth =
          static_cast<uint32_t>(as_uint(*j, "$.mesh.buffer_depth", 1024));
    }
  }

  if (const json* j = find(root, "mode")) {
    std::string m = as_string(*j, "$.mode");
    if (m == "baseline") {
      cfg.mode = Mode::Baseline;
    } else if (m == "vnoc") {
      cfg.mode = Mode::Vnoc;
    } else {
      schema_err("$.mode", "'" + m + "' is not 'baseline' or 'vnoc'");
    }
  }

  if (const json* j = find(root, "policy")) {
    std::string p = as_string(*j, "$.policy");
    if (p == "reconfig_first") {
      cfg.policy = Policy::ReconfigFirst;
    } else if (p == "virtualize_first") {
      cfg.policy = Policy::VirtualizeFirst;
    } else {
      schema_err("$.policy",
                 "'" + p + "' is not 'reconfig_first' or 'virtualize_first'");
    }
  }

  if (const json* j = find(root, "manager")) {
    cfg.manager = as_coord(*j, "$.manager");
  }

  if (const json* j = find(root, "hosts")) {
    if (!j->is_array()) schema_err("$.hosts", "expected an array");
    for (std::size_t i = 0; i < j->size(); ++i) {
      cfg.hosts.push_back(
          as_coord((*j)[i], "$.hosts[" + std::to_string(i) + "]"));
    }
  } else {
    cfg.hosts = {{0, 1}, {0, 2}, {1, 0}, {2, 0}};
  }

  if (const json* j = find(root, "regions")) {
    if (!j->is_array()) schema_err("$.regions", "expected an array");
    for (std::size_t i = 0; i < j->size(); ++i) {
      const json& r = (*j)[i];
      std::string path = "$.regions[" + std::to_string(i) + "]";
      if (!r.is_object()) schema_err(path, "expected an object");
      check_keys(r, path, {"node", "type"});
      const json* node = find(r, "node");
      if (!node) schema_err(path, "missing 'node'");
      SimConfig::Region region;
      region.node = as_coord(*node, path + ".node");
      if (const json* t = find(r, "type")) {
        region.initial_type = as_string(*t, path + ".type");
      }
      cfg.regions.push_back(std::move(region));
    }
  } else {
    cfg.regions = {{{1, 1}, std::nullopt},
                   {{2, 1}, "GCD"},
                   {{1, 2}, "RSA"},
                   {{2, 2}, std::nullopt}};
  }

  if (const json* svc = find(root, "service")) {
    if (!svc->is_object()) schema_err("$.service", "expected an object");
    check_keys(*svc, "$.service",
               {"gcd_base", "gcd_per_iter", "rsa_base", "rsa_mult_cost",
                "t_recfg", "extra_types"});
    if (const json* j = find(*svc, "gcd_base")) {
      cfg.service.gcd_base =
          static_cast<uint32_t>(as_uint(*j, "$.service.gcd_base", 1u << 30));
    }
    if (const json* j = find(*svc, "gcd_per_iter")) {
      cfg.service.gcd_per_iter = static_cast<uint32_t>(
          as_uint(*j, "$.service.gcd_per_iter", 1u << 30));
    }
    if (const json* j = find(*svc, "rsa_base")) {
      cfg.service.rsa_base =
          static_cast<uint32_t>(as_uint(*j, "$.service.rsa_base", 1u << 30));
    }
    if (const json* j = find(*svc, "rsa_mult_cost")) {
      cfg.service.rsa_mult_cost = static_cast<uint32_t>(
          as_uint(*j, "$.service.rsa_mult_cost", 1u << 30));
    }
    if (const json* j = find(*svc, "t_recfg")) {
      cfg.service.t_recfg = as_uint(*j, "$.service.t_recfg", 1ull << 40);
    }
    if (const json* extras = find(*svc, "extra_types")) {
      if (!extras->is_array()) {
        schema_err("$.service.extra_types", "expected an array");
      }
      for (std::size_t i = 0; i < extras->size(); ++i) {
        const json& e = (*extras)[i];
        std::string path = "$.service.extra_types[" + std::to_string(i) + "]";
        if (!e.is_object()) schema_err(path, "expected an object");
        check_keys(e, path, {"name", "kernel", "base", "per_op"});
        SimConfig::ExtraType t;
        const json* name = find(e, "name");
        if (!name) schema_err(path, "missing 'name'");
        t.name = as_string(*name, path + ".name");
        if (const json* k = find(e, "kernel")) {
          std::string ks = as_string(*k, path + ".kernel");
          if (ks == "gcd") {
            t.kernel = ServiceKernel::Gcd;
          } else if (ks == "rsa") {
            t.kernel = ServiceKernel::Rsa;
          } else {
            schema_err(path + ".kernel", "'" + ks + "' is not 'gcd' or 'rsa'");
          }
        }
        if (const json* b = find(e, "base")) {
          t.base = static_cast<uint32_t>(as_uint(*b, path + ".base", 1u << 30));
        }
        if (const json* p = find(e, "per_op")) {
          t.per_op =
              static_cast<uint32_t>(as_uint(*p, path + ".per_op", 1u << 30));
        }
        cfg.extra_types.push_back(std::move(t));
      }
    }
  }

  if (const json* j = find(root, "pe_queue_depth")) {
    cfg.pe_queue_depth =
        static_cast<uint32_t>(as_uint(*j, "$.pe_queue_depth", 1024));
  }

  if (const json* wl = find(root, "workload")) {
    if (!wl->is_object()) schema_err("$.workload", "expected an object");
    check_keys(*wl, "$.workload",
               {"tasks", "mix", "requests", "think", "arrivals",
                "gcd_operands", "rsa_operands", "rsa_modulus",
                "rsa_exponent"});
    if (const json* j = find(*wl, "tasks")) {
      cfg.workload.tasks =
          static_cast<uint32_t>(as_uint(*j, "$.workload.tasks", 4096));
    }
    if (const json* j = find(*wl, "mix")) {
      std::string m = as_string(*j, "$.workload.mix");
      if (m == "gcd_only") {
        cfg.workload.mix = WorkloadMix::GcdOnly;
      } else if (m == "rsa_only") {
        cfg.workload.mix = WorkloadMix::RsaOnly;
      } else if (m == "mixed") {
        cfg.workload.mix = WorkloadMix::Mixed;
      } else {
        schema_err("$.workload.mix",
                   "'" + m + "' is not 'gcd_only', 'rsa_only' or 'mixed'");
      }
    }
    if (const json* j = find(*wl, "requests")) {
      cfg.workload.requests =
          static_cast<uint32_t>(as_uint(*j, "$.workload.requests", 1u << 20));
    }
    if (const json* j = find(*wl, "think")) {
      cfg.workload.think = as_uint(*j, "$.workload.think", 1ull << 40);
    }
    if (const json* j = find(*wl, "arrivals")) {
      if (!j->is_array()) schema_err("$.workload.arrivals", "expected array");
      for (std::size_t i = 0; i < j->size(); ++i) {
        cfg.workload.arrivals.push_back(as_uint(
            (*j)[i], "$.workload.arrivals[" + std::to_string(i) + "]",
            1ull << 40));
      }
    }
    if (const json* j = find(*wl, "gcd_operands")) {
      if (!j->is_array() || j->size() != 2) {
        schema_err("$.workload.gcd_operands", "expected [a, b]");
      }
      cfg.workload.operands.fixed_gcd = {
          static_cast<uint32_t>(
              as_uint((*j)[0], "$.workload.gcd_operands[0]", 0xFFFFFFFFull)),
          static_cast<uint32_t>(
              as_uint((*j)[1], "$.workload.gcd_operands[1]", 0xFFFFFFFFull))};
    }
    if (const json* j = find(*wl, "rsa_operands")) {
      if (!j->is_array() || j->size() != 3) {
        schema_err("$.workload.rsa_operands", "expected [m, e, n]");
      }
      cfg.workload.operands.fixed_rsa = {
          static_cast<uint32_t>(
              as_uint((*j)[0], "$.workload.rsa_operands[0]", 0xFFFFFFFFull)),
          static_cast<uint32_t>(
              as_uint((*j)[1], "$.workload.rsa_operands[1]", 0xFFFFFFFFull)),
          static_cast<uint32_t>(
              as_uint((*j)[2], "$.workload.rsa_operands[2]", 0xFFFFFFFFull))};
    }
    if (const json* j = find(*wl, "rsa_modulus")) {
      cfg.workload.operands.rsa_modulus = static_cast<uint32_t>(
          as_uint(*j, "$.workload.rsa_modulus", 0xFFFFFFFFull));
    }
    if (const json* j = find(*wl, "rsa_exponent")) {
      cfg.workload.operands.rsa_exponent = static_cast<uint32_t>(
          as_uint(*j, "$.workload.rsa_exponent", 0xFFFFFFFFull));
    }
  }

  if (const json* j = find(root, "seed")) {
    cfg.seed = as_uint(*j, "$.seed", ~0ull);
  }
  if (const json* j = find(root, "watchdog")) {
    cfg.watchdog = as_uint(*j, "$.watchdog", ~0ull);
  }
  if (const json* j = find(root, "tag_packets")) {
    cfg.tag_packets = as_bool(*j, "$.tag_packets");
  }
  if (const json* j = find(root, "trace")) {
    cfg.trace_path = as_string(*j, "$.trace");
  }

  // ---- semantic validation ----
  if (cfg.width == 0 || cfg.height == 0 || cfg.width > kMaxMeshDim ||
      cfg.height > kMaxMeshDim) {
    semantic_err("mesh must be between 1x1 and 16x16");
  }
  if (cfg.buffer_depth == 0) semantic_err("buffer_depth must be at least 1");
  if (cfg.pe_queue_depth == 0) {
    semantic_err("pe_queue_depth must be at least 1");
  }
  if (cfg.service.gcd_base == 0 || cfg.service.rsa_base == 0) {
    semantic_err("service base cycles must be at least 1");
  }
  if (cfg.service.t_recfg == 0) semantic_err("t_recfg must be at least 1");
  for (const auto& t : cfg.extra_types) {
    if (t.name.empty()) semantic_err("extra service type with empty name");
    if (t.base == 0) {
      semantic_err("service type '" + t.name + "' has zero base cycles");
    }
  }
  if (cfg.workload.tasks == 0) semantic_err("workload needs at least 1 task");
  if (cfg.workload.requests == 0) {
    semantic_err("each task needs at least 1 request");
  }
  if (!cfg.workload.arrivals.empty() &&
      cfg.workload.arrivals.size() != cfg.workload.tasks) {
    semantic_err("arrivals list must match the task count");
  }
  if (cfg.workload.operands.rsa_modulus < 2) {
    semantic_err("rsa_modulus must be at least 2");
  }
  if (cfg.workload.operands.rsa_exponent == 0) {
    semantic_err("rsa_exponent must be at least 1");
  }
  if (cfg.hosts.empty()) semantic_err("host list is empty");
  if (cfg.regions.empty()) semantic_err("region list is empty");
  if (cfg.watchdog == 0) semantic_err("watchdog must be positive");
  auto in_mesh = [&](MeshCoordinate c) {
    return c.x < cfg.width && c.y < cfg.height;
  };
  if (!in_mesh(cfg.manager)) semantic_err("manager is outside the mesh");
  for (MeshCoordinate h : cfg.hosts) {
    if (!in_mesh(h)) semantic_err("a host is outside the mesh");
  }
  ServiceCatalog catalog = build_catalog(cfg);
  for (const auto& r : cfg.regions) {
    if (!in_mesh(r.node)) semantic_err("a region is outside the mesh");
    if (r.initial_type && !catalog.find(*r.initial_type)) {
      semantic_err("region names unknown service type '" + *r.initial_type +
                   "'");
    }
  }
  return cfg;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SimError(ErrorCode::InvalidConfig,
                   "cannot open config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config_json(const SimConfig& cfg) {
  // Plain nlohmann::json orders keys alphabetically, which makes the dump
  // canonical. Mode, trace destination and packet tagging are observability
  // or comparison axes, not world structure, and stay out.
  json j;
  j["mesh"] = {cfg.width, cfg.height};
  j["buffer_depth"] = cfg.buffer_depth;
  j["policy"] =
      cfg.policy == Policy::ReconfigFirst ? "reconfig_first"
                                          : "virtualize_first";
  j["manager"] = {cfg.manager.x, cfg.manager.y};
  json hosts = json::array();
  for (MeshCoordinate h : cfg.hosts) hosts.push_back({h.x, h.y});
  j["hosts"] = std::move(hosts);
  json regions = json::array();
  for (const auto& r : cfg.regions) {
    json e;
    e["node"] = {r.node.x, r.node.y};
    if (r.initial_type) e["type"] = *r.initial_type;
    regions.push_back(std::move(e));
  }
  j["regions"] = std::move(regions);
  j["service"] = {{"gcd_base", cfg.service.gcd_base},
                  {"gcd_per_iter", cfg.service.gcd_per_iter},
                  {"rsa_base", cfg.service.rsa_base},
                  {"rsa_mult_cost", cfg.service.rsa_mult_cost},
                  {"t_recfg", cfg.service.t_recfg}};
  json extras = json::array();
  for (const auto& t : cfg.extra_types) {
    extras.push_back({{"name", t.name},
                      {"kernel", t.kernel == ServiceKernel::Gcd ? "gcd"
                                                                : "rsa"},
                      {"base", t.base},
                      {"per_op", t.per_op}});
  }
  j["extra_types"] = std::move(extras);
  j["pe_queue_depth"] = cfg.pe_queue_depth;
  json wl;
  wl["tasks"] = cfg.workload.tasks;
  switch (cfg.workload.mix) {
    case WorkloadMix::GcdOnly: wl["mix"] = "gcd_only"; break;
    case WorkloadMix::RsaOnly: wl["mix"] = "rsa_only"; break;
    case WorkloadMix::Mixed: wl["mix"] = "mixed"; break;
  }
  wl["requests"] = cfg.workload.requests;
  wl["think"] = cfg.workload.think;
  wl["arrivals"] = cfg.workload.arrivals;
  if (cfg.workload.operands.fixed_gcd) {
    wl["gcd_operands"] = *cfg.workload.operands.fixed_gcd;
  }
  if (cfg.workload.operands.fixed_rsa) {
    wl["rsa_operands"] = *cfg.workload.operands.fixed_rsa;
  }
  wl["rsa_modulus"] = cfg.workload.operands.rsa_modulus;
  wl["rsa_exponent"] = cfg.workload.operands.rsa_exponent;
  j["workload"] = std::move(wl);
  j["seed"] = cfg.seed;
  j["watchdog"] = cfg.watchdog;
  return j.dump();
}

uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t config_digest(const SimConfig& cfg) {
  std::string canon = canonical_config_json(cfg);
  return fnv1a64(canon.data(), canon.size());
}

std::string config_digest_hex(const SimConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_digest(cfg)));
  return buf;
}

SimPlan to_plan(const SimConfig& cfg) {
  SimPlan plan;
  plan.width = cfg.width;
  plan.height = cfg.height;
  plan.mode = cfg.mode;
  plan.policy = cfg.policy;
  plan.buffer_depth = cfg.buffer_depth;
  plan.pe_queue_depth = cfg.pe_queue_depth;
  plan.service = cfg.service;
  plan.catalog = build_catalog(cfg);
  plan.manager = cfg.manager;
  plan.hosts = cfg.hosts;
  for (const auto& r : cfg.regions) {
    SimPlan::PrrPlan p;
    p.node = r.node;
    if (r.initial_type) {
      p.initial = plan.catalog.find(*r.initial_type);
      if (!p.initial) {
        semantic_err("region names unknown service type '" + *r.initial_type +
                     "'");
      }
    }
    plan.prrs.push_back(p);
  }
  plan.tasks = generate_workload(cfg.workload.tasks, cfg.workload.mix,
                                 cfg.workload.requests, cfg.workload.think,
                                 cfg.workload.arrivals, cfg.seed);
  plan.operands = cfg.workload.operands;
  plan.watchdog = cfg.watchdog;
  plan.tag_packets = cfg.tag_packets;
  return plan;
}

}  // namespace vnoc

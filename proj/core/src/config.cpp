#include "ace/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ace {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  std::size_t used = 0;
  const double out = std::stod(v, &used);
  if (used != v.size()) {
    throw std::invalid_argument("not a number: " + v);
  }
  return out;
}

long long parse_integer(const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("not an integer: " + v);
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(static_cast<T>(parse(item)));
    }
  }
  if (out.empty()) {
    throw std::invalid_argument("empty list");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string format_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Key real_key(Member m) {
  return {[m](RunConfig& c, const std::string& v) { m(c) = parse_double(v); },
          [m](const RunConfig& c) { return format_double(m(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Key int_key(Member m) {
  return {[m](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(m(c))>;
            m(c) = static_cast<T>(parse_integer(v));
          },
          [m](const RunConfig& c) { return std::to_string(m(const_cast<RunConfig&>(c))); }};
}

const std::map<std::string, Key>& registry() {
  static const std::map<std::string, Key> keys = [] {
    std::map<std::string, Key> k;
    k["physics.pr"] = real_key([](RunConfig& c) -> double& { return c.sim.pr; });
    k["physics.ra"] = real_key([](RunConfig& c) -> double& { return c.sim.ra; });
    k["physics.eps_ratio"] = real_key([](RunConfig& c) -> double& { return c.sim.eps_ratio; });
    k["time.dt0"] = real_key([](RunConfig& c) -> double& { return c.sim.dt0; });
    k["time.c_dagger"] = real_key([](RunConfig& c) -> double& { return c.sim.c_dagger; });
    k["time.t_star"] = real_key([](RunConfig& c) -> double& { return c.sim.t_star; });
    k["time.dt_floor"] = real_key([](RunConfig& c) -> double& { return c.sim.dt_floor; });
    k["time.steady_tol"] = real_key([](RunConfig& c) -> double& { return c.sim.steady_tol; });
    k["run.ensemble_size"] = int_key([](RunConfig& c) -> int& { return c.sim.ensemble_size; });
    k["run.mesh_n"] = int_key([](RunConfig& c) -> int& { return c.sim.mesh_n; });
    k["run.seed"] = int_key([](RunConfig& c) -> std::uint64_t& { return c.sim.seed; });
    k["run.jobs"] = int_key([](RunConfig& c) -> int& { return c.sim.jobs; });
    k["solver.gmres_tol"] = real_key([](RunConfig& c) -> double& { return c.sim.gmres.tol; });
    k["solver.gmres_restart"] = int_key([](RunConfig& c) -> int& { return c.sim.gmres.restart; });
    k["solver.gmres_max_iter"] = int_key([](RunConfig& c) -> int& { return c.sim.gmres.max_iter; });
    k["solver.cg_tol"] = real_key([](RunConfig& c) -> double& { return c.sim.cg_tol; });
    k["solver.cg_max_iter"] = int_key([](RunConfig& c) -> int& { return c.sim.cg_max_iter; });
    k["solver.precond_refresh_iterations"] =
        int_key([](RunConfig& c) -> int& { return c.sim.precond_refresh_iterations; });
    k["solver.momentum_preconditioner"] = {
        [](RunConfig& c, const std::string& v) { c.sim.momentum_preconditioner = parse_preconditioner(v); },
        [](const RunConfig& c) { return to_string(c.sim.momentum_preconditioner); }};
    k["solver.temperature_preconditioner"] = {
        [](RunConfig& c, const std::string& v) { c.sim.temperature_preconditioner = parse_preconditioner(v); },
        [](const RunConfig& c) { return to_string(c.sim.temperature_preconditioner); }};

    k["cavity.ra_list"] = {[](RunConfig& c, const std::string& v) {
                             c.cavity.ra_list = parse_list<double>(v, parse_double);
                           },
                           [](const RunConfig& c) { return format_list(c.cavity.ra_list); }};
    k["cavity.max_steps"] = int_key([](RunConfig& c) -> int& { return c.cavity.max_steps; });
    k["cavity.k_star"] = int_key([](RunConfig& c) -> int& { return c.cavity.k_star; });
    k["cavity.reinit_interval"] = real_key([](RunConfig& c) -> double& { return c.cavity.reinit_interval; });
    k["cavity.write_vtk"] = {[](RunConfig& c, const std::string& v) { c.cavity.write_vtk = parse_bool(v); },
                             [](const RunConfig& c) { return std::string(c.cavity.write_vtk ? "true" : "false"); }};

    k["timing.ra_list"] = {[](RunConfig& c, const std::string& v) {
                             c.timing.ra_list = parse_list<double>(v, parse_double);
                           },
                           [](const RunConfig& c) { return format_list(c.timing.ra_list); }};
    k["timing.steps"] = int_key([](RunConfig& c) -> int& { return c.timing.steps; });
    k["timing.large_ra_threshold"] = real_key([](RunConfig& c) -> double& { return c.timing.large_ra_threshold; });
    k["timing.dt_large_ra"] = real_key([](RunConfig& c) -> double& { return c.timing.dt_large_ra; });

    k["convergence.m_list"] = {[](RunConfig& c, const std::string& v) {
                                 c.convergence.m_list = parse_list<int>(v, parse_integer);
                               },
                               [](const RunConfig& c) { return format_list(c.convergence.m_list); }};
    k["convergence.pr"] = real_key([](RunConfig& c) -> double& { return c.convergence.pr; });
    k["convergence.ra"] = real_key([](RunConfig& c) -> double& { return c.convergence.ra; });
    k["convergence.t_star"] = real_key([](RunConfig& c) -> double& { return c.convergence.t_star; });
    k["convergence.eps_ratio"] = real_key([](RunConfig& c) -> double& { return c.convergence.eps_ratio; });
    k["convergence.delta"] = real_key([](RunConfig& c) -> double& { return c.convergence.delta; });

    k["predictability.ra_list"] = {[](RunConfig& c, const std::string& v) {
                                     c.predictability.ra_list = parse_list<double>(v, parse_double);
                                   },
                                   [](const RunConfig& c) { return format_list(c.predictability.ra_list); }};
    k["predictability.pr"] = real_key([](RunConfig& c) -> double& { return c.predictability.pr; });
    k["predictability.t_star"] = real_key([](RunConfig& c) -> double& { return c.predictability.t_star; });
    k["predictability.eps_ratio"] = real_key([](RunConfig& c) -> double& { return c.predictability.eps_ratio; });
    k["predictability.mesh_n"] = int_key([](RunConfig& c) -> int& { return c.predictability.mesh_n; });
    k["predictability.k_star"] = int_key([](RunConfig& c) -> int& { return c.predictability.k_star; });
    k["predictability.reinit_interval"] =
        real_key([](RunConfig& c) -> double& { return c.predictability.reinit_interval; });
    k["predictability.tau_series"] = real_key([](RunConfig& c) -> double& { return c.predictability.tau_series; });
    return k;
  }();
  return keys;
}

}  // namespace

std::string to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::Identity:
      return "none";
    case PreconditionerKind::Jacobi:
      return "jacobi";
    case PreconditionerKind::Ilu0:
      return "ilu0";
    case PreconditionerKind::SparseLu:
      return "sparse_lu";
  }
  return "unknown";
}

PreconditionerKind parse_preconditioner(const std::string& name) {
  if (name == "none") return PreconditionerKind::Identity;
  if (name == "jacobi") return PreconditionerKind::Jacobi;
  if (name == "ilu0") return PreconditionerKind::Ilu0;
  if (name == "sparse_lu") return PreconditionerKind::SparseLu;
  throw std::invalid_argument("unknown preconditioner '" + name + "' (none, jacobi, ilu0, sparse_lu)");
}

void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const auto it = registry().find(dotted_key);
  if (it == registry().end()) {
    throw std::invalid_argument("unknown config key '" + dotted_key + "'");
  }
  try {
    it->second.set(cfg, value);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("bad value for '" + dotted_key + "': " + e.what());
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("value out of range for '" + dotted_key + "'");
  }
}

void apply_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::string where = "config line " + std::to_string(number) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument(where + "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      const std::string prefix = section + ".";
      bool known = false;
      for (const auto& [key, _] : registry()) {
        known = known || key.rfind(prefix, 0) == 0;
      }
      if (!known) {
        throw std::invalid_argument(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(where + "expected key = value");
    }
    if (section.empty()) {
      throw std::invalid_argument(where + "key outside of a section");
    }
    try {
      apply_override(cfg, section + "." + trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file '" + path + "'");
  }
  apply_config(cfg, in);
}

void apply_desk_scale(RunConfig& cfg) {
  cfg.sim.mesh_n = std::min(cfg.sim.mesh_n, 32);
  std::erase_if(cfg.cavity.ra_list, [](double ra) { return ra > 1e5; });
  std::erase_if(cfg.convergence.m_list, [](int m) { return m > 24; });
  cfg.timing.ra_list = {1e4};
}

std::map<std::string, std::string> flatten(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [key, k] : registry()) {
    out[key] = k.get(cfg);
  }
  return out;
}

std::string run_id(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [key, value] : flatten(cfg)) {
    for (char c : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_config_header(std::ostream& out, const RunConfig& cfg) {
  out << "# run_id=" << run_id(cfg) << '\n';
  for (const auto& [key, value] : flatten(cfg)) {
    out << "# " << key << '=' << value << '\n';
  }
}

}  // namespace ace

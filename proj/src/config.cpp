#include "neuropop/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace neuropop {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

using Section = std::map<std::string, std::string>;
using Sections = std::map<std::string, Section>;

Sections read_sections(const std::string& text, const std::string& origin) {
  Sections out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    if (section.empty())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (out[section].count(key))
      throw std::invalid_argument("[" + section + "] " + key + ": duplicate key");
    out[section][key] = trim(line.substr(eq + 1));
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(const Sections& all, const std::string& name) : name_(name) {
    auto it = all.find(name);
    if (it != all.end()) sec_ = &it->second;
  }
  bool present() const { return sec_ != nullptr; }
  bool has(const std::string& key) const { return sec_ && sec_->count(key); }
  std::string str(const std::string& key, const std::string& fallback = "") {
    used_.insert(key);
    if (!has(key)) return fallback;
    return sec_->at(key);
  }
  double num(const std::string& key, double fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return parse_num(key, sec_->at(key));
  }
  double require_num(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw std::invalid_argument("[" + name_ + "] " + key + ": missing required field");
    return parse_num(key, sec_->at(key));
  }
  int integer(const std::string& key, int fallback) {
    const double v = num(key, fallback);
    if (v != std::floor(v))
      throw std::invalid_argument("[" + name_ + "] " + key + ": expected an integer");
    return static_cast<int>(v);
  }
  std::vector<std::pair<double, double>> pair_table(const std::string& key) {
    used_.insert(key);
    std::vector<std::pair<double, double>> out;
    if (!has(key)) return out;
    std::istringstream in(sec_->at(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("[" + name_ + "] " + key + ": expected x:y pairs");
      out.emplace_back(parse_num(key, trim(item.substr(0, colon))),
                       parse_num(key, trim(item.substr(colon + 1))));
    }
    return out;
  }
  void finish() const {
    if (!sec_) return;
    for (const auto& [key, value] : *sec_)
      if (!used_.count(key))
        throw std::invalid_argument("[" + name_ + "] " + key + ": unknown key");
  }

 private:
  double parse_num(const std::string& key, const std::string& value) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw std::invalid_argument("[" + name_ + "] " + key + ": not a number: " + value);
    }
  }
  const Section* sec_ = nullptr;
  std::string name_;
  std::set<std::string> used_;
};

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text, const std::string& origin) {
  const Sections sections = read_sections(text, origin);
  static const std::set<std::string> known = {"model", "firing", "jump", "kernel", "initial",
                                              "grid"};
  for (const auto& [name, _] : sections)
    if (!known.count(name)) throw std::invalid_argument("[" + name + "]: unknown section");
  for (const std::string required : {"model", "firing", "jump", "kernel"})
    if (!sections.count(required))
      throw std::invalid_argument("[" + required + "]: missing required section");

  ParsedConfig cfg;
  ModelSpec& spec = cfg.spec;

  {
    SectionReader model(sections, "model");
    spec.lambda = model.require_num("lambda");
    spec.epsilon = model.num("epsilon", 0.0);
    spec.m_min = model.num("m_min", 0.0);
    cfg.tail_tol = model.num("tail_tol", 1e-8);
    cfg.m_max_given = model.has("m_max");
    if (cfg.m_max_given) spec.m_max = model.require_num("m_max");
    model.finish();
    if (!(spec.lambda > 0.0))
      throw std::invalid_argument("[model] lambda: must be positive (drift rate)");
    if (!(cfg.tail_tol > 0.0))
      throw std::invalid_argument("[model] tail_tol: must be positive");
  }

  {
    SectionReader firing(sections, "firing");
    const std::string kind = firing.str("kind", "constant");
    FiringRate& f = spec.firing;
    if (kind == "constant") {
      f.kind = FiringKind::constant;
      f.f_max = firing.require_num("f_max");
      f.sigma = firing.num("sigma", f.f_max);
      f.delta_abs = firing.num("delta_abs", 0.0);
      if (f.sigma != f.f_max)
        throw std::invalid_argument("[firing] sigma: constant preset has sigma = f_max");
    } else if (kind == "sigmoid_adaptive" || kind == "sigmoid_age") {
      f.kind = kind == "sigmoid_adaptive" ? FiringKind::sigmoid_adaptive
                                          : FiringKind::sigmoid_age;
      f.f_max = firing.require_num("f_max");
      f.sigma = firing.require_num("sigma");
      f.beta = firing.require_num("beta");
      f.delta_abs = firing.num("delta_abs", 0.0);
      f.eta_amplitude = firing.num("eta_amplitude", 0.0);
      f.eta_tau = firing.num("eta_tau", 1.0);
    } else if (kind == "tabulated") {
      f.kind = FiringKind::tabulated;
      f.table = firing.pair_table("table");
      if (f.table.size() < 2)
        throw std::invalid_argument("[firing] table: need at least two u:f pairs");
      for (std::size_t i = 1; i < f.table.size(); ++i)
        if (f.table[i].first <= f.table[i - 1].first)
          throw std::invalid_argument("[firing] table: u values must increase");
      double lo = f.table.front().second, hi = lo;
      for (const auto& p : f.table) {
        lo = std::min(lo, p.second);
        hi = std::max(hi, p.second);
      }
      f.sigma = firing.num("sigma", lo);
      f.f_max = firing.num("f_max", hi);
      if (f.sigma > lo || f.f_max < hi)
        throw std::invalid_argument("[firing] table: values outside [sigma, f_max]");
      f.delta_abs = firing.num("delta_abs", 0.0);
      f.eta_amplitude = firing.num("eta_amplitude", 0.0);
      f.eta_tau = firing.num("eta_tau", 1.0);
    } else {
      throw std::invalid_argument("[firing] kind: unknown preset " + kind);
    }
    firing.finish();
    if (!(f.sigma > 0.0))
      throw std::invalid_argument("[firing] sigma: rate floor must be positive");
    if (f.f_max < f.sigma)
      throw std::invalid_argument("[firing] f_max: must be >= sigma");
    if (f.delta_abs < 0.0)
      throw std::invalid_argument("[firing] delta_abs: must be nonnegative");
    if (f.eta_tau <= 0.0)
      throw std::invalid_argument("[firing] eta_tau: must be positive");
  }

  {
    SectionReader jump(sections, "jump");
    const std::string kind = jump.str("kind", "additive");
    JumpMap& j = spec.jump;
    if (kind == "additive") {
      j.kind = JumpKind::additive;
      j.gamma_hat = jump.require_num("gamma_hat");
      if (j.gamma_hat < 0.0)
        throw std::invalid_argument("[jump] gamma_hat: Gamma > 0 required (got negative)");
    } else if (kind == "depression") {
      j.kind = JumpKind::depression;
      j.upsilon = jump.require_num("upsilon");
      if (!(j.upsilon > 0.0 && j.upsilon < 1.0))
        throw std::invalid_argument("[jump] upsilon: must lie in (0,1)");
    } else if (kind == "custom") {
      j.kind = JumpKind::custom;
      j.table = jump.pair_table("table");
      if (j.table.size() < 2 || j.table.front().first != 0.0)
        throw std::invalid_argument("[jump] table: need m:gamma pairs starting at m = 0");
      for (std::size_t i = 1; i < j.table.size(); ++i) {
        const double dm = j.table[i].first - j.table[i - 1].first;
        const double dg = j.table[i].second - j.table[i - 1].second;
        if (dm <= 0.0) throw std::invalid_argument("[jump] table: m values must increase");
        const double slope = dg / dm;
        if (!(slope > 0.0 && slope <= 1.0 + 1e-12))
          throw std::invalid_argument("[jump] table: slopes must lie in (0, 1]");
      }
      for (const auto& p : j.table)
        if (!(p.second > p.first))
          throw std::invalid_argument("[jump] table: Gamma = gamma(m) - m must stay positive");
    } else {
      throw std::invalid_argument("[jump] kind: unknown preset " + kind);
    }
    jump.finish();
  }

  {
    SectionReader kernel(sections, "kernel");
    const std::string kind = kernel.str("kind", "exponential");
    if (kind == "exponential")
      spec.kernel.kind = KernelKind::exponential;
    else if (kind == "exponential_depression")
      spec.kernel.kind = KernelKind::exponential_depression;
    else
      throw std::invalid_argument("[kernel] kind: unknown preset " + kind);
    spec.kernel.amplitude = kernel.require_num("amplitude");
    spec.kernel.decay = kernel.require_num("decay");
    kernel.finish();
    if (!(spec.kernel.amplitude > 0.0))
      throw std::invalid_argument("[kernel] amplitude: must be positive");
    if (!(spec.kernel.decay > 0.0))
      throw std::invalid_argument("[kernel] decay: must be positive");
  }

  {
    SectionReader initial(sections, "initial");
    cfg.initial.kind = initial.str("kind", "gaussian");
    cfg.initial.a0 = initial.num("a0", 1.0);
    cfg.initial.a_sigma = initial.num("a_sigma", 0.5);
    cfg.initial.m0 = initial.num("m0", 0.0);
    cfg.initial.m_sigma = initial.num("m_sigma", 0.25);
    initial.finish();
    if (cfg.initial.kind != "gaussian" && cfg.initial.kind != "dirac")
      throw std::invalid_argument("[initial] kind: unknown preset " + cfg.initial.kind);
  }

  {
    SectionReader grid(sections, "grid");
    cfg.grid.a_max = grid.num("a_max", -1.0);
    cfg.grid.n_a = grid.integer("n_a", -1);
    cfg.grid.n_m = grid.integer("n_m", -1);
    cfg.grid.spacing = grid.str("spacing", "uniform");
    cfg.grid.m_min = grid.num("m_min", -1.0);
    grid.finish();
    if (cfg.grid.spacing != "uniform" && cfg.grid.spacing != "geometric")
      throw std::invalid_argument("[grid] spacing: must be uniform or geometric");
  }

  // domain bound and assumption notes
  if (spec.m_domain_is_compact()) {
    if (cfg.m_max_given && std::abs(spec.m_max - 1.0) > 1e-12)
      throw std::invalid_argument("[model] m_max: depression preset fixes m_max = 1");
    spec.m_max = 1.0;
    cfg.notes.push_back("assumption 4 (compact domain): satisfied with G = 1");
  } else if (!cfg.m_max_given) {
    spec.m_max = suggested_m_max(spec, cfg.tail_tol);
    cfg.notes.push_back("m_max = " + fmt_num(spec.m_max) +
                        " chosen so the Lyapunov-drift tail bound is below " +
                        fmt_num(cfg.tail_tol));
  }
  if (spec.m_min != 0.0 && spec.m_min < 0.0)
    throw std::invalid_argument("[model] m_min: must be nonnegative");
  if (spec.m_max <= spec.m_min)
    throw std::invalid_argument("[model] m_max: must exceed m_min");

  cfg.notes.push_back("assumption 1: f bounded by " + fmt_num(spec.firing.f_max) +
                      ", Lipschitz constant " + fmt_num(spec.firing.lipschitz()) +
                      (spec.firing.delta_abs > 0.0 ? " (smooth branch a >= delta_abs)" : ""));
  if (spec.jump.gamma_sup() > 0.0)
    cfg.notes.push_back("assumption 2: |Gamma|_inf = " + fmt_num(spec.jump.gamma_sup()));
  else
    cfg.notes.push_back("assumption 2 degenerate: Gamma = 0 (1D time-elapsed preset)");
  cfg.notes.push_back("assumption 3: sigma = " + fmt_num(spec.firing.sigma) +
                      ", delta_abs = " + fmt_num(spec.firing.delta_abs) +
                      ", C_gamma = " + fmt_num(spec.jump.c_gamma()) +
                      ", |hbar|_inf = " + fmt_num(spec.kernel.hbar_sup()));
  cfg.notes.push_back("assumption 5: h(t) = " + fmt_num(spec.kernel.amplitude) +
                      " * exp(-" + fmt_num(spec.kernel.decay) + " t) by construction");
  if (spec.jump.kind == JumpKind::depression &&
      spec.kernel.kind != KernelKind::exponential_depression)
    cfg.notes.push_back("note: depression jump map without the (1-m) kernel factor");
  return cfg;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ParsedConfig& cfg) {
  std::ostringstream out;
  const ModelSpec& s = cfg.spec;
  out << "[model]\n";
  out << "lambda = " << fmt_num(s.lambda) << "\n";
  out << "epsilon = " << fmt_num(s.epsilon) << "\n";
  out << "m_min = " << fmt_num(s.m_min) << "\n";
  out << "m_max = " << fmt_num(s.m_max) << "\n";
  out << "tail_tol = " << fmt_num(cfg.tail_tol) << "\n";

  out << "\n[firing]\n";
  const FiringRate& f = s.firing;
  switch (f.kind) {
    case FiringKind::constant:
      out << "kind = constant\n";
      out << "f_max = " << fmt_num(f.f_max) << "\n";
      out << "delta_abs = " << fmt_num(f.delta_abs) << "\n";
      break;
    case FiringKind::sigmoid_adaptive:
    case FiringKind::sigmoid_age:
      out << "kind = " << (f.kind == FiringKind::sigmoid_adaptive ? "sigmoid_adaptive"
                                                                  : "sigmoid_age")
          << "\n";
      out << "f_max = " << fmt_num(f.f_max) << "\n";
      out << "sigma = " << fmt_num(f.sigma) << "\n";
      out << "beta = " << fmt_num(f.beta) << "\n";
      out << "delta_abs = " << fmt_num(f.delta_abs) << "\n";
      out << "eta_amplitude = " << fmt_num(f.eta_amplitude) << "\n";
      out << "eta_tau = " << fmt_num(f.eta_tau) << "\n";
      break;
    case FiringKind::tabulated: {
      out << "kind = tabulated\n";
      out << "sigma = " << fmt_num(f.sigma) << "\n";
      out << "f_max = " << fmt_num(f.f_max) << "\n";
      out << "delta_abs = " << fmt_num(f.delta_abs) << "\n";
      out << "eta_amplitude = " << fmt_num(f.eta_amplitude) << "\n";
      out << "eta_tau = " << fmt_num(f.eta_tau) << "\n";
      out << "table = ";
      for (std::size_t i = 0; i < f.table.size(); ++i)
        out << (i ? "," : "") << fmt_num(f.table[i].first) << ":" << fmt_num(f.table[i].second);
      out << "\n";
      break;
    }
  }

  out << "\n[jump]\n";
  switch (s.jump.kind) {
    case JumpKind::additive:
      out << "kind = additive\ngamma_hat = " << fmt_num(s.jump.gamma_hat) << "\n";
      break;
    case JumpKind::depression:
      out << "kind = depression\nupsilon = " << fmt_num(s.jump.upsilon) << "\n";
      break;
    case JumpKind::custom: {
      out << "kind = custom\ntable = ";
      for (std::size_t i = 0; i < s.jump.table.size(); ++i)
        out << (i ? "," : "") << fmt_num(s.jump.table[i].first) << ":"
            << fmt_num(s.jump.table[i].second);
      out << "\n";
      break;
    }
  }

  out << "\n[kernel]\n";
  out << "kind = "
      << (s.kernel.kind == KernelKind::exponential ? "exponential" : "exponential_depression")
      << "\n";
  out << "amplitude = " << fmt_num(s.kernel.amplitude) << "\n";
  out << "decay = " << fmt_num(s.kernel.decay) << "\n";

  out << "\n[initial]\n";
  out << "kind = " << cfg.initial.kind << "\n";
  out << "a0 = " << fmt_num(cfg.initial.a0) << "\n";
  out << "a_sigma = " << fmt_num(cfg.initial.a_sigma) << "\n";
  out << "m0 = " << fmt_num(cfg.initial.m0) << "\n";
  out << "m_sigma = " << fmt_num(cfg.initial.m_sigma) << "\n";

  if (cfg.grid.a_max > 0 || cfg.grid.n_a > 0 || cfg.grid.n_m > 0) {
    out << "\n[grid]\n";
    if (cfg.grid.a_max > 0) out << "a_max = " << fmt_num(cfg.grid.a_max) << "\n";
    if (cfg.grid.n_a > 0) out << "n_a = " << cfg.grid.n_a << "\n";
    if (cfg.grid.n_m > 0) out << "n_m = " << cfg.grid.n_m << "\n";
    out << "spacing = " << cfg.grid.spacing << "\n";
    if (cfg.grid.m_min > 0) out << "m_min = " << fmt_num(cfg.grid.m_min) << "\n";
  }
  return out.str();
}

std::string config_hash_hex(const std::string& text) {
  const Sections sections = read_sections(text, "<hash>");
  std::vector<std::string> lines;
  for (const auto& [name, sec] : sections)
    for (const auto& [key, value] : sec) lines.push_back(name + "." + key + "=" + value);
  std::sort(lines.begin(), lines.end());
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const std::string& line : lines)
    for (const char c : line) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridSpec grid_from_config(const ParsedConfig& cfg) {
  const ModelSpec& s = cfg.spec;
  const double a_max = cfg.grid.a_max > 0.0
                           ? cfg.grid.a_max
                           : s.firing.delta_abs + 10.0 / s.firing.sigma;
  const int n_a = cfg.grid.n_a > 0 ? cfg.grid.n_a : 400;
  const int n_m = cfg.grid.n_m > 0 ? cfg.grid.n_m : 100;
  const MSpacing spacing =
      cfg.grid.spacing == "geometric" ? MSpacing::geometric : MSpacing::uniform;
  const double m_min = cfg.grid.m_min >= 0.0 ? cfg.grid.m_min : s.m_min;
  GridSpec g = make_grid(a_max, n_a, m_min, s.m_max, n_m, spacing);
  g.validate(s);
  return g;
}

}  // namespace neuropop

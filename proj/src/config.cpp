#include "topo/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace topo {

std::string to_string(FiltrationKind k) { return k == FiltrationKind::Ricci ? "ricci" : "degree"; }

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw config_error("bad number for " + key + ": '" + v + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw config_error("bad integer for " + key + ": '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("bad boolean for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Declaration order is the file order.
const std::vector<std::pair<std::string, Field>>& fields() {
  using C = RunConfig;
  using S = const std::string;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"edges", {[](C& c, S&, S& v) { c.edges = v; }, [](const C& c) { return c.edges.string(); }}},
      {"features", {[](C& c, S&, S& v) { c.features = v; }, [](const C& c) { return c.features.string(); }}},
      {"labels", {[](C& c, S&, S& v) { c.labels = v; }, [](const C& c) { return c.labels.string(); }}},
      {"lcc", {[](C& c, S& k, S& v) { c.lcc = parse_bool(k, v); }, [](const C& c) { return std::string(c.lcc ? "true" : "false"); }}},
      {"filtration",
       {[](C& c, S& k, S& v) {
          if (v == "ricci") c.filtration = FiltrationKind::Ricci;
          else if (v == "degree") c.filtration = FiltrationKind::Degree;
          else throw config_error("bad value for " + k + ": '" + v + "' (ricci|degree)");
        },
        [](const C& c) { return to_string(c.filtration); }}},
      {"ego_radius",
       {[](C& c, S& k, S& v) { c.ego_radius = static_cast<unsigned>(parse_uint(k, v)); },
        [](const C& c) { return std::to_string(c.ego_radius); }}},
      {"alpha", {[](C& c, S& k, S& v) { c.alpha = parse_double(k, v); }, [](const C& c) { return fmt_double(c.alpha); }}},
      {"resolution",
       {[](C& c, S& k, S& v) { c.pi.resolution = parse_double(k, v); }, [](const C& c) { return fmt_double(c.pi.resolution); }}},
      {"sigma", {[](C& c, S& k, S& v) { c.pi.sigma = parse_double(k, v); }, [](const C& c) { return fmt_double(c.pi.sigma); }}},
      {"quadrature",
       {[](C& c, S& k, S& v) {
          if (v == "integral") c.pi.quadrature = PixelQuadrature::CellIntegral;
          else if (v == "center") c.pi.quadrature = PixelQuadrature::CellCenter;
          else throw config_error("bad value for " + k + ": '" + v + "' (integral|center)");
        },
        [](const C& c) { return std::string(c.pi.quadrature == PixelQuadrature::CellIntegral ? "integral" : "center"); }}},
      {"delta",
       {[](C& c, S& k, S& v) { c.mining.delta = static_cast<std::uint32_t>(parse_uint(k, v)); },
        [](const C& c) { return std::to_string(c.mining.delta); }}},
      {"epsilon_mode",
       {[](C& c, S& k, S& v) {
          const double x = std::visit([](const auto& e) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(e)>, QuantileEpsilon>) return e.q;
            else return e.value;
          }, c.mining.epsilon);
          if (v == "quantile") c.mining.epsilon = QuantileEpsilon{x};
          else if (v == "absolute") c.mining.epsilon = AbsoluteEpsilon{x};
          else throw config_error("bad value for " + k + ": '" + v + "' (quantile|absolute)");
        },
        [](const C& c) { return std::string(std::holds_alternative<QuantileEpsilon>(c.mining.epsilon) ? "quantile" : "absolute"); }}},
      {"epsilon",
       {[](C& c, S& k, S& v) {
          const double x = parse_double(k, v);
          if (auto* q = std::get_if<QuantileEpsilon>(&c.mining.epsilon)) q->q = x;
          else std::get<AbsoluteEpsilon>(c.mining.epsilon).value = x;
        },
        [](const C& c) {
          if (const auto* q = std::get_if<QuantileEpsilon>(&c.mining.epsilon)) return fmt_double(q->q);
          return fmt_double(std::get<AbsoluteEpsilon>(c.mining.epsilon).value);
        }}},
      {"max_pairs_per_node",
       {[](C& c, S& k, S& v) { c.mining.max_pairs_per_node = parse_uint(k, v); },
        [](const C& c) { return std::to_string(c.mining.max_pairs_per_node); }}},
      {"candidates",
       {[](C& c, S& k, S& v) {
          if (v == "exhaustive") c.mining.candidates = ExhaustiveCandidates{};
          else if (v == "sampled") {
            if (!std::holds_alternative<SampledCandidates>(c.mining.candidates)) c.mining.candidates = SampledCandidates{};
          }
          else throw config_error("bad value for " + k + ": '" + v + "' (exhaustive|sampled)");
        },
        [](const C& c) { return std::string(std::holds_alternative<ExhaustiveCandidates>(c.mining.candidates) ? "exhaustive" : "sampled"); }}},
      {"candidate_k",
       {[](C& c, S& k, S& v) {
          const auto x = parse_uint(k, v);
          if (auto* s = std::get_if<SampledCandidates>(&c.mining.candidates)) s->k = x;
        },
        [](const C& c) {
          const auto* s = std::get_if<SampledCandidates>(&c.mining.candidates);
          return std::to_string(s ? s->k : SampledCandidates{}.k);
        }}},
      {"hidden_dim",
       {[](C& c, S& k, S& v) { c.train.hidden_dim = static_cast<Eigen::Index>(parse_uint(k, v)); },
        [](const C& c) { return std::to_string(c.train.hidden_dim); }}},
      {"lambda", {[](C& c, S& k, S& v) { c.train.lambda = parse_double(k, v); }, [](const C& c) { return fmt_double(c.train.lambda); }}},
      {"tau", {[](C& c, S& k, S& v) { c.train.tau = parse_double(k, v); }, [](const C& c) { return fmt_double(c.train.tau); }}},
      {"epochs", {[](C& c, S& k, S& v) { c.train.epochs = parse_uint(k, v); }, [](const C& c) { return std::to_string(c.train.epochs); }}},
      {"patience", {[](C& c, S& k, S& v) { c.train.patience = parse_uint(k, v); }, [](const C& c) { return std::to_string(c.train.patience); }}},
      {"min_improvement",
       {[](C& c, S& k, S& v) { c.train.min_improvement = parse_double(k, v); },
        [](const C& c) { return fmt_double(c.train.min_improvement); }}},
      {"learning_rate",
       {[](C& c, S& k, S& v) { c.train.learning_rate = parse_double(k, v); },
        [](const C& c) { return fmt_double(c.train.learning_rate); }}},
      {"weight_decay",
       {[](C& c, S& k, S& v) { c.train.weight_decay = parse_double(k, v); },
        [](const C& c) { return fmt_double(c.train.weight_decay); }}},
      {"negatives_per_pair",
       {[](C& c, S& k, S& v) { c.train.negatives_per_pair = parse_uint(k, v); },
        [](const C& c) { return std::to_string(c.train.negatives_per_pair); }}},
      {"dropout", {[](C& c, S& k, S& v) { c.train.dropout = parse_double(k, v); }, [](const C& c) { return fmt_double(c.train.dropout); }}},
      {"ssl_form",
       {[](C& c, S& k, S& v) {
          if (v == "infonce") c.train.ssl_form = gcn::SslForm::InfoNCE;
          else if (v == "literal") c.train.ssl_form = gcn::SslForm::Literal;
          else throw config_error("bad value for " + k + ": '" + v + "' (infonce|literal)");
        },
        [](const C& c) { return std::string(c.train.ssl_form == gcn::SslForm::InfoNCE ? "infonce" : "literal"); }}},
      {"weight_pairs",
       {[](C& c, S& k, S& v) { c.train.weight_pairs = parse_bool(k, v); },
        [](const C& c) { return std::string(c.train.weight_pairs ? "true" : "false"); }}},
      {"train_per_class",
       {[](C& c, S& k, S& v) { c.train_per_class = parse_uint(k, v); }, [](const C& c) { return std::to_string(c.train_per_class); }}},
      {"val_size", {[](C& c, S& k, S& v) { c.val_size = parse_uint(k, v); }, [](const C& c) { return std::to_string(c.val_size); }}},
      {"test_size", {[](C& c, S& k, S& v) { c.test_size = parse_uint(k, v); }, [](const C& c) { return std::to_string(c.test_size); }}},
      {"bias_budget",
       {[](C& c, S& k, S& v) { c.bias_budget = parse_uint(k, v); }, [](const C& c) { return std::to_string(c.bias_budget); }}},
      {"output_dir", {[](C& c, S&, S& v) { c.output_dir = v; }, [](const C& c) { return c.output_dir.string(); }}},
      {"seed",
       {[](C& c, S& k, S& v) {
          c.seed = parse_uint(k, v);
          c.mining.seed = c.seed;
          c.train.seed = c.seed;
        },
        [](const C& c) { return std::to_string(c.seed); }}},
      {"threads",
       {[](C& c, S& k, S& v) {
          c.threads = static_cast<unsigned>(parse_uint(k, v));
          c.mining.threads = c.threads;
        },
        [](const C& c) { return std::to_string(c.threads); }}},
      {"reproducible",
       {[](C& c, S& k, S& v) { c.reproducible = parse_bool(k, v); },
        [](const C& c) { return std::string(c.reproducible ? "true" : "false"); }}},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return f;
  throw config_error("unknown config key '" + key + "'");
}

std::string hash_keys(const RunConfig& c, std::initializer_list<const char*> keys) {
  Hasher h;
  for (const char* k : keys) h.str(k).str(field(k).get(c));
  return hex64(h.digest());
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, key, value); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [name, f] : fields()) out << name << '=' << f.get(*this) << '\n';
  return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  // epsilon_mode must be applied before epsilon, wherever it appears.
  std::vector<std::pair<std::string, std::string>> entries;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  std::stable_partition(entries.begin(), entries.end(), [](const auto& e) {
    return e.first == "epsilon_mode" || e.first == "candidates";
  });
  for (const auto& [k, v] : entries) c.set(k, v);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  out << to_text();
}

void RunConfig::validate() const {
  if (ego_radius < 1) throw config_error("ego_radius must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw config_error("alpha must lie in [0, 1)");
  pi.grid();
  if (pi.sigma < 0) throw config_error("sigma must be >= 0");
  mining.validate();
  train.validate();
  if (train_per_class == 0) throw config_error("train_per_class must be >= 1");
  if (bias_budget == 0) throw config_error("bias_budget must be >= 1");
}

std::string RunConfig::extract_hash() const {
  return hash_keys(*this, {"edges", "lcc", "filtration", "ego_radius", "alpha", "resolution", "sigma", "quadrature"});
}

std::string RunConfig::mine_hash() const {
  Hasher h;
  h.str(extract_hash());
  h.str(hash_keys(*this, {"delta", "epsilon_mode", "epsilon", "max_pairs_per_node", "candidates", "candidate_k", "seed"}));
  return hex64(h.digest());
}

std::string RunConfig::train_hash() const {
  Hasher h;
  h.str(mine_hash());
  h.str(hash_keys(*this, {"features", "labels", "hidden_dim", "lambda", "tau", "epochs", "patience", "min_improvement",
                          "learning_rate", "weight_decay", "negatives_per_pair", "dropout", "ssl_form", "weight_pairs",
                          "train_per_class", "val_size", "test_size"}));
  return hex64(h.digest());
}

SweepSpec SweepSpec::defaults(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Delta: return {axis, {"3", "4", "5"}};
    case SweepAxis::Lambda: return {axis, {"0.1", "0.3", "0.5", "0.7", "0.9", "1"}};
    case SweepAxis::Resolution: return {axis, {"0.05", "0.1"}};
    case SweepAxis::Filtration: return {axis, {"ricci", "degree"}};
  }
  throw config_error("unknown sweep axis");
}

SweepAxis SweepSpec::parse_axis(const std::string& name) {
  if (name == "delta") return SweepAxis::Delta;
  if (name == "lambda") return SweepAxis::Lambda;
  if (name == "resolution") return SweepAxis::Resolution;
  if (name == "filtration") return SweepAxis::Filtration;
  throw config_error("unknown sweep axis '" + name + "' (delta|lambda|resolution|filtration)");
}

std::string SweepSpec::axis_key() const {
  switch (axis) {
    case SweepAxis::Delta: return "delta";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::Resolution: return "resolution";
    case SweepAxis::Filtration: return "filtration";
  }
  return "";
}

}  // namespace topo

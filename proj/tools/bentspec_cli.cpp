// Command-line front end: exposes the solvers and sweeps, reads flat
// key=value config files (flags override the file), and writes deterministic
// json/csv/svg artifacts named <command>-<hash-of-config>.<ext>.
//
// Exit codes: 0 success, 2 invalid usage or parameters, 3 numerical failure.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bentspec/io.hpp"

namespace fs = std::filesystem;
using namespace bentspec;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Flat config file: one `key = value` per line, `#` starts a comment.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("config: cannot read " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error("config: line " + std::to_string(lineno) +
                             " is not `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw validation_error("config: empty key on line " + std::to_string(lineno));
    if (!kv.emplace(key, value).second)
      throw validation_error("config: duplicate key " + key);
  }
  return kv;
}

/// `start:stop:step` inclusive of both ends within 1e-12, or a comma list.
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
        !(is >> std::ws).eof())
      throw validation_error("thetas: expected start:stop:step, got " + s);
    if (!(step > 0.0)) throw validation_error("thetas: step must be positive");
    for (int i = 0;; ++i) {
      const double v = a + i * step;
      if (v > b + 1e-12) break;
      out.push_back(std::min(v, b));
    }
  } else {
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(trim(tok)));
  }
  if (out.empty()) throw validation_error("thetas: empty grid");
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      out.push_back(std::stod(trim(tok)));
    } catch (const std::exception&) {
      throw validation_error(std::string(what) + ": bad number " + tok);
    }
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s, const char* what) {
  std::vector<int> out;
  for (double v : parse_doubles(s, what)) out.push_back(static_cast<int>(v));
  return out;
}

// Tracks the effective value of every semantic option so it can be embedded
// in the JSON output and hashed into the artifact name.
struct OptionBook {
  CLI::App* cmd;
  std::map<std::string, std::function<std::string()>> values;

  CLI::Option* add(const std::string& name, double& var, const std::string& d) {
    values[name] = [&var] { return fmt17(var); };
    return opt(cmd->add_option("--" + name, var, d));
  }
  CLI::Option* add(const std::string& name, int& var, const std::string& d) {
    values[name] = [&var] { return std::to_string(var); };
    return opt(cmd->add_option("--" + name, var, d));
  }
  CLI::Option* add(const std::string& name, std::uint64_t& var,
                   const std::string& d) {
    values[name] = [&var] { return std::to_string(var); };
    return opt(cmd->add_option("--" + name, var, d));
  }
  CLI::Option* add(const std::string& name, std::string& var,
                   const std::string& d) {
    values[name] = [&var] { return var; };
    return opt(cmd->add_option("--" + name, var, d));
  }
  CLI::Option* add_flag(const std::string& name, bool& var,
                        const std::string& d) {
    values[name] = [&var] { return var ? "1" : "0"; };
    return opt(cmd->add_flag("--" + name, var, d));
  }
  static CLI::Option* opt(CLI::Option* o) {
    return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  json config_json() const {
    json j;
    for (const auto& [k, get] : values) j[k] = get();
    return j;
  }
  std::string canonical(const std::string& command) const {
    std::ostringstream os;
    os << "command=" << command << "\n";
    for (const auto& [k, get] : values) os << k << "=" << get() << "\n";
    return os.str();
  }
};

struct Output {
  std::string out_dir = ".";
  std::string formats = "json,csv,svg";

  bool wants(const std::string& fmt) const {
    return ("," + formats + ",").find("," + fmt + ",") != std::string::npos;
  }
};

struct Artifacts {
  fs::path base;
  std::vector<fs::path> written;

  void emit(const Output& out, const std::string& ext, const std::string& body) {
    if (!out.wants(ext)) return;
    fs::path p = base;
    p += "." + ext;
    write_atomic(p, body);
    written.push_back(p);
  }
};

void print_summary(const std::string& command, const Spectrum& s,
                   const Artifacts& art) {
  std::ostringstream os;
  os << command << ": threshold=" << fmt17(s.threshold)
     << " count=" << s.certified_count << " lambda1="
     << (s.eigenvalues.empty() ? std::string("n/a") : fmt17(s.eigenvalues[0]));
  for (const auto& p : art.written) os << " -> " << p.string();
  std::puts(os.str().c_str());
}

struct Solver {
  int k = 8;
  double tol = 1e-8;
  std::uint64_t seed = 0x5EED;
  double grading = 1.15;
  int refine = 0;

  void attach(OptionBook& book) {
    book.add("k", k, "eigenpairs to resolve")->check(CLI::PositiveNumber);
    book.add("tol", tol, "eigensolver residual tolerance");
    book.add("seed", seed, "eigensolver start-vector seed");
    book.add("grading", grading, "geometric mesh grading away from the corner");
    book.add("refine", refine, "uniform refinement levels")
        ->check(CLI::NonNegativeNumber);
  }
  SolveOptions options() const {
    SolveOptions o;
    o.k = k;
    o.tol = tol;
    o.seed = seed;
    o.grading = grading;
    o.refine_levels = refine;
    return o;
  }
};

struct Command {
  std::string name;
  CLI::App* app;
  OptionBook book;
  std::function<void(const Output&)> run;
};

/// Embed the effective config, write the requested artifacts under the
/// deterministic config-hash name, print the one-line summary.
void finish(Command& c, const json& payload, const Spectrum* s,
            const Output& out, const std::string& csv = "",
            const std::string& svg = "") {
  json j = payload;
  j["config"] = c.book.config_json();
  j["config"]["command"] = c.name;
  Artifacts art;
  art.base = fs::path(out.out_dir) /
             (c.name + "-" + hex16(fnv1a(c.book.canonical(c.name))));
  art.emit(out, "json", j.dump(2) + "\n");
  if (!csv.empty()) art.emit(out, "csv", csv);
  if (!svg.empty()) art.emit(out, "svg", svg);
  if (s) {
    print_summary(c.name, *s, art);
    return;
  }
  std::ostringstream os;
  os << c.name << ":";
  if (j.contains("value")) os << " value=" << fmt17(j["value"].get<double>());
  if (j.contains("nonmonotone"))
    os << " narrow_count=" << j["narrow"]["certified_count"].get<int>()
       << " wide_count=" << j["wide"]["certified_count"].get<int>()
       << " nonmonotone=" << (j["nonmonotone"].get<bool>() ? 1 : 0);
  if (j.contains("all_pass"))
    os << " all_pass=" << (j["all_pass"].get<bool>() ? 1 : 0);
  for (const auto& p : art.written) os << " -> " << p.string();
  std::puts(os.str().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete spectra of the Dirichlet Laplacian in bent guides, "
               "conical and polyhedral layers of unit width"};
  app.require_subcommand(0, 1);

  Output output;
  app.add_option("--out-dir", output.out_dir, "artifact directory")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--formats", output.formats,
                 "comma list of artifact formats (json,csv,svg)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::vector<Command> commands;
  commands.reserve(8);
  auto make = [&](const std::string& name, const std::string& desc) -> Command& {
    commands.push_back({});
    Command& c = commands.back();
    c.name = name;
    c.app = app.add_subcommand(name, desc);
    c.app->fallthrough();  // lets --out-dir / --formats follow the command
    // -h is the mesh-size option on every command, so help is long-form only.
    c.app->set_help_flag("--help", "print this help message and exit");
    c.book.cmd = c.app;
    // Consumed in the pre-scan; registered here only so parsing accepts it.
    c.app->add_option("--config",
                      "flat key = value config file; flags override it");
    return c;
  };

  // --- vguide ---------------------------------------------------------------
  {
    Command& c = make("vguide", "V-shaped waveguide spectrum");
    auto th = std::make_shared<double>(0.0);
    auto L = std::make_shared<double>(4.0);
    auto h = std::make_shared<double>(0.05);
    auto sol = std::make_shared<Solver>();
    c.book.add("theta", *th, "half-opening angle in (0, pi/2]")->required();
    c.book.add("L", *L, "truncation half-length");
    c.book.add("h", *h, "target mesh size");
    sol->attach(c.book);
    c.run = [&c, th, L, h, sol](const Output& out) {
      const Spectrum s = solve_vguide(*th, *L, *h, sol->k, sol->options());
      finish(c, to_json(s), &s, out);
    };
  }

  // --- cone -----------------------------------------------------------------
  {
    Command& c = make("cone", "conical layer spectrum (Fourier modes)");
    auto th = std::make_shared<double>(0.0);
    auto rmax = std::make_shared<double>(20.0);
    auto h = std::make_shared<double>(0.05);
    auto modes = std::make_shared<std::string>("0,1,2");
    auto sol = std::make_shared<Solver>();
    c.book.add("theta", *th, "half-opening angle in (0, pi/2]")->required();
    c.book.add("r-max", *rmax, "radial truncation");
    c.book.add("h", *h, "target mesh size");
    c.book.add("modes", *modes, "comma list of Fourier indices");
    sol->attach(c.book);
    c.run = [&c, th, rmax, h, modes, sol](const Output& out) {
      const Spectrum s = solve_cone(*th, *rmax, *h,
                                    parse_ints(*modes, "modes"), sol->k,
                                    sol->options());
      finish(c, to_json(s), &s, out);
    };
  }

  // --- layer ----------------------------------------------------------------
  {
    Command& c = make("layer", "regular polyhedral layer spectrum");
    auto tilt = std::make_shared<double>(0.0);
    auto alpha = std::make_shared<double>(0.0);
    auto sectors = std::make_shared<int>(3);
    auto rmax = std::make_shared<double>(12.0);
    auto h = std::make_shared<double>(0.1);
    auto phi_steps = std::make_shared<int>(0);
    auto full = std::make_shared<bool>(false);
    auto sol = std::make_shared<Solver>();
    c.book.add("tilt", *tilt, "face tilt angle in (0, pi/2]");
    c.book.add("alpha", *alpha, "vertex angle; alternative to --tilt");
    c.book.add("sectors", *sectors, "number of faces")->check(CLI::Range(3, 64));
    c.book.add("r-max", *rmax, "radial truncation");
    c.book.add("h", *h, "target mesh size");
    c.book.add("phi-steps", *phi_steps, "azimuth cells per sector (0 = auto)");
    c.book.add_flag("full", *full, "mesh the full ring, not the symmetric subspace");
    sol->attach(c.book);
    c.run = [&c, tilt, alpha, sectors, rmax, h, phi_steps, full,
             sol](const Output& out) {
      if ((*tilt > 0.0) == (*alpha > 0.0))
        throw validation_error("layer: give exactly one of --tilt or --alpha");
      const double t = *tilt > 0.0 ? *tilt : regular_tilt(*alpha, *sectors);
      const LayerSpec spec = regular_layer(*sectors, t, *rmax, !*full);
      SolveOptions opts = sol->options();
      opts.phi_steps = *phi_steps;
      const Spectrum s = solve_layer(spec, *h, sol->k, opts);
      finish(c, to_json(s), &s, out);
    };
  }

  // --- trihedral ------------------------------------------------------------
  {
    Command& c = make("trihedral", "trihedral-corner layer spectrum");
    auto alphas = std::make_shared<std::string>();
    auto rmax = std::make_shared<double>(12.0);
    auto h = std::make_shared<double>(0.2);
    auto sol = std::make_shared<Solver>();
    c.book.add("alphas", *alphas, "three vertex angles a1,a2,a3")->required();
    c.book.add("r-max", *rmax, "radial truncation");
    c.book.add("h", *h, "target mesh size");
    sol->attach(c.book);
    c.run = [&c, alphas, rmax, h, sol](const Output& out) {
      const auto a = parse_doubles(*alphas, "alphas");
      if (a.size() != 3)
        throw validation_error("alphas: expected exactly three angles");
      const Spectrum s = solve_trihedral({a[0], a[1], a[2]}, *h, sol->k, *rmax,
                                         sol->options());
      finish(c, to_json(s), &s, out);
    };
  }

  // --- threshold ------------------------------------------------------------
  {
    Command& c = make("threshold", "essential-spectrum threshold of a bend");
    auto beta = std::make_shared<double>(0.0);
    c.book.add("beta", *beta, "inner dihedral/bend angle")->required();
    c.run = [&c, beta](const Output& out) {
      json j;
      j["schema_version"] = 1;
      j["problem"] = "threshold";
      j["beta"] = *beta;
      if (!(*beta > 0.0))
        throw validation_error("beta must be positive");
      if (*beta >= kPi) {
        j["values"] = json::array();
        j["estimate"] = kPiSq;
        j["error_bar"] = 0.0;
        j["warning"] = false;
        j["value"] = kPiSq;
      } else {
        const ExtrapolationReport rep = threshold_report(*beta);
        j["values"] = rep.values;
        if (rep.estimate) j["estimate"] = *rep.estimate;
        if (rep.observed_order) j["observed_order"] = *rep.observed_order;
        j["error_bar"] = rep.error_bar;
        j["warning"] = rep.warning;
        j["value"] = threshold(*beta);
      }
      finish(c, j, nullptr, out);
    };
  }

  // --- sweep ----------------------------------------------------------------
  {
    Command& c = make("sweep", "opening-angle sweep with monotonicity verdicts");
    auto family = std::make_shared<std::string>("vguide");
    auto thetas = std::make_shared<std::string>();
    auto h = std::make_shared<double>(0.05);
    auto L = std::make_shared<double>(4.0);
    auto rmax = std::make_shared<double>(20.0);
    auto mode = std::make_shared<int>(0);
    auto sectors = std::make_shared<int>(3);
    auto full = std::make_shared<bool>(false);
    auto phi_steps = std::make_shared<int>(0);
    auto sol = std::make_shared<Solver>();
    c.book.add("family", *family, "vguide | cone | layer")
        ->check(CLI::IsMember({"vguide", "cone", "layer"}));
    c.book.add("thetas", *thetas, "grid start:stop:step or comma list")
        ->required();
    c.book.add("h", *h, "target mesh size");
    c.book.add("L", *L, "vguide truncation half-length");
    c.book.add("r-max", *rmax, "cone/layer radial truncation");
    c.book.add("mode", *mode, "cone Fourier index");
    c.book.add("sectors", *sectors, "layer face count")->check(CLI::Range(3, 64));
    c.book.add_flag("full", *full, "layer: mesh the full ring");
    c.book.add("phi-steps", *phi_steps, "layer azimuth cells per sector");
    sol->attach(c.book);
    c.run = [&c, family, thetas, h, L, rmax, mode, sectors, full, phi_steps,
             sol](const Output& out) {
      SweepFamily fam;
      if (*family == "vguide") fam.kind = SweepFamily::Kind::vguide;
      else if (*family == "cone") fam.kind = SweepFamily::Kind::cone;
      else fam.kind = SweepFamily::Kind::layer;
      fam.L = *L;
      fam.r_max = *rmax;
      fam.mode = *mode;
      fam.n_sectors = *sectors;
      fam.symmetry_subspace = !*full;
      SolveOptions opts = sol->options();
      opts.phi_steps = *phi_steps;
      const SweepResult r =
          sweep_angle(fam, parse_grid(*thetas), *h, sol->k, opts);
      finish(c, to_json(r), nullptr, out, to_csv(r), to_svg(r));
    };
  }

  // --- demo-nonmonotone -----------------------------------------------------
  {
    Command& c = make("demo-nonmonotone",
                      "trihedral counterexample to angle monotonicity");
    auto eps = std::make_shared<double>(0.3);
    auto h = std::make_shared<double>(0.2);
    auto rmax = std::make_shared<double>(12.0);
    auto sol = std::make_shared<Solver>();
    c.book.add("eps", *eps, "small vertex angle of the narrow corner");
    c.book.add("h", *h, "target mesh size");
    c.book.add("r-max", *rmax, "radial truncation");
    sol->attach(c.book);
    c.run = [&c, eps, h, rmax, sol](const Output& out) {
      const NonmonotoneReport rep =
          nonmonotone_demo(*eps, *h, *rmax, sol->options());
      finish(c, to_json(rep), nullptr, out);
    };
  }

  // Pre-scan for --config so file values can be injected before the real
  // parse; command-line flags come later and win.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string config_path;
    std::string config_command;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config") {
        if (i + 1 >= args.size())
          throw validation_error("--config requires a file path");
        config_path = args[i + 1];
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
      }
    }
    std::vector<std::string> injected;
    if (!config_path.empty()) {
      auto kv = load_config(config_path);
      if (auto it = kv.find("command"); it != kv.end()) {
        config_command = it->second;
        kv.erase(it);
      }
      for (const auto& [k, v] : kv) injected.push_back("--" + k + "=" + v);
    }
    // Place injected options right after the subcommand token (or a config
    // supplied command) so they are attributed to it.
    std::vector<std::string> final_args;
    bool have_cmd = false;
    auto is_command = [&](const std::string& a) {
      for (const Command& c : commands)
        if (c.name == a) return true;
      return false;
    };
    for (const auto& a : args) {
      final_args.push_back(a);
      if (!have_cmd && is_command(a)) {
        have_cmd = true;
        final_args.insert(final_args.end(), injected.begin(), injected.end());
      }
    }
    if (!have_cmd && !config_command.empty()) {
      // Command came from the config file: put it first with the file values
      // so any command-line flags still override them.
      std::vector<std::string> prefixed{config_command};
      prefixed.insert(prefixed.end(), injected.begin(), injected.end());
      prefixed.insert(prefixed.end(), args.begin(), args.end());
      final_args = std::move(prefixed);
      have_cmd = true;
    }
    if (!have_cmd && !injected.empty())
      throw validation_error("config: no command given");

    // CLI11 wants reversed order.
    std::vector<std::string> reversed(final_args.rbegin(), final_args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }
    if (app.get_subcommands().empty()) {
      std::fputs(app.help().c_str(), stdout);
      return 2;
    }
    for (Command& c : commands)
      if (c.app->parsed()) c.run(output);
    return 0;
  } catch (const validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const geometry_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

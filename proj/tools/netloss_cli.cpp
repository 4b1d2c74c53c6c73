// Command-line front end: run / certify / design / oracle.
//
// Exit codes: 0 success, 2 invalid input, 3 infeasible design, 4 I/O error,
// 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "netloss/errors.hpp"
#include "netloss/experiment.hpp"

namespace {

using namespace netloss;

struct CommonFlags {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::string out_dir;
  std::string format = "csv";
};

OutputFormat parse_format(const std::string& f) {
  if (f == "csv") return OutputFormat::csv;
  if (f == "json") return OutputFormat::json;
  throw ValidationError("--format must be csv or json");
}

void write_text(const std::string& out_dir, const std::string& file, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto path = std::filesystem::path(out_dir) / file;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

int cmd_run(const CommonFlags& f) {
  const OutputFormat fmt = parse_format(f.format);
  const ExperimentSpec spec = load_experiment_ref(f.input);
  const BatchResult res = run_experiment(spec, RunOverrides{f.seed, f.paths});
  std::size_t conv = 0, div = 0, inc = 0;
  for (const auto& s : res.summaries) {
    if (s.verdict == Verdict::converged) ++conv;
    else if (s.verdict == Verdict::diverged) ++div;
    else ++inc;
  }
  std::cout << res.name << ": paths=" << res.summaries.size() << " converged=" << conv << " diverged=" << div
            << " inconclusive=" << inc << "\n";
  if (const auto& st = res.certificates.stability) {
    std::cout << "stability certificate: " << (st->pass ? "pass" : "fail")
              << " (exponent " << format_double(st->exponent) << ")\n";
  }
  if (const auto& in = res.certificates.instability) {
    std::cout << "instability certificate: " << (in->pass ? "pass" : "fail")
              << " (exponent " << format_double(in->exponent) << ")\n";
  }
  if (!f.out_dir.empty()) emit(res, fmt, f.out_dir);
  return 0;
}

int cmd_certify(const CommonFlags& f) {
  const ExperimentSpec spec = load_experiment_ref(f.input);
  write_text(f.out_dir, "certificates.json", to_json(certify(spec), 2) + "\n");
  return 0;
}

int cmd_design(const CommonFlags& f) {
  const ExperimentSpec spec = load_experiment_ref(f.input);
  if (!std::holds_alternative<DesignRequest>(spec.controller)) {
    throw ValidationError("design: the controller section has no 'design' request");
  }
  const CertificateReport rep = certify(spec);
  write_text(f.out_dir, "design.json", to_json(*rep.design, 2) + "\n");
  return 0;
}

int cmd_oracle(const CommonFlags& f) {
  std::string text;
  if (!f.input.empty() && f.input.front() == '{') {
    text = f.input;
  } else {
    std::ifstream in(f.input);
    if (!in) throw IoError("cannot read oracle file " + f.input);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  const auto rows = run_oracle(parse_oracle(text));
  std::ostringstream os;
  if (parse_format(f.format) == OutputFormat::csv) {
    os << "k,exact,bound,sound\n";
    for (const auto& r : rows) {
      os << r.k << "," << format_double(r.exact) << "," << format_double(r.bound) << "," << (r.sound ? 1 : 0) << "\n";
    }
    write_text(f.out_dir, "oracle.csv", os.str());
  } else {
    os << "[";
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto& r = rows[j];
      os << (j ? "," : "") << "\n {\"k\": " << r.k << ", \"exact\": " << format_double(r.exact)
         << ", \"bound\": " << format_double(r.bound) << ", \"sound\": " << (r.sound ? "true" : "false") << "}";
    }
    os << "\n]\n";
    write_text(f.out_dir, "oracle.json", os.str());
  }
  bool all_sound = true;
  for (const auto& r : rows) all_sound = all_sound && r.sound;
  return all_sound ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered control over lossy and attacked channels"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&flags](CLI::App* sub, const char* what) {
    sub->add_option("input", flags.input, what)->required();
    sub->add_option("--out-dir", flags.out_dir, "Directory for output files (stdout if omitted)");
    sub->add_option("--format", flags.format, "Output format: csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* run = app.add_subcommand("run", "Run a Monte Carlo experiment");
  add_common(run, "Experiment file or preset:NAME");
  run->add_option("--seed", flags.seed, "Override the base seed");
  run->add_option("--paths", flags.paths, "Override the number of paths")->check(CLI::PositiveNumber);

  CLI::App* cert = app.add_subcommand("certify", "Evaluate the certificates of an experiment");
  add_common(cert, "Experiment file or preset:NAME");

  CLI::App* design = app.add_subcommand("design", "Run the gain-design search of an experiment");
  add_common(design, "Experiment file or preset:NAME");

  CLI::App* oracle = app.add_subcommand("oracle", "Exact tail probabilities vs the Chernoff bound");
  add_common(oracle, "Oracle file (or inline JSON)");

  CLI::App* presets = app.add_subcommand("presets", "List bundled experiments");
  std::string show;
  presets->add_option("--show", show, "Print the named preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*cert) return cmd_certify(flags);
    if (*design) return cmd_design(flags);
    if (*oracle) return cmd_oracle(flags);
    if (*presets) {
      if (!show.empty()) {
        std::cout << preset_text(show);
      } else {
        for (const auto& n : preset_names()) std::cout << n << "\n";
      }
      return 0;
    }
  } catch (const InfeasibleDesign& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

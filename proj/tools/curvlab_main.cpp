#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <curvlab/census.hpp>
#include <curvlab/spaces.hpp>

namespace {

using namespace curvlab;
using njson = nlohmann::ordered_json;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> to_std(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

struct RunConfig {
  std::string space;
  std::uint64_t seed = 0;
  std::size_t samples = 200000;
  int restarts = 64;
  int iters = 500;
  double tolerance = 1e-9;
  int threads = 0;
  std::string format = "text";
};

void add_run_flags(CLI::App* cmd, RunConfig& cfg, bool with_space = true) {
  if (with_space)
    cmd->add_option("--space", cfg.space, "space descriptor, e.g. su3:biinvariant")
        ->required();
  cmd->add_option("--seed", cfg.seed, "random seed (default 0)");
  cmd->add_option("--samples", cfg.samples, "sample count for the search phase");
  cmd->add_option("--restarts", cfg.restarts, "descent restarts");
  cmd->add_option("--iters", cfg.iters, "descent iteration cap");
  cmd->add_option("--tolerance", cfg.tolerance, "numerical tolerance (echoed in reports)");
  cmd->add_option("--threads", cfg.threads,
                  "worker threads (0: CURVLAB_THREADS env, then hardware)");
  cmd->add_option("--format", cfg.format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
}

njson run_header(const char* command, const RunConfig& cfg) {
  njson j;
  j["schema"] = 1;
  j["command"] = command;
  j["space"] = cfg.space;
  j["seed"] = cfg.seed;
  j["budget"] = {{"samples", cfg.samples}, {"restarts", cfg.restarts}, {"max_iters", cfg.iters}};
  j["tolerance"] = cfg.tolerance;
  j["threads"] = resolve_threads(cfg.threads);
  return j;
}

void print_run_header(std::ostream& os, const char* command, const RunConfig& cfg) {
  os << "command: " << command << "\n"
     << "space: " << cfg.space << "\n"
     << "seed: " << cfg.seed << "\n"
     << "samples: " << cfg.samples << "\n"
     << "restarts: " << cfg.restarts << "\n"
     << "max_iters: " << cfg.iters << "\n"
     << "tolerance: " << fmt(cfg.tolerance) << "\n"
     << "threads: " << resolve_threads(cfg.threads) << "\n";
}

njson extrema_json(const CurvatureExtrema& e) {
  njson j;
  j["min"] = e.min_value;
  j["max"] = e.max_value;
  if (e.max_value > 0.0)
    j["pinching"] = e.min_value / e.max_value;
  else
    j["pinching"] = nullptr;
  j["argmin"] = {{"x", to_std(e.argmin.X)}, {"y", to_std(e.argmin.Y)}};
  j["argmax"] = {{"x", to_std(e.argmax.X)}, {"y", to_std(e.argmax.Y)}};
  return j;
}

int cmd_minsec(const RunConfig& cfg) {
  const CurvatureProblem prob = parse_space(cfg.space);
  const Budget budget{cfg.samples, cfg.restarts, cfg.iters};
  const CurvatureExtrema e = min_sectional(prob.fn, prob.dim, budget, cfg.seed, cfg.threads);
  if (cfg.format == "json") {
    njson j = run_header("minsec", cfg);
    j["result"] = extrema_json(e);
    std::cout << j.dump() << "\n";
  } else {
    print_run_header(std::cout, "minsec", cfg);
    std::cout << "min: " << fmt(e.min_value) << "\n"
              << "max: " << fmt(e.max_value) << "\n"
              << "pinching: "
              << (e.max_value > 0.0 ? fmt(e.min_value / e.max_value) : "undefined") << "\n";
  }
  return 0;
}

int cmd_pinch(const RunConfig& cfg, const std::string& family) {
  const CurvatureProblem prob = parse_space(cfg.space);
  const Budget budget{cfg.samples, cfg.restarts, cfg.iters};
  if (family.empty()) {
    const CurvatureExtrema e = min_sectional(prob.fn, prob.dim, budget, cfg.seed, cfg.threads);
    if (!(e.max_value > 0.0))
      throw NumericError("pinch: estimated maximum curvature is not positive");
    const double delta = e.min_value / e.max_value;
    if (cfg.format == "json") {
      njson j = run_header("pinch", cfg);
      j["result"] = extrema_json(e);
      std::cout << j.dump() << "\n";
    } else {
      print_run_header(std::cout, "pinch", cfg);
      std::cout << "min: " << fmt(e.min_value) << "\n"
                << "max: " << fmt(e.max_value) << "\n"
                << "pinching: " << fmt(delta) << "\n";
    }
    return 0;
  }

  // family search uses a reduced budget per candidate, then the full budget
  // at the optimum
  const Budget search{std::min<std::size_t>(cfg.samples, 4000),
                      std::min(cfg.restarts, 8), std::min(cfg.iters, 200)};
  const FamilySearch fs =
      optimize_metric_family(prob, family, search, budget, cfg.seed, cfg.threads);
  if (cfg.format == "json") {
    njson j = run_header("pinch", cfg);
    j["family"] = fs.search.family;
    j["best_params"] = to_std(fs.search.best_params);
    j["search_pinching"] = fs.search.best_value;
    j["result"] = extrema_json(fs.extrema);
    std::cout << j.dump() << "\n";
  } else {
    print_run_header(std::cout, "pinch", cfg);
    std::cout << "family: " << fs.search.family << "\nbest_params:";
    for (int i = 0; i < fs.search.best_params.size(); ++i)
      std::cout << " " << fmt(fs.search.best_params(i));
    std::cout << "\nsearch_pinching: " << fmt(fs.search.best_value) << "\n"
              << "min: " << fmt(fs.extrema.min_value) << "\n"
              << "max: " << fmt(fs.extrema.max_value) << "\n"
              << "pinching: "
              << (fs.extrema.max_value > 0.0
                      ? fmt(fs.extrema.min_value / fs.extrema.max_value)
                      : "undefined")
              << "\n";
  }
  return 0;
}

njson record_json(const CensusRecord& rec) {
  njson j;
  j["kind"] = kind_name(rec.kind);
  if (rec.esch) {
    j["k"] = rec.esch->k;
    j["l"] = rec.esch->l;
  }
  if (rec.baz) j["q"] = rec.baz->q;
  j["free"] = rec.free_action;
  j["positive"] = rec.positive;
  if (rec.r)
    j["r"] = *rec.r;
  else
    j["r"] = nullptr;
  j["warnings"] = rec.warnings;
  return j;
}

void print_record_text(std::ostream& os, const CensusRecord& rec) {
  os << "free=" << (rec.free_action ? "true" : "false")
     << " positive=" << (rec.positive ? "true" : "false");
  if (rec.r) os << " r=" << *rec.r;
  if (!rec.warnings.empty()) os << " warnings=" << detail::join_warnings(rec.warnings);
  os << "\n";
}

template <typename Tuple>
std::string tuple_text(const Tuple& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
  os << ")";
  return os.str();
}

int cmd_check(const char* command, const CensusRecord& rec, const std::string& format) {
  if (format == "json") {
    njson j;
    j["schema"] = 1;
    j["command"] = command;
    njson body = record_json(rec);
    j.update(body);
    std::cout << j.dump() << "\n";
  } else {
    print_record_text(std::cout, rec);
  }
  return 0;
}

int cmd_esch_sample(const std::array<long long, 3>& k, const std::array<long long, 3>& l,
                    double t, std::size_t samples, std::uint64_t seed,
                    const std::string& format) {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  const EschSamplerReport rep = esch_horizontal_flat_sampler(alg, {k, l}, t, samples, seed);
  if (format == "json") {
    njson j;
    j["schema"] = 1;
    j["command"] = "esch sample";
    j["k"] = k;
    j["l"] = l;
    j["t"] = rep.t;
    j["samples"] = rep.samples;
    j["seed"] = rep.seed;
    j["margin"] = rep.margin;
    j["best_block"] = rep.best_block;
    j["block_margins"] = rep.block_margin;
    j["integer_blocks"] = rep.integer_check;
    j["integer_positive"] = rep.integer_positive;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "k: " << tuple_text(k) << "\nl: " << tuple_text(l) << "\nt: " << fmt(rep.t)
              << "\nsamples: " << rep.samples << "\nseed: " << rep.seed
              << "\nmargin: " << fmt(rep.margin) << "\nbest_block: " << rep.best_block
              << "\nblock_margins:";
    for (double m : rep.block_margin) std::cout << " " << fmt(m);
    std::cout << "\ninteger_positive: " << (rep.integer_positive ? "true" : "false") << "\n";
  }
  return 0;
}

int cmd_census(const char* command, const std::vector<CensusRecord>& records,
               const std::string& out, const std::string& format, njson header) {
  const bool jsonl = out.size() >= 6 && out.compare(out.size() - 6, 6, ".jsonl") == 0;
  write_census(records, out, jsonl ? CensusFormat::jsonl : CensusFormat::csv);
  if (format == "json") {
    header["records"] = records.size();
    header["out"] = out;
    header["file_format"] = jsonl ? "jsonl" : "csv";
    std::cout << header.dump() << "\n";
  } else {
    std::cout << "command: " << command << "\nrecords: " << records.size() << "\nout: " << out
              << "\nfile_format: " << (jsonl ? "jsonl" : "csv") << "\n";
  }
  return 0;
}

int cmd_coincide(const std::string& in, const std::string& format) {
  const std::vector<CensusRecord> records = read_census(in);
  const std::vector<CoincidenceGroup> groups = find_coincidences(records);
  if (format == "json") {
    njson j;
    j["schema"] = 1;
    j["command"] = "coincide";
    j["in"] = in;
    j["groups"] = njson::array();
    for (const CoincidenceGroup& g : groups) {
      njson jg;
      jg["kind"] = kind_name(g.kind);
      jg["abs_r"] = g.abs_r;
      jg["members"] = njson::array();
      for (const CensusRecord& rec : g.members) jg["members"].push_back(record_json(rec));
      j["groups"].push_back(jg);
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "groups: " << groups.size() << "\n";
    for (const CoincidenceGroup& g : groups) {
      std::cout << "group kind=" << kind_name(g.kind) << " |r|=" << g.abs_r
                << " members=" << g.members.size() << "\n";
      for (const CensusRecord& rec : g.members) {
        std::cout << "  ";
        if (rec.esch)
          std::cout << "k=" << tuple_text(rec.esch->k) << " l=" << tuple_text(rec.esch->l);
        if (rec.baz) std::cout << "q=" << tuple_text(rec.baz->q);
        std::cout << " r=" << *rec.r << "\n";
      }
    }
  }
  return 0;
}

template <typename Array>
Array to_array(const std::vector<long long>& v, const char* what) {
  Array out{};
  if (v.size() != out.size())
    throw std::invalid_argument(std::string(what) + " expects " + std::to_string(out.size()) +
                                " comma-separated integers");
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature computations on compact group quotients"};
  app.require_subcommand(1);

  RunConfig minsec_cfg;
  CLI::App* minsec = app.add_subcommand("minsec", "extremal sectional curvature over 2-planes");
  add_run_flags(minsec, minsec_cfg);

  RunConfig pinch_cfg;
  std::string pinch_family;
  CLI::App* pinch = app.add_subcommand("pinch", "pinching ratio min sec / max sec");
  add_run_flags(pinch, pinch_cfg);
  pinch->add_option("--optimize-family", pinch_family,
                    "search a metric family instead of a single metric: gt or diagonal")
      ->check(CLI::IsMember({"gt", "diagonal"}));

  CLI::App* esch = app.add_subcommand("esch", "Eschenburg space computations");
  esch->require_subcommand(1);
  std::vector<long long> esch_k, esch_l;
  std::string esch_format = "text";

  CLI::App* esch_check = esch->add_subcommand("check", "freeness, positivity, order invariant");
  esch_check->add_option("--k", esch_k, "three integers")->required()->delimiter(',');
  esch_check->add_option("--l", esch_l, "three integers")->required()->delimiter(',');
  esch_check->add_option("--format", esch_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  double sample_t = 0.7;
  std::size_t sample_n = 10000;
  std::uint64_t sample_seed = 0;
  CLI::App* esch_sample = esch->add_subcommand("sample", "horizontal flat-plane screen");
  esch_sample->add_option("--k", esch_k, "three integers")->required()->delimiter(',');
  esch_sample->add_option("--l", esch_l, "three integers")->required()->delimiter(',');
  esch_sample->add_option("--t", sample_t, "block scale in (0,1), default 0.7");
  esch_sample->add_option("--samples", sample_n, "group elements to sample");
  esch_sample->add_option("--seed", sample_seed, "random seed");
  esch_sample->add_option("--format", esch_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  long long census_bound = 0;
  std::string census_out;
  bool census_no_normalize = false, census_free_only = false, census_positive_only = false;
  CLI::App* esch_census_cmd = esch->add_subcommand("census", "enumerate parameter tuples");
  esch_census_cmd->add_option("--bound", census_bound, "entry bound")->required();
  esch_census_cmd->add_option("--out", census_out, "output file (.csv or .jsonl)")->required();
  esch_census_cmd->add_flag("--no-normalize", census_no_normalize,
                            "emit raw tuples instead of one per symmetry orbit");
  esch_census_cmd->add_flag("--free-only", census_free_only, "keep only free actions");
  esch_census_cmd->add_flag("--positive-only", census_positive_only,
                            "keep only positively curved records");
  esch_census_cmd->add_option("--format", esch_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  CLI::App* baz = app.add_subcommand("baz", "Bazaikin space computations");
  baz->require_subcommand(1);
  std::vector<long long> baz_q;
  std::string baz_format = "text";

  CLI::App* baz_check = baz->add_subcommand("check", "freeness, positivity, order invariant");
  baz_check->add_option("--q", baz_q, "five integers")->required()->delimiter(',');
  baz_check->add_option("--format", baz_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  long long baz_bound = 0;
  std::string baz_out;
  bool baz_free_only = false, baz_positive_only = false;
  CLI::App* baz_census_cmd = baz->add_subcommand("census", "enumerate odd parameter tuples");
  baz_census_cmd->add_option("--bound", baz_bound, "entry bound")->required();
  baz_census_cmd->add_option("--out", baz_out, "output file (.csv or .jsonl)")->required();
  baz_census_cmd->add_flag("--free-only", baz_free_only, "keep only free actions");
  baz_census_cmd->add_flag("--positive-only", baz_positive_only,
                           "keep only positively curved records");
  baz_census_cmd->add_option("--format", baz_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string coincide_in, coincide_format = "text";
  CLI::App* coincide = app.add_subcommand("coincide", "group records by |order invariant|");
  coincide->add_option("--in", coincide_in, "census file (csv or jsonl)")->required();
  coincide->add_option("--format", coincide_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*minsec) return cmd_minsec(minsec_cfg);
    if (*pinch) return cmd_pinch(pinch_cfg, pinch_family);
    if (*esch_check) {
      const EschenburgParams p{to_array<std::array<long long, 3>>(esch_k, "--k"),
                               to_array<std::array<long long, 3>>(esch_l, "--l")};
      return cmd_check("esch check", detail::make_esch_record(p), esch_format);
    }
    if (*esch_sample)
      return cmd_esch_sample(to_array<std::array<long long, 3>>(esch_k, "--k"),
                             to_array<std::array<long long, 3>>(esch_l, "--l"), sample_t,
                             sample_n, sample_seed, esch_format);
    if (*esch_census_cmd) {
      njson header;
      header["schema"] = 1;
      header["command"] = "esch census";
      header["bound"] = census_bound;
      header["normalize"] = !census_no_normalize;
      header["free_only"] = census_free_only;
      header["positive_only"] = census_positive_only;
      return cmd_census("esch census",
                        esch_census(census_bound, !census_no_normalize,
                                    CensusFilter{census_free_only, census_positive_only}),
                        census_out, esch_format, header);
    }
    if (*baz_check) {
      const BazaikinParams p{to_array<std::array<long long, 5>>(baz_q, "--q")};
      return cmd_check("baz check", detail::make_baz_record(p), baz_format);
    }
    if (*baz_census_cmd) {
      njson header;
      header["schema"] = 1;
      header["command"] = "baz census";
      header["bound"] = baz_bound;
      header["free_only"] = baz_free_only;
      header["positive_only"] = baz_positive_only;
      return cmd_census("baz census",
                        baz_census(baz_bound, CensusFilter{baz_free_only, baz_positive_only}),
                        baz_out, baz_format, header);
    }
    if (*coincide) return cmd_coincide(coincide_in, coincide_format);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

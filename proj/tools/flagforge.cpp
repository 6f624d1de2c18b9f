#include "flagforge/certify.hpp"
#include "flagforge/constructions.hpp"
#include "flagforge/probsearch.hpp"
#include "flagforge/sdp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace flagforge;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kPrecision = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string format;
  std::string out;
  int workers = 1;
  bool no_cache = false;
  bool verbose = false;
};

RunConfig config;

/// Resolves the output format, rejecting any outside `allowed` (the first is the default).
std::string format_for(std::initializer_list<const char*> allowed) {
  if (config.format.empty()) return *allowed.begin();
  for (const char* f : allowed)
    if (config.format == f) return config.format;
  std::string list;
  for (const char* f : allowed) list += std::string(list.empty() ? "" : ", ") + f;
  throw UsageError("format '" + config.format + "' is not available here (use " + list + ")");
}

void emit(const std::string& text) {
  if (config.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(config.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + config.out);
  out << text;
}

void note(const std::string& msg) {
  if (config.verbose) std::cerr << "flagforge: " << msg << "\n";
}

std::string edge_string(const SmallGraph& g) {
  std::string s;
  for (auto [u, v] : g.edges()) s += (s.empty() ? "" : " ") + std::to_string(u + 1) + "-" + std::to_string(v + 1);
  return s;
}

std::string join(const std::vector<long>& xs, const char* sep) {
  std::string s;
  for (long x : xs) s += (s.empty() ? "" : sep) + std::to_string(x);
  return s;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

Rational rational_arg(const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::exception&) {
    throw UsageError("not a rational number: " + text);
  }
}

// ---------------------------------------------------------------------------

struct EnumerateArgs {
  int n = 0, l = 0;
  std::string type;
};

int run_enumerate(const EnumerateArgs& a) {
  const auto fmt = format_for({"table", "graph6", "csv", "json"});
  const TypeGraph type = a.type.empty() ? TypeGraph::trivial(a.l) : TypeGraph(from_graph6(a.type), a.l);
  auto fam = enumerate_flags(type, a.n);
  std::ostringstream out;
  if (fmt == "json") {
    nlohmann::json j{{"n", a.n}, {"forbidden_l", a.l}, {"type", type.graph6()}, {"count", fam->size()}, {"fingerprint", hex64(fam->fingerprint())}};
    j["members"] = nlohmann::json::array();
    for (const auto& f : *fam) j["members"].push_back({{"graph6", to_graph6(f.graph())}, {"edges", edge_string(f.graph())}});
    out << json_text(j);
  } else if (fmt == "graph6") {
    for (const auto& f : *fam) out << to_graph6(f.graph()) << "\n";
  } else if (fmt == "csv") {
    out << "index,graph6,edges\n";
    for (std::size_t i = 0; i < fam->size(); ++i) out << i + 1 << "," << to_graph6((*fam)[i].graph()) << "," << edge_string((*fam)[i].graph()) << "\n";
  } else {
    out << "# n=" << a.n << " l=" << a.l << " type=" << type.graph6() << " count=" << fam->size() << "\n";
    for (std::size_t i = 0; i < fam->size(); ++i) out << i + 1 << "\t" << to_graph6((*fam)[i].graph()) << "\t" << edge_string((*fam)[i].graph()) << "\n";
  }
  emit(out.str());
  return kPass;
}

struct DensityArgs {
  std::string target, host;
};

int run_density(const DensityArgs& a) {
  const auto fmt = format_for({"table", "json"});
  const auto target = from_graph6(a.target), host = from_graph6(a.host);
  const Rational d = induced_density(target, host);
  const BigInt copies = count_induced(target, host);
  if (fmt == "json") {
    emit(json_text({{"target", a.target}, {"host", a.host}, {"induced_copies", copies.str()}, {"density", to_string(d)}}));
  } else {
    emit("d(" + a.target + "; " + a.host + ") = " + to_string(d) + "  (" + copies.str() + " induced copies)\n");
  }
  return kPass;
}

struct ProductArgs {
  std::string type;
  int a = 0, b = 0, l = 0, size = 0;
};

int run_product_table(const ProductArgs& p) {
  const auto fmt = format_for({"table", "json"});
  const TypeGraph type(from_graph6(p.type), p.l);
  const int size = p.size ? p.size : p.a + p.b - type.size();
  auto fa = enumerate_flags(type, p.a), fb = enumerate_flags(type, p.b);
  auto table = product_table(fa, fb, size);
  const auto& res = *table->result_basis();
  std::ostringstream out;
  if (fmt == "json") {
    auto codes = [](const FlagFamily& f) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& x : f) j.push_back(to_graph6(x.graph()));
      return j;
    };
    nlohmann::json j{{"type", type.graph6()}, {"forbidden_l", p.l}, {"size", size}, {"left", codes(*fa)}, {"right", codes(*fb)}, {"result", codes(res)}};
    j["entries"] = nlohmann::json::array();
    for (std::size_t i = 0; i < fa->size(); ++i)
      for (std::size_t k = 0; k < fb->size(); ++k) {
        nlohmann::json terms = nlohmann::json::object();
        const auto& v = (*table)(i, k);
        for (std::size_t h = 0; h < v.size(); ++h)
          if (v[h] != 0) terms[std::to_string(h + 1)] = to_string(v[h]);
        j["entries"].push_back({{"i", i + 1}, {"j", k + 1}, {"terms", terms}});
      }
    out << json_text(j);
  } else {
    out << "# type=" << type.graph6() << " l=" << p.l << " sizes " << p.a << "x" << p.b << " -> " << size << "\n";
    for (std::size_t h = 0; h < res.size(); ++h) out << "# H" << h + 1 << "\t" << to_graph6(res[h].graph()) << "\n";
    for (std::size_t i = 0; i < fa->size(); ++i)
      for (std::size_t k = 0; k < fb->size(); ++k) {
        out << i + 1 << "\t" << k + 1;
        const auto& v = (*table)(i, k);
        for (std::size_t h = 0; h < v.size(); ++h)
          if (v[h] != 0) out << "\tH" << h + 1 << ":" << to_string(v[h]);
        out << "\n";
      }
  }
  emit(out.str());
  return kPass;
}

struct BuildSdpArgs {
  std::string spec;
  std::string audit;
};

int run_build_sdp(const BuildSdpArgs& a) {
  const auto fmt = format_for({"sdpa", "json"});
  std::ifstream in(a.spec);
  if (!in) throw UsageError("cannot open problem spec " + a.spec);
  auto problem = problem_from_json(nlohmann::json::parse(in));
  note("built " + std::to_string(problem.graphs->size()) + " constraints, " + std::to_string(problem.blocks.size()) + " blocks");
  const std::string audit_path = !a.audit.empty() ? a.audit : (fmt == "sdpa" && !config.out.empty() ? config.out + ".json" : "");
  if (!audit_path.empty()) {
    std::ofstream audit(audit_path, std::ios::binary);
    if (!audit) throw std::runtime_error("cannot write " + audit_path);
    audit << json_text(to_json(problem));
  }
  if (fmt == "json") {
    emit(json_text(to_json(problem)));
  } else {
    std::ostringstream out;
    emit_sdpa(problem, out);
    emit(out.str());
  }
  return kPass;
}

struct VerifyArgs {
  std::string cert;
  std::string fixtures = std::string(FLAGFORGE_DATA_DIR) + "/fixtures";
  std::string canonical_out;
};

int run_verify_cert(const VerifyArgs& a) {
  const auto fmt = format_for({"table", "json"});
  const auto cert = load_certificate(a.cert, a.fixtures);
  if (!a.canonical_out.empty()) {
    std::ofstream out(a.canonical_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + a.canonical_out);
    out << json_text(to_json(cert));
  }
  const auto rep = verify(cert);
  if (fmt == "json") {
    emit(json_text(to_json(rep, cert.bound)));
  } else {
    std::ostringstream out;
    out << "# target=" << to_graph6(cert.target) << " l=" << cert.forbidden << " t=" << cert.t << " squares=" << cert.squares.size() << "\n";
    out << "# H\tgraph6\ttarget\tresidual\n";
    for (std::size_t h = 0; h < rep.residual.size(); ++h)
      out << h + 1 << "\t" << to_graph6(rep.residual.basis()[h].graph()) << "\t" << to_string(rep.target_expansion[h]) << "\t"
          << to_string(rep.residual[h]) << (rep.residual[h] < cert.bound ? "\tBELOW BOUND" : "") << "\n";
    for (std::size_t h : rep.failing) out << "failing H" << h + 1 << " " << to_graph6(rep.residual.basis()[h].graph()) << "\n";
    out << "min_residual " << to_string(rep.min_residual) << "\nbound " << to_string(cert.bound) << "\n" << (rep.pass ? "PASS" : "FAIL") << "\n";
    emit(out.str());
  }
  return rep.pass ? kPass : kFail;
}

struct ConstructArgs {
  std::string family;
  long n = 0, to = 0;
  int parts = 2, k = 0;
};

int run_construct(const ConstructArgs& a) {
  const auto fmt = format_for({"table", "csv", "json"});
  const long last = a.to ? a.to : a.n;
  if (last < a.n) throw UsageError("--to must not be below --n");
  const int k = a.k ? a.k : (a.family == "c5" ? 4 : 3);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream out;
  if (fmt == "csv") out << "n,sizes,t" << k << ",ratio\n";
  if (fmt == "table") out << "# n\tsizes\tt" << k << "\tt" << k << "/C(n," << k << ")\n";
  for (long n = a.n; n <= last; ++n) {
    BlowupSpec spec = a.family == "c5" ? c5_blowup(c5_extremal_sizes(n)) : turan_complement(n, a.parts);
    const BigInt count = count_cliques_blowup(spec, k);
    const BigInt total = binomial(n, k);
    const std::string ratio = total == 0 ? "0" : to_decimal(Rational(count, total), 10);
    if (fmt == "json") {
      rows.push_back({{"n", n}, {"sizes", spec.sizes}, {"k", k}, {"count", count.str()}, {"ratio", ratio}});
    } else if (fmt == "csv") {
      out << n << "," << join(spec.sizes, " ") << "," << count << "," << ratio << "\n";
    } else {
      out << n << "\t(" << join(spec.sizes, ",") << ")\t" << count << "\t" << ratio << "\n";
    }
  }
  if (fmt == "json") out << json_text({{"family", a.family}, {"rows", rows}});
  emit(out.str());
  return kPass;
}

struct IntOptArgs {
  long n = 0, to = 0;
  std::string epsilon = "1/10";
};

int run_intopt(const IntOptArgs& a) {
  const auto fmt = format_for({"table", "csv", "json"});
  const Rational eps = rational_arg(a.epsilon);
  const long last = a.to ? a.to : a.n;
  if (last < a.n) throw UsageError("--to must not be below --n");
  std::ostringstream out;
  nlohmann::json rows = nlohmann::json::array();
  if (fmt == "csv") out << "n,minimum,orbits,minimizers,feasible\n";
  if (fmt == "table") out << "# epsilon=" << to_string(eps) << "\n# n\tminimum\torbits\tminimizers\tfeasible\n";
  for (long n = a.n; n <= last; ++n) {
    const auto r = intopt_bruteforce(n, eps);
    std::vector<std::string> orbits;
    for (const auto& y : r.orbits) orbits.push_back("(" + join(std::vector<long>(y.begin(), y.end()), ",") + ")");
    std::string orbit_text;
    for (const auto& o : orbits) orbit_text += (orbit_text.empty() ? "" : " ") + o;
    if (fmt == "json") {
      nlohmann::json orb = nlohmann::json::array();
      for (const auto& y : r.orbits) orb.push_back(y);
      rows.push_back({{"n", n}, {"minimum", r.minimum.str()}, {"orbits", orb}, {"minimizers", r.minimizers.size()}, {"feasible", r.feasible}});
    } else if (fmt == "csv") {
      out << n << "," << r.minimum << "," << orbit_text << "," << r.minimizers.size() << "," << r.feasible << "\n";
    } else {
      out << n << "\t" << r.minimum << "\t" << orbit_text << "\t" << r.minimizers.size() << "\t" << r.feasible << "\n";
    }
  }
  if (fmt == "json") out << json_text({{"epsilon", to_string(eps)}, {"rows", rows}});
  emit(out.str());
  return kPass;
}

struct ProbArgs {
  long l = 0, m = 0, s = 0, t = 0;
  std::string p;
  long precision = 256;
  std::string grid;
  std::size_t budget = 1000000;
};

std::string report_table(const BoundReport& r) {
  std::ostringstream out;
  out << "params l=" << r.params.l << " m=" << r.params.m << " p=" << to_string(r.params.p) << " s=" << r.params.s << " t=" << r.params.t << "\n";
  out << "mass " << (r.mass.ok ? "ok" : "fails") << "  lhs=" << to_decimal(r.mass.lhs, 20) << "  rhs=" << to_decimal(r.mass.rhs, 20)
      << "  margin=" << to_decimal(r.mass.margin, 20) << "\n";
  if (r.probability) {
    const auto& p = *r.probability;
    out << "P(B1) <= " << to_decimal(p.b1_upper, 20) << "\nP(B2) <= " << to_decimal(p.b2, 20) << "\nP(B3) <= " << to_decimal(p.b3, 20)
        << "\nP(B2 or B3) <= " << to_decimal(p.b23, 20) << "\ntotal <= " << to_decimal(p.total_upper, 20) << "  (" << p.precision << " bits)\n";
  } else {
    out << "probability check skipped\n";
  }
  out << (r.suitable ? "SUITABLE" : "NOT SUITABLE") << "\n";
  return out.str();
}

int run_prob_verify(const ProbArgs& a) {
  const auto fmt = format_for({"table", "json"});
  const SearchParams q{a.l, a.m, rational_arg(a.p), a.s, a.t};
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto r = verify_params(q, a.precision);
  emit(fmt == "json" ? json_text(to_json(r)) : report_table(r));
  return r.suitable ? kPass : kFail;
}

int run_prob_search(const ProbArgs& a) {
  const auto fmt = format_for({"table", "json"});
  std::ifstream in(a.grid);
  if (!in) throw UsageError("cannot open grid file " + a.grid);
  const auto grid = grid_from_json(nlohmann::json::parse(in));
  const auto res = search(grid, a.budget, a.precision);
  if (fmt == "json") {
    emit(json_text({{"grid_points", grid.size()},
                    {"evaluated", res.evaluated},
                    {"undecided", res.undecided},
                    {"found", res.found ? to_json(*res.found) : nlohmann::json(nullptr)}}));
  } else {
    std::string text = "grid points " + std::to_string(grid.size()) + ", evaluated " + std::to_string(res.evaluated) + ", undecided " +
                       std::to_string(res.undecided) + "\n";
    text += res.found ? report_table(*res.found) : "no suitable point\n";
    emit(text);
  }
  return res.found ? kPass : kFail;
}

struct OracleArgs {
  int n = 0, k = 0, l = 0;
  bool allow_nine = false;
};

int run_oracle_min(const OracleArgs& a) {
  const auto fmt = format_for({"table", "json", "graph6"});
  const auto r = bruteforce_min_cliques(a.n, a.k, a.l, a.allow_nine);
  std::ostringstream out;
  if (fmt == "json") {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& g : r.witnesses) w.push_back(to_graph6(g));
    out << json_text({{"n", r.n}, {"k", r.k}, {"l", r.l}, {"min", r.minimum.str()}, {"witnesses", w}});
  } else if (fmt == "graph6") {
    for (const auto& g : r.witnesses) out << to_graph6(g) << "\n";
  } else {
    out << "n=" << r.n << " k=" << r.k << " l=" << r.l << " min=" << r.minimum << " witnesses=" << r.witnesses.size() << "\n";
    for (const auto& g : r.witnesses) out << to_graph6(g) << "\t" << edge_string(g) << "\n";
  }
  emit(out.str());
  return kPass;
}

int run_oracle_ratio(int k) {
  const auto fmt = format_for({"table", "json"});
  const auto r = blowup_ratio_comparison(k);
  if (fmt == "json") {
    emit(json_text({{"k", k}, {"c5", to_string(r.c5_density)}, {"cliques", to_string(r.turan_density)}, {"c5_smaller", r.c5_smaller}}));
  } else {
    emit("k=" + std::to_string(k) + " c5=" + to_string(r.c5_density) + " two-cliques=" + to_string(r.turan_density) + " c5_smaller=" +
         (r.c5_smaller ? "true" : "false") + "\n");
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flagforge: flag-algebra certificates, constructions and random blow-up bounds"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--format", config.format, "Output format: json, table, csv, sdpa or graph6")
      ->check(CLI::IsMember({"json", "table", "csv", "sdpa", "graph6"}));
  app.add_option("--out", config.out, "Write output to this file instead of stdout");
  app.add_option("--workers", config.workers, "Worker threads")->check(CLI::Range(1, 256));
  app.add_flag("--no-cache", config.no_cache, "Ignore and do not write the disk cache");
  app.add_flag("--verbose", config.verbose, "Progress notes on stderr");

  int code = kPass;

  EnumerateArgs en;
  auto* enumerate = app.add_subcommand("enumerate", "List admissible graphs or sigma-flags of a given size");
  enumerate->add_option("n", en.n, "Order")->required()->check(CLI::Range(0, 10));
  enumerate->add_option("l", en.l, "Forbidden independent-set size")->required()->check(CLI::Range(2, 10));
  enumerate->add_option("--flags,--type", en.type, "Labeled type as graph6 (labels are vertices 1..k)");
  enumerate->callback([&] { code = run_enumerate(en); });

  DensityArgs de;
  auto* density = app.add_subcommand("density", "Induced density d(target; host) of graph6 graphs");
  density->add_option("target", de.target)->required();
  density->add_option("host", de.host)->required();
  density->callback([&] { code = run_density(de); });

  ProductArgs pr;
  auto* product = app.add_subcommand("product-table", "Products of two flag families of one type");
  product->add_option("type", pr.type, "Labeled type as graph6")->required();
  product->add_option("a", pr.a, "Left flag size")->required();
  product->add_option("b", pr.b, "Right flag size")->required();
  product->add_option("-l,--forbidden", pr.l, "Forbidden independent-set size")->required();
  product->add_option("--size", pr.size, "Size of the result flags (default a + b - |type|)");
  product->callback([&] { code = run_product_table(pr); });

  BuildSdpArgs bs;
  auto* build = app.add_subcommand("build-sdp", "Assemble an SDP from a problem spec and emit SDPA");
  build->add_option("spec", bs.spec, "Problem spec JSON")->required()->check(CLI::ExistingFile);
  build->add_option("--audit", bs.audit, "JSON audit dump path (default: the --out path plus .json)");
  build->callback([&] { code = run_build_sdp(bs); });

  VerifyArgs ve;
  auto* verify_cmd = app.add_subcommand("verify-cert", "Verify a sum-of-squares certificate exactly");
  verify_cmd->add_option("certificate", ve.cert)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--fixtures", ve.fixtures, "Directory for named-flag fixtures");
  verify_cmd->add_option("--canonical-out", ve.canonical_out, "Write the certificate in canonical vector form");
  verify_cmd->callback([&] { code = run_verify_cert(ve); });

  ConstructArgs co;
  auto* construct = app.add_subcommand("construct", "Clique counts of extremal constructions");
  construct->add_option("family", co.family, "c5 or turan")->required()->check(CLI::IsMember({"c5", "turan"}));
  construct->add_option("--n", co.n, "Order")->required()->check(CLI::PositiveNumber);
  construct->add_option("--to", co.to, "Last order of a table");
  construct->add_option("--parts", co.parts, "Number of cliques for turan")->check(CLI::Range(1, 10));
  construct->add_option("--k", co.k, "Clique size (default 4 for c5, 3 for turan)");
  construct->callback([&] { code = run_construct(co); });

  IntOptArgs io;
  auto* intopt = app.add_subcommand("intopt", "Exhaustive minimization of g over the epsilon window");
  intopt->add_option("--n", io.n, "Order")->required();
  intopt->add_option("--to", io.to, "Last order of a table");
  intopt->add_option("--epsilon", io.epsilon, "Window half-width as a rational");
  intopt->callback([&] { code = run_intopt(io); });

  ProbArgs pa;
  auto* prob = app.add_subcommand("probsearch", "Random blow-up counterexample conditions");
  prob->require_subcommand(1, 1);
  prob->add_option("--precision", pa.precision, "MPFR precision in bits")->check(CLI::Range(64L, 1L << 20));
  auto* pverify = prob->add_subcommand("verify", "Check one parameter tuple");
  pverify->add_option("--l", pa.l)->required();
  pverify->add_option("--m", pa.m)->required();
  pverify->add_option("--p", pa.p, "Edge probability, rational or decimal")->required();
  pverify->add_option("--s", pa.s)->required();
  pverify->add_option("--t", pa.t)->required();
  pverify->callback([&] { code = run_prob_verify(pa); });
  auto* psearch = prob->add_subcommand("search", "Scan a parameter grid in lexicographic order");
  psearch->add_option("--grid-file", pa.grid)->required()->check(CLI::ExistingFile);
  psearch->add_option("--budget", pa.budget, "Maximum number of grid points");
  psearch->callback([&] { code = run_prob_search(pa); });

  OracleArgs orc;
  int ratio_k = 0;
  auto* oracle = app.add_subcommand("oracle", "Desk-scale oracles");
  oracle->require_subcommand(1, 1);
  auto* omin = oracle->add_subcommand("min-cliques", "Exhaustive minimum k-clique count over admissible graphs");
  omin->add_option("--n", orc.n)->required();
  omin->add_option("--k", orc.k)->required();
  omin->add_option("--l", orc.l)->required();
  omin->add_flag("--allow-nine", orc.allow_nine, "Permit n = 9 (long running)");
  omin->callback([&] { code = run_oracle_min(orc); });
  auto* oratio = oracle->add_subcommand("ratio", "Compare C5 blow-up and two-clique densities");
  oratio->add_option("--k", ratio_k)->required();
  oratio->callback([&] { code = run_oracle_ratio(ratio_k); });

  app.parse_complete_callback([&] {
    set_workers(config.workers);
    if (config.no_cache) DiskCache::instance().set_enabled(false);
  });

  const auto start = std::chrono::steady_clock::now();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "flagforge: " << e.what() << "\n";
    return kUsage;
  } catch (const PrecisionError& e) {
    std::cerr << "flagforge: precision: " << e.what() << "\n";
    return kPrecision;
  } catch (const BudgetExhausted& e) {
    std::cerr << "flagforge: " << e.what() << "\n";
    return kFail;
  } catch (const std::invalid_argument& e) {
    std::cerr << "flagforge: invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "flagforge: error: " << e.what() << "\n";
    return kUsage;
  }
  note("finished in " + std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) + " s");
  return code;
}

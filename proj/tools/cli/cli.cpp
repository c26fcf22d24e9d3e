#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dgmm/dgmm.hpp"

namespace dgmm::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path store_dir(const std::string& positional) {
  if (!positional.empty()) return positional;
  if (const char* env = std::getenv("DGMM_STORE"); env && *env) return env;
  throw Error(ErrorKind::precondition, "no store directory given and DGMM_STORE is not set");
}

struct CueFlags {
  std::optional<std::string> cue_file;
  std::vector<std::string> elements;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::optional<std::string> source;
  std::optional<std::string> interaction;
  std::optional<std::size_t> min_overlap;
  std::optional<std::size_t> max_concepts;
  std::optional<Version> at_version;

  void attach(CLI::App* cmd, bool with_version = true) {
    cmd->add_option("--cue", cue_file, "JSON cue file; flags add to or override it");
    cmd->add_option("--element", elements, "Cue element name (repeatable)");
    cmd->add_option("--from", from, "Time window start (ISO-8601)");
    cmd->add_option("--to", to, "Time window end (ISO-8601)");
    cmd->add_option("--source", source, "Required source name");
    cmd->add_option("--interaction", interaction, "Required interaction id");
    cmd->add_option("--min-overlap", min_overlap, "Minimum distinct cue elements per concept");
    cmd->add_option("--max-concepts", max_concepts, "Keep at most this many concepts");
    if (with_version) cmd->add_option("--at-version", at_version, "Recall against version t");
  }

  Cue build() const {
    Cue cue = cue_file ? parse_cue_json(read_file(*cue_file)) : Cue{};
    cue.elements.insert(cue.elements.end(), elements.begin(), elements.end());
    if (from) cue.from = parse_instant(*from);
    if (to) cue.to = parse_instant(*to);
    if (source) cue.source_name = *source;
    if (interaction) cue.interaction_id = *interaction;
    if (min_overlap) cue.min_element_overlap = *min_overlap;
    if (max_concepts) cue.max_concepts = *max_concepts;
    return cue;
  }
};

Store open_reader(const fs::path& dir, std::ostream& err) {
  check_readable(dir);
  Store store = Store::open(dir, Access::read);
  for (const auto& w : store.warnings()) err << "warning: " << w << '\n';
  return store;
}

Store open_writer(const fs::path& dir, const std::string& purpose, std::ostream& err) {
  Store::Options options;
  options.purpose = purpose;
  Store store = Store::open(dir, Access::write, options);
  for (const auto& w : store.warnings()) err << "warning: " << w << '\n';
  return store;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::corruption: return kCorruption;
    case ErrorKind::busy: return kBusy;
    default: return kDomainError;
  }
}

std::string describe_batch(const Batch& b) {
  std::ostringstream os;
  os << b.version << ' ' << to_string(b.kind) << " +nodes=" << b.created_nodes.size()
     << " -relations=" << b.removed_relations.size()
     << " +relations=" << b.created_relations.size()
     << " weights=" << b.weight_updates.size() << " -nodes=" << b.removed_nodes.size()
     << " tombstones=" << b.tombstones.size();
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Dynamic gist-based memory store", "dgmm"};
  app.require_subcommand(1);

  std::string dir_arg;
  auto add_dir = [&](CLI::App* cmd) {
    cmd->add_option("dir", dir_arg, "Store directory (default: $DGMM_STORE)");
  };

  auto* init = app.add_subcommand("init", "Create an empty store");
  add_dir(init);
  std::optional<std::string> schema_file;
  init->add_option("--schema", schema_file, "Schema document with extension dimensions");

  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest gists, one JSON object per line");
  add_dir(ingest_cmd);
  std::string gist_file = "-";
  ingest_cmd->add_option("gists", gist_file, "Gist file, or - for stdin");

  CueFlags cue_flags;
  auto* recall_cmd = app.add_subcommand("recall", "Recall working memory for a cue");
  add_dir(recall_cmd);
  cue_flags.attach(recall_cmd);
  bool trace = false;
  std::string format = "text";
  recall_cmd->add_flag("--trace", trace, "Explain each touched concept");
  recall_cmd->add_option("--format", format, "text | subgraph")
      ->check(CLI::IsMember({"text", "subgraph"}));

  auto* consolidate_cmd = app.add_subcommand("consolidate", "Merge equivalent concepts");
  add_dir(consolidate_cmd);
  bool generalize_times = false;
  bool role_blind = false;
  consolidate_cmd->add_flag("--generalize-times", generalize_times,
                            "Collapse event times into covering intervals");
  consolidate_cmd->add_flag("--role-blind", role_blind, "Compare element sets ignoring roles");

  auto* surprise_cmd = app.add_subcommand("surprise", "Cue-conditioned structural surprise");
  add_dir(surprise_cmd);
  cue_flags.attach(surprise_cmd, false);
  Version t1 = 0;
  Version t2 = 0;
  std::string op = "nbr";
  int k = 2;
  int dim = 128;
  std::uint64_t seed = 0;
  double theta = 0.0;
  surprise_cmd->add_option("--t1", t1, "Earlier version")->required();
  surprise_cmd->add_option("--t2", t2, "Later version")->required();
  surprise_cmd->add_option("--op", op, "nbr | emb")->check(CLI::IsMember({"nbr", "emb"}));
  surprise_cmd->add_option("--k", k, "Hop radius (nbr) or label rounds (emb)");
  surprise_cmd->add_option("--dim", dim, "Embedding dimension (emb)");
  surprise_cmd->add_option("--seed", seed, "Embedding hash seed (emb)");
  surprise_cmd->add_option("--theta", theta, "Significance threshold");

  auto* sources_cmd = app.add_subcommand("sources", "Cue-conditioned source distribution");
  add_dir(sources_cmd);
  cue_flags.attach(sources_cmd);
  std::string weighting = "uniform";
  sources_cmd->add_option("--weighting", weighting, "uniform | element-weight-sum");

  auto* audit_cmd = app.add_subcommand("audit", "Governance signature of a recall");
  add_dir(audit_cmd);
  cue_flags.attach(audit_cmd);
  std::string predicates_file;
  audit_cmd->add_option("--predicates", predicates_file, "Predicate file")->required();

  auto* propose_cmd = app.add_subcommand("propose", "Template propositions from a recall");
  add_dir(propose_cmd);
  cue_flags.attach(propose_cmd);
  std::size_t limit = 10;
  bool embedding_ties = false;
  propose_cmd->add_option("--limit", limit, "Maximum propositions");
  propose_cmd->add_flag("--embedding-ties", embedding_ties,
                        "Break salience ties by embedding distance to the cue");

  auto* validate_cmd = app.add_subcommand("validate", "Check the stored graph against its schema");
  add_dir(validate_cmd);

  auto* log_cmd = app.add_subcommand("log", "List committed log records");
  add_dir(log_cmd);
  Version from_version = 0;
  log_cmd->add_option("--from-version", from_version, "First version to list");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kDomainError;
  }

  try {
    if (init->parsed()) {
      fs::path dir = store_dir(dir_arg);
      auto schema = schema_file ? Schema::parse(read_file(*schema_file)) : Schema::default_schema();
      Store::create(dir, schema);
      out << "initialized empty store at " << dir.string() << '\n';
      return kOk;
    }

    if (ingest_cmd->parsed()) {
      // `dgmm ingest FILE` with $DGMM_STORE set: the lone positional is the
      // gist file unless it names a directory.
      if (ingest_cmd->get_option("gists")->count() == 0 && !dir_arg.empty() &&
          std::getenv("DGMM_STORE") && !fs::is_directory(dir_arg)) {
        gist_file = dir_arg;
        dir_arg.clear();
      }
      Store store = open_writer(store_dir(dir_arg), "ingest", err);
      std::vector<GistLine> lines;
      if (gist_file == "-") {
        lines = read_gist_lines(store.graph().schema(), in);
      } else {
        std::ifstream file(gist_file);
        if (!file) throw Error(ErrorKind::io, "cannot read " + gist_file);
        lines = read_gist_lines(store.graph().schema(), file);
      }
      std::size_t accepted = 0;
      std::size_t rejected = 0;
      for (const auto& line : lines) {
        try {
          if (!line.gist) throw Error(ErrorKind::parse, line.error);
          auto receipt = ingest(store.mutable_graph(), *line.gist);
          out << "line " << line.line_number << ": concept " << receipt.concept_id.value
              << " at version " << receipt.version << " (" << receipt.created_node_ids.size()
              << " new nodes, " << receipt.created_relation_count << " relations)\n";
          ++accepted;
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::io || e.kind() == ErrorKind::corruption) throw;
          err << "line " << line.line_number << ": " << e.what() << '\n';
          ++rejected;
        }
      }
      out << accepted << " gist(s) ingested, " << rejected << " rejected\n";
      return rejected ? kDomainError : kOk;
    }

    if (consolidate_cmd->parsed()) {
      Store store = open_writer(store_dir(dir_arg), "consolidate", err);
      ConsolidationOptions options;
      options.generalize_times = generalize_times;
      options.mode = role_blind ? SignatureMode::role_blind : SignatureMode::typed;
      auto report = consolidation_pass(store.mutable_graph(), options);
      out << format_consolidation_report(store.graph(), report);
      return kOk;
    }

    if (log_cmd->parsed()) {
      fs::path dir = store_dir(dir_arg);
      check_readable(dir);
      auto log = read_log(dir / kLogFileName);
      for (const auto& w : log.warnings) err << "warning: " << w << '\n';
      out << "schema: " << log.schema->node_type_count() << " node types, "
          << log.schema->relation_type_count() << " relation types\n";
      out << "records: " << log.batches.size() << '\n';
      for (std::size_t i = 0; i < log.batches.size(); ++i) {
        if (log.batches[i].version < from_version) continue;
        out << "record " << i + 1 << " @" << log.offsets[i] << ": "
            << describe_batch(log.batches[i]) << '\n';
      }
      return kOk;
    }

    Store store = open_reader(store_dir(dir_arg), err);
    const MemoryGraph& graph = store.graph();

    if (validate_cmd->parsed()) {
      auto report = validate_graph(graph.schema(), graph);
      out << format_report(graph.schema(), report);
      return report.empty() ? kOk : kDomainError;
    }

    Cue cue = cue_flags.build();

    if (surprise_cmd->parsed()) {
      SurpriseOptions options;
      options.op = op == "emb" ? DivergenceOperator::embedding : DivergenceOperator::neighborhood;
      options.k = k;
      options.embedding = {k, dim, seed};
      options.theta = theta;
      auto report = surprise(graph, cue, t1, t2, options);
      out << format_surprise(graph.schema(), report);
      return kOk;
    }

    if (recall_cmd->parsed()) {
      auto [w, tr] = recall_trace(graph, cue, cue_flags.at_version);
      out << (format == "subgraph" ? format_subgraph(w) : format_working_memory(w));
      if (trace) out << format_trace(tr);
      return kOk;
    }

    WorkingMemory w = recall(graph, cue, cue_flags.at_version);

    if (sources_cmd->parsed()) {
      out << format_distribution(source_distribution(w, parse_weighting(weighting)));
      return kOk;
    }

    if (audit_cmd->parsed()) {
      auto lines = read_predicate_lines(read_file(predicates_file));
      auto sig = governance_signature(w, lines);
      out << format_signature(sig);
      if (sig.has_errors()) {
        err << "some predicates could not be parsed\n";
        return kDomainError;
      }
      return kOk;
    }

    if (propose_cmd->parsed()) {
      std::optional<EmbeddingSpace> z;
      if (embedding_ties) z = embed(w);
      out << format_propositions(generate_propositions(w, z ? &*z : nullptr, limit));
      return kOk;
    }
  } catch (const CorruptionError& e) {
    err << "corruption: record " << e.record() << " at offset " << e.offset() << ": "
        << e.what() << '\n';
    return kCorruption;
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kDomainError;
}

}  // namespace dgmm::cli

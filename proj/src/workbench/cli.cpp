#include "mex/workbench/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mex/core/binary_io.hpp"
#include "mex/core/error.hpp"
#include "mex/core/utf8.hpp"
#include "mex/corpus/conll.hpp"
#include "mex/corpus/corpus_io.hpp"
#include "mex/embed/stack.hpp"
#include "mex/eval/folds.hpp"
#include "mex/eval/iaa.hpp"
#include "mex/eval/report.hpp"
#include "mex/workbench/annotate.hpp"
#include "mex/workbench/experiment.hpp"
#include "mex/workbench/service.hpp"
#include "mex/workbench/synthetic.hpp"

namespace fs = std::filesystem;

namespace mex::workbench {

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string schema_path;

  corpus::Schema schema() const {
    return schema_path.empty() ? corpus::Schema::builtin() : corpus::Schema::from_file(schema_path);
  }
};

std::shared_ptr<const embed::SubwordModel> word_model(const std::string& path, int dim,
                                                      const std::vector<corpus::AnnotatedDocument>& docs,
                                                      std::uint64_t seed, std::ostream& out) {
  if (!path.empty()) return std::make_shared<const embed::SubwordModel>(embed::SubwordModel::load(path));
  embed::CbowConfig config;
  config.dim = dim;
  config.buckets = 20000;
  config.min_count = 1;
  config.seed = seed;
  auto m = std::make_shared<const embed::SubwordModel>(embed::SubwordModel::train(token_sentences(docs), config));
  out << "trained " << dim << "-dimensional word embeddings on the training documents (" << m->vocab_size()
      << " words)\n";
  return m;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < warnings.size() && i < kShown; ++i) err << "warning: " << warnings[i] << "\n";
  if (warnings.size() > kShown) err << "warning: " << warnings.size() - kShown << " more warnings not shown\n";
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path.empty() || path == "-") {
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  return read_file(path);
}

std::string bundle_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MEX_BUNDLE"); env && *env) return env;
  throw Error("no model bundle given; use --bundle or set MEX_BUNDLE");
}

void print_scores(const eval::EvalReport& report, const std::string& title, bool json, std::ostream& out) {
  if (json) {
    out << eval::to_json(report).dump(2) << "\n";
    return;
  }
  out << eval::format_table(report, title);
  out << "micro F1: " << report.micro.f1 << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"mex: clinical information extraction workbench"};
  app.name("mex");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--schema", g.schema_path, "Annotation schema file (default: built-in)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic annotated corpus");
  SyntheticSpec spec;
  std::string synth_out, templates_path;
  bool second = false;
  double perturbation = 0.0;
  synth->add_option("--out", synth_out, "Output corpus directory")->required();
  synth->add_option("--docs", spec.documents, "Number of documents")->capture_default_str();
  synth->add_option("--summary-fraction", spec.summary_fraction, "Share of discharge summaries")->capture_default_str();
  synth->add_option("--noise", spec.noise_rate, "Typo/abbreviation rate per word")->capture_default_str();
  synth->add_flag("--second-annotator", second, "Also write a perturbed annotator_b copy");
  synth->add_option("--perturbation", perturbation, "Span perturbation rate of annotator_b")->capture_default_str();
  synth->add_option("--templates", templates_path, "Template inventory file (default: built-in)");
  synth->callback([&] {
    const auto schema = g.schema();
    spec.seed = g.seed;
    const auto inv = templates_path.empty() ? TemplateInventory::parse(TemplateInventory::builtin_text(), schema)
                                            : TemplateInventory::parse(read_file(templates_path), schema);
    const auto s = write_synthetic_corpus(synth_out, spec, inv, schema, second, perturbation);
    out << "wrote " << s.documents << " documents (" << s.notes << " notes, " << s.summaries << " summaries), "
        << s.spans << " concepts, " << s.relations << " relations to " << synth_out << "\n";
  });

  // split
  auto* split = app.add_subcommand("split", "Merge, normalize and split a corpus into folds");
  std::string split_corpus, split_out;
  std::size_t folds = 5;
  split->add_option("--corpus", split_corpus, "Corpus directory")->required();
  split->add_option("--out", split_out, "Output directory")->required();
  split->add_option("--folds", folds, "Number of folds")->capture_default_str();
  split->callback([&] {
    const auto schema = g.schema();
    const auto loaded = corpus::load_corpus(split_corpus, schema, corpus::Tokenizer());
    print_warnings(loaded.warnings, err);
    const auto merged = corpus::merge_annotators(loaded.all_versions()).docs;
    if (merged.empty()) throw Error(split_corpus + ": no documents found");
    std::map<std::string, const corpus::AnnotatedDocument*> by_id;
    std::vector<std::string> ids;
    for (const auto& d : merged) {
      by_id[d.doc_id] = &d;
      ids.push_back(d.doc_id);
    }
    const auto plan = eval::make_folds(ids, folds, {0.75, 0.10, 0.15}, g.seed);
    nlohmann::ordered_json jplan;
    jplan["seed"] = plan.seed;
    jplan["normalization"] = corpus::NormalizationPolicy{}.describe();
    jplan["folds"] = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
      const auto& fold = plan.folds[f];
      std::vector<corpus::AnnotatedDocument> train;
      for (const auto& id : fold.train) train.push_back(*by_id.at(id));
      const auto freq = corpus::concept_frequencies(train);
      corpus::NormalizationReport report;
      const auto fold_dir = fs::path(split_out) / ("fold_" + std::to_string(f));
      for (const auto& [part, part_ids] : {std::pair{"train", &fold.train}, {"dev", &fold.dev}, {"test", &fold.test}}) {
        std::vector<corpus::AnnotatedDocument> docs;
        for (const auto& id : *part_ids) docs.push_back(*by_id.at(id));
        for (const auto& d : normalize_all(docs, freq, &report)) {
          corpus::save_document((fold_dir / part / "gold").string(), d, true);
        }
      }
      jplan["folds"].push_back({{"train", fold.train}, {"dev", fold.dev}, {"test", fold.test}});
      out << "fold " << f << ": " << fold.train.size() << " train, " << fold.dev.size() << " dev, "
          << fold.test.size() << " test; " << report.to_string() << "\n";
    }
    write_file((fs::path(split_out) / "plan.json").string(), jplan.dump(2) + "\n");
  });

  // iaa
  auto* iaa = app.add_subcommand("iaa", "Character-level agreement between annotators");
  std::string iaa_corpus;
  bool iaa_relations = false, iaa_json = false;
  iaa->add_option("--corpus", iaa_corpus, "Corpus directory with one folder per annotator")->required();
  iaa->add_flag("--relations", iaa_relations, "Score relations instead of concepts");
  iaa->add_flag("--json", iaa_json, "JSON output");
  iaa->callback([&] {
    const auto loaded = corpus::load_corpus(iaa_corpus, g.schema(), corpus::Tokenizer());
    const auto report = eval::char_level_iaa(
        loaded.by_annotator, iaa_relations ? eval::IaaTarget::kRelations : eval::IaaTarget::kConcepts);
    if (iaa_json) {
      out << eval::to_json(report).dump(2) << "\n";
    } else {
      out << eval::format_iaa(report);
    }
  });

  // train-embeddings
  auto* temb = app.add_subcommand("train-embeddings", "Train subword CBOW embeddings");
  std::vector<std::string> emb_corpora;
  std::string emb_out;
  embed::CbowConfig cbow;
  temb->add_option("--corpus", emb_corpora, "Corpus directories")->required();
  temb->add_option("--out", emb_out, "Output .mexe file")->required();
  temb->add_option("--dim", cbow.dim)->capture_default_str();
  temb->add_option("--window", cbow.window)->capture_default_str();
  temb->add_option("--negatives", cbow.negatives)->capture_default_str();
  temb->add_option("--epochs", cbow.epochs)->capture_default_str();
  temb->add_option("--lr", cbow.lr)->capture_default_str();
  temb->add_option("--min-count", cbow.min_count)->capture_default_str();
  temb->add_option("--buckets", cbow.buckets)->capture_default_str();
  temb->add_option("--minn", cbow.minn)->capture_default_str();
  temb->add_option("--maxn", cbow.maxn)->capture_default_str();
  temb->callback([&] {
    const auto schema = g.schema();
    embed::Sentences sentences;
    for (const auto& dir : emb_corpora) {
      const auto s = token_sentences(load_documents(dir, schema));
      sentences.insert(sentences.end(), s.begin(), s.end());
    }
    cbow.seed = g.seed;
    embed::CbowStats stats;
    const auto m = embed::SubwordModel::train(sentences, cbow, &stats);
    m.save(emb_out);
    out << "vocabulary " << m.vocab_size() << ", dimension " << m.dim() << ", written to " << emb_out << "\n";
  });

  // train-charlm
  auto* tlm = app.add_subcommand("train-charlm", "Train forward and backward character language models");
  std::vector<std::string> lm_corpora;
  std::string lm_prefix;
  embed::CharLmConfig lm;
  tlm->add_option("--corpus", lm_corpora, "Corpus directories")->required();
  tlm->add_option("--out-prefix", lm_prefix, "Writes <prefix>.fwd.mexc and <prefix>.bwd.mexc")->required();
  tlm->add_option("--hidden", lm.hidden)->capture_default_str();
  tlm->add_option("--tbptt", lm.tbptt)->capture_default_str();
  tlm->add_option("--epochs", lm.epochs)->capture_default_str();
  tlm->add_option("--lr", lm.lr)->capture_default_str();
  tlm->callback([&] {
    const auto schema = g.schema();
    std::u32string text;
    for (const auto& dir : lm_corpora) {
      for (const auto& d : load_documents(dir, schema)) {
        text += d.text;
        text += U'\n';
      }
    }
    lm.seed = g.seed;
    for (const auto dir : {embed::Direction::kForward, embed::Direction::kBackward}) {
      embed::CharLmStats stats;
      const auto m = embed::CharLanguageModel::train(text, dir, lm, &stats);
      const auto path = lm_prefix + (dir == embed::Direction::kForward ? ".fwd.mexc" : ".bwd.mexc");
      m.save(path);
      out << embed::direction_name(dir) << " model: held-out loss "
          << (stats.held_out_loss.empty() ? 0.0 : stats.held_out_loss.back()) << " nats/char, written to " << path
          << "\n";
    }
  });

  // train-tagger
  auto* ttag = app.add_subcommand("train-tagger", "Train a POS or concept tagger");
  tagger::TaggerConfig tc;
  std::string task_name = "concepts", scheme_name = "BIOES", tag_train, tag_dev, tag_out, tag_emb, lm_fwd, lm_bwd,
              pooling = "none";
  int tag_embed_dim = 100;
  ttag->add_option("--task", task_name, "pos or concepts")->check(CLI::IsMember({"pos", "concepts"}))->capture_default_str();
  ttag->add_option("--train", tag_train, "Training corpus directory")->required();
  ttag->add_option("--dev", tag_dev, "Development corpus directory");
  ttag->add_option("--out", tag_out, "Output component file")->required();
  ttag->add_option("--embeddings", tag_emb, "Word embeddings (.mexe); trained on --train when absent");
  ttag->add_option("--embed-dim", tag_embed_dim, "Dimension of on-the-fly embeddings")->capture_default_str();
  ttag->add_option("--charlm-fwd", lm_fwd, "Forward character LM (.mexc)");
  ttag->add_option("--charlm-bwd", lm_bwd, "Backward character LM (.mexc)");
  ttag->add_option("--pooling", pooling, "none, min, max or mean")
      ->check(CLI::IsMember({"none", "min", "max", "mean"}))
      ->capture_default_str();
  ttag->add_option("--scheme", scheme_name, "BIOES or BIO")->check(CLI::IsMember({"BIOES", "BIO"}))->capture_default_str();
  ttag->add_option("--hidden", tc.hidden)->capture_default_str();
  ttag->add_option("--epochs", tc.max_epochs)->capture_default_str();
  ttag->add_option("--batch", tc.batch_size)->capture_default_str();
  ttag->add_option("--lr", tc.lr)->capture_default_str();
  ttag->add_option("--patience", tc.patience)->capture_default_str();
  ttag->add_option("--min-lr", tc.min_lr)->capture_default_str();
  ttag->add_option("--dropout", tc.locked_dropout)->capture_default_str();
  ttag->add_option("--word-dropout", tc.word_dropout)->capture_default_str();
  ttag->add_option("--log", tc.log_path, "Append per-epoch lines to this file");
  ttag->callback([&] {
    const auto schema = g.schema();
    tc.task = tagger::parse_task(task_name);
    tc.scheme = corpus::parse_scheme(scheme_name);
    tc.seed = g.seed;
    const auto train = load_documents(tag_train, schema);
    const auto dev = tag_dev.empty() ? std::vector<corpus::AnnotatedDocument>{} : load_documents(tag_dev, schema);
    std::vector<std::shared_ptr<const embed::TokenEmbedder>> providers{
        std::make_shared<embed::WordEmbedder>(word_model(tag_emb, tag_embed_dim, train, g.seed, out))};
    if (lm_fwd.empty() != lm_bwd.empty()) throw Error("--charlm-fwd and --charlm-bwd go together");
    if (!lm_fwd.empty()) {
      auto ctx = std::make_shared<const embed::ContextualEmbedder>(
          std::make_shared<const embed::CharLanguageModel>(embed::CharLanguageModel::load(lm_fwd)),
          std::make_shared<const embed::CharLanguageModel>(embed::CharLanguageModel::load(lm_bwd)));
      if (pooling == "none") {
        providers.push_back(ctx);
      } else {
        providers.push_back(std::make_shared<embed::PooledEmbedder>(ctx, embed::parse_pooling(pooling)));
      }
    } else if (pooling != "none") {
      throw Error("--pooling needs character language models");
    }
    auto stack = std::make_shared<const embed::EmbeddingStack>(providers);
    tagger::TrainReport report;
    const auto model = tagger::train_tagger(tagger::tagged_sentences(train, tc.task, tc.scheme),
                                            tagger::tagged_sentences(dev, tc.task, tc.scheme), stack, schema, tc,
                                            &report);
    print_warnings(report.warnings, err);
    save_component(tag_out, make_component(model, schema));
    out << "trained " << report.epochs.size() << " epochs; best dev "
        << (tc.task == tagger::TaggerTask::kPos ? "accuracy " : "strict micro F1 ") << report.best_dev << " at epoch "
        << report.best_epoch << "; written to " << tag_out << "\n";
  });

  // train-relations
  auto* trel = app.add_subcommand("train-relations", "Train the relation classifier");
  relation::RelationConfig rc;
  relation::CandidatePolicy policy;
  std::string rel_train, rel_dev, rel_out, rel_emb;
  int rel_embed_dim = 100;
  bool no_concepts = false, no_filter = false;
  trel->add_option("--train", rel_train, "Training corpus directory")->required();
  trel->add_option("--dev", rel_dev, "Development corpus directory");
  trel->add_option("--out", rel_out, "Output component file")->required();
  trel->add_option("--embeddings", rel_emb, "Word embeddings (.mexe); trained on --train when absent");
  trel->add_option("--embed-dim", rel_embed_dim)->capture_default_str();
  trel->add_option("--windows", rc.windows, "Convolution window sizes")->delimiter(',')->capture_default_str();
  trel->add_option("--filters", rc.filters)->capture_default_str();
  trel->add_option("--position-dim", rc.position_dim)->capture_default_str();
  trel->add_option("--concept-dim", rc.concept_dim)->capture_default_str();
  trel->add_option("--clip", rc.clip)->capture_default_str();
  trel->add_option("--dropout", rc.dropout)->capture_default_str();
  trel->add_flag("--no-concepts", no_concepts, "Leave out the concept type embeddings");
  trel->add_option("--epochs", rc.max_epochs)->capture_default_str();
  trel->add_option("--batch", rc.batch_size)->capture_default_str();
  trel->add_option("--lr", rc.lr)->capture_default_str();
  trel->add_option("--patience", rc.patience, "Stop after this many epochs without dev gain (0: never)")
      ->capture_default_str();
  trel->add_option("--negative-ratio", policy.negative_ratio, "Share of NO_RELATION training candidates kept")
      ->capture_default_str();
  trel->add_option("--max-distance", policy.max_distance)->capture_default_str();
  trel->add_flag("--no-signature-filter", no_filter, "Keep pairs no relation type accepts");
  trel->add_option("--log", rc.log_path, "Append per-epoch lines to this file");
  trel->callback([&] {
    const auto schema = g.schema();
    rc.use_concepts = !no_concepts;
    rc.seed = g.seed;
    policy.seed = g.seed;
    policy.signature_filter = !no_filter;
    const auto train = load_documents(rel_train, schema);
    const auto dev = rel_dev.empty() ? std::vector<corpus::AnnotatedDocument>{} : load_documents(rel_dev, schema);
    auto dev_policy = policy;
    dev_policy.negative_ratio = 1.0;
    relation::RelationReport report;
    const auto model = relation::train_relation_model(
        relation::corpus_candidates(train, policy, schema), relation::corpus_candidates(dev, dev_policy, schema),
        word_model(rel_emb, rel_embed_dim, train, g.seed, out), schema, rc, &report);
    print_warnings(report.warnings, err);
    save_component(rel_out, make_component(model, schema));
    out << "trained " << report.epochs.size() << " epochs; best dev micro F1 " << report.best_dev_f1
        << " at epoch " << report.best_epoch << "; written to " << rel_out << "\n";
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained component on a corpus");
  std::string ev_model, ev_bundle, ev_stage, ev_test, ev_mode = "strict";
  bool ev_json = false, ev_pipeline = false;
  evaluate->add_option("--model", ev_model, "Component file");
  evaluate->add_option("--bundle", ev_bundle, "Bundle directory (with --stage)");
  evaluate->add_option("--stage", ev_stage, "pos, concepts or relations");
  evaluate->add_option("--test", ev_test, "Test corpus directory")->required();
  evaluate->add_option("--mode", ev_mode, "strict or lenient")->check(CLI::IsMember({"strict", "lenient"}))->capture_default_str();
  evaluate->add_flag("--json", ev_json, "JSON output");
  evaluate->add_flag("--pipeline", ev_pipeline,
                     "Relations over the bundle's predicted concepts instead of gold concepts");
  evaluate->callback([&] {
    const auto schema = g.schema();
    Component c;
    if (!ev_model.empty()) {
      c = load_component(ev_model);
      check_fingerprint(c.schema_fingerprint, schema, ev_model);
    } else {
      if (ev_stage.empty()) throw Error("give --model, or --bundle with --stage");
      const auto b = load_bundle(bundle_dir(ev_bundle), schema);
      c.kind = parse_stage(ev_stage);
      c.tagger = c.kind == ComponentKind::kPosTagger ? b.pos : b.concepts;
      c.relations = b.relations;
      if ((c.kind == ComponentKind::kRelationModel && !c.relations) ||
          (c.kind != ComponentKind::kRelationModel && !c.tagger)) {
        throw Error("bundle has no '" + ev_stage + "' stage");
      }
    }
    const auto docs = load_documents(ev_test, schema);
    if (ev_pipeline) {
      if (c.kind != ComponentKind::kRelationModel) throw Error("--pipeline applies to --stage relations");
      const auto b = load_bundle(bundle_dir(ev_bundle), schema);
      if (!b.concepts) throw Error("bundle has no 'concepts' stage");
      print_scores(evaluate_relation_pipeline(*b.concepts, *c.relations, docs, relation::CandidatePolicy{}, schema),
                   "relations (pipeline)", ev_json, out);
      return;
    }
    switch (c.kind) {
      case ComponentKind::kPosTagger: {
        const double acc = evaluate_pos(*c.tagger, docs);
        if (ev_json) {
          out << nlohmann::ordered_json{{"accuracy", acc}}.dump(2) << "\n";
        } else {
          out << "POS accuracy: " << acc << "\n";
        }
        break;
      }
      case ComponentKind::kConceptTagger:
        print_scores(evaluate_concepts(*c.tagger, docs, eval::parse_mode(ev_mode), schema),
                     std::string("concepts (") + ev_mode + ")", ev_json, out);
        break;
      case ComponentKind::kRelationModel:
        print_scores(evaluate_relations(*c.relations, docs, relation::CandidatePolicy{}, schema), "relations",
                     ev_json, out);
        break;
    }
  });

  // bundle
  auto* bundle_cmd = app.add_subcommand("bundle", "Package trained components into a model bundle");
  std::string b_pos, b_concepts, b_relations, b_out, b_abbrev;
  bundle_cmd->add_option("--pos", b_pos, "POS tagger component");
  bundle_cmd->add_option("--concepts", b_concepts, "Concept tagger component");
  bundle_cmd->add_option("--relations", b_relations, "Relation model component");
  bundle_cmd->add_option("--abbreviations", b_abbrev, "Extra tokenizer abbreviations file");
  bundle_cmd->add_option("--out", b_out, "Bundle directory")->required();
  bundle_cmd->callback([&] {
    ModelBundle b;
    b.schema = g.schema();
    b.tokenizer = corpus::TokenizerConfig::builtin();
    if (!b_abbrev.empty()) b.tokenizer.extend_from_file(b_abbrev);
    auto take = [&](const std::string& path, ComponentKind kind) {
      if (path.empty()) return Component{};
      auto c = load_component(path);
      if (c.kind != kind) throw Error(path + " holds a " + stage_name(c.kind) + " model, not " + stage_name(kind));
      check_fingerprint(c.schema_fingerprint, b.schema, path);
      return c;
    };
    b.pos = take(b_pos, ComponentKind::kPosTagger).tagger;
    b.concepts = take(b_concepts, ComponentKind::kConceptTagger).tagger;
    b.relations = take(b_relations, ComponentKind::kRelationModel).relations;
    save_bundle(b, b_out);
    out << "bundle with " << b.manifest.components.size() << " components written to " << b_out << "\n";
  });

  // annotate
  auto* ann = app.add_subcommand("annotate", "Run the full pipeline on a text");
  std::string a_bundle, a_input, a_format = "json";
  ann->add_option("--bundle", a_bundle, "Bundle directory (default: $MEX_BUNDLE)");
  ann->add_option("--input", a_input, "Text file (default: standard input)");
  ann->add_option("--format", a_format, "json, standoff or conll")
      ->check(CLI::IsMember({"json", "standoff", "conll"}))
      ->capture_default_str();
  ann->callback([&] {
    const auto b = load_bundle(bundle_dir(a_bundle), g.schema());
    const auto result = annotate(b, read_input(a_input, in));
    if (a_format == "json") {
      out << result_json(result);
    } else if (a_format == "standoff") {
      out << corpus::export_standoff(result.to_document()).ann;
    } else {
      out << corpus::export_conll(result.to_document());
    }
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the pipeline over HTTP");
  std::string s_bundle, s_host = "127.0.0.1";
  int s_port = 8080;
  ServiceOptions s_options;
  serve->add_option("--bundle", s_bundle, "Bundle directory (default: $MEX_BUNDLE)");
  serve->add_option("--host", s_host)->capture_default_str();
  serve->add_option("--port", s_port)->capture_default_str();
  serve->add_option("--max-body", s_options.max_body, "Largest accepted request body in bytes")->capture_default_str();
  serve->add_option("--threads", s_options.threads)->capture_default_str();
  serve->callback([&] {
    auto b = std::make_shared<const ModelBundle>(load_bundle(bundle_dir(s_bundle), g.schema()));
    AnnotationService service(b, s_options);
    const int port = service.bind(s_host, s_port);
    out << "listening on " << s_host << ":" << port << std::endl;
    service.run();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) err << app.help();
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace mex::workbench

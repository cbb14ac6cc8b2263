"""Command-line entry point for batch pipelines and acceptance runs.

Every subcommand exits 0 on success and nonzero with a module-qualified
diagnostic on failure; runs taking --seed are bit-reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import agreement as agreement_mod
from . import corpus as corpus_mod
from . import evaluation as evaluation_mod
from . import generator as generator_mod
from . import index as index_mod
from . import model as model_mod
from . import ontology as ontology_mod
from .errors import ClinotateError


def _load_ontology(args):
    if getattr(args, "catalog", None):
        with open(args.catalog, "rb") as fh:
            return ontology_mod.load_catalog(fh.read())
    return ontology_mod.seed_catalog()


def cmd_validate_ontology(args) -> int:
    if args.catalog:
        with open(args.catalog, "rb") as fh:
            ontology = ontology_mod.build_ontology(fh.read())
    else:
        ontology = ontology_mod.seed_catalog()
    violations = ontology_mod.validate(ontology)
    print(f"{len(violations)} violations")
    for v in violations:
        print(f"  {v}")
    return 0 if not violations else 1


def cmd_gen_synthetic(args) -> int:
    ontology = _load_ontology(args)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    else:
        config = generator_mod.default_config()
    if args.sentences is not None:
        config["sentence_count"] = args.sentences
    if args.sentences_per_doc is not None:
        config["sentences_per_document"] = args.sentences_per_doc
    if args.patients is not None:
        config["patients"] = args.patients
    records = generator_mod.generate_synthetic(config, args.seed, ontology)
    corpus_mod.save_corpus(records, args.out)
    print(f"# seed: {args.seed}")
    print(f"wrote {len(records)} documents "
          f"({config['sentence_count']} sentences) to {args.out}")
    return 0


def cmd_split(args) -> int:
    records = corpus_mod.load_corpus(args.corpus)
    ratios = tuple(float(x) for x in args.ratios.split(","))
    train, dev, test = corpus_mod.split_dataset(records, ratios, args.seed)
    outputs = {}
    for name, split in (("train", train), ("dev", dev), ("test", test)):
        path = f"{args.out_prefix}.{name}.jsonl"
        corpus_mod.save_corpus(split, path)
        outputs[name] = path
    rows = corpus_mod.split_stats(train, dev, test)
    print(f"# seed: {args.seed}")
    if args.json:
        print(json.dumps({"seed": args.seed, "ratios": list(ratios),
                          "stats": rows, "files": outputs}, sort_keys=True))
    else:
        print(corpus_mod.format_split_stats(rows))
        for name, path in outputs.items():
            print(f"{name}: {path}")
    return 0


def cmd_train(args) -> int:
    ontology = _load_ontology(args)
    train_records = corpus_mod.load_corpus(args.corpus)
    dev_records = corpus_mod.load_corpus(args.dev)
    hp = model_mod.Hyperparams(epochs=args.epochs, beam_width=args.beam,
                               depth_weight_alpha=args.alpha, seed=args.seed,
                               averaging=not args.no_averaging)
    trained = model_mod.train(train_records, dev_records, ontology, hp,
                              annotator=args.annotator)
    model_mod.save_model(trained, args.out)
    print(f"# seed: {args.seed}")
    for epoch, f1 in enumerate(trained.dev_history, 1):
        print(f"epoch {epoch}: dev micro-F1 {f1:.4f}")
    print(f"model written to {args.out}")
    return 0


def _predictions_for(records, trained, ontology):
    gold_map, pred_map = {}, {}
    for record in records:
        aset = record.annotation_set("gold")
        gold_map[record.doc.id] = list(aset.mentions) if aset else []
        pred_map[record.doc.id] = model_mod.predict_document(
            trained, record.doc.text, ontology)
    return gold_map, pred_map


def cmd_evaluate(args) -> int:
    ontology = _load_ontology(args)
    trained = model_mod.load_model(args.model,
                                   expected_ontology_version=ontology.version)
    records = corpus_mod.load_corpus(args.corpus)
    gold_map, pred_map = _predictions_for(records, trained, ontology)
    report = evaluation_mod.nerc_scores(gold_map, pred_map, ontology)
    if args.json:
        print(json.dumps(evaluation_mod.report_to_dict(report), sort_keys=True))
    else:
        print(evaluation_mod.format_report(report))
    return 0


def cmd_agreement(args) -> int:
    ontology = _load_ontology(args)
    records = corpus_mod.load_corpus(args.corpus)
    report = agreement_mod.agreement_report(records, mode=args.mode,
                                            ontology=ontology)
    if args.json:
        print(json.dumps(agreement_mod.report_to_dict(report), sort_keys=True))
    else:
        print(agreement_mod.format_report(report))
    return 0


def cmd_index(args) -> int:
    ontology = _load_ontology(args)
    records = corpus_mod.load_corpus(args.corpus)
    predictor = None
    if args.source == "predicted":
        if not args.model:
            print("index: --source predicted needs --model", file=sys.stderr)
            return 2
        trained = model_mod.load_model(args.model,
                                       expected_ontology_version=ontology.version)
        predictor = lambda text: model_mod.predict_document(trained, text, ontology)
    built = index_mod.build_index(records, source=args.source,
                                  canonical_annotator=args.annotator,
                                  predictor=predictor)
    index_mod.save_index(built, args.out)
    print(f"indexed {built.citation_count()} citations "
          f"({len(built.doc_concepts)} documents) to {args.out}")
    return 0


def cmd_query(args) -> int:
    idx = index_mod.load_index(args.index)
    if args.timeline:
        citations = index_mod.timeline(idx, args.patient, args.timeline)
        rows = [{"date": c.date.isoformat(), "doc_id": c.doc_id,
                 "record_type": c.record_type, "specialty": c.specialty,
                 "start": c.span.start, "end": c.span.end, "surface": c.surface}
                for c in citations]
        if args.json:
            print(json.dumps(rows, ensure_ascii=False, sort_keys=True))
        else:
            for r in rows:
                print(f"{r['date']}  {r['record_type']:<18}{r['specialty']:<20}"
                      f"{r['doc_id']}  [{r['start']},{r['end']})  {r['surface']}")
    elif args.texts:
        node_ids = [n for n in args.texts.split(",") if n]
        count, doc_ids = index_mod.texts_with_concepts(idx, args.patient,
                                                       node_ids, args.mode)
        if args.json:
            print(json.dumps({"count": count, "doc_ids": doc_ids}, sort_keys=True))
        else:
            print(f"{count} documents")
            for d in doc_ids:
                print(f"  {d}")
    else:
        rows = index_mod.concept_frequencies(idx, args.patient)
        if args.json:
            print(json.dumps([{"node": n, "label": l, "count": c}
                              for n, l, c in rows], ensure_ascii=False, sort_keys=True))
        else:
            for n, l, c in rows:
                print(f"{c:>6}  {l:<32}{n}")
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    config = ServiceConfig(corpus_path=args.corpus, catalog_path=args.catalog,
                           model_path=args.model, canonical_annotator=args.annotator,
                           auth_token=args.token)
    serve(config, host=args.host, port=args.port, ui_dir=args.ui)
    return 0


def cmd_predict(args) -> int:
    ontology = _load_ontology(args)
    trained = model_mod.load_model(args.model,
                                   expected_ontology_version=ontology.version)
    if args.text is not None:
        text = args.text
    else:
        with open(args.infile, encoding="utf-8") as fh:
            text = fh.read()
    if args.trace:
        tokens = corpus_mod.tokenize(text)
        for ts, te in corpus_mod.sentence_ranges(text, tokens):
            _, actions = model_mod.decode_trace(trained, tokens[ts:te], ontology)
            print("# " + " ".join(t.form for t in tokens[ts:te]))
            print(model_mod.tr.actions_to_str(actions))
    mentions = model_mod.predict_document(trained, text, ontology)
    payload = [{"id": m.id, "start": m.span.start, "end": m.span.end,
                "node": m.node_id, "modifiers": sorted(m.modifier_ids),
                "surface": text[m.span.start:m.span.end]}
               for m in mentions]
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    else:
        for m in payload:
            mods = ("  [" + ",".join(m["modifiers"]) + "]") if m["modifiers"] else ""
            print(f"[{m['start']},{m['end']})  {m['node']:<44}{m['surface']}{mods}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clinotate",
        description="Clinical-text annotation, nested NER and patient concept index")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-ontology", help="check a catalog file")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.set_defaults(func=cmd_validate_ontology)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic annotated corpus")
    p.add_argument("--out", required=True, help="output corpus (JSON-lines)")
    p.add_argument("--seed", type=int, default=0, help="PRNG seed")
    p.add_argument("--config", help="generator config JSON (default: built-in)")
    p.add_argument("--sentences", type=int, help="override sentence_count")
    p.add_argument("--sentences-per-doc", type=int, help="override sentences per document")
    p.add_argument("--patients", type=int, help="override patient pool size")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("split", help="split a corpus into train/dev/test")
    p.add_argument("--corpus", required=True, help="input corpus (JSON-lines)")
    p.add_argument("--out-prefix", required=True, help="prefix for the three output files")
    p.add_argument("--ratios", default="0.899,0.052,0.049",
                   help="train,dev,test ratios (must sum to 1)")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train the action scorer")
    p.add_argument("--corpus", required=True, help="training corpus")
    p.add_argument("--dev", required=True, help="development corpus")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--epochs", type=int, default=5, help="training epochs")
    p.add_argument("--alpha", type=float, default=0.5,
                   help="depth weighting (0 disables hierarchy emphasis)")
    p.add_argument("--beam", type=int, default=1, help="beam width (1 = greedy)")
    p.add_argument("--no-averaging", action="store_true",
                   help="return raw final weights instead of averaged")
    p.add_argument("--annotator", default="gold", help="canonical annotator id")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model against gold annotations")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--corpus", required=True, help="evaluation corpus")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("agreement", help="inter-annotator agreement report")
    p.add_argument("--corpus", required=True, help="corpus with multi-annotator documents")
    p.add_argument("--mode", choices=agreement_mod.MODES, default="exact",
                   help="matching mode")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("index", help="build and persist the concept index")
    p.add_argument("--corpus", required=True, help="annotated corpus")
    p.add_argument("--out", required=True, help="index output path")
    p.add_argument("--source", choices=("gold", "predicted"), default="gold",
                   help="citation source")
    p.add_argument("--model", help="model file (required for --source predicted)")
    p.add_argument("--annotator", default="gold", help="canonical annotator id")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="run concept/timeline/texts queries")
    p.add_argument("--index", required=True, help="persisted index file")
    p.add_argument("--patient", required=True, help="patient id")
    p.add_argument("--timeline", metavar="NODE", help="timeline for one concept")
    p.add_argument("--texts", metavar="NODES", help="comma-separated node ids")
    p.add_argument("--mode", choices=("any", "all"), default="any",
                   help="texts query mode")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--corpus", required=True, help="corpus store (JSON-lines)")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.add_argument("--model", help="model file for /predict")
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.add_argument("--port", type=int, default=8000, help="bind port")
    p.add_argument("--token", help="static bearer token (optional)")
    p.add_argument("--annotator", default="gold", help="canonical annotator id")
    p.add_argument("--ui", help="static frontend directory to mount at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("predict", help="annotate text with a trained model")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--text", help="inline text to annotate")
    p.add_argument("--in", dest="infile", help="text file to annotate")
    p.add_argument("--catalog", help="catalog JSON path (default: packaged seed)")
    p.add_argument("--trace", action="store_true",
                   help="print the action sequence per sentence")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "predict" and args.text is None and args.infile is None:
        parser.error("predict needs --text or --in")
    try:
        return args.func(args)
    except ClinotateError as exc:
        print(f"{args.command}: {exc.code}: {exc.detail}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"{args.command}: file not found: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 ok, 2 schema error, 3 invariant error, 4 findings,
5 stage failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import yamlio
from .apispec import load_api_spec
from .catalog import load_catalog
from .codec import debug_loop, emit_source, codec_record
from .errors import (
    DuplicateName,
    InvariantError,
    SchemaError,
    SignalForgeError,
    StageFailure,
    UsageError,
)
from .index import build_index
from .providers import build_provider
from .speccheck import detect_errors, inject_errors

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INVARIANT = 3
EXIT_FINDINGS = 4
EXIT_STAGE = 5
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="signalforge")
    sub = parser.add_subparsers(dest="command")

    catalog = sub.add_parser("catalog", help="catalog operations")
    catalog_sub = catalog.add_subparsers(dest="catalog_command")
    validate = catalog_sub.add_parser("validate", help="validate a catalog file")
    validate.add_argument("file")

    index = sub.add_parser("index", help="vector index operations")
    index_sub = index.add_subparsers(dest="index_command")
    index_build = index_sub.add_parser("build", help="build an index from a catalog")
    index_build.add_argument("catalog")
    index_build.add_argument("--strategy", default="rewritten_description")
    index_build.add_argument("--out", default="index.yaml")
    index_build.add_argument("--provider", default="rule")

    synth = sub.add_parser("synthesize-codecs", help="synthesize and validate codecs")
    synth.add_argument("catalog")
    synth.add_argument("--provider", default="rule")
    synth.add_argument("--max-rounds", type=int, default=3)
    synth.add_argument("--out", default="generated")

    match = sub.add_parser("match", help="align API properties to signals")
    match.add_argument("api_spec")
    match.add_argument("catalog")
    match.add_argument("--strategy", default="rewritten_description")
    match.add_argument("--theta", type=float, default=0.75)
    match.add_argument("--margin", type=float, default=0.05)
    match.add_argument("--top-k", type=int, default=5)
    match.add_argument("--provider", default="rule")
    match.add_argument("--out", default="generated/alignments")

    generate = sub.add_parser("generate-endpoints", help="assemble endpoints")
    generate.add_argument("api_spec")
    generate.add_argument("--alignments", required=True)
    generate.add_argument("--codecs", default="generated/codecs")
    generate.add_argument("--catalog", default=None)
    generate.add_argument("--provider", default="rule")
    generate.add_argument("--out", default="generated/endpoints")

    check = sub.add_parser("check-spec", help="detect specification errors")
    check.add_argument("document")
    check.add_argument("--against", nargs=2, metavar=("API_SPEC", "CATALOG"),
                       required=True)

    inject = sub.add_parser("inject-errors", help="seed labeled faults into a document")
    inject.add_argument("document")
    inject.add_argument("--against", nargs=2, metavar=("API_SPEC", "CATALOG"),
                        required=True)
    inject.add_argument("--out", required=True)
    inject.add_argument("--markers", required=True)
    inject.add_argument("--n-range", type=int, default=5)
    inject.add_argument("--n-enum", type=int, default=5)
    inject.add_argument("--seed", type=int, default=0)

    evaluate = sub.add_parser("evaluate", help="run the evaluation harness")
    evaluate.add_argument("corpus", choices=["fault", "distractor"])
    evaluate.add_argument(
        "--ablate", action="append", default=[],
        choices=["templates", "composition", "debugging"],
    )
    evaluate.add_argument("--report", default=None)

    graph = sub.add_parser("graph", help="workflow graph operations")
    graph_sub = graph.add_subparsers(dest="graph_command")
    graph_opt = graph_sub.add_parser("optimize", help="run a transformation script")
    graph_opt.add_argument("graph")
    graph_opt.add_argument("script")
    graph_opt.add_argument("--out", default=None)

    run = sub.add_parser("run", help="run the full pipeline")
    run.add_argument("catalog", nargs="?")
    run.add_argument("api_spec", nargs="?")
    run.add_argument("--config", default=None, metavar="FILE",
                     help="YAML config file; explicit flags override it")
    run.add_argument("--provider", default=None)
    run.add_argument("--mode", choices=["auto", "interactive"], default=None)
    run.add_argument("--runs-root", default="runs")
    run.add_argument("--resume", default=None, metavar="RUN_DIR")
    run.add_argument("--jobs", type=int, default=None)
    run.add_argument("--theta", type=float, default=None)
    run.add_argument("--margin", type=float, default=None)
    run.add_argument("--strategy", default=None)
    run.add_argument("--max-rounds", type=int, default=None)
    run.add_argument("--allow-warnings", action="store_true", default=None)

    serve = sub.add_parser("serve", help="serve the review interface")
    serve.add_argument("--run", required=True, metavar="RUN_DIR")
    serve.add_argument("--port", type=int, default=8040)
    serve.add_argument("--ui", default=None)
    serve.add_argument("--provider", default="rule")

    return parser


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _cmd_catalog_validate(args) -> int:
    try:
        catalog = load_catalog(args.file)
    except (InvariantError, DuplicateName) as exc:
        print(f"error {exc.subject or '-'} {exc.field or '-'}: {exc.raw_message}")
        return EXIT_INVARIANT
    except SchemaError as exc:
        print(f"error {exc.path or '-'} -: {exc.raw_message}")
        return EXIT_SCHEMA
    print(f"ok: {len(catalog)} signals")
    return EXIT_OK


def _cmd_index_build(args) -> int:
    catalog = load_catalog(args.catalog)
    provider = build_provider(args.provider)
    index = build_index(catalog, args.strategy, provider)
    Path(args.out).write_text(index.to_document(), encoding="utf-8")
    print(f"indexed {index.size(args.strategy)} signals under {args.strategy}")
    return EXIT_OK


def _cmd_synthesize(args) -> int:
    catalog = load_catalog(args.catalog)
    provider = build_provider(args.provider)
    out = Path(args.out)
    failures = 0
    for sig in sorted(catalog, key=lambda s: s.name):
        report = debug_loop(sig, provider, args.max_rounds, catalog)
        if report.status == "pass":
            (out / "codecs").mkdir(parents=True, exist_ok=True)
            (out / "signals").mkdir(parents=True, exist_ok=True)
            (out / "codecs" / f"{sig.name}.yaml").write_text(
                yamlio.dump(codec_record(report)), encoding="utf-8"
            )
            (out / "signals" / f"{sig.name}.txt").write_text(
                emit_source(sig, report.codec), encoding="utf-8"
            )
            print(f"pass {sig.name} (attempts {report.attempts})")
        else:
            failures += 1
            print(f"fail {sig.name} (attempts {report.attempts})")
    return EXIT_OK if failures == 0 else EXIT_STAGE


def _cmd_match(args) -> int:
    from .alignment import align_property, alignment_record

    catalog = load_catalog(args.catalog)
    spec = load_api_spec(args.api_spec)
    provider = build_provider(args.provider)
    index = build_index(catalog, args.strategy, provider)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flagged = 0
    properties = spec.properties()
    for name in sorted(properties):
        alignment = align_property(
            properties[name], index, provider, catalog,
            theta=args.theta, margin=args.margin, k=args.top_k,
            strategy=args.strategy,
        )
        (out / f"{name}.yaml").write_text(
            yamlio.dump(alignment_record(alignment)), encoding="utf-8"
        )
        if alignment.status == "flagged":
            flagged += 1
        print(f"{alignment.status:13s} {name} -> {list(alignment.contributing_signals)}")
    print(f"{len(properties)} properties, {flagged} flagged")
    return EXIT_OK


def _cmd_generate_endpoints(args) -> int:
    from .alignment import alignment_from_record
    from .codec import codec_from_record
    from .endpoints import check_contract, instantiate_template

    spec = load_api_spec(args.api_spec)
    if args.catalog:
        load_catalog(args.catalog)  # surfaces catalog problems early
    provider = build_provider(args.provider)
    alignments = {}
    for path in sorted(Path(args.alignments).glob("*.yaml")):
        record = yamlio.load(path.read_text(encoding="utf-8"))
        alignments[record["property"]] = alignment_from_record(record)
    codecs = {}
    for path in sorted(Path(args.codecs).glob("*.yaml")):
        record = yamlio.load(path.read_text(encoding="utf-8"))
        codecs[record["signal"]] = codec_from_record(record)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for endpoint in sorted(spec.endpoints, key=lambda e: e.slug):
        try:
            generated = instantiate_template(endpoint, alignments, codecs, provider)
        except SignalForgeError as exc:
            print(f"skip {endpoint.slug}: {exc}")
            failures += 1
            continue
        report = check_contract(generated, endpoint)
        if not report.passed:
            print(f"fail {endpoint.slug}: contract violations "
                  f"{[c.name for c in report.failures()]}")
            failures += 1
            continue
        (out / f"{endpoint.slug}.txt").write_text(generated.source, encoding="utf-8")
        (out / f"{endpoint.slug}.manifest.json").write_text(
            json.dumps(generated.manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"ok {endpoint.slug}")
    return EXIT_OK if failures == 0 else EXIT_STAGE


def _cmd_check_spec(args) -> int:
    spec = load_api_spec(args.against[0])
    catalog = load_catalog(args.against[1])
    document = Path(args.document).read_text(encoding="utf-8")
    diagnostics = detect_errors(document, spec, catalog)
    for diag in diagnostics:
        print(diag.render())
    return EXIT_FINDINGS if diagnostics else EXIT_OK


def _cmd_inject_errors(args) -> int:
    spec = load_api_spec(args.against[0])
    catalog = load_catalog(args.against[1])
    document = Path(args.document).read_text(encoding="utf-8")
    mutated, markers = inject_errors(
        document, spec, catalog,
        n_out_of_range=args.n_range, n_invalid_enum=args.n_enum, seed=args.seed,
    )
    Path(args.out).write_text(mutated, encoding="utf-8")
    Path(args.markers).write_text(
        yamlio.dump(
            {
                "markers": [
                    {
                        "location": m.location,
                        "error_type": m.error_type,
                        "injected": m.injected,
                    }
                    for m in markers
                ]
            }
        ),
        encoding="utf-8",
    )
    print(f"injected {len(markers)} faults")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    from .corpus import build_distractor_corpus, build_fault_corpus
    from .evalharness import (
        ABLATIONS,
        AblationConfig,
        emit_report,
        run_ablation,
        run_strategy_comparison,
    )

    if args.corpus == "distractor":
        strategies = run_strategy_comparison(build_distractor_corpus())
        text, _ = emit_report([], strategies)
        print(text)
        return EXIT_OK

    corpus = build_fault_corpus()
    if args.ablate:
        configs = [
            AblationConfig(
                boilerplate_templates="templates" not in args.ablate,
                code_composition="composition" not in args.ablate,
                automated_debugging="debugging" not in args.ablate,
            )
        ]
    else:
        configs = list(ABLATIONS)
    results = [run_ablation(config, corpus) for config in configs]
    text, data = emit_report(results, meter=results[0].meter)
    print(text)
    if args.report:
        Path(args.report).write_text(yamlio.dump(data), encoding="utf-8")
    return EXIT_OK


def _cmd_graph_optimize(args) -> int:
    from .workflow import optimize, parse_graph, parse_script, serialize_graph

    graph = parse_graph(Path(args.graph).read_text(encoding="utf-8"))
    script = parse_script(Path(args.script).read_text(encoding="utf-8"))
    result = optimize(graph, script)
    for iteration in result.iterations:
        c, a, m = iteration.impact.as_tuple()
        print(
            f"{iteration.name}: impact ({c:+d}, {a:+d}, {m:+d}), "
            f"{len(iteration.removed)} triples removed"
        )
    c, a, m = result.net.as_tuple()
    print(f"net change: ({c:+d}, {a:+d}, {m:+d}); "
          f"{result.total_removed} triples removed in total")
    out = args.out or (str(Path(args.graph).with_suffix("")) + ".reduced.yaml")
    Path(out).write_text(serialize_graph(result.final_graph), encoding="utf-8")
    print(f"reduced graph written to {out}")
    return EXIT_OK


def _cmd_run(args) -> int:
    from .pipeline import PipelineConfig, resume_pipeline, run_pipeline

    # Config file first, then explicit flags override.
    config = PipelineConfig()
    if args.config:
        data = yamlio.load(Path(args.config).read_text(encoding="utf-8")) or {}
        if not isinstance(data, dict):
            raise UsageError(f"config file {args.config} must be a mapping")
        config = PipelineConfig.from_dict(data)
    overrides = {
        "provider_spec": args.provider,
        "strategy": args.strategy,
        "theta": args.theta,
        "margin": args.margin,
        "max_debug_rounds": args.max_rounds,
        "mode": args.mode,
        "jobs": args.jobs,
        "allow_warnings": args.allow_warnings,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)

    provider = build_provider(config.provider_spec)
    if args.resume:
        run = resume_pipeline(args.resume, provider=provider)
    else:
        if not args.catalog or not args.api_spec:
            raise UsageError("run needs <catalog> <api_spec> (or --resume RUN_DIR)")
        run = run_pipeline(
            Path(args.catalog).read_text(encoding="utf-8"),
            Path(args.api_spec).read_text(encoding="utf-8"),
            config,
            runs_root=args.runs_root,
            provider=provider,
        )
    for stage, status in run.stage_status.items():
        print(f"{stage}: {status}")
    if run.flagged:
        print("flagged: " + ", ".join(sorted(run.flagged)))
    print(f"run directory: {run.run_dir}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .review import serve

    run_dir = Path(args.run)
    if not run_dir.is_dir():
        # Accept a bare run id under the default runs root.
        candidate = Path("runs") / args.run
        if candidate.is_dir():
            run_dir = candidate
        else:
            raise UsageError(f"run directory {args.run!r} not found")
    provider = build_provider(args.provider)
    serve(str(run_dir), port=args.port, provider=provider, ui_dir=args.ui)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def cli_dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "catalog":
            if getattr(args, "catalog_command", None) != "validate":
                raise UsageError("usage: signalforge catalog validate <file>")
            return _cmd_catalog_validate(args)
        if args.command == "index":
            if getattr(args, "index_command", None) != "build":
                raise UsageError("usage: signalforge index build <catalog>")
            return _cmd_index_build(args)
        if args.command == "synthesize-codecs":
            return _cmd_synthesize(args)
        if args.command == "match":
            return _cmd_match(args)
        if args.command == "generate-endpoints":
            return _cmd_generate_endpoints(args)
        if args.command == "check-spec":
            return _cmd_check_spec(args)
        if args.command == "inject-errors":
            return _cmd_inject_errors(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "graph":
            if getattr(args, "graph_command", None) != "optimize":
                raise UsageError("usage: signalforge graph optimize <graph> <script>")
            return _cmd_graph_optimize(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "serve":
            return _cmd_serve(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (InvariantError, DuplicateName) as exc:
        print(f"invariant error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except StageFailure as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

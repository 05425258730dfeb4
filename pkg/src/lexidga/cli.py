"""Operator CLI: classify single domains or stdin streams, generate
datasets, train and evaluate models, run the experiments, benchmark, and
inspect binary artifacts.

Exit codes for ``classify``: 0 benign, 1 dga, 2 error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dga, embed, experiment, metrics, model, preprocess, segment

EXIT_BENIGN = 0
EXIT_DGA = 1
EXIT_ERROR = 2


def _suffixes(args):
    path = getattr(args, "suffix_file", None) or os.environ.get("LEXIDGA_SUFFIX_FILE")
    return preprocess.load_suffixes(path) if path else preprocess.default_suffixes()


def _lexicon(args):
    path = getattr(args, "lexicon", None)
    return segment.load_lexicon(path) if path else segment.default_lexicon()


def _provider(args, dimension: int | None = None):
    kind = getattr(args, "provider", "hash")
    dim = dimension or getattr(args, "dimension", embed.DEFAULT_DIMENSION)
    if kind == "hash":
        return embed.HashNgramProvider(dimension=dim)
    if kind in ("cache", "auto"):
        cache_path = getattr(args, "cache", None)
        if not cache_path:
            raise SystemExit("--cache PATH is required for the cache provider")
        primary = embed.CacheProvider(embed.load_cache(cache_path, dim))
        if kind == "cache":
            return primary
        return embed.FallbackProvider(primary, embed.HashNgramProvider(dimension=dim))
    raise SystemExit(f"unknown provider {kind!r}")


class Pipeline:
    """normalize -> segment -> embed -> forward, shared by classify and
    stream; cache misses fall back per the provider choice."""

    def __init__(self, weights, provider, suffixes, lexicon, threshold: float):
        if weights.dimension != provider.dimension:
            raise model.ShapeMismatch(
                f"model dimension {weights.dimension} != provider dimension "
                f"{provider.dimension}"
            )
        self.weights = weights
        self.provider = provider
        self.suffixes = suffixes
        self.lexicon = lexicon
        self.threshold = threshold

    def verdict(self, raw: str) -> dict:
        t0 = time.perf_counter()
        dom = preprocess.normalize(raw, self.suffixes)
        tokens = segment.segment(dom.core, self.lexicon).tokens
        vec = self.provider.embed_tokens(tokens)
        score = model.forward(vec, self.weights)
        latency_us = int((time.perf_counter() - t0) * 1e6)
        return {
            "domain": raw,
            "score": score,
            "label": "dga" if score >= self.threshold else "benign",
            "tokens": tokens,
            "latency_us": latency_us,
        }


def _format_verdict(v: dict, fmt: str) -> str:
    if fmt == "kv":
        return (f"domain={v['domain']} score={v['score']:.6f} label={v['label']} "
                f"tokens={','.join(v['tokens'])} latency_us={v['latency_us']}")
    return "\t".join([v["domain"], f"{v['score']:.6f}", v["label"],
                      ",".join(v["tokens"]), str(v["latency_us"])])


def _threshold_from_roc(path: str, target_fpr: float) -> float:
    """Pick the cutoff with the highest TPR at FPR <= target from a
    stored validation ROC (needs the threshold column)."""
    best = None
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "threshold" not in reader.fieldnames:
            raise SystemExit(f"{path}: no threshold column; re-export with thresholds")
        for row in reader:
            fpr = float(row["fpr"])
            if fpr <= target_fpr:
                best = row
    if best is None:
        raise SystemExit(f"{path}: no operating point with fpr <= {target_fpr}")
    # an inf threshold is the (0,0) corner: no validation cutoff meets the
    # target, so serve the never-alert operating point
    return float(best["threshold"])


def _experiment_config(args) -> experiment.ExperimentConfig:
    cfg = experiment.ExperimentConfig()
    if args.config:
        parser = configparser.ConfigParser()
        with open(args.config) as fh:
            parser.read_file(fh)
        exp = parser["experiment"] if parser.has_section("experiment") else {}

        def _ints(value):
            return tuple(int(x.strip()) for x in value.split(",") if x.strip())

        if "families" in exp:
            cfg.families = tuple(f.strip() for f in exp["families"].split(",") if f.strip())
        if "observation_counts" in exp:
            cfg.observation_counts = _ints(exp["observation_counts"])
        for key in ("benign_train", "benign_val", "benign_test", "dga_test_count",
                    "seed", "dimension"):
            if key in exp:
                setattr(cfg, key, int(exp[key]))
        for key in ("benign_scale", "threshold"):
            if key in exp:
                setattr(cfg, key, float(exp[key]))
        for key in ("provider", "benign_path", "presets_path", "suffix_path",
                    "lexicon_path"):
            if key in exp and exp[key]:
                setattr(cfg, key, exp[key])
        if parser.has_section("training"):
            tr = parser["training"]
            tc = cfg.train_config
            tc.learning_rate = tr.getfloat("learning_rate", tc.learning_rate)
            tc.batch_size = tr.getint("batch_size", tc.batch_size)
            tc.max_epochs = tr.getint("max_epochs", tc.max_epochs)
            tc.patience = tr.getint("patience", tc.patience)
            tc.hidden = tr.getint("hidden", tc.hidden)
            tc.weight_classes = tr.getboolean("weight_classes", tc.weight_classes)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "scale", None) is not None:
        cfg.benign_scale = args.scale
    return cfg


# ---------------------------------------------------------------- commands


def cmd_segment(args) -> int:
    lex = _lexicon(args)
    sfx = _suffixes(args)

    def emit(raw: str):
        core = raw if args.core else preprocess.normalize(raw, sfx).core
        print("\t".join(segment.segment(core, lex).tokens))

    if args.stdin:
        # line-count preserving: a bad line becomes a "!<TAB>message"
        # record so batch consumers keep their input/output alignment
        for line in sys.stdin:
            line = line.strip()
            try:
                emit(line)
            except Exception as exc:  # noqa: BLE001
                print(f"!\t{exc}")
    else:
        for raw in args.domain:
            emit(raw)
    return 0


def cmd_generate(args) -> int:
    specs = (dga.load_family_specs(args.presets) if args.presets
             else dga.default_family_specs())
    if args.family not in specs:
        raise SystemExit(f"unknown family {args.family!r}; have {sorted(specs)}")
    examples = dga.generate(specs[args.family], args.seed, args.count)
    for ex in examples:
        if args.labeled:
            print(f"{ex.domain.raw}\t{ex.label}\t{ex.family}")
        else:
            print(ex.domain.raw)
    return 0


def cmd_embed(args) -> int:
    provider = _provider(args)
    sfx = _suffixes(args)
    lex = _lexicon(args)
    core = preprocess.normalize(args.domain, sfx).core
    tokens = segment.segment(core, lex).tokens
    vec = provider.embed_tokens(tokens)
    print(" ".join(f"{v:.8g}" for v in vec))
    return 0


def cmd_train(args) -> int:
    cfg = _experiment_config(args)
    if args.provider != "hash":
        cfg.provider = f"cache:{args.cache}"
    weights, val_roc, info = experiment.train_model(cfg, args.family, args.observations)
    model.save(weights, args.out)
    metrics.write_roc_csv(val_roc, str(args.out) + ".val_roc.csv", include_thresholds=True)
    print(f"saved {args.out}: {info['family']} observations={info['observations']} "
          f"({info['training']}/{info['validation']}), epochs={info['epochs']}, "
          f"best_epoch={info['best_epoch']}, val_loss={info['val_loss']:.4f}")
    return 0


def cmd_eval(args) -> int:
    weights = model.load(args.model)
    provider = _provider(args, dimension=weights.dimension)
    sfx = _suffixes(args)
    lex = _lexicon(args)
    scores, labels = [], []
    with open(args.labeled_file) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split(",")
            raw, label = parts[0].strip(), parts[1].strip()
            core = preprocess.normalize(raw, sfx).core
            vec = provider.embed_tokens(segment.segment(core, lex).tokens)
            scores.append(model.forward(vec, weights))
            labels.append(1 if label == "dga" else 0)
    report = metrics.compute_report(np.asarray(scores), np.asarray(labels),
                                    args.threshold)
    row = metrics.report_row(Path(args.labeled_file).stem, len(labels),
                             0, 0, report)
    writer = csv.writer(sys.stdout)
    writer.writerow(metrics.REPORT_COLUMNS)
    writer.writerow(row)
    if args.out_roc:
        metrics.write_roc_csv(metrics.roc(np.asarray(scores), np.asarray(labels)),
                              args.out_roc)
    return 0


def _build_pipeline(args) -> Pipeline:
    weights = model.load(args.model)
    provider = _provider(args, dimension=weights.dimension)
    threshold = args.threshold
    if args.target_fpr is not None:
        if not args.roc:
            raise SystemExit("--target-fpr needs --roc FILE (stored validation ROC)")
        threshold = _threshold_from_roc(args.roc, args.target_fpr)
    return Pipeline(weights, provider, _suffixes(args), _lexicon(args), threshold)


def cmd_classify(args) -> int:
    try:
        pipe = _build_pipeline(args)
        verdict = pipe.verdict(args.domain)
    except Exception as exc:  # noqa: BLE001 - any pipeline failure is exit 2
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(_format_verdict(verdict, args.format))
    return EXIT_DGA if verdict["label"] == "dga" else EXIT_BENIGN


def cmd_stream(args) -> int:
    try:
        pipe = _build_pipeline(args)
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    def safe_verdict(raw: str) -> str:
        try:
            return _format_verdict(pipe.verdict(raw), args.format)
        except Exception as exc:  # noqa: BLE001 - per-line errors never abort
            return "\t".join([raw, "-", "error", str(exc).replace("\t", " "), "0"])

    lines = (line.rstrip("\n") for line in sys.stdin)
    if args.parallel > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            for out in pool.map(safe_verdict, lines, chunksize=64):
                print(out, flush=args.flush)
    else:
        for line in lines:
            print(safe_verdict(line), flush=args.flush)
    return 0


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[list] = []
    log_lines: list[str] = []
    rocs: dict[str, metrics.RocCurve] = {}
    if args.mode == "single":
        for family in cfg.families:
            result = experiment.run_single_dga(cfg, family)
            rows.extend(result.rows)
            log_lines.extend(result.log_lines)
            for obs, curve in result.rocs.items():
                rocs[f"roc_{family}_{obs}.csv"] = curve
    else:
        if not args.config:
            cfg.observation_counts = (100, 200, 400)
        result = experiment.run_multi_dga(cfg)
        rows.extend(result.rows)
        log_lines.extend(result.log_lines)
        for (obs, fam), curve in result.rocs.items():
            rocs[f"roc_{fam}_{obs}.csv"] = curve
    metrics.write_report_csv(rows, out_dir / "table.csv")
    for name, curve in rocs.items():
        metrics.write_roc_csv(curve, out_dir / name)
    (out_dir / "run.log").write_text("\n".join(log_lines) + "\n")
    print(f"wrote {out_dir}/table.csv ({len(rows)} rows, {len(rocs)} ROC files)")
    return 0


def cmd_bench(args) -> int:
    weights = model.load(args.model)
    provider = _provider(args, dimension=weights.dimension)
    specs = dga.default_family_specs()
    examples = dga.generate(specs[args.family], args.seed, args.count)
    domains = [ex.domain.raw for ex in examples]
    stats = experiment.bench_inference(weights, provider, domains,
                                       repetitions=args.repetitions,
                                       suffixes=_suffixes(args),
                                       lexicon=_lexicon(args))
    print(f"domains={stats['count']} mean={stats['mean_s'] * 1e3:.3f}ms "
          f"p50={stats['p50_s'] * 1e3:.3f}ms p95={stats['p95_s'] * 1e3:.3f}ms "
          f"throughput={stats['domains_per_s']:.0f}/s")
    return 0


def cmd_inspect(args) -> int:
    path = Path(args.path)
    magic = path.open("rb").read(8)
    if magic == model.MODEL_MAGIC:
        w = model.load(path)
        print(f"model: dimension={w.dimension} hidden={w.hidden} "
              f"parameters={w.n_parameters} checksum=ok")
        return 0
    if magic == embed.CACHE_MAGIC:
        cache = embed.load_cache(path)
        print(f"embedding cache: dimension={cache.dimension} entries={len(cache)}")
        return 0
    print(f"error: {path}: unrecognized magic {magic!r}", file=sys.stderr)
    return EXIT_ERROR


# ---------------------------------------------------------------- parser


def _add_provider_flags(p, default="hash"):
    p.add_argument("--provider", choices=["hash", "cache", "auto"], default=default,
                   help="embedding provider; 'auto' is cache with hash fallback")
    p.add_argument("--cache", help="embedding cache file (LDGAEMB1)")
    p.add_argument("--dimension", type=int, default=embed.DEFAULT_DIMENSION)


def _add_common_flags(p):
    p.add_argument("--suffix-file", help="override bundled public-suffix snapshot")
    p.add_argument("--lexicon", help="override bundled segmentation lexicon")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexidga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="print word tokens for domains")
    p.add_argument("domain", nargs="*")
    p.add_argument("--stdin", action="store_true", help="read domains from stdin")
    p.add_argument("--core", action="store_true",
                   help="inputs are already suffix-stripped cores")
    _add_common_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("generate", help="emit deterministic DGA domains")
    p.add_argument("--family", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--presets", help="family preset file (INI)")
    p.add_argument("--labeled", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="print the pooled embedding of a domain")
    p.add_argument("domain")
    _add_provider_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train a single-family model")
    p.add_argument("--family", required=True)
    p.add_argument("--observations", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="experiment config (INI)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", type=float, default=None,
                   help="benign pool scale factor (e.g. 0.1)")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a labeled domain file")
    p.add_argument("--model", required=True)
    p.add_argument("--labeled-file", required=True,
                   help="lines of: domain<TAB>label (benign|dga)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out-roc", help="write the ROC curve CSV here")
    _add_provider_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_eval)

    for name, fn in (("classify", cmd_classify), ("stream", cmd_stream)):
        p = sub.add_parser(name, help=f"{name} domains with a trained model")
        if name == "classify":
            p.add_argument("domain")
        p.add_argument("--model", required=True)
        p.add_argument("--threshold", type=float, default=0.5)
        p.add_argument("--target-fpr", type=float, default=None,
                       help="pick threshold from a stored ROC instead")
        p.add_argument("--roc", help="validation ROC CSV with thresholds")
        p.add_argument("--format", choices=["tsv", "kv"], default="tsv")
        _add_provider_flags(p)
        _add_common_flags(p)
        if name == "stream":
            p.add_argument("--parallel", type=int, default=1)
            p.add_argument("--flush", action="store_true",
                           help="flush after every line")
        p.set_defaults(func=fn)

    p = sub.add_parser("experiment", help="run the single- or multi-DGA design")
    p.add_argument("mode", choices=["single", "multi"])
    p.add_argument("--config", help="experiment config file (INI)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", type=float, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="measure inline inference latency")
    p.add_argument("--model", required=True)
    p.add_argument("--family", default="matsnu")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=99)
    _add_provider_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="describe a model or cache file")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - uniform operator-facing errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

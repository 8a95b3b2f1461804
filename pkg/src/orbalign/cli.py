"""Command line entry point.

Subcommands::

    orbalign align ...          full pipeline, writes result files to --output
    orbalign count-orbits ...   per-edge orbit table for one edge list
    orbalign synth ...          write a synthetic dataset in the ingestion formats

Options for ``align`` may also come from a JSON file given with ``--config``;
keys are the long option names with dashes replaced by underscores. Flags
given on the command line override the file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DataError, NumericError
from .evaluation import PUBLISHED_RESULTS, MetricReport
from .graph import Dataset, load_attributes, load_edge_list, load_groundtruth
from .orbits import ORBIT_COUNT, ORBIT_GRAPHLET, count_orbits, write_orbit_table
from .pipeline import STAGES, VARIANTS, AlignConfig, AlignOutput, align
from .synthetic import NoiseSpec, make_random_attributed_pair, write_dataset

log = logging.getLogger("orbalign")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    source: str | None = None
    target: str | None = None
    attrs_source: str | None = None
    attrs_target: str | None = None
    truth: str | None = None
    synthetic: str | None = None
    id_policy: str = "require-dense"
    normalize_attrs: bool = False
    orbits: int = ORBIT_COUNT
    layers: int = 2
    dim: int = 200
    lr: float = 0.01
    epochs: int = 200
    m: int = 20
    beta: float = 1.1
    q: tuple[int, ...] = (1, 5, 10)
    seed: int = 0
    variant: str = "HTC"
    output: str = "htc_out"
    threads: int = 1
    published: str | None = None
    checkpoint: str | None = None
    progress: bool = False

    def align_config(self) -> AlignConfig:
        return AlignConfig(orbits=self.orbits, layers=self.layers, dim=self.dim,
                           learning_rate=self.lr, epochs=self.epochs, m=self.m,
                           beta=self.beta, qs=tuple(self.q), seed=self.seed,
                           threads=self.threads)

    def validate(self) -> None:
        if self.synthetic is None:
            missing = [n for n in ("source", "target", "attrs_source", "attrs_target")
                       if getattr(self, n) is None]
            if missing:
                raise UsageError("missing " + ", ".join("--" + m.replace("_", "-")
                                                        for m in missing)
                                 + " (or use --synthetic)")
        if self.variant not in VARIANTS:
            raise UsageError(f"unsupported variant {self.variant!r}; "
                             f"choose from {', '.join(sorted(VARIANTS))}")
        if self.published is not None and self.published not in PUBLISHED_RESULTS:
            raise UsageError(f"unknown published dataset {self.published!r}")
        try:
            self.align_config()
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def parse_synthetic(text: str) -> dict:
    """Parse ``n=100,p=0.1,ratio=0.1[,attr_dim=8,levels=2,permute=1]``."""
    casts = {"n": int, "p": float, "ratio": float, "attr_dim": int, "levels": int,
             "permute": lambda v: v.lower() not in ("0", "false", "no")}
    out = {"n": 100, "p": 0.1, "ratio": 0.0, "attr_dim": 8, "levels": 2, "permute": True}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in casts:
            raise UsageError(f"bad --synthetic item {item!r}; keys: {', '.join(casts)}")
        try:
            out[key] = casts[key](value.strip())
        except ValueError:
            raise UsageError(f"bad value in --synthetic item {item!r}") from None
    return out


def _synthetic_dataset(spec: dict, seed: int) -> Dataset:
    try:
        return make_random_attributed_pair(
            spec["n"], spec["p"], spec["attr_dim"],
            NoiseSpec(spec["ratio"], spec["permute"], seed), levels=spec["levels"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_dataset(cfg: RunConfig) -> tuple[Dataset, list[str] | None, list[str] | None]:
    if cfg.synthetic is not None:
        return _synthetic_dataset(parse_synthetic(cfg.synthetic), cfg.seed), None, None
    src = load_edge_list(cfg.source, cfg.id_policy)
    tgt = load_edge_list(cfg.target, cfg.id_policy)
    x_s = load_attributes(cfg.attrs_source, src, normalize=cfg.normalize_attrs)
    x_t = load_attributes(cfg.attrs_target, tgt, normalize=cfg.normalize_attrs)
    truth = None
    if cfg.truth is not None:
        truth = load_groundtruth(cfg.truth, src.node_labels, tgt.node_labels)
    return Dataset(src, tgt, x_s, x_t, truth), _labels(src), _labels(tgt)


def _labels(graph) -> list[str] | None:
    if graph.node_labels is None:
        return None
    out = [""] * graph.node_count
    for name, idx in graph.node_labels.items():
        out[idx] = name
    return out


def write_outputs(out_dir: Path, data: Dataset, output: AlignOutput, cfg: RunConfig,
                  src_labels=None, tgt_labels=None) -> MetricReport | None:
    from .aligner import predict

    out_dir.mkdir(parents=True, exist_ok=True)
    res = output.result
    np.savetxt(out_dir / "scores.tsv", res.final, delimiter="\t", fmt="%.17g")

    q = min(max(cfg.q), res.final.shape[1])
    top = predict(res.final, q) if res.final.size else np.zeros((res.final.shape[0], 0), int)
    with open(out_dir / "pairs_topq.tsv", "w", encoding="utf-8") as fh:
        fh.write("source_id\ttarget_id\tscore\trank\n")
        for i, row in enumerate(top):
            for rank, j in enumerate(row, start=1):
                s = src_labels[i] if src_labels else str(i)
                t = tgt_labels[j] if tgt_labels else str(j)
                fh.write(f"{s}\t{t}\t{res.final[i, j]:.17g}\t{rank}\n")

    orbit_rows = []
    for k, detail in enumerate(res.details):
        orbit_rows.append({
            "orbit": k, "graphlet": ORBIT_GRAPHLET[k],
            "trusted_pairs": detail.trusted_count, "initial_trusted_pairs": detail.initial_count,
            "weight": float(res.weights[k]), "iterations": detail.iterations,
            "source_edges": output.source_orbits.nonzero_counts()[k],
            "target_edges": output.target_orbits.nonzero_counts()[k],
        })
    with open(out_dir / "orbit_report.txt", "w", encoding="utf-8") as fh:
        json.dump({"variant": output.variant, "orbits": orbit_rows}, fh, indent=2)
        fh.write("\n")

    with open(out_dir / "timings.txt", "w", encoding="utf-8") as fh:
        for stage in STAGES:
            fh.write(f"{stage}\t{output.timings[stage]:.6f}\n")
        fh.write(f"total\t{sum(output.timings.values()):.6f}\n")

    report = None
    with open(out_dir / "metrics.txt", "w", encoding="utf-8") as fh:
        if data.truth is not None and len(data.truth):
            report = MetricReport.from_scores(res.final, data.truth, cfg.q, variant=output.variant)
            fh.write(report.to_json() + "\n")
        else:
            fh.write(json.dumps({"variant": output.variant, "pair_count": 0,
                                 "note": "no ground truth; metrics not computed"}) + "\n")
    if report is not None:
        report.timings = dict(output.timings)
    return report


def run_pipeline(cfg: RunConfig) -> int:
    cfg.validate()
    try:
        data, src_labels, tgt_labels = load_dataset(cfg)
    except (DataError, OSError) as exc:
        raise DataError(f"loading input: {exc}") from exc
    progress = sys.stderr if cfg.progress else None
    output = align(data, cfg.align_config(), cfg.variant, progress=progress)
    out_dir = Path(cfg.output)
    report = write_outputs(out_dir, data, output, cfg, src_labels, tgt_labels)
    if cfg.checkpoint:
        from .encoder import save_checkpoint
        save_checkpoint(cfg.checkpoint, output.training.params, output.training.rng)
    if report is not None:
        ref = PUBLISHED_RESULTS.get(cfg.published) if cfg.published else None
        print(report.table(ref))
    else:
        print(f"no ground truth supplied; results written to {out_dir}")
    return EXIT_OK


def _add_align_args(p: argparse.ArgumentParser) -> None:
    # defaults are None so that an explicit flag can be told apart from the config file
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--source", help="source edge list")
    p.add_argument("--target", help="target edge list")
    p.add_argument("--attrs-source", help="source attribute table")
    p.add_argument("--attrs-target", help="target attribute table")
    p.add_argument("--truth", help="ground-truth anchor pairs")
    p.add_argument("--synthetic", help="n=..,p=..,ratio=..[,attr_dim=..,levels=..,permute=..]")
    p.add_argument("--id-policy", choices=["remap-dense", "require-dense"])
    p.add_argument("--normalize-attrs", action="store_const", const=True,
                   help="L2-normalize attribute rows")
    p.add_argument("--orbits", "-K", type=int, help="use the first K orbits (default 13)")
    p.add_argument("--layers", "-L", type=int, help="GCN layers (default 2)")
    p.add_argument("--dim", "-d", type=int, help="embedding width (default 200)")
    p.add_argument("--lr", type=float, help="Adam learning rate (default 0.01)")
    p.add_argument("--epochs", type=int, help="training epochs (default 200)")
    p.add_argument("--m", type=int, help="LISI neighbourhood size (default 20)")
    p.add_argument("--beta", type=float, help="reinforcement rate (default 1.1)")
    p.add_argument("--q", type=int, nargs="+", help="precision cut-offs (default 1 5 10)")
    p.add_argument("--seed", type=int)
    p.add_argument("--variant", help=f"one of {', '.join(VARIANTS)}")
    p.add_argument("--output", "-o", help="output directory (default htc_out)")
    p.add_argument("--threads", type=int, help="cap on internal parallelism (default 1)")
    p.add_argument("--published", help=f"print published numbers for one of "
                                        f"{', '.join(PUBLISHED_RESULTS)}")
    p.add_argument("--checkpoint", help="write trained encoder weights to this .npz file")
    p.add_argument("--progress", action="store_const", const=True,
                   help="JSON training log on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orbalign", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_align = sub.add_parser("align", help="run the alignment pipeline")
    _add_align_args(p_align)

    p_count = sub.add_parser("count-orbits", help="write the per-edge orbit table")
    p_count.add_argument("edges")
    p_count.add_argument("--output", "-o", required=True)
    p_count.add_argument("--oracle", action="store_true", help="use exhaustive enumeration")
    p_count.add_argument("--id-policy", choices=["remap-dense", "require-dense"],
                         default="require-dense")

    p_synth = sub.add_parser("synth", help="write a synthetic dataset")
    p_synth.add_argument("spec", help="n=..,p=..,ratio=..[,attr_dim=..,levels=..,permute=..]")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--output", "-o", required=True)
    return parser


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "q" in values:
        values["q"] = tuple(values["q"]) if isinstance(values["q"], (list, tuple)) \
            else (int(values["q"]),)
    return RunConfig(**values)


def _count_cmd(args) -> int:
    graph = load_edge_list(args.edges, args.id_policy)
    write_orbit_table(args.output, graph, count_orbits(graph, oracle=args.oracle),
                      _labels(graph))
    return EXIT_OK


def _synth_cmd(args) -> int:
    data = _synthetic_dataset(parse_synthetic(args.spec), args.seed)
    for name, path in write_dataset(args.output, data).items():
        print(f"{name}\t{path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "count-orbits":
            return _count_cmd(args)
        if args.command == "synth":
            return _synth_cmd(args)
        return run_pipeline(resolve_run_config(args))
    except UsageError as exc:
        print(f"orbalign: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"orbalign: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"orbalign: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands map one-to-one onto the library modules; every command prints a
line-oriented ``key: value`` report to stdout and uses a four-way exit code
contract:

* 0 — definitive answer agreeing with the query (coverable, always-coverable,
  catalog verified, counterexample found, ...)
* 2 — definitive opposite answer
* 3 — inconclusive (budget exhausted / skipped work)
* 1 — usage, file, or format error

Reports avoid timing information so identical invocations produce identical
output.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .anneal import AnnealError, SearchParams, anneal, load_params
from .classify import (
    CatalogError,
    catalog_I,
    classify,
    exhaustive_partition_check,
)
from .cover import (
    Placement,
    SearchBudget,
    enumerate_minimal_covers,
    flat_cover_decide,
)
from .poly import Polyomino, PolyominoError, parse_poly, render_poly, to_svg
from .reduce1d import (
    X3CError,
    build_template,
    parse_x3c,
    template_to_rle,
)
from .reduce2d import ReductionError, build_instance, parse_grid3c

#: The one catalog entry whose verification is out of desk-scale reach: the
#: 325x325 sticker.  Skipped unless --exhaustive asks for it.
_EXHAUSTIVE_ONLY = ("I/6/5",)

EXIT_YES = 0
EXIT_ERROR = 1
EXIT_NO = 2
EXIT_UNDECIDED = 3


class _Parser(argparse.ArgumentParser):
    """argparse with the exit-code contract (usage errors are 1, not 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _read_poly(path: str) -> Polyomino:
    return parse_poly(Path(path).read_text())


def _budget_from(args) -> SearchBudget:
    return SearchBudget(max_nodes=args.budget, max_seconds=args.seconds)


def _fmt_placement(p: Placement) -> str:
    return f"orientation={p.orientation} offset={p.offset[0]},{p.offset[1]}"


def cmd_classify(args) -> int:
    stain = _read_poly(args.stain)
    result = classify(stain)
    print(f"stain: {args.stain}")
    print(f"cells: {len(stain)}")
    verdict = "AlwaysCoverable" if result.always_coverable else "NotAlwaysCoverable"
    print(f"verdict: {verdict}")
    print(f"entry: {result.entry}")
    if result.always_coverable:
        return EXIT_YES
    if result.counterexample is None:
        print("counterexample: unavailable")
    else:
        out = Path(args.stain + ".counterexample")
        out.write_text(render_poly(result.counterexample))
        print(f"counterexample: {out}")
    return EXIT_NO


def cmd_cover(args) -> int:
    sticker = _read_poly(args.sticker)
    stain = _read_poly(args.stain)
    print(f"sticker: {args.sticker}")
    print(f"stain: {args.stain}")
    budget = _budget_from(args)
    if args.enumerate:
        result = enumerate_minimal_covers(
            sticker, stain, budget, cap=args.cap, max_placements=args.max_placements
        )
        print(f"covers: {len(result.witnesses)}")
        print(f"complete: {str(result.complete).lower()}")
        print(f"nodes: {result.nodes}")
        for i, w in enumerate(result.witnesses, start=1):
            body = "; ".join(_fmt_placement(p) for p in w.placements)
            print(f"cover {i}: {body}")
        if not result.complete:
            return EXIT_UNDECIDED
        return EXIT_YES if result.witnesses else EXIT_NO
    decision = flat_cover_decide(sticker, stain, budget)
    print(f"status: {decision.status}")
    print(f"nodes: {decision.nodes}")
    if decision.is_coverable:
        for p in decision.witness.placements:
            print(f"placement: {_fmt_placement(p)}")
        return EXIT_YES
    return EXIT_NO if decision.is_not_coverable else EXIT_UNDECIDED


def cmd_search(args) -> int:
    stain = _read_poly(args.stain)
    params = load_params(args.config) if args.config else SearchParams()
    if args.seed is not None:
        params = replace(params, rng_seed=args.seed)
    outcome = anneal(
        stain,
        params,
        force=args.force,
        checkpoint_path=args.checkpoint,
        resume=args.resume,
        results_dir=args.results_dir,
    )
    print(f"stain: {args.stain}")
    print(f"seed: {params.rng_seed}")
    print(f"steps: {outcome.steps_done}")
    print(f"accepted: {outcome.accepted}")
    print(f"verifications: {outcome.verifications}")
    print(f"best-penalty: {outcome.best_total:g}")
    print(f"found: {str(outcome.found).lower()}")
    if outcome.found:
        shape = outcome.counterexample
        print(f"counterexample-cells: {len(shape)}")
        print(f"counterexample-box: {shape.width}x{shape.height}")
        return EXIT_YES
    return EXIT_UNDECIDED


def cmd_reduce2d(args) -> int:
    inst = parse_grid3c(Path(args.instance).read_text())
    out = build_instance(inst)
    base = Path(args.instance).with_suffix("")
    stain_path = base.with_suffix(".stain")
    sticker_path = base.with_suffix(".sticker")
    stain_path.write_text(render_poly(out.stain))
    sticker_path.write_text(render_poly(out.sticker))
    print(f"instance: {args.instance}")
    print(f"vertices: {len(inst.vertices)}")
    print(f"precolored: {len(inst.precolored)}")
    print(f"stain-cells: {len(out.stain)}")
    print(f"sticker-cells: {len(out.sticker)}")
    print(f"stain-file: {stain_path}")
    print(f"sticker-file: {sticker_path}")
    return EXIT_YES


def cmd_reduce1d(args) -> int:
    inst = parse_x3c(Path(args.instance).read_text())
    template = build_template(inst)
    base = Path(args.instance).with_suffix("")
    rle_path = base.with_suffix(".rle")
    pos_path = base.with_suffix(".positions")
    rle_path.write_text(template_to_rle(template))
    pos_path.write_text(
        "\n".join(str(p) for p in sorted(template.positions)) + "\n"
    )
    print(f"instance: {args.instance}")
    print(f"q: {inst.q}")
    print(f"r: {inst.r}")
    print(f"N: {template.element_size}")
    print(f"L: {template.target_length}")
    print(f"W: {template.gadget_size}")
    print(f"ruler: {','.join(str(a) for a in template.ruler)}")
    print(f"template-positions: {len(template.positions)}")
    print(f"rle-file: {rle_path}")
    print(f"positions-file: {pos_path}")
    return EXIT_YES


def _catalog_entry_check(name: str, max_nodes, max_seconds) -> tuple[str, str, int]:
    """Worker for verify-catalog: re-check one I entry by name."""
    entry = next(e for e in catalog_I() if e.name == name)
    if entry.counterexample is None:
        return (name, "missing", 0)
    budget = SearchBudget(max_nodes=max_nodes, max_seconds=max_seconds)
    decision = flat_cover_decide(entry.counterexample, entry.stain, budget)
    return (name, decision.status, decision.nodes)


def cmd_verify_catalog(args) -> int:
    names = [e.name for e in catalog_I()]
    todo = [n for n in names if args.exhaustive or n not in _EXHAUSTIVE_ONLY]
    results = {}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_catalog_entry_check, n, args.budget, args.seconds)
                for n in todo
            ]
            for f in futures:
                name, outcome, nodes = f.result()
                results[name] = (outcome, nodes)
    else:
        for n in todo:
            name, outcome, nodes = _catalog_entry_check(n, args.budget, args.seconds)
            results[name] = (outcome, nodes)
    refuted = undecided = 0
    for name in names:
        if name not in results:
            print(f"{name}: skipped")
            continue
        outcome, nodes = results[name]
        print(f"{name}: {outcome} nodes={nodes}")
        if outcome == "coverable":
            refuted += 1
        elif outcome != "not_coverable":
            undecided += 1
    print(f"entries: {len(names)}")
    print(f"checked: {len(todo)}")
    print(f"refuted: {refuted}")
    print(f"undecided: {undecided}")
    if refuted:
        return EXIT_NO
    if undecided:
        return EXIT_UNDECIDED
    return EXIT_YES


def cmd_partition_check(args) -> int:
    report = exhaustive_partition_check()
    for size in sorted(report.counts):
        total, n_inc, n_in = report.counts[size]
        print(f"size {size}: shapes={total} include-I={n_inc} inside-J={n_in}")
    print(f"violations: {len(report.violations)}")
    for v in report.violations:
        print(f"violation: {v}")
    print(f"ok: {str(report.ok).lower()}")
    return EXIT_YES if report.ok else EXIT_NO


def cmd_render(args) -> int:
    shape = _read_poly(args.file)
    text = to_svg(shape) if args.svg else render_poly(shape)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote: {args.out}")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    return EXIT_YES


def _add_budget_flags(sp, default_nodes=None, default_seconds=None):
    sp.add_argument("--budget", type=int, default=default_nodes, metavar="NODES",
                    help="search node budget (default: unlimited)")
    sp.add_argument("--seconds", type=float, default=default_seconds, metavar="S",
                    help="wall-clock budget in seconds (default: unlimited)")


def build_parser() -> _Parser:
    parser = _Parser(prog="flatcover", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("classify", help="decide always-coverability of a stain")
    sp.add_argument("stain", help="stain grid file")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("cover", help="decide or enumerate flat covers")
    sp.add_argument("sticker", help="sticker grid file")
    sp.add_argument("stain", help="stain grid file")
    sp.add_argument("--enumerate", action="store_true",
                    help="enumerate minimal covers instead of deciding")
    sp.add_argument("--cap", type=int, default=1_000_000,
                    help="maximum covers to enumerate (default: %(default)s)")
    sp.add_argument("--max-placements", type=int, default=None, metavar="K",
                    help="only covers of at most K copies (e.g. 1 for single-copy)")
    _add_budget_flags(sp)
    sp.set_defaults(func=cmd_cover)

    sp = sub.add_parser("search", help="anneal for a counterexample sticker")
    sp.add_argument("stain", help="stain grid file")
    sp.add_argument("--config", help="search parameter file (key = value lines)")
    sp.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    sp.add_argument("--force", action="store_true",
                    help="search even if the stain is always coverable")
    sp.add_argument("--checkpoint", help="checkpoint file to write (and resume from)")
    sp.add_argument("--resume", action="store_true",
                    help="resume from the checkpoint file")
    sp.add_argument("--results-dir", help="directory for found counterexamples")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("reduce-2d", help="build the coloring-gadget stain")
    sp.add_argument("instance", help=".grid3c instance file (x y [color] lines)")
    sp.set_defaults(func=cmd_reduce2d)

    sp = sub.add_parser("reduce-1d", help="build the 1D template from an X3C instance")
    sp.add_argument("instance", help=".x3c instance file ('q r' header, 3-int lines)")
    sp.set_defaults(func=cmd_reduce1d)

    sp = sub.add_parser("verify-catalog", help="re-check catalog counterexamples")
    sp.add_argument("--exhaustive", action="store_true",
                    help="include the 325x325 entry (out of desk-scale reach)")
    sp.add_argument("--jobs", type=int, default=1, help="parallel workers")
    _add_budget_flags(sp)
    sp.set_defaults(func=cmd_verify_catalog)

    sp = sub.add_parser("partition-check",
                        help="exhaustively check the catalog partition, sizes 1-7")
    sp.set_defaults(func=cmd_partition_check)

    sp = sub.add_parser("render", help="render a grid file as ASCII or SVG")
    sp.add_argument("file", help="polyomino grid file")
    sp.add_argument("--svg", action="store_true", help="emit SVG instead of ASCII")
    sp.add_argument("--out", help="write to a file instead of stdout")
    sp.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PolyominoError, CatalogError, ReductionError, X3CError, AnnealError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 on success, 1 when a verification fails, 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from collections import Counter
from importlib import resources
from pathlib import Path

from .cubic import dp_similarity, ted_cubic
from .forest import ForestSyntaxError, parse_forest, random_forest
from .maxplus import KERNELS
from .oracle import zhang_shasha_ed
from .subcubic import default_delta, plan_decomposition, ted_subcubic

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

BENCH_COLUMNS = [
    "algorithm", "n", "m", "delta", "seconds", "ed", "transitions", "type1",
    "type2_first", "type2_second", "type2_base", "transition_bound",
    "mul1_iterations", "pair_count", "materialized",
]


def _zhang_shasha(f1, f2, delta=None, kernel=None, stats=None):
    return zhang_shasha_ed(f1, f2)


def _cubic(f1, f2, delta=None, kernel=None, stats=None):
    return ted_cubic(f1, f2, stats)


def _subcubic(f1, f2, delta=None, kernel=None, stats=None):
    return ted_subcubic(f1, f2, delta, kernel, stats)


ALGORITHMS = {"zhang-shasha": _zhang_shasha, "cubic": _cubic, "subcubic": _subcubic}


class UsageError(Exception):
    pass


def _read_pair(args) -> tuple:
    if args.random:
        if args.inputs:
            raise UsageError("give either input files or --random, not both")
        rng = random.Random(args.seed)
        return tuple(random_forest(args.size, args.alphabet, rng=rng) for _ in range(2))
    if len(args.inputs) != 2:
        raise UsageError("need exactly two inputs (or --random)")
    texts = []
    for item in args.inputs:
        if args.inline:
            texts.append(item)
        else:
            try:
                texts.append(Path(item).read_text().strip())
            except OSError as exc:
                raise UsageError(f"cannot read {item}: {exc.strerror}") from exc
    return tuple(parse_forest(t) for t in texts)


def cmd_distance(args) -> int:
    f1, f2 = _read_pair(args)
    ed = ALGORITHMS[args.algo](f1, f2, args.delta, KERNELS[args.kernel])
    sim = f1.n + f2.n - ed
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["algorithm", "n1", "n2", "ed", "sim"])
        writer.writerow([args.algo, f1.n, f2.n, ed, sim])
    else:
        print(f"ed={ed} sim={sim}")
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = random.Random(args.seed)
    kernel = KERNELS[args.kernel]
    for trial in range(args.trials):
        f1 = random_forest(rng.randint(0, args.size), args.alphabet, rng=rng)
        f2 = random_forest(rng.randint(0, args.size), args.alphabet, rng=rng)
        expected = ALGORITHMS["zhang-shasha"](f1, f2)
        for name in ("cubic", "subcubic"):
            got = ALGORITHMS[name](f1, f2, args.delta, kernel)
            if got != expected:
                print(f"MISMATCH trial={trial} algo={name} expected={expected} "
                      f"got={got} t1={f1!r} t2={f2!r}")
                return EXIT_FAIL
    print(f"OK trials={args.trials}")
    return EXIT_OK


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad size list {text!r}") from exc
    if not sizes or min(sizes) < 0:
        raise UsageError(f"bad size list {text!r}")
    return sizes


def cmd_bench(args) -> int:
    sizes = _parse_sizes(args.sizes)
    algos = list(ALGORITHMS) if args.algo == "all" else [args.algo]
    kernel = KERNELS[args.kernel]
    rng = random.Random(args.seed)
    writer = csv.DictWriter(sys.stdout, fieldnames=BENCH_COLUMNS)
    writer.writeheader()
    for n in sizes:
        for _ in range(args.trials):
            f1 = random_forest(n, args.alphabet, rng=rng)
            f2 = random_forest(n, args.alphabet, rng=rng)
            delta = args.delta or default_delta(min(f1.n, f2.n))
            for name in algos:
                stats = Counter()
                start = time.monotonic()
                ed = ALGORITHMS[name](f1, f2, delta, kernel, stats)
                row = {c: "" for c in BENCH_COLUMNS}
                row.update(algorithm=name, n=f1.n, m=f2.n, ed=ed,
                           seconds=f"{time.monotonic() - start:.6f}")
                if name == "subcubic":
                    counts = plan_decomposition(f1, delta).counts()
                    row.update(delta=delta, transitions=sum(counts.values()),
                               transition_bound=f"{4 * f1.n / delta + 4:.2f}",
                               **{k: counts.get(k, 0) for k in
                                  ("type1", "type2_first", "type2_second", "type2_base")})
                if name != "zhang-shasha":
                    row.update(mul1_iterations=stats["mul1_iterations"],
                               pair_count=stats["pair_count"],
                               materialized=stats["materialized"])
                writer.writerow(row)
    return EXIT_OK


def _load_vectors(path: str | None) -> tuple[dict, Path | None]:
    if path is None:
        text = resources.files("simted").joinpath("fixtures/vectors.json").read_text()
        return json.loads(text), None
    p = Path(path)
    return json.loads(p.read_text()), p.parent


def _fixture_pair(name: str, base: Path | None):
    if base is None:
        text = resources.files("simted").joinpath("fixtures", name).read_text()
    else:
        text = (base / name).read_text()
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    return parse_forest(lines[0]), parse_forest(lines[1])


def cmd_selfcheck(args) -> int:
    try:
        vectors, base = _load_vectors(args.vectors)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load vectors: {exc}") from exc
    failures = []

    edit = vectors["edit"]
    t1, t2 = _fixture_pair(edit["pair"], base)
    for name, algo in ALGORITHMS.items():
        ed = algo(t1, t2)
        sim = t1.n + t2.n - ed
        ok = ed == edit["ed"] and sim == edit["sim"]
        print(f"{'PASS' if ok else 'FAIL'} edit {name}: ed={ed} sim={sim} "
              f"(expected ed={edit['ed']} sim={edit['sim']})")
        if not ok:
            failures.append(f"edit/{name}")

    windows = vectors["windows"]
    t1, t2 = _fixture_pair(windows["pair"], base)
    s = dp_similarity(t1, t2)
    got = {}
    for i, j, want in windows["cells"]:
        value = s.get(i, j)
        got[(i, j)] = value
        ok = value == want
        print(f"{'PASS' if ok else 'FAIL'} window s({i},{j}) = {value} (expected {want})")
        if not ok:
            failures.append(f"window/{i},{j}")
    (a, b), (c, d) = [tuple(cell[:2]) for cell in windows["cells"][:2]], \
        [tuple(cell[:2]) for cell in windows["cells"][2:4]]
    lhs = got[a] + got[b]
    rhs = got[c] + got[d]
    ok = lhs < rhs
    print(f"{'PASS' if ok else 'FAIL'} anti-Monge violation: "
          f"s{a} + s{b} = {lhs} < {rhs} = s{c} + s{d}")
    if not ok:
        failures.append("anti-monge")

    if failures:
        print("FAILED: " + ", ".join(failures))
        return EXIT_FAIL
    print("all vectors pass")
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simted", description="Tree edit distance through similarity matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--delta", type=_positive, default=None,
                        help="block size for the subcubic algorithm")
    common.add_argument("--kernel", choices=sorted(KERNELS), default="naive",
                        help="bounded-difference product kernel")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alphabet", type=_positive, default=2,
                        help="label alphabet size for random inputs")

    p = sub.add_parser("distance", parents=[common], help="edit distance of two forests")
    p.add_argument("inputs", nargs="*", help="two files in bracket notation")
    p.add_argument("--inline", action="store_true",
                   help="treat the inputs as bracket notation, not file names")
    p.add_argument("--random", action="store_true", help="use two random trees")
    p.add_argument("--size", type=_non_negative, default=10)
    p.add_argument("--algo", choices=sorted(ALGORITHMS), default="subcubic")
    p.add_argument("--format", choices=["plain", "csv"], default="plain")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("verify", parents=[common],
                       help="cross-check all algorithms on random pairs")
    p.add_argument("--trials", type=_non_negative, default=100)
    p.add_argument("--size", type=_non_negative, default=20,
                   help="largest forest size")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="timings and counters as CSV")
    p.add_argument("--size", dest="sizes", default="20,40,80",
                   help="comma-separated tree sizes")
    p.add_argument("--trials", type=_positive, default=1)
    p.add_argument("--algo", choices=["all"] + sorted(ALGORITHMS), default="all")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selfcheck", help="replay the bundled reference vectors")
    p.add_argument("--vectors", default=None,
                   help="alternative vectors JSON (pairs are read next to it)")
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ForestSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

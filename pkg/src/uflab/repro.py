"""Claim manifest: each claim is a set of CLI runs plus a numeric check.

Every command runs as ``python -m uflab <argv> --out <file>`` in a fresh
process and the check reads the emitted CSV files back, so a claim tests
exactly what a user of the command line would see.

Examples
--------
    uflab repro --list
    uflab repro --claims c1,c11 --workdir runs/
"""

from __future__ import annotations

import math
import subprocess
import sys
import tempfile
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .stats import crossing_point
from .tables import SchemaError, Table, parse_csv

PASS, FAIL = "pass", "fail"
SCHEMA_ERROR, MISSING_OUTPUT, COMMAND_ERROR = "schema-error", "missing-output", "command-error"


class MissingOutput(RuntimeError):
    """A command finished without writing the file a check asked for."""


class Outputs:
    """The files written by one claim's commands, keyed by command name."""

    def __init__(self, paths: dict[str, Path]):
        self.paths = dict(paths)
        self._tables: dict[str, Table] = {}

    def path(self, name: str) -> Path:
        if name not in self.paths:
            raise MissingOutput(f"no command named {name!r}")
        path = self.paths[name]
        if not path.is_file():
            raise MissingOutput(f"{name}: {path} was not written")
        return path

    def bytes(self, name: str) -> bytes:
        return self.path(name).read_bytes()

    def table(self, name: str) -> Table:
        if name not in self._tables:
            self._tables[name] = parse_csv(self.path(name).read_text(encoding="utf-8"))
        return self._tables[name]


Check = Callable[[Outputs], tuple[bool, str]]


@dataclass(frozen=True)
class Claim:
    """One reproducible statement.

    ``commands`` maps a name to CLI arguments (without ``--out``); a
    cluster-stats command also yields ``<name>.fits``.
    """

    id: str
    title: str
    commands: dict[str, tuple[str, ...]]
    check: Check
    predicate: str
    runtime: str = "seconds"


@dataclass(frozen=True)
class ClaimResult:
    id: str
    title: str
    status: str
    detail: str
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def line(self) -> str:
        return f"{self.status.upper():<14} {self.id:<4} {self.title}: {self.detail} ({self.seconds:.1f} s)"


def _cli_runner(argv: Sequence[str]) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "uflab", *argv], capture_output=True, text=True)


def _out_paths(workdir: Path, claim: Claim) -> dict[str, Path]:
    paths = {}
    for name, argv in claim.commands.items():
        paths[name] = workdir / f"{claim.id}-{name}.csv"
        if argv and argv[0] == "cluster-stats":
            paths[name + ".fits"] = workdir / f"{claim.id}-{name}.fits.csv"
    return paths


def run_claim(claim: Claim, workdir: Path, runner=_cli_runner) -> ClaimResult:
    """Run the claim's commands in order, then its check."""
    start = time.perf_counter()
    paths = _out_paths(workdir, claim)

    def result(status, detail):
        return ClaimResult(claim.id, claim.title, status, detail, time.perf_counter() - start)

    for name, argv in claim.commands.items():
        try:
            proc = runner([*argv, "--out", str(paths[name])])
        except OSError as exc:
            return result(COMMAND_ERROR, f"{name} could not start: {exc}")
        if proc.returncode != 0:
            tail = (proc.stderr or "").strip().splitlines()[-1:] or [""]
            return result(COMMAND_ERROR, f"{name} exited {proc.returncode}: {tail[0]}")
    try:
        ok, detail = claim.check(Outputs(paths))
    except SchemaError as exc:
        return result(SCHEMA_ERROR, str(exc))
    except MissingOutput as exc:
        return result(MISSING_OUTPUT, str(exc))
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        return result(FAIL, f"check could not be evaluated: {exc!r}")
    return result(PASS if ok else FAIL, detail)


def run_claims(claims: Sequence[Claim], workdir=None, runner=_cli_runner, echo=None) -> list[ClaimResult]:
    """Run every claim; ``echo`` is called with each result as it lands."""
    if not claims:
        return []
    with tempfile.TemporaryDirectory(prefix="uflab-repro-") as tmp:
        root = Path(workdir) if workdir is not None else Path(tmp)
        root.mkdir(parents=True, exist_ok=True)
        results = []
        for claim in claims:
            res = run_claim(claim, root, runner)
            if echo is not None:
                echo(res)
            results.append(res)
    return results


def format_report(results: Sequence[ClaimResult]) -> str:
    lines = [r.line() for r in results]
    if results:
        passed = sum(r.passed for r in results)
        lines.append(f"{passed}/{len(results)} claims pass")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------- helpers


def _rows(table: Table, *cols) -> list[tuple]:
    columns = [table.column(c) for c in cols]
    return list(zip(*columns))


def _series(table: Table, key: str, x: str, y: str) -> dict:
    """``{key value: ([x...], [y...])}`` in table order."""
    out: dict = {}
    for k, xv, yv in _rows(table, key, x, y):
        xs, ys = out.setdefault(k, ([], []))
        xs.append(xv)
        ys.append(yv)
    return out


def _lookup(table: Table, value: str, **where):
    keys = list(where)
    for row in _rows(table, *keys, value):
        if all(_same(row[i], where[k]) for i, k in enumerate(keys)):
            return row[-1]
    raise KeyError(f"no row with {where}")


def _same(a, b) -> bool:
    if isinstance(b, float) or isinstance(a, float):
        return math.isclose(float(a), float(b), rel_tol=1e-9, abs_tol=1e-12)
    return a == b


def _crossings(table: Table, key: str, rate: str = "rate") -> dict[tuple, float | None]:
    series = _series(table, key, "p", rate)
    sizes = sorted(series)
    out = {}
    for a, b in zip(sizes, sizes[1:]):
        pa, ra = series[a]
        pb, rb = series[b]
        if pa != pb:
            raise ValueError("curves sampled on different p grids")
        out[(a, b)] = crossing_point(pa, ra, rb)
    return out


def _fmt_cross(cross: dict) -> str:
    return ", ".join(f"{a}/{b}: {'none' if c is None else format(c, '.4f')}" for (a, b), c in cross.items())


def _within(values, lo, hi) -> bool:
    return all(v is not None and lo <= v <= hi for v in values)


def _join(*parts: tuple[bool, str]) -> tuple[bool, str]:
    return all(ok for ok, _ in parts), "; ".join(msg for _, msg in parts)


# ---------------------------------------------------------------- checks


def _check_saturated(out: Outputs):
    t = out.table("bench")
    values = dict(_rows(t, "n", "accesses_per_merge"))
    at = values[1024]
    spread = max(values.values()) - min(values.values())
    ok = 7.5 <= at <= 8.5 and spread <= 0.3
    return ok, f"n=1024 gives {at:.4f} (want [7.5, 8.5]); spread over n {spread:.4f} (want <= 0.3)"


def _check_scalings(out: Outputs):
    naive = dict(_rows(out.table("naive"), "n", "accesses_per_merge"))
    ratio = naive[4096] / naive[1024]
    part_naive = (3.0 <= ratio <= 5.0, f"naive 4096/1024 ratio {ratio:.3f} (want [3, 5])")
    ubs = dict(_rows(out.table("ubs"), "n", "accesses_per_merge"))
    ns = sorted(ubs)
    inc = [ubs[b] - ubs[a] for a, b in zip(ns, ns[1:])]
    ratios = [b / a if a > 0 else math.inf for a, b in zip(inc, inc[1:])]
    part_ubs = (
        all(i > 0 for i in inc) and all(0.7 <= r <= 1.3 for r in ratios),
        "ubs increments " + ", ".join(f"{i:.4f}" for i in inc)
        + "; ratios " + ", ".join(f"{r:.3f}" for r in ratios) + " (want [0.7, 1.3])",
    )
    flat = dict(_rows(out.table("flat"), "n", "accesses_per_merge"))
    spread = max(flat.values()) - min(flat.values())
    part_flat = (spread <= 0.3, f"ubs+pc spread {spread:.4f} (want <= 0.3)")
    return _join(part_naive, part_ubs, part_flat)


def _check_unsaturated(out: Outputs):
    series = _series(out.table("bench"), "mode", "n", "accesses_per_merge")
    parts = []
    for mode, (ns, vals) in series.items():
        base = vals[ns.index(1024)]
        worst = max(vals)
        parts.append((worst <= 1.2 * base, f"{mode} max/base {worst / base:.3f}"))
    ok, msg = _join(*parts)
    return ok, msg + " (want <= 1.2)"


def _check_bond(out: Outputs):
    t = out.table("perc")
    Ls = sorted(set(t.column("L")))
    parts = []
    for p, sign in ((0.45, -1), (0.55, +1)):
        rates = [_lookup(t, "rate", L=L, p=p) for L in Ls]
        steps = [b - a for a, b in zip(rates, rates[1:])]
        mono = all(sign * s > 0 for s in steps)
        lo8, hi8 = _lookup(t, "lower", L=Ls[0], p=p), _lookup(t, "upper", L=Ls[0], p=p)
        loN, hiN = _lookup(t, "lower", L=Ls[-1], p=p), _lookup(t, "upper", L=Ls[-1], p=p)
        apart = hiN < lo8 if sign < 0 else loN > hi8
        parts.append((mono and apart, f"p={p} rates " + ", ".join(f"{r:.3f}" for r in rates)
                      + (" separated" if apart else " overlapping")))
    cross = _crossings(t, "L")
    parts.append((_within(cross.values(), 0.47, 0.53), f"crossings {_fmt_cross(cross)} (want 0.5 +/- 0.03)"))
    return _join(*parts)


def _decreasing(t: Table, small: int, large: int, ps) -> list[tuple[bool, str]]:
    parts = []
    for p in ps:
        r_s, r_l = _lookup(t, "rate", L=small, p=p), _lookup(t, "rate", L=large, p=p)
        ok = r_l < r_s or r_l == r_s == 0
        if ok and max(r_s, r_l) > 0.05:
            ok = _lookup(t, "upper", L=large, p=p) < _lookup(t, "lower", L=small, p=p)
        parts.append((ok, f"p={p}: L={small} {r_s:.3f} -> L={large} {r_l:.3f}"))
    return parts


def _check_erasure(out: Outputs):
    t2 = out.table("2d")
    parts = _decreasing(t2, 8, 64, (0.05, 0.10, 0.15))
    for p in (0.05, 0.10):
        r = _lookup(t2, "rate", L=64, p=p)
        parts.append((r < 0.05, f"L=64 p={p} rate {r:.3f} (want < 0.05)"))
    t3 = out.table("3d")
    parts += [(ok, "3d " + msg) for ok, msg in _decreasing(t3, 6, 14, (0.02, 0.03))]
    return _join(*parts)


def _check_uf_threshold(out: Outputs):
    cross = _crossings(out.table("uf"), "d")
    return _within(cross.values(), 0.085, 0.105), f"crossings {_fmt_cross(cross)} (want [0.085, 0.105])"


def _mean_crossing(cross: dict) -> float | None:
    vals = [c for c in cross.values() if c is not None]
    return sum(vals) / len(vals) if len(vals) == len(cross) else None


def _check_mwpm_threshold(out: Outputs):
    mw = _crossings(out.table("mwpm"), "d")
    uf = _crossings(out.table("uf"), "d")
    part_range = (_within(mw.values(), 0.09, 0.11), f"mwpm crossings {_fmt_cross(mw)} (want [0.09, 0.11])")
    m_mw, m_uf = _mean_crossing(mw), _mean_crossing(uf)
    ordered = m_mw is not None and m_uf is not None and m_uf <= m_mw
    fmt = lambda v: "none" if v is None else f"{v:.4f}"  # noqa: E731
    return _join(part_range, (ordered, f"uf threshold {fmt(m_uf)} <= mwpm {fmt(m_mw)}"))


def _check_clusters(out: Outputs):
    fits = out.table("stats.fits")
    parts = []
    for q in ("size", "perimeter"):
        r2 = _lookup(fits, "r_squared", quantity=q)
        parts.append((r2 >= 0.98, f"{q} A-B/d R^2 {r2:.4f}"))
    r2 = _lookup(fits, "r_squared", quantity="count")
    b0 = _lookup(fits, "intercept", quantity="count")
    se = _lookup(fits, "intercept_stderr", quantity="count")
    parts.append((r2 >= 0.99, f"count~d^2 R^2 {r2:.5f}"))
    parts.append((abs(b0) <= 3 * se, f"intercept {b0:.4g} +/- {se:.3g}"))
    return _join(*parts)


REFERENCE_ACCESSES = {"naive": 4818.79, "ubs": 4489.41, "ubs-size": 3722.97, "pc": 7841.13}


def _check_access(out: Outputs):
    t = out.table("d49")
    root = {m: _lookup(t, "root_accesses", mode=m) for m in ("naive", "ubs", "pc")}
    size_ubs = _lookup(t, "size_accesses", mode="ubs")
    ratio = root["pc"] / root["naive"]
    parts = [
        (root["ubs"] < root["naive"], f"(a) ubs {root['ubs']:.1f} < naive {root['naive']:.1f}"),
        (root["ubs"] + size_ubs > root["naive"], f"(b) ubs+size {root['ubs'] + size_ubs:.1f} > naive"),
        (1.3 <= ratio <= 2.0, f"(c) pc/naive {ratio:.3f} in [1.3, 2.0]"),
    ]
    grid = out.table("grid")
    worst = max(s for m, s in _rows(grid, "mode", "scale_factor_vs_naive") if m.endswith(("pc", "ps")))
    parts.append((worst <= 2.0, f"(d) max compression scale factor {worst:.3f} <= 2"))
    ok, msg = _join(*parts)
    got = {**root, "ubs-size": size_ubs}
    ref = ", ".join(f"{k} {got[k]:.1f}/{v} ({got[k] / v - 1:+.0%})" for k, v in REFERENCE_ACCESSES.items())
    return ok, msg + f"; reference (not gated): {ref}"


def _check_soundness(out: Outputs):
    parts = []
    for name in ("toric", "planar", "toric3d"):
        t = out.table(name)
        bad = {c: sum(t.column(c)) for c in ("uneven_clusters", "uncovered_defects",
                                               "mode_mismatches", "bad_corrections")}
        trials = sum(t.column("trials"))
        parts.append((not any(bad.values()), f"{name} {trials} trials, violations {sum(bad.values())}"))
    return _join(*parts)


def _check_oracles(out: Outputs):
    t = out.table("oracles")
    parts = []
    for check, instances, violations, agreement in _rows(t, "check", "instances", "violations", "agreement"):
        if check == "local-matching":
            ok = violations == 0 and agreement >= 0.95
            parts.append((ok, f"{check}: {violations} below exact, {agreement:.3f} equal (want >= 0.95)"))
        else:
            parts.append((violations == 0, f"{check}: {violations}/{instances} violations"))
    return _join(*parts)


def _check_determinism(out: Outputs):
    names = sorted({n.rsplit("-", 1)[0] for n in out.paths if not n.endswith(".fits")})
    differ = [n for n in names if out.bytes(f"{n}-a") != out.bytes(f"{n}-b")]
    for n in names:
        fa = out.paths.get(f"{n}-a.fits")
        if fa is not None and out.bytes(f"{n}-a.fits") != out.bytes(f"{n}-b.fits"):
            differ.append(n + " fits")
    if differ:
        return False, "output differs for " + ", ".join(differ)
    return True, f"{len(names)} subcommands byte-identical on rerun"


# ---------------------------------------------------------------- manifest

_P_UF = "0.08:0.11:0.005"
_P_MWPM = "0.085:0.115:0.005"
GRID_DISTANCES = "9,13,17,25,33,49"
GRID_P = "0.02:0.1:0.02"
COMPRESSION_MODES = "naive,pc,ps,ubs+pc,ubs+ps"

_SMOKE = {
    "dsu-bench": ("dsu-bench", "--n", "2^6,2^8", "--m", "2^12", "--modes", "naive,ubs,ubs+ps", "--reps", "2"),
    "access-count": ("access-count", "--d", "7", "--p", "0.06", "--trials", "50"),
    "threshold": ("threshold", "--d", "5,7", "--p", "0.08,0.1", "--trials", "100"),
    "threshold-mwpm": ("threshold", "--decoder", "mwpm", "--d", "5", "--p", "0.1", "--trials", "50"),
    "cluster-stats": ("cluster-stats", "--d", "5,7,9", "--p", "0.08", "--trials", "50"),
    "bond-perc": ("bond-perc", "--L", "4,8", "--p", "0.5", "--trials", "100"),
    "erasure-perc": ("erasure-perc", "--L", "4,6", "--p", "0.1", "--trials", "50"),
    "erasure-perc-3d": ("erasure-perc", "--model", "3d", "--L", "3", "--p", "0.03", "--trials", "20"),
    "soundness": ("soundness", "--d", "5", "--p", "0.08", "--trials", "50"),
    "oracle-check": ("oracle-check", "--trials", "20"),
}


def manifest() -> list[Claim]:
    """The twelve claims, in order, at the sizes they are stated for."""
    pow_n = "2^8,2^9,2^10,2^11,2^12"
    return [
        Claim("c1", "saturated constant",
              {"bench": ("dsu-bench", "--n", pow_n, "--m", "2^20", "--modes", "ubs+pc")},
              _check_saturated,
              "ubs+pc accesses per merge at n=1024, m=2^20 in [7.5, 8.5]; max-min over n <= 0.3"),
        Claim("c2", "mode scalings",
              {"naive": ("dsu-bench", "--n", "2^10,2^12", "--m", "2^20", "--modes", "naive"),
               "ubs": ("dsu-bench", "--n", "2^10,2^11,2^12", "--m", "2^20", "--modes", "ubs", "--reps", "1000"),
               "flat": ("dsu-bench", "--n", pow_n, "--m", "2^20", "--modes", "ubs+pc")},
              _check_scalings,
              "naive n=2^12/2^10 ratio in [3, 5]; ubs increment ratio per doubling in [0.7, 1.3]; ubs+pc flat",
              "3 min"),
        Claim("c3", "unsaturated regime",
              {"bench": ("dsu-bench", "--n", "2^10,2^11,2^12,2^13,2^14,2^15,2^16",
                         "--m", "2^10", "--modes", "naive,ubs,pc,ps,ubs+pc,ubs+ps", "--reps", "50")},
              _check_unsaturated,
              "m=2^10: max over n in 2^10..2^16 <= 1.2 x value at n=2^10, every mode"),
        Claim("c4", "bond percolation threshold",
              {"perc": ("bond-perc", "--L", "8,16,32,64", "--p", "0.40:0.60:0.01", "--trials", "500")},
              _check_bond,
              "rate falls with L at 0.45 and rises at 0.55 (Wilson-separated 8 vs 64); crossings in 0.5 +/- 0.03",
              "1 min"),
        Claim("c5", "erasure percolation absence",
              {"2d": ("erasure-perc", "--model", "2d", "--L", "8,16,32,64", "--p", "0.05,0.10,0.15",
                      "--trials", "500"),
               "3d": ("erasure-perc", "--model", "3d", "--L", "6,10,14", "--p", "0.02,0.03", "--trials", "200")},
              _check_erasure,
              "rate(L=64) < rate(L=8) for each p, Wilson-separated above 0.05; rate(64, p<=0.10) < 0.05; "
              "3d rate(14) < rate(6)",
              "10 min"),
        Claim("c6", "union-find threshold",
              {"uf": ("threshold", "--decoder", "uf", "--d", "9,13,17", "--p", _P_UF, "--trials", "10000")},
              _check_uf_threshold,
              "pairwise crossings of d=9,13,17 in [0.085, 0.105]", "3 min"),
        Claim("c7", "matching threshold",
              {"mwpm": ("threshold", "--decoder", "mwpm", "--d", "5,7,9", "--p", _P_MWPM, "--trials", "5000"),
               "uf": ("threshold", "--decoder", "uf", "--d", "5,7,9", "--p", _P_MWPM, "--trials", "5000")},
              _check_mwpm_threshold,
              "matching crossings of d=5,7,9 in [0.09, 0.11]; union-find threshold on the same sizes is not higher",
              "6 min"),
        Claim("c8", "cluster statistics",
              {"stats": ("cluster-stats", "--d", GRID_DISTANCES, "--p", "0.08", "--trials", "10000")},
              _check_clusters,
              "size and perimeter fit A-B/d with R^2 >= 0.98; count linear in d^2 with R^2 >= 0.99, intercept "
              "within 3 sigma of 0",
              "3 min"),
        Claim("c9", "access-count ordering",
              {"d49": ("access-count", "--d", "49", "--p", "0.08", "--modes", "naive,ubs,pc,ubs+pc",
                       "--trials", "100000"),
               "grid": ("access-count", "--d", GRID_DISTANCES, "--p", GRID_P, "--modes", COMPRESSION_MODES,
                        "--trials", "1000")},
              _check_access,
              "ubs < naive < ubs+size; pc/naive in [1.3, 2.0]; compression scale factor <= 2 on the grid",
              "12 min"),
        Claim("c10", "pipeline soundness",
              {"toric": ("soundness", "--code", "toric", "--d", "9", "--p", "0.08", "--trials", "100000"),
               "planar": ("soundness", "--code", "planar", "--d", "9", "--p", "0.08", "--trials", "100000"),
               "toric3d": ("soundness", "--code", "toric", "--d", "5", "--rounds", "L", "--q", "p",
                           "--p", "0.03", "--trials", "100000")},
              _check_soundness,
              "no uneven cluster, uncovered defect, mode mismatch or bad correction",
              "6 min"),
        Claim("c11", "oracle equivalences",
              {"oracles": ("oracle-check", "--trials", "1000")},
              _check_oracles,
              "zero violations against brute force; local matcher equal to exact on >= 95%, never below",
              "1 min"),
        Claim("c12", "determinism",
              {f"{name}-{tag}": argv for name, argv in _SMOKE.items() for tag in ("a", "b")},
              _check_determinism,
              "every subcommand rerun with the same flags and seed writes identical bytes",
              "1 min"),
    ]


def select(claims: Sequence[Claim], ids: Sequence[str] | None) -> list[Claim]:
    if ids is None:
        return list(claims)
    by_id = {c.id: c for c in claims}
    unknown = [i for i in ids if i not in by_id]
    if unknown:
        raise KeyError(f"unknown claim ids: {', '.join(unknown)}")
    return [by_id[i] for i in ids]


def format_manifest(claims: Sequence[Claim]) -> str:
    lines = []
    for c in claims:
        lines.append(f"{c.id}  {c.title}  [{c.runtime}]")
        lines.append(f"    check: {c.predicate}")
        for name, argv in c.commands.items():
            lines.append(f"    {name}: uflab {' '.join(argv)}")
    return "".join(line + "\n" for line in lines)


def main(args) -> int:
    """Entry point behind ``uflab repro``."""
    try:
        claims = select(manifest(), args.claims)
    except KeyError as exc:
        sys.stderr.write(f"uflab repro: {exc.args[0]}\n")
        return 2
    if args.list:
        sys.stdout.write(format_manifest(claims))
        return 0
    echo = None if args.out else (lambda r: print(r.line(), flush=True))
    results = run_claims(claims, args.workdir, echo=echo)
    report = format_report(results)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    elif results:
        print(report.splitlines()[-1])
    return 0 if all(r.passed for r in results) else 1

"""Paired marked length spectra of a two-representation Schottky group.

The central object is the table {class -> (l_g, l_h)} over all inversion-
folded conjugacy classes up to a word length cap, proper powers included.
Long products are evaluated in renormalized blocks so the usable word length
is limited by time, not floating-point range.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import groups
from .errors import NumericalOverflow, SuspectSpec
from .groups import ConjClass, GroupSpec, Word
from .mobius import Isometry
from .thermo import OrbitLevel, PeriodData

BLOCK_SIZE = 8
DEGENERATE_LENGTH = 1e-6
_DIRECT_LOG_CAP = 30.0


# ---------------------------------------------------------------------------
# stable word evaluation

def _matrix_stack(mats: list[Isometry]) -> np.ndarray:
    out = np.empty((len(mats), 2, 2), dtype=np.complex128)
    for i, m in enumerate(mats):
        out[i, 0, 0], out[i, 0, 1] = m.a, m.b
        out[i, 1, 0], out[i, 1, 1] = m.c, m.d
    return out


def _lengths_from_products(prod: np.ndarray, logscale: np.ndarray) -> np.ndarray:
    """Translation lengths from scaled products: true matrix is
    exp(logscale) * prod, determinant 1."""
    half = (prod[:, 0, 0] + prod[:, 1, 1]) / 2.0
    absh = np.abs(half)
    with np.errstate(divide="ignore"):
        logmag = logscale + np.log(absh)
    out = np.empty(len(half))
    direct = logmag <= _DIRECT_LOG_CAP
    if np.any(direct):
        z = half[direct] * np.exp(logscale[direct])
        out[direct] = 2.0 * np.abs(np.arccosh(z.astype(np.complex128)).real)
    big = ~direct
    if np.any(big):
        # acosh(z) = log(2z) + O(z^-2); the correction is below 1e-26 here.
        out[big] = 2.0 * (logmag[big] + math.log(2.0))
    return out


def evaluate_words(mats: list[Isometry], codes: np.ndarray) -> np.ndarray:
    """Translation lengths of many equal-length words at once.

    `codes` is an (N, n) array of letter codes; products are renormalized
    by their max entry every BLOCK_SIZE letters, with the log of the scale
    factors accumulated separately.
    """
    if codes.ndim != 2:
        raise ValueError("codes must be a 2-d array")
    stack = _matrix_stack(mats)
    n = codes.shape[1]
    prod = stack[codes[:, 0]]
    logscale = np.zeros(len(codes))
    for i in range(1, n):
        prod = prod @ stack[codes[:, i]]
        if i % BLOCK_SIZE == 0:
            scale = np.abs(prod).reshape(len(prod), 4).max(axis=1)
            if not np.all(np.isfinite(scale)) or np.any(scale == 0.0):
                raise NumericalOverflow("scaled product left double range")
            prod /= scale[:, None, None]
            logscale += np.log(scale)
    if not np.all(np.isfinite(prod)):
        raise NumericalOverflow("scaled product left double range")
    return _lengths_from_products(prod, logscale)


def evaluate_class(gens: list[Isometry], word: Word) -> float:
    """Translation length of the product of generator matrices along a
    reduced word.  `gens` lists the k generators; inverses are derived."""
    if not word:
        raise ValueError("word must be nonempty")
    if not groups.is_reduced(word):
        raise ValueError("word must be reduced")
    mats = []
    for g in gens:
        mats.append(g)
        mats.append(g.inverse())
    codes = np.array([groups.word_to_codes(word)], dtype=np.int64)
    return float(evaluate_words(mats, codes)[0])


# ---------------------------------------------------------------------------
# the spectrum table

@dataclass(frozen=True)
class SpectrumEntry:
    class_id: int
    word: Word
    word_length: int
    primitive: bool
    least_period: int
    fold_mult: int
    l_g: float
    l_h: float


@dataclass(frozen=True)
class PairedSpectrum:
    """Complete table of class lengths under both representations for all
    conjugacy classes of word length <= n_max."""

    spec_id: str
    rank: int
    n_max: int
    entries: tuple[SpectrumEntry, ...]
    inversion_folded: bool = True
    includes_powers: bool = True

    def lengths(self, side: str, primitive_only: bool = False) -> np.ndarray:
        vals = [
            e.l_g if side == "g" else e.l_h
            for e in self.entries
            if e.primitive or not primitive_only
        ]
        return np.asarray(vals)

    def level(self, n: int) -> list[SpectrumEntry]:
        return [e for e in self.entries if e.word_length == n]


def _entry_from_class(cls: ConjClass, idx: int, l_g: float, l_h: float) -> SpectrumEntry:
    period = groups.least_period(cls.rep)
    fold = 1 if groups.inversion_symmetric(cls.rep) else 2
    return SpectrumEntry(
        idx, cls.rep, cls.word_length, cls.primitive, period, fold, l_g, l_h
    )


def build_paired_spectrum(
    spec: GroupSpec,
    n_max: int,
    cache_dir: str | None = None,
    budget: int = groups.DEFAULT_WORD_BUDGET,
    threads: int = 1,
) -> PairedSpectrum:
    """Evaluate both length functions on every class up to n_max.

    Deterministic given (spec, n_max); cached by spec hash when cache_dir
    is given.  Raises SuspectSpec if any length collapses below the
    degeneracy floor (a near-relation; the group is then not provably free).
    """
    sid = groups.spec_hash(spec)
    if cache_dir is not None:
        cached = _try_load_cache(cache_dir, sid, n_max)
        if cached is not None:
            return cached
    classes = groups.conjugacy_representatives(spec.rank, n_max, budget=budget)
    mats_g = spec.matrices_by_code("g")
    mats_h = spec.matrices_by_code("h")

    by_len: dict[int, list[ConjClass]] = {}
    for c in classes:
        by_len.setdefault(c.word_length, []).append(c)

    def eval_level(n: int) -> tuple[np.ndarray, np.ndarray]:
        codes = np.array(
            [groups.word_to_codes(c.rep) for c in by_len[n]], dtype=np.int64
        )
        return evaluate_words(mats_g, codes), evaluate_words(mats_h, codes)

    levels = sorted(by_len)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(levels, pool.map(eval_level, levels)))
    else:
        results = {n: eval_level(n) for n in levels}

    entries = []
    idx = 0
    for n in levels:
        lg, lh = results[n]
        if np.any(lg < DEGENERATE_LENGTH) or np.any(lh < DEGENERATE_LENGTH):
            raise SuspectSpec(
                f"class length below {DEGENERATE_LENGTH} at word length {n}"
            )
        for c, a, b in zip(by_len[n], lg, lh):
            entries.append(_entry_from_class(c, idx, float(a), float(b)))
            idx += 1
    ps = PairedSpectrum(sid, spec.rank, n_max, tuple(entries))
    if cache_dir is not None:
        write_spectrum_csv(ps, _cache_path(cache_dir, sid, n_max))
    return ps


def restrict(ps: PairedSpectrum, n_max: int) -> PairedSpectrum:
    """The same spectrum truncated to a smaller word-length cap."""
    if n_max > ps.n_max:
        raise ValueError("cannot extend a spectrum by restriction")
    kept = tuple(e for e in ps.entries if e.word_length <= n_max)
    return replace(ps, n_max=n_max, entries=kept)


# ---------------------------------------------------------------------------
# detectors and synthetic transforms

@dataclass(frozen=True)
class DominationVerdict:
    all_dominated: bool
    violations: tuple[int, ...]  # class ids with l_h > l_g + tol


def domination_check(ps: PairedSpectrum, tol: float = 1e-9) -> DominationVerdict:
    bad = tuple(e.class_id for e in ps.entries if e.l_g < e.l_h - tol)
    return DominationVerdict(not bad, bad)


def proportionality_test(ps: PairedSpectrum, tol: float) -> float | None:
    """Median ratio l_h/l_g if the ratios are constant to within tol."""
    if not ps.entries:
        raise ValueError("empty spectrum")
    ratios = np.array([e.l_h / e.l_g for e in ps.entries])
    lam = float(np.median(ratios))
    if float(np.max(np.abs(ratios - lam))) <= tol:
        return lam
    return None


def rescale_h(ps: PairedSpectrum, ratio: float) -> PairedSpectrum:
    """Synthetic spectrum with l_h replaced by ratio * l_g."""
    entries = tuple(
        replace(e, l_h=ratio * e.l_g) for e in ps.entries
    )
    return replace(ps, spec_id=f"{ps.spec_id}*h{ratio:g}", entries=entries)


def swap_sides(ps: PairedSpectrum) -> PairedSpectrum:
    entries = tuple(replace(e, l_g=e.l_h, l_h=e.l_g) for e in ps.entries)
    return replace(ps, spec_id=f"{ps.spec_id}*swap", entries=entries)


def period_data(ps: PairedSpectrum) -> PeriodData:
    """Periodic-point data for the shift underlying the group.

    Level n carries one row per class of word length exactly n with weight
    fold_mult * least_period, so the weighted row count at level n equals
    the number of cyclically reduced words of length n.
    """
    levels: dict[int, OrbitLevel] = {}
    for n in range(1, ps.n_max + 1):
        rows = ps.level(n)
        if not rows:
            continue
        mult = np.array([e.fold_mult * e.least_period for e in rows], dtype=float)
        sums = {
            "g": np.array([e.l_g for e in rows]),
            "h": np.array([e.l_h for e in rows]),
        }
        prim = np.array([e.primitive for e in rows], dtype=bool)
        levels[n] = OrbitLevel(mult=mult, sums=sums, primitive=prim)
    return PeriodData(n_max=ps.n_max, levels=levels)


# ---------------------------------------------------------------------------
# CSV cache

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _cache_path(cache_dir: str, sid: str, n_max: int) -> str:
    return os.path.join(cache_dir, f"spectrum_{sid}_n{n_max}.csv")


def write_spectrum_csv(ps: PairedSpectrum, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write("class_id,word,word_len,l_g,l_h\n")
        for e in ps.entries:
            f.write(
                f"{e.class_id},{groups.word_to_str(e.word)},{e.word_length},"
                f"{_fmt(e.l_g)},{_fmt(e.l_h)}\n"
            )
    os.replace(tmp, path)
    meta = {
        "spec_id": ps.spec_id,
        "rank": ps.rank,
        "n_max": ps.n_max,
        "inversion_folded": ps.inversion_folded,
        "includes_powers": ps.includes_powers,
        "entry_count": len(ps.entries),
    }
    mtmp = path + ".meta.tmp"
    with open(mtmp, "w") as f:
        json.dump(meta, f, sort_keys=True, indent=2)
        f.write("\n")
    os.replace(mtmp, path + ".meta.json")


def read_spectrum_csv(path: str) -> PairedSpectrum:
    with open(path + ".meta.json") as f:
        meta = json.load(f)
    entries = []
    with open(path) as f:
        header = f.readline().strip()
        if header != "class_id,word,word_len,l_g,l_h":
            raise ValueError(f"unexpected header {header!r}")
        for line in f:
            cid, wstr, wlen, lg, lh = line.strip().split(",")
            word = groups.word_from_str(wstr)
            entries.append(
                _entry_from_class(
                    ConjClass(word, int(wlen), groups.is_primitive(word)),
                    int(cid),
                    float(lg),
                    float(lh),
                )
            )
    return PairedSpectrum(
        meta["spec_id"],
        meta["rank"],
        meta["n_max"],
        tuple(entries),
        meta["inversion_folded"],
        meta["includes_powers"],
    )


def _try_load_cache(cache_dir: str, sid: str, n_max: int) -> PairedSpectrum | None:
    path = _cache_path(cache_dir, sid, n_max)
    if os.path.exists(path) and os.path.exists(path + ".meta.json"):
        ps = read_spectrum_csv(path)
        if ps.spec_id == sid and ps.n_max == n_max:
            return ps
    return None

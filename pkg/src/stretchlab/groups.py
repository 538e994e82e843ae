"""Free-group words, conjugacy classes, and Schottky ping-pong specs.

Words are tuples of nonzero ints: +i is the i-th generator, -i its inverse.
Internally, mass enumeration uses byte codes 0..2k-1 where generator i maps
to code 2(i-1) and its inverse to 2(i-1)+1; inversion is code ^ 1 and the
code order gives the canonical letter order a < a^-1 < b < b^-1 < ...
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DiskOverlap, EnumerationTooLarge, NotProvablyDiscrete
from .mobius import Isometry, IsometryType, classify

Word = tuple[int, ...]

DEFAULT_WORD_BUDGET = 20_000_000

# ---------------------------------------------------------------------------
# words and codes


def letter_to_code(letter: int) -> int:
    return 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)


def code_to_letter(code: int) -> int:
    i = code // 2 + 1
    return i if code % 2 == 0 else -i


def word_to_codes(word: Word) -> tuple[int, ...]:
    return tuple(letter_to_code(l) for l in word)


def codes_to_word(codes) -> Word:
    return tuple(code_to_letter(int(c)) for c in codes)


def word_to_str(word: Word) -> str:
    """a..z for generators, A..Z for inverses."""
    out = []
    for l in word:
        ch = chr(ord("a") + abs(l) - 1)
        out.append(ch if l > 0 else ch.upper())
    return "".join(out)


def word_from_str(s: str) -> Word:
    out = []
    for ch in s:
        if ch.islower():
            out.append(ord(ch) - ord("a") + 1)
        elif ch.isupper():
            out.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"bad word character {ch!r}")
    return tuple(out)


def reduce_word(letters) -> Word:
    """Free reduction: cancel adjacent inverse pairs."""
    out: list[int] = []
    for l in letters:
        if l == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def invert_word(word: Word) -> Word:
    return tuple(-l for l in reversed(word))


def is_reduced(word: Word) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def is_cyclically_reduced(word: Word) -> bool:
    if not word:
        return True
    return is_reduced(word) and word[0] != -word[-1]


def cyclic_reduce(word: Word) -> Word:
    w = reduce_word(word)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return w


def _code_key(word: Word) -> tuple[int, ...]:
    return tuple(letter_to_code(l) for l in word)


def _min_rotation_key(word: Word) -> tuple[int, ...]:
    n = len(word)
    return min(_code_key(word[r:] + word[:r]) for r in range(n))


def canonical_rep(word: Word) -> Word:
    """Canonical representative of the conjugacy class of a cyclic word,
    folded under inversion.

    Minimum, in code order, over all rotations of the cyclically reduced
    word and of its inverse.  Idempotent on its own output.
    """
    w = cyclic_reduce(word)
    if not w:
        return ()
    n = len(w)
    best = None
    for cand in (w, invert_word(w)):
        for r in range(n):
            rot = cand[r:] + cand[:r]
            key = _code_key(rot)
            if best is None or key < best[0]:
                best = (key, rot)
    return best[1]


def least_period(word: Word) -> int:
    """Length of the primitive root of a cyclic word."""
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word == word[:d] * (n // d):
            return d
    return n


def is_primitive(word: Word) -> bool:
    return least_period(word) == len(word)


def inversion_symmetric(word: Word) -> bool:
    """Whether the cyclic word equals its inverse as a necklace."""
    return _min_rotation_key(word) == _min_rotation_key(invert_word(word))


# ---------------------------------------------------------------------------
# enumeration

@dataclass(frozen=True)
class ConjClass:
    """One conjugacy class of the free group, inversion-folded."""

    rep: Word
    word_length: int
    primitive: bool


def _reduced_word_count(k: int, n: int) -> int:
    return 2 * k * (2 * k - 1) ** (n - 1) if n >= 1 else 0


def reduced_words_array(k: int, n: int) -> np.ndarray:
    """All freely reduced words of length n as an (N, n) array of codes."""
    m = 2 * k
    words = np.arange(m, dtype=np.int8).reshape(m, 1)
    succ = np.empty((m, m - 1), dtype=np.int8)
    for c in range(m):
        succ[c] = [d for d in range(m) if d != c ^ 1]
    for _ in range(1, n):
        last = words[:, -1]
        nxt = succ[last].reshape(-1, 1)
        words = np.hstack([np.repeat(words, m - 1, axis=0), nxt])
    return words


def _rotation_encodings(words: np.ndarray, base: int) -> np.ndarray:
    """Minimum base-`base` encoding over all rotations of each row."""
    n = words.shape[1]
    pows = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best = None
    w64 = words.astype(np.int64)
    for r in range(n):
        enc = np.roll(w64, -r, axis=1) @ pows
        best = enc if best is None else np.minimum(best, enc)
    return best


def _decode(enc: int, base: int, n: int) -> Word:
    codes = []
    for _ in range(n):
        codes.append(enc % base)
        enc //= base
    return codes_to_word(reversed(codes))


def conjugacy_classes_of_length(k: int, n: int) -> list[ConjClass]:
    """All inversion-folded conjugacy classes of cyclically reduced
    length exactly n, in canonical order.  Includes proper powers."""
    if n < 1:
        return []
    base = 2 * k
    if base ** n > 2**62:
        raise EnumerationTooLarge(n, base**n, 2**62)
    words = reduced_words_array(k, n)
    if n >= 2:
        words = words[words[:, 0] != (words[:, -1] ^ 1)]
    inv = words[:, ::-1] ^ 1
    enc = np.minimum(
        _rotation_encodings(words, base), _rotation_encodings(inv, base)
    )
    canon = np.unique(enc)
    out = []
    for e in canon.tolist():
        rep = _decode(e, base, n)
        out.append(ConjClass(rep, n, is_primitive(rep)))
    return out


def conjugacy_representatives(
    k: int, n: int, budget: int = DEFAULT_WORD_BUDGET
) -> list[ConjClass]:
    """One canonical ConjClass per conjugacy class of cyclically reduced
    length <= n (identity excluded), sorted by (length, representative)."""
    if k < 2:
        raise ValueError("rank must be at least 2")
    if n < 0:
        raise ValueError("max word length must be nonnegative")
    total = sum(_reduced_word_count(k, m) for m in range(1, n + 1))
    if total > budget:
        raise EnumerationTooLarge(n, total, budget)
    out: list[ConjClass] = []
    for m in range(1, n + 1):
        out.extend(conjugacy_classes_of_length(k, m))
    return out


def fixed_point_count(k: int, n: int) -> int:
    """Number of cyclically reduced words of length exactly n, i.e. the
    trace of the n-th power of the letter-adjacency matrix."""
    return (2 * k - 1) ** n + k + (k - 1) * (-1) ** n


# ---------------------------------------------------------------------------
# Schottky specs

@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def gap_to(self, other: "Disk") -> float:
        return abs(self.center - other.center) - self.radius - other.radius


@dataclass(frozen=True)
class GroupSpec:
    """A rank-k free group given by two matrix representations plus the
    ping-pong disks certifying discreteness.

    Disk slot order follows letter codes: a, a^-1, b, b^-1, ...; generator i
    maps the exterior of its own disk into the disk of its inverse.
    """

    rank: int
    gens_g: tuple[Isometry, ...]
    gens_h: tuple[Isometry, ...]
    pingpong_disks: tuple[Disk, ...]
    seed: int

    def side(self, name: str) -> tuple[Isometry, ...]:
        if name == "g":
            return self.gens_g
        if name == "h":
            return self.gens_h
        raise ValueError(f"side must be 'g' or 'h', got {name!r}")

    def matrices_by_code(self, side: str) -> list[Isometry]:
        gens = self.side(side)
        out = []
        for i in range(self.rank):
            out.append(gens[i])
            out.append(gens[i].inverse())
        return out


def _pair_isometry(p: float, q: float, r: float) -> Isometry:
    """The map z -> q - r^2/(z - p): sends the exterior of the circle
    (p, r) onto the interior of (q, r); both circles are its isometric
    circles."""
    return Isometry.of(q, -p * q - r * r, 1.0, -p)


def schottky_fuchsian(k: int, separation: float, seed: int = 0) -> GroupSpec:
    """Fuchsian Schottky group of rank k: unit disks centered on the real
    axis at spacing `separation`, adjacent pairs matched by a generator.

    Both representations coincide (the totally geodesic baseline).
    """
    if k < 2:
        raise ValueError("rank must be at least 2")
    if separation <= 2.1:
        raise DiskOverlap(
            f"separation {separation} leaves no room between unit disks"
        )
    rng = np.random.default_rng(seed)
    slack = separation - 2.0
    # Centering the configuration at 0 keeps matrix entries O(k*separation),
    # which keeps later entrywise perturbations geometrically gentle.
    centers = separation * (np.arange(2 * k) - (2 * k - 1) / 2.0) + rng.uniform(
        -1.0, 1.0, 2 * k
    ) * 0.02 * slack
    # Inflating the stored disks buys mapping margin, which is what absorbs
    # later perturbations of the generators; a quarter of the slack keeps
    # the disks comfortably disjoint.
    eta = min(0.5, slack / 4.0)
    gens = []
    disks = []
    for i in range(k):
        p, q = float(centers[2 * i]), float(centers[2 * i + 1])
        gens.append(_pair_isometry(p, q, 1.0))
        disks.append(Disk(complex(p), 1.0 + eta))
        disks.append(Disk(complex(q), 1.0 + eta))
    spec = GroupSpec(k, tuple(gens), tuple(gens), tuple(disks), seed)
    cert = verify_ping_pong(spec)
    if not cert.ok:
        raise DiskOverlap(f"construction failed verification: {cert.failure}")
    return spec


def perturb(spec: GroupSpec, eps: float, seed: int = 0) -> GroupSpec:
    """Complex perturbation of the h-side generators, entries shifted by
    O(eps) and renormalized; the g side and the disks are unchanged, and
    ping-pong is re-verified against the stored (inflated) disks."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return spec
    rng = np.random.default_rng(seed)
    new_h = []
    for g in spec.gens_h:
        d = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) * (
            eps / math.sqrt(2.0)
        )
        new_h.append(
            Isometry.of(g.a + d[0], g.b + d[1], g.c + d[2], g.d + d[3])
        )
    out = replace(spec, gens_h=tuple(new_h))
    cert = verify_ping_pong(out)
    if not cert.ok:
        raise NotProvablyDiscrete(
            f"eps = {eps} broke the ping-pong certificate: {cert.failure}"
        )
    return out


# ---------------------------------------------------------------------------
# ping-pong verification

@dataclass(frozen=True)
class SideCheck:
    """Per-representation part of a certificate."""

    mapping_margins: tuple[float, ...]
    iso_drifts: tuple[float, ...]
    letter_bound: float
    loxodromic: bool


@dataclass(frozen=True)
class PingPongCertificate:
    """Outcome of the ping-pong check.

    `ok` implies the group is free, discrete and convex cocompact for both
    representations; `letter_bound` of a side is a per-letter lower bound
    on translation lengths of cyclically reduced words.
    """

    ok: bool
    failure: str | None
    disks: tuple[Disk, ...]
    min_disk_gap: float
    sides: dict[str, SideCheck]

    def letter_bound(self, side: str) -> float:
        return self.sides[side].letter_bound


def _image_circle(iso: Isometry, disk: Disk) -> tuple[Disk, bool]:
    """Image of a circle under a Mobius map with c != 0.

    Returns (image disk, pole_inside); when the pole lies inside the source
    disk the image circle bounds the image of the source exterior.
    """
    a, b, c, d = iso.entries()
    pole = -d / c
    phat = disk.center - pole
    dd = abs(phat) ** 2 - disk.radius**2
    pole_inside = dd < 0.0
    if dd == 0.0:
        raise ZeroDivisionError("circle passes through the pole")
    center = a / c - phat.conjugate() / (c * c * dd)
    radius = disk.radius / (abs(c) ** 2 * abs(dd))
    return Disk(center, radius), pole_inside


def _check_side(spec: GroupSpec, side: str) -> tuple[SideCheck | None, str | None]:
    mats = spec.matrices_by_code(side)
    disks = spec.pingpong_disks
    m = 2 * spec.rank
    margins = []
    drifts = []
    iso_centers = []
    iso_radii = []
    for code in range(m):
        iso = mats[code]
        if classify(iso).tag is not IsometryType.LOXODROMIC:
            return None, f"side {side}: letter {code} is not loxodromic"
        if abs(iso.c) < 1e-14:
            return None, f"side {side}: letter {code} fixes infinity"
        center = -iso.d / iso.c
        iso_centers.append(center)
        iso_radii.append(1.0 / abs(iso.c))
        drifts.append(abs(center - disks[code].center))
        try:
            img, pole_inside = _image_circle(iso, disks[code])
        except ZeroDivisionError:
            return None, f"side {side}: letter {code} disk hits the pole"
        if not pole_inside:
            return None, (
                f"side {side}: pole of letter {code} escaped its disk"
            )
        target = disks[code ^ 1]
        margin = target.radius - abs(img.center - target.center) - img.radius
        if margin <= 0.0:
            return None, (
                f"side {side}: letter {code} image disk leaves its target "
                f"(margin {margin:.3e})"
            )
        margins.append(margin)
    # Per-letter contraction bound.  Along a cyclically reduced word the
    # orbit of the attracting fixed point steps through the exact isometric
    # disks (letter x maps the exterior of its own isometric disk onto the
    # interior of its inverse's), so each letter contracts the derivative
    # by at least ((dist - r_j)/r_x)^(-2) over isometric data, and words of
    # length n translate by at least n * letter_bound.  Needs the isometric
    # disks pairwise disjoint, which is checked here on the actual matrices.
    bound = math.inf
    for x in range(m):
        for j in range(m):
            if j == x:
                continue
            reach = abs(iso_centers[j] - iso_centers[x]) - iso_radii[j]
            if reach <= iso_radii[x]:
                return None, (
                    f"side {side}: isometric disks of letters ({x}, {j}) "
                    f"are not separated"
                )
            bound = min(bound, 2.0 * math.log(reach / iso_radii[x]))
    return (
        SideCheck(tuple(margins), tuple(drifts), bound, True),
        None,
    )


def verify_ping_pong(spec: GroupSpec) -> PingPongCertificate:
    """Check disjointness of the stored disks and the mapping inclusions
    for both representations.  Returns a certificate; never raises for a
    merely invalid spec."""
    disks = spec.pingpong_disks
    m = len(disks)
    min_gap = math.inf
    for i in range(m):
        for j in range(i + 1, m):
            min_gap = min(min_gap, disks[i].gap_to(disks[j]))
    if min_gap <= 0.0:
        return PingPongCertificate(
            False, f"disks overlap (min gap {min_gap:.3e})", disks, min_gap, {}
        )
    sides = {}
    for side in ("g", "h"):
        check, err = _check_side(spec, side)
        if err is not None:
            return PingPongCertificate(False, err, disks, min_gap, sides)
        sides[side] = check
    return PingPongCertificate(True, None, disks, min_gap, sides)


# ---------------------------------------------------------------------------
# serialization

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def spec_to_text(spec: GroupSpec) -> str:
    lines = ["[rank]", str(spec.rank), "[gens_g]"]
    for g in spec.gens_g:
        lines.append(
            " ".join(
                _fmt(v)
                for e in g.entries()
                for v in (e.real, e.imag)
            )
        )
    lines.append("[gens_h]")
    for g in spec.gens_h:
        lines.append(
            " ".join(
                _fmt(v)
                for e in g.entries()
                for v in (e.real, e.imag)
            )
        )
    lines.append("[disks]")
    for d in spec.pingpong_disks:
        lines.append(
            " ".join([_fmt(d.center.real), _fmt(d.center.imag), _fmt(d.radius)])
        )
    lines.append("[seed]")
    lines.append(str(spec.seed))
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> GroupSpec:
    section = None
    rank = None
    seed = None
    gens: dict[str, list[Isometry]] = {"g": [], "h": []}
    disks: list[Disk] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]")
            continue
        if section == "rank":
            rank = int(line)
        elif section in ("gens_g", "gens_h"):
            v = [float(x) for x in line.split()]
            if len(v) != 8:
                raise ValueError("generator rows need 8 numbers")
            gens[section[-1]].append(
                Isometry(
                    complex(v[0], v[1]),
                    complex(v[2], v[3]),
                    complex(v[4], v[5]),
                    complex(v[6], v[7]),
                )
            )
        elif section == "disks":
            v = [float(x) for x in line.split()]
            if len(v) != 3:
                raise ValueError("disk rows need 3 numbers")
            disks.append(Disk(complex(v[0], v[1]), v[2]))
        elif section == "seed":
            seed = int(line)
        else:
            raise ValueError(f"unknown section {section!r}")
    if rank is None or seed is None:
        raise ValueError("missing [rank] or [seed] section")
    return GroupSpec(
        rank, tuple(gens["g"]), tuple(gens["h"]), tuple(disks), seed
    )


def spec_hash(spec: GroupSpec) -> str:
    return hashlib.sha256(spec_to_text(spec).encode()).hexdigest()[:16]

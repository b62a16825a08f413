"""Feature bases, candidate inequalities, and their text/JSON forms.

A basis entry is outer-transform(hook(argument)) where the argument is a
monomial in elementary symmetric polynomials of (a subset of) the row
variables, or a per-variable sum/product, or the constant 1. The hook is an
optional dataset transform (prime counting, once or twice). A candidate is a
pair of coefficient vectors over one shared basis; the conjecture it encodes
is <theta_f, phi(x)> REL <theta_g, phi(x)>.

The canonical difference of a candidate is theta_g - theta_f rescaled to
max-abs 1 with its first nonzero entry positive. Any cone-preserving matrix
action scales the difference by a positive factor, so this vector is the
dedup key for group-equivalent candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DegenerateCandidateError, EvaluationError
from .number_theory import PrimePiTable

FLOAT_INT_EXACT_MAX = float(2**53)
KEY_DECIMALS = 9

COMBINE_KINDS = ("sym", "var-sum", "var-prod", "const")
HOOKS = (None, "pi", "pipi")
OUTERS = ("identity", "log", "sqrt", "power")


@dataclass(frozen=True)
class Dataset:
    """Finite evaluation domain: named columns over integer/real rows."""

    variables: tuple[str, ...]
    rows: np.ndarray
    integer_columns: tuple[bool, ...]
    name: str = ""

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != len(self.variables):
            raise ValueError("rows must be (N, len(variables))")
        if len(self.integer_columns) != len(self.variables):
            raise ValueError("one integer flag per variable is required")
        rows = rows.copy()
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> int:
        return self.variables.index(name)


def symmetric_features(x: Sequence[float], d1: int) -> tuple[float, ...]:
    """Elementary symmetric polynomials e_1..e_d1 of the point x."""
    if d1 > len(x):
        raise ValueError(f"d1={d1} exceeds the number of variables {len(x)}")
    e = [1.0] + [0.0] * d1
    for v in x:
        for j in range(min(d1, len(x)), 0, -1):
            e[j] = e[j] + e[j - 1] * v
    return tuple(e[1 : d1 + 1])


def _esp_columns(cols: list[np.ndarray], upto: int) -> list[np.ndarray]:
    n = cols[0].shape[0]
    e = [np.ones(n)] + [np.zeros(n) for _ in range(upto)]
    for v in cols:
        for j in range(upto, 0, -1):
            e[j] = e[j] + e[j - 1] * v
    return e[1:]


def _needs_parens(text: str) -> bool:
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in "+-·":
            return True
    return False


def _wrap(text: str) -> str:
    return f"({text})" if _needs_parens(text) else text


@dataclass(frozen=True)
class BasisFunction:
    """One feature: outer(hook(argument over selected variables))."""

    combine: str = "sym"
    exponents: tuple[tuple[int, int], ...] = ((1, 1),)
    hook: str | None = None
    outer: str = "identity"
    power: int = 1
    variables: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.combine not in COMBINE_KINDS:
            raise ValueError(f"unknown combine kind {self.combine!r}")
        if self.hook not in HOOKS:
            raise ValueError(f"unknown hook {self.hook!r}")
        if self.outer not in OUTERS:
            raise ValueError(f"unknown outer transform {self.outer!r}")
        if self.outer == "power" and self.power < 1:
            raise ValueError("power exponent must be at least 1")
        if self.combine == "sym":
            exps = tuple((int(i), int(k)) for i, k in self.exponents)
            if not exps or any(i < 1 or k < 1 for i, k in exps):
                raise ValueError("sym exponents must be ((index>=1, power>=1), ...)")
            if len({i for i, _ in exps}) != len(exps):
                raise ValueError("repeated symmetric-polynomial index")
            object.__setattr__(self, "exponents", tuple(sorted(exps)))

    def argument_degree(self) -> int:
        if self.combine == "sym":
            return sum(i * k for i, k in self.exponents)
        if self.combine == "const":
            return 0
        return 1

    def outer_degree(self) -> int:
        return self.power if self.outer == "power" else 1

    def used_variables(self, basis_variables: tuple[str, ...]) -> tuple[str, ...]:
        if self.combine == "const":
            return ()
        return self.variables if self.variables is not None else basis_variables

    def _arg_label(self, names: tuple[str, ...]) -> str:
        factors = []
        for idx, k in self.exponents:
            terms = "+".join(
                "·".join(combo) for combo in combinations(names, idx)
            )
            base = terms if len(self.exponents) == 1 and k == 1 else _wrap(terms)
            factors.append(base if k == 1 else f"{base}^{k}")
        return "·".join(factors)

    def label(self, basis_variables: tuple[str, ...]) -> str:
        if self.combine == "const":
            return "1"
        names = self.used_variables(basis_variables)

        def hooked(arg: str) -> str:
            if self.hook == "pi":
                return f"π({arg})"
            if self.hook == "pipi":
                return f"π(π({arg}))"
            return arg

        def outered(t: str) -> str:
            if self.outer == "log":
                return f"ln({t})"
            if self.outer == "sqrt":
                return f"sqrt({t})"
            if self.outer == "power" and self.power > 1:
                return f"{_wrap(t)}^{self.power}"
            return t

        if self.combine == "sym":
            return outered(hooked(self._arg_label(names)))
        joiner = "+" if self.combine == "var-sum" else "·"
        return joiner.join(outered(hooked(v)) for v in names)

    def is_integer_valued(self, integer_flags: dict[str, bool],
                          basis_variables: tuple[str, ...]) -> bool:
        if self.combine == "const":
            return True
        if self.outer in ("log", "sqrt"):
            return False
        if self.hook in ("pi", "pipi"):
            return True
        return all(integer_flags[v] for v in self.used_variables(basis_variables))


@dataclass(frozen=True)
class FeatureBasis:
    """Ordered, distinct basis entries with degree bounds (d1, d2)."""

    entries: tuple[BasisFunction, ...]
    d1: int
    d2: int
    variables: tuple[str, ...]
    basis_id: str = "basis"
    pi: PrimePiTable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("a basis needs at least one entry")
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("degree bounds d1, d2 must be at least 1")
        labels = set()
        for entry in self.entries:
            used = entry.used_variables(self.variables)
            if any(v not in self.variables for v in used):
                raise ValueError(f"entry uses unknown variables {used}")
            if entry.combine == "sym":
                arity = len(used)
                if any(i > arity for i, _ in entry.exponents):
                    raise ValueError(
                        f"symmetric index exceeds arity {arity} in {entry}"
                    )
            if entry.argument_degree() > self.d1:
                raise ValueError(
                    f"entry argument degree {entry.argument_degree()} exceeds d1={self.d1}"
                )
            if entry.outer_degree() > self.d2:
                raise ValueError(
                    f"entry outer degree {entry.outer_degree()} exceeds d2={self.d2}"
                )
            if entry.hook is not None and self.pi is None:
                raise ValueError("entries with a counting hook need a pi table")
            lab = entry.label(self.variables)
            if lab in labels:
                raise ValueError(f"duplicate basis entry {lab}")
            labels.add(lab)

    @classmethod
    def build(cls, entries, d1, d2, variables, basis_id="basis", pi=None,
              dataset: Dataset | None = None) -> "FeatureBasis":
        basis = cls(tuple(entries), d1, d2, tuple(variables), basis_id, pi)
        if dataset is not None:
            feature_matrix(basis, dataset.rows)  # raises on domain violations
        return basis

    def labels(self) -> list[str]:
        return [entry.label(self.variables) for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _entry_values(entry: BasisFunction, basis: FeatureBasis,
                  rows: np.ndarray) -> np.ndarray:
    n = rows.shape[0]
    if entry.combine == "const":
        return np.ones(n)
    names = entry.used_variables(basis.variables)
    cols = [rows[:, basis.variables.index(v)] for v in names]
    label = entry.label(basis.variables)

    def hook(values: np.ndarray) -> np.ndarray:
        if entry.hook is None:
            return values
        out = basis.pi.lookup(values).astype(np.float64)
        if entry.hook == "pipi":
            out = basis.pi.lookup(out).astype(np.float64)
        return out

    def outer(values: np.ndarray) -> np.ndarray:
        if entry.outer == "identity":
            return values
        if entry.outer == "power":
            return values ** entry.power
        bad = values <= 0 if entry.outer == "log" else values < 0
        if np.any(bad):
            i = int(np.argmax(bad))
            raise EvaluationError(
                f"{entry.outer} domain violation in entry {label} at "
                f"point {tuple(rows[i])}",
                entry=label,
                point=tuple(rows[i]),
            )
        return np.log(values) if entry.outer == "log" else np.sqrt(values)

    if entry.combine == "sym":
        upto = max(i for i, _ in entry.exponents)
        esp = _esp_columns(cols, upto)
        arg = np.ones(n)
        for idx, k in entry.exponents:
            arg = arg * esp[idx - 1] ** k
        return outer(hook(arg))
    parts = [outer(hook(c)) for c in cols]
    out = parts[0].copy()
    for part in parts[1:]:
        out = out + part if entry.combine == "var-sum" else out * part
    return out


def feature_matrix(basis: FeatureBasis, rows: np.ndarray) -> np.ndarray:
    """Evaluate every basis entry on every row; shape (N, len(basis))."""
    rows = np.asarray(rows, dtype=np.float64)
    return np.column_stack([_entry_values(e, basis, rows) for e in basis.entries])


def feature_matrix_exact(basis: FeatureBasis, dataset: Dataset) -> np.ndarray | None:
    """Integer feature matrix when every entry is exactly integer-valued."""
    flags = dict(zip(dataset.variables, dataset.integer_columns))
    if not all(e.is_integer_valued(flags, basis.variables) for e in basis.entries):
        return None
    phi = feature_matrix(basis, dataset.rows)
    if phi.size and float(np.max(np.abs(phi))) >= FLOAT_INT_EXACT_MAX:
        return None
    return phi.astype(np.int64)


@dataclass(frozen=True)
class CandidateConjecture:
    """Two coefficient vectors over a shared basis, plus the relation kind."""

    basis: FeatureBasis
    theta_f: np.ndarray
    theta_g: np.ndarray
    relation: str = "strict"
    exact_f: tuple[Fraction, ...] | None = None
    exact_g: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        tf = np.asarray(self.theta_f, dtype=np.float64).copy()
        tg = np.asarray(self.theta_g, dtype=np.float64).copy()
        if tf.shape != (len(self.basis),) or tg.shape != (len(self.basis),):
            raise ValueError("theta vectors must match the basis length")
        if not tf.any() and not tg.any():
            raise ValueError("theta_f and theta_g cannot both vanish")
        if self.relation not in ("strict", "non-strict"):
            raise ValueError(f"unknown relation {self.relation!r}")
        tf.flags.writeable = False
        tg.flags.writeable = False
        object.__setattr__(self, "theta_f", tf)
        object.__setattr__(self, "theta_g", tg)

    @property
    def is_exact(self) -> bool:
        return self.exact_f is not None and self.exact_g is not None


def candidate_values(c: CandidateConjecture, rows: np.ndarray):
    phi = feature_matrix(c.basis, rows)
    return phi @ c.theta_f, phi @ c.theta_g


def eval_candidate(c: CandidateConjecture, x: Sequence[float]) -> tuple[float, float]:
    """(f_theta(x), g_theta(x)) at a single data point."""
    f, g = candidate_values(c, np.asarray([x], dtype=np.float64))
    return float(f[0]), float(g[0])


def _difference(c: CandidateConjecture):
    if c.is_exact:
        return [g - f for f, g in zip(c.exact_f, c.exact_g)]
    return list(np.asarray(c.theta_g) - np.asarray(c.theta_f))


def canonical_difference(c: CandidateConjecture) -> np.ndarray:
    """theta_g - theta_f, rescaled to max-abs 1, first nonzero positive."""
    diff = _difference(c)
    scale = max(abs(x) for x in diff)
    if scale == 0:
        raise DegenerateCandidateError("theta_g - theta_f vanishes identically")
    diff = [x / scale for x in diff]
    for x in diff:
        if x != 0:
            if x < 0:
                diff = [-y for y in diff]
            break
    return np.array([float(x) for x in diff])


def canonical_key(c: CandidateConjecture) -> str:
    """Stable dedup key for the canonical difference ray."""
    diff = _difference(c)
    scale = max(abs(x) for x in diff)
    if scale == 0:
        raise DegenerateCandidateError("theta_g - theta_f vanishes identically")
    diff = [x / scale for x in diff]
    for x in diff:
        if x != 0:
            if x < 0:
                diff = [-y for y in diff]
            break
    if c.is_exact:
        return ",".join(str(x) for x in diff)
    rounded = [round(float(x), KEY_DECIMALS) for x in diff]
    return ",".join(f"{(r if r != 0 else 0.0):.{KEY_DECIMALS}f}" for r in rounded)


def snap_rational(theta, max_denominator: int) -> tuple[tuple[Fraction, ...], float]:
    """Snap each coefficient to the nearest bounded-denominator rational.

    Returns the snapped vector and the largest snap distance.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be at least 1")
    snapped = tuple(
        Fraction(float(x)).limit_denominator(max_denominator) for x in theta
    )
    dist = max(
        (abs(float(s) - float(x)) for s, x in zip(snapped, theta)), default=0.0
    )
    return snapped, dist


def snap_candidate(c: CandidateConjecture, max_denominator: int) -> CandidateConjecture:
    ef, _ = snap_rational(c.theta_f, max_denominator)
    eg, _ = snap_rational(c.theta_g, max_denominator)
    return CandidateConjecture(
        basis=c.basis,
        theta_f=np.array([float(x) for x in ef]),
        theta_g=np.array([float(x) for x in eg]),
        relation=c.relation,
        exact_f=ef,
        exact_g=eg,
    )


def _coef_text(coef) -> str:
    if isinstance(coef, Fraction):
        return str(coef)
    return f"{float(coef):.12g}"


def _side_text(coeffs, labels) -> str:
    terms = [(c, lab) for c, lab in zip(coeffs, labels) if c != 0]
    if not terms:
        raise DegenerateCandidateError("cannot render a side with no terms")
    parts = []
    for i, (coef, lab) in enumerate(terms):
        mag = -coef if coef < 0 else coef
        if lab == "1":
            body = _coef_text(mag)
        elif mag == 1:
            body = _wrap(lab) if coef < 0 else lab
        else:
            body = f"{_coef_text(mag)}·{_wrap(lab)}"
        if i == 0:
            parts.append(body if coef > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if coef > 0 else f"- {body}")
    return " ".join(parts)


def render(c: CandidateConjecture) -> str:
    """Deterministic one-line text form, f-side first."""
    labels = c.basis.labels()
    fs = c.exact_f if c.is_exact else list(c.theta_f)
    gs = c.exact_g if c.is_exact else list(c.theta_g)
    rel = "<" if c.relation == "strict" else "≤"
    return f"{_side_text(fs, labels)} {rel} {_side_text(gs, labels)}"


def _split_terms(side: str) -> list[tuple[int, str]]:
    out = []
    depth = 0
    sign, buf = 1, []
    i = 0
    if side.startswith("-"):
        sign = -1
        i = 1
    while i < len(side):
        ch = side[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and side[i : i + 3] in (" + ", " - "):
            out.append((sign, "".join(buf)))
            sign = 1 if side[i + 1] == "+" else -1
            buf = []
            i += 3
            continue
        buf.append(ch)
        i += 1
    out.append((sign, "".join(buf)))
    return out


def _parse_side(side: str, label_index: dict[str, int], width: int):
    coeffs = [Fraction(0)] * width
    for sign, term in _split_terms(side):
        term = term.strip()
        if term.startswith("(") and term.endswith(")") and term[1:-1] in label_index:
            term = term[1:-1]
        if term in label_index:
            coeffs[label_index[term]] += sign
            continue
        if "1" in label_index:
            try:
                coeffs[label_index["1"]] += sign * Fraction(term)
                continue
            except ValueError:
                pass
        head, sep, rest = term.partition("·")
        try:
            coef = Fraction(head)
        except ValueError as exc:
            raise ValueError(f"unparseable term {term!r}") from exc
        if not sep:
            raise ValueError(f"unparseable term {term!r}")
        if rest.startswith("(") and rest.endswith(")") and rest[1:-1] in label_index:
            rest = rest[1:-1]
        if rest not in label_index:
            raise ValueError(f"unknown basis entry in term {term!r}")
        coeffs[label_index[rest]] += sign * coef
    return tuple(coeffs)


def parse_candidate(text: str, basis: FeatureBasis) -> CandidateConjecture:
    """Inverse of render for candidates over a known basis."""
    for rel_sym, rel in ((" < ", "strict"), (" ≤ ", "non-strict")):
        if rel_sym in text:
            left, right = text.split(rel_sym, 1)
            break
    else:
        raise ValueError("no relation symbol found")
    label_index = {lab: i for i, lab in enumerate(basis.labels())}
    ef = _parse_side(left.strip(), label_index, len(basis))
    eg = _parse_side(right.strip(), label_index, len(basis))
    return CandidateConjecture(
        basis=basis,
        theta_f=np.array([float(x) for x in ef]),
        theta_g=np.array([float(x) for x in eg]),
        relation=rel,
        exact_f=ef,
        exact_g=eg,
    )


def apply_group_action(c: CandidateConjecture, matrix: np.ndarray) -> CandidateConjecture:
    """Push a 2x2 matrix action on (f, g) onto the coefficient vectors."""
    m = np.asarray(matrix, dtype=np.float64)
    return CandidateConjecture(
        basis=c.basis,
        theta_f=m[0, 0] * c.theta_f + m[0, 1] * c.theta_g,
        theta_g=m[1, 0] * c.theta_f + m[1, 1] * c.theta_g,
        relation=c.relation,
    )


def max_hook_argument(basis: FeatureBasis, upper_corner: Sequence[float]) -> float | None:
    """Largest pre-hook argument over a box with the given upper corner.

    Valid for nonnegative ranges: every argument is monotone in each
    variable there. Returns None when no entry uses a counting hook.
    """
    best = None
    corner = {v: float(x) for v, x in zip(basis.variables, upper_corner)}
    for entry in basis.entries:
        if entry.hook is None:
            continue
        names = entry.used_variables(basis.variables)
        vals = [corner[v] for v in names]
        if entry.combine == "sym":
            esp = symmetric_features(vals, max(i for i, _ in entry.exponents))
            arg = 1.0
            for idx, k in entry.exponents:
                arg *= esp[idx - 1] ** k
        else:
            arg = max(vals)
        best = arg if best is None else max(best, arg)
    return best


def basis_to_dict(basis: FeatureBasis) -> dict:
    return {
        "id": basis.basis_id,
        "d1": basis.d1,
        "d2": basis.d2,
        "variables": list(basis.variables),
        "entries": [
            {
                "combine": e.combine,
                "exponents": [list(pair) for pair in e.exponents],
                "hook": e.hook,
                "outer": e.outer,
                "power": e.power,
                "variables": list(e.variables) if e.variables is not None else None,
            }
            for e in basis.entries
        ],
    }


def basis_from_dict(doc: dict, pi: PrimePiTable | None = None) -> FeatureBasis:
    entries = tuple(
        BasisFunction(
            combine=e.get("combine", "sym"),
            exponents=tuple(tuple(p) for p in e.get("exponents", [[1, 1]])),
            hook=e.get("hook"),
            outer=e.get("outer", "identity"),
            power=e.get("power", 1),
            variables=tuple(e["variables"]) if e.get("variables") else None,
        )
        for e in doc["entries"]
    )
    return FeatureBasis(
        entries=entries,
        d1=doc["d1"],
        d2=doc["d2"],
        variables=tuple(doc["variables"]),
        basis_id=doc.get("id", "basis"),
        pi=pi,
    )


def candidate_to_record(c: CandidateConjecture) -> dict:
    def side(exact, floats):
        if exact is not None:
            return [str(x) for x in exact]
        return [float(x) for x in floats]

    return {
        "basis_id": c.basis.basis_id,
        "theta_f": side(c.exact_f, c.theta_f),
        "theta_g": side(c.exact_g, c.theta_g),
        "relation": c.relation,
        "canonical_key": canonical_key(c),
        "text": render(c),
    }


def candidate_from_record(rec: dict, basis: FeatureBasis) -> CandidateConjecture:
    def side(values):
        if all(isinstance(v, str) for v in values):
            return tuple(Fraction(v) for v in values)
        return None

    ef, eg = side(rec["theta_f"]), side(rec["theta_g"])
    tf = [float(Fraction(v)) if isinstance(v, str) else float(v) for v in rec["theta_f"]]
    tg = [float(Fraction(v)) if isinstance(v, str) else float(v) for v in rec["theta_g"]]
    return CandidateConjecture(
        basis=basis,
        theta_f=np.array(tf),
        theta_g=np.array(tg),
        relation=rec["relation"],
        exact_f=ef if (ef is not None and eg is not None) else None,
        exact_g=eg if (ef is not None and eg is not None) else None,
    )

"""End-to-end proofs of terminating identities r_k = s_k and their specializations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .errors import DivergenceError, DomainError, PoleError
from .exact import AlgebraicConstant, agreement_digits
from .hyperterm import (HyperTerm, apply_theta, eval_term_exact, eval_term_params, parse_term,
                        termination_bound)
from .numeric import eval_series, plan_series, verify_closed_form
from .polyfield import RatFunc, integer_roots, substitute, to_fraction
from .telescope import (CertificateCheckReport, Telescoper, boundary_check, find_telescoper,
                        verify_certificate)

CARLSON_NOTE = (
    "Integer-k equality is proved symbolically. Extension to non-integer k relies on "
    "Carlson's theorem, whose hypotheses (analyticity and boundedness in Re(k) >= 0, growth "
    "below exp(pi|k|)) are assumed and not machine-checked; the samples below are numeric "
    "evidence only."
)
CARLSON_SAMPLES = (Fraction(2, 7), Fraction(-5, 11), Fraction(9, 13))
PROPAGATION_RANGE = 30


@dataclass(frozen=True, eq=False)
class SeriesCatalogEntry:
    id: str
    kernel: HyperTerm
    closed_form: AlgebraicConstant
    provenance: str
    source: str
    convergent: bool = True


@dataclass(eq=False)
class ProofTask:
    id: str
    left: HyperTerm
    right: HyperTerm
    rec_var: str = "k"
    sum_var: str = "n"
    initial_count: int | None = None
    specialize: Fraction | None = None
    target: str | None = None
    anchor: str | None = None
    title: str = ""
    left_source: str = ""
    right_source: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "left": self.left_source or str(self.left),
            "right": self.right_source or str(self.right),
            "rec_var": self.rec_var,
            "sum_var": self.sum_var,
            "specialize": None if self.specialize is None else _q(self.specialize),
            "target": self.target,
            "anchor": self.anchor,
        }


@dataclass
class ProofReport:
    task: ProofTask
    telescoper_a: Telescoper | None = None
    telescoper_b: Telescoper | None = None
    operators_equal: bool = False
    common_annihilation: bool = False
    checks_a: CertificateCheckReport | None = None
    checks_b: CertificateCheckReport | None = None
    initial_values: list = field(default_factory=list)
    leading_coeff_nonvanishing: bool = False
    leading_coeff_roots: list[int] = field(default_factory=list)
    checked_range: tuple[int, int] = (0, PROPAGATION_RANGE)
    recurrence_holds: bool = False
    carlson_note: str = CARLSON_NOTE
    carlson_samples: list = field(default_factory=list)
    specialization: dict | None = None
    status: str = "failed(not-run)"
    diagnostics: list[str] = field(default_factory=list)

    @property
    def proved(self) -> bool:
        return self.status in ("proved-for-integers", "fully-validated")

    def to_json(self) -> dict:
        tels = []
        for t in (self.telescoper_a, self.telescoper_b):
            if t is not None:
                d = t.to_json()
                d["dense"] = dense_coefficients(t)
                tels.append(d)
        return {
            "task": self.task.to_json(),
            "telescopers": tels,
            "operatorsEqual": self.operators_equal,
            "commonAnnihilation": self.common_annihilation,
            "certificateChecks": [c.to_json() for c in (self.checks_a, self.checks_b) if c],
            "initialValues": [[k, _q(r), _q(s), eq] for k, r, s, eq in self.initial_values],
            "leadingCoefficient": {
                "nonvanishing": self.leading_coeff_nonvanishing,
                "integerRoots": self.leading_coeff_roots,
                "checkedRange": list(self.checked_range),
            },
            "recurrenceHolds": self.recurrence_holds,
            "carlson": {"note": self.carlson_note,
                        "samples": [[_q(k), d] for k, d in self.carlson_samples]},
            "specialization": self.specialization,
            "status": self.status,
            "diagnostics": self.diagnostics,
        }


def _q(x) -> str:
    """Rationals as "p/q" strings; rational functions by their printed form."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return str(x)


def dense_coefficients(t: Telescoper) -> list[list[str]] | None:
    """Coefficient lists by power of the recurrence variable (None over Q(z))."""
    out = []
    for p in t.coeffs:
        extra = {nm for nm, used in zip(p.context().names(), _used(p)) if used} - {t.rec_var}
        if extra:
            return None
        i = p.context().names().index(t.rec_var)
        deg = max((m[i] for m in p.monoms()), default=-1)
        row = [Fraction(0)] * (deg + 1)
        for m, c in zip(p.monoms(), p.coeffs()):
            row[m[i]] = to_fraction(c)
        out.append([_q(c) for c in row])
    return out


def _used(p):
    used = [False] * p.context().nvars()
    for m in p.monoms():
        for i, x in enumerate(m):
            used[i] = used[i] or bool(x)
    return used


# ---------------------------------------------------------------------------
# catalog


@lru_cache(maxsize=1)
def _catalog_data() -> dict:
    text = resources.files("ramtel").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return json.loads(text)


def series_catalog() -> dict[str, SeriesCatalogEntry]:
    out = {}
    for s in _catalog_data()["series"]:
        out[s["id"]] = SeriesCatalogEntry(s["id"], parse_term(s["kernel"]),
                                          AlgebraicConstant.parse(s["closed_form"]),
                                          s["provenance"], s["kernel"], s.get("convergent", True))
    return out


def _task_from_dict(d: dict) -> ProofTask:
    spec = d.get("specialize")
    return ProofTask(
        id=d["id"], left=parse_term(d["left"]), right=parse_term(d["right"]),
        specialize=Fraction(spec) if spec is not None else None,
        target=d.get("target"), anchor=d.get("anchor"), title=d.get("title", ""),
        left_source=d["left"], right_source=d["right"],
        initial_count=d.get("initial_count"))


def example_tasks() -> dict[str, ProofTask]:
    """Tasks of the first three examples plus the theta-derived ones."""
    out = {d["id"]: _task_from_dict(d) for d in _catalog_data()["tasks"]}
    for zid in _catalog_data()["z_identities"]:
        for t in derived_tasks(zid["id"]):
            out[t.id] = t
    return out


def z_identity(identity_id: str) -> tuple[HyperTerm, HyperTerm, dict]:
    for d in _catalog_data()["z_identities"]:
        if d["id"] == identity_id:
            return parse_term(d["left"]), parse_term(d["right"]), d
    raise KeyError(identity_id)


def derived_tasks(identity_id: str) -> list[ProofTask]:
    """Apply the catalog's (a + b theta, z0) operators to a z-identity."""
    left, right, d = z_identity(identity_id)
    out = []
    for x in d.get("derived", []):
        a, b, z0 = Fraction(x["a"]), Fraction(x["b"]), Fraction(x["z0"])
        out.append(ProofTask(
            id=x["id"], left=apply_theta(left, a, b, z0), right=apply_theta(right, a, b, z0),
            specialize=Fraction(x["specialize"]), target=x["target"], anchor=x["anchor"],
            title=f"({x['a']} + {x['b']} theta) at z = {x['z0']} on identity {identity_id}"))
    return out


# ---------------------------------------------------------------------------
# exact pieces


def terminating_sum(term: HyperTerm, k: int, rec_var: str = "k", sum_var: str | None = None):
    """Exact sum over the summation variable at rec_var = k.

    Returns a Fraction, or a RatFunc when free parameters such as z remain.
    """
    sum_var = sum_var or term.sum_var
    N = termination_bound(term, sum_var, {rec_var: k})
    if N is None:
        raise DomainError(f"kernel does not terminate at {rec_var}={k}")
    if term.params:
        total = RatFunc(term.ctx.constant(0), normalized=True)
        for n in range(N):
            total = total + eval_term_params(term, {sum_var: n, rec_var: k})
        return total
    return sum((eval_term_exact(term, {sum_var: n, rec_var: k}) for n in range(N)), Fraction(0))


def operators_equal_normalized(ta: Telescoper, tb: Telescoper) -> bool:
    if ta.order != tb.order or ta.rec_var != tb.rec_var:
        return False
    return all(p == q for p, q in zip(ta.coeffs, tb.coeffs))


def apply_operator(t: Telescoper, values: dict[int, object], k: int):
    """sum_i P_i(k) * values[k + i]."""
    total = None
    for i, p in enumerate(t.coeffs):
        c = substitute(p, {t.rec_var: k})
        v = values[k + i]
        if isinstance(v, RatFunc):
            term = v * RatFunc(c, normalized=True)
        else:
            term = to_fraction(c.coeffs()[0]) * v if not c.is_zero() else Fraction(0)
        total = term if total is None else total + term
    return total


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, RatFunc) else x == 0


def check_initial_values(task: ProofTask, count: int) -> list[tuple]:
    out = []
    for k in range(count):
        r = terminating_sum(task.left, k, task.rec_var, task.sum_var)
        s = terminating_sum(task.right, k, task.rec_var, task.sum_var)
        out.append((k, r, s, r == s))
    return out


def leading_roots(t: Telescoper) -> list[int]:
    """Nonnegative integers k0 with P_m(k0) = 0 identically in the parameters."""
    lead = t.coeffs[-1]
    if lead.is_constant():
        return []
    return [r for r in integer_roots(lead, t.rec_var) if r >= 0]


# ---------------------------------------------------------------------------
# numeric pieces


def carlson_numeric_check(task: ProofTask, k_samples=CARLSON_SAMPLES, digits: int = 60):
    """Agreement digits of the continued sums r(k), s(k) at non-integer k."""
    out = []
    for k in k_samples:
        k = Fraction(k)
        a = eval_series(task.left, {task.rec_var: k}, digits)
        b = eval_series(task.right, {task.rec_var: k}, digits)
        out.append((k, agreement_digits(a.value, b.value, cap=digits)))
    return out


def _same_series(plan_a, plan_b) -> bool:
    pa, qa = plan_a.full_ratio()
    pb, qb = plan_b.full_ratio()
    return pa * qb == pb * qa


def _t0_exact(plan) -> AlgebraicConstant:
    return plan.prefactor_exact() * plan.weight_at(0)


def specialization_check(task: ProofTask, digits: int = 60) -> dict:
    """Check the k = k* identity: structure, implied closed form, and numeric agreement."""
    cat = series_catalog()
    anchor, target = cat[task.anchor], cat[task.target]
    k = {task.rec_var: task.specialize}
    out: dict = {"k": _q(task.specialize), "anchor": anchor.id, "target": target.id}
    plan_a = plan_series(task.left, k)
    plan_b = plan_series(task.right, k)
    plan_anchor = plan_series(anchor.kernel)
    plan_target = plan_series(target.kernel)
    out["leftMatchesAnchor"] = _same_series(plan_a, plan_anchor)
    out["rightMatchesTarget"] = _same_series(plan_b, plan_target)
    if not (out["leftMatchesAnchor"] and out["rightMatchesTarget"]):
        out["ok"] = False
        return out
    c_a = _t0_exact(plan_a) / _t0_exact(plan_anchor)
    c_b = _t0_exact(plan_b) / _t0_exact(plan_target)
    implied = c_a * anchor.closed_form / c_b
    out["leftFactor"] = str(c_a)
    out["rightFactor"] = str(c_b)
    out["impliedClosedForm"] = str(implied)
    out["closedFormExact"] = implied == target.closed_form

    right = eval_series(task.right, k, digits)
    try:
        left = eval_series(task.left, k, digits).value
        out["leftEvaluation"] = "series"
    except DivergenceError:
        # the left side only converges conditionally; use the anchor's closed form
        left = (c_a * anchor.closed_form).to_bigfloat(digits + 5)
        out["leftEvaluation"] = "anchor closed form"
    out["digitsMatched"] = agreement_digits(right.value, left, cap=digits)
    out["targetDigits"] = verify_closed_form(target, digits)
    out["ok"] = (out["closedFormExact"] and out["digitsMatched"] >= digits - 5
                 and out["targetDigits"] >= digits - 2)
    return out


# ---------------------------------------------------------------------------
# the pipeline


def prove_pair(task: ProofTask, max_order: int = 6, initial_count: int | None = None,
               k_check_range: tuple[int, int] = (0, 20), digits: int | None = 60,
               carlson_samples=CARLSON_SAMPLES) -> ProofReport:
    """Prove r_k = s_k for all integers k >= 0; optionally validate the specialization."""
    rep = ProofReport(task)

    def fail(step: str, msg: str) -> ProofReport:
        rep.status = f"failed({step})"
        rep.diagnostics.append(msg)
        return rep

    rv = task.rec_var
    for side, term in (("left", task.left), ("right", task.right)):
        for k in range(k_check_range[0], k_check_range[1] + 1):
            try:
                if termination_bound(term, task.sum_var, {rv: k}) is None:
                    return fail("non-terminating", f"{side} kernel does not terminate at {rv}={k}")
            except PoleError as exc:
                return fail("pole", f"{side} kernel at {rv}={k}: {exc}")

    ta = find_telescoper(task.left, task.sum_var, rv, max_order)
    tb = find_telescoper(task.right, task.sum_var, rv, max_order)
    rep.telescoper_a, rep.telescoper_b = ta, tb
    if ta is None or tb is None:
        return fail("no-telescoper", f"no telescoper of order <= {max_order}")

    rep.checks_a = boundary_check(task.left, ta, k_check_range, verify_certificate(task.left, ta))
    rep.checks_b = boundary_check(task.right, tb, k_check_range, verify_certificate(task.right, tb))
    for side, c in (("left", rep.checks_a), ("right", rep.checks_b)):
        if not c.identity_holds:
            return fail("certificate", f"{side} certificate does not verify")
        if not (c.boundary_at_zero and c.tail_vanishes):
            return fail("boundary", f"{side} boundary terms: " + "; ".join(c.details))

    hi = max(PROPAGATION_RANGE, k_check_range[1])
    rep.checked_range = (0, hi)
    order = max(ta.order, tb.order)
    r = {k: terminating_sum(task.left, k, rv, task.sum_var) for k in range(hi + order + 1)}
    s = {k: terminating_sum(task.right, k, rv, task.sum_var) for k in range(hi + order + 1)}
    rep.recurrence_holds = all(_is_zero(apply_operator(ta, r, k)) and
                               _is_zero(apply_operator(tb, s, k)) for k in range(hi + 1))
    if not rep.recurrence_holds:
        return fail("recurrence", "a telescoper does not annihilate its own sum")

    rep.operators_equal = operators_equal_normalized(ta, tb)
    if not rep.operators_equal:
        rep.common_annihilation = all(
            _is_zero(apply_operator(ta, s, k)) and _is_zero(apply_operator(tb, r, k))
            for k in range(hi + 1))
        if not rep.common_annihilation:
            return fail("operators", "telescopers differ and do not annihilate each other's sums")
        rep.diagnostics.append("operators differ; common annihilation verified instead")

    roots = sorted(set(leading_roots(ta)) | set(leading_roots(tb)))
    rep.leading_coeff_roots = roots
    rep.leading_coeff_nonvanishing = not [x for x in roots if x <= hi]
    count = max(order, initial_count or task.initial_count or 0,
                *(x + order + 1 for x in roots))
    rep.initial_values = check_initial_values(task, count)
    if not all(eq for *_, eq in rep.initial_values):
        bad = [k for k, *_, eq in rep.initial_values if not eq]
        return fail("initial-values", f"r_k != s_k at k = {bad}")
    if not all(r[k] == s[k] for k in range(hi + 1)):
        return fail("initial-values", "direct evaluation disagrees inside the checked range")
    rep.status = "proved-for-integers"

    if digits is None or task.specialize is None:
        return rep
    for k in carlson_samples:
        try:
            rep.carlson_samples.extend(carlson_numeric_check(task, [k], digits))
        except DivergenceError:
            rep.diagnostics.append(f"Carlson sample {k}: a side diverges, sample skipped")
        except PoleError:
            rep.diagnostics.append(f"Carlson sample {k}: pole of a kernel, sample skipped")
    rep.specialization = specialization_check(task, digits)
    if rep.specialization.get("ok"):
        rep.status = "fully-validated"
    else:
        rep.diagnostics.append("specialization check did not pass")
    return rep


# ---------------------------------------------------------------------------
# identities in z


@dataclass
class ZIdentityReport:
    k_values: list[int]
    equal: list[bool]
    proof: ProofReport | None = None

    @property
    def ok(self) -> bool:
        return all(self.equal) and (self.proof is None or self.proof.proved)

    def to_json(self) -> dict:
        return {"k_values": self.k_values, "equal": self.equal,
                "proof": None if self.proof is None else self.proof.to_json(), "ok": self.ok}


def verify_z_identity(left: HyperTerm, right: HyperTerm, k_values=range(7),
                      also_telescope: bool = False, max_order: int = 6) -> ZIdentityReport:
    """Exact equality in Q(z) of both sides at each k; optionally the full pipeline."""
    ks = list(k_values)
    for k in ks:
        if int(k) != k or k < 0:
            raise DomainError("z-identities are expanded at nonnegative integers only")
    eq = [terminating_sum(left, k) == terminating_sum(right, k) for k in ks]
    rep = ZIdentityReport(ks, eq)
    if also_telescope:
        task = ProofTask("z", left, right)
        rep.proof = prove_pair(task, max_order=max_order, k_check_range=(0, max(ks)),
                               digits=None)
    return rep


TASK_KEYS = {"id", "title", "vars", "left", "right", "initial", "specialize", "anchor", "target"}


def parse_task_text(text: str, name: str = "task") -> ProofTask:
    """Read a ``key: value`` task file; indented lines continue the previous value."""
    fields: dict[str, str] = {}
    key = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace():
            if key is None:
                raise DomainError(f"{name}:{lineno}: continuation line before any key")
            fields[key] += "\n" + line.strip()
            continue
        if ":" not in line:
            raise DomainError(f"{name}:{lineno}: expected 'key: value'")
        key, value = (s.strip() for s in line.split(":", 1))
        if key not in TASK_KEYS:
            raise DomainError(f"{name}:{lineno}: unknown key {key!r}")
        fields[key] = value
    for req in ("left", "right"):
        if req not in fields:
            raise DomainError(f"{name}: missing {req!r}")
    header = f"vars: {fields['vars']}\n" if "vars" in fields else ""
    spec = fields.get("specialize")
    if spec is not None and not ("anchor" in fields and "target" in fields):
        raise DomainError(f"{name}: 'specialize' needs 'anchor' and 'target'")
    initial = fields.get("initial")
    return ProofTask(
        id=fields.get("id", name), title=fields.get("title", ""),
        left=parse_term(header + fields["left"]), right=parse_term(header + fields["right"]),
        initial_count=int(initial) if initial else None,
        specialize=Fraction(spec) if spec else None,
        anchor=fields.get("anchor"), target=fields.get("target"),
        left_source=header + fields["left"], right_source=header + fields["right"])

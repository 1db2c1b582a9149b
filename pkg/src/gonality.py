"""
Gonality Engine Module

This module infers lower and upper bounds for the gonality of quotient
curves over Q and over C. Bounds live in a GonalityState per curve and are
tightened by a fixed set of sound rules until nothing moves. Every change
is recorded as a ProofStep whose inputs are a snapshot of the values the
rule read, so each step can be replayed by re-running the rule's pure
derivation on those inputs.

Every quotient curve has a rational cusp; rules that need a rational point
always apply.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from tqdm import tqdm

from .atkin_lehner import ALSubgroup, canonical_label, index2_supergroups, parse_label, rewrite_4m, rewrite_9
from .exceptions import CertificateError, DecompositionError, GonalityInconsistency, SchreyerMismatch
from .jacobian import decompose, excluded_degree, point_count
from .modform_data import Certificate, Dataset, KnownLists, LiteratureEntry, QuotientRecord

logger = logging.getLogger(__name__)

BOUNDS = ("lower_q", "upper_q", "lower_c", "upper_c")

DEFAULT_TOWER_GENUS = 10
DEFAULT_COUNT_PRIMES = (2, 3, 5, 7)
DEFAULT_COUNT_MAX_EXPONENT = 2

Derivation = List[Tuple[str, int, str]]


@dataclass(frozen=True)
class ProofStep:
    """One bound change: which rule, on what inputs, moved which bound to what."""

    rule: str
    curve: str
    bound: str
    value: int
    inputs: Dict[str, Any]
    conclusion: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rule": self.rule,
            "bound": self.bound,
            "value": self.value,
            "inputs": self.inputs,
            "conclusion": self.conclusion,
        }


@dataclass
class GonalityState:
    """Bounds lower <= gon <= upper over Q and C; upper None is unbounded."""

    curve: str
    genus: Optional[int] = None
    lower_q: int = 1
    upper_q: Optional[int] = None
    lower_c: int = 1
    upper_c: Optional[int] = None
    min_genus: Optional[int] = None
    trace: List[ProofStep] = field(default_factory=list)
    origin: Dict[str, ProofStep] = field(default_factory=dict, repr=False)

    @property
    def bounds(self) -> Tuple[int, Optional[int], int, Optional[int]]:
        return (self.lower_q, self.upper_q, self.lower_c, self.upper_c)

    @property
    def genus_floor(self) -> Optional[int]:
        """The genus when known, else the best known lower bound on it."""
        return self.genus if self.genus is not None else self.min_genus

    def tighten(self, step: ProofStep) -> bool:
        """Apply a step if it improves its bound; raise on crossing bounds."""
        current = getattr(self, step.bound)
        if step.bound.startswith("lower"):
            if step.value <= current:
                return False
        elif current is not None and step.value >= current:
            return False
        setattr(self, step.bound, step.value)
        self.trace.append(step)
        self.origin[step.bound] = step
        for lower, upper in (("lower_q", "upper_q"), ("lower_c", "upper_c")):
            hi = getattr(self, upper)
            if hi is not None and getattr(self, lower) > hi:
                raise GonalityInconsistency(self.curve, self.origin.get(lower), self.origin.get(upper))
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "curve": self.curve,
            "genus": self.genus,
            "min_genus": self.min_genus,
            "bounds": list(self.bounds),
            "steps": [s.to_dict() for s in self.trace],
        }


@dataclass(frozen=True)
class CurveNode:
    """A curve the engine reasons about: a record, a literature curve, an isomorphic copy or a bare candidate."""

    group: ALSubgroup
    genus: Optional[int] = None
    min_genus: Optional[int] = None
    hyperelliptic: Optional[bool] = None
    trigonal_c: Optional[bool] = None
    literature: Optional[LiteratureEntry] = None
    source: str = ""
    derived_from: Optional[str] = None

    @property
    def label(self) -> str:
        return canonical_label(self.group)

    @property
    def level(self) -> int:
        return self.group.level


# Pure derivations. Each takes the inputs snapshot and returns
# (bound, value, conclusion) triples.

def derive_genus_bounds(inputs: Dict[str, Any]) -> Derivation:
    g = inputs["genus"]
    if g == 0:
        return [("upper_q", 1, "genus 0 with a rational point => gon_Q = 1"),
                ("upper_c", 1, "genus 0 => gon_C = 1")]
    out = [("lower_c", 2, f"genus {g} >= 1 => gon_C >= 2")]
    if g <= 2:
        out += [("upper_q", 2, f"genus {g} with a rational point => gon_Q <= 2"),
                ("upper_c", 2, f"genus {g} => gon_C <= 2")]
    elif g == 3:
        out += [("upper_q", 3, "genus 3: projection from the rational cusp => gon_Q <= 3"),
                ("upper_c", 3, "genus 3 => gon_C <= 3")]
    else:
        out += [("upper_q", g, f"genus {g} with a rational point => gon_Q <= {g}"),
                ("upper_c", (g + 3) // 2, f"genus {g} => gon_C <= floor((g+3)/2) = {(g + 3) // 2}")]
    return out


def derive_known_flags(inputs: Dict[str, Any]) -> Derivation:
    h, t, g = inputs["hyperelliptic"], inputs["trigonal_c"], inputs["genus"]
    if h and t:
        raise GonalityInconsistency(inputs["curve"], message=f"{inputs['curve']} is listed as both "
                                                             f"hyperelliptic and trigonal")
    out: Derivation = []
    if h:
        out += [("upper_q", 2, "hyperelliptic with a rational degree-2 map => gon_Q <= 2"),
                ("upper_c", 2, "hyperelliptic => gon_C <= 2")]
    if t:
        out.append(("upper_c", 3, "trigonal over C => gon_C <= 3"))
    if h is False and (g is None or g >= 3):
        out.append(("lower_c", 3, "not hyperelliptic => gon_C >= 3"))
        if t is False:
            out.append(("lower_c", 4, "neither hyperelliptic nor trigonal => gon_C >= 4"))
    return out


def derive_field_coherence(inputs: Dict[str, Any]) -> Derivation:
    out = [("lower_q", inputs["lower_c"], f"gon_Q >= gon_C >= {inputs['lower_c']}")]
    if inputs["upper_q"] is not None:
        out.append(("upper_c", inputs["upper_q"], f"gon_C <= gon_Q <= {inputs['upper_q']}"))
    return out


def derive_literature(inputs: Dict[str, Any]) -> Derivation:
    out: Derivation = []
    source = inputs["source"]
    for fld, key in (("q", "gon_Q"), ("c", "gon_C")):
        lo, hi = inputs[key]
        out.append((f"lower_{fld}", lo, f"{key} >= {lo} ({source})"))
        if hi is not None:
            out.append((f"upper_{fld}", hi, f"{key} <= {hi} ({source})"))
    return out


def derive_quotient_map(inputs: Dict[str, Any]) -> Derivation:
    target, d = inputs["target"], inputs["degree"]
    lq, uq, lc, uc = inputs["target_bounds"]
    out = [("lower_q", lq, f"maps onto {target} => gon_Q >= gon_Q({target}) >= {lq}"),
           ("lower_c", lc, f"maps onto {target} => gon_C >= gon_C({target}) >= {lc}")]
    if uq is not None:
        out.append(("upper_q", d * uq, f"degree-{d} map to {target} => gon_Q <= {d}*{uq} = {d * uq}"))
    if uc is not None:
        out.append(("upper_c", d * uc, f"degree-{d} map to {target} => gon_C <= {d}*{uc} = {d * uc}"))
    return out


def derive_point_count(inputs: Dict[str, Any]) -> Derivation:
    q, count = inputs["q"], inputs["count"]
    d = excluded_degree(count, q)
    if d < 1:
        return []
    return [("lower_q", d + 1,
             f"point count at q={q}: {count} > {d}*{q + 1} = {d * (q + 1)} => gon_Q >= {d + 1}")]


def _genus_text(inputs: Dict[str, Any]) -> str:
    # exact False: "genus" is only a lower bound
    return f"genus {inputs['genus']}" if inputs.get("exact", True) else f"genus >= {inputs['genus']}"


def derive_tower(inputs: Dict[str, Any]) -> Derivation:
    g = inputs["genus"]
    if g < inputs["threshold"]:
        return []
    gt = _genus_text(inputs)
    out: Derivation = []
    if inputs["lower_q"] >= 5 and inputs["lower_c"] >= 4:
        out.append(("lower_c", 5, f"{gt} >= {inputs['threshold']}: a C-tetragonal curve with a rational "
                                  f"point is Q-tetragonal; gon_Q >= 5 => gon_C >= 5"))
    uc = inputs["upper_c"]
    if uc is not None and uc <= 4 and inputs["lower_c"] >= 4:
        out.append(("upper_q", 4, f"{gt} >= {inputs['threshold']} and gon_C = 4 => gon_Q = 4"))
    return out


def derive_castelnuovo_severi(inputs: Dict[str, Any]) -> Derivation:
    n, gx, gy = inputs["n"], inputs["genus"], inputs["target_genus"]
    target, lcy = inputs["target"], inputs["target_lower_c"]
    bound = 2 * gy + n - 1
    if gx <= bound:
        return []
    if n % 2 == 1:
        reason = f"a degree-{n} map cannot factor through the double cover of {target}"
    elif lcy > n // 2:
        reason = f"factoring through {target} needs gon_C({target}) <= {n // 2}, but it is >= {lcy}"
    else:
        return []
    return [("lower_c", n + 1,
             f"Castelnuovo-Severi: g = {gx} > 2*{gy} + {n - 1} = {bound}, so a degree-{n} map would factor "
             f"through {target}; {reason} => gon_C >= {n + 1}")]


def schreyer_columns(genus: int) -> Dict[str, int]:
    """Admissible beta_22 values of a genus >= 7 canonical curve."""
    return {
        "no g14": 0,
        "unique g14": genus - 4,
        "g26 or g38": comb(genus - 2, 2) - 1,
        "trigonal": (genus - 4) * (genus - 2),
    }


def derive_betti_schreyer(inputs: Dict[str, Any]) -> Derivation:
    g, value, lc = inputs["genus"], inputs["value"], inputs["lower_c"]
    if g >= 7:
        columns = schreyer_columns(g)
        if value not in columns.values():
            raise SchreyerMismatch(inputs["curve"], g, value, columns)
    out: Derivation = []
    if value == 0 and g >= 5 and lc >= 4:
        out.append(("lower_c", 5, f"beta_22 = 0 at genus {g}: no g14 (Green-Lazarsfeld) and gon_C >= 4 "
                                  f"=> gon_C >= 5"))
    if g >= 7 and value == g - 4:
        out.append(("upper_q", 4, f"beta_22 = g-4 = {value}: unique g14, rational via the rational cusp "
                                  f"=> gon_Q <= 4"))
    if g >= 7 and value == (g - 4) * (g - 2):
        out.append(("upper_c", 3, f"beta_22 = (g-4)(g-2) = {value}: trigonal => gon_C <= 3"))
    return out


def derive_fp_search(inputs: Dict[str, Any]) -> Derivation:
    p, b = inputs["p"], inputs["bound"]
    return [("lower_q", b, f"no map of degree <= {b - 1} over F_{p} => gon_Q >= {b}")]


def derive_rational_g14(inputs: Dict[str, Any]) -> Derivation:
    return [("upper_q", 4, "rational divisor with a 2-dimensional Riemann-Roch space of degree 4 => gon_Q <= 4")]


def derive_gonal_map(inputs: Dict[str, Any]) -> Derivation:
    d, fld = inputs["degree"], inputs["field"]
    if fld == "Q":
        return [("upper_q", d, f"degree-{d} map defined over Q => gon_Q <= {d}")]
    return [("upper_c", d, f"degree-{d} map defined over {fld} => gon_C <= {d}")]


def derive_trigonal_map_field(inputs: Dict[str, Any]) -> Derivation:
    fld, g, lc = inputs["field"], inputs["genus"], inputs["lower_c"]
    if fld == "Q":
        return [("upper_q", 3, "trigonal map defined over Q => gon_Q <= 3")]
    if g == 4 and lc >= 3:
        return [("upper_c", 3, "genus 4 trigonal maps exist over a quadratic field => gon_C <= 3"),
                ("lower_q", 4, "genus 4, not hyperelliptic, trigonal maps only over a quadratic field "
                               "=> gon_Q >= 4")]
    return []


def derive_pencil_rationality(inputs: Dict[str, Any]) -> Derivation:
    g, lq, lc, uc = inputs["genus"], inputs["lower_q"], inputs["lower_c"], inputs["upper_c"]
    gt = _genus_text(inputs)
    out: Derivation = []
    if g >= 2 and uc is not None and uc <= 2:
        out.append(("upper_q", 2, f"{gt} hyperelliptic: the g12 is unique, rational via the rational cusp "
                                  f"=> gon_Q <= 2"))
    if g >= 5 and lc >= 3 and uc is not None and uc <= 3:
        out.append(("upper_q", 3, f"{gt} >= 5 trigonal: the g13 is unique, rational via the rational cusp "
                                  f"=> gon_Q <= 3"))
    if g >= 2 and lq >= 3:
        out.append(("lower_c", 3, f"{gt}: gon_C = 2 would force gon_Q = 2, but gon_Q >= {lq} => gon_C >= 3"))
    if g >= 5 and lq >= 4 and lc >= 3:
        out.append(("lower_c", 4, f"{gt} >= 5: gon_C = 3 would force gon_Q = 3, but gon_Q >= {lq} "
                                  f"=> gon_C >= 4"))
    return out


def derive_isomorphism_4m(inputs: Dict[str, Any]) -> Derivation:
    partner = inputs["partner"]
    lq, uq, lc, uc = inputs["partner_bounds"]
    out = [("lower_q", lq, f"isomorphic over Q to {partner} => gon_Q >= {lq}"),
           ("lower_c", lc, f"isomorphic to {partner} => gon_C >= {lc}")]
    if uq is not None:
        out.append(("upper_q", uq, f"isomorphic over Q to {partner} => gon_Q <= {uq}"))
    if uc is not None:
        out.append(("upper_c", uc, f"isomorphic to {partner} => gon_C <= {uc}"))
    return out


def derive_isomorphism_9(inputs: Dict[str, Any]) -> Derivation:
    partner = inputs["partner"]
    lc, uc = inputs["partner_bounds"][2], inputs["partner_bounds"][3]
    out = [("lower_c", lc, f"isomorphic over Q(sqrt(-3)) to {partner} => gon_C >= {lc}")]
    if uc is not None:
        out.append(("upper_c", uc, f"isomorphic over Q(sqrt(-3)) to {partner} => gon_C <= {uc}"))
    return out


@dataclass(frozen=True)
class Rule:
    """A named inference rule: gather input snapshots, then derive bound updates."""

    name: str
    title: str
    derive: Callable[[Dict[str, Any]], Derivation]
    gather: Callable[["GonalityEngine", str], Iterable[Dict[str, Any]]]


# Input builders shared by the engine and the single-rule entry points.

def genus_inputs(state: GonalityState) -> Optional[Dict[str, Any]]:
    return None if state.genus is None else {"genus": state.genus}


def flag_inputs(label: str, genus: Optional[int], hyperelliptic: Optional[bool],
                trigonal_c: Optional[bool]) -> Optional[Dict[str, Any]]:
    if hyperelliptic is None and trigonal_c is None:
        return None
    return {"curve": label, "genus": genus, "hyperelliptic": hyperelliptic, "trigonal_c": trigonal_c}


def coherence_inputs(state: GonalityState) -> Dict[str, Any]:
    return {"lower_c": state.lower_c, "upper_q": state.upper_q}


def quotient_inputs(up: GonalityState, degree: int) -> Dict[str, Any]:
    return {"target": up.curve, "degree": degree, "target_bounds": list(up.bounds)}


def tower_inputs(state: GonalityState, genus: int, threshold: int, exact: bool = True) -> Dict[str, Any]:
    return {"genus": genus, "exact": exact, "threshold": threshold, "lower_q": state.lower_q,
            "lower_c": state.lower_c, "upper_c": state.upper_c}


def cs_inputs(x: GonalityState, y: GonalityState, g_x: int, g_y: int, n: int) -> Dict[str, Any]:
    return {"n": n, "genus": g_x, "target": y.curve, "target_genus": g_y, "target_lower_c": y.lower_c}


def pencil_inputs(state: GonalityState, genus: int, exact: bool = True) -> Dict[str, Any]:
    return {"genus": genus, "exact": exact, "lower_q": state.lower_q, "lower_c": state.lower_c,
            "upper_c": state.upper_c}


CERTIFICATE_RULES = {
    "betti22": "betti_schreyer",
    "fp_gonality_lower": "fp_search",
    "fq_point_count": "point_count",
    "rational_g14_divisor": "rational_g14",
    "gonal_map": "gonal_map",
    "trigonal_map_field": "trigonal_map_field",
}


def certificate_inputs(cert: Certificate, state: GonalityState,
                       genus: Optional[int]) -> Optional[Dict[str, Any]]:
    """Inputs of the rule a certificate feeds; None when the rule needs a genus it lacks."""
    base = {"source": cert.source}
    if cert.kind == "betti22":
        if genus is None:
            return None
        return {**base, "curve": cert.target, "genus": genus, "value": cert.get("value"),
                "lower_c": state.lower_c}
    if cert.kind == "fp_gonality_lower":
        return {**base, "p": cert.get("p"), "bound": cert.get("bound")}
    if cert.kind == "fq_point_count":
        return {**base, "q": cert.get("q"), "count": cert.get("count"), "origin": "certificate"}
    if cert.kind == "rational_g14_divisor":
        return base
    if cert.kind == "gonal_map":
        return {**base, "degree": cert.get("degree"), "field": cert.get("field")}
    if cert.kind == "trigonal_map_field":
        return {**base, "field": cert.get("field"), "genus": genus, "lower_c": state.lower_c}
    raise CertificateError(f"unknown certificate kind {cert.kind!r}")


# Gatherers: read the engine's current states and yield input snapshots.

def _gather_genus(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    inputs = genus_inputs(engine.states[label])
    if inputs is not None:
        yield inputs


def _gather_flags(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    node = engine.nodes[label]
    inputs = flag_inputs(label, node.genus, node.hyperelliptic, node.trigonal_c)
    if inputs is not None:
        yield inputs


def _gather_coherence(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    yield coherence_inputs(engine.states[label])


def _gather_literature(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    entry = engine.nodes[label].literature
    if entry is not None:
        yield {"source": entry.source, "gon_Q": [entry.gon_q.lo, entry.gon_q.hi],
               "gon_C": [entry.gon_c.lo, entry.gon_c.hi]}


def _gather_quotient(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    for up, degree in engine.quotient_targets.get(label, ()):
        yield quotient_inputs(engine.states[up], degree)


def _gather_point_count(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    for q, count, origin in engine.computed_counts.get(label, ()):
        yield {"q": q, "count": count, "origin": origin}
    for cert in engine.certificates.get(label, ()):
        if cert.kind == "fq_point_count":
            yield certificate_inputs(cert, engine.states[label], None)


def _gather_tower(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    state = engine.states[label]
    g = state.genus_floor
    if g is not None and g >= engine.tower_genus:
        yield tower_inputs(state, g, engine.tower_genus, exact=state.genus is not None)


def _gather_cs(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    x = engine.states[label]
    if x.genus is None or x.lower_c not in (3, 4):
        return
    for up in engine.double_covers.get(label, ()):
        y = engine.states[up]
        if y.genus is not None:
            yield cs_inputs(x, y, x.genus, y.genus, x.lower_c)


def _certificate_gatherer(kind: str) -> Callable[["GonalityEngine", str], Iterator[Dict[str, Any]]]:
    def gather(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
        state = engine.states[label]
        for cert in engine.certificates.get(label, ()):
            if cert.kind == kind:
                inputs = certificate_inputs(cert, state, state.genus)
                if inputs is not None:
                    yield inputs
    return gather


def _gather_pencil(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
    state = engine.states[label]
    if state.genus_floor is not None:
        yield pencil_inputs(state, state.genus_floor, exact=state.genus is not None)


def _partner_gatherer(edges: str) -> Callable[["GonalityEngine", str], Iterator[Dict[str, Any]]]:
    def gather(engine: "GonalityEngine", label: str) -> Iterator[Dict[str, Any]]:
        for partner in getattr(engine, edges).get(label, ()):
            yield {"partner": partner, "partner_bounds": list(engine.states[partner].bounds)}
    return gather


RULES: Dict[str, Rule] = {rule.name: rule for rule in (
    Rule("genus_bounds", "genus bounds", derive_genus_bounds, _gather_genus),
    Rule("known_flags", "hyperelliptic/trigonal lists", derive_known_flags, _gather_flags),
    Rule("field_coherence", "gon_C <= gon_Q", derive_field_coherence, _gather_coherence),
    Rule("literature", "published gonality", derive_literature, _gather_literature),
    Rule("quotient_map", "quotient map", derive_quotient_map, _gather_quotient),
    Rule("point_count", "point count bound", derive_point_count, _gather_point_count),
    Rule("tower", "tower theorem for genus >= 10", derive_tower, _gather_tower),
    Rule("castelnuovo_severi", "Castelnuovo-Severi", derive_castelnuovo_severi, _gather_cs),
    Rule("betti_schreyer", "Betti number (Schreyer)", derive_betti_schreyer, _certificate_gatherer("betti22")),
    Rule("fp_search", "F_p map search", derive_fp_search, _certificate_gatherer("fp_gonality_lower")),
    Rule("rational_g14", "rational g14 divisor", derive_rational_g14,
         _certificate_gatherer("rational_g14_divisor")),
    Rule("gonal_map", "explicit gonal map", derive_gonal_map, _certificate_gatherer("gonal_map")),
    Rule("trigonal_map_field", "field of the trigonal maps", derive_trigonal_map_field,
         _certificate_gatherer("trigonal_map_field")),
    Rule("pencil_rationality", "unique pencil is rational", derive_pencil_rationality, _gather_pencil),
    Rule("isomorphism_4m", "isomorphism X0(4M)/W = X0(2M)/W'", derive_isomorphism_4m,
         _partner_gatherer("iso_4m")),
    Rule("isomorphism_9", "isomorphism twisting by w_9", derive_isomorphism_9, _partner_gatherer("iso_9")),
)}

DEFAULT_RULE_ORDER: Tuple[str, ...] = tuple(RULES)


def replay(step: ProofStep) -> bool:
    """True iff re-deriving the step's rule on its inputs yields the recorded conclusion."""
    rule = RULES.get(step.rule)
    if rule is None:
        return False
    return (step.bound, step.value, step.conclusion) in rule.derive(step.inputs)


def _apply(state: GonalityState, rule: str, inputs: Optional[Dict[str, Any]]) -> List[ProofStep]:
    if inputs is None:
        return []
    steps = []
    for bound, value, conclusion in RULES[rule].derive(inputs):
        step = ProofStep(rule, state.curve, bound, value, dict(inputs), conclusion)
        if state.tighten(step):
            steps.append(step)
    return steps


def init_state(curve: QuotientRecord, lists: KnownLists) -> GonalityState:
    """
    Initial bounds of a quotient record from its genus and the known lists.

    Raises:
        GonalityInconsistency: for contradictory flags
    """
    hyperelliptic, trigonal = lists.flags_for(curve.label, curve.hyperelliptic, curve.trigonal_c)
    state = GonalityState(curve.label, curve.genus)
    changed = True
    while changed:
        steps = _apply(state, "genus_bounds", genus_inputs(state))
        steps += _apply(state, "known_flags", flag_inputs(curve.label, curve.genus, hyperelliptic, trigonal))
        steps += _apply(state, "field_coherence", coherence_inputs(state))
        steps += _apply(state, "pencil_rationality", pencil_inputs(state, curve.genus))
        changed = bool(steps)
    return state


def rule_quotient(down: GonalityState, up: GonalityState, degree: int) -> List[ProofStep]:
    """Bounds of X from a degree-d map X -> Y."""
    return _apply(down, "quotient_map", quotient_inputs(up, degree))


def rule_count(state: GonalityState, q: int, count: int, origin: str = "certificate") -> List[ProofStep]:
    """Lower bound from a point count over F_q."""
    return _apply(state, "point_count", {"q": q, "count": count, "origin": origin})


def rule_tower(state: GonalityState, genus: int, threshold: int = DEFAULT_TOWER_GENUS,
               exact: bool = True) -> List[ProofStep]:
    """Tower bounds; exact False reads genus as a lower bound."""
    return _apply(state, "tower", tower_inputs(state, genus, threshold, exact))


def rule_cs(x: GonalityState, y: GonalityState, g_x: int, g_y: int, n: int) -> List[ProofStep]:
    """Castelnuovo-Severi exclusion of degree-n maps through a double cover X -> Y."""
    if n not in (3, 4) or x.lower_c < n:
        return []
    return _apply(x, "castelnuovo_severi", cs_inputs(x, y, g_x, g_y, n))


def rule_certificate(state: GonalityState, cert: Certificate, genus: Optional[int]) -> List[ProofStep]:
    """Apply one certificate to the state of its target curve."""
    if cert.target != state.curve:
        raise CertificateError(f"certificate for {cert.target} applied to {state.curve}")
    return _apply(state, CERTIFICATE_RULES[cert.kind], certificate_inputs(cert, state, genus))


class GonalityEngine:
    """Saturates gonality bounds over all curves of a dataset."""

    def __init__(self, dataset: Dataset, config: Optional[Dict[str, Any]] = None,
                 rule_order: Optional[Sequence[str]] = None):
        """
        Initialize the GonalityEngine.

        Args:
            dataset: Loaded dataset
            config: The "engine" configuration section
            rule_order: Rule names in application order (defaults to DEFAULT_RULE_ORDER)
        """
        config = config or {}
        self.dataset = dataset
        self.tower_genus = config.get("tower_genus", DEFAULT_TOWER_GENUS)
        self.count_primes = tuple(config.get("count_primes", DEFAULT_COUNT_PRIMES))
        self.count_max_exponent = config.get("count_max_exponent", DEFAULT_COUNT_MAX_EXPONENT)
        self.show_progress = config.get("progress", False)
        self.workers = max(1, int(config.get("workers", 1)))
        self.rule_order = tuple(rule_order or DEFAULT_RULE_ORDER)
        unknown = [name for name in self.rule_order if name not in RULES]
        if unknown:
            raise ValueError(f"unknown rules {unknown}")

        self.nodes: Dict[str, CurveNode] = {}
        self.states: Dict[str, GonalityState] = {}
        self.certificates: Dict[str, List[Certificate]] = {}
        self.computed_counts: Dict[str, List[Tuple[int, int, str]]] = {}
        self.quotient_targets: Dict[str, List[Tuple[str, int]]] = {}
        self.double_covers: Dict[str, List[str]] = {}
        self.iso_4m: Dict[str, List[str]] = {}
        self.iso_9: Dict[str, List[str]] = {}
        self._build_nodes()
        for cert in dataset.certificates:
            self.certificates.setdefault(cert.target, []).append(cert)

    def _build_nodes(self) -> None:
        known = self.dataset.known
        literature = known.literature()
        for record in self.dataset.records:
            hyp, trig = self.dataset.flags(record)
            entry = literature.get(record.label)
            floor = entry.min_genus if entry else None
            self.nodes[record.label] = CurveNode(record.group, record.genus, floor, hyp, trig, entry, record.source)
        for label, entry in literature.items():
            if label in self.nodes:
                continue
            hyp, trig = known.flags_for(label)
            self.nodes[label] = CurveNode(parse_label(label), entry.genus, entry.min_genus, hyp, trig, entry,
                                          entry.source)

    def genus_floor(self, label: str) -> Optional[int]:
        """Largest genus lower bound stated by the node's literature entry or its certificates."""
        floors = [cert.get("min_genus") for cert in self.certificates.get(label, ())]
        floors.append(self.nodes[label].min_genus)
        floors = [f for f in floors if f is not None]
        return max(floors) if floors else None

    def add_derived_nodes(self, groups: Iterable[ALSubgroup]) -> List[str]:
        """
        Add curves known only through an isomorphism with an existing node.

        Returns:
            Labels of the added nodes
        """
        added = []
        for w in sorted(groups, key=ALSubgroup.sort_key):
            label = canonical_label(w)
            if label in self.nodes:
                continue
            partner, how = None, ""
            rewritten = rewrite_4m(w.level, w)
            if rewritten is not None and canonical_label(rewritten[1]) in self.nodes:
                partner, how = canonical_label(rewritten[1]), "X0(4M) rewrite"
            else:
                twisted = rewrite_9(w.level, w)
                if twisted is not None and canonical_label(twisted) in self.nodes:
                    partner, how = canonical_label(twisted), "w_9 twist"
            if partner is None:
                continue
            base = self.nodes[partner]
            self.nodes[label] = CurveNode(w, base.genus, base.min_genus, source=f"isomorphic to {partner} ({how})",
                                          derived_from=partner)
            added.append(label)
        if added:
            logger.info("Added %d isomorphism-derived curves", len(added))
        return added

    def add_candidate_nodes(self, groups: Iterable[ALSubgroup]) -> List[str]:
        """
        Make every group a node: isomorphic copies first, then bare curves
        known only through the quotient maps at their level.

        Returns:
            Labels of the bare nodes
        """
        groups = list(groups)
        self.add_derived_nodes(groups)
        known = self.dataset.known
        bare = []
        for w in sorted(groups, key=ALSubgroup.sort_key):
            label = canonical_label(w)
            if label in self.nodes:
                continue
            hyp, trig = known.flags_for(label)
            self.nodes[label] = CurveNode(w, None, None, hyp, trig, source="no record")
            bare.append(label)
        if bare:
            logger.info("Added %d candidate curves without a record", len(bare))
        return bare

    def _build_graph(self) -> None:
        by_level: Dict[int, List[CurveNode]] = {}
        for node in self.nodes.values():
            by_level.setdefault(node.level, []).append(node)

        self.quotient_targets, self.double_covers = {}, {}
        for nodes in by_level.values():
            for x in nodes:
                for y in nodes:
                    if x.group.elements < y.group.elements:
                        degree = y.group.order // x.group.order
                        self.quotient_targets.setdefault(x.label, []).append((y.label, degree))
        for targets in self.quotient_targets.values():
            targets.sort(key=lambda t: parse_label(t[0]).sort_key())
        for node in self.nodes.values():
            if node.group.is_full:
                continue
            covers = [canonical_label(sup) for sup in index2_supergroups(node.group)]
            covers = [label for label in covers if label in self.nodes]
            if covers:
                self.double_covers[node.label] = covers

        self.iso_4m, self.iso_9 = {}, {}
        for node in self.nodes.values():
            rewritten = rewrite_4m(node.level, node.group)
            if rewritten is not None:
                self._link(self.iso_4m, node.label, canonical_label(rewritten[1]))
            twisted = rewrite_9(node.level, node.group)
            if twisted is not None:
                self._link(self.iso_9, node.label, canonical_label(twisted))

    def _link(self, edges: Dict[str, List[str]], a: str, b: str) -> None:
        if a == b or b not in self.nodes:
            return
        for x, y in ((a, b), (b, a)):
            partners = edges.setdefault(x, [])
            if y not in partners:
                partners.append(y)
                partners.sort(key=lambda t: parse_label(t).sort_key())

    def _compute_counts(self) -> None:
        self.computed_counts = {}
        for record in self.dataset.records:
            if record.decomposition_override is None and not self.dataset.has_complete_data(record.level):
                continue
            try:
                decomposition = decompose(record, self.dataset)
            except DecompositionError as exc:
                logger.debug("No decomposition for %s: %s", record.label, exc)
                continue
            if not decomposition.reliable:
                continue
            for p in self.count_primes:
                if record.level % p == 0:
                    continue
                for k in range(1, self.count_max_exponent + 1):
                    try:
                        count = point_count(record, p, k, self.dataset, decomposition)
                    except DecompositionError as exc:
                        logger.debug("No count for %s over F_%d^%d: %s", record.label, p, k, exc)
                        break
                    self.computed_counts.setdefault(record.label, []).append((p ** k, count, "computed"))

    def ordered_labels(self) -> List[str]:
        return sorted(self.nodes, key=lambda label: self.nodes[label].group.sort_key())

    def level_groups(self) -> List[List[str]]:
        """
        Node labels split into groups no rule crosses.

        Quotient maps, double covers and w_9 twists stay within one level;
        X0(4M) rewrites join level 4M with 2M. Groups come in canonical
        order of their first label, labels in canonical order within a group.
        """
        parent: Dict[int, int] = {}

        def find(n: int) -> int:
            parent.setdefault(n, n)
            while parent[n] != n:
                parent[n] = parent[parent[n]]
                n = parent[n]
            return n

        for label, partners in self.iso_4m.items():
            for partner in partners:
                a, b = find(self.nodes[label].level), find(self.nodes[partner].level)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: Dict[int, List[str]] = {}
        for label in self.ordered_labels():
            groups.setdefault(find(self.nodes[label].level), []).append(label)
        return sorted(groups.values(), key=lambda labels: self.nodes[labels[0]].group.sort_key())

    def _saturate_group(self, labels: Sequence[str]) -> int:
        passes = 0
        changed = True
        while changed:
            changed = False
            passes += 1
            for label in labels:
                state = self.states[label]
                for name in self.rule_order:
                    rule = RULES[name]
                    for inputs in rule.gather(self, label):
                        for bound, value, conclusion in rule.derive(inputs):
                            step = ProofStep(name, label, bound, value, dict(inputs), conclusion)
                            if state.tighten(step):
                                changed = True
        return passes

    def saturate(self) -> Dict[str, GonalityState]:
        """
        Apply every rule to every curve until no bound changes.

        Level groups are independent and run on a thread pool of
        `workers` threads; each group is saturated single-threaded, so the
        result does not depend on the pool size.

        Returns:
            Map from curve label to its final GonalityState

        Raises:
            GonalityInconsistency: when a lower bound crosses an upper bound
            SchreyerMismatch: for a Betti certificate outside the Schreyer table
        """
        self._build_graph()
        self._compute_counts()
        labels = self.ordered_labels()
        self.states = {label: GonalityState(label, self.nodes[label].genus, min_genus=self.genus_floor(label))
                       for label in labels}

        groups = self.level_groups()
        progress = dict(total=len(groups), desc="Saturation", disable=not self.show_progress)
        if self.workers > 1 and len(groups) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                passes = list(tqdm(executor.map(self._saturate_group, groups), **progress))
        else:
            passes = list(tqdm(map(self._saturate_group, groups), **progress))
        logger.info("Saturated %d curves in %d level groups (at most %d passes)",
                    len(labels), len(groups), max(passes, default=0))
        return {label: self.states[label] for label in labels}

    def verify_traces(self) -> List[ProofStep]:
        """Steps that fail to replay; empty for a sound run."""
        return [step for state in self.states.values() for step in state.trace if not replay(step)]

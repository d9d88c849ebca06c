"""Batch front end: scenario files, verification suites, JSON reports.

Scenario files are JSON documents::

    {
      "format_version": 1,
      "p": 5, "n": 2, "r": 1, "M": 1,
      "module": {
        "rank": 2,
        "grading": [1, 1],            # level multiplicities, or null
        "theta": "random"             # or one sparse list per coordinate:
                                      # [[[e_1..e_n], row, col, value], ...]
      },
      "liftings": 2,                  # extra random charts, or explicit:
                                      # per chart, per coordinate,
                                      # [[[e_1..e_n], value], ...]
      "filtration": {"kind": "from-grading"},   # | "trivial"
                                      # | {"kind": "explicit", "steps": [...]}
      "seed": 1,
      "suites": ["cohomology", "cartier"]
    }

The standard Frobenius lifting is always chart 0; listed/random liftings are
the extra virtual charts.  Explicit filtration steps are lists of spanning
row vectors in the flat module's hat-monomial coordinates.

Reports are printed as aligned text tables and optionally written as JSON
(--json); the JSON document is the stable interface and is byte-identical
for identical (scenario, seed, flags).  Wall times therefore go to the text
output only; the JSON "millis" field is null.

Exit codes: 0 all suites pass, 1 some theorem check fails, 2 input error,
3 a suite was skipped for resource reasons (and none failed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import cartier as CT
from . import flows as FL
from .complexes import (BasedComplex, FilteredComplex, cohomology_dim,
                        e1_page, is_degenerate)
from .fplin import FieldSpec, PrimeMatrix, Subspace
from .generate import random_cech, random_higgs, random_lifting
from .modcx import (Filtration, HiggsModule, deRham_complex, fil_image_exchange,
                    higgs_complex, intersection_complex, special_triangular_check)
from .trunc_ring import RingPair

FORMAT_VERSION = 1
REPORT_VERSION = 1
SUITE_NAMES = ("cohomology", "cartier", "intersection", "adaptedness",
               "spectral", "cech", "residues", "selftest")


class ScenarioError(ValueError):
    """Input-format diagnostic; carries the offending key path."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


def _is_prime(p):
    if p < 2:
        return False
    return all(p % d for d in range(2, int(math.isqrt(p)) + 1))


def _require(cond, key, message):
    if not cond:
        raise ScenarioError(key, message)


def _check_sparse_entries(entries, key, n, cap, rows, cols):
    out = []
    _require(isinstance(entries, list), key, "expected a list of sparse entries")
    for k, ent in enumerate(entries):
        here = f"{key}[{k}]"
        _require(isinstance(ent, list) and len(ent) == 4, here,
                 "expected [exponents, row, col, value]")
        exps, row, col, val = ent
        _require(isinstance(exps, list) and len(exps) == n, here,
                 f"need {n} monomial exponents")
        _require(all(isinstance(e, int) and 0 <= e < cap for e in exps), here,
                 f"exponents must lie in 0..{cap - 1}")
        _require(isinstance(row, int) and 0 <= row < rows, here,
                 f"row out of range 0..{rows - 1}")
        _require(isinstance(col, int) and 0 <= col < cols, here,
                 f"col out of range 0..{cols - 1}")
        _require(isinstance(val, int), here, "value must be an integer")
        out.append([list(exps), row, col, val])
    return out


def parse_scenario(text):
    """Validated scenario dict from JSON text, or a ScenarioError naming the
    first offending key."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<document>", f"not valid JSON ({exc})") from None
    _require(isinstance(raw, dict), "<document>", "top level must be an object")

    known = {"format_version", "p", "n", "r", "M", "module", "liftings",
             "filtration", "seed", "suites"}
    for key in raw:
        _require(key in known, key, "unknown key")

    version = raw.get("format_version")
    _require(version == FORMAT_VERSION, "format_version",
             f"expected {FORMAT_VERSION}, got {version!r}")
    p, n, r, M = (raw.get(k) for k in ("p", "n", "r", "M"))
    for key, v in (("p", p), ("n", n), ("r", r), ("M", M)):
        _require(isinstance(v, int), key, "must be an integer")
    _require(_is_prime(p), "p", "p not prime")
    _require(1 <= n <= 6, "n", "need 1 <= n <= 6")
    _require(0 <= r <= n, "r", "need 0 <= r <= n")
    _require(M >= 1, "M", "need M >= 1")

    module = raw.get("module")
    _require(isinstance(module, dict), "module", "must be an object")
    rank = module.get("rank")
    _require(isinstance(rank, int) and rank >= 1, "module.rank",
             "must be a positive integer")
    grading = module.get("grading")
    if grading is not None:
        _require(isinstance(grading, list) and grading
                 and all(isinstance(g, int) and g >= 0 for g in grading),
                 "module.grading", "must be a list of nonnegative multiplicities")
        _require(sum(grading) == rank, "module.grading",
                 f"multiplicities must sum to rank {rank}")
        _require(len(grading) - 1 <= p - 1, "module.grading",
                 "grading width must stay <= p-1")
    theta = module.get("theta")
    if theta != "random":
        _require(isinstance(theta, list) and len(theta) == n, "module.theta",
                 f'either "random" or one sparse list per coordinate ({n})')
        theta = [
            _check_sparse_entries(comp, f"module.theta[{i}]", n, M, rank, rank)
            for i, comp in enumerate(theta)
        ]

    liftings = raw.get("liftings", 0)
    if not isinstance(liftings, int):
        _require(isinstance(liftings, list), "liftings",
                 "expected a chart count or a list of charts")
        checked = []
        for c, chart in enumerate(liftings):
            key = f"liftings[{c}]"
            _require(isinstance(chart, list) and len(chart) == n, key,
                     f"each chart lists {n} coordinate deviations")
            out = []
            for i, el in enumerate(chart):
                here = f"{key}[{i}]"
                _require(isinstance(el, list), here, "expected [exponents, value] terms")
                terms = []
                for t, term in enumerate(el):
                    _require(isinstance(term, list) and len(term) == 2,
                             f"{here}[{t}]", "expected [exponents, value]")
                    exps, val = term
                    _require(isinstance(exps, list) and len(exps) == n
                             and all(isinstance(e, int) and 0 <= e < p * M for e in exps),
                             f"{here}[{t}]", f"exponents must lie in 0..{p * M - 1}")
                    _require(isinstance(val, int), f"{here}[{t}]",
                             "value must be an integer")
                    terms.append([list(exps), val])
                out.append(terms)
            checked.append(out)
        liftings = checked
    else:
        _require(liftings >= 0, "liftings", "chart count must be nonnegative")

    fil = raw.get("filtration", {"kind": "trivial"})
    _require(isinstance(fil, dict) and "kind" in fil, "filtration",
             'expected an object with a "kind"')
    kind = fil["kind"]
    _require(kind in ("from-grading", "trivial", "explicit"), "filtration.kind",
             'must be one of "from-grading", "trivial", "explicit"')
    extra = set(fil) - {"kind", "steps"}
    _require(not extra, "filtration", f"unknown keys {sorted(extra)}")
    if kind == "from-grading":
        _require(grading is not None, "filtration",
                 "from-grading needs module.grading")
        _require("steps" not in fil, "filtration", "from-grading takes no steps")
    elif kind == "explicit":
        steps = fil.get("steps")
        _require(isinstance(steps, list) and steps, "filtration.steps",
                 "explicit filtration needs spanning steps")
        dim = rank * (p * M) ** n
        for q, step in enumerate(steps):
            key = f"filtration.steps[{q}]"
            _require(isinstance(step, list), key, "expected a list of row vectors")
            for row in step:
                _require(isinstance(row, list) and len(row) == dim, key,
                         f"row vectors live in dimension {dim}")
    else:
        _require("steps" not in fil, "filtration", "trivial takes no steps")

    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and 0 <= seed < 2 ** 64, "seed",
             "must be an unsigned 64-bit integer")

    suites = raw.get("suites", ["cohomology"])
    _require(isinstance(suites, list) and suites, "suites", "must be nonempty")
    for s in suites:
        _require(s in SUITE_NAMES, "suites", f"unknown suite {s!r}")
    _require(len(set(suites)) == len(suites), "suites", "duplicate suite")

    return {
        "format_version": FORMAT_VERSION,
        "p": p, "n": n, "r": r, "M": M,
        "module": {"rank": rank, "grading": grading, "theta": theta},
        "liftings": liftings,
        "filtration": ({"kind": kind, "steps": fil["steps"]}
                       if kind == "explicit" else {"kind": kind}),
        "seed": seed,
        "suites": list(suites),
    }


def normalize(scenario):
    """Canonical form of a parsed scenario (stable key order, sorted sparse
    entries); parse(emit(s)) == normalize(s)."""
    out = json.loads(json.dumps(scenario))  # deep copy, plain types
    theta = out["module"]["theta"]
    if theta != "random":
        out["module"]["theta"] = [sorted(comp) for comp in theta]
    if isinstance(out["liftings"], list):
        out["liftings"] = [[sorted(el) for el in chart] for chart in out["liftings"]]
    return out


def emit(scenario):
    return json.dumps(normalize(scenario), sort_keys=True, indent=2) + "\n"


def scenario_hash(scenario):
    blob = json.dumps(normalize(scenario), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# building the objects


def _element(ring, terms):
    f = ring.zero()
    for exps, val in terms:
        f = f + ring.monomial(tuple(exps)).scale(int(val) % ring.p)
    return f


def build_instance(scenario):
    """(RingPair, HiggsModule, FlatModule, Filtration-or-None, CechDatum)."""
    p, n, r, M = (scenario[k] for k in ("p", "n", "r", "M"))
    rp = RingPair(FieldSpec(p), n=n, r=r, M=M)
    rng = np.random.default_rng(scenario["seed"])
    mod = scenario["module"]
    grading = mod["grading"]
    levels = None
    if grading is not None:
        levels = [q for q, mult in enumerate(grading) for _ in range(mult)]
    if mod["theta"] == "random":
        e = random_higgs(rp, mod["rank"], rng)
        if levels is not None:
            # re-grade only if the random field happens to respect it
            e = HiggsModule(rp, mod["rank"], e.theta, grading=levels)
    else:
        theta = []
        for comp in mod["theta"]:
            mat = [[rp.down.zero() for _ in range(mod["rank"])]
                   for _ in range(mod["rank"])]
            for exps, row, col, val in comp:
                mat[row][col] = mat[row][col] + rp.down.monomial(
                    tuple(exps)).scale(int(val) % p)
            theta.append(mat)
        e = HiggsModule(rp, mod["rank"], theta, grading=levels)
    h = CT.inverse_cartier(e)

    fil_spec = scenario["filtration"]
    if fil_spec["kind"] == "from-grading":
        width = len(grading) - 1
        steps = []
        for q in range(width + 1):
            coords = np.nonzero(h.levels >= q)[0]
            basis = np.zeros((len(coords), h.dim), dtype=np.int64)
            basis[np.arange(len(coords)), coords] = 1
            steps.append(Subspace(p, h.dim, basis))
        fil = Filtration(h, steps)
    elif fil_spec["kind"] == "explicit":
        steps = [
            Subspace.from_spanning(p, h.dim,
                                   np.asarray(step, dtype=np.int64) % p)
            for step in fil_spec["steps"]
        ]
        fil = Filtration(h, steps)
    else:
        fil = Filtration(h, [Subspace.full(p, h.dim)])

    lifts = scenario["liftings"]
    if isinstance(lifts, int):
        cech = random_cech(rp, rng, charts=lifts + 1)
    else:
        datums = [CT.LiftingDatum.standard(rp)]
        for chart in lifts:
            datums.append(CT.LiftingDatum(
                rp, tuple(_element(rp.up, el) for el in chart)))
        cech = CT.CechDatum(datums)
    return rp, e, h, fil, cech


def _total_dim(scenario):
    p, n, M = scenario["p"], scenario["n"], scenario["M"]
    return scenario["module"]["rank"] * (p * M) ** n * 2 ** n


# ---------------------------------------------------------------------------
# suites


class SuiteResult:
    def __init__(self, name):
        self.name = name
        self.status = "pass"
        self.tables = {}
        self.witnesses = []
        self.millis = None

    def fail(self, witness):
        self.status = "fail"
        self.witnesses.append(witness)

    def skip(self, reason):
        self.status = "skipped"
        self.witnesses.append(reason)

    def as_json(self):
        return {"name": self.name, "status": self.status,
                "tables": self.tables, "witnesses": self.witnesses,
                "millis": self.millis}


def _degree_bound(e, args):
    if args.degree_bound is not None:
        return args.degree_bound
    return e.rp.p - e.level


def suite_cohomology(ctx, args):
    res = SuiteResult("cohomology")
    e, h = ctx["e"], ctx["h"]
    rows = []
    for label, c in (("higgs", higgs_complex(e)), ("deRham", deRham_complex(h))):
        dims = list(c.dims)
        hs = [cohomology_dim(c, m) for m in range(c.top + 1)]
        euler_c = sum((-1) ** m * d for m, d in enumerate(dims))
        euler_h = sum((-1) ** m * d for m, d in enumerate(hs))
        rows.append([label, dims, hs, euler_c])
        if euler_c != euler_h:
            res.fail(f"{label}: Euler characteristic mismatch {euler_c} vs {euler_h}")
    res.tables["complexes"] = {"columns": ["complex", "dims", "h", "euler"],
                               "rows": rows}
    return res


def suite_cartier(ctx, args):
    res = SuiteResult("cartier")
    e, h = ctx["e"], ctx["h"]
    bound = _degree_bound(e, args)
    hc, dc = higgs_complex(e), deRham_complex(h)
    rows = []
    for m in range(min(e.rp.n, bound - 1) + 1):
        a, b = cohomology_dim(hc, m), cohomology_dim(dc, m)
        rows.append([m, a, b, a == b])
        if a != b:
            res.fail(f"dim H^{m}: higgs {a} != deRham {b}")
    res.tables["dims"] = {"columns": ["m", "higgs", "deRham", "equal"],
                          "rows": rows}
    return res


def suite_intersection(ctx, args):
    res = SuiteResult("intersection")
    e, h = ctx["e"], ctx["h"]
    bound = _degree_bound(e, args)
    ic_e, ic_h = intersection_complex(e), intersection_complex(h)
    rows = []
    for m in range(min(e.rp.n, bound - 1) + 1):
        a, b = cohomology_dim(ic_e, m), cohomology_dim(ic_h, m)
        rows.append([m, a, b, a == b])
        if a != b:
            res.fail(f"dim IH-type H^{m}: {a} != {b}")
    res.tables["dims"] = {"columns": ["m", "higgs_int", "deRham_int", "equal"],
                          "rows": rows}
    split = CT.cartier_map(e)
    en_rows = []
    for m in range(split.EN.top + 1):
        hn = cohomology_dim(split.EN, m)
        hni = cohomology_dim(split.EN_int, m)
        en_rows.append([m, hn, hni])
        if hn or hni:
            res.fail(f"EN not exact in degree {m}: {hn}, intersection {hni}")
    res.tables["en_exactness"] = {"columns": ["m", "h_EN", "h_EN_int"],
                                  "rows": en_rows}
    return res


def suite_adaptedness(ctx, args):
    res = SuiteResult("adaptedness")
    rep = FL.adaptedness_check(ctx["h"], ctx["fil"])
    res.tables["flags"] = {
        "columns": ["m", "level", "lhs_dim", "rhs_dim", "equal"],
        "rows": [list(row) for row in rep.table]}
    if not rep.inclusion:
        res.fail("one-sided inclusion violated: " + "; ".join(map(str, rep.failures)))
    elif not rep.equal:
        strict = [tuple(row[:2]) for row in rep.table if not row[-1]]
        res.fail("strict inclusion at " + "; ".join(map(str, strict)))
    return res


def suite_spectral(ctx, args):
    res = SuiteResult("spectral")
    for mode in ("intersection", "full"):
        rep = FL.e1_degeneration_check(ctx["h"], ctx["fil"], mode=mode)
        res.tables[mode] = {"columns": ["b", "sum_E1", "dim_H", "equal"],
                            "rows": [list(row) for row in rep.rows]}
        if mode == "intersection" and not rep.degenerate:
            res.fail(f"intersection-mode E1 sums differ from abutment: {rep.rows}")
    return res


def suite_cech(ctx, args):
    res = SuiteResult("cech")
    e, cech = ctx["e"], ctx["cech"]
    rng = np.random.default_rng(ctx["scenario"]["seed"] + 1)
    bound = (args.degree_bound + 1) if args.degree_bound is not None else None
    rep = CT.verify_chain_map(e, cech, bound=bound, rng=rng, tamper=args.tamper)
    res.tables["chain_map"] = {
        "columns": ["degrees_checked", "defects", "intersection_ok"],
        "rows": [[rep.degrees, len(rep.defects), rep.intersection_ok]]}
    if not rep.ok:
        dgr, key, vec = rep.defects[0]
        res.fail(f"chain-map defect in degree {dgr} at {key}, "
                 f"support {np.nonzero(vec)[0][:6].tolist()}")
    if not rep.intersection_ok:
        res.fail(f"intersection not preserved: {rep.intersection_failures[:3]}")
    hom_rows = []
    s_max = e.rp.p - e.level - 1
    for a in range(len(cech.lifts)):
        for b in range(a + 1, len(cech.lifts)):
            worst = 0
            for s in range(0, s_max):
                defect = CT.homotopy_defect(e, cech.lifts[a], cech.lifts[b], s)
                worst = max(worst, int(np.count_nonzero(defect)))
            hom_rows.append([a, b, worst])
            if worst:
                res.fail(f"homotopy residual nonzero for charts ({a},{b})")
    res.tables["homotopy"] = {"columns": ["chart_a", "chart_b", "nonzero_entries"],
                              "rows": hom_rows}
    return res


def suite_residues(ctx, args):
    res = SuiteResult("residues")
    e, h = ctx["e"], ctx["h"]
    if e.module_levels is None:
        res.skip("residue classification needs a graded module")
        return res
    r = e.rp.r
    rows = []
    strata = [list(c) for k in range(1, r + 1)
              for c in _subsets(range(1, r + 1), k)]
    for I in strata:
        verdict = FL.residue_verdict(e, h, I)
        s = min(len(I), e.level)
        rows.append([I, s, verdict])
        if verdict != "special":
            res.fail(f"stratum {I}: expected special of type {s}, got {verdict}")
    res.tables["strata"] = {"columns": ["I", "s", "verdict"], "rows": rows}
    if not rows:
        res.witnesses.append("no log coordinates; nothing to classify")
    return res


def _subsets(pool, k):
    import itertools
    return itertools.combinations(pool, k)


# ---------------------------------------------------------------------------
# selftest battery


def _zero_theta(rp, rank):
    return [[[rp.down.zero() for _ in range(rank)] for _ in range(rank)]
            for _ in range(rp.n)]


def _check_classical():
    for p in (3, 5):
        for n in (1, 2):
            rp = RingPair(FieldSpec(p), n=n, r=1, M=1)
            e = HiggsModule(rp, 1, _zero_theta(rp, 1))
            hc, dc = higgs_complex(e), deRham_complex(CT.inverse_cartier(e))
            for m in range(n + 1):
                want = math.comb(n, m)
                assert cohomology_dim(hc, m) == want
                assert cohomology_dim(dc, m) == want


def _check_e1_example():
    # two-term complex, d(e2) = f1, Fil^1 = span(e1) resp. span(f1)
    p = 3
    d = np.array([[0, 1], [0, 0]], dtype=np.int64)
    c = BasedComplex(p, [["e1", "e2"], ["f1", "f2"]], [d])
    flags = [
        [Subspace.full(p, 2), Subspace.from_spanning(p, 2, np.array([[1, 0]]))],
        [Subspace.full(p, 2), Subspace.from_spanning(p, 2, np.array([[1, 0]]))],
    ]
    fc = FilteredComplex(c, flags)
    assert sum(e1_page(fc).values()) == 4
    assert not is_degenerate(fc)


def _check_coefficients():
    assert CT.coefficient_a((2,), (0, 0), 5) == 3
    assert CT.coefficient_a((1,), (0, 0), 5) == 1
    assert CT.coefficient_a((0,), (1, 0), 5) == 0
    for p in (3, 5):
        assert not CT.coefficient_consistency(p)


def _check_triangular():
    m = PrimeMatrix(3, np.array([[1, 0], [0, 0]], dtype=np.int64))
    assert special_triangular_check(m, (1, 1), 1) == "triangular"
    m2 = PrimeMatrix(3, np.array([[0, 1], [0, 0]], dtype=np.int64))
    assert special_triangular_check(m2, (1, 1), 1) == "special"
    r = fil_image_exchange(m2, (1, 1), 1, 0)
    assert r.equal


def _rank2_witness():
    rp = RingPair(FieldSpec(5), n=1, r=1, M=1)
    mat = np.array([[0, 1], [0, 0]], dtype=np.int64)
    return FL.build_one_periodic([1, 1], [mat], rp)


def _check_rank2_ih():
    w = _rank2_witness()
    rep = FL.intersection_cohomology(w.module, w.fil)
    assert rep.ih == [1, 0], rep.ih
    assert rep.h == [1, 1], rep.h
    assert [sum(row) for row in rep.hodge] == rep.ih
    assert FL.adaptedness_check(w.module, w.fil).equal
    assert FL.e1_degeneration_check(w.module, w.fil).degenerate
    assert FL.residue_classification(w, [1]) == "special"


def _check_en_exactness():
    rp = RingPair(FieldSpec(5), n=2, r=1, M=1)
    theta = _zero_theta(rp, 2)
    theta[0][1][0] = rp.down.one()
    e = HiggsModule(rp, 2, theta)
    split = CT.cartier_map(e)
    for m in range(split.EN.top + 1):
        assert cohomology_dim(split.EN, m) == 0
        assert cohomology_dim(split.EN_int, m) == 0


def _check_chain_map_and_tamper():
    rp = RingPair(FieldSpec(5), n=1, r=1, M=1)
    theta = _zero_theta(rp, 2)
    theta[0][1][0] = rp.down.one()
    e = HiggsModule(rp, 2, theta)
    cech = CT.CechDatum([CT.LiftingDatum.standard(rp),
                         CT.LiftingDatum(rp, (rp.up.variable(1),))])
    assert CT.verify_chain_map(e, cech).ok
    assert not CT.verify_chain_map(e, cech, tamper=True).ok


def _check_homotopy():
    rp = RingPair(FieldSpec(5), n=1, r=1, M=1)
    theta = _zero_theta(rp, 2)
    theta[0][1][0] = rp.down.one()
    e = HiggsModule(rp, 2, theta)
    la = CT.LiftingDatum(rp, (rp.up.variable(1),))
    lb = CT.LiftingDatum(rp, (rp.up.variable(1, 2),))
    for s in range(0, rp.p - e.level):
        assert not np.any(CT.homotopy_defect(e, la, lb, s))


def _check_roundtrip():
    for name, text in bundled_scenarios():
        s = parse_scenario(text)
        assert parse_scenario(emit(s)) == normalize(s), name


SELFTEST_CHECKS = [
    ("classical-cartier", _check_classical),
    ("e1-page-example", _check_e1_example),
    ("coefficient-oracles", _check_coefficients),
    ("triangular-examples", _check_triangular),
    ("rank2-ih", _check_rank2_ih),
    ("en-exactness", _check_en_exactness),
    ("chain-map-tamper", _check_chain_map_and_tamper),
    ("homotopy-identity", _check_homotopy),
    ("scenario-roundtrip", _check_roundtrip),
]


def suite_selftest(ctx, args):
    res = SuiteResult("selftest")
    rows = []
    for name, fn in SELFTEST_CHECKS:
        try:
            fn()
            rows.append([name, "pass"])
        except AssertionError as exc:
            rows.append([name, "fail"])
            res.fail(f"{name}: {exc}")
    res.tables["checks"] = {"columns": ["check", "status"], "rows": rows}
    return res


def bundled_scenarios():
    """(name, text) pairs for the scenario corpus shipped with the package."""
    from importlib import resources

    out = []
    root = resources.files("loghodge").joinpath("data")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out.append((entry.name, entry.read_text()))
    return out


SUITE_FUNCS = {
    "cohomology": suite_cohomology,
    "cartier": suite_cartier,
    "intersection": suite_intersection,
    "adaptedness": suite_adaptedness,
    "spectral": suite_spectral,
    "cech": suite_cech,
    "residues": suite_residues,
    "selftest": suite_selftest,
}


# ---------------------------------------------------------------------------
# driver


def run(scenario, suite, args):
    """One suite on a parsed scenario; deterministic given (scenario, seed)."""
    res = SuiteResult(suite)
    if suite != "selftest" and _total_dim(scenario) > args.max_dim:
        res.skip(f"total complex dimension {_total_dim(scenario)} exceeds "
                 f"--max-dim {args.max_dim}")
        return res
    ctx = {"scenario": scenario}
    if suite != "selftest":
        rp, e, h, fil, cech = build_instance(scenario)
        ctx.update(rp=rp, e=e, h=h, fil=fil, cech=cech)
    t0 = time.monotonic()
    out = SUITE_FUNCS[suite](ctx, args)
    out.millis = int(1000 * (time.monotonic() - t0))
    return out


def _print_result(res, stream=None):
    stream = sys.stdout if stream is None else stream
    took = f"  ({res.millis} ms)" if res.millis is not None else ""
    print(f"[{res.status.upper():7}] suite {res.name}{took}", file=stream)
    for tname, table in res.tables.items():
        print(f"  {tname}:", file=stream)
        cols = table["columns"]
        rows = [[str(x) for x in row] for row in table["rows"]]
        widths = [max([len(c)] + [len(r[i]) for r in rows])
                  for i, c in enumerate(cols)]
        print("    " + "  ".join(c.ljust(w) for c, w in zip(cols, widths)),
              file=stream)
        for r in rows:
            print("    " + "  ".join(x.ljust(w) for x, w in zip(r, widths)),
                  file=stream)
    for w in res.witnesses:
        print(f"  note: {w}", file=stream)


def _json_safe(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    return x


def make_report(scenario, results):
    return {
        "version": REPORT_VERSION,
        "scenario_hash": scenario_hash(scenario) if scenario else None,
        "suites": [
            _json_safe({**r.as_json(), "millis": None}) for r in results
        ],
    }


def build_argparser():
    ap = argparse.ArgumentParser(
        prog="loghodge",
        description="exact mod-p verification suites for log Higgs/de Rham models")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUITE_NAMES + ("run",):
        sp = sub.add_parser(
            name,
            help="run the suites requested in the scenario" if name == "run"
            else f"run the {name} suite")
        sp.add_argument("--scenario", help="path to a scenario JSON file")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
        sp.add_argument("--json", dest="json_path",
                        help="write the machine report to this path")
        sp.add_argument("--max-dim", type=int, default=50000,
                        help="skip suites whose total complex dimension exceeds this")
        sp.add_argument("--degree-bound", type=int, default=None,
                        help="check degrees m < this bound (default p - level)")
        sp.add_argument("--tamper", action="store_true",
                        help="negative control: perturb the phi coefficients")
    return ap


def main(argv=None):
    args = build_argparser().parse_args(argv)
    scenario = None
    if args.scenario is not None:
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read scenario: {exc}", file=sys.stderr)
            return 2
        try:
            scenario = parse_scenario(text)
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        if args.seed is not None:
            scenario["seed"] = args.seed

    if args.command == "run":
        if scenario is None:
            print("error: run needs --scenario", file=sys.stderr)
            return 2
        suites = scenario["suites"]
    else:
        suites = [args.command]
        if args.command != "selftest" and scenario is None:
            print(f"error: {args.command} needs --scenario", file=sys.stderr)
            return 2

    results = []
    for suite in suites:
        try:
            res = run(scenario, suite, args)
        except (ScenarioError, ValueError) as exc:
            res = SuiteResult(suite)
            res.fail(f"construction failed: {exc}")
        results.append(res)
        _print_result(res)

    report = make_report(scenario, results)
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")

    if any(r.status == "fail" for r in results):
        return 1
    if any(r.status == "skipped" for r in results):
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

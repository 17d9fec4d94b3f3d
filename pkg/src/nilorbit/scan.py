"""Exhaustive denominator sweeps and density checks with JSON reports.

Reports are deterministic: rows are ordered by denominator and then
lexicographically by point, workers only split whole denominators, and the
merge is independent of the worker count, so output files are byte-identical
across runs and --workers settings.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from math import gcd
from multiprocessing import Pool

from .errors import UnsupportedInputError
from .exactmath import prime_support
from .fixtures import NilFixture, TorusFixture
from .nilclass2 import (
    MalcevElement,
    relative_order as nil_relative_order,
    sweep_lattice_points,
)
from .orbits import Classification
from .torus import (
    TranslationVerdict,
    sweep_denominator,
    translation_periodicity,
)

SCHEMA_VERSION = 1


def _exact_order_states(m: int, n: int):
    """Numerator tuples of the points with relative order exactly m."""
    for tup in itertools.product(range(m), repeat=n):
        if gcd(m, *tup) == 1:
            yield tup


def _point_str(nums, m: int) -> str:
    return ",".join(str(Fraction(a, m)) for a in nums)


def _torus_denominator_table(payload):
    """Worker: classify every point of relative order exactly m.

    Returns (m, rows, cycle_checks) where cycle_checks reports whether the
    relative order (and its prime support) is constant along every cycle of
    the full (1/m)-grid.
    """
    endo, m = payload
    n = endo.dim
    M, step_int, memo = sweep_denominator(endo, m)
    scale = M // m

    rows = []
    for tup in _exact_order_states(m, n):
        state = tuple(scale * x for x in tup)
        pre, per = memo[state]
        rows.append(
            {
                "point": _point_str(tup, m),
                "verdict": "periodic" if pre == 0 else "eventually_periodic",
                "preperiod": pre,
                "period": per,
                "relative_order": m,
            }
        )

    order_bad = None
    support_bad = None
    for state, (pre, per) in memo.items():
        if pre != 0:
            continue
        o1 = M // gcd(M, *state) if state else 1
        nxt = step_int(state)
        o2 = M // gcd(M, *nxt) if nxt else 1
        if o1 != o2 and order_bad is None:
            order_bad = _point_str(state, M)
        if prime_support(o1) != prime_support(o2) and support_bad is None:
            support_bad = _point_str(state, M)
    return m, rows, {"order": order_bad, "support": support_bad}


def _nil_denominator_table(payload):
    fixture, endo_name, m = payload
    group = fixture.group
    lattice = fixture.lattice
    endo = fixture.endos[endo_name]
    n = group.dim
    samples = [
        MalcevElement(group, [Fraction(a, m) for a in tup])
        for tup in _exact_order_states(m, n)
    ]
    # classification is coset-level: orbits must start at canonical representatives
    reps = [lattice.canonical_rep(g) for g in samples]
    memo, step_coords = sweep_lattice_points(endo, lattice, reps)
    rows = []
    support_bad = None
    for sample, rep in zip(samples, reps):
        pre, per = memo[rep.coords]
        order = nil_relative_order(lattice, sample)
        rows.append(
            {
                "point": ",".join(str(c) for c in sample.coords),
                "verdict": "periodic" if pre == 0 else "eventually_periodic",
                "preperiod": pre,
                "period": per,
                "relative_order": order,
            }
        )
        if pre == 0 and support_bad is None:
            rep_order = nil_relative_order(lattice, rep)
            succ = MalcevElement(group, step_coords(rep.coords))
            if prime_support(rep_order) != prime_support(nil_relative_order(lattice, succ)):
                support_bad = rows[-1]["point"]
    return m, rows, {"order": None, "support": support_bad}


def _run_jobs(worker, payloads, workers: int):
    if workers <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with Pool(processes=min(workers, len(payloads))) as pool:
        return pool.map(worker, payloads, chunksize=1)


def _assertion(passed, checked, counterexample=None):
    return {
        "passed": bool(passed),
        "checked": checked,
        "counterexample": counterexample,
    }


def scan_report(fixture, max_denominator: int, workers: int = 1, endo_name=None) -> dict:
    """Classify every point with relative order up to the bound and check the
    structural guarantees (termination, coprime-order sufficiency, order
    invariants on cycles, fixture expectations)."""
    if isinstance(fixture, TorusFixture):
        return _scan_torus(fixture, max_denominator, workers)
    if isinstance(fixture, NilFixture):
        names = sorted(fixture.endos)
        if endo_name is None:
            if len(names) != 1:
                raise UnsupportedInputError(
                    f"fixture has several maps {names}; pick one with --endo"
                )
            endo_name = names[0]
        if endo_name not in fixture.endos:
            raise UnsupportedInputError(f"no map named {endo_name!r} in fixture")
        return _scan_nil(fixture, max_denominator, workers, endo_name)
    raise UnsupportedInputError(
        f"scan supports linear torus and nil fixtures, not {fixture.kind!r}"
    )


def _scan_torus(fixture: TorusFixture, max_denominator: int, workers: int) -> dict:
    endo = fixture.endo
    if not endo.is_linear:
        raise UnsupportedInputError("scan needs a linear fixture (zero translation)")
    D = endo.determinant
    payloads = [(endo, m) for m in range(1, max_denominator + 1)]
    results = _run_jobs(_torus_denominator_table, payloads, workers)

    tables = {}
    all_rows = []
    order_bad = None
    support_bad = None
    for m, rows, checks in results:
        tables[str(m)] = rows
        all_rows.extend(rows)
        order_bad = order_bad or checks["order"]
        support_bad = support_bad or checks["support"]

    assertions = {
        "every_point_classified": _assertion(True, len(all_rows)),
        "constant_order_on_cycles": _assertion(order_bad is None, len(all_rows), order_bad),
        "constant_prime_support_on_cycles": _assertion(
            support_bad is None, len(all_rows), support_bad
        ),
    }
    if D != 0:
        bad = None
        checked = 0
        for row in all_rows:
            if gcd(abs(D), row["relative_order"]) == 1:
                checked += 1
                if row["verdict"] != "periodic" and bad is None:
                    bad = row
        assertions["coprime_order_implies_periodic"] = _assertion(bad is None, checked, bad)
    if fixture.expect.get("periodic_iff_order_coprime_to_det"):
        bad = None
        for row in all_rows:
            expected = gcd(abs(D), row["relative_order"]) == 1
            if (row["verdict"] == "periodic") != expected:
                bad = row
                break
        assertions["periodic_iff_order_coprime_to_det"] = _assertion(
            bad is None, len(all_rows), bad
        )
    if fixture.expect.get("periodic_point_every_order"):
        found = {row["relative_order"] for row in all_rows if row["verdict"] == "periodic"}
        missing = [s for s in range(1, max_denominator + 1) if s not in found]
        assertions["periodic_point_every_order"] = _assertion(
            not missing, max_denominator, {"missing_orders": missing} if missing else None
        )

    return _finish_report(
        kind="scan",
        fixture_name=fixture.name,
        map_desc={"A": [list(r) for r in endo.linear], "b": [str(x) for x in endo.translation]},
        max_denominator=max_denominator,
        tables=tables,
        assertions=assertions,
        rows=all_rows,
    )


def _scan_nil(fixture: NilFixture, max_denominator: int, workers: int, endo_name: str) -> dict:
    endo = fixture.endos[endo_name]
    D = endo.determinant
    payloads = [(fixture, endo_name, m) for m in range(1, max_denominator + 1)]
    results = _run_jobs(_nil_denominator_table, payloads, workers)

    tables = {}
    all_rows = []
    support_bad = None
    for m, rows, checks in results:
        tables[str(m)] = rows
        all_rows.extend(rows)
        support_bad = support_bad or checks["support"]

    assertions = {
        "every_point_classified": _assertion(True, len(all_rows)),
        "constant_prime_support_on_cycles": _assertion(
            support_bad is None, len(all_rows), support_bad
        ),
    }
    if D != 0:
        bad = None
        checked = 0
        for row in all_rows:
            if gcd(int(abs(D)), row["relative_order"]) == 1:
                checked += 1
                if row["verdict"] != "periodic" and bad is None:
                    bad = row
        assertions["coprime_order_implies_periodic"] = _assertion(bad is None, checked, bad)

    return _finish_report(
        kind="scan",
        fixture_name=f"{fixture.name}:{endo_name}",
        map_desc={"matrix": [[str(x) for x in row] for row in endo.matrix]},
        max_denominator=max_denominator,
        tables=tables,
        assertions=assertions,
        rows=all_rows,
    )


def _finish_report(kind, fixture_name, map_desc, max_denominator, tables, assertions, rows):
    periodic = sum(1 for r in rows if r["verdict"] == "periodic")
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "fixture": fixture_name,
        "map": map_desc,
        "max_denominator": max_denominator,
        "tables": tables,
        "assertions": assertions,
        "ok": all(a["passed"] for a in assertions.values()),
        "summary": {
            "points": len(rows),
            "periodic": periodic,
            "eventually_periodic_not_periodic": len(rows) - periodic,
        },
    }


def density_report(fixture, m_max: int, endo_name=None) -> dict:
    """Check that every 1/m-cell contains a verified periodic point, for each
    admissible m (coprime to the determinant)."""
    if isinstance(fixture, TorusFixture):
        endo = fixture.endo
        if endo.is_pure_translation and endo.has_irrational_translation:
            verdict = translation_periodicity(endo.translation)
            return {
                "schema_version": SCHEMA_VERSION,
                "kind": "density",
                "fixture": fixture.name,
                "branch": "no_periodic_points"
                if verdict is TranslationVerdict.EMPTY
                else "all_points_periodic",
                "cells": {},
                "ok": True,
            }
        if not endo.is_linear:
            raise UnsupportedInputError("density sweep needs a linear fixture")
        D = endo.determinant
        n = endo.dim
        cells = {}
        ok = True
        for m in range(1, m_max + 1):
            if D != 0 and gcd(abs(D), m) != 1:
                cells[str(m)] = {"admissible": False}
                continue
            M, _, memo = sweep_denominator(endo, m)
            scale = M // m
            missing = []
            for tup in itertools.product(range(m), repeat=n):
                state = tuple(scale * x for x in tup)
                if memo[state][0] != 0:
                    missing.append(_point_str(tup, m))
            cells[str(m)] = {
                "admissible": True,
                "cells": m**n,
                "all_cells_hit": not missing,
                "missing": missing,
            }
            ok = ok and not missing
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "density",
            "fixture": fixture.name,
            "branch": "periodic_grid",
            "cells": cells,
            "ok": ok,
        }
    if isinstance(fixture, NilFixture):
        names = sorted(fixture.endos)
        if endo_name is None:
            endo_name = names[0] if len(names) == 1 else None
            if endo_name is None:
                raise UnsupportedInputError(
                    f"fixture has several maps {names}; pick one with --endo"
                )
        endo = fixture.endos[endo_name]
        D = endo.determinant
        n = fixture.group.dim
        cells = {}
        ok = True
        for m in range(1, m_max + 1):
            if D != 0 and gcd(int(abs(D)), m) != 1:
                cells[str(m)] = {"admissible": False}
                continue
            samples = [
                MalcevElement(fixture.group, [Fraction(a, m) for a in tup])
                for tup in itertools.product(range(m), repeat=n)
            ]
            reps = [fixture.lattice.canonical_rep(g) for g in samples]
            memo, _ = sweep_lattice_points(endo, fixture.lattice, reps)
            missing = [
                ",".join(str(c) for c in sample.coords)
                for sample, rep in zip(samples, reps)
                if memo[rep.coords][0] != 0
            ]
            cells[str(m)] = {
                "admissible": True,
                "cells": m**n,
                "all_cells_hit": not missing,
                "missing": missing,
            }
            ok = ok and not missing
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "density",
            "fixture": f"{fixture.name}:{endo_name}",
            "branch": "periodic_grid",
            "cells": cells,
            "ok": ok,
        }
    raise UnsupportedInputError(f"density supports torus and nil fixtures, not {fixture.kind!r}")


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def classification_row(cls: Classification) -> dict:
    return {
        "verdict": "periodic" if cls.periodic else "eventually_periodic",
        "preperiod": cls.preperiod,
        "period": cls.period,
        "relative_order_trace": list(cls.relative_order_trace),
    }

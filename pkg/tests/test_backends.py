import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvspin import _kernels, _kernels_py as py
from bvspin.superpoly import var_code

from strategies import ROSTER, polynomial

cy = pytest.importorskip("bvspin._speedups")
ODD = ROSTER.odd
CODES = [var_code(s.id, o) for s in ROSTER.symbols for o in range(3)]


def test_compiled_backend_selected():
    assert _kernels.BACKEND == ("python" if os.environ.get("BVSPIN_PURE") else "cython")


@settings(max_examples=200)
@given(polynomial(), polynomial())
def test_poly_mul_agrees(a, b):
    assert cy.poly_mul(a.terms, b.terms, ODD) == py.poly_mul(a.terms, b.terms, ODD)


@settings(max_examples=200)
@given(polynomial())
def test_mono_kernels_agree(a):
    for m in a.terms:
        assert cy.mono_dt(m, ODD) == py.mono_dt(m, ODD)
        for code in CODES:
            assert cy.mono_lderiv(m, code, ODD) == py.mono_lderiv(m, code, ODD)


rows = st.lists(st.dictionaries(st.integers(0, 6), st.integers(-3, 3).filter(bool), max_size=5),
                max_size=10)


@settings(max_examples=200)
@given(rows)
def test_echelon_agrees(vectors):
    a, b = cy.Echelon(), py.Echelon()
    for i, v in enumerate(vectors):
        ra = a.add(dict(v), {i: 1})
        rb = b.add(dict(v), {i: 1})
        assert ra == rb
    assert a.rank == b.rank


@settings(max_examples=200)
@given(rows)
def test_echelon_dependencies_are_exact(vectors):
    e = py.Echelon()
    for i, v in enumerate(vectors):
        dep = e.add(dict(v), {i: 1})
        if dep is not None:
            total = {}
            for j, c in dep.items():
                for col, x in vectors[j].items():
                    total[col] = total.get(col, 0) + c * x
            assert not any(total.values())


def test_pure_fallback_runs():
    env = dict(os.environ, BVSPIN_PURE="1")
    code = ("from bvspin import _kernels; from bvspin.calculus import check_master_equation;"
            "from bvspin.models import build_sugra_spinning;"
            "assert _kernels.BACKEND == 'python';"
            "assert check_master_equation(build_sugra_spinning(1)).passed")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr

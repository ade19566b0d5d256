"""Shared fixtures: the example manifests and small frame builders."""

import sys
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent))
from libs.brackets import Frame, VecField
from libs.expr import ParseContext, parse_poly
from libs.manifest import parse_manifest

ROOT = Path(__file__).parent
MANIFEST_DIR = ROOT / "manifests"


def load_manifest(name, **params):
    return parse_manifest((MANIFEST_DIR / f"{name}.yml").read_text(encoding="utf-8"), params)


def frame_from(rows, parameters=None):
    """Frame from lists of component expressions in x1..xn."""
    n = len(rows[0])
    context = ParseContext.default(n, parameters)
    return Frame(tuple(VecField(tuple(parse_poly(c, context) for c in row)) for row in rows))


@pytest.fixture
def make_frame():
    return frame_from


@pytest.fixture
def martinet():
    return load_manifest("martinet")


@pytest.fixture
def double_martinet():
    return load_manifest("r4_double_martinet")


@pytest.fixture(params=[3, 4, 5])
def single_stratum(request):
    return request.param, load_manifest("r5_single_stratum", k=request.param)


@pytest.fixture(params=[3, 4, 5])
def corank_two(request):
    return request.param, load_manifest("r5_corank_two", k=request.param)


@pytest.fixture
def single_stratum_k3():
    return load_manifest("r5_single_stratum", k=3)

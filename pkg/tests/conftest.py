from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

import bikeframe as bf
from bikeframe.fea import BeamModel
from bikeframe.loadcases import PERFORMANCE_FIELDS, PerformanceRecord


def single_tube_model(
    length=1.0,
    od=0.025,
    t=0.002,
    n_elements=16,
    material="Steel",
    axis=(1.0, 0.0, 0.0),
) -> BeamModel:
    """Straight tube from the origin along `axis`, built without discretize
    so solver tests stay independent of the frame-geometry path."""
    mat = bf.lookup(material)
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    nodes = np.outer(np.linspace(0.0, length, n_elements + 1), axis)
    sec = bf.tube_section_properties(od, t)
    m = n_elements
    return BeamModel(
        nodes=nodes,
        elements=np.column_stack([np.arange(m), np.arange(1, m + 1)]),
        kinds=("tube",) * m,
        area=np.full(m, sec.area),
        i_bend=np.full(m, sec.i_bend),
        j_torsion=np.full(m, sec.j_torsion),
        outer_radius=np.full(m, od / 2.0),
        elastic_modulus=mat.elastic_modulus,
        shear_modulus=mat.shear_modulus,
        density=mat.density,
        constraints=np.zeros((m + 1, 6), dtype=bool),
        loads=np.zeros((m + 1, 6)),
    )


def make_record(**overrides) -> PerformanceRecord:
    """Ok-status record with harmless defaults, overridable per field."""
    values = {name: 1.0 for name in PERFORMANCE_FIELDS}
    values.update(overrides)
    return PerformanceRecord(**values)


def params_with(**overrides) -> bf.FrameParams:
    return dataclasses.replace(bf.reference_params(), **overrides)


@pytest.fixture
def reference() -> bf.FrameParams:
    return bf.reference_params()


@pytest.fixture(scope="session")
def reference_skeleton():
    return bf.build_skeleton(bf.reference_params())


@pytest.fixture(scope="session")
def reference_record():
    return bf.evaluate_frame(bf.reference_params())


def assert_close(actual, expected, rel=1e-9, abs_tol=0.0):
    assert actual == pytest.approx(expected, rel=rel, abs=abs_tol), (actual, expected)


def record_values_equal(a: PerformanceRecord, b: PerformanceRecord) -> bool:
    if a.status != b.status:
        return False
    for name in PERFORMANCE_FIELDS:
        va, vb = getattr(a, name), getattr(b, name)
        if math.isnan(va) != math.isnan(vb):
            return False
        if not math.isnan(va) and va != vb:
            return False
    return True

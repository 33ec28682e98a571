"""Shared fixtures.

The cross-ratio table is expensive (hundreds of ODE boundary solves),
so one standard table is built per session, timed for the acceptance
gate, and installed as the module default for everything downstream.
"""
from __future__ import annotations

import time

import pytest

from punctorus import modmap


@pytest.fixture(scope="session")
def cr_table_build() -> tuple[modmap.CrMapTable, float]:
    t0 = time.perf_counter()
    table = modmap.build_cr_table()
    elapsed = time.perf_counter() - t0
    modmap.set_default_table(table)
    return table, elapsed


@pytest.fixture(scope="session")
def cr_table(cr_table_build) -> modmap.CrMapTable:
    return cr_table_build[0]

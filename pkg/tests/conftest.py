"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from garchtails import innovations
from garchtails.sre import GarchSpec


def make_garch11(alpha1: float, beta1: float, inn: innovations.Innovation) -> GarchSpec:
    return GarchSpec(
        p=1, q=1, alpha0=1.0, alpha=(alpha1,), beta=(beta1,), innovation=inn
    )


def make_arch1(alpha1: float, inn: innovations.Innovation) -> GarchSpec:
    return GarchSpec(p=0, q=1, alpha0=1.0, alpha=(alpha1,), beta=(), innovation=inn)


@pytest.fixture
def rng():
    return np.random.default_rng(20240824)


@pytest.fixture
def gaussian():
    return innovations.standardize(innovations.GAUSSIAN)


@pytest.fixture
def t3():
    return innovations.standardize(innovations.SCALED_T, nu=3.0)


@pytest.fixture
def skewt3():
    return innovations.standardize(innovations.SKEW_T, nu=3.0, xi=1.0)

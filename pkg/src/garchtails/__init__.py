"""Stationarity and extremal-property diagnostics for GARCH(p,q) processes."""

from .innovations import Innovation, standardize
from .models import builtin, load_model
from .sre import GarchSpec, ProcessPath, simulate
from .stationarity import (
    GammaReport,
    Verdict,
    check_stationarity,
    gamma_combined,
    gamma_naive,
    gamma_stable,
)
from .spectral import ParticleEnsemble, RhoCurve, find_kappa, run_to_convergence
from .tailchain import ChainBatchSummary, Condition, TailChain, batch_chains
from .clusters import ClusterReport, build_cluster_report, signed_transforms

__version__ = "0.1.0"

__all__ = [
    "ChainBatchSummary",
    "ClusterReport",
    "Condition",
    "GammaReport",
    "GarchSpec",
    "Innovation",
    "ParticleEnsemble",
    "ProcessPath",
    "RhoCurve",
    "TailChain",
    "Verdict",
    "batch_chains",
    "build_cluster_report",
    "builtin",
    "check_stationarity",
    "find_kappa",
    "gamma_combined",
    "gamma_naive",
    "gamma_stable",
    "load_model",
    "run_to_convergence",
    "signed_transforms",
    "simulate",
    "standardize",
]

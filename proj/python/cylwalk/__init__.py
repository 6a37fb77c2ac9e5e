"""Simulation lab for the disconnection of a discrete cylinder by a drifted random walk."""

try:
    from ._cylwalk import *  # noqa: F401,F403
    from ._cylwalk import __doc__ as _core_doc  # noqa: F401
except ImportError:  # in-tree test runs put the extension directly on sys.path
    from _cylwalk import *  # noqa: F401,F403

__all__ = [
    "alpha_star",
    "phi",
    "ldp_rate",
    "cover_ldp_rate",
    "zeta",
    "exponent_identity_residual",
    "neighbors",
    "drift_from_alpha",
    "path_weight",
    "disconnects_cylinder",
    "disconnection_time_of_path",
    "simulate_disconnection_time",
    "torus_spectrum",
    "eigentime_u",
    "cover_tail_bound",
    "green_slab",
    "run_experiment_kv",
]

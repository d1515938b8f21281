"""Exact harmonic analysis on F_q^d for k-resultant magnitude sets."""

__version__ = "0.1.0"

from .field import Field, make_field  # noqa: E402
from .lattice import PointSet, Space, build_set  # noqa: E402
from .magnitude import delta_report, lemma_audit, nu_profile, theorem_exponents  # noqa: E402

__all__ = ["Field", "PointSet", "Space", "build_set", "delta_report", "lemma_audit",
           "make_field", "nu_profile", "theorem_exponents"]

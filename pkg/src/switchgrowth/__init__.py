"""Worst-case growth of a two-generator block-triangular switched system."""
from .core import (AffineTriangularMatrix, RationalAngle, SwitchingWord, SystemParams,
                   build_generators, op_norm, word_product)
from .growth import GrowthSeries, brute_force, growth_series
from .classify import Classification, Kind, classify, jordan_coupling, stability_certificate
from .asymptotics import oscillation_report, slope_bracket
from .baire import CertificateChain, GrowthTarget, construct, verify

__version__ = "0.1.0"

__all__ = [
    "AffineTriangularMatrix", "RationalAngle", "SwitchingWord", "SystemParams",
    "build_generators", "op_norm", "word_product", "GrowthSeries", "brute_force",
    "growth_series", "Classification", "Kind", "classify", "jordan_coupling",
    "stability_certificate", "oscillation_report", "slope_bracket", "CertificateChain",
    "GrowthTarget", "construct", "verify", "__version__",
]

"""Distributional curvature of warped products whose warping function is only C0.

Modules:

* :mod:`warpcurv.genfun` - piecewise closed-form functions, delta atoms, step reconstruction
* :mod:`warpcurv.warped` - FRW curvature coefficients as generalized functions
* :mod:`warpcurv.multiwarp` - several fibers sharing one kink time
* :mod:`warpcurv.cosmo` - the radiation/matter/lambda scale factor and Friedmann inversion
* :mod:`warpcurv.verify` - independent numerical oracles
* :mod:`warpcurv.cli` - scenario files and CSV output
"""
from .errors import *  # noqa: F401,F403
from .genfun import (
    AnalyticPiece,
    DeltaAtom,
    GenFun,
    PiecewiseFn,
    derivative,
    step_reconstruct_fpp,
    step_reconstruct_fprime,
    weak_pairing,
)
from .warped import FRWModel, ricci, scalar_curvature, sectional

__version__ = "0.1.0"

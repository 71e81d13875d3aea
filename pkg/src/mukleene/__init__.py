"""A lambda calculus with fixed points and partial oracles, plus exact
realisers over piecewise-affine functions."""

__version__ = "0.1.0"

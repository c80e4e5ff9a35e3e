"""Permutation laboratory: a two-stage atom universe with litters, local
cardinals, allowable permutations, supports, and orbit bookkeeping."""

from .universe import FMParams, FMUniverse, NearLitter, build_universe

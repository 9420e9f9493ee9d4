"""piekit: finite 2-dimensional category theory.

Decides pie-ness of limit weights, computes and cross-validates strict
and pseudo weighted limits in Cat through a pie-expression compiler, and
drives a free strongly-finitary 2-monad / pie-presentation engine, all
over finite categories given by explicit tables.
"""

__version__ = "0.1.0"

from . import fincat, weights, limits, classify, sf2monad, jsonio  # noqa: F401

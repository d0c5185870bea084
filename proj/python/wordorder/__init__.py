"""Counterfactual word-order corpora and information-density metrics."""

try:
    from ._wordorder import *  # noqa: F401,F403  (installed wheel layout)
    from ._wordorder import __doc__, __version__  # noqa: F401
except ImportError:
    # Build-tree layout: the extension sits on PYTHONPATH next to this package.
    from _wordorder import *  # noqa: F401,F403
    from _wordorder import __doc__, __version__  # noqa: F401

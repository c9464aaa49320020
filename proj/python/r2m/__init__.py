"""Recurrent relational memory concepts-to-sentence model."""

try:
    from ._r2m import *  # noqa: F401,F403  (installed package layout)
    from ._r2m import __doc__ as _doc
except ImportError:  # in-tree build: _r2m sits on PYTHONPATH
    from _r2m import *  # noqa: F401,F403
    from _r2m import __doc__ as _doc

__doc__ = _doc

"""Selects the jet evaluation kernel at import time.

The compiled kernel is used when it was built; otherwise the numpy
implementation.  Set ``SEMICONF_BACKEND=python`` to force the fallback.
"""
import os

from . import _jet_py

BACKEND = "python"
_eval = _jet_py.eval_tape

if os.environ.get("SEMICONF_BACKEND", "").lower() != "python":
    try:
        from . import _jetkernel
    except ImportError:
        _jetkernel = None
    else:
        BACKEND = "compiled"
        _eval = _jetkernel.eval_tape


def eval_tape(tape, points, backend=None):
    """Evaluate every output of ``tape`` at each row of ``points``.

    Returns ``(value[P, O], grad[P, O, m], hess[P, O, m, m], fail[P])``;
    ``fail[p]`` is the tape slot that left its domain at point ``p``, or -1.
    """
    fn = _eval
    if backend == "python":
        fn = _jet_py.eval_tape
    elif backend == "compiled":
        if BACKEND != "compiled":
            raise RuntimeError("compiled jet kernel is not available")
        fn = _jetkernel.eval_tape
    return fn(tape.op, tape.a, tape.b, tape.c, tape.outputs, tape.nvars, points)

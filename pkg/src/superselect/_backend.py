"""Kernel selection: compiled extension when importable, numpy otherwise."""

from superselect import _fallback

try:
    from superselect import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = _compiled if _compiled is not None else _fallback

def available():
    """Names of the backends that can be selected."""
    return ["compiled", "python"] if _compiled is not None else ["python"]

def current():
    return "compiled" if _active is _compiled and _compiled is not None else "python"

def use(name):
    """Switch the active backend ("compiled" or "python"); returns the previous name."""
    global _active
    previous = current()
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    elif name == "python":
        _active = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous

def eigh(a):
    return _active.eigh(a)

def expi(h, s):
    return _active.expi(h, s)

def mean_error_sq(coeffs, basis, time, meter, observable, states):
    return _active.mean_error_sq(coeffs, basis, time, meter, observable, states)


def jacobi_eigh(a):
    return _active.jacobi_eigh(a)


def coordinate_search(x0, basis, time, meter, observable, states, budget, initial_step, min_step):
    return _active.coordinate_search(x0, basis, time, meter, observable, states, budget,
                                     initial_step, min_step)

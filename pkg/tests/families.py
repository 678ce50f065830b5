"""Seeded random fixtures shared by the module tests and the acceptance suite."""
import numpy as np

from semiconf.minkowski2 import Branch, make_pair

# increasing on all of R for positive a, b
_TEMPLATES = {
    "polynomial": "{a}*s^3 + {b}*s + {c}",
    "tanh": "{a}*tanh({b}*s) + {c}",
    "atan": "{a}*atan({b}*s + {c})",
    "exp": "{a}*exp({b}*s) + {c}",
}


def _f(rng, kind, sign):
    a, b = rng.uniform(0.3, 2.0, 2).round(4)
    c = round(float(rng.uniform(-1, 1)), 4)
    body = _TEMPLATES[kind].format(a=a, b=b, c=c)
    return body if sign > 0 else f"-({body})"


def pair_family(seed: int = 2024, count: int = 20):
    """Monotone pairs on (-1, 1) cycling through kinds, branches and patterns."""
    rng = np.random.default_rng(seed)
    kinds = list(_TEMPLATES)
    out = []
    for i in range(count):
        sign = 1 if (i // 2) % 2 == 0 else -1
        branch = Branch.DIRECT if i % 2 == 0 else Branch.SWAPPED
        psi = _f(rng, kinds[i % 4], sign)
        chi = _f(rng, kinds[(i + 1 + i // 4) % 4], sign)
        out.append(make_pair(psi, chi, branch))
    return out


def wave_family(seed: int = 99, count: int = 10):
    """Expressions f(x + t) + g(x - t) in (x, t) with randomized smooth f, g."""
    rng = np.random.default_rng(seed)
    shapes_f = ["{a}*sin({b}*({arg}))", "{a}*({arg})^3", "{a}*exp({b}*({arg}))",
                "{a}*atan({b}*({arg}))", "{a}*cosh({b}*({arg}))"]
    out = []
    for i in range(count):
        a1, b1, a2, b2 = rng.uniform(0.2, 2.0, 4).round(4)
        f = shapes_f[i % 5].format(a=a1, b=b1, arg="x + t")
        g = shapes_f[(i + 2) % 5].format(a=a2, b=b2, arg="x - t")
        out.append(f"{f} + {g}")
    return out
